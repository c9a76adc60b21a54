"""Walker/Vose alias tables for O(1) draws from a fixed discrete distribution."""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _build_tables(weights):
    n = weights.shape[0]
    scaled = weights * (n / weights.sum())
    prob = np.ones(n)
    alias = np.arange(n)
    small = np.empty(n, dtype=np.int64)
    large = np.empty(n, dtype=np.int64)
    ns = 0
    nl = 0
    for k in range(n):
        if scaled[k] < 1.0:
            small[ns] = k
            ns += 1
        else:
            large[nl] = k
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        g = large[nl - 1]
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            nl -= 1
            small[ns] = g
            ns += 1
    # leftovers carry probability one up to rounding
    return prob, alias


class AliasTable:
    """Discrete sampler over ``range(len(weights))`` with P(k) proportional to ``weights[k]``."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("alias table needs a non-empty 1-D weight vector")
        if not np.all(np.isfinite(w)) or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be finite, non-negative and not all zero")
        self.probabilities = w / w.sum()
        self.prob, self.alias = _build_tables(w)
        self.prob.flags.writeable = False
        self.alias.flags.writeable = False
        self.probabilities.flags.writeable = False

    def __len__(self) -> int:
        return self.prob.shape[0]

    def sample(self, rng: np.random.Generator, size: int | None = None):
        n = len(self)
        if size is None:
            k = int(rng.integers(n))
            return k if rng.random() < self.prob[k] else int(self.alias[k])
        k = rng.integers(n, size=size)
        return np.where(rng.random(size) < self.prob[k], k, self.alias[k])

    def implied_probabilities(self) -> np.ndarray:
        """Distribution actually encoded by the (prob, alias) pair."""
        n = len(self)
        out = self.prob / n
        np.add.at(out, self.alias, (1.0 - self.prob) / n)
        return out
