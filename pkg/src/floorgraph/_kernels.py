"""Compiled SGD inner loops for E-LINE / LINE(2nd) negative sampling.

Randomness comes from an inline xorshift64* generator whose state is a
one-element uint64 array, so every worker thread owns its stream.
"""

import math

import numba
import numpy as np

_MULT = np.uint64(0x2545F4914F6CDD1D)
_S11 = np.uint64(11)
_S12 = np.uint64(12)
_S16 = np.uint64(16)
_S25 = np.uint64(25)
_S27 = np.uint64(27)
_LOW16 = np.uint64(0xFFFF)
_TWO_M53 = 1.0 / 9007199254740992.0


def seed_state(seed: int) -> np.ndarray:
    """Non-zero generator state from an integer seed (splitmix64 finaliser)."""
    mask = 0xFFFFFFFFFFFFFFFF
    z = (int(seed) + 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    z ^= z >> 31
    return np.array([z or 1], dtype=np.uint64)


@numba.njit(cache=True, inline="always")
def _next(state):
    x = state[0]
    x ^= x >> _S12
    x ^= x << _S25
    x ^= x >> _S27
    state[0] = x
    return x * _MULT


@numba.njit(cache=True, inline="always")
def _uniform(state):
    return (_next(state) >> _S11) * _TWO_M53


@numba.njit(cache=True, inline="always")
def _draw(prob, alias, state):
    n = prob.shape[0]
    k = int(_uniform(state) * n)
    if k == n:
        k = n - 1
    if _uniform(state) < prob[k]:
        return k
    return alias[k]


@numba.njit(cache=True)
def draw_many(prob, alias, state, n):
    """``n`` alias draws from the kernel generator (exposed for distribution tests)."""
    out = np.empty(n, dtype=np.int64)
    for k in range(n):
        out[k] = _draw(prob, alias, state)
    return out


@numba.njit(cache=True, inline="always")
def _sig(x):
    """(sigmoid(x), exp(-|x|)) with a single exp call."""
    e = math.exp(-abs(x))
    if x >= 0:
        return 1.0 / (1.0 + e), e
    return e / (1.0 + e), e


@numba.njit(cache=True, nogil=True)
def sgd_step(ego, ctx, i, j, negs, weight, lr, eline, trainable, masks, work, want_loss):
    """One simultaneous gradient step on the loss term of directed edge (i, j).

    ``masks`` holds dropout multipliers for (ego i, ctx i, ego j, ctx j), shape
    (4, d); ``work`` is scratch of shape (6 + 2K, d). Every gradient is formed
    from the pre-step values before any row is written, and only rows flagged
    in ``trainable`` are written. Returns the weighted pre-step loss when
    ``want_loss`` is set, otherwise 0.
    """
    d = ego.shape[1]
    K = negs.shape[0]
    ui = work[0]
    ci = work[1]
    uj = work[2]
    cj = work[3]
    g_ui = work[4]
    g_ci = work[5]
    for t in range(d):
        ui[t] = ego[i, t] * masks[0, t]
        ci[t] = ctx[i, t] * masks[1, t]
        uj[t] = ego[j, t] * masks[2, t]
        cj[t] = ctx[j, t] * masks[3, t]

    loss = 0.0
    a = 0.0
    for t in range(d):
        a += cj[t] * ui[t]
    sa, e = _sig(a)
    ga = 1.0 - sa
    if want_loss:
        loss += math.log1p(e) + max(-a, 0.0)
    gb = 0.0
    if eline:
        b = 0.0
        for t in range(d):
            b += uj[t] * ci[t]
        sb, e = _sig(b)
        gb = 1.0 - sb
        if want_loss:
            loss += math.log1p(e) + max(-b, 0.0)
    for t in range(d):
        g_ui[t] = -ga * cj[t]
        g_ci[t] = -gb * uj[t]

    for k in range(K):
        z = negs[k]
        g_cz = work[6 + 2 * k]
        g_uz = work[7 + 2 * k]
        p = 0.0
        for t in range(d):
            p += ctx[z, t] * ui[t]
        sp, e = _sig(p)
        if want_loss:
            loss += math.log1p(e) + max(p, 0.0)
        for t in range(d):
            g_ui[t] += sp * ctx[z, t]
            g_cz[t] = sp * ui[t]
        if eline:
            q = 0.0
            for t in range(d):
                q += ego[z, t] * ci[t]
            sq, e = _sig(q)
            if want_loss:
                loss += math.log1p(e) + max(q, 0.0)
            for t in range(d):
                g_ci[t] += sq * ego[z, t]
                g_uz[t] = sq * ci[t]

    step = lr * weight
    if trainable[j]:
        for t in range(d):
            ctx[j, t] += step * ga * ui[t] * masks[3, t]
            if eline:
                ego[j, t] += step * gb * ci[t] * masks[2, t]
    if trainable[i]:
        for t in range(d):
            ego[i, t] -= step * g_ui[t] * masks[0, t]
            if eline:
                ctx[i, t] -= step * g_ci[t] * masks[1, t]
    for k in range(K):
        z = negs[k]
        if trainable[z]:
            g_cz = work[6 + 2 * k]
            g_uz = work[7 + 2 * k]
            for t in range(d):
                ctx[z, t] -= step * g_cz[t]
                if eline:
                    ego[z, t] -= step * g_uz[t]
    return weight * loss


@numba.njit(cache=True, nogil=True)
def apply_step(ego, ctx, i, j, negs, weight, lr, eline):
    """Single dropout-free step on every row; used to check the kernel against the reference gradient."""
    d = ego.shape[1]
    masks = np.ones((4, d))
    work = np.empty((6 + 2 * negs.shape[0], d))
    trainable = np.ones(ego.shape[0], dtype=np.bool_)
    return sgd_step(ego, ctx, i, j, negs, weight, lr, eline, trainable, masks, work, True)


@numba.njit(cache=True, nogil=True)
def sgd_loop(
    ego, ctx, src, dst, edge_prob, edge_alias, noise_prob, noise_alias,
    n_samples, K, lr0, decay, dropout, eline, trainable, state, trace_every, trace,
):
    """Edge-sampled SGD: ``n_samples`` steps, each on one directed edge drawn by weight.

    Negatives equal to the positive target are redrawn. ``decay`` lowers the
    rate linearly from ``lr0`` to ``0.1 * lr0``. Dropout keeps a coordinate
    when a 16-bit slice of a draw clears ``round(dropout * 65536)``. The loss
    is evaluated on every 8th step; chunk means land in ``trace`` once per
    ``trace_every`` steps. Returns the number of trace slots written.
    """
    d = ego.shape[1]
    negs = np.empty(K, dtype=np.int64)
    masks = np.ones((4, d))
    work = np.empty((6 + 2 * K, d))
    keep_scale = 1.0 / (1.0 - dropout)
    cut = np.uint64(int(round(dropout * 65536.0)))
    acc = 0.0
    counted = 0
    since = 0
    slot = 0
    for s in range(n_samples):
        lr = lr0
        if decay:
            lr = lr0 * (1.0 - 0.9 * s / n_samples)
        e = _draw(edge_prob, edge_alias, state)
        i = src[e]
        j = dst[e]
        for k in range(K):
            z = _draw(noise_prob, noise_alias, state)
            while z == j:
                z = _draw(noise_prob, noise_alias, state)
            negs[k] = z
        if dropout > 0.0:
            bits = np.uint64(0)
            left = 0
            for r in range(4):
                for t in range(d):
                    if left == 0:
                        bits = _next(state)
                        left = 4
                    masks[r, t] = keep_scale if (bits & _LOW16) >= cut else 0.0
                    bits >>= _S16
                    left -= 1
        track = (s & 7) == 0
        loss = sgd_step(ego, ctx, i, j, negs, 1.0, lr, eline, trainable, masks, work, track)
        if track:
            acc += loss
            counted += 1
        since += 1
        if since == trace_every or s == n_samples - 1:
            trace[slot] = acc / max(counted, 1)
            slot += 1
            acc = 0.0
            counted = 0
            since = 0
    return slot
