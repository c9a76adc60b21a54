"""Independent reference implementations the production code is checked against.

None of these import the code path they verify.
"""

import math

import numpy as np


def scalar_loss_term(ego, ctx, i, j, negatives, c, eline=True):
    """Negative-sampling loss of one directed edge, written with plain floats."""

    def sig(x):
        return 1.0 / (1.0 + math.exp(-x))

    def dot(a, b):
        return sum(float(x) * float(y) for x, y in zip(a, b))

    inner = math.log(sig(dot(ctx[j], ego[i])))
    if eline:
        inner += math.log(sig(dot(ego[j], ctx[i])))
    for z in negatives:
        inner += math.log(sig(-dot(ctx[z], ego[i])))
        if eline:
            inner += math.log(sig(-dot(ego[z], ctx[i])))
    return -c * inner


def finite_difference_gradients(f, ego, ctx, eps=1e-4):
    """Central differences of ``f(ego, ctx)`` w.r.t. every entry of both arrays."""
    grads = {}
    for name, arr in (("ego", ego), ("context", ctx)):
        g = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + eps
            hi = f(ego, ctx)
            arr[idx] = old - eps
            lo = f(ego, ctx)
            arr[idx] = old
            g[idx] = (hi - lo) / (2 * eps)
        grads[name] = g
    return grads


def brute_force_constrained_merge(X, labeled, tie_rtol=1e-12):
    """Constrained average linkage by full recomputation at every step.

    Clusters are lists of point indices keyed by creation index; the pair
    with the smallest mean cross distance whose union holds at most one
    labeled point is merged, ties going to the smallest creation-index pair.
    Distances within ``tie_rtol`` (relative) of the minimum count as tied.
    Returns the final partition as a set of frozensets.
    """
    X = np.asarray(X, dtype=float)
    clusters = {k: [k] for k in range(len(X))}
    next_id = len(X)
    while True:
        allowed = []
        keys = sorted(clusters)
        for x, a in enumerate(keys):
            for b in keys[x + 1 :]:
                if sum(labeled[m] for m in clusters[a] + clusters[b]) > 1:
                    continue
                total = 0.0
                for p in clusters[a]:
                    for q in clusters[b]:
                        total += math.sqrt(float(((X[p] - X[q]) ** 2).sum()))
                allowed.append((total / (len(clusters[a]) * len(clusters[b])), a, b))
        if not allowed:
            break
        low = min(d for d, _, _ in allowed)
        a, b = min((a, b) for d, a, b in allowed if d <= low + tie_rtol * low)
        clusters[next_id] = clusters.pop(a) + clusters.pop(b)
        next_id += 1
    return {frozenset(v) for v in clusters.values()}


def confusion_metrics(predicted, truth, floors):
    """Micro/macro P, R, F from an explicit confusion matrix."""
    names = sorted(set(floors) | set(predicted) | set(truth))
    pos = {n: k for k, n in enumerate(names)}
    C = np.zeros((len(names), len(names)), dtype=np.int64)
    for p, t in zip(predicted, truth):
        C[pos[t], pos[p]] += 1
    tp = np.diag(C).astype(float)
    fp = C.sum(axis=0) - tp
    fn = C.sum(axis=1) - tp

    def div(a, b):
        return a / b if b else 0.0

    P = [div(tp[k], tp[k] + fp[k]) for k in range(len(names))]
    R = [div(tp[k], tp[k] + fn[k]) for k in range(len(names))]
    mp = div(tp.sum(), tp.sum() + fp.sum())
    mr = div(tp.sum(), tp.sum() + fn.sum())
    Mp = sum(P) / len(names)
    Mr = sum(R) / len(names)
    return {
        "micro_p": mp,
        "micro_r": mr,
        "micro_f": div(2 * mp * mr, mp + mr),
        "macro_p": Mp,
        "macro_r": Mr,
        "macro_f": div(2 * Mp * Mr, Mp + Mr),
    }
