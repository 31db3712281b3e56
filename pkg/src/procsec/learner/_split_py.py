"""Pure numpy split search; the fallback when the compiled kernel is unavailable.

The arithmetic mirrors ``_split.pyx`` operation for operation (sequential
prefix sums, same gain expression, same tie rule) so both backends grow
identical trees.
"""
import numpy as np

TIE_TOL = 1e-12


def _midpoint(a, b):
    m = 0.5 * (a + b)
    return a if m >= b else m


def best_split(X, presorted, in_node, resid, min_leaf):
    """Best ``(feature, threshold, gain)`` for the rows flagged in ``in_node``.

    Gain is the reduction in squared error of ``resid``. Among splits within
    a relative ``1e-12`` of the best gain the lowest feature index, then the
    lowest threshold, wins. Returns feature ``-1`` if nothing improves.
    """
    mask = in_node.astype(bool)
    r_node = resid[mask]
    n_node = r_node.shape[0]
    if n_node < 2 * min_leaf:
        return -1, 0.0, 0.0
    total = np.cumsum(r_node)[-1]
    ss = np.cumsum(r_node * r_node)[-1]
    base = total * total / n_node

    per_feature = []
    best = -1.0
    for f in range(X.shape[1]):
        order = presorted[f][mask[presorted[f]]]
        v = X[order, f]
        cs = np.cumsum(resid[order])
        j = np.nonzero(v[:-1] < v[1:])[0] + 1
        j = j[(j >= min_leaf) & (n_node - j >= min_leaf)]
        if j.size == 0:
            per_feature.append(None)
            continue
        s_left = cs[j - 1]
        s_right = total - s_left
        n_left = j.astype(np.float64)
        n_right = (n_node - j).astype(np.float64)
        gains = s_left * s_left / n_left + s_right * s_right / n_right - base
        per_feature.append((v, j, gains))
        top = gains.max()
        if top > best:
            best = top
    if best <= 0.0 or best <= TIE_TOL * ss:
        return -1, 0.0, 0.0
    cutoff = best - TIE_TOL * (1.0 + best)
    for f, entry in enumerate(per_feature):
        if entry is None:
            continue
        v, j, gains = entry
        hit = np.nonzero(gains >= cutoff)[0]
        if hit.size:
            k = j[hit[0]]
            return f, float(_midpoint(v[k - 1], v[k])), float(gains[hit[0]])
    return -1, 0.0, 0.0
