# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Exact greedy split search for squared-error regression trees (compiled kernel).

Must stay arithmetically identical to ``_split_py.best_split``.
"""

cdef double TIE_TOL = 1e-12


cdef inline double _midpoint(double a, double b):
    cdef double m = 0.5 * (a + b)
    if m >= b:
        m = a
    return m


cdef double _scan(const double[:, :] X, const Py_ssize_t[:, :] presorted,
                  const unsigned char[:] in_node, const double[:] resid,
                  Py_ssize_t min_leaf, Py_ssize_t n_node, double total,
                  double cutoff, bint find_first,
                  Py_ssize_t* out_feat, Py_ssize_t* out_pos):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t f, k, row, prev_row, n_left, n_right
    cdef double s_left, s_right, gain, best, base
    best = -1.0
    base = total * total / n_node
    for f in range(d):
        n_left = 0
        s_left = 0.0
        prev_row = -1
        for k in range(n):
            row = presorted[f, k]
            if not in_node[row]:
                continue
            if prev_row >= 0 and X[prev_row, f] < X[row, f]:
                n_right = n_node - n_left
                if n_left >= min_leaf and n_right >= min_leaf:
                    s_right = total - s_left
                    gain = s_left * s_left / n_left + s_right * s_right / n_right - base
                    if find_first:
                        if gain >= cutoff:
                            out_feat[0] = f
                            out_pos[0] = prev_row
                            return gain
                    elif gain > best:
                        best = gain
            n_left += 1
            s_left += resid[row]
            prev_row = row
    return best


def best_split(const double[:, :] X, const Py_ssize_t[:, :] presorted,
               const unsigned char[:] in_node, const double[:] resid, Py_ssize_t min_leaf):
    """Return ``(feature, threshold, gain)``; feature is -1 when no split helps."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t i, n_node = 0
    cdef double total = 0.0, ss = 0.0, best, gain
    cdef Py_ssize_t feat = -1, pos = -1, k, row, f
    for i in range(n):
        if in_node[i]:
            n_node += 1
            total += resid[i]
            ss += resid[i] * resid[i]
    if n_node < 2 * min_leaf:
        return -1, 0.0, 0.0
    best = _scan(X, presorted, in_node, resid, min_leaf, n_node, total, 0.0, False, &feat, &pos)
    if best <= 0.0 or best <= TIE_TOL * ss:
        return -1, 0.0, 0.0
    gain = _scan(X, presorted, in_node, resid, min_leaf, n_node, total,
                 best - TIE_TOL * (1.0 + best), True, &feat, &pos)
    # the split lies between X[pos, feat] and the next larger in-node value
    f = feat
    cdef double lo = X[pos, f]
    cdef double hi = lo
    for k in range(n):
        row = presorted[f, k]
        if in_node[row] and X[row, f] > lo:
            hi = X[row, f]
            break
    return feat, _midpoint(lo, hi), gain
