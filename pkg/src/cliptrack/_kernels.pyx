# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: clipped-simplex projection, OMD/Prod steps,
switching DP and cyclic Jacobi. Mirrors ``_kernels_py`` exactly in
tie-breaking; results agree to rounding."""

import numpy as np

from libc.math cimport exp, fabs, log, sqrt, INFINITY

cdef double _TINY = 1e-300
cdef double _OFF_FACTOR = 1e-4


cdef void _argsort_stable(const double[::1] x, Py_ssize_t[::1] idx) noexcept nogil:
    # insertion sort; K is small and ties must keep index order
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j, cur
    for i in range(n):
        idx[i] = i
    for i in range(1, n):
        cur = idx[i]
        j = i - 1
        while j >= 0 and x[idx[j]] > x[cur]:
            idx[j + 1] = idx[j]
            j -= 1
        idx[j + 1] = cur


cdef double _waterfill_into(const double[::1] p, double floor, double[::1] out,
                            Py_ssize_t[::1] idx, unsigned char[::1] clipped) noexcept nogil:
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i, k
    cdef double suffix = 0.0, scale = 0.0, total = 0.0
    _argsort_stable(p, idx)
    # suffix sums accumulated from the top, matching cumsum on the reversed order
    for i in range(n):
        out[i] = 0.0
    for i in range(n - 1, -1, -1):
        suffix += p[idx[i]]
        out[i] = suffix
    k = n - 1
    for i in range(n):
        scale = (1.0 - i * floor) / out[i]
        if scale * p[idx[i]] >= floor:
            k = i
            break
    scale = (1.0 - k * floor) / out[k]
    for i in range(n):
        clipped[i] = 0
    for i in range(k):
        clipped[idx[i]] = 1
    for i in range(n):
        if clipped[i]:
            out[i] = floor
        else:
            out[i] = scale * p[i]
        total += out[i]
    for i in range(n):
        out[i] /= total
    return scale


def waterfill(p, double floor):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0]
    out = np.empty(n, dtype=np.float64)
    clipped = np.empty(n, dtype=np.uint8)
    idx = np.empty(n, dtype=np.intp)
    cdef double scale = _waterfill_into(pv, floor, out, idx, clipped)
    return out, scale, clipped.astype(bool)


cdef void _finish(double[::1] p, double floor, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double total = 0.0
    for i in range(n):
        total += p[i]
    for i in range(n):
        out[i] = p[i] / total


def omd_step(w, g, double eta, double floor):
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t i, n = wv.shape[0]
    cdef double zmax = -INFINITY, pmax = 0.0, z
    p = np.empty(n, dtype=np.float64)
    cdef double[::1] pv = p
    for i in range(n):
        z = -eta * gv[i]
        if z > zmax:
            zmax = z
    for i in range(n):
        pv[i] = wv[i] * exp(-eta * gv[i] - zmax)
        if pv[i] > pmax:
            pmax = pv[i]
    if pmax < 1e-250:
        zmax = -INFINITY
        for i in range(n):
            z = (log(wv[i]) if wv[i] > 0.0 else -INFINITY) - eta * gv[i]
            pv[i] = z
            if z > zmax:
                zmax = z
        for i in range(n):
            pv[i] = exp(pv[i] - zmax)
    out = np.empty(n, dtype=np.float64)
    if floor <= 0.0:
        _finish(pv, floor, out)
        return out
    return waterfill(p, floor)[0]


def prod_step(w, loss, double eta, double floor):
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[::1] lv = np.ascontiguousarray(loss, dtype=np.float64)
    cdef Py_ssize_t i, n = wv.shape[0]
    p = np.empty(n, dtype=np.float64)
    cdef double[::1] pv = p
    for i in range(n):
        pv[i] = wv[i] * (1.0 - eta * lv[i])
    out = np.empty(n, dtype=np.float64)
    if floor <= 0.0:
        _finish(pv, floor, out)
        return out
    return waterfill(p, floor)[0]


def switching_dp(losses, Py_ssize_t n_segments):
    cdef const double[:, ::1] lv = np.ascontiguousarray(losses, dtype=np.float64)
    cdef Py_ssize_t n_rounds = lv.shape[0], k_dim = lv.shape[1]
    cdef Py_ssize_t n_sw = min(n_segments, n_rounds)
    cdef Py_ssize_t t, s, i, a1, a2
    cdef double m1, m2, sw, st
    cost_np = np.full((n_sw, k_dim), np.inf)
    new_np = np.empty((n_sw, k_dim))
    stay_np = np.ones((n_rounds, n_sw, k_dim), dtype=np.uint8)
    src_np = np.zeros((n_rounds, n_sw, k_dim), dtype=np.int64)
    cdef double[:, ::1] cost = cost_np
    cdef double[:, ::1] new = new_np
    cdef unsigned char[:, :, ::1] stay = stay_np
    cdef long long[:, :, ::1] src = src_np
    for i in range(k_dim):
        cost[0, i] = lv[0, i]
    with nogil:
        for t in range(1, n_rounds):
            for s in range(n_sw):
                for i in range(k_dim):
                    new[s, i] = INFINITY
            for s in range(n_sw):
                if s == 0:
                    for i in range(k_dim):
                        new[s, i] = lv[t, i] + cost[s, i]
                        stay[t, s, i] = 1
                    continue
                # two smallest of row s-1, ties to the lower index
                a1 = 0
                for i in range(1, k_dim):
                    if cost[s - 1, i] < cost[s - 1, a1]:
                        a1 = i
                a2 = 1 if a1 == 0 else 0
                for i in range(k_dim):
                    if i != a1 and cost[s - 1, i] < cost[s - 1, a2]:
                        a2 = i
                m1 = cost[s - 1, a1]
                m2 = cost[s - 1, a2]
                for i in range(k_dim):
                    st = cost[s, i]
                    if i == a1:
                        sw = m2
                        src[t, s, i] = a2
                    else:
                        sw = m1
                        src[t, s, i] = a1
                    if st <= sw:
                        stay[t, s, i] = 1
                        new[s, i] = lv[t, i] + st
                    else:
                        stay[t, s, i] = 0
                        new[s, i] = lv[t, i] + sw
            for s in range(n_sw):
                for i in range(k_dim):
                    cost[s, i] = new[s, i]

    cdef Py_ssize_t best_s = 0, best_i = 0
    cdef double best = INFINITY
    for s in range(n_sw):
        i = 0
        for a1 in range(1, k_dim):
            if cost[s, a1] < cost[s, i]:
                i = a1
        if cost[s, i] < best:
            best, best_s, best_i = cost[s, i], s, i
    seq = np.empty(n_rounds, dtype=np.int64)
    cdef long long[::1] sq = seq
    s, i = best_s, best_i
    for t in range(n_rounds - 1, -1, -1):
        sq[t] = i
        if t > 0 and not stay[t, s, i]:
            i = src[t, s, i]
            s -= 1
    return seq, best


cdef int _jacobi_one(double[:, ::1] a, double[:, ::1] v, double tol, int max_sweeps) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, r
    cdef double frob = 0.0, off, thresh, apq, theta, t, c, s, tau, g, h
    cdef int sweep
    for p in range(n):
        for q in range(p + 1, n):
            g = 0.5 * (a[p, q] + a[q, p])
            a[p, q] = g
            a[q, p] = g
    for p in range(n):
        for q in range(n):
            frob += a[p, q] * a[p, q]
            v[p, q] = 1.0 if p == q else 0.0
    frob = sqrt(frob)
    thresh = tol * _OFF_FACTOR * (frob if frob > 1.0 else 1.0)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        off = sqrt(2.0 * off)
        if not off > thresh:
            return 0
        if sweep == max_sweeps:
            return 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if not fabs(apq) > _TINY:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0.0 else -1.0) / (fabs(theta) + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                g = a[p, p] - t * apq
                h = a[q, q] + t * apq
                for r in range(n):
                    if r == p or r == q:
                        continue
                    theta = a[r, p]
                    a[r, p] = theta - s * (a[r, q] + tau * theta)
                    a[r, q] = a[r, q] + s * (theta - tau * a[r, q])
                    a[p, r] = a[r, p]
                    a[q, r] = a[r, q]
                a[p, p] = g
                a[q, q] = h
                a[p, q] = 0.0
                a[q, p] = 0.0
                for r in range(n):
                    theta = v[r, p]
                    v[r, p] = theta - s * (v[r, q] + tau * theta)
                    v[r, q] = v[r, q] + s * (theta - tau * v[r, q])
    return 1


def jacobi_eigh_batch(a, double tol=1e-10, int max_sweeps=100):
    work = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = work.shape[0], k_dim = work.shape[1]
    vecs = np.empty_like(work)
    cdef double[:, :, ::1] av = work
    cdef double[:, :, ::1] vv = vecs
    cdef Py_ssize_t b
    cdef int failed = 0
    with nogil:
        for b in range(n):
            failed += _jacobi_one(av[b], vv[b], tol, max_sweeps)
    if failed:
        raise ArithmeticError(f"Jacobi did not converge in {max_sweeps} sweeps")
    vals = np.ascontiguousarray(work[:, range(k_dim), range(k_dim)])
    order = np.argsort(-vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)
    big = np.abs(vecs) > 1e-12
    first = np.argmax(big, axis=1)
    lead = np.take_along_axis(vecs, first[:, None, :], axis=1)[:, 0, :]
    sign = np.where(lead < 0.0, -1.0, 1.0)
    return vals, vecs * sign[:, None, :]


def jacobi_eigh(a, double tol=1e-10, int max_sweeps=100):
    vals, vecs = jacobi_eigh_batch(np.asarray(a, dtype=np.float64)[None], tol, max_sweeps)
    return vals[0], vecs[0]
