"""Pure-numpy implementations of the hot kernels.

Same call signatures and tie-breaking as the compiled ``_kernels`` module;
used when the extension is not built or ``CLIPTRACK_PURE_PYTHON`` is set.
"""

import numpy as np

_TINY = 1e-300
# Jacobi stops once the off-diagonal mass falls this far below ``tol``.
_OFF_FACTOR = 1e-4


def waterfill(p, floor):
    """Entropic projection of a positive vector onto {w >= floor, sum w = 1}.

    Returns ``(w, scale, clipped)``. Zero entries are tolerated here; they
    always end up clipped when ``floor > 0``.
    """
    p = np.asarray(p, dtype=np.float64)
    k_dim = p.shape[0]
    order = np.argsort(p, kind="stable")
    ps = p[order]
    suffix = np.cumsum(ps[::-1])[::-1]
    scales = (1.0 - np.arange(k_dim) * floor) / suffix
    ok = scales * ps >= floor
    ok[-1] = True  # feasible whenever floor * K <= 1, up to rounding
    k = int(np.argmax(ok))
    scale = float(scales[k])
    clipped = np.zeros(k_dim, dtype=bool)
    clipped[order[:k]] = True
    w = np.where(clipped, floor, scale * p)
    w /= w.sum()
    return w, scale, clipped


def _normalize(p):
    return p / p.sum()


def omd_step(w, g, eta, floor):
    """argmin over the clipped simplex of <x, eta*g> + KL(x || w)."""
    w = np.asarray(w, dtype=np.float64)
    z = -eta * np.asarray(g, dtype=np.float64)
    p = w * np.exp(z - z.max())
    if p.max() < 1e-250:
        # every surviving coordinate underflowed; redo in the log domain
        with np.errstate(divide="ignore"):
            lz = np.log(w) + z
        p = np.exp(lz - lz.max())
    if floor <= 0.0:
        return _normalize(p)
    return waterfill(p, floor)[0]


def prod_step(w, loss, eta, floor):
    """Multilinear update w * (1 - eta*loss) followed by the clipped projection."""
    w = np.asarray(w, dtype=np.float64)
    p = w * (1.0 - eta * np.asarray(loss, dtype=np.float64))
    if floor <= 0.0:
        return _normalize(p)
    return waterfill(p, floor)[0]


def switching_dp(losses, n_segments):
    """Best expert sequence with at most ``n_segments - 1`` switches.

    State ``cost[s, i]`` is the cheapest prefix ending at expert ``i`` with
    exactly ``s`` switches. Ties prefer staying, then the smaller expert
    index; the final pick prefers fewer switches, then the smaller index.
    """
    losses = np.asarray(losses, dtype=np.float64)
    n_rounds, k_dim = losses.shape
    n_sw = min(n_segments, n_rounds)
    cost = np.full((n_sw, k_dim), np.inf)
    cost[0] = losses[0]
    stay = np.ones((n_rounds, n_sw, k_dim), dtype=bool)
    src = np.zeros((n_rounds, n_sw, k_dim), dtype=np.int64)
    rows = np.arange(n_sw)
    cols = np.arange(k_dim)
    for t in range(1, n_rounds):
        order = np.argsort(cost, axis=1, kind="stable")
        a1 = order[:, 0]
        a2 = order[:, 1]
        m1 = cost[rows, a1]
        m2 = cost[rows, a2]
        is_first = cols[None, :] == a1[:, None]
        other_val = np.where(is_first, m2[:, None], m1[:, None])
        other_idx = np.where(is_first, a2[:, None], a1[:, None])
        switch_val = np.full_like(cost, np.inf)
        switch_val[1:] = other_val[:-1]
        switch_idx = np.zeros_like(src[0])
        switch_idx[1:] = other_idx[:-1]
        keep = cost <= switch_val
        stay[t] = keep
        src[t] = switch_idx
        cost = losses[t][None, :] + np.where(keep, cost, switch_val)

    best_s, best_i, best = 0, 0, np.inf
    for s in range(n_sw):
        i = int(np.argmin(cost[s]))
        if cost[s, i] < best:
            best_s, best_i, best = s, i, float(cost[s, i])
    seq = np.empty(n_rounds, dtype=np.int64)
    s, i = best_s, best_i
    for t in range(n_rounds - 1, -1, -1):
        seq[t] = i
        if t > 0 and not stay[t, s, i]:
            i = int(src[t, s, i])
            s -= 1
    return seq, best


def _sort_and_sign(vals, vecs):
    order = np.argsort(-vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)
    big = np.abs(vecs) > 1e-12
    first = np.argmax(big, axis=1)  # (N, K): first significant row per column
    lead = np.take_along_axis(vecs, first[:, None, :], axis=1)[:, 0, :]
    sign = np.where(lead < 0.0, -1.0, 1.0)
    return vals, vecs * sign[:, None, :]


def jacobi_eigh_batch(a, tol=1e-10, max_sweeps=100):
    """Cyclic Jacobi on a stack of symmetric matrices, shape (N, K, K).

    Returns eigenvalues sorted descending and orthonormal eigenvector
    columns; each column's first significant entry is positive.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    a = 0.5 * (a + np.swapaxes(a, 1, 2))
    n, k_dim, _ = a.shape
    v = np.zeros_like(a)
    v[:, range(k_dim), range(k_dim)] = 1.0
    frob = np.sqrt((a * a).sum(axis=(1, 2)))
    thresh = tol * _OFF_FACTOR * np.maximum(1.0, frob)
    iu = np.triu_indices(k_dim, 1)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * (a[:, iu[0], iu[1]] ** 2).sum(axis=1))
        active = off > thresh
        if not active.any():
            break
        for p in range(k_dim - 1):
            for q in range(p + 1, k_dim):
                apq = a[:, p, q].copy()
                rot = active & (np.abs(apq) > _TINY)
                if not rot.any():
                    continue
                safe = np.where(rot, apq, 1.0)
                theta = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
                big = np.abs(theta) > 1e150
                th = np.where(big, 1.0, theta)
                t = np.where(th >= 0.0, 1.0, -1.0) / (np.abs(th) + np.sqrt(th * th + 1.0))
                t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
                t = np.where(rot, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                app = a[:, p, p] - t * apq
                aqq = a[:, q, q] + t * apq
                colp = a[:, :, p].copy()
                colq = a[:, :, q].copy()
                newp = colp - s[:, None] * (colq + tau[:, None] * colp)
                newq = colq + s[:, None] * (colp - tau[:, None] * colq)
                a[:, :, p] = newp
                a[:, p, :] = newp
                a[:, :, q] = newq
                a[:, q, :] = newq
                a[:, p, p] = app
                a[:, q, q] = aqq
                a[:, p, q] = np.where(rot, 0.0, apq)
                a[:, q, p] = a[:, p, q]
                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = vp - s[:, None] * (vq + tau[:, None] * vp)
                v[:, :, q] = vq + s[:, None] * (vp - tau[:, None] * vq)
    else:
        off = np.sqrt(2.0 * (a[:, iu[0], iu[1]] ** 2).sum(axis=1))
        if (off > thresh).any():
            raise ArithmeticError(f"Jacobi did not converge in {max_sweeps} sweeps")
    vals = a[:, range(k_dim), range(k_dim)].copy()
    return _sort_and_sign(vals, v)


def jacobi_eigh(a, tol=1e-10, max_sweeps=100):
    vals, vecs = jacobi_eigh_batch(np.asarray(a, dtype=np.float64)[None], tol, max_sweeps)
    return vals[0], vecs[0]
