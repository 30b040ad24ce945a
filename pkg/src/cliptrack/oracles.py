"""Slow, generic solvers used to certify the closed-form projections.

Both oracles run projected gradient with Barzilai-Borwein step sizes and a
noise-tolerant sufficient-decrease backtrack, and stop on the unit-step
gradient-mapping (KKT) residual. They share no code with the water-filling
path: projections here are Euclidean, and the matrix oracle uses LAPACK
``eigh`` instead of the Jacobi kernel.
"""

import itertools

import numpy as np

from cliptrack import kernels
from cliptrack.comparator import _fold, as_loss_sequence, as_matrix_sequence, segment_sum
from cliptrack.errors import ConvergenceError, DomainError
from cliptrack.projections import check_floor

MAX_ITER = 200_000


def euclidean_simplex_projection(x, total=1.0):
    """Euclidean projection onto {y >= 0, sum y = total} (sort-and-threshold)."""
    x = np.asarray(x, dtype=np.float64)
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - total
    ind = np.arange(1, x.size + 1)
    rho = np.count_nonzero(u - css / ind > 0)
    theta = css[rho - 1] / rho
    return np.maximum(x - theta, 0.0)


def _project_shifted(x, floor, k):
    # {y >= floor, sum y = 1} is floor + (1 - k*floor) * simplex
    return floor + euclidean_simplex_projection(x - floor, 1.0 - k * floor)


def _pgd(obj, grad, proj, x0, tolerance, max_iter, inner=np.vdot):
    x = x0
    fx = obj(x)
    gx = grad(x)
    step = 1.0
    for _ in range(max_iter):
        residual = np.max(np.abs(x - proj(x - gx)))
        if residual < tolerance:
            return x
        while True:
            x_new = proj(x - step * gx)
            d = x_new - x
            f_new = obj(x_new)
            bound = fx + inner(gx, d) + inner(d, d) / (2.0 * step)
            if f_new <= bound + 1e-15 * (1.0 + abs(fx)) or step < 1e-16:
                break
            step *= 0.5
        g_new = grad(x_new)
        y = g_new - gx
        sy = inner(d, y)
        step = inner(d, d) / sy if sy > 0 else step * 2.0
        step = min(max(step, 1e-12), 1e12)
        x, fx, gx = x_new, f_new, g_new
    raise ConvergenceError(f"projected gradient did not reach {tolerance} in {max_iter} iterations")


def kl_project_oracle(p, clip_floor, tolerance=1e-12, max_iter=MAX_ITER):
    """Numerically minimize KL(w || p) over the clipped simplex."""
    p = np.asarray(p, dtype=np.float64)
    if np.any(p <= 0.0):
        raise DomainError("p must be strictly positive")
    k = p.size
    check_floor(clip_floor, k)
    if 1.0 - k * clip_floor <= 1e-15:
        return np.full(k, 1.0 / k)
    logp = np.log(p / p.sum())

    def obj(w):
        return float(np.sum(w * (np.log(np.maximum(w, 1e-300)) - logp)))

    def grad(w):
        return np.log(np.maximum(w, 1e-300)) - logp + 1.0

    def proj(x):
        return _project_shifted(x, clip_floor, k)

    w = _pgd(obj, grad, proj, np.full(k, 1.0 / k), tolerance, max_iter)
    return w / w.sum()


def _spectral_project(x, floor):
    x = 0.5 * (x + x.T)
    lam, vecs = np.linalg.eigh(x)
    lam = _project_shifted(lam, floor, lam.size)
    return (vecs * lam) @ vecs.T


def _logm(x):
    lam, vecs = np.linalg.eigh(0.5 * (x + x.T))
    return (vecs * np.log(np.maximum(lam, 1e-300))) @ vecs.T


def vn_project_oracle(p_matrix, clip_floor, tolerance=1e-10, max_iter=MAX_ITER):
    """Numerically minimize the von Neumann divergence D(W || P) over the
    clipped spectraplex; returns the minimizer W."""
    p_matrix = np.asarray(p_matrix, dtype=np.float64)
    k = p_matrix.shape[0]
    check_floor(clip_floor, k)
    lam_p = np.linalg.eigvalsh(p_matrix)
    if lam_p.min() <= 0.0:
        raise DomainError("P must be positive definite")
    log_p = _logm(p_matrix / np.trace(p_matrix))

    def obj(w):
        lam = np.linalg.eigvalsh(0.5 * (w + w.T))
        lam = np.maximum(lam, 1e-300)
        return float(np.sum(lam * np.log(lam)) - np.sum(w * log_p))

    def grad(w):
        return _logm(w) + np.eye(k) - log_p

    def proj(x):
        return _spectral_project(x, clip_floor)

    w = _pgd(obj, grad, proj, np.eye(k) / k, tolerance, max_iter,
             inner=lambda a, b: float(np.sum(a * b)))
    return 0.5 * (w + w.T)


def brute_force_switching(losses, S):
    """Exhaustive minimum over all K^T sequences with at most S-1 switches."""
    losses = as_loss_sequence(losses)
    n, k = losses.shape
    best = np.inf
    for seq in itertools.product(range(k), repeat=n):
        if sum(a != b for a, b in zip(seq, seq[1:])) > S - 1:
            continue
        total = _fold(losses[t, i] for t, i in enumerate(seq))
        best = min(best, total)
    return best


def brute_force_matrix(losses, S):
    """Exhaustive minimum over all segmentations into at most S pieces, with
    each segment's λ_min from the same Jacobi kernel on the same fold."""
    losses = as_matrix_sequence(losses)
    n = losses.shape[0]
    best = np.inf
    for r in range(min(S, n)):
        for cuts in itertools.combinations(range(1, n), r):
            edges = (0,) + cuts + (n,)
            total = 0.0
            for a, e in zip(edges, edges[1:]):
                vals, _ = kernels.jacobi_eigh(segment_sum(losses, a, e - 1))
                total += float(vals[-1])
            best = min(best, total)
    return best
