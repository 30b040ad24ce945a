"""Entropic projection onto the clipped simplex and the clipped OMD step.

The projection of a positive vector p onto {w : w[i] >= floor, sum w = 1}
under KL has the closed form w[i] = max(floor, c * p[i]), with c the unique
scale that makes w sum to one. Sorting p ascending, the clipped coordinates
form a prefix; the first prefix length k whose scale (1 - k*floor) / sum of
the remaining p lifts the smallest remaining coordinate above the floor is
the answer.
"""

from dataclasses import dataclass

import numpy as np

from cliptrack import kernels
from cliptrack.errors import DomainError, InfeasibleError

FEASIBILITY_SLACK = 1e-12


@dataclass(frozen=True)
class ClippedProjectionResult:
    point: np.ndarray
    clipped_mask: np.ndarray
    scale: float


def check_floor(floor, k):
    if not floor >= 0.0:
        raise DomainError(f"clip floor must be non-negative, got {floor!r}")
    if floor * k > 1.0 + FEASIBILITY_SLACK:
        raise InfeasibleError(f"clip floor {floor!r} times K={k} exceeds 1")


def kl_project_clipped(p, clip_floor):
    """KL projection of a strictly positive vector onto the clipped simplex.

    ``p`` need not be normalized. Runs in O(K log K).
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise DomainError("p must be a non-empty 1-D vector")
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
        raise DomainError("p must be strictly positive and finite")
    check_floor(clip_floor, p.size)
    point, scale, mask = kernels.waterfill(p, float(clip_floor))
    point.setflags(write=False)
    mask.setflags(write=False)
    return ClippedProjectionResult(point, mask, float(scale))


def clipped_omd_step(w, g, eta, clip_floor):
    """One mirror-descent step restricted to the clipped simplex.

    Equivalent to projecting w * exp(-eta * g); exponents are shifted by
    their maximum before exponentiation.
    """
    w = np.asarray(w, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if w.shape != g.shape:
        raise DomainError(f"dimension mismatch {w.shape} vs {g.shape}")
    if np.any(w <= 0.0):
        raise DomainError("w must be strictly positive")
    check_floor(clip_floor, w.size)
    return kernels.omd_step(w, g, float(eta), float(clip_floor))
