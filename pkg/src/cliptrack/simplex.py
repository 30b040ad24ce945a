"""Distributions over K experts, loss vectors, and the entropy geometry."""

import math
from dataclasses import dataclass, field

import numpy as np

from cliptrack.errors import ConfigError, DomainError

SUM_TOL = 1e-12
ENTRY_TOL = -1e-15


def as_distribution(w, tol=SUM_TOL):
    """Validate ``w`` as a point of the simplex and return a read-only copy."""
    arr = np.array(w, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("a distribution must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)) or arr.min() < ENTRY_TOL:
        raise DomainError(f"negative or non-finite weight in {arr!r}")
    if abs(arr.sum() - 1.0) > tol:
        raise DomainError(f"weights sum to {arr.sum()!r}, not 1")
    arr.setflags(write=False)
    return arr


def as_loss_vector(loss, k=None):
    arr = np.array(loss, dtype=np.float64)
    if arr.ndim != 1:
        raise DomainError("a loss vector must be 1-D")
    if k is not None and arr.shape[0] != k:
        raise DomainError(f"expected {k} losses, got {arr.shape[0]}")
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainError("losses must lie in [0, 1]")
    arr.setflags(write=False)
    return arr


def uniform(k):
    return np.full(k, 1.0 / k)


def in_clipped_simplex(w, floor, tol=SUM_TOL):
    w = np.asarray(w)
    return bool(abs(w.sum() - 1.0) <= tol and w.min() >= floor - tol)


@dataclass(frozen=True)
class HorizonConfig:
    """Horizon T, experts K, segments S and learning rate eta.

    ``clip_floor`` is S/(T*K), the per-coordinate lower bound of the
    clipped simplex.
    """

    T: int
    K: int
    S: int
    eta: float = 1.0
    clip_floor: float = field(init=False)

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ConfigError(f"T must be a positive integer, got {self.T!r}")
        if int(self.K) != self.K or self.K < 2:
            raise ConfigError(f"K must be an integer >= 2, got {self.K!r}")
        if int(self.S) != self.S or not 1 <= self.S <= self.T:
            raise ConfigError(f"S must satisfy 1 <= S <= T, got S={self.S!r}, T={self.T!r}")
        if not self.eta > 0 or not math.isfinite(self.eta):
            raise ConfigError(f"eta must be positive and finite, got {self.eta!r}")
        object.__setattr__(self, "clip_floor", self.S / (self.T * self.K))

    @property
    def log_term(self):
        """log(K*T/S), the per-segment price of restarting on the clipped simplex."""
        return math.log(self.K * self.T / self.S)


def negative_entropy(w):
    """Sum of w[i] * log(w[i]) with the 0 log 0 = 0 convention."""
    w = np.asarray(w, dtype=np.float64)
    pos = w > 0
    return float(np.sum(w[pos] * np.log(w[pos])))


def kl_divergence(x, y):
    """Bregman divergence of the negative entropy: sum x log(x / y).

    Raises DomainError when y vanishes on the support of x.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DomainError(f"dimension mismatch {x.shape} vs {y.shape}")
    pos = x > 0
    if np.any(y[pos] <= 0):
        raise DomainError("y must be positive wherever x is positive")
    return float(np.sum(x[pos] * np.log(x[pos] / y[pos])))


def weighted_loss(w, loss):
    w = np.asarray(w, dtype=np.float64)
    loss = np.asarray(loss, dtype=np.float64)
    if w.shape != loss.shape:
        raise DomainError(f"dimension mismatch {w.shape} vs {loss.shape}")
    return float(w @ loss)
