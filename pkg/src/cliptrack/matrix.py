"""Symmetric-matrix tools, the von Neumann geometry, and the PCSP learner.

All spectral functions go through the cyclic Jacobi kernel. The clipped
spectraplex constrains only eigenvalues, so the von Neumann projection of
a positive definite P keeps P's eigenbasis and water-fills its spectrum
(von Neumann's trace inequality makes the aligned basis optimal).
"""

import numpy as np

from cliptrack import kernels
from cliptrack.errors import ConfigError, DomainError
from cliptrack.projections import check_floor

SYM_TOL = 1e-12
NORM_TOL = 1e-10
SPECTRAPLEX_TOL = 1e-10


def as_symmetric(a, tol=SYM_TOL):
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    if np.max(np.abs(a - a.T)) > tol * max(1.0, np.max(np.abs(a))):
        raise DomainError("matrix is not symmetric")
    return a


def sym_eig(a, tolerance=1e-10):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Returns ``(V, eigenvalues)`` with eigenvalues descending and V's columns
    the matching orthonormal eigenvectors.
    """
    a = as_symmetric(a)
    vals, vecs = kernels.jacobi_eigh(a, tolerance)
    return vecs, vals


def _compose(vecs, vals):
    out = (vecs * vals) @ vecs.T
    return 0.5 * (out + out.T)


def _loss_spectrum(z):
    z = as_symmetric(z)
    vecs, lam = sym_eig(z)
    if np.max(np.abs(lam)) > 1.0 + NORM_TOL:
        raise DomainError(f"loss matrix has spectral norm {np.max(np.abs(lam))!r} > 1")
    z.setflags(write=False)
    return z, vecs, lam


def as_loss_matrix(z):
    """Validate a loss matrix: symmetric with spectral norm at most one."""
    return _loss_spectrum(z)[0]


class SpectraplexPoint:
    """A unit-trace PSD matrix together with its eigendecomposition."""

    __slots__ = ("matrix", "eigvecs", "eigvals")

    def __init__(self, eigvecs, eigvals, matrix=None):
        eigvals = np.asarray(eigvals, dtype=np.float64)
        eigvecs = np.asarray(eigvecs, dtype=np.float64)
        if eigvals.min() < -SPECTRAPLEX_TOL:
            raise DomainError(f"negative eigenvalue {eigvals.min()!r}")
        if abs(eigvals.sum() - 1.0) > SPECTRAPLEX_TOL:
            raise DomainError(f"trace {eigvals.sum()!r} is not 1")
        if matrix is None:
            matrix = _compose(eigvecs, eigvals)
        for arr in (eigvals, eigvecs, matrix):
            arr.setflags(write=False)
        self.eigvals = eigvals
        self.eigvecs = eigvecs
        self.matrix = matrix

    @classmethod
    def from_matrix(cls, w):
        vecs, vals = sym_eig(w)
        return cls(vecs, vals, as_symmetric(w))

    @classmethod
    def uniform(cls, k):
        return cls(np.eye(k), np.full(k, 1.0 / k))

    @property
    def K(self):
        return self.eigvals.size

    @property
    def min_eigenvalue(self):
        return float(self.eigvals.min())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"SpectraplexPoint(eigvals={np.array2string(self.eigvals, precision=6)})"


def _spectrum(w):
    if isinstance(w, SpectraplexPoint):
        return w.eigvecs, w.eigvals
    return sym_eig(w)


def matrix_log(w):
    """Spectral logarithm of a positive definite matrix or spectraplex point."""
    vecs, vals = _spectrum(w)
    if vals.min() <= 0.0:
        raise DomainError(f"matrix_log needs positive eigenvalues, got {vals.min()!r}")
    return _compose(vecs, np.log(vals))


matrix_log_general = matrix_log


def matrix_exp(a):
    vecs, vals = sym_eig(a)
    return _compose(vecs, np.exp(vals))


def von_neumann_entropy(w):
    """tr(W log W) with the 0 log 0 = 0 convention."""
    _, vals = _spectrum(w)
    pos = vals > 0
    return float(np.sum(vals[pos] * np.log(vals[pos])))


def von_neumann_divergence(a, b):
    """psi(A) - psi(B) - tr((A - B)(I + log B)); B must be positive definite."""
    _, vals_b = _spectrum(b)
    if vals_b.min() <= 0.0:
        raise DomainError("second argument must be positive definite")
    a_mat = np.asarray(a, dtype=np.float64)
    b_mat = np.asarray(b, dtype=np.float64)
    if a_mat.shape != b_mat.shape:
        raise DomainError(f"dimension mismatch {a_mat.shape} vs {b_mat.shape}")
    log_b = matrix_log(b)
    k = a_mat.shape[0]
    return (von_neumann_entropy(a) - von_neumann_entropy(b)
            - float(np.sum((a_mat - b_mat) * (np.eye(k) + log_b))))


def _project_spectrum(vecs, vals, clip_floor):
    if np.any(vals <= 0.0):
        raise DomainError("P must be positive definite")
    check_floor(clip_floor, vals.size)
    proj = kernels.waterfill(vals, float(clip_floor))[0]
    return SpectraplexPoint(vecs, proj)


def vn_project_clipped(p_matrix, clip_floor):
    """Von Neumann projection of a positive definite P onto the clipped spectraplex."""
    vecs, vals = sym_eig(p_matrix)
    return _project_spectrum(vecs, vals, clip_floor)


class PCSP:
    """Prod on the clipped spectraplex.

    Each update forms M = log W_t + log(I - eta Z_t) spectrally, then
    projects exp(M). Exponentiation is folded into the projection: only the
    spectrum of M is exponentiated (shifted by its maximum).
    """

    name = "pcsp"

    def __init__(self, config):
        if not 0.0 < config.eta <= 0.5:
            raise ConfigError(f"PCSP needs eta in (0, 1/2], got {config.eta!r}")
        self.config = config
        self.K = config.K
        self.eta = config.eta
        self.floor = config.clip_floor
        self.epoch = 1
        self.t = 1
        self._w = SpectraplexPoint.uniform(self.K)

    def predict(self):
        return self._w

    def update(self, z):
        z, zv, zl = _loss_spectrum(z)
        if z.shape != (self.K, self.K):
            raise DomainError(f"expected a {self.K}x{self.K} loss matrix, got {z.shape}")
        m = _compose(self._w.eigvecs, np.log(self._w.eigvals)) + _compose(zv, np.log1p(-self.eta * zl))
        mv, ml = sym_eig(m)
        p = np.exp(ml - ml.max())
        self._w = _project_spectrum(mv, p, self.floor)
        self.t += 1

    def __repr__(self):
        return f"PCSP(K={self.K}, eta={self.eta:.6g})"


def pcsp_learner(config):
    return PCSP(config)


def diagonal_embedding(w):
    """Vector distribution -> diagonal spectraplex point."""
    w = np.asarray(w, dtype=np.float64)
    return SpectraplexPoint.from_matrix(np.diag(w))


def spectral_norm(z):
    _, lam = sym_eig(z)
    return float(np.max(np.abs(lam)))

