import math

import numpy as np
import pytest

from cliptrack.errors import ConfigError, DomainError
from cliptrack.learners import PCS
from cliptrack.matrix import (
    PCSP,
    SpectraplexPoint,
    diagonal_embedding,
    matrix_exp,
    matrix_log,
    spectral_norm,
    sym_eig,
    von_neumann_divergence,
    von_neumann_entropy,
    vn_project_clipped,
)
from cliptrack.oracles import vn_project_oracle
from cliptrack.projections import kl_project_clipped
from cliptrack.runner import run_learner
from cliptrack.selfcheck import random_clipped_matrix, random_orthogonal
from cliptrack.simplex import HorizonConfig, kl_divergence, negative_entropy
from cliptrack.verification import max_deviation


def test_sym_eig_reconstructs(rng):
    g = rng.standard_normal((6, 6))
    a = g + g.T
    vecs, vals = sym_eig(a)
    assert np.allclose((vecs * vals) @ vecs.T, a, atol=1e-12)
    with pytest.raises(DomainError):
        sym_eig(g + np.eye(6) * 0 + np.triu(np.ones((6, 6)), 1))


def test_log_exp_roundtrip(rng):
    w = random_clipped_matrix(rng, 5, 0.05)
    assert np.allclose(matrix_exp(matrix_log(w)), w, atol=1e-12)


def test_diagonal_reductions():
    w = np.array([0.5, 0.3, 0.2])
    v = np.array([0.2, 0.2, 0.6])
    assert von_neumann_entropy(np.diag(w)) == pytest.approx(negative_entropy(w), abs=1e-15)
    assert von_neumann_divergence(np.diag(w), np.diag(v)) == pytest.approx(kl_divergence(w, v), abs=1e-14)


def test_entropy_of_uniform():
    assert von_neumann_entropy(SpectraplexPoint.uniform(4)) == pytest.approx(-math.log(4), abs=1e-15)


def test_point_validation():
    with pytest.raises(DomainError):
        SpectraplexPoint.from_matrix(np.diag([0.6, 0.6]))
    with pytest.raises(DomainError):
        SpectraplexPoint.from_matrix(np.diag([1.2, -0.2]))
    p = SpectraplexPoint.uniform(3)
    assert p.K == 3 and p.min_eigenvalue == pytest.approx(1 / 3)
    assert np.array(p).shape == (3, 3)


def test_projection_rotation_equivariant(rng):
    q = random_orthogonal(rng, 4)
    lam = np.array([0.7, 0.2, 0.08, 0.02])
    p = (q * lam) @ q.T
    out = vn_project_clipped(p, 0.05)
    expect = (q * kl_project_clipped(lam, 0.05).point) @ q.T
    assert np.allclose(out.matrix, expect, atol=1e-12)


def test_projection_against_oracle(rng):
    for _ in range(20):
        k = int(rng.integers(2, 6))
        q = random_orthogonal(rng, k)
        p = (q * np.exp(rng.normal(0, 1, k))) @ q.T
        floor = rng.uniform(0, 1 / k)
        ours = vn_project_clipped(p, floor).matrix
        assert np.allclose(ours, vn_project_oracle(p, floor), atol=1e-5)


def test_pcsp_diagonal_matches_pcs(rng):
    T, K, S = 150, 5, 2
    cfg = HorizonConfig(T, K, S, 0.3)
    losses = rng.random((T, K))
    diag = np.zeros((T, K, K))
    diag[:, np.arange(K), np.arange(K)] = losses
    a = run_learner(PCSP(cfg), diag)
    b = run_learner(PCS(cfg), losses)
    da = np.diagonal(a.predictions, axis1=1, axis2=2)
    assert np.max(np.abs(da - b.predictions)) < 1e-12
    assert np.max(np.abs(a.learner_losses - b.learner_losses)) < 1e-12


def test_pcsp_stays_clipped(rng):
    T, K, S = 100, 4, 3
    cfg = HorizonConfig(T, K, S, 0.5)
    learner = PCSP(cfg)
    for _ in range(T):
        g = rng.standard_normal((K, K))
        z = (g + g.T) / 2
        learner.update(z / spectral_norm(z))
        w = learner.predict()
        assert w.min_eigenvalue >= cfg.clip_floor - 1e-12
        assert abs(np.trace(w.matrix) - 1) < 1e-12


def test_pcsp_rejects():
    with pytest.raises(ConfigError):
        PCSP(HorizonConfig(10, 3, 1, 0.7))
    learner = PCSP(HorizonConfig(10, 3, 1, 0.5))
    with pytest.raises(DomainError):
        learner.update(2.0 * np.eye(3))
    with pytest.raises(DomainError):
        learner.update(np.eye(2) * 0.5)


def test_diagonal_embedding():
    p = diagonal_embedding([0.25, 0.75])
    assert np.allclose(p.matrix, np.diag([0.25, 0.75]))


def two_by_two():
    vecs, vals = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    return vecs, vals


def test_two_by_two_eigs():
    vecs, vals = two_by_two()
    assert np.allclose(vals, [3.0, 1.0], atol=1e-14)
    s = 1 / math.sqrt(2)
    assert np.allclose(np.abs(vecs[:, 0]), [s, s]) and np.allclose(np.abs(vecs[:, 1]), [s, s])
    assert vecs[0, 0] * vecs[1, 0] > 0 and vecs[0, 1] * vecs[1, 1] < 0


def test_log_example():
    vecs, _ = two_by_two()
    w = (vecs * [0.9, 0.1]) @ vecs.T
    expect = (vecs * np.log([0.9, 0.1])) @ vecs.T
    assert np.allclose(matrix_log(w), expect, atol=1e-13)
    assert np.allclose(matrix_exp(expect), w, atol=1e-13)


def test_divergence_two_ways():
    vecs, _ = two_by_two()
    b = (vecs * [0.9, 0.1]) @ vecs.T
    a = np.eye(2) / 2
    direct = float(np.trace(a @ (matrix_log(a) - matrix_log(b))))
    # both have unit trace, so the linear terms cancel
    assert von_neumann_divergence(a, b) == pytest.approx(direct, abs=1e-13)
    x, y = np.diag([0.3, 0.7]), np.diag([0.6, 0.4])
    assert von_neumann_divergence(x, y) == pytest.approx(
        float(np.trace(x @ (matrix_log(x) - matrix_log(y)))), abs=1e-14)
