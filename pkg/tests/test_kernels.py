import numpy as np
import pytest

from cliptrack import kernels


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.available_backends()


def test_waterfill(backend):
    w, scale, clipped = backend.waterfill(np.array([0.9, 0.08, 0.02]), 0.05)
    assert np.allclose(w, [0.872449, 0.077551, 0.05], atol=1e-6)
    assert clipped.tolist() == [False, False, True]
    assert scale == pytest.approx(0.95 / 0.98, abs=1e-15)


def test_waterfill_readonly_input(backend):
    p = np.array([0.4, 0.6])
    p.setflags(write=False)
    w, _, _ = backend.waterfill(p, 0.1)
    assert np.allclose(w, p)


def test_backends_agree(rng):
    backs = kernels.available_backends()
    if len(backs) < 2:
        pytest.skip("compiled backend not built")
    cy, py = backs["cython"], backs["python"]
    for _ in range(200):
        k = int(rng.integers(2, 20))
        p = np.exp(rng.normal(0, 3, k))
        floor = rng.uniform(0, 1 / k)
        a, b = cy.waterfill(p, floor), py.waterfill(p, floor)
        # summation order differs (sequential vs pairwise), so allow a few ulps
        assert np.max(np.abs(a[0] - b[0])) <= 1e-15
        assert np.array_equal(a[2], b[2])
        w, g = a[0], rng.random(k)
        assert np.max(np.abs(cy.omd_step(w, g, 0.3, floor) - py.omd_step(w, g, 0.3, floor))) <= 1e-15
    losses = rng.random((40, 5))
    for s in (1, 3, 7):
        sa, la = cy.switching_dp(losses, s)
        sb, lb = py.switching_dp(losses, s)
        assert np.array_equal(sa, sb) and la == lb
    g = rng.standard_normal((30, 6, 6))
    mats = g + np.swapaxes(g, 1, 2)
    va, ua = cy.jacobi_eigh_batch(mats)
    vb, ub = py.jacobi_eigh_batch(mats)
    assert np.array_equal(va, vb) and np.array_equal(ua, ub)


def test_jacobi_matches_lapack(backend, rng):
    for k in (1, 2, 3, 8, 16):
        g = rng.standard_normal((k, k))
        a = g + g.T
        vals, vecs = backend.jacobi_eigh(a)
        assert np.allclose(vals, np.sort(np.linalg.eigvalsh(a))[::-1], atol=1e-10)
        assert np.allclose(vecs @ np.diag(vals) @ vecs.T, a, atol=1e-10)
        assert np.allclose(vecs.T @ vecs, np.eye(k), atol=1e-12)


def test_jacobi_batch_is_bitwise_single(backend, rng):
    g = rng.standard_normal((5, 4, 4))
    mats = g + np.swapaxes(g, 1, 2)
    vals, vecs = backend.jacobi_eigh_batch(mats)
    for i in range(5):
        v, u = backend.jacobi_eigh(mats[i])
        assert np.array_equal(v, vals[i]) and np.array_equal(u, vecs[i])


def test_jacobi_sign_convention(backend):
    vals, vecs = backend.jacobi_eigh(np.diag([1.0, 3.0, 2.0]))
    assert vals.tolist() == [3.0, 2.0, 1.0]
    for j in range(3):
        first = vecs[np.flatnonzero(np.abs(vecs[:, j]) > 1e-12)[0], j]
        assert first > 0


def test_switching_dp_small(backend):
    losses = np.array([[0.0, 1.0], [0.0, 1.0], [1.0, 0.0], [1.0, 0.0]])
    seq, best = backend.switching_dp(losses, 1)
    assert best == 2.0
    seq, best = backend.switching_dp(losses, 2)
    assert best == 0.0 and list(seq) == [0, 0, 1, 1]
