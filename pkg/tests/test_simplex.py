import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliptrack.errors import ConfigError, DomainError
from cliptrack.simplex import (
    HorizonConfig,
    as_distribution,
    as_loss_vector,
    in_clipped_simplex,
    kl_divergence,
    negative_entropy,
    uniform,
    weighted_loss,
)


def mp_entropy(w):
    mpmath.mp.dps = 50
    return float(mpmath.fsum(mpmath.mpf(x) * mpmath.log(mpmath.mpf(x)) for x in w if x > 0))


def test_negative_entropy_examples():
    assert negative_entropy(uniform(4)) == pytest.approx(-math.log(4), abs=1e-15)
    assert negative_entropy([1.0, 0.0, 0.0]) == 0.0
    # frozen value, checked against 50-digit summation
    assert negative_entropy([0.5, 0.25, 0.25]) == pytest.approx(-1.0397208, abs=1e-7)
    assert negative_entropy([0.5, 0.25, 0.25]) == pytest.approx(mp_entropy([0.5, 0.25, 0.25]), abs=1e-15)


def test_kl_examples():
    w = np.array([0.2, 0.3, 0.5])
    assert kl_divergence(w, w) == 0.0
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)
    assert kl_divergence([0.25, 0.75], [0.75, 0.25]) == pytest.approx(0.5493061, abs=1e-7)


def test_kl_errors():
    with pytest.raises(DomainError):
        kl_divergence([0.5, 0.5], [1.0, 0.0])
    with pytest.raises(DomainError):
        kl_divergence([0.5, 0.5], [1 / 3, 1 / 3, 1 / 3])
    # zero on y is fine where x is zero too
    assert kl_divergence([1.0, 0.0], [1.0, 0.0]) == 0.0


def test_kl_not_symmetric():
    x, y = [0.1, 0.9], [0.6, 0.4]
    assert kl_divergence(x, y) != pytest.approx(kl_divergence(y, x))


def test_weighted_loss_examples():
    assert weighted_loss(uniform(2), [0, 1]) == 0.5
    assert weighted_loss([0, 1, 0], [0.3, 0.7, 0.1]) == 0.7
    assert weighted_loss([0.2, 0.3, 0.5], [1, 0, 0.5]) == pytest.approx(0.45, abs=1e-15)
    with pytest.raises(DomainError):
        weighted_loss([0.5, 0.5], [1, 0, 0])


dists = st.integers(2, 12).flatmap(
    lambda k: st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k).filter(lambda v: sum(v) > 1e-3)
).map(lambda v: np.array(v) / np.sum(v))


@given(dists)
def test_entropy_range(w):
    h = negative_entropy(w)
    assert -math.log(w.size) - 1e-12 <= h <= 1e-15


@given(dists, dists, st.floats(0, 1))
def test_kl_nonnegative_and_loss_linear(x, y, a):
    if x.size != y.size:
        return
    y = 0.5 * y + 0.5 / y.size
    assert kl_divergence(x, y) >= -1e-12
    loss = np.linspace(0, 1, x.size)
    mix = weighted_loss(a * x + (1 - a) * y, loss)
    assert mix == pytest.approx(a * weighted_loss(x, loss) + (1 - a) * weighted_loss(y, loss), abs=1e-12)


def test_validators():
    assert as_distribution([0.25, 0.75]).flags.writeable is False
    with pytest.raises(DomainError):
        as_distribution([0.5, 0.6])
    with pytest.raises(DomainError):
        as_distribution([1.1, -0.1])
    with pytest.raises(DomainError):
        as_loss_vector([0.5, 1.2])
    with pytest.raises(DomainError):
        as_loss_vector([0.5, 0.5], k=3)


def test_horizon_config():
    cfg = HorizonConfig(T=100, K=4, S=5, eta=0.1)
    assert cfg.clip_floor == 5 / 400
    assert cfg.clip_floor * cfg.K == pytest.approx(cfg.S / cfg.T)
    assert cfg.log_term == pytest.approx(math.log(80))
    for bad in [dict(T=10, K=4, S=11), dict(T=0, K=4, S=1), dict(T=10, K=1, S=1), dict(T=10, K=4, S=1, eta=0)]:
        with pytest.raises(ConfigError):
            HorizonConfig(**bad)


@given(st.integers(1, 10_000), st.integers(2, 64), st.data())
@settings(max_examples=200)
def test_config_floor_feasible(T, K, data):
    S = data.draw(st.integers(1, T))
    cfg = HorizonConfig(T, K, S)
    assert cfg.clip_floor * K <= 1.0
    assert in_clipped_simplex(uniform(K), cfg.clip_floor)
