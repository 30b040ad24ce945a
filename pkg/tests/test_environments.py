import numpy as np
import pytest

from cliptrack.comparator import best_switching_sequence, path_length
from cliptrack.environments import KINDS, EnvironmentSpec, generate, planted_structure
from cliptrack.errors import ConfigError
from cliptrack.matrix import spectral_norm


@pytest.mark.parametrize("kind", KINDS)
def test_shapes_and_ranges(kind):
    spec = EnvironmentSpec(kind, T=120, K=5, S_true=3, seed=7, noise=0.1)
    x = generate(spec)
    if spec.is_matrix:
        assert x.shape == (120, 5, 5)
        assert np.allclose(x, np.swapaxes(x, 1, 2))
        assert max(spectral_norm(z) for z in x) <= 1 + 1e-12
    else:
        assert x.shape == (120, 5)
        assert x.min() >= 0 and x.max() <= 1
    assert not x.flags.writeable


@pytest.mark.parametrize("kind", KINDS)
def test_seed_determinism(kind):
    spec = EnvironmentSpec(kind, T=50, K=4, S_true=2, seed=3, noise=0.2)
    assert np.array_equal(generate(spec), generate(spec))
    assert not np.array_equal(generate(spec), generate(spec.with_seed(4)))


def test_planted_segments_recovered():
    spec = EnvironmentSpec("piecewise_stationary", T=300, K=6, S_true=4, seed=11, noise=0.0)
    starts, leaders = planted_structure(spec)
    assert len(starts) == 4 and starts[0] == 0
    assert all(a != b for a, b in zip(leaders, leaders[1:]))
    r = best_switching_sequence(generate(spec), 4)
    assert list(r.segment_boundaries) == list(starts)


def test_drift_path_length():
    spec = EnvironmentSpec("drifting", T=1000, K=8, seed=2, drift_step=0.02)
    assert path_length(generate(spec)).P_inf <= 1 + 999 * 0.02**2


def test_small_loss_leader_mean():
    spec = EnvironmentSpec("small_loss", T=2000, K=4, S_true=1, seed=5, leader_mean=0.05)
    x = generate(spec)
    _, leaders = planted_structure(spec)
    assert abs(x[:, leaders[0]].mean() - 0.05) < 0.01


def test_worst_case_binary():
    x = generate(EnvironmentSpec("worst_case_switching", T=100, K=3, S_true=2, seed=1))
    assert set(np.unique(x)) <= {0.0, 1.0}


def test_validation():
    for bad in [dict(kind="nope", T=10, K=2), dict(kind="drifting", T=0, K=2),
                dict(kind="drifting", T=10, K=1), dict(kind="piecewise_stationary", T=10, K=2, S_true=11),
                dict(kind="drifting", T=10, K=2, noise=-1)]:
        with pytest.raises(ConfigError):
            EnvironmentSpec(**bad)
    with pytest.raises(ConfigError):
        EnvironmentSpec.from_dict({"kind": "drifting", "T": 10, "K": 2, "colour": 1})
