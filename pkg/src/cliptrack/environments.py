"""Seeded loss-sequence generators.

All randomness comes from numpy's Philox4x64 counter-based generator keyed
by the spec's seed, so a spec always reproduces the same sequence bit for
bit.
"""

from dataclasses import asdict, dataclass

import numpy as np

from cliptrack.errors import ConfigError

KINDS = ("piecewise_stationary", "drifting", "small_loss", "worst_case_switching", "matrix_piecewise")
MATRIX_KINDS = ("matrix_piecewise",)


@dataclass(frozen=True)
class EnvironmentSpec:
    kind: str
    T: int
    K: int
    S_true: int = 1
    seed: int = 0
    noise: float = 0.0
    drift_step: float = 0.02
    leader_mean: float = 0.05

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown environment kind {self.kind!r}; expected one of {KINDS}")
        for name in ("T", "K", "S_true", "seed"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ConfigError(f"{name} must be an integer, got {v!r}")
        if self.T < 1 or self.K < 2:
            raise ConfigError(f"need T >= 1 and K >= 2, got T={self.T}, K={self.K}")
        if not 1 <= self.S_true <= self.T:
            raise ConfigError(f"S_true must lie in [1, T], got {self.S_true}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        for name in ("noise", "drift_step", "leader_mean"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v!r}")

    @property
    def is_matrix(self):
        return self.kind in MATRIX_KINDS

    def with_seed(self, seed):
        d = asdict(self)
        d["seed"] = int(seed)
        return EnvironmentSpec(**d)

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"bad environment spec: {exc}") from None


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


def planted_segments(rng, T, S):
    """Start rounds (0-based) of S segments."""
    cuts = np.sort(rng.choice(np.arange(1, T), size=S - 1, replace=False)) if S > 1 else np.array([], dtype=int)
    return np.concatenate([[0], cuts]).astype(np.int64)


def _leaders(rng, S, K):
    # consecutive leaders are distinct
    leaders = [int(rng.integers(K))]
    for _ in range(S - 1):
        nxt = int(rng.integers(K - 1))
        leaders.append(nxt if nxt < leaders[-1] else nxt + 1)
    return np.array(leaders, dtype=np.int64)


def _plant(rng, spec):
    starts = planted_segments(rng, spec.T, spec.S_true)
    leaders = _leaders(rng, spec.S_true, spec.K)
    per_round = np.repeat(leaders, np.diff(np.concatenate([starts, [spec.T]])))
    return starts, leaders, per_round


def _piecewise(rng, spec):
    _, _, leader = _plant(rng, spec)
    T, K, lm = spec.T, spec.K, spec.leader_mean
    # non-leaders sit strictly above the leader when noise is off
    others = lm + (1.0 - lm) * (0.25 + 0.75 * rng.random((T, K)))
    losses = others
    losses[np.arange(T), leader] = lm
    if spec.noise > 0.0:
        losses = losses + spec.noise * (2.0 * rng.random((T, K)) - 1.0)
    return np.clip(losses, 0.0, 1.0)


def _drifting(rng, spec):
    T, K, d = spec.T, spec.K, spec.drift_step
    losses = np.empty((T, K))
    losses[0] = rng.random(K)
    steps = d * (2.0 * rng.random((T - 1, K)) - 1.0)
    for t in range(1, T):
        # clipping is 1-Lipschitz, so each coordinate moves by at most d
        losses[t] = np.clip(losses[t - 1] + steps[t - 1], 0.0, 1.0)
    return losses


def _small_loss(rng, spec):
    _, _, leader = _plant(rng, spec)
    T, K = spec.T, spec.K
    losses = rng.random((T, K))
    losses[np.arange(T), leader] = np.minimum(spec.leader_mean * 2.0 * rng.random(T), 1.0)
    return losses


def _worst_case(rng, spec):
    _, _, leader = _plant(rng, spec)
    T, K = spec.T, spec.K
    losses = np.ones((T, K))
    losses[np.arange(T), leader] = 0.0
    if spec.noise > 0.0:
        flip = rng.random((T, K)) < spec.noise
        losses = np.where(flip, 1.0 - losses, losses)
    return losses


def _matrix_piecewise(rng, spec):
    starts = planted_segments(rng, spec.T, spec.S_true)
    T, K = spec.T, spec.K
    seg = np.repeat(np.arange(spec.S_true), np.diff(np.concatenate([starts, [T]])))
    dirs = rng.standard_normal((spec.S_true, K))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    out = np.empty((T, K, K))
    g = rng.standard_normal((T, K, K))
    for t in range(T):
        u = dirs[seg[t]]
        z = -np.outer(u, u) + spec.noise * (g[t] + g[t].T) / (2.0 * np.sqrt(K))
        z = 0.5 * (z + z.T)
        norm = np.max(np.abs(np.linalg.eigvalsh(z)))
        if norm > 1.0:
            z = z / norm
        out[t] = z
    return out


_GENERATORS = {
    "piecewise_stationary": _piecewise,
    "drifting": _drifting,
    "small_loss": _small_loss,
    "worst_case_switching": _worst_case,
    "matrix_piecewise": _matrix_piecewise,
}


def generate(spec):
    """Loss sequence for ``spec``: shape (T, K), or (T, K, K) for matrix kinds."""
    rng = make_rng(spec.seed)
    losses = _GENERATORS[spec.kind](rng, spec)
    losses.setflags(write=False)
    return losses


def planted_structure(spec):
    """Segment starts and per-segment leaders the generator plants (vector
    kinds other than drifting)."""
    rng = make_rng(spec.seed)
    starts, leaders, _ = _plant(rng, spec)
    return starts, leaders
