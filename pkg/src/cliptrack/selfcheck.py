"""Randomized property suite behind ``cliptrack verify``.

Each check returns a CheckResult; the suite passes when every check reports
zero failures.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from cliptrack import kernels
from cliptrack.comparator import best_switching_matrix, best_switching_sequence
from cliptrack.environments import make_rng
from cliptrack.learners import ClippedOMD, ProjectionUpdate
from cliptrack.matrix import vn_project_clipped
from cliptrack.oracles import (
    brute_force_matrix,
    brute_force_switching,
    kl_project_oracle,
    vn_project_oracle,
)
from cliptrack.projections import kl_project_clipped
from cliptrack.runner import run_learner
from cliptrack.simplex import HorizonConfig
from cliptrack.verification import (
    check_lemma2,
    check_lemma3,
    check_lemma4,
    check_lemma5,
    check_lemma9,
    max_deviation,
)

VECTOR_ORACLE_TOL = 1e-6
MATRIX_ORACLE_TOL = 1e-5
PROPOSITION1_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    checks: int
    failures: int
    worst: float = None

    @property
    def ok(self):
        return self.failures == 0

    def line(self):
        status = "PASS" if self.ok else "FAIL"
        text = f"{status}  {self.name:<30} checks={self.checks:<6} failures={self.failures}"
        if self.worst is not None:
            text += f"  max gap={self.worst:.3g}"
        return text


def random_clipped_point(rng, k, floor):
    return floor + (1.0 - k * floor) * rng.dirichlet(np.ones(k))


def random_orthogonal(rng, k):
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    return q * np.sign(np.diag(r))


def random_clipped_matrix(rng, k, floor):
    q = random_orthogonal(rng, k)
    out = (q * random_clipped_point(rng, k, floor)) @ q.T
    return 0.5 * (out + out.T)


def random_loss_matrix(rng, k):
    g = rng.standard_normal((k, k))
    z = 0.5 * (g + g.T)
    z /= np.max(np.abs(np.linalg.eigvalsh(z)))
    return z * rng.uniform(0.0, 1.0)


def random_horizon(rng):
    T = int(rng.integers(1, 2001))
    K = int(rng.integers(2, 17))
    S = int(rng.integers(1, T + 1))
    return T, K, S


def vector_oracle(n=1000, seed=0):
    rng = make_rng(seed)
    worst, bad = 0.0, 0
    for _ in range(n):
        k = int(rng.integers(2, 17))
        p = np.exp(rng.normal(0.0, 2.0, k))
        floor = rng.uniform(0.0, 1.0 / k)
        gap = float(np.max(np.abs(kl_project_clipped(p, floor).point - kl_project_oracle(p, floor))))
        worst = max(worst, gap)
        bad += not gap < VECTOR_ORACLE_TOL
    return CheckResult("projection vs oracle", n, bad, worst)


def matrix_oracle(n=200, seed=0):
    rng = make_rng(seed)
    worst, bad = 0.0, 0
    for _ in range(n):
        k = int(rng.integers(2, 7))
        q = random_orthogonal(rng, k)
        p = (q * np.exp(rng.normal(0.0, 1.5, k))) @ q.T
        p = 0.5 * (p + p.T)
        floor = rng.uniform(0.0, 1.0 / k)
        ours = np.linalg.eigvalsh(vn_project_clipped(p, floor).matrix)
        theirs = np.linalg.eigvalsh(vn_project_oracle(p, floor))
        gap = float(np.max(np.abs(ours - theirs)))
        worst = max(worst, gap)
        bad += not gap < MATRIX_ORACLE_TOL
    return CheckResult("spectral projection vs oracle", n, bad, worst)


def proposition1(seeds=50, T=500, K=8, S=5, eta=0.1, seed=0):
    worst, bad = 0.0, 0
    for s in range(seeds):
        losses = make_rng(seed + s).random((T, K))
        cfg = HorizonConfig(T, K, S, eta)
        a = run_learner(ClippedOMD(cfg), losses)
        b = run_learner(ProjectionUpdate(K, eta, cfg.clip_floor), losses)
        gap = max_deviation(a, b)
        worst = max(worst, gap)
        bad += not gap < PROPOSITION1_TOL
    return CheckResult("clipped OMD = projection upd", seeds, bad, worst)


def dp_grid(max_T=8, max_K=3, max_S=3, draws=1, seed=0):
    """DP against exhaustive enumeration, vector and matrix variants."""
    rng = make_rng(seed)
    n = bad = 0
    for T, K, S in itertools.product(range(1, max_T + 1), range(1, max_K + 1), range(1, max_S + 1)):
        for _ in range(draws):
            losses = rng.random((T, K))
            bad += best_switching_sequence(losses, S).total_loss != brute_force_switching(losses, S)
            g = rng.standard_normal((T, K, K))
            mats = 0.25 * (g + np.swapaxes(g, 1, 2))
            dp = best_switching_matrix(mats, S).total_loss
            bad += dp != brute_force_matrix(mats, S)
            n += 2
    return CheckResult("comparator DP vs brute force", n, bad)


def lemma2(n=10_000, seed=0):
    rng = make_rng(seed)
    bad = 0
    for _ in range(n):
        T, K, S = random_horizon(rng)
        e = np.zeros(K)
        e[rng.integers(K)] = 1.0
        bad += not check_lemma2(e, rng.random(K), T, K, S)
    return CheckResult("lemma 2 (smoothed comparator)", n, bad)


def lemma3(n=10_000, seed=0):
    rng = make_rng(seed)
    bad = 0
    for _ in range(n):
        T, K, S = random_horizon(rng)
        floor = S / (T * K)
        w = random_clipped_point(rng, K, floor)
        loss = rng.random(K)
        eta = rng.uniform(1e-3, 3.0)
        bad += not check_lemma3(w, kernels.omd_step(w, loss, eta, floor), loss, eta)
    return CheckResult("lemma 3 (OMD stability)", n, bad)


def lemma4(n=10_000, seed=0):
    rng = make_rng(seed)
    bad = 0
    for _ in range(n):
        T, K, S = random_horizon(rng)
        floor = S / (T * K)
        aux = random_clipped_point(rng, K, floor)
        prev = rng.random(K)
        # mix large jumps with small drifts so both regimes are exercised
        loss = np.clip(prev + rng.uniform(-1, 1, K) * rng.choice([0.01, 0.1, 1.0]), 0.0, 1.0)
        eta = rng.uniform(1e-3, 3.0)
        w = kernels.omd_step(aux, prev, eta, floor)
        aux_next = kernels.omd_step(aux, loss, eta, floor)
        bad += not check_lemma4(w, aux_next, loss, prev, eta)
    return CheckResult("lemma 4 (optimistic step)", n, bad)


def lemma5(n=10_000, seed=0):
    rng = make_rng(seed)
    bad = 0
    for _ in range(n):
        T, _, S = random_horizon(rng)
        K = int(rng.integers(2, 9))
        U = random_clipped_matrix(rng, K, 0.0)
        bad += not check_lemma5(U, random_loss_matrix(rng, K), T, K, S)
    return CheckResult("lemma 5 (smoothed matrix)", n, bad)


def lemma9(n=10_000, seed=0):
    rng = make_rng(seed)
    bad = 0
    for _ in range(n):
        T, _, S = random_horizon(rng)
        K = int(rng.integers(2, 9))
        floor = S / (T * K)
        X, Y, Z = (random_clipped_matrix(rng, K, floor) for _ in range(3))
        bad += not check_lemma9(X, Y, Z, T, K, S)
    return CheckResult("lemma 9 (log ratio)", n, bad)


def run_all(seed=0, quick=False):
    """Run the whole suite; ``quick`` shrinks every sample size tenfold."""
    scale = 10 if quick else 1

    def size(n):
        return max(1, math.ceil(n / scale))

    return [
        vector_oracle(size(1000), seed),
        matrix_oracle(size(200), seed),
        proposition1(size(50), seed=seed),
        dp_grid(seed=seed, max_T=8 if not quick else 6),
        lemma2(size(10_000), seed),
        lemma3(size(10_000), seed),
        lemma4(size(10_000), seed),
        lemma5(size(10_000), seed),
        lemma9(size(10_000), seed),
    ]
