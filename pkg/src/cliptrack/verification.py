"""Regret-bound calculators and per-trajectory checks.

Every bound here is a deterministic guarantee for any loss sequence, so a
single failing report means a bug, not bad luck.
"""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from cliptrack.comparator import (
    _fold,
    best_switching_matrix,
    best_switching_sequence,
    path_length,
)
from cliptrack.errors import DomainError
from cliptrack.matrix import matrix_log

SLACK_TOL = 1e-6
LEMMA2_TOL = 1e-12
STEP_TOL = 1e-10
LEMMA5_TOL = 1e-9
LEMMA9_TOL = 1e-8
MEMBERSHIP_TOL = 1e-12
# Spectraplex membership is checked after a matrix round trip.
MATRIX_MEMBERSHIP_TOL = 1e-9

LEARNER_IDS = ("mwu", "fixed_share", "projection_update", "clipped_omd", "pcs", "ocs", "ocs_plus", "pcsp")


def _log_term(T, K, S):
    if not 1 <= S <= T:
        raise DomainError(f"need 1 <= S <= T, got S={S}, T={T}")
    return math.log(K * T / S)


def _check_eta(eta, prod=False):
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta!r}")
    if prod and eta > 0.5:
        raise DomainError(f"Prod-family bounds need eta <= 1/2, got {eta!r}")


def bound_theorem1(eta, T, K, S):
    _check_eta(eta)
    return eta * T + S * _log_term(T, K, S) / eta + S


def bound_theorem2(eta, L2, T, K, S):
    _check_eta(eta, prod=True)
    return eta * L2 + S * _log_term(T, K, S) / eta + 1.5 * S


def bound_theorem3(eta, P_inf, T, K, S):
    _check_eta(eta)
    return eta * P_inf + S * _log_term(T, K, S) / eta + S


def bound_theorem4(P_inf, T, K, S):
    """Larger of the two case bounds from the doubling-trick analysis
    (one epoch, or several)."""
    log_term = _log_term(T, K, S)
    several = 8.0 * math.sqrt(P_inf * S * log_term) + S
    single = 4.0 * math.sqrt(S * log_term) + S
    return max(several, single)


def bound_theorem4_relaxed(P_inf, T, K, S):
    """Sum form 8 sqrt(S (P+1) log) + 4 sqrt(S log) + S; dominates the max form."""
    log_term = _log_term(T, K, S)
    return 8.0 * math.sqrt(S * (P_inf + 1.0) * log_term) + 4.0 * math.sqrt(S * log_term) + S


def bound_theorem5(eta, M2, T, K, S):
    _check_eta(eta, prod=True)
    return eta * M2 + S * _log_term(T, K, S) / eta + 2.5 * S


def first_order_bound(eta, L1, T, K, S):
    """eta L1 + S log(KT/S)/eta + 3S/2, the first-order analog of the PCS bound."""
    return eta * L1 + S * _log_term(T, K, S) / eta + 1.5 * S


def theorem1_eta(T, K, S):
    return math.sqrt(S * _log_term(T, K, S) / T)


def theorem2_eta(L2, T, K, S):
    if L2 <= 0.0:
        return 0.5
    return min(math.sqrt(S * _log_term(T, K, S) / L2), 0.5)


def theorem3_eta(P_inf, T, K, S):
    # P_inf = 0 only for an all-zero sequence, where any eta gives zero regret
    if P_inf <= 0.0:
        return 1.0
    return math.sqrt(S * _log_term(T, K, S) / P_inf)


theorem5_eta = theorem2_eta


def ocs_plus_epoch_bound(P_inf, T):
    """ceil(log2(sqrt(P_inf T)) + 2); -inf when P_inf T = 0."""
    if P_inf * T <= 0.0:
        return -math.inf
    return math.ceil(math.log2(math.sqrt(P_inf * T)) + 2.0)


def smoothed_comparator(e, T, K, S):
    """(1 - S/T) e + S/(TK): the comparator pulled into the clipped simplex."""
    e = np.asarray(e, dtype=np.float64)
    return (1.0 - S / T) * e + S / (T * K)


def lemma2_gap(e, loss, T, K, S):
    e = np.asarray(e, dtype=np.float64)
    return float((smoothed_comparator(e, T, K, S) - e) @ np.asarray(loss, dtype=np.float64))


def check_lemma2(e, loss, T, K, S):
    return lemma2_gap(e, loss, T, K, S) <= S / T + LEMMA2_TOL


def check_lemma3(w_t, w_next, loss, eta):
    return float((np.asarray(w_t) - np.asarray(w_next)) @ np.asarray(loss)) <= eta + STEP_TOL


def check_lemma4(w_t, aux_next, loss, prev_loss, eta):
    diff = np.asarray(loss) - np.asarray(prev_loss)
    lhs = float((np.asarray(w_t) - np.asarray(aux_next)) @ diff)
    return lhs <= eta * float(np.max(np.abs(diff))) ** 2 + STEP_TOL


def check_lemma5(U, Z, T, K, S):
    U = np.asarray(U, dtype=np.float64)
    u_bar = (1.0 - S / T) * U + S / (T * K) * np.eye(K)
    return float(np.sum((u_bar - U) * np.asarray(Z))) <= 2.0 * S / T + LEMMA5_TOL


def check_lemma9(X, Y, Z, T, K, S):
    diff = matrix_log(Y) - matrix_log(Z)
    return float(np.sum(np.asarray(X) * diff)) <= _log_term(T, K, S) + LEMMA9_TOL


@dataclass
class BoundReport:
    learner: str
    theorem: str
    regret: float
    bound: float
    slack: float
    violations: int
    passed: bool
    eta: float = None
    hindsight: bool = False
    seed: int = None

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def max_deviation(a, b):
    """Largest per-round L-inf gap between two trajectories' predictions."""
    pa, pb = np.asarray(a.predictions), np.asarray(b.predictions)
    if pa.shape != pb.shape:
        raise DomainError(f"trajectory shapes differ: {pa.shape} vs {pb.shape}")
    return float(np.max(np.abs(pa - pb)))


def _comparator_for(losses, S):
    if losses.ndim == 3:
        return best_switching_matrix(losses, S)
    return best_switching_sequence(losses, S)


def count_lemma_violations(learner_id, losses, S, traj, comparator):
    """Runtime assertions along a recorded trajectory; returns the number
    of failed checks."""
    T = losses.shape[0]
    K = losses.shape[1]
    bad = 0
    if losses.ndim == 3:
        for t in range(T):
            bad += not check_lemma5(comparator.comparator(t), losses[t], T, K, S)
        mins = traj.min_weights[1:]
        bad += int(np.count_nonzero(mins < S / (T * K) - MATRIX_MEMBERSHIP_TOL))
        return bad

    picked = comparator.best_sequence
    own = losses[np.arange(T), picked]
    gaps = (1.0 - S / T) * own + S / (T * K) * losses.sum(axis=1) - own
    bad += int(np.count_nonzero(gaps > S / T + LEMMA2_TOL))

    w = traj.predictions
    if learner_id in ("clipped_omd", "pcs", "ocs", "ocs_plus"):
        bad += int(np.count_nonzero(w[1:].min(axis=1) < S / (T * K) - MEMBERSHIP_TOL))
    if learner_id == "clipped_omd":
        lhs = np.einsum("ti,ti->t", w[:-1] - w[1:], losses)
        bad += int(np.count_nonzero(lhs > traj.etas + STEP_TOL))
    if learner_id in ("ocs", "ocs_plus"):
        prev = np.vstack([np.zeros((1, K)), losses[:-1]])
        diff = losses - prev
        lhs = np.einsum("ti,ti->t", w[:-1] - traj.aux[1:], diff)
        rhs = traj.etas * np.max(np.abs(diff), axis=1) ** 2 + STEP_TOL
        bad += int(np.count_nonzero(lhs > rhs))
    return bad


def check_trajectory(learner_id, losses, S, traj, comparator=None, lemmas=True,
                     hindsight=False, seed=None):
    """Empirical tracking regret against the matching theorem bound.

    The bound is evaluated at the learning rate the run actually used.
    Learners without a tracking guarantee (MWU, Fixed Share, and Projection
    Update with a floor other than S/(TK)) report theorem "none".
    """
    if learner_id not in LEARNER_IDS:
        raise DomainError(f"unknown learner id {learner_id!r}")
    losses = np.asarray(losses, dtype=np.float64)
    T, K = losses.shape[0], losses.shape[1]
    if comparator is None:
        comparator = _comparator_for(losses, S)
    regret = _fold(traj.learner_losses) - comparator.total_loss
    eta = float(traj.etas[0])

    if learner_id == "clipped_omd":
        theorem, bound = "theorem1", bound_theorem1(eta, T, K, S)
    elif learner_id == "projection_update" and math.isclose(
            traj.params.get("alpha", -1.0), S / (T * K), rel_tol=1e-12):
        theorem, bound = "theorem1", bound_theorem1(eta, T, K, S)
    elif learner_id == "pcs":
        theorem, bound = "theorem2", bound_theorem2(eta, comparator.L2, T, K, S)
    elif learner_id == "ocs":
        theorem, bound = "theorem3", bound_theorem3(eta, path_length(losses).P_inf, T, K, S)
    elif learner_id == "ocs_plus":
        theorem, bound = "theorem4", bound_theorem4(path_length(losses).P_inf, T, K, S)
    elif learner_id == "pcsp":
        theorem, bound = "theorem5", bound_theorem5(eta, comparator.M2, T, K, S)
    else:
        theorem, bound = "none", None

    violations = count_lemma_violations(learner_id, losses, S, traj, comparator) if lemmas else 0
    slack = None if bound is None else bound - regret
    passed = violations == 0 and (slack is None or slack >= -SLACK_TOL)
    return BoundReport(
        learner=learner_id,
        theorem=theorem,
        regret=regret,
        bound=bound,
        slack=slack,
        violations=violations,
        passed=passed,
        eta=None if learner_id == "ocs_plus" else eta,
        hindsight=hindsight,
        seed=seed,
    )
