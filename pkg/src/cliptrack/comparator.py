"""Offline best switching comparator and the data-dependent quantities
(L1, L2, P_inf, M2) that enter the regret bounds."""

from dataclasses import dataclass

import numpy as np

from cliptrack import kernels
from cliptrack.errors import DomainError
from cliptrack.matrix import as_symmetric

# Matrices per batched Jacobi call when building the segment-cost table.
_BATCH = 16384


def as_loss_sequence(losses):
    arr = np.array(losses, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise DomainError(f"expected a (T, K) array of losses, got shape {arr.shape}")
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainError("losses must lie in [0, 1]")
    return arr


def _check_segments(S, T):
    if int(S) != S or not 1 <= S:
        raise DomainError(f"S must be a positive integer, got {S!r}")
    return min(int(S), T)


def _fold(values):
    # left-to-right summation; the DP accumulates in the same order
    total = 0.0
    for v in values:
        total += float(v)
    return total


@dataclass(frozen=True)
class ComparatorResult:
    """Best expert sequence (0-based indices) with at most S-1 switches."""

    best_sequence: np.ndarray
    segment_boundaries: tuple
    total_loss: float
    L1: float
    L2: float
    switches_used: int

    def one_hot(self, k):
        e = np.zeros((self.best_sequence.size, k))
        e[np.arange(self.best_sequence.size), self.best_sequence] = 1.0
        return e


def best_switching_sequence(losses, S):
    """Dynamic program over (round, expert, switches used).

    Ties prefer staying on the current expert, then the smaller index; the
    final choice prefers fewer switches, then the smaller expert index.
    """
    losses = as_loss_sequence(losses)
    n_seg = _check_segments(S, losses.shape[0])
    if losses.shape[1] == 1:
        seq, best = np.zeros(losses.shape[0], dtype=np.int64), _fold(losses[:, 0])
    else:
        seq, best = kernels.switching_dp(losses, n_seg)
    picked = losses[np.arange(seq.size), seq]
    bounds = (0,) + tuple(int(t) for t in np.flatnonzero(np.diff(seq)) + 1)
    seq.setflags(write=False)
    return ComparatorResult(
        best_sequence=seq,
        segment_boundaries=bounds,
        total_loss=float(best),
        L1=_fold(picked),
        L2=_fold(picked * picked),
        switches_used=len(bounds) - 1,
    )


def comparator_stats(losses, result):
    """(L1, L2): the comparator's summed and summed-squared losses."""
    losses = as_loss_sequence(losses)
    if losses.shape[0] != result.best_sequence.size:
        raise DomainError("comparator result does not match the loss sequence")
    picked = losses[np.arange(losses.shape[0]), result.best_sequence]
    return _fold(picked), _fold(picked * picked)


@dataclass(frozen=True)
class PathLengthStats:
    P_inf: float


def path_length(losses):
    """Sum over t of ||l_t - l_{t-1}||_inf^2 with l_0 = 0."""
    arr = np.asarray(losses, dtype=np.float64)
    if arr.shape[0] == 0:
        return PathLengthStats(0.0)
    flat = arr.reshape(arr.shape[0], -1)
    prev = np.vstack([np.zeros((1, flat.shape[1])), flat[:-1]])
    steps = np.max(np.abs(flat - prev), axis=1)
    return PathLengthStats(_fold(steps * steps))


@dataclass(frozen=True)
class MatrixComparatorResult:
    """Best piecewise-constant rank-one comparator.

    ``vectors[s]`` is the unit minimum eigenvector of segment s's summed
    loss; ``assignment[t]`` names the segment holding round t.
    """

    segment_boundaries: tuple
    vectors: np.ndarray
    assignment: np.ndarray
    total_loss: float
    M2: float

    def comparator(self, t):
        v = self.vectors[self.assignment[t]]
        return np.outer(v, v)


def as_matrix_sequence(losses):
    arr = np.array(losses, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] == 0:
        raise DomainError(f"expected a (T, K, K) array of loss matrices, got shape {arr.shape}")
    for z in arr:
        as_symmetric(z)
    return arr


def segment_sum(losses, a, b):
    """Left fold of losses[a..b] inclusive, the order the DP table uses."""
    acc = losses[a].copy()
    for t in range(a + 1, b + 1):
        acc = acc + losses[t]
    return acc


def segment_costs(losses):
    """λ_min and its eigenvector for every segment [a, b] of the horizon.

    Returns ``(cost, vecs)`` with ``cost[a, b]`` (inf below the diagonal) and
    ``vecs[a, b]`` the matching unit vector.
    """
    n, k = losses.shape[0], losses.shape[1]
    cost = np.full((n, n), np.inf)
    vecs = np.zeros((n, n, k))
    pending, where = [], []

    def flush():
        vals, v = kernels.jacobi_eigh_batch(np.concatenate(pending))
        lo = 0
        for a, count in where:
            cost[a, a:a + count] = vals[lo:lo + count, -1]
            vecs[a, a:a + count] = v[lo:lo + count, :, -1]
            lo += count
        pending.clear()
        where.clear()

    size = 0
    for a in range(n):
        sums = np.cumsum(losses[a:], axis=0)
        pending.append(sums)
        where.append((a, n - a))
        size += n - a
        if size >= _BATCH:
            flush()
            size = 0
    if pending:
        flush()
    return cost, vecs


def best_switching_matrix(losses, S):
    """Segment DP over at most S segments; each segment pays λ_min of its
    summed loss matrix, attained by the projector onto the minimum
    eigenvector."""
    losses = as_matrix_sequence(losses)
    n = losses.shape[0]
    n_seg = _check_segments(S, n)
    cost, vecs = segment_costs(losses)

    # best[s, b]: cheapest cover of rounds 0..b by exactly s+1 segments
    best = np.full((n_seg, n), np.inf)
    start = np.zeros((n_seg, n), dtype=np.int64)
    best[0] = cost[0]
    for s in range(1, n_seg):
        for b in range(s, n):
            cand = best[s - 1, s - 1:b] + cost[s:b + 1, b]
            j = int(np.argmin(cand))
            best[s, b] = cand[j]
            start[s, b] = j + s
    s_best = 0
    for s in range(1, n_seg):
        if best[s, n - 1] < best[s_best, n - 1]:
            s_best = s

    starts = []
    b = n - 1
    for s in range(s_best, -1, -1):
        a = int(start[s, b]) if s > 0 else 0
        starts.append(a)
        b = a - 1
    starts.reverse()
    ends = starts[1:] + [n]
    seg_vecs = np.array([vecs[a, e - 1] for a, e in zip(starts, ends)])
    assignment = np.repeat(np.arange(len(starts)), np.diff(starts + [n]))
    per_round = seg_vecs[assignment]
    zv = np.einsum("tij,tj->ti", losses, per_round)
    m2 = _fold(np.einsum("ti,ti->t", zv, zv))
    for arr in (seg_vecs, assignment):
        arr.setflags(write=False)
    return MatrixComparatorResult(
        segment_boundaries=tuple(starts),
        vectors=seg_vecs,
        assignment=assignment,
        total_loss=float(best[s_best, n - 1]),
        M2=m2,
    )


def tracking_regret(learner_losses, total_comparator_loss):
    return _fold(learner_losses) - total_comparator_loss

