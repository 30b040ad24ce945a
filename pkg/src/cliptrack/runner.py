"""Drive a learner over a loss sequence and record everything the checks need."""

from dataclasses import dataclass, field

import numpy as np

from cliptrack.matrix import SpectraplexPoint


@dataclass
class Trajectory:
    """Per-round record of one learner's run.

    ``predictions`` has T+1 rows: the prediction for every round plus the
    one formed after the final update. ``aux`` is filled for optimistic
    learners the same way. ``etas`` and ``epochs`` are the values in force
    when each round's prediction was made.
    """

    learner: str
    predictions: np.ndarray
    learner_losses: np.ndarray
    etas: np.ndarray
    epochs: np.ndarray
    min_weights: np.ndarray
    aux: np.ndarray = None
    params: dict = field(default_factory=dict)

    @property
    def T(self):
        return self.learner_losses.size

    @property
    def is_matrix(self):
        return self.predictions.ndim == 3


def _as_array(w):
    if isinstance(w, SpectraplexPoint):
        return w.matrix, float(w.eigvals.min())
    w = np.asarray(w)
    return w, float(w.min())


def run_learner(learner, losses, params=None):
    """Play every round of ``losses`` against ``learner``."""
    losses = np.asarray(losses, dtype=np.float64)
    n = losses.shape[0]
    matrix = losses.ndim == 3
    first, _ = _as_array(learner.predict())
    preds = np.empty((n + 1,) + first.shape)
    has_aux = hasattr(learner, "aux_weights")
    aux = np.empty((n + 1, first.shape[0])) if has_aux else None
    incurred = np.empty(n)
    etas = np.empty(n)
    epochs = np.empty(n, dtype=np.int64)
    mins = np.empty(n)
    for t in range(n):
        w, mins[t] = _as_array(learner.predict())
        preds[t] = w
        if has_aux:
            aux[t] = learner.aux_weights
        etas[t] = learner.eta
        epochs[t] = learner.epoch
        incurred[t] = float(np.sum(w * losses[t])) if matrix else float(w @ losses[t])
        learner.update(losses[t])
    preds[n] = _as_array(learner.predict())[0]
    if has_aux:
        aux[n] = learner.aux_weights
    return Trajectory(
        learner=learner.name,
        predictions=preds,
        learner_losses=incurred,
        etas=etas,
        epochs=epochs,
        min_weights=mins,
        aux=aux,
        params=dict(params or {}),
    )
