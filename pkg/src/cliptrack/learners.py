"""Vector learners for prediction with expert advice.

Every learner follows the same protocol: ``predict()`` returns the weights
for the current round (repeat calls return the same array), then
``update(loss)`` consumes that round's loss vector. ``eta`` and ``epoch``
describe the learning rate in force for the pending prediction.
"""

import math

import numpy as np

from cliptrack import kernels
from cliptrack.errors import ConfigError, DomainError
from cliptrack.projections import check_floor
from cliptrack.simplex import HorizonConfig, as_loss_vector, uniform


def mwu_step(w, loss, eta):
    """Exponential-weights update w * exp(-eta * loss), normalized."""
    w = np.asarray(w, dtype=np.float64)
    loss = np.asarray(loss, dtype=np.float64)
    if w.shape != loss.shape:
        raise DomainError(f"dimension mismatch {w.shape} vs {loss.shape}")
    return kernels.omd_step(w, loss, float(eta), 0.0)


def fixed_share_step(w, loss, eta, alpha):
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    wm = mwu_step(w, loss, eta)
    k = wm.size
    # each expert keeps (1 - alpha) of its mass and receives alpha/(K-1) of everyone else's
    out = (1.0 - alpha) * wm + alpha / (k - 1) * (wm.sum() - wm)
    return out / out.sum()


def projection_update_step(w, loss, eta, alpha):
    """MWU step followed by the KL projection onto {w >= alpha}."""
    wm = mwu_step(w, loss, eta)
    check_floor(alpha, wm.size)
    if alpha <= 0.0:
        return wm
    return kernels.waterfill(wm, float(alpha))[0]


def _readonly(a):
    a.setflags(write=False)
    return a


class Learner:
    """Base class: holds the current prediction and the round counter."""

    name = "learner"

    def __init__(self, k, eta):
        if int(k) != k or k < 2:
            raise ConfigError(f"K must be an integer >= 2, got {k!r}")
        if not eta > 0 or not math.isfinite(eta):
            raise ConfigError(f"eta must be positive and finite, got {eta!r}")
        self.K = int(k)
        self.eta = float(eta)
        self.epoch = 1
        self.t = 1
        self._w = _readonly(uniform(self.K))

    def predict(self):
        return self._w

    def update(self, loss):
        loss = as_loss_vector(loss, self.K)
        self._w = _readonly(self._step(self._w, loss))
        self.t += 1

    def _step(self, w, loss):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(K={self.K}, eta={self.eta:.6g})"


class MWU(Learner):
    name = "mwu"

    def _step(self, w, loss):
        return kernels.omd_step(w, loss, self.eta, 0.0)


class FixedShare(Learner):
    name = "fixed_share"

    def __init__(self, k, eta, alpha):
        super().__init__(k, eta)
        if not 0.0 <= alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {alpha!r}")
        self.alpha = float(alpha)

    def _step(self, w, loss):
        return fixed_share_step(w, loss, self.eta, self.alpha)


class ProjectionUpdate(Learner):
    name = "projection_update"

    def __init__(self, k, eta, alpha):
        super().__init__(k, eta)
        if not alpha >= 0.0 or alpha * k > 1.0:
            raise ConfigError(f"alpha must satisfy 0 <= alpha*K <= 1, got {alpha!r}")
        self.alpha = float(alpha)

    def _step(self, w, loss):
        return projection_update_step(w, loss, self.eta, self.alpha)


class ClippedOMD(Learner):
    """Mirror descent on the clipped simplex with floor S/(TK)."""

    name = "clipped_omd"

    def __init__(self, config):
        super().__init__(config.K, config.eta)
        self.config = config
        self.floor = config.clip_floor

    def _step(self, w, loss):
        return kernels.omd_step(w, loss, self.eta, self.floor)


class PCS(Learner):
    """Prod on the clipped simplex: project w * (1 - eta*loss)."""

    name = "pcs"

    def __init__(self, config):
        if not 0.0 < config.eta <= 0.5:
            raise ConfigError(f"PCS needs eta in (0, 1/2], got {config.eta!r}")
        super().__init__(config.K, config.eta)
        self.config = config
        self.floor = config.clip_floor

    def _step(self, w, loss):
        return kernels.prod_step(w, loss, self.eta, self.floor)


class OCS(Learner):
    """Optimistic mirror descent on the clipped simplex.

    The prediction is one OMD step from the auxiliary point using the
    previous loss as a hint; the auxiliary point then takes a step on the
    observed loss.
    """

    name = "ocs"

    def __init__(self, config):
        super().__init__(config.K, config.eta)
        self.config = config
        self.floor = config.clip_floor
        self.aux_weights = _readonly(uniform(self.K))
        self.last_loss = _readonly(np.zeros(self.K))
        self._w = self._hint_step()

    def _hint_step(self):
        return _readonly(kernels.omd_step(self.aux_weights, self.last_loss, self.eta, self.floor))

    def update(self, loss):
        loss = as_loss_vector(loss, self.K)
        self.aux_weights = _readonly(kernels.omd_step(self.aux_weights, loss, self.eta, self.floor))
        self._after_update(loss)
        self.last_loss = loss
        self.t += 1
        self._w = self._hint_step()

    def _after_update(self, loss):
        pass


class OCSPlus(OCS):
    """OCS with a halving learning rate and no hindsight input.

    eta starts at sqrt(S log(KT/S)). Each round adds the squared sup-norm
    change of the loss to the epoch's running path length P; once eta
    exceeds sqrt(S log(KT/S) / P) the rate is halved and a new epoch starts
    on the next round. The breaking round stays charged to the old epoch and
    the auxiliary weights carry over.
    """

    name = "ocs_plus"

    def __init__(self, T, K, S):
        base = HorizonConfig(T, K, S)
        eta1 = math.sqrt(S * base.log_term)
        super().__init__(HorizonConfig(T, K, S, eta1))
        self.eta1 = eta1
        self.path = 0.0
        self.tau = [0]

    def _after_update(self, loss):
        diff = float(np.max(np.abs(loss - self.last_loss)))
        self.path += diff * diff
        if self.path > 0.0 and self.eta > math.sqrt(self.config.S * self.config.log_term / self.path):
            self.eta /= 2.0
            self.epoch += 1
            self.tau.append(self.t)
            self.path = 0.0


def clipped_omd_learner(config):
    return ClippedOMD(config)


def pcs_learner(config):
    return PCS(config)


def ocs_learner(config):
    return OCS(config)


def ocs_plus_learner(T, K, S):
    return OCSPlus(T, K, S)
