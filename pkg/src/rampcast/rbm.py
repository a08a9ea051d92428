"""Bernoulli restricted Boltzmann machine trained by one-step contrastive divergence.

Conventions. Weights W have shape (hidden, visible). The energy of a
joint binary state (v, h) is

    E(v, h) = -a.v - b.h - h.W.v

with visible bias a and hidden bias b, so the conditionals factorize as

    P(h_j = 1 | v) = sigmoid(b_j + sum_i W_ji v_i)
    P(v_i = 1 | h) = sigmoid(a_i + sum_j W_ji h_j)

The CD-1 update runs one Gibbs half-cycle from a data batch (sampled
hidden states, then mean-field reconstruction) and moves each parameter
along the difference of data and reconstruction statistics. Updates are
smoothed with a momentum term on the parameter increment; a literal
variant that decays the parameters themselves is available behind
``eq8_literal`` for comparison, though it shrinks everything toward
zero and is not what you want in practice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DataShapeError, TrainingError


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by pretraining and fine-tuning."""

    learning_rate: float = 0.08
    momentum: float = 0.9
    cd_steps: int = 1
    pretrain_epochs: int = 50
    finetune_max_iters: int = 500
    finetune_lr: float = 0.05
    batch_size: int = 32
    eq8_literal: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0 or self.finetune_lr <= 0:
            raise ValueError("learning rates must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.cd_steps != 1:
            raise ValueError("only single-step contrastive divergence is supported")
        if self.pretrain_epochs < 0:
            raise ValueError("pretrain_epochs must be >= 0")
        if self.finetune_max_iters < 1:
            raise ValueError("finetune_max_iters must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class RbmLayer:
    """One visible/hidden layer pair with its CD-1 momentum state.

    Weights start uniform in [-scale, scale], biases at zero.
    """

    def __init__(self, n_visible: int, n_hidden: int, rng=None, weight_scale: float = 0.01):
        if n_visible < 1 or n_hidden < 1:
            raise DataShapeError("layer sizes must be >= 1")
        rng = np.random.default_rng(rng)
        self.weights = rng.uniform(-weight_scale, weight_scale, size=(n_hidden, n_visible))
        self.visible_bias = np.zeros(n_visible)
        self.hidden_bias = np.zeros(n_hidden)
        self._w_inc = np.zeros_like(self.weights)
        self._a_inc = np.zeros_like(self.visible_bias)
        self._b_inc = np.zeros_like(self.hidden_bias)

    @classmethod
    def from_arrays(cls, weights, visible_bias, hidden_bias) -> "RbmLayer":
        weights = np.asarray(weights, dtype=float)
        a = np.asarray(visible_bias, dtype=float)
        b = np.asarray(hidden_bias, dtype=float)
        if weights.ndim != 2 or weights.shape != (b.size, a.size):
            raise DataShapeError(
                f"weights {weights.shape} do not match biases ({b.size}, {a.size})"
            )
        layer = cls(a.size, b.size)
        layer.weights = weights.copy()
        layer.visible_bias = a.copy()
        layer.hidden_bias = b.copy()
        layer._w_inc = np.zeros_like(weights)
        layer._a_inc = np.zeros_like(a)
        layer._b_inc = np.zeros_like(b)
        return layer

    @property
    def n_visible(self) -> int:
        return self.weights.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.weights.shape[0]


def energy(rbm: RbmLayer, v, h) -> float:
    """Joint energy E(v, h) of one configuration."""
    v = np.asarray(v, dtype=float)
    h = np.asarray(h, dtype=float)
    if v.shape != (rbm.n_visible,) or h.shape != (rbm.n_hidden,):
        raise DataShapeError(
            f"state shapes {v.shape}/{h.shape} do not match layer "
            f"({rbm.n_visible}, {rbm.n_hidden})"
        )
    return float(-rbm.visible_bias @ v - rbm.hidden_bias @ h - h @ rbm.weights @ v)


def hidden_prob(rbm: RbmLayer, v) -> np.ndarray:
    """P(h = 1 | v), rows of v may be a batch."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != rbm.n_visible:
        raise DataShapeError(f"visible width {v.shape[-1]} != {rbm.n_visible}")
    return expit(v @ rbm.weights.T + rbm.hidden_bias)


def visible_prob(rbm: RbmLayer, h) -> np.ndarray:
    """P(v = 1 | h), rows of h may be a batch."""
    h = np.asarray(h, dtype=float)
    if h.shape[-1] != rbm.n_hidden:
        raise DataShapeError(f"hidden width {h.shape[-1]} != {rbm.n_hidden}")
    return expit(h @ rbm.weights + rbm.visible_bias)


def _binary_states(n: int) -> np.ndarray:
    # column j is bit j, so state index == sum_j s_j 2^j
    return ((np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1).astype(float)


@dataclass(frozen=True)
class JointTable:
    """Exhaustive joint distribution of a small RBM.

    probs[iv, ih] = P(v = visible_states[iv], h = hidden_states[ih]).
    Only feasible for n_visible + n_hidden <= 20 units.
    """

    visible_states: np.ndarray
    hidden_states: np.ndarray
    probs: np.ndarray

    def _state_index(self, state, n: int) -> int:
        s = np.asarray(state, dtype=float)
        if s.shape != (n,) or not np.isin(s, (0.0, 1.0)).all():
            raise DataShapeError(f"state must be a binary vector of length {n}")
        return int(s @ (2 ** np.arange(n)))

    def hidden_conditional(self, v) -> np.ndarray:
        """P(h_j = 1 | v) computed from the enumerated joint."""
        row = self.probs[self._state_index(v, self.visible_states.shape[1])]
        return (row @ self.hidden_states) / row.sum()

    def visible_conditional(self, h) -> np.ndarray:
        """P(v_i = 1 | h) computed from the enumerated joint."""
        col = self.probs[:, self._state_index(h, self.hidden_states.shape[1])]
        return (col @ self.visible_states) / col.sum()


def joint_prob_bruteforce(rbm: RbmLayer) -> JointTable:
    """Enumerate P(v, h) over every binary configuration.

    This is the ground-truth oracle for the conditional formulas: the
    marginalized conditionals of the returned table must agree with
    hidden_prob / visible_prob.
    """
    total = rbm.n_visible + rbm.n_hidden
    if total > 20:
        raise ValueError(f"{total} units is past the enumeration bound of 20")
    V = _binary_states(rbm.n_visible)
    H = _binary_states(rbm.n_hidden)
    # -E(v,h) for all pairs at once: (2^I, 2^J)
    negE = V @ rbm.visible_bias[:, None] + (H @ rbm.hidden_bias)[None, :] + V @ rbm.weights.T @ H.T
    negE = negE - negE.max()
    probs = np.exp(negE)
    probs /= probs.sum()
    return JointTable(visible_states=V, hidden_states=H, probs=probs)


def cd1_update(rbm: RbmLayer, batch, config: TrainConfig, rng) -> float:
    """One CD-1 parameter update from a batch of visible rows.

    Returns the mean squared reconstruction error of the batch. The
    hidden data states are sampled (one Bernoulli draw per unit); the
    reconstruction and its hidden activation stay mean-field.
    """
    v0 = np.atleast_2d(np.asarray(batch, dtype=float))
    if v0.shape[1] != rbm.n_visible:
        raise DataShapeError(f"batch width {v0.shape[1]} != {rbm.n_visible}")
    m = v0.shape[0]

    ph0 = hidden_prob(rbm, v0)
    h0 = (rng.random(ph0.shape) < ph0).astype(float)
    v1 = visible_prob(rbm, h0)
    ph1 = hidden_prob(rbm, v1)

    dw = (h0.T @ v0 - ph1.T @ v1) / m
    da = (v0 - v1).mean(axis=0)
    db = (h0 - ph1).mean(axis=0)

    if config.eq8_literal:
        # literal reading: decay the parameters themselves
        rbm.weights = config.momentum * rbm.weights + config.learning_rate * dw
        rbm.visible_bias = config.momentum * rbm.visible_bias + config.learning_rate * da
        rbm.hidden_bias = config.momentum * rbm.hidden_bias + config.learning_rate * db
    else:
        rbm._w_inc = config.momentum * rbm._w_inc + config.learning_rate * dw
        rbm._a_inc = config.momentum * rbm._a_inc + config.learning_rate * da
        rbm._b_inc = config.momentum * rbm._b_inc + config.learning_rate * db
        rbm.weights += rbm._w_inc
        rbm.visible_bias += rbm._a_inc
        rbm.hidden_bias += rbm._b_inc

    if not (np.isfinite(rbm.weights).all()
            and np.isfinite(rbm.visible_bias).all()
            and np.isfinite(rbm.hidden_bias).all()):
        raise TrainingError("non-finite parameters after contrastive divergence update")
    return float(((v0 - v1) ** 2).mean())


def train_rbm(rbm: RbmLayer, X, config: TrainConfig, rng) -> list:
    """Run CD-1 over shuffled mini-batches for the configured epochs.

    Returns the per-epoch mean reconstruction error.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != rbm.n_visible:
        raise DataShapeError(f"training matrix shape {X.shape} != (*, {rbm.n_visible})")
    n = X.shape[0]
    errors = []
    for _ in range(config.pretrain_epochs):
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, config.batch_size):
            rows = order[lo:lo + config.batch_size]
            err = cd1_update(rbm, X[rows], config, rng)
            total += err * rows.size
        errors.append(total / n)
    return errors
