"""Deep belief network classifier for ramp events.

The network stacks two sigmoid hidden layers (70 units each by default)
on the 40-dimensional feature vector and finishes with a 3-way softmax
over [down, none, up]. Each hidden layer is first pretrained as an RBM
with CD-1 (the layer's weights and hidden biases become the feedforward
parameters), then the whole stack is fine-tuned by mini-batch gradient
descent on the cross-entropy loss for a fixed number of epochs.

Model persistence is a versioned JSON document carrying the
architecture, class order, every parameter array, the fitted
normalization ranges, and the seed/config fingerprint of the run that
produced it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import DataShapeError, ModelFormatError, TrainingError
from .preprocessing import MinMaxNormalizer
from .rbm import RbmLayer, TrainConfig, hidden_prob, train_rbm

MODEL_FORMAT_VERSION = 1

CLASS_ORDER = (-1, 0, 1)  # down, none, up


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def pretrain_stack(n_visible: int, hidden_units, X, config: TrainConfig, rng):
    """Greedy layerwise CD-1 pretraining.

    Each layer trains on the previous layer's hidden activation
    probabilities. Returns (layers, per_layer_errors).
    """
    layers = []
    histories = []
    data = np.asarray(X, dtype=float)
    width = n_visible
    for nh in hidden_units:
        layer = RbmLayer(width, int(nh), rng=rng)
        histories.append(train_rbm(layer, data, config, rng))
        layers.append(layer)
        data = hidden_prob(layer, data)
        width = layer.n_hidden
    return layers, histories


def _forward(params, X):
    """Activations of every layer; params is [(W, b), ..., head]."""
    acts = [X]
    for W, b in params[:-1]:
        acts.append(expit(acts[-1] @ W.T + b))
    Wh, bh = params[-1]
    logits = acts[-1] @ Wh.T + bh
    return acts, logits


def loss_and_gradients(params, X, Y):
    """Mean cross-entropy of the softmax head and its exact gradients.

    Y is one-hot (n, n_classes). Returns (loss, grads) with grads
    mirroring params as (dW, db) pairs. Pure function: nothing is
    mutated, which is what the finite-difference check relies on.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    acts, logits = _forward(params, X)
    n = X.shape[0]
    # stable log-sum-exp cross entropy
    zmax = logits.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(logits - zmax).sum(axis=1))
    loss = float((lse - (logits * Y).sum(axis=1)).mean())

    probs = softmax(logits)
    delta = (probs - Y) / n
    grads = [None] * len(params)
    grads[-1] = (delta.T @ acts[-1], delta.sum(axis=0))
    back = delta @ params[-1][0]
    for ell in range(len(params) - 2, -1, -1):
        a = acts[ell + 1]
        dz = back * a * (1.0 - a)
        grads[ell] = (dz.T @ acts[ell], dz.sum(axis=0))
        back = dz @ params[ell][0]
    return loss, grads


def finetune(layers, head, X, Y, config: TrainConfig, rng) -> list:
    """Mini-batch gradient descent on the full stack for exactly K epochs.

    Updates the RBM layers' weights/hidden biases and the head arrays in
    place and returns the per-epoch mean loss curve. Raises
    TrainingError if the loss or any parameter goes non-finite.
    """
    params = [(layer.weights, layer.hidden_bias) for layer in layers] + [head]
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = X.shape[0]
    curve = []
    for epoch in range(1, config.finetune_max_iters + 1):
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, config.batch_size):
            rows = order[lo:lo + config.batch_size]
            loss, grads = loss_and_gradients(params, X[rows], Y[rows])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            for (W, b), (gW, gb) in zip(params, grads):
                W -= config.finetune_lr * gW
                b -= config.finetune_lr * gb
            total += loss * rows.size
        curve.append(total / n)
    for W, b in params:
        if not (np.isfinite(W).all() and np.isfinite(b).all()):
            raise TrainingError("non-finite parameters after fine-tuning")
    return curve


class DbnClassifier(BaseEstimator, ClassifierMixin):
    """RBM-pretrained feedforward classifier over {-1, 0, +1}.

    Parameters mirror the training constants: CD-1 learning rate 0.08
    with momentum 0.9 for pretraining, fine-tune rate 0.05, batch 32,
    500 fine-tune epochs. `seed` fixes every random draw, so two fits
    with identical inputs produce identical parameters.

    Prediction breaks probability ties in favor of the no-event class:
    a ramp call must beat "nothing happens" outright.
    """

    def __init__(self, hidden_units=(70, 70), learning_rate: float = 0.08,
                 momentum: float = 0.9, cd_steps: int = 1,
                 pretrain_epochs: int = 50, finetune_iters: int = 500,
                 finetune_lr: float = 0.05, batch_size: int = 32,
                 seed: int = 0, eq8_literal: bool = False):
        self.hidden_units = hidden_units
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.cd_steps = cd_steps
        self.pretrain_epochs = pretrain_epochs
        self.finetune_iters = finetune_iters
        self.finetune_lr = finetune_lr
        self.batch_size = batch_size
        self.seed = seed
        self.eq8_literal = eq8_literal

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            cd_steps=self.cd_steps,
            pretrain_epochs=self.pretrain_epochs,
            finetune_max_iters=self.finetune_iters,
            finetune_lr=self.finetune_lr,
            batch_size=self.batch_size,
            eq8_literal=self.eq8_literal,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        y = np.asarray(y)
        if not np.isin(y, CLASS_ORDER).all():
            raise DataShapeError("labels must lie in {-1, 0, +1}")
        if len(tuple(self.hidden_units)) < 1:
            raise ValueError("need at least one hidden layer")
        config = self._train_config()
        rng = np.random.default_rng(self.seed)

        layers, pre_errors = pretrain_stack(
            X.shape[1], tuple(int(u) for u in self.hidden_units), X, config, rng
        )
        top = layers[-1].n_hidden
        head = (rng.uniform(-0.01, 0.01, size=(len(CLASS_ORDER), top)), np.zeros(len(CLASS_ORDER)))

        onehot = np.zeros((y.size, len(CLASS_ORDER)))
        onehot[np.arange(y.size), (y + 1).astype(int)] = 1.0

        self.loss_curve_ = finetune(layers, head, X, onehot, config, rng)
        self.rbm_layers_ = layers
        self.head_weights_, self.head_bias_ = head
        self.pretrain_errors_ = pre_errors
        self.classes_ = np.array(CLASS_ORDER)
        self.n_features_in_ = X.shape[1]
        return self

    def _logits(self, X):
        check_is_fitted(self, "rbm_layers_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DataShapeError(
                f"expected {self.n_features_in_} feature columns, got {X.shape[1]}"
            )
        params = [(l.weights, l.hidden_bias) for l in self.rbm_layers_]
        params.append((self.head_weights_, self.head_bias_))
        _, logits = _forward(params, X)
        return logits

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self._logits(X))

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        best = probs.argmax(axis=1)
        # no-event wins exact ties against either ramp class
        tied = probs[:, 1] == probs[np.arange(len(best)), best]
        best[tied] = 1
        return self.classes_[best]


@dataclass
class ModelBundle:
    """A persisted model plus everything needed to apply it."""

    classifier: DbnClassifier
    normalizer: MinMaxNormalizer | None
    feature_names: list | None
    feature_recipe: dict | None
    seed: int | None
    config_sha256: str | None


def save_model(path, classifier: DbnClassifier, *, normalizer: MinMaxNormalizer | None = None,
               feature_names=None, feature_recipe: dict | None = None,
               seed: int | None = None, config_sha256: str | None = None):
    """Serialize a fitted classifier (and its scaler) to versioned JSON."""
    check_is_fitted(classifier, "rbm_layers_")
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "arch": {
            "n_visible": int(classifier.n_features_in_),
            "hidden_units": [int(l.n_hidden) for l in classifier.rbm_layers_],
            "n_classes": len(CLASS_ORDER),
        },
        "class_order": list(CLASS_ORDER),
        "normalization": None,
        "feature_names": list(feature_names) if feature_names is not None else None,
        "feature_recipe": feature_recipe,
        "seed": seed,
        "config_sha256": config_sha256,
        "layers": [
            {
                "weights": l.weights.tolist(),
                "visible_bias": l.visible_bias.tolist(),
                "hidden_bias": l.hidden_bias.tolist(),
            }
            for l in classifier.rbm_layers_
        ],
        "head": {
            "weights": classifier.head_weights_.tolist(),
            "bias": classifier.head_bias_.tolist(),
        },
    }
    if normalizer is not None:
        check_is_fitted(normalizer, "data_min_")
        doc["normalization"] = {
            "min": normalizer.data_min_.tolist(),
            "max": normalizer.data_max_.tolist(),
        }
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return path


def load_model(path) -> ModelBundle:
    """Rebuild a ModelBundle from JSON written by save_model.

    Corrupt JSON, missing fields, or a version other than the one this
    build writes raise ModelFormatError.
    """
    path = Path(path)
    if not path.exists():
        raise ModelFormatError(f"model file not found: {path}")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"corrupt model file {path}: {exc}") from exc
    try:
        version = doc["format_version"]
        if version != MODEL_FORMAT_VERSION:
            raise ModelFormatError(
                f"model format version {version} is not supported "
                f"(this build reads version {MODEL_FORMAT_VERSION})"
            )
        if list(doc["class_order"]) != list(CLASS_ORDER):
            raise ModelFormatError(f"unexpected class order {doc['class_order']}")
        arch = doc["arch"]
        layers = [
            RbmLayer.from_arrays(l["weights"], l["visible_bias"], l["hidden_bias"])
            for l in doc["layers"]
        ]
        if [l.n_hidden for l in layers] != list(arch["hidden_units"]):
            raise ModelFormatError("layer shapes disagree with the declared architecture")
        if layers and layers[0].n_visible != arch["n_visible"]:
            raise ModelFormatError("first layer width disagrees with n_visible")
        head_w = np.asarray(doc["head"]["weights"], dtype=float)
        head_b = np.asarray(doc["head"]["bias"], dtype=float)
        if head_w.shape != (len(CLASS_ORDER), layers[-1].n_hidden) or head_b.shape != (len(CLASS_ORDER),):
            raise ModelFormatError("head shapes disagree with the declared architecture")

        clf = DbnClassifier(hidden_units=tuple(arch["hidden_units"]))
        clf.rbm_layers_ = layers
        clf.head_weights_ = head_w
        clf.head_bias_ = head_b
        clf.classes_ = np.array(CLASS_ORDER)
        clf.n_features_in_ = int(arch["n_visible"])
        clf.loss_curve_ = doc.get("loss_curve", [])

        normalizer = None
        if doc["normalization"] is not None:
            normalizer = MinMaxNormalizer()
            normalizer.data_min_ = np.asarray(doc["normalization"]["min"], dtype=float)
            normalizer.data_max_ = np.asarray(doc["normalization"]["max"], dtype=float)
            normalizer.n_features_in_ = normalizer.data_min_.size
            if normalizer.n_features_in_ != arch["n_visible"]:
                raise ModelFormatError("normalization width disagrees with n_visible")
    except KeyError as exc:
        raise ModelFormatError(f"model file {path} is missing field {exc}") from exc
    except ModelFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"model file {path} has malformed contents: {exc}") from exc
    return ModelBundle(
        classifier=clf,
        normalizer=normalizer,
        feature_names=doc.get("feature_names"),
        feature_recipe=doc.get("feature_recipe"),
        seed=doc.get("seed"),
        config_sha256=doc.get("config_sha256"),
    )
