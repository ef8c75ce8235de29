"""Multinomial logistic regression trained by full-batch gradient descent."""

import json

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import check_labels, check_matrix
from .exceptions import ConfigError, DataError, ParseError, ShapeError, SingleClassError

MODEL_FORMAT = "prda-softmax"
MODEL_VERSION = 1

_MAX_LR_HALVINGS = 60


def _softmax(scores):
    shifted = scores - scores.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


def _add_bias(X):
    return np.hstack([X, np.ones((X.shape[0], 1))])


class SoftmaxClassifier(ClassifierMixin, BaseEstimator):
    """Softmax classifier with L2-regularized cross-entropy loss.

    Training runs deterministic full-batch gradient descent from a zero
    initialization; the objective is convex, so the optimum does not
    depend on any seed. Features are standardized internally (per-column
    mean/scale estimated in ``fit``) purely as preconditioning for the
    descent; the model applies the same affine map at prediction time.

    Parameters
    ----------
    learning_rate : float, default=0.5
        Gradient step size.
    epochs : int, default=300
        Number of accepted gradient steps.
    l2 : float, default=1e-3
        Ridge penalty on the non-bias weights.
    seed : int, default=0
        Unused by the optimizer (zero init); kept so configurations
        round-trip alongside the samplers.
    adaptive_lr : bool, default=True
        Reject any step that would increase the loss and halve the rate
        before retrying (capped), which guarantees a non-increasing loss
        curve. Disable to observe raw fixed-rate descent.
    standardize : bool, default=True
        Center and scale columns before the descent.

    Attributes
    ----------
    weights_ : ndarray of shape (n_features + 1, n_classes)
        Weight matrix in the standardized feature space, with the bias
        as the final row.
    classes_ : ndarray
        Sorted class labels seen during fit.
    scaler_mean_, scaler_scale_ : ndarray of shape (n_features,)
    initial_loss_, final_loss_ : float
    loss_curve_ : ndarray
        Loss after every accepted step, starting at the zero-weight loss.
    lr_halvings_ : int
        Number of rejected steps under ``adaptive_lr``.
    """

    def __init__(self, learning_rate=0.5, epochs=300, l2=1e-3, seed=0,
                 adaptive_lr=True, standardize=True):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.seed = seed
        self.adaptive_lr = adaptive_lr
        self.standardize = standardize

    def _loss(self, Xb, y_idx, weights):
        probs = _softmax(Xb @ weights)
        picked = np.maximum(probs[np.arange(Xb.shape[0]), y_idx], 1e-300)
        ce = -float(np.mean(np.log(picked)))
        return ce + 0.5 * self.l2 * float(np.sum(weights[:-1] ** 2))

    def _grad(self, Xb, onehot, weights):
        probs = _softmax(Xb @ weights)
        grad = Xb.T @ (probs - onehot) / Xb.shape[0]
        grad[:-1] += self.l2 * weights[:-1]
        return grad

    def _design(self, X):
        """Bias-augmented (and standardized) design matrix."""
        return _add_bias((X - self.scaler_mean_) / self.scaler_scale_)

    def fit(self, X, y):
        X = check_matrix(X, "X")
        y = check_labels(y, X.shape[0], "y")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if int(self.epochs) < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.l2 < 0:
            raise ConfigError(f"l2 must be >= 0, got {self.l2}")

        classes, y_idx = np.unique(y, return_inverse=True)
        if classes.size < 2:
            raise SingleClassError("training data must contain at least 2 classes")

        n, d = X.shape
        if self.standardize:
            self.scaler_mean_ = X.mean(axis=0)
            scale = X.std(axis=0)
            scale[scale == 0] = 1.0
            self.scaler_scale_ = scale
        else:
            self.scaler_mean_ = np.zeros(d)
            self.scaler_scale_ = np.ones(d)
        Xb = self._design(X)
        onehot = np.zeros((n, classes.size))
        onehot[np.arange(n), y_idx] = 1.0

        weights = np.zeros((d + 1, classes.size))
        lr = float(self.learning_rate)
        halvings = 0
        loss = self._loss(Xb, y_idx, weights)
        curve = [loss]
        accepted = 0
        while accepted < int(self.epochs):
            grad = self._grad(Xb, onehot, weights)
            candidate = weights - lr * grad
            cand_loss = self._loss(Xb, y_idx, candidate)
            if (
                self.adaptive_lr
                and cand_loss > loss
                and halvings < _MAX_LR_HALVINGS
            ):
                lr *= 0.5
                halvings += 1
                continue
            weights = candidate
            loss = cand_loss
            curve.append(loss)
            accepted += 1

        self.weights_ = weights
        self.classes_ = classes
        self.n_features_in_ = d
        self.initial_loss_ = curve[0]
        self.final_loss_ = loss
        self.loss_curve_ = np.asarray(curve)
        self.lr_halvings_ = halvings
        return self

    def predict_proba(self, X):
        """Per-class probabilities; rows are strictly positive and sum to 1."""
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(
                f"X has {X.shape[1]} features, model expects {self.n_features_in_}"
            )
        return _softmax(self._design(X) @ self.weights_)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def to_dict(self):
        """Versioned serializable snapshot of a fitted model."""
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "classes": self.classes_.tolist(),
            "feature_dim": int(self.n_features_in_),
            "weights": self.weights_.tolist(),
            "scaler_mean": self.scaler_mean_.tolist(),
            "scaler_scale": self.scaler_scale_.tolist(),
            "params": self.get_params(),
        }

    @classmethod
    def from_dict(cls, payload):
        if payload.get("format") != MODEL_FORMAT:
            raise ParseError(f"not a {MODEL_FORMAT} blob")
        if payload.get("version") != MODEL_VERSION:
            raise ParseError(f"unsupported model version {payload.get('version')!r}")
        model = cls(**payload.get("params", {}))
        model.weights_ = np.asarray(payload["weights"], dtype=np.float64)
        model.classes_ = np.asarray(payload["classes"], dtype=np.int64)
        model.n_features_in_ = int(payload["feature_dim"])
        model.scaler_mean_ = np.asarray(payload["scaler_mean"], dtype=np.float64)
        model.scaler_scale_ = np.asarray(payload["scaler_scale"], dtype=np.float64)
        return model

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def gradient_check(model, X, y, step=1e-5):
    """Max |analytic - central-difference| gradient entry for a model.

    Evaluates both gradients of the regularized cross-entropy at the
    model's current weights on a small labeled batch (n <= 20).
    """
    X = check_matrix(X, "X")
    y = check_labels(y, X.shape[0], "y")
    if X.shape[0] > 20:
        raise ConfigError("gradient_check expects a small instance (n <= 20)")
    if X.shape[1] != model.n_features_in_:
        raise ShapeError(
            f"X has {X.shape[1]} features, model expects {model.n_features_in_}"
        )
    position = {c: i for i, c in enumerate(model.classes_)}
    try:
        y_idx = np.array([position[label] for label in y], dtype=np.int64)
    except KeyError as exc:
        raise DataError(f"label {exc.args[0]!r} unknown to the model") from None

    Xb = model._design(X)
    onehot = np.zeros((X.shape[0], model.classes_.size))
    onehot[np.arange(X.shape[0]), y_idx] = 1.0
    analytic = model._grad(Xb, onehot, model.weights_)

    numeric = np.zeros_like(model.weights_)
    probe = model.weights_.copy()
    for i in range(probe.shape[0]):
        for j in range(probe.shape[1]):
            probe[i, j] += step
            upper = model._loss(Xb, y_idx, probe)
            probe[i, j] -= 2 * step
            lower = model._loss(Xb, y_idx, probe)
            probe[i, j] += step
            numeric[i, j] = (upper - lower) / (2 * step)
    return float(np.max(np.abs(analytic - numeric)))
