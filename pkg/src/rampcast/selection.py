"""Greedy forward feature selection seeded by correlation.

The selector starts from the single candidate with the largest absolute
Pearson correlation against the labels, then repeatedly scans every
remaining candidate, temporarily adds it, and asks an evaluator for the
resulting prediction error. The candidate with the largest strict error
reduction joins the subset; the first round with no strict improvement
stops the search. Ties (and the seeding step) resolve toward the lowest
column index so runs are reproducible.

The evaluator is any callable (X_subset, y) -> error in [0, 1]. The
default trains a reduced-budget network on the leading 80% of rows and
reports the misclassification fraction on the trailing 20%.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import DataShapeError, TrainingError


def pearson(x, y) -> float:
    """Plain Pearson correlation of two equal-length vectors.

    Constant input has no defined correlation and raises DataShapeError.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise DataShapeError(f"need equal-length 1-d vectors, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise DataShapeError("need at least 2 points")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = np.sqrt((xd * xd).sum())
    sy = np.sqrt((yd * yd).sum())
    if sx == 0.0 or sy == 0.0:
        raise DataShapeError("correlation with a constant vector is undefined")
    return float((xd * yd).sum() / (sx * sy))


@dataclass
class FeatureSubset:
    """Outcome of a greedy search.

    error_history[i] is the evaluator error after selecting
    selected[:i+1]; it is strictly decreasing by construction.
    terminated_by is 'no-improvement' or 'exhausted'.
    """

    selected: list
    error_history: list
    terminated_by: str


def greedy_select(X, y, evaluator, *, max_features: int | None = None,
                  tol: float = 1e-12) -> FeatureSubset:
    """Forward selection over the columns of X. See module docstring."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DataShapeError(f"X {X.shape} and y {y.shape} do not line up")
    d = X.shape[1]
    if d < 1:
        raise DataShapeError("need at least one candidate column")
    if max_features is not None and max_features < 1:
        raise ValueError("max_features must be >= 1")

    scores = np.empty(d)
    for j in range(d):
        col = X[:, j]
        # a constant candidate carries no signal; park it at the bottom
        # instead of failing the whole search
        scores[j] = abs(pearson(col, y)) if np.ptp(col) > 0 else -np.inf
    if not np.isfinite(scores).any():
        raise DataShapeError("every candidate column is constant")

    def run(cols):
        try:
            err = float(evaluator(X[:, cols], y))
        except Exception as exc:
            raise TrainingError(f"evaluator failed on subset {cols}") from exc
        if not 0.0 <= err <= 1.0:
            raise TrainingError(f"evaluator returned {err!r} for subset {cols}, expected [0, 1]")
        return err

    selected = [int(np.argmax(scores))]
    current = run(selected)
    history = [current]
    remaining = [j for j in range(d) if j != selected[0]]
    terminated = "exhausted"
    while remaining:
        if max_features is not None and len(selected) >= max_features:
            break
        best_j = None
        best_err = current
        for j in remaining:
            trial = run(selected + [j])
            if trial < best_err - tol:
                best_err = trial
                best_j = j
        if best_j is None:
            terminated = "no-improvement"
            break
        selected.append(best_j)
        remaining.remove(best_j)
        current = best_err
        history.append(current)
    return FeatureSubset(selected=selected, error_history=history, terminated_by=terminated)


def make_dbn_evaluator(*, seed: int = 0, val_fraction: float = 0.2,
                       hidden_units=(70, 70), pretrain_epochs: int = 10,
                       finetune_iters: int = 50, batch_size: int = 32):
    """Reduced-budget network evaluator for subset search.

    Splits rows chronologically (the tail val_fraction is held out),
    scales with the training min/max, trains a small-budget classifier
    with a fixed seed, and returns the holdout misclassification
    fraction. Deterministic for fixed inputs.
    """
    from .dbn import DbnClassifier
    from .preprocessing import MinMaxNormalizer

    if not 0.0 < val_fraction < 1.0:
        raise ValueError("val_fraction must lie in (0, 1)")

    def evaluate(X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        n = X.shape[0]
        n_val = max(1, int(round(n * val_fraction)))
        if n - n_val < 2:
            raise DataShapeError(f"{n} rows is too few to split for evaluation")
        Xtr, Xval = X[: n - n_val], X[n - n_val:]
        ytr, yval = y[: n - n_val], y[n - n_val:]
        scaler = MinMaxNormalizer().fit(Xtr)
        clf = DbnClassifier(
            hidden_units=hidden_units,
            pretrain_epochs=pretrain_epochs,
            finetune_iters=finetune_iters,
            batch_size=batch_size,
            seed=seed,
        )
        clf.fit(scaler.transform(Xtr), ytr)
        pred = clf.predict(scaler.transform(Xval))
        return float(np.mean(pred != yval))

    return evaluate


def write_selection_csv(subset: FeatureSubset, feature_names, path,
                        comment: str | None = None):
    """Selection trace CSV: subset size, feature just added, error in percent."""
    path = Path(path)
    names = list(feature_names)
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["num_vars", "added_feature", "error_pct"])
        for i, (j, err) in enumerate(zip(subset.selected, subset.error_history)):
            writer.writerow([str(i + 1), names[j], f"{100.0 * err:.2f}"])
    return path


class GreedyFeatureSelector(BaseEstimator, TransformerMixin):
    """Estimator wrapper around greedy_select.

    evaluator defaults to the reduced-budget network evaluator; pass a
    cheap callable for interactive use. After fit, `selected_` holds
    column indices and transform keeps only those columns.
    """

    def __init__(self, evaluator=None, max_features: int | None = None, tol: float = 1e-12):
        self.evaluator = evaluator
        self.max_features = max_features
        self.tol = tol

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        evaluator = self.evaluator if self.evaluator is not None else make_dbn_evaluator()
        result = greedy_select(X, y, evaluator, max_features=self.max_features, tol=self.tol)
        self.subset_ = result
        self.selected_ = list(result.selected)
        self.error_history_ = list(result.error_history)
        self.terminated_by_ = result.terminated_by
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "selected_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DataShapeError(
                f"expected {self.n_features_in_} feature columns, got {X.shape[1]}"
            )
        return X[:, self.selected_]
