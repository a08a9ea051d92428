"""Dataset assembly and feature scaling.

Turns a labeled record series into the fixed-width model matrix: for
each usable index t, the trailing 8-sample power window is decomposed
into stacked wavelet bands (32 values) and concatenated with the 8
trailing temperatures, giving 40 columns. A raw variant keeps the power
window untransformed (16 columns) for baseline comparisons.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .data import RampConfig, RampLabels, valid_window_rows
from .errors import DataShapeError
from .wavelet import _resolve, band_feature_names, window_band_features


@dataclass
class Dataset:
    """Model-ready matrix with provenance back into the record series.

    indices[i] is the position t in the source records whose window and
    label produced row i.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: list
    indices: np.ndarray

    def __post_init__(self):
        if self.features.ndim != 2:
            raise DataShapeError("features must be 2-d")
        n = self.features.shape[0]
        if len(self.labels) != n or len(self.indices) != n:
            raise DataShapeError("features, labels and indices disagree in length")
        if self.features.shape[1] != len(self.feature_names):
            raise DataShapeError("feature_names does not match feature width")
        if not np.isin(self.labels, (-1, 0, 1)).all():
            raise DataShapeError("labels must lie in {-1, 0, +1}")

    def __len__(self):
        return self.features.shape[0]


def build_dataset(records, ramp_labels: RampLabels, config: RampConfig | None = None, *,
                  wavelet_filter="haar", window: int = 8, levels: int = 3,
                  power_features: str = "wavelet") -> Dataset:
    """Assemble the feature matrix for every usable index of a series.

    power_features selects the power-window encoding: 'wavelet' for the
    stacked band features, 'raw' for the untransformed window. The
    temperature lags are appended either way.
    """
    config = config or RampConfig()
    if power_features not in ("wavelet", "raw"):
        raise ValueError(f"power_features must be 'wavelet' or 'raw', got {power_features!r}")
    n = len(records)
    if n != len(ramp_labels.labels):
        raise DataShapeError("records and labels disagree in length")
    valid = valid_window_rows(records, ramp_labels, config.sampling_minutes, window)
    if valid.size == 0:
        raise DataShapeError(
            "no usable rows: series too short, too gappy, or nothing labeled"
        )
    power = np.array([r.power for r in records], dtype=float)
    temp = np.array([r.temperature for r in records], dtype=float)

    chrono = valid[:, None] + np.arange(-(window - 1), 1)[None, :]
    windows = power[chrono]
    lagged = valid[:, None] - np.arange(window)[None, :]
    temps = temp[lagged]

    if power_features == "wavelet":
        filt = _resolve(wavelet_filter)
        pblock = np.array([window_band_features(row, filt) for row in windows])
        pnames = band_feature_names(window)
    else:
        pblock = power[lagged]
        pnames = [f"power_lag{j}" for j in range(window)]
    tnames = [f"temp_lag{j}" for j in range(window)]

    return Dataset(
        features=np.hstack([pblock, temps]),
        labels=ramp_labels.labels[valid].astype(int),
        feature_names=pnames + tnames,
        indices=valid,
    )


def build_lag_candidates(records, ramp_labels: RampLabels, config: RampConfig | None = None, *,
                         max_lag: int = 9):
    """Candidate pool for feature selection: raw power and temperature lags.

    Returns (X, y, names) where the columns are power_lag0..power_lagL
    followed by temp_lag0..temp_lagL.
    """
    config = config or RampConfig()
    window = max_lag + 1
    valid = valid_window_rows(records, ramp_labels, config.sampling_minutes, window)
    if valid.size == 0:
        raise DataShapeError("no usable rows for the requested lag depth")
    power = np.array([r.power for r in records], dtype=float)
    temp = np.array([r.temperature for r in records], dtype=float)
    lagged = valid[:, None] - np.arange(window)[None, :]
    X = np.hstack([power[lagged], temp[lagged]])
    names = [f"power_lag{j}" for j in range(window)] + [f"temp_lag{j}" for j in range(window)]
    return X, ramp_labels.labels[valid].astype(int), names


def write_dataset_csv(dataset: Dataset, path, comment: str | None = None):
    """Export a dataset as CSV with zero-padded feature columns plus label."""
    path = Path(path)
    width = max(2, len(str(dataset.features.shape[1] - 1)))
    header = [f"f{j:0{width}d}" for j in range(dataset.features.shape[1])] + ["label"]
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row, lab in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [str(int(lab))])
    return path


class MinMaxNormalizer(BaseEstimator, TransformerMixin):
    """Column-wise min-max scaling fitted on training rows only.

    Transformed training columns span [0, 1]. Values seen later that
    fall outside the fitted range are NOT clipped; test data may
    legitimately exceed the training envelope and the model should see
    that. A constant column cannot be scaled and raises DataShapeError
    naming the column.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        mins = X.min(axis=0)
        maxs = X.max(axis=0)
        flat = np.nonzero(maxs == mins)[0]
        if flat.size:
            raise DataShapeError(
                f"constant feature column(s) {flat.tolist()} cannot be min-max scaled"
            )
        self.data_min_ = mins
        self.data_max_ = maxs
        self.n_features_in_ = X.shape[1]
        return self

    def _check(self, X):
        check_is_fitted(self, "data_min_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DataShapeError(
                f"expected {self.n_features_in_} feature columns, got {X.shape[1]}"
            )
        return X

    def transform(self, X):
        X = self._check(X)
        return (X - self.data_min_) / (self.data_max_ - self.data_min_)

    def inverse_transform(self, X):
        X = self._check(X)
        return X * (self.data_max_ - self.data_min_) + self.data_min_
