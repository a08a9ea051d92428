"""Multiresolution wavelet analysis of short power windows.

A window of 8 consecutive power values is decomposed over three levels
of an orthonormal discrete wavelet transform (periodic boundary
handling). Each band (one approximation a3, three details d3/d2/d1) is
reconstructed back to the window's own length, so the four band signals
sum to the original window exactly. Stacking the four bands gives the
32-dimensional feature block used by the classifier.

The transform pair is written as explicit gather/scatter convolutions.
Because the analysis polyphase matrix is orthogonal for the filters
shipped here, synthesis is literally its transpose, which is what makes
the reconstruction exact to rounding error even on windows shorter than
the filter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DataShapeError

_SQRT2 = float(np.sqrt(2.0))
_SQRT3 = float(np.sqrt(3.0))

# Orthonormal analysis lowpass coefficients by filter name.
_LOWPASS = {
    "haar": np.array([1.0, 1.0]) / _SQRT2,
    "db4": np.array(
        [1.0 + _SQRT3, 3.0 + _SQRT3, 3.0 - _SQRT3, 1.0 - _SQRT3]
    ) / (4.0 * _SQRT2),
}


def qmf_highpass(lowpass: np.ndarray) -> np.ndarray:
    """Quadrature mirror of a lowpass filter: g[k] = (-1)^k h[L-1-k]."""
    h = np.asarray(lowpass, dtype=float)
    signs = (-1.0) ** np.arange(h.size)
    return signs * h[::-1]


@dataclass(frozen=True)
class WaveletFilter:
    """An orthonormal analysis filter pair.

    Invariants checked at construction: the highpass is the quadrature
    mirror of the lowpass, the lowpass sums to sqrt(2) and has unit
    energy. Violating any of these breaks perfect reconstruction.
    """

    name: str
    lowpass: np.ndarray
    highpass: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.lowpass, dtype=float)
        g = np.asarray(self.highpass, dtype=float)
        if h.ndim != 1 or h.size < 2 or h.shape != g.shape:
            raise ValueError("filter pair must be equal-length 1-d arrays")
        if not np.allclose(g, qmf_highpass(h), atol=1e-12):
            raise ValueError(f"{self.name}: highpass is not the quadrature mirror of the lowpass")
        if abs(h.sum() - _SQRT2) > 1e-12:
            raise ValueError(f"{self.name}: lowpass must sum to sqrt(2), got {h.sum()!r}")
        if abs((h * h).sum() - 1.0) > 1e-12:
            raise ValueError(f"{self.name}: lowpass must have unit energy, got {(h * h).sum()!r}")

    def __len__(self):
        return self.lowpass.size


def get_filter(name: str) -> WaveletFilter:
    """Look up a built-in filter by name ('haar' or 'db4')."""
    try:
        h = _LOWPASS[name]
    except KeyError:
        raise ValueError(
            f"unknown wavelet filter {name!r}; available: {sorted(_LOWPASS)}"
        ) from None
    return WaveletFilter(name, h.copy(), qmf_highpass(h))


def _resolve(filt) -> WaveletFilter:
    if isinstance(filt, WaveletFilter):
        return filt
    return get_filter(filt)


def dwt_step(signal, filt="haar"):
    """One analysis step with periodic boundary handling.

    Returns (approx, detail), each of half the input length. The input
    length must be even and at least 2; shorter-than-filter windows are
    fine because indices wrap.
    """
    filt = _resolve(filt)
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise DataShapeError(f"dwt_step expects a 1-d signal, got shape {x.shape}")
    n = x.size
    if n < 2 or n % 2:
        raise DataShapeError(f"dwt_step needs an even length >= 2, got {n}")
    L = len(filt)
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(L)[None, :]) % n
    windows = x[idx]
    return windows @ filt.lowpass, windows @ filt.highpass


def idwt_step(approx, detail, filt="haar"):
    """Exact inverse of dwt_step (transpose of the analysis operator)."""
    filt = _resolve(filt)
    a = np.asarray(approx, dtype=float)
    d = np.asarray(detail, dtype=float)
    if a.ndim != 1 or a.shape != d.shape:
        raise DataShapeError(
            f"approx/detail must be equal-length 1-d arrays, got {a.shape} and {d.shape}"
        )
    if a.size < 1:
        raise DataShapeError("idwt_step needs at least one coefficient")
    n = 2 * a.size
    L = len(filt)
    idx = (2 * np.arange(a.size)[:, None] + np.arange(L)[None, :]) % n
    out = np.zeros(n)
    np.add.at(out, idx, a[:, None] * filt.lowpass + d[:, None] * filt.highpass)
    return out


@dataclass(frozen=True)
class BandSet:
    """Band signals of a three-level decomposition, each at full window length.

    a3 + d3 + d2 + d1 reconstructs the analyzed window exactly.
    """

    a3: np.ndarray
    d3: np.ndarray
    d2: np.ndarray
    d1: np.ndarray

    def stack(self) -> np.ndarray:
        return np.concatenate([self.a3, self.d3, self.d2, self.d1])


def _band_signals(x: np.ndarray, filt: WaveletFilter, levels: int):
    """Cascade analysis then per-band synthesis with all other bands zeroed.

    Returns [a_L, d_L, ..., d_1], every entry at len(x).
    """
    approx = x
    details = []
    for _ in range(levels):
        approx, det = dwt_step(approx, filt)
        details.append(det)

    def lift(vec, level, is_detail):
        # one synthesis step from this band's own level, then zeros upward
        if is_detail:
            out = idwt_step(np.zeros_like(vec), vec, filt)
        else:
            out = idwt_step(vec, np.zeros_like(vec), filt)
        for _ in range(level - 1):
            out = idwt_step(out, np.zeros_like(out), filt)
        return out

    bands = [lift(approx, levels, False)]
    for lev in range(levels, 0, -1):
        bands.append(lift(details[lev - 1], lev, True))
    return bands


def mra_bands(signal, filt="haar", levels: int = 3) -> BandSet:
    """Three-level multiresolution split of a window.

    The window length must be divisible by 2**levels. Only the
    three-level variant used by the feature pipeline is supported.
    """
    if levels != 3:
        raise DataShapeError("only the three-level decomposition is supported")
    filt = _resolve(filt)
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise DataShapeError(f"expected a 1-d window, got shape {x.shape}")
    if x.size == 0 or x.size % (2 ** levels):
        raise DataShapeError(
            f"window length {x.size} is not divisible by {2 ** levels}"
        )
    a3, d3, d2, d1 = _band_signals(x, filt, levels)
    return BandSet(a3=a3, d3=d3, d2=d2, d1=d1)


def window_band_features(window, filt="haar") -> np.ndarray:
    """Flatten the four band signals of one window into a feature vector.

    For the standard 8-sample window this yields 32 values ordered
    [a3 | d3 | d2 | d1], each band in window time order.
    """
    return mra_bands(window, filt).stack()


BAND_NAMES = ("a3", "d3", "d2", "d1")


def band_feature_names(window: int) -> list:
    """Column names for stacked band features, lag 'window-1' first."""
    names = []
    for band in BAND_NAMES:
        for pos in range(window):
            names.append(f"{band}_lag{window - 1 - pos}")
    return names


class WaveletBandFeatures(BaseEstimator, TransformerMixin):
    """Transformer mapping rows of power windows to stacked band features.

    Parameters
    ----------
    filter_name : 'haar' or 'db4'
    levels : decomposition depth, fixed at 3 for this pipeline
    """

    def __init__(self, filter_name: str = "haar", levels: int = 3):
        self.filter_name = filter_name
        self.levels = levels

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] % (2 ** self.levels):
            raise DataShapeError(
                f"window width {X.shape[1]} is not divisible by {2 ** self.levels}"
            )
        self._filter = _resolve(self.filter_name)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "_filter")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DataShapeError(
                f"expected windows of width {self.n_features_in_}, got {X.shape[1]}"
            )
        return np.array([window_band_features(row, self._filter) for row in X])

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "_filter")
        return np.asarray(band_feature_names(self.n_features_in_), dtype=object)
