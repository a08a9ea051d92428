"""Largest-Lyapunov-exponent estimation for sampled power series.

Implements the small-data-set divergence method: delay-embed the
series, pair every point with its nearest neighbor outside a temporal
exclusion window, track the mean log separation of the pairs forward in
time, and read the exponent off the initial slope of that curve by
least squares. A positive slope indicates sensitive dependence on
initial conditions, which is the justification for treating the series
as a chaotic signal worth forecasting with a nonlinear model.

Exponents are reported in nats per sampling step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ChaosError, DataShapeError


def embed(series, delay: int, dimension: int) -> np.ndarray:
    """Delay embedding: row i is [x(i), x(i+delay), ..., x(i+(m-1)delay)].

    Produces n - (m-1)*delay rows; the series must be strictly longer
    than (m-1)*delay.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise DataShapeError(f"expected a 1-d series, got shape {x.shape}")
    if delay < 1 or dimension < 1:
        raise ValueError("delay and dimension must be >= 1")
    span = (dimension - 1) * delay
    rows = x.size - span
    if rows < 1:
        raise DataShapeError(
            f"series of length {x.size} too short for delay={delay}, dimension={dimension}"
        )
    return np.column_stack([x[j * delay: j * delay + rows] for j in range(dimension)])


def mean_period(series) -> int:
    """Reciprocal of the power-weighted mean frequency, in samples.

    Used as the default temporal exclusion window and fit span. Falls
    back to 1 for a spectrum with no energy off DC.
    """
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    amp = np.abs(np.fft.rfft(x))[1:]
    total = amp.sum()
    if total <= 0.0:
        return 1
    freqs = np.fft.rfftfreq(x.size)[1:]
    fbar = float((freqs * amp).sum() / total)
    return max(1, int(round(1.0 / fbar)))


@dataclass(frozen=True)
class EmbeddingConfig:
    """Estimator knobs; None means derive from the series.

    theiler_window: neighbor pairs closer in time than this are
    excluded so that trajectory self-correlation does not masquerade as
    convergence. fit_range is the inclusive step interval used for the
    slope fit.
    """

    delay: int = 1
    dimension: int = 2
    theiler_window: int | None = None
    fit_range: tuple | None = None
    max_steps: int | None = None


@dataclass(frozen=True)
class LyapunovResult:
    lambda_max: float
    steps: np.ndarray
    divergence: np.ndarray
    neighbor_count: int
    theiler_window: int
    fit_range: tuple


def _nearest_excluded(Y: np.ndarray, window: int):
    """Nearest neighbor of each embedded point, ignoring temporal kin.

    Pairs with |i - j| <= window or zero distance are skipped. Distances
    are computed in blocks to bound memory.
    """
    n = Y.shape[0]
    best_j = np.full(n, -1, dtype=np.int64)
    best_d = np.full(n, np.inf)
    block = max(1, int(4_000_000 // max(1, n)))
    cols = np.arange(n)
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        D = cdist(Y[lo:hi], Y)
        rows = np.arange(lo, hi)
        D[np.abs(rows[:, None] - cols[None, :]) <= window] = np.inf
        D[D == 0.0] = np.inf
        j = D.argmin(axis=1)
        best_j[lo:hi] = j
        best_d[lo:hi] = D[np.arange(hi - lo), j]
    ok = np.isfinite(best_d)
    return np.nonzero(ok)[0], best_j[ok]


def largest_lyapunov(series, config: EmbeddingConfig | None = None) -> LyapunovResult:
    """Estimate the largest Lyapunov exponent of a scalar series."""
    config = config or EmbeddingConfig()
    x = np.asarray(series, dtype=float)
    if not np.isfinite(x).all():
        raise DataShapeError("series contains non-finite values")
    if np.ptp(x) == 0.0:
        raise ChaosError("constant series has no divergence to measure")
    Y = embed(x, config.delay, config.dimension)
    n_vec = Y.shape[0]
    if n_vec < 8:
        raise DataShapeError(f"only {n_vec} embedded points; need at least 8")

    period = mean_period(x)
    window = config.theiler_window if config.theiler_window is not None else period
    window = max(window, config.delay)
    window = min(window, max(1, n_vec // 4))

    if config.fit_range is not None:
        fit_lo, fit_hi = int(config.fit_range[0]), int(config.fit_range[1])
    else:
        fit_lo, fit_hi = 1, max(2, min(period, n_vec // 4))
    if not 0 <= fit_lo < fit_hi:
        raise ValueError(f"bad fit range ({fit_lo}, {fit_hi})")
    max_steps = config.max_steps if config.max_steps is not None else fit_hi
    max_steps = min(max_steps, n_vec - 2)
    if max_steps < fit_hi:
        fit_hi = max_steps
    if fit_hi <= fit_lo:
        raise ChaosError("series too short for the requested fit range")

    idx_i, idx_j = _nearest_excluded(Y, window)
    if idx_i.size == 0:
        raise ChaosError(
            f"no neighbor pairs survive the exclusion window {window}"
        )

    steps = np.arange(max_steps + 1)
    curve = np.full(max_steps + 1, np.nan)
    for s in steps:
        alive = (idx_i + s < n_vec) & (idx_j + s < n_vec)
        if not alive.any():
            break
        d = np.linalg.norm(Y[idx_i[alive] + s] - Y[idx_j[alive] + s], axis=1)
        d = d[d > 0.0]
        if d.size:
            curve[s] = float(np.log(d).mean())

    span = (steps >= fit_lo) & (steps <= fit_hi) & np.isfinite(curve)
    if span.sum() < 2:
        raise ChaosError("divergence curve undefined over the fit range")
    slope = float(np.polyfit(steps[span], curve[span], 1)[0])
    return LyapunovResult(
        lambda_max=slope,
        steps=steps,
        divergence=curve,
        neighbor_count=int(idx_i.size),
        theiler_window=int(window),
        fit_range=(fit_lo, fit_hi),
    )


def lyapunov_surface(series, delays, dimensions, **kwargs) -> np.ndarray:
    """lambda_max over a (delay, dimension) grid; undefined cells are NaN.

    Extra keyword arguments are forwarded into EmbeddingConfig for every
    cell (theiler_window, fit_range, max_steps).
    """
    delays = [int(d) for d in delays]
    dimensions = [int(m) for m in dimensions]
    if not delays or not dimensions:
        raise ValueError("need at least one delay and one dimension")
    grid = np.full((len(delays), len(dimensions)), np.nan)
    for a, tau in enumerate(delays):
        for b, m in enumerate(dimensions):
            cfg = EmbeddingConfig(delay=tau, dimension=m, **kwargs)
            try:
                grid[a, b] = largest_lyapunov(series, cfg).lambda_max
            except (ChaosError, DataShapeError):
                pass
    return grid


def write_surface_csv(path, delays, dimensions, grid, comment: str | None = None):
    """Surface CSV: one row per delay, one column per dimension, NA for NaN."""
    import csv
    from pathlib import Path

    path = Path(path)
    grid = np.asarray(grid, dtype=float)
    if grid.shape != (len(delays), len(dimensions)):
        raise DataShapeError(
            f"grid shape {grid.shape} does not match {len(delays)} delays x "
            f"{len(dimensions)} dimensions"
        )
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["delay"] + [f"dim{m}" for m in dimensions])
        for a, tau in enumerate(delays):
            cells = [repr(float(v)) if np.isfinite(v) else "NA" for v in grid[a]]
            writer.writerow([str(tau)] + cells)
    return path
