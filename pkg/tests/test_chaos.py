"""Lyapunov estimator tests.

The logistic map at r=4 has an exact largest exponent of ln 2; the
analytic oracle is the orbit average of log|f'(x)| = log|4 - 8x|, which
the estimator must reproduce from the scalar series alone. A periodic
signal has no divergence, so its estimate must sit at zero.
"""

import numpy as np
import pytest

from rampcast import (ChaosError, DataShapeError, EmbeddingConfig, embed,
                      label_ramps, largest_lyapunov, lyapunov_surface, synth_series)
from rampcast.chaos import mean_period, write_surface_csv

LN2 = np.log(2.0)


def logistic_orbit(seed, n, burn=100):
    rng = np.random.default_rng(seed)
    x = np.empty(burn + n)
    x[0] = rng.uniform(0.1, 0.9)
    for i in range(x.size - 1):
        x[i + 1] = 4.0 * x[i] * (1.0 - x[i])
    return x[burn:]


class TestEmbed:
    def test_single_row(self):
        Y = embed([1.0, 2.0, 3.0, 4.0, 5.0], delay=4, dimension=2)
        assert Y.shape == (1, 2)
        assert Y[0].tolist() == [1.0, 5.0]

    def test_row_layout(self):
        Y = embed(np.arange(10.0), delay=2, dimension=3)
        assert Y.shape == (6, 3)
        assert Y[0].tolist() == [0.0, 2.0, 4.0]
        assert Y[-1].tolist() == [5.0, 7.0, 9.0]

    def test_too_short(self):
        with pytest.raises(DataShapeError, match="too short"):
            embed(np.arange(4.0), delay=2, dimension=3)


class TestLogisticCalibration:
    def test_estimate_matches_analytic_exponent(self):
        orbit = logistic_orbit(42, 5000)
        oracle = float(np.log(np.abs(4.0 - 8.0 * orbit)).mean())
        assert abs(oracle - LN2) < 0.01  # the oracle itself must be sane
        res = largest_lyapunov(orbit)
        assert abs(res.lambda_max - LN2) < 0.1
        assert abs(res.lambda_max - oracle) < 0.1
        assert res.neighbor_count > 1000

    def test_deterministic(self):
        orbit = logistic_orbit(3, 3000)
        a = largest_lyapunov(orbit)
        b = largest_lyapunov(orbit)
        assert a.lambda_max == b.lambda_max

    def test_divergence_curve_rises(self):
        orbit = logistic_orbit(1, 4000)
        res = largest_lyapunov(orbit)
        lo, hi = res.fit_range
        assert res.divergence[hi] > res.divergence[lo]


class TestPeriodicAndDegenerate:
    def test_sine_has_no_divergence(self):
        t = np.arange(5000)
        res = largest_lyapunov(np.sin(2 * np.pi * t / 64.0))
        assert res.lambda_max <= 0.02

    def test_constant_series(self):
        with pytest.raises(ChaosError, match="constant"):
            largest_lyapunov(np.ones(500))

    def test_non_finite_rejected(self):
        x = np.ones(500)
        x[100] = np.nan
        with pytest.raises(DataShapeError, match="non-finite"):
            largest_lyapunov(x)

    def test_theiler_window_respects_delay(self):
        orbit = logistic_orbit(9, 2000)
        res = largest_lyapunov(orbit, EmbeddingConfig(delay=3, dimension=2))
        assert res.theiler_window >= 3


class TestMeanPeriod:
    def test_pure_tone(self):
        # 2000/50 periods exactly on the FFT grid: no leakage
        t = np.arange(2000)
        assert mean_period(np.sin(2 * np.pi * t / 50.0)) == 50

    def test_flat_series(self):
        assert mean_period(np.zeros(128)) == 1


class TestSurface:
    def test_logistic_grid_all_positive(self):
        orbit = logistic_orbit(5, 3000)
        grid = lyapunov_surface(orbit, [1, 2], [2, 3])
        assert grid.shape == (2, 2)
        assert (grid > 0.5).all(), grid

    def test_undefined_cells_are_nan(self):
        # far too short for dimension 5 at delay 40
        grid = lyapunov_surface(np.sin(np.arange(60.0)), [40], [5])
        assert np.isnan(grid[0, 0])

    def test_csv_format(self, tmp_path):
        grid = np.array([[0.5, np.nan], [0.25, 0.125]])
        path = write_surface_csv(tmp_path / "s.csv", [1, 2], [2, 3], grid,
                                 comment="seed=0 config_sha256=y")
        lines = path.read_text().splitlines()
        assert lines[0].startswith("#")
        assert lines[1] == "delay,dim2,dim3"
        assert lines[2].split(",") == ["1", "0.5", "NA"]
        assert lines[3].split(",") == ["2", "0.25", "0.125"]


class TestSynthIsChaotic:
    def test_positive_exponent_on_generated_series(self):
        recs, _ = synth_series(2, 3000, 0.0)
        power = np.array([r.power for r in recs])
        res = largest_lyapunov(power)
        assert res.lambda_max > 0.05, res.lambda_max
