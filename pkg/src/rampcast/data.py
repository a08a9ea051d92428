"""Raw wind-power series handling.

Covers CSV ingestion with a strict column contract, bad-point removal,
ramp-event labeling, quarterly train/test splitting, and a synthetic
generator used for fixtures and demos.

A ramp event at time t compares the power change over the look-ahead
interval delta_t against a rate threshold H:

    R(t) = (P(t + delta_t) - P(t)) / delta_t

R(t) > H labels t as an up ramp (+1), R(t) < -H as a down ramp (-1),
anything else as no event (0). The label at t therefore describes the
upcoming window; the trailing delta_t of a series has no label.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from datetime import datetime, timedelta
from itertools import groupby
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DataShapeError, InputDataError

TIMESTAMP_FMT = "%Y-%m-%d %H:%M"
CSV_HEADER = ["timestamp", "power_w", "temp_c"]

_EPOCH = datetime(1970, 1, 1)


@dataclass(frozen=True)
class SampleRecord:
    """One observation: wall-clock time, output power (W), ambient temp (C)."""

    timestamp: datetime
    power: float
    temperature: float


@dataclass(frozen=True)
class RampConfig:
    """Sampling and ramp-detection constants.

    threshold_h is the rate threshold in watts per minute; delta_t_minutes
    is the look-ahead span and must be a positive multiple of the sampling
    interval.
    """

    sampling_minutes: int = 10
    delta_t_minutes: int = 30
    threshold_h: float = 16.0

    def __post_init__(self):
        if self.sampling_minutes <= 0:
            raise ValueError("sampling_minutes must be positive")
        if self.delta_t_minutes <= 0 or self.delta_t_minutes % self.sampling_minutes:
            raise ValueError("delta_t_minutes must be a positive multiple of sampling_minutes")
        if self.threshold_h <= 0:
            raise ValueError("threshold_h must be positive")

    @property
    def horizon_steps(self) -> int:
        return self.delta_t_minutes // self.sampling_minutes


def _ts_minutes(records) -> np.ndarray:
    """Timestamps as integer minutes since a fixed epoch."""
    return np.array(
        [int((r.timestamp - _EPOCH).total_seconds() // 60) for r in records],
        dtype=np.int64,
    )


def load_series(path) -> list:
    """Read a power series CSV into records.

    The file must carry the exact header ``timestamp,power_w,temp_c``,
    timestamps formatted ``YYYY-MM-DD HH:MM`` in non-decreasing order,
    and finite numeric fields. Leading '#' comment lines are skipped so
    files emitted by this package stay readable. Any violation raises
    InputDataError naming the offending line.
    """
    path = Path(path)
    if not path.exists():
        raise InputDataError(f"input file not found: {path}")
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = None
        lineno = 0
        for row in reader:
            lineno = reader.line_num
            if row and row[0].startswith("#"):
                continue
            header = row
            break
        if header is None:
            raise InputDataError(f"{path}: empty file")
        if header != CSV_HEADER:
            raise InputDataError(
                f"{path} line {lineno}: expected header {','.join(CSV_HEADER)!r}, "
                f"got {','.join(header)!r}"
            )
        prev_ts = None
        for row in reader:
            lineno = reader.line_num
            if not row:
                continue
            if len(row) != 3:
                raise InputDataError(f"{path} line {lineno}: expected 3 fields, got {len(row)}")
            try:
                ts = datetime.strptime(row[0], TIMESTAMP_FMT)
            except ValueError:
                raise InputDataError(
                    f"{path} line {lineno}: bad timestamp {row[0]!r} "
                    f"(expected YYYY-MM-DD HH:MM)"
                ) from None
            try:
                power = float(row[1])
                temp = float(row[2])
            except ValueError:
                raise InputDataError(f"{path} line {lineno}: non-numeric value in {row[1:]!r}") from None
            if not (math.isfinite(power) and math.isfinite(temp)):
                raise InputDataError(f"{path} line {lineno}: non-finite value in {row[1:]!r}")
            if prev_ts is not None and ts < prev_ts:
                raise InputDataError(f"{path} line {lineno}: timestamps not in increasing order")
            prev_ts = ts
            records.append(SampleRecord(ts, power, temp))
    return records


def write_series_csv(path, records, labels=None, comment: str | None = None):
    """Write records (optionally with a label column) as CSV.

    labels, when given, is a RampLabels pair; unlabeled positions get an
    empty label field. A comment string becomes a '# ...' first line.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        header = list(CSV_HEADER) + (["label"] if labels is not None else [])
        writer.writerow(header)
        for i, rec in enumerate(records):
            row = [rec.timestamp.strftime(TIMESTAMP_FMT), repr(rec.power), repr(rec.temperature)]
            if labels is not None:
                row.append(str(int(labels.labels[i])) if labels.mask[i] else "")
            writer.writerow(row)
    return path


class CleanResult(NamedTuple):
    records: list
    removed: int


def clean_series(records) -> CleanResult:
    """Drop unusable observations.

    Removes rows with non-finite or negative power, non-finite
    temperature, and duplicate timestamps (first occurrence wins).
    Running it twice removes nothing the second time.
    """
    kept = []
    removed = 0
    last_ts = None
    for rec in records:
        ok = (
            math.isfinite(rec.power)
            and rec.power >= 0.0
            and math.isfinite(rec.temperature)
            and rec.timestamp != last_ts
        )
        if ok:
            kept.append(rec)
            last_ts = rec.timestamp
        else:
            removed += 1
    return CleanResult(kept, removed)


def find_gaps(records, sampling_minutes: int = 10) -> list:
    """Indices where the sampling grid breaks.

    Returns (index, gap_minutes) for every record whose distance to its
    predecessor is not exactly the sampling interval.
    """
    if len(records) < 2:
        return []
    tsm = _ts_minutes(records)
    steps = np.diff(tsm)
    out = []
    for i in np.nonzero(steps != sampling_minutes)[0]:
        out.append((int(i) + 1, float(steps[i])))
    return out


class RampLabels(NamedTuple):
    """Per-record ramp labels with a validity mask.

    labels[t] in {-1, 0, +1} is meaningful only where mask[t]. The mask
    is False for the trailing horizon (no future sample to compare) and
    wherever the records t..t+k are not exactly on the sampling grid.
    """

    labels: np.ndarray
    mask: np.ndarray


def label_ramps(records, config: RampConfig | None = None) -> RampLabels:
    """Label every record by the ramp rate over the upcoming horizon."""
    config = config or RampConfig()
    k = config.horizon_steps
    n = len(records)
    if n < k + 1:
        raise DataShapeError(
            f"series of {n} records is too short to label over a {k}-step horizon"
        )
    power = np.array([r.power for r in records], dtype=float)
    tsm = _ts_minutes(records)
    labels = np.zeros(n, dtype=np.int8)
    mask = np.zeros(n, dtype=bool)
    rate = (power[k:] - power[:-k]) / float(config.delta_t_minutes)
    aligned = (tsm[k:] - tsm[:-k]) == config.delta_t_minutes
    lab = np.where(rate > config.threshold_h, 1, np.where(rate < -config.threshold_h, -1, 0))
    head = labels[: n - k]
    head[aligned] = lab[aligned]
    mask[: n - k] = aligned
    return RampLabels(labels, mask)


def valid_window_rows(records, ramp_labels: RampLabels, sampling_minutes: int, window: int) -> np.ndarray:
    """Indices t that can become dataset rows.

    A row needs a defined label at t plus a gap-free history of
    ``window`` consecutive samples ending at t.
    """
    n = len(records)
    if n != len(ramp_labels.labels):
        raise DataShapeError("records and labels disagree in length")
    contiguous = np.zeros(n, dtype=bool)
    if n >= window:
        step_ok = (np.diff(_ts_minutes(records)) == sampling_minutes).astype(int)
        if window == 1:
            contiguous[:] = True
        else:
            runs = np.convolve(step_ok, np.ones(window - 1, dtype=int), "valid") == window - 1
            contiguous[window - 1:] = runs
    return np.nonzero(contiguous & ramp_labels.mask)[0]


class QuarterSplit(NamedTuple):
    year: int
    quarter: int
    train_records: list
    test_records: list
    n_train_rows: int
    n_test_rows: int


def split_quarters(records, config: RampConfig | None = None, *,
                   window: int = 8, train_rows: int = 1800) -> list:
    """Partition a series by calendar quarter into train/test record runs.

    Within each quarter the first ``train_rows`` usable dataset rows
    (labeled, gap-free history) become training data and the remainder
    become test data. The returned record lists overlap the boundary
    just enough that every row keeps its history window and its label
    horizon. A quarter with fewer usable rows than ``train_rows`` raises
    DataShapeError; one with exactly that many yields an empty test set
    and a warning.
    """
    config = config or RampConfig()
    k = config.horizon_steps
    splits = []
    for (year, quarter), group in groupby(
        records, key=lambda r: (r.timestamp.year, (r.timestamp.month - 1) // 3 + 1)
    ):
        recs = list(group)
        rl = label_ramps(recs, config)
        valid = valid_window_rows(recs, rl, config.sampling_minutes, window)
        if valid.size < train_rows:
            raise DataShapeError(
                f"quarter {year}Q{quarter}: only {valid.size} usable rows, "
                f"need at least {train_rows} for training"
            )
        if valid.size == train_rows:
            warnings.warn(f"quarter {year}Q{quarter}: no usable rows left for testing")
        t_last_train = int(valid[train_rows - 1])
        train = recs[: t_last_train + k + 1]
        if valid.size > train_rows:
            t_first_test = int(valid[train_rows])
            test = recs[max(0, t_first_test - (window - 1)):]
        else:
            test = []
        splits.append(
            QuarterSplit(year, quarter, train, test, train_rows, int(valid.size - train_rows))
        )
    return splits


@dataclass(frozen=True)
class RampInjection:
    """One injected ramp: the index where the swing starts and its sign."""

    index: int
    direction: int
    magnitude: float


# Rise shape of an injected pulse: fractional increments per step.
_ONSET_INCREMENTS = np.array([1.0, 2.0, 5.0, 8.0, 5.0, 3.0]) / 24.0
# Short alternating disturbance preceding each pulse; stays under the ramp
# threshold but leaves a high-frequency signature in the window history.
_PRECURSOR_PATTERN = np.array([1.0, -1.0, 1.0, -1.0])


def synth_series(seed: int, n: int, ramp_rate: float, *,
                 start: datetime | None = None,
                 sampling_minutes: int = 10,
                 base_power: float = 1700.0,
                 carrier_amplitude: float = 120.0,
                 ramp_magnitude: float = 1400.0,
                 precursor_amplitude: float = 100.0,
                 noise_amplitude: float = 8.0):
    """Generate a deterministic synthetic power/temperature series.

    The background is a chaotic carrier (smoothed logistic-map orbit)
    plus bounded uniform noise, sized so that it never crosses the ramp
    threshold on its own. Ramps are transient pulses: a 6-step rise,
    6-step hold, mirrored fall, preceded by a small alternating
    precursor. ramp_rate controls roughly which fraction of labeled
    indices carries a nonzero label.

    Returns (records, injections); injections lists the rise and fall
    start of each pulse with its direction.
    """
    if n < 64:
        raise DataShapeError(f"need at least 64 samples, got {n}")
    if not 0.0 <= ramp_rate <= 0.2:
        raise ValueError("ramp_rate must lie in [0, 0.2]")
    rng = np.random.default_rng(seed)

    burn = 100
    orbit = np.empty(burn + n + 2)
    orbit[0] = rng.uniform(0.1, 0.9)
    for i in range(orbit.size - 1):
        orbit[i + 1] = 4.0 * orbit[i] * (1.0 - orbit[i])
    tail = orbit[burn:]
    carrier = (tail[:n] + tail[1:n + 1] + tail[2:n + 2]) / 3.0

    power = base_power + 2.0 * carrier_amplitude * (carrier - 0.5)
    power = power + rng.uniform(-noise_amplitude, noise_amplitude, n)

    rise = _ONSET_INCREMENTS.cumsum()
    profile = np.concatenate([rise, np.ones(6), 1.0 - rise])
    injections = []
    if ramp_rate > 0.0:
        labels_per_pulse = 8.0
        n_pulses = max(1, int(round(ramp_rate * n / labels_per_pulse)))
        stride = n / n_pulses
        lo = len(_PRECURSOR_PATTERN) + 4
        hi = n - profile.size - 6
        for p in range(n_pulses):
            center = int(round((p + 0.5) * stride))
            jitter_span = int(stride // 6)
            jitter = int(rng.integers(-jitter_span, jitter_span + 1)) if jitter_span else 0
            s = min(max(center + jitter, lo), hi)
            direction = 1 if rng.random() < 0.5 else -1
            power[s:s + profile.size] += direction * ramp_magnitude * profile
            power[s - 4:s] += direction * precursor_amplitude * _PRECURSOR_PATTERN
            injections.append(RampInjection(s, direction, ramp_magnitude))
            injections.append(RampInjection(s + 12, -direction, ramp_magnitude))

    temp = 12.0 + 6.0 * np.sin(2.0 * np.pi * np.arange(n) / 432.0)
    temp = temp + rng.uniform(-0.3, 0.3, n)

    t0 = start or datetime(2015, 1, 1)
    step = timedelta(minutes=sampling_minutes)
    records = [
        SampleRecord(t0 + i * step, float(power[i]), float(temp[i]))
        for i in range(n)
    ]
    return records, injections
