"""Forecast quality accounting for three-class ramp predictions.

Every evaluated index falls in exactly one of four buckets:

    correct   prediction equals the actual label (including both "no
              event"), counted N_T
    missed    an actual ramp predicted as no event, N_M
    false     no actual ramp but a ramp predicted, N_F
    reversed  a ramp predicted with the opposite sign, N_R

The four rates P = N_T/N, F = N_M/N, E1 = N_F/N, E2 = N_R/N therefore
sum to one. Pairwise receiver operating characteristic curves compare
the classifier's scores between two classes at a time (up vs none, down
vs none, down vs up) with trapezoidal area under the curve.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from .errors import DataShapeError

_VALID = (-1, 0, 1)


@dataclass(frozen=True)
class OutcomeCounts:
    """Four-way outcome tally; the buckets must partition the total."""

    n_total: int
    n_correct: int
    n_missed: int
    n_false: int
    n_reversed: int

    def __post_init__(self):
        counts = (self.n_correct, self.n_missed, self.n_false, self.n_reversed)
        if self.n_total <= 0:
            raise DataShapeError("need at least one evaluated sample")
        if any(c < 0 for c in counts):
            raise DataShapeError("negative outcome count")
        if sum(counts) != self.n_total:
            raise DataShapeError(
                f"outcome counts {counts} do not partition the total {self.n_total}"
            )


@dataclass(frozen=True)
class MetricsReport:
    """The four rates as fractions in [0, 1]; multiply by 100 to report."""

    accuracy: float
    miss_rate: float
    false_rate: float
    reversal_rate: float

    def as_tuple(self):
        return (self.accuracy, self.miss_rate, self.false_rate, self.reversal_rate)


def count_outcomes(predicted, actual) -> OutcomeCounts:
    """Bucket every (prediction, actual) pair. Labels must be in {-1, 0, +1}."""
    pred = np.asarray(predicted)
    act = np.asarray(actual)
    if pred.shape != act.shape or pred.ndim != 1:
        raise DataShapeError(f"prediction/actual shapes differ: {pred.shape} vs {act.shape}")
    if pred.size == 0:
        raise DataShapeError("nothing to evaluate")
    for name, arr in (("predicted", pred), ("actual", act)):
        if not np.isin(arr, _VALID).all():
            raise DataShapeError(f"{name} labels must lie in {{-1, 0, +1}}")
    correct = pred == act
    missed = (act != 0) & (pred == 0)
    false = (act == 0) & (pred != 0)
    reversed_ = (act != 0) & (pred == -act)
    return OutcomeCounts(
        n_total=int(pred.size),
        n_correct=int(correct.sum()),
        n_missed=int(missed.sum()),
        n_false=int(false.sum()),
        n_reversed=int(reversed_.sum()),
    )


def outcome_metrics(counts: OutcomeCounts) -> MetricsReport:
    """Rates from counts; exact fractions, no display rounding."""
    n = counts.n_total
    return MetricsReport(
        accuracy=counts.n_correct / n,
        miss_rate=counts.n_missed / n,
        false_rate=counts.n_false / n,
        reversal_rate=counts.n_reversed / n,
    )


ROC_PAIRS = ("up-vs-none", "down-vs-none", "down-vs-up")

# positive class first; the score is p_pos / (p_pos + p_neg)
_PAIR_CLASSES = {
    "up-vs-none": (1, 0),
    "down-vs-none": (-1, 0),
    "down-vs-up": (1, -1),
}


@dataclass(frozen=True)
class RocCurve:
    pair: str
    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def roc_curve(probs, actual, pair: str, class_order=(-1, 0, 1)) -> RocCurve:
    """Pairwise ROC restricted to samples of the two classes involved.

    probs is the (n, 3) class-probability matrix in class_order. Each
    retained sample is scored p_pos / (p_pos + p_neg); sweeping a
    threshold over the distinct scores traces the curve. Tied scores
    move as one group. Raises if either class is absent.
    """
    if pair not in _PAIR_CLASSES:
        raise ValueError(f"unknown pair {pair!r}; expected one of {ROC_PAIRS}")
    probs = np.asarray(probs, dtype=float)
    actual = np.asarray(actual)
    if probs.ndim != 2 or probs.shape[1] != len(class_order):
        raise DataShapeError(f"probs must be (n, {len(class_order)}), got {probs.shape}")
    if actual.shape != (probs.shape[0],):
        raise DataShapeError("probs and actual disagree in length")
    pos, neg = _PAIR_CLASSES[pair]
    order = list(class_order)
    keep = (actual == pos) | (actual == neg)
    binary = actual[keep] == pos
    n_pos = int(binary.sum())
    n_neg = int(keep.sum() - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DataShapeError(
            f"pair {pair}: need samples of both classes, have {n_pos} of {pos} and {n_neg} of {neg}"
        )
    p_pos = probs[keep, order.index(pos)]
    p_neg = probs[keep, order.index(neg)]
    denom = p_pos + p_neg
    score = np.where(denom > 0.0, p_pos / np.where(denom > 0.0, denom, 1.0), 0.5)

    desc = np.argsort(-score, kind="stable")
    s_sorted = score[desc]
    y_sorted = binary[desc]
    tps = np.cumsum(y_sorted)
    fps = np.cumsum(~y_sorted)
    # last index of each tied group
    last = np.nonzero(np.diff(s_sorted, append=-np.inf) != 0.0)[0]
    thresholds = np.concatenate([[np.inf], s_sorted[last]])
    tpr = np.concatenate([[0.0], tps[last] / n_pos])
    fpr = np.concatenate([[0.0], fps[last] / n_neg])
    auc = float(trapezoid(tpr, fpr))
    return RocCurve(pair=pair, thresholds=thresholds, fpr=fpr, tpr=tpr, auc=auc)


def write_metrics_csv(rows, path, comment: str | None = None):
    """Metrics CSV; rows are (model, quarter, MetricsReport) triples.

    Rates are written as unrounded percentages.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["model", "quarter", "miss_pct", "correct_pct", "false_pct", "reversed_pct"])
        for model, quarter, report in rows:
            writer.writerow([
                model,
                str(quarter),
                repr(100.0 * report.miss_rate),
                repr(100.0 * report.accuracy),
                repr(100.0 * report.false_rate),
                repr(100.0 * report.reversal_rate),
            ])
    return path


def write_roc_csv(curve: RocCurve, path, comment: str | None = None):
    """One ROC curve as CSV, closed by an AUC summary line."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["pair", "threshold", "fpr", "tpr"])
        for t, f, tp in zip(curve.thresholds, curve.fpr, curve.tpr):
            writer.writerow([curve.pair, repr(float(t)), repr(float(f)), repr(float(tp))])
        writer.writerow([curve.pair, "auc", repr(curve.auc), ""])
    return path
