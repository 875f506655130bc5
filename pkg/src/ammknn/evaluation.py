"""Leave-one-out cross-validation, risk tiers, confusion matrices,
metrics, and the prediction-cutoff sweep.

Evaluation convention: a *positive* outcome is an actual failing score,
so sensitivity measures how well failing subjects are detected. Binary
classification passes a score at or above the pass mark. The three risk
tiers are fail (score < fail_below), at_risk (fail_below <= score <=
at_risk_upper) and pass (score > at_risk_upper); both boundary scores
land in the at_risk band, matching the prose reading of the bands rather
than a half-open interval cut.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

from .errors import (
    AmmknnError,
    DataError,
    EmptyInput,
    EmptyMatrix,
    EmptyTrainingSet,
    InvalidSpec,
    LengthMismatch,
    UnsortedCutoffs,
)
from .frame import Frame
from .preprocess import pearson_correlation

TIER_FAIL = "fail"
TIER_AT_RISK = "at_risk"
TIER_PASS = "pass"
TIERS = (TIER_FAIL, TIER_AT_RISK, TIER_PASS)

SCORE_MIN = 200.0
SCORE_MAX = 800.0


@dataclass(frozen=True)
class TierBoundaries:
    fail_below: float = 350.0
    at_risk_upper: float = 375.0

    def __post_init__(self):
        if not self.fail_below < self.at_risk_upper:
            raise InvalidSpec(
                f"fail_below {self.fail_below} must be below at_risk_upper {self.at_risk_upper}"
            )
        for v in (self.fail_below, self.at_risk_upper):
            if not SCORE_MIN <= v <= SCORE_MAX:
                raise InvalidSpec(f"tier boundary {v} outside score range")


@dataclass(frozen=True)
class ConfusionMatrix2:
    """Binary cross-tabulation; positive = actual fail."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class ConfusionMatrix3:
    """3x3 cross-tabulation, counts[actual_tier][predicted_tier] over TIERS."""

    counts: tuple

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    @property
    def diagonal(self) -> tuple:
        return tuple(self.counts[i][i] for i in range(3))

    @property
    def row_sums(self) -> tuple:
        return tuple(sum(row) for row in self.counts)


@dataclass(frozen=True)
class Metrics:
    """accuracy, sensitivity, specificity; None marks an undefined ratio."""

    accuracy: float
    sensitivity: Optional[float]
    specificity: Optional[float]


def classify_binary(score: float, pass_at: float) -> str:
    """'pass' when the score is at or above the pass mark, else 'fail'."""
    return "pass" if score >= pass_at else "fail"


def classify_tier(score: float, bounds: TierBoundaries) -> str:
    if score < bounds.fail_below:
        return TIER_FAIL
    if score <= bounds.at_risk_upper:
        return TIER_AT_RISK
    return TIER_PASS


def confusion_2x2(actual: Sequence[float], predicted: Sequence[float], pass_at: float) -> ConfusionMatrix2:
    if len(actual) != len(predicted):
        raise LengthMismatch(f"lengths differ: {len(actual)} vs {len(predicted)}")
    tp = fp = tn = fn = 0
    for a, p in zip(actual, predicted):
        actual_fail = a < pass_at
        predicted_fail = p < pass_at
        if actual_fail and predicted_fail:
            tp += 1
        elif actual_fail:
            fn += 1
        elif predicted_fail:
            fp += 1
        else:
            tn += 1
    return ConfusionMatrix2(tp, fp, tn, fn)


def confusion_3x3(
    actual: Sequence[float],
    predicted: Sequence[float],
    actual_bounds: TierBoundaries,
    predicted_bounds: TierBoundaries,
) -> ConfusionMatrix3:
    """Full tier cross-tabulation.

    The two axes take separate boundary sets because cohort-validation
    runs cut predicted scores at wider bands than actual scores.
    """
    if len(actual) != len(predicted):
        raise LengthMismatch(f"lengths differ: {len(actual)} vs {len(predicted)}")
    counts = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    for a, p in zip(actual, predicted):
        i = TIERS.index(classify_tier(a, actual_bounds))
        j = TIERS.index(classify_tier(p, predicted_bounds))
        counts[i][j] += 1
    return ConfusionMatrix3(tuple(tuple(row) for row in counts))


def metrics_from_cm(cm: ConfusionMatrix2) -> Metrics:
    if cm.total == 0:
        raise EmptyMatrix("no evaluated subjects")
    accuracy = (cm.tp + cm.tn) / cm.total
    sensitivity = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn > 0 else None
    specificity = cm.tn / (cm.tn + cm.fp) if cm.tn + cm.fp > 0 else None
    return Metrics(accuracy, sensitivity, specificity)


def accuracy_3x3(cm: ConfusionMatrix3) -> float:
    if cm.total == 0:
        raise EmptyMatrix("no evaluated subjects")
    return sum(cm.diagonal) / cm.total


@dataclass(frozen=True)
class SweepPoint:
    cutoff: float
    matrix: ConfusionMatrix2
    metrics: Metrics


def threshold_sweep(
    actual: Sequence[float],
    predicted: Sequence[float],
    cutoffs: Sequence[float],
    pass_at: float = 350.0,
) -> List[SweepPoint]:
    """Re-binarize predictions at each cutoff while actuals stay at the pass mark.

    A prediction counts as a pass only when it is strictly above the
    cutoff, so raising the cutoff flags more subjects as failing. This
    reproduces the manual adjustment applied to over-optimistic baseline
    models: sweeping the cutoff from pass_at - 1 upward shows how many
    extra true failures each adjustment step catches and at what false
    positive cost.
    """
    if len(actual) != len(predicted):
        raise LengthMismatch(f"lengths differ: {len(actual)} vs {len(predicted)}")
    if not cutoffs:
        raise EmptyInput("cutoffs list is empty")
    points = []
    for c in cutoffs:
        tp = fp = tn = fn = 0
        for a, p in zip(actual, predicted):
            actual_fail = a < pass_at
            predicted_fail = not (p > c)
            if actual_fail and predicted_fail:
                tp += 1
            elif actual_fail:
                fn += 1
            elif predicted_fail:
                fp += 1
            else:
                tn += 1
        cm = ConfusionMatrix2(tp, fp, tn, fn)
        points.append(SweepPoint(c, cm, metrics_from_cm(cm)))
    return points


def sweep_sensitivity_monotone_check(points: Sequence[SweepPoint]) -> bool:
    """True when true-positive counts never decrease along ascending cutoffs."""
    cutoffs = [p.cutoff for p in points]
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise UnsortedCutoffs(f"cutoffs not strictly ascending: {cutoffs}")
    tps = [p.matrix.tp for p in points]
    return all(b >= a for a, b in zip(tps, tps[1:]))


def loocv(frame: Frame, model: Callable[[Frame, Frame], float]) -> List[float]:
    """One prediction per row, each made with that row held out of training.

    ``model(training, subject)`` receives the remaining rows as a Frame and
    the held-out row as a single-row Frame (target included, but a model
    must only read its features). Folds are independent and run serially
    here; a parallel schedule would produce the same output since models
    are required to be pure.
    """
    if frame.n_rows < 2:
        raise EmptyTrainingSet("leave-one-out needs at least 2 rows")
    frame.target_values()
    predictions = []
    for i in range(frame.n_rows):
        training = frame.subset_rows([j for j in range(frame.n_rows) if j != i])
        subject = frame.single_row(i)
        try:
            predictions.append(float(model(training, subject)))
        except AmmknnError as exc:
            raise type(exc)(f"fold {i}: {exc}") from exc
    return predictions


def prediction_actual_correlation(predicted: Sequence[float], actual: Sequence[float]) -> Optional[float]:
    """Pearson r between predictions and outcomes; None when undefined."""
    if len(predicted) != len(actual) or len(predicted) < 2:
        return None
    try:
        return pearson_correlation(predicted, actual)
    except DataError:
        return None
