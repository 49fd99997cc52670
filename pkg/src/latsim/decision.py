"""Control-plane decisions from finite samples, scored against analytic truth."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .delays import PathDelayModel, fraction_below
from .sampling import SampleSet, empirical_fraction_below


@dataclass(frozen=True)
class ComplianceRule:
    """At least ``required_fraction`` of delays must be at or below the threshold."""

    threshold_us: float = 82.0
    required_fraction: float = 0.99

    def __post_init__(self):
        if not self.threshold_us > 0:
            raise ValueError(f"threshold_us must be > 0, got {self.threshold_us}")
        if not 0.0 < self.required_fraction < 1.0:
            raise ValueError(
                f"required_fraction must lie in (0, 1), got {self.required_fraction}"
            )


@dataclass(frozen=True)
class ComplianceVerdict:
    path_id: str
    empirical_fraction: float
    compliant: bool


class TieBreak(Enum):
    """How to resolve equal empirical fractions in best-path selection.

    RANDOM picks uniformly from the tied candidates using a caller-supplied
    generator, which keeps runs reproducible under seeded streams while
    adding no systematic bias toward either path.
    """

    LOWEST_MEAN = "lowest-mean"
    LOWEST_MAX = "lowest-max"
    FIRST = "first"
    RANDOM = "random"


def classify(samples: SampleSet, rule: ComplianceRule) -> ComplianceVerdict:
    """Compliance verdict from the empirical fraction (inclusive >= comparison)."""
    frac = empirical_fraction_below(samples, rule.threshold_us)
    return ComplianceVerdict(
        path_id=samples.path_id,
        empirical_fraction=frac,
        compliant=frac >= rule.required_fraction,
    )


def ground_truth(model: PathDelayModel, rule: ComplianceRule) -> bool:
    """Whether the analytic delay distribution satisfies the rule."""
    return fraction_below(model, rule.threshold_us) >= rule.required_fraction


def select_best_path(
    sample_sets: Sequence[SampleSet],
    rule: ComplianceRule,
    tie_break: TieBreak = TieBreak.LOWEST_MEAN,
    rng: np.random.Generator | None = None,
) -> int:
    """Index of the sample set best supporting the threshold guarantee.

    The winner maximizes the empirical fraction at or below the threshold;
    exact ties are resolved by ``tie_break``. Remaining ties (identical
    tie-break keys) fall back to the lowest index.
    """
    if not sample_sets:
        raise ValueError("need at least one sample set")
    fractions = [empirical_fraction_below(s, rule.threshold_us) for s in sample_sets]
    top = max(fractions)
    tied = [i for i, f in enumerate(fractions) if f == top]
    if len(tied) == 1:
        return tied[0]
    if tie_break is TieBreak.FIRST:
        return tied[0]
    if tie_break is TieBreak.LOWEST_MEAN:
        return min(tied, key=lambda i: (sample_sets[i].mean_us, i))
    if tie_break is TieBreak.LOWEST_MAX:
        return min(tied, key=lambda i: (sample_sets[i].max_us, i))
    if tie_break is TieBreak.RANDOM:
        if rng is None:
            raise ValueError("TieBreak.RANDOM requires an rng")
        return tied[int(rng.integers(len(tied)))]
    raise ValueError(f"unknown tie break {tie_break!r}")


ERROR_CLASSES = ("TP", "TN", "FP", "FN")


@dataclass(frozen=True)
class PairRecord:
    pair_id: str
    truth: bool
    decision: bool
    error_class: str


@dataclass(frozen=True)
class ConfusionReport:
    """Per-pair truth/decision labels with FP/FN/TP/TN aggregates."""

    records: tuple[PairRecord, ...]
    fp_count: int
    fn_count: int
    tp_count: int
    tn_count: int

    @property
    def total(self) -> int:
        return len(self.records)


def _error_class(truth: bool, decision: bool) -> str:
    if decision and truth:
        return "TP"
    if decision and not truth:
        return "FP"
    if not decision and truth:
        return "FN"
    return "TN"


def confusion(
    verdicts: Sequence[ComplianceVerdict], truths: Sequence[bool]
) -> ConfusionReport:
    """Score decisions against truth. Positive class = declared compliant."""
    if len(verdicts) != len(truths):
        raise ValueError(
            f"got {len(verdicts)} verdicts but {len(truths)} truths"
        )
    records = []
    counts = {c: 0 for c in ERROR_CLASSES}
    for v, t in zip(verdicts, truths):
        klass = _error_class(bool(t), v.compliant)
        counts[klass] += 1
        records.append(PairRecord(v.path_id, bool(t), v.compliant, klass))
    return ConfusionReport(
        records=tuple(records),
        fp_count=counts["FP"],
        fn_count=counts["FN"],
        tp_count=counts["TP"],
        tn_count=counts["TN"],
    )


def confusion_to_csv(report: ConfusionReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["pair_id", "truth", "decision", "class"])
    for r in report.records:
        writer.writerow([r.pair_id, str(r.truth).lower(), str(r.decision).lower(), r.error_class])
    return buf.getvalue()


def confusion_summary_line(report: ConfusionReport) -> str:
    return (
        f"fp={report.fp_count} fn={report.fn_count} "
        f"tp={report.tp_count} tn={report.tn_count}"
    )
