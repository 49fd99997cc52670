"""Seeded Monte Carlo experiments: path selection, compliance heatmaps, error tables.

Every random draw is keyed by ``mix_seed(master, tag, n0, index, trial)``,
so results are bit-identical for a given config regardless of worker count.
Workers only ever receive immutable inputs and return partial results that
are combined in index order.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .decision import (
    ComplianceRule,
    ComplianceVerdict,
    ConfusionReport,
    TieBreak,
    classify,
    confusion,
    ground_truth,
    select_best_path,
)
from .delays import PathDelayModel, build_path_model, fraction_below
from .sampling import cochran_error, collect_samples
from .seeding import mix_seed, rng_for
from .topology import Topology, all_pairs, route

SELECTION_TAG = "selection"
HEATMAP_TAG = "heatmap"


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int
    trials: int = 10000
    sample_sizes: tuple[int, ...] = (5, 10, 50, 100, 400)
    rule: ComplianceRule = field(default_factory=ComplianceRule)
    tie_break: TieBreak = TieBreak.RANDOM
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        sizes = tuple(int(s) for s in self.sample_sizes)
        if not sizes:
            raise ValueError("sample_sizes must be nonempty")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"sample_sizes must be strictly increasing, got {sizes}")
        if any(s < 1 for s in sizes):
            raise ValueError(f"sample_sizes must be positive, got {sizes}")
        object.__setattr__(self, "sample_sizes", sizes)


def config_echo(config: ExperimentConfig) -> dict:
    echo = asdict(config)
    echo["tie_break"] = config.tie_break.value
    echo["sample_sizes"] = list(config.sample_sizes)
    return echo


# ---------------------------------------------------------------------------
# Path-selection experiment

@dataclass(frozen=True)
class SelectionResult:
    """Selection wins and frequencies per sample size; frequencies sum to 1."""

    path_ids: tuple[str, ...]
    sample_sizes: tuple[int, ...]
    trials: int
    wins: dict[int, tuple[int, ...]]

    @property
    def frequencies(self) -> dict[int, tuple[float, ...]]:
        return {
            n0: tuple(w / self.trials for w in per_path)
            for n0, per_path in self.wins.items()
        }


def _selection_chunk(payload) -> np.ndarray:
    models, rule, tie_break, master_seed, n0, start, stop = payload
    wins = np.zeros(len(models), dtype=np.int64)
    for trial in range(start, stop):
        sets = [
            collect_samples(
                model, n0, mix_seed(master_seed, SELECTION_TAG, n0, i, trial), path_id=str(i)
            )
            for i, model in enumerate(models)
        ]
        tie_rng = rng_for(master_seed, SELECTION_TAG + "-tie", n0, trial)
        wins[select_best_path(sets, rule, tie_break, rng=tie_rng)] += 1
    return wins


def _chunk_ranges(total: int, chunks: int) -> list[tuple[int, int]]:
    size = max(1, -(-total // chunks))
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def run_selection(
    models: Sequence[PathDelayModel],
    config: ExperimentConfig,
    path_ids: Sequence[str] | None = None,
) -> SelectionResult:
    """Repeated best-path selection from fresh telemetry samples.

    For each sample size, runs ``config.trials`` independent trials; each
    trial draws one sample set per candidate path and applies
    ``select_best_path`` under the configured rule and tie break.
    """
    if len(models) < 2:
        raise ValueError("selection needs at least two candidate paths")
    if path_ids is None:
        path_ids = tuple(f"path{i + 1}" for i in range(len(models)))
    if len(path_ids) != len(models):
        raise ValueError("path_ids must match models")

    wins: dict[int, tuple[int, ...]] = {}
    for n0 in config.sample_sizes:
        payloads = [
            (list(models), config.rule, config.tie_break, config.master_seed, n0, lo, hi)
            for lo, hi in _chunk_ranges(config.trials, config.workers * 4)
        ]
        if config.workers == 1:
            partials = [_selection_chunk(p) for p in payloads]
        else:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                partials = list(pool.map(_selection_chunk, payloads))
        total = np.sum(partials, axis=0)
        wins[n0] = tuple(int(w) for w in total)
    return SelectionResult(
        path_ids=tuple(path_ids),
        sample_sizes=config.sample_sizes,
        trials=config.trials,
        wins=wins,
    )


def selection_to_csv(result: SelectionResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["n0", "path_id", "wins", "frequency"])
    for n0 in result.sample_sizes:
        for pid, w, f in zip(result.path_ids, result.wins[n0], result.frequencies[n0]):
            writer.writerow([n0, pid, w, repr(f)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Compliance-heatmap experiment

@dataclass(frozen=True)
class PairOutcome:
    source: str
    destination: str
    true_fraction: float
    empirical_fraction: float
    truth: bool
    decision: bool
    error_class: str


@dataclass(frozen=True)
class HeatmapResult:
    """Per-pair compliance decisions for one sample size, on the ACO x MACO grid."""

    sample_size: int
    aco_ids: tuple[str, ...]
    maco_ids: tuple[str, ...]
    outcomes: tuple[PairOutcome, ...]  # ordered as all_pairs: ACO-major
    report: ConfusionReport

    def _matrix(self, attr: str) -> np.ndarray:
        values = [getattr(o, attr) for o in self.outcomes]
        return np.array(values).reshape(len(self.aco_ids), len(self.maco_ids))

    @property
    def truth_matrix(self) -> np.ndarray:
        return self._matrix("truth")

    @property
    def decision_matrix(self) -> np.ndarray:
        return self._matrix("decision")

    @property
    def class_matrix(self) -> np.ndarray:
        return self._matrix("error_class")


def _heatmap_chunk(payload) -> list[list[tuple[float, bool]]]:
    models, rule, master_seed, sizes, first_index = payload
    out: list[list[tuple[float, bool]]] = []
    for offset, model in enumerate(models):
        pair_index = first_index + offset
        per_size = []
        for n0 in sizes:
            seed = mix_seed(master_seed, HEATMAP_TAG, n0, pair_index)
            verdict = classify(collect_samples(model, n0, seed), rule)
            per_size.append((verdict.empirical_fraction, verdict.compliant))
        out.append(per_size)
    return out


def run_heatmap(
    topo: Topology, config: ExperimentConfig, us_per_km: float = 5.0
) -> dict[int, HeatmapResult]:
    """Classify every (ACO, MACO) pair from one sample set per sample size.

    Truth comes from the analytic fraction of the routed pair's delay model
    and is therefore identical across sample sizes.
    """
    pairs = all_pairs(topo)
    if not pairs:
        raise ValueError("topology has no (ACO, MACO) pairs")
    acos = tuple(sorted({a for a, _ in pairs}))
    macos = tuple(sorted({m for _, m in pairs}))

    models = []
    true_fracs = []
    for a, m in pairs:
        model = build_path_model(topo, route(topo, a, m), us_per_km=us_per_km)
        models.append(model)
        true_fracs.append(fraction_below(model, config.rule.threshold_us))
    truths = [f >= config.rule.required_fraction for f in true_fracs]

    ranges = _chunk_ranges(len(pairs), config.workers * 4)
    payloads = [
        (models[lo:hi], config.rule, config.master_seed, config.sample_sizes, lo)
        for lo, hi in ranges
    ]
    if config.workers == 1:
        chunks = [_heatmap_chunk(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_heatmap_chunk, payloads))
    per_pair = [row for chunk in chunks for row in chunk]

    results: dict[int, HeatmapResult] = {}
    for si, n0 in enumerate(config.sample_sizes):
        outcomes = []
        verdicts = []
        for (a, m), true_frac, truth, per_size in zip(pairs, true_fracs, truths, per_pair):
            emp_frac, decision = per_size[si]
            pair_id = f"{a}->{m}"
            verdicts.append(ComplianceVerdict(pair_id, emp_frac, decision))
            outcomes.append(
                PairOutcome(
                    source=a,
                    destination=m,
                    true_fraction=true_frac,
                    empirical_fraction=emp_frac,
                    truth=truth,
                    decision=decision,
                    error_class="",
                )
            )
        report = confusion(verdicts, truths)
        outcomes = [
            PairOutcome(
                o.source, o.destination, o.true_fraction, o.empirical_fraction,
                o.truth, o.decision, rec.error_class,
            )
            for o, rec in zip(outcomes, report.records)
        ]
        results[n0] = HeatmapResult(
            sample_size=n0,
            aco_ids=acos,
            maco_ids=macos,
            outcomes=tuple(outcomes),
            report=report,
        )
    return results


def heatmap_to_csv(result: HeatmapResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["source", "destination", "true_fraction", "empirical_fraction",
         "truth", "decision", "class"]
    )
    for o in result.outcomes:
        writer.writerow(
            [o.source, o.destination, repr(o.true_fraction), repr(o.empirical_fraction),
             str(o.truth).lower(), str(o.decision).lower(), o.error_class]
        )
    return buf.getvalue()


def heatmap_summary_csv(results: dict[int, HeatmapResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["n0", "fp", "fn", "tp", "tn"])
    for n0 in sorted(results):
        r = results[n0].report
        writer.writerow([n0, r.fp_count, r.fn_count, r.tp_count, r.tn_count])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Cochran error table

def run_error_table(
    z: float, p_assumed: float, sample_sizes: Sequence[int]
) -> list[tuple[int, float]]:
    """Margin of error per sample count."""
    return [(int(n0), cochran_error(z, p_assumed, int(n0))) for n0 in sample_sizes]


def error_table_to_csv(rows: Sequence[tuple[int, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["n0", "e"])
    for n0, e in rows:
        writer.writerow([n0, repr(e)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Machine-readable run summaries

def write_summary(
    path: str | Path, experiment: str, config: ExperimentConfig, aggregates: dict
) -> None:
    doc = {
        "experiment": experiment,
        "config": config_echo(config),
        "aggregates": aggregates,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
