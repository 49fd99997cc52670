"""Stochastic path-delay models: constant propagation plus exponential stages.

A path is modeled as a constant fiber-propagation offset (5 us per km by
default) plus one independent exponential sojourn per traversed link, with
mean ``mean_service_time / (1 - load)``. The total delay therefore follows
a shifted hypoexponential distribution.

CDF evaluation
--------------
Exactly-equal stage means are grouped into Erlang blocks, and near-equal
means (relative gap below ``MERGE_RELATIVE_GAP``) are merged into one block
to keep the evaluation well conditioned. A single block is evaluated with
the Erlang closed form (regularized lower incomplete gamma). Multiple
blocks are evaluated as a phase-type survival through a matrix exponential
of the bidiagonal generator, which stays stable where the classical
distinct-rate partial-fraction formula loses all precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc

from .topology import PathSpec, Topology

PROPAGATION_US_PER_KM = 5.0

# Stage means closer than this (relatively) are one Erlang block.
MERGE_RELATIVE_GAP = 1e-6


class CalibrationError(Exception):
    """No equal-stage model within the hop budget meets the target fraction."""


@dataclass(frozen=True)
class PathDelayModel:
    """Constant offset plus independent exponential stages, all in microseconds."""

    propagation_us: float
    stage_means_us: tuple[float, ...]

    def __post_init__(self):
        if not self.stage_means_us:
            raise ValueError("a path model needs at least one exponential stage")
        if not (math.isfinite(self.propagation_us) and self.propagation_us >= 0):
            raise ValueError(f"propagation_us must be finite and >= 0, got {self.propagation_us}")
        for m in self.stage_means_us:
            if not (math.isfinite(m) and m > 0):
                raise ValueError(f"stage means must be finite and > 0, got {m}")
        object.__setattr__(self, "stage_means_us", tuple(float(m) for m in self.stage_means_us))

    @property
    def total_stage_mean_us(self) -> float:
        return sum(self.stage_means_us)

    @property
    def mean_us(self) -> float:
        """Expected end-to-end delay."""
        return self.propagation_us + self.total_stage_mean_us


def build_path_model(
    topo: Topology, path: PathSpec, us_per_km: float = PROPAGATION_US_PER_KM
) -> PathDelayModel:
    """Derive the delay model of a routed path from link lengths and loads."""
    lengths = []
    means = []
    for lid in path.link_ids:
        link = topo.link_by_id.get(lid)
        if link is None:
            raise ValueError(f"unknown link id '{lid}'")
        lengths.append(link.length_km)
        means.append(link.mean_service_time_us / (1.0 - link.load))
    return PathDelayModel(us_per_km * sum(lengths), tuple(means))


def sample_delay(model: PathDelayModel, rng: np.random.Generator) -> float:
    """Draw one end-to-end delay; always strictly above the propagation offset."""
    draws = rng.standard_exponential(len(model.stage_means_us))
    return model.propagation_us + float(draws @ np.asarray(model.stage_means_us))


def _erlang_blocks(stage_means: tuple[float, ...]) -> list[tuple[float, int]]:
    """Group stage means into (mean, count) Erlang blocks, merging near-equal means."""
    blocks: list[tuple[float, int]] = []
    for m in sorted(stage_means):
        if blocks:
            mean, count = blocks[-1]
            if m - mean <= MERGE_RELATIVE_GAP * mean:
                # running average keeps the block's total mean equal to the sum of members
                blocks[-1] = ((mean * count + m) / (count + 1), count + 1)
                continue
        blocks.append((m, 1))
    return blocks


def _phase_type_cdf(blocks: list[tuple[float, int]], x: float) -> float:
    # Survival = e_1' exp(T x) 1 for the bidiagonal chain generator.
    rates = [1.0 / mean for mean, count in blocks for _ in range(count)]
    n = len(rates)
    gen = np.zeros((n, n))
    for i, r in enumerate(rates):
        gen[i, i] = -r
        if i + 1 < n:
            gen[i, i + 1] = r
    survival = float(expm(gen * x)[0, :].sum())
    return min(1.0, max(0.0, 1.0 - survival))


def cdf(model: PathDelayModel, t_us: float) -> float:
    """P(total delay <= t_us), exact up to floating point."""
    if math.isnan(t_us):
        raise ValueError("t_us must not be NaN")
    x = t_us - model.propagation_us
    if x <= 0:
        return 0.0
    blocks = _erlang_blocks(model.stage_means_us)
    if len(blocks) == 1:
        mean, count = blocks[0]
        return float(gammainc(count, x / mean))
    return _phase_type_cdf(blocks, x)


def fraction_below(model: PathDelayModel, threshold_us: float) -> float:
    """Analytic fraction of packets at or below a delay threshold.

    Alias of ``cdf`` at the threshold; this is the decision layer's ground truth.
    """
    return cdf(model, threshold_us)


def quantile(model: PathDelayModel, p: float, tol: float = 1e-9) -> float:
    """Smallest t with |cdf(t) - p| <= tol, by bracketed bisection."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    lo = model.propagation_us
    span = model.total_stage_mean_us
    k = 1.0
    hi = lo + k * span
    while cdf(model, hi) < p:
        k *= 2.0
        hi = lo + k * span
        if k > 2**60:  # unreachable for valid models; guards an infinite loop
            raise RuntimeError("failed to bracket the quantile")
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        val = cdf(model, mid)
        if abs(val - p) <= tol:
            return mid
        if val < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class CalibrationResult:
    model: PathDelayModel
    hops: int
    achieved_fraction: float


def calibrate_path(
    offset_us: float,
    total_queue_mean_us: float,
    threshold_us: float,
    target_fraction: float,
    max_hops: int = 8,
    tolerance: float = 0.01,
) -> CalibrationResult:
    """Fit an equal-stage model to a published (mean, tail-fraction) aggregate.

    Sweeps hop counts k = 1..max_hops with k equal stages summing to
    ``total_queue_mean_us`` and returns the k whose cdf at the threshold is
    closest to ``target_fraction``. Raises CalibrationError when even the
    best k misses the target by more than ``tolerance``.
    """
    if threshold_us <= offset_us:
        raise ValueError("threshold_us must exceed offset_us")
    if not 0.0 < target_fraction < 1.0:
        raise ValueError(f"target_fraction must lie in (0, 1), got {target_fraction}")
    if total_queue_mean_us <= 0:
        raise ValueError("total_queue_mean_us must be > 0")
    if max_hops < 1:
        raise ValueError("max_hops must be >= 1")
    best: CalibrationResult | None = None
    for k in range(1, max_hops + 1):
        model = PathDelayModel(offset_us, (total_queue_mean_us / k,) * k)
        achieved = cdf(model, threshold_us)
        if best is None or abs(achieved - target_fraction) < abs(
            best.achieved_fraction - target_fraction
        ):
            best = CalibrationResult(model, k, achieved)
    assert best is not None
    if abs(best.achieved_fraction - target_fraction) > tolerance:
        raise CalibrationError(
            f"best equal-stage fit (k={best.hops}) reaches {best.achieved_fraction:.6f}, "
            f"more than {tolerance} away from target {target_fraction}"
        )
    return best
