"""Cochran sample-size planning and empirical estimation from telemetry samples."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .delays import PathDelayModel
from .seeding import MASK64


def _check_domain(z: float, p_assumed: float) -> None:
    if not z > 0:
        raise ValueError(f"z must be > 0, got {z}")
    if not 0.0 < p_assumed < 1.0:
        raise ValueError(f"p_assumed must lie in (0, 1), got {p_assumed}")


def cochran_n(z: float, p_assumed: float, e: float) -> int:
    """Sample count needed for margin of error e: ceil(z^2 p (1-p) / e^2)."""
    _check_domain(z, p_assumed)
    if not 0.0 < e < 1.0:
        raise ValueError(f"e must lie in (0, 1), got {e}")
    return math.ceil(z * z * p_assumed * (1.0 - p_assumed) / (e * e))


def cochran_error(z: float, p_assumed: float, n0: int) -> float:
    """Margin of error delivered by n0 samples: z * sqrt(p (1-p) / n0)."""
    _check_domain(z, p_assumed)
    if n0 < 1:
        raise ValueError(f"n0 must be >= 1, got {n0}")
    return z * math.sqrt(p_assumed * (1.0 - p_assumed) / n0)


@dataclass(frozen=True)
class CochranPlan:
    """A sampling budget: confidence multiplier, assumed proportion, margin, count."""

    z: float
    p_assumed: float
    e: float
    n0: int

    @classmethod
    def from_margin(cls, e: float, z: float = 1.96, p_assumed: float = 0.5) -> "CochranPlan":
        return cls(z=z, p_assumed=p_assumed, e=e, n0=cochran_n(z, p_assumed, e))

    @classmethod
    def from_count(cls, n0: int, z: float = 1.96, p_assumed: float = 0.5) -> "CochranPlan":
        return cls(z=z, p_assumed=p_assumed, e=cochran_error(z, p_assumed, n0), n0=n0)


@dataclass(frozen=True)
class SampleSet:
    """Finite collection of end-to-end delay samples for one path."""

    path_id: str
    delays_us: tuple[float, ...]
    seed: int

    def __post_init__(self):
        if not self.delays_us:
            raise ValueError("a sample set must contain at least one delay")
        if any(d <= 0 for d in self.delays_us):
            raise ValueError("delays must be strictly positive")

    @property
    def n(self) -> int:
        return len(self.delays_us)

    @property
    def mean_us(self) -> float:
        return sum(self.delays_us) / len(self.delays_us)

    @property
    def max_us(self) -> float:
        return max(self.delays_us)


def collect_samples(
    model: PathDelayModel, n0: int, seed: int, path_id: str = "path"
) -> SampleSet:
    """Draw n0 independent delays from the stream keyed by ``seed``.

    Stream consumption is identical to n0 sequential ``sample_delay`` calls
    on ``default_rng(seed)``, so scalar and batched sampling agree bit for bit.
    """
    if n0 < 1:
        raise ValueError(f"n0 must be >= 1, got {n0}")
    rng = np.random.default_rng(seed & MASK64)
    means = np.asarray(model.stage_means_us)
    draws = rng.standard_exponential((n0, means.size))
    delays = model.propagation_us + draws @ means
    return SampleSet(path_id=path_id, delays_us=tuple(delays.tolist()), seed=seed)


def empirical_fraction_below(samples: SampleSet, threshold_us: float) -> float:
    """count(delay <= threshold) / n. The comparison is inclusive."""
    below = sum(1 for d in samples.delays_us if d <= threshold_us)
    return below / samples.n


# ---------------------------------------------------------------------------
# CSV round trip: '#'-prefixed metadata lines, then one delay per row.

def sample_set_to_csv(samples: SampleSet) -> str:
    buf = io.StringIO()
    buf.write(f"# path_id={samples.path_id}\n")
    buf.write(f"# seed={samples.seed}\n")
    writer = csv.writer(buf)
    writer.writerow(["delay_us"])
    for d in samples.delays_us:
        writer.writerow([repr(d)])
    return buf.getvalue()


def sample_set_from_csv(text: str) -> SampleSet:
    path_id = None
    seed = None
    rows = []
    for line in text.splitlines():
        if line.startswith("# path_id="):
            path_id = line.split("=", 1)[1]
        elif line.startswith("# seed="):
            seed = int(line.split("=", 1)[1])
        elif line and not line.startswith("#"):
            rows.append(line)
    if path_id is None or seed is None:
        raise ValueError("missing path_id/seed metadata in sample CSV")
    reader = csv.reader(io.StringIO("\n".join(rows)))
    header = next(reader)
    if header != ["delay_us"]:
        raise ValueError(f"unexpected sample CSV header {header}")
    delays = tuple(float(row[0]) for row in reader if row)
    return SampleSet(path_id=path_id, delays_us=delays, seed=seed)


def save_sample_set(samples: SampleSet, path: str | Path) -> None:
    Path(path).write_text(sample_set_to_csv(samples), encoding="utf-8")


def load_sample_set(path: str | Path) -> SampleSet:
    return sample_set_from_csv(Path(path).read_text(encoding="utf-8"))
