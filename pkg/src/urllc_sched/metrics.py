"""Evaluation metrics: schedulability, SINR statistics, reliability, capacity."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

PERCENTILE_METHOD = "linear"
METRICS_COLUMNS = (
    "method", "n_links", "channels", "seed", "mean_sinr_db", "p25", "p75",
    "sched_ratio", "reliability", "capacity", "miss_count", "infer_time_s",
)


def schedulable_ratio(demand, capacity, deadline) -> float:
    """Fraction of links with ``demand / capacity <= deadline``."""
    x = np.asarray(demand, dtype=float)
    c = np.asarray(capacity, dtype=float)
    d = np.asarray(deadline, dtype=float)
    if not (x.shape == c.shape == d.shape):
        raise ValueError("demand, capacity and deadline must have equal length")
    if x.size == 0:
        raise ValueError("no links")
    if np.any(c <= 0):
        raise ValueError("link capacity must be positive")
    return float(np.count_nonzero(x / c <= d)) / x.size


def reliability(sinr_db, threshold_db: float) -> float:
    """Fraction of links at or above ``threshold_db``; NaN entries count as failures."""
    s = np.asarray(sinr_db, dtype=float)
    if s.size == 0:
        raise ValueError("empty SINR vector")
    with np.errstate(invalid="ignore"):
        ok = s >= threshold_db
    return float(np.count_nonzero(ok)) / s.size


def network_capacity(n_links: int, sched: float, rel: float) -> float:
    if not (0 <= sched <= 1 and 0 <= rel <= 1):
        raise ValueError("ratios must lie in [0, 1]")
    return n_links * sched * rel


def sinr_stats(sinr_db, linear_mean: bool = False) -> tuple[float, float, float]:
    """Mean and 25th/75th percentiles (linear interpolation) of SINR in dB.

    The mean is taken over dB values unless ``linear_mean`` is set, in which
    case linear ratios are averaged and converted back.
    """
    s = np.asarray(sinr_db, dtype=float)
    s = s[np.isfinite(s)]
    if s.size == 0:
        raise ValueError("empty SINR vector")
    if linear_mean:
        mean = 10 * math.log10(math.fsum(10 ** (s / 10)) / s.size)
    else:
        mean = math.fsum(s) / s.size
    p25, p75 = np.percentile(s, [25, 75], method=PERCENTILE_METHOD)
    return mean, float(p25), float(p75)


def format_range(mean: float, p25: float, p75: float) -> str:
    return f"{mean:.2f} [{p25:.2f}, {p75:.2f}]"


def sinr_gain(baseline_db: float, candidate_db: float) -> float:
    return candidate_db - baseline_db


def improvement_pct(baseline_db: float, candidate_db: float) -> float:
    return (candidate_db - baseline_db) / baseline_db * 100.0


@dataclass
class MetricsReport:
    method: str
    n_links: int
    channels: int
    seed: int
    mean_sinr_db: float
    p25: float
    p75: float
    sched_ratio: float
    reliability: float
    capacity: float
    miss_count: int
    infer_time_s: float

    def check(self) -> list[str]:
        """Names of violated report invariants (empty when consistent)."""
        bad = []
        if not 0 <= self.sched_ratio <= 1:
            bad.append("sched_ratio")
        if not 0 <= self.reliability <= 1:
            bad.append("reliability")
        no_samples = math.isnan(self.p25) and math.isnan(self.p75) and math.isnan(self.mean_sinr_db)
        if no_samples:
            if self.reliability != 0:
                bad.append("reliability without samples")
        elif not self.p25 <= self.p75:
            bad.append("percentile order")
        if self.capacity != self.n_links * self.sched_ratio * self.reliability:
            bad.append("capacity")
        if self.capacity > self.n_links:
            bad.append("capacity bound")
        if self.miss_count < 0:
            bad.append("miss_count")
        return bad

    def row(self) -> dict:
        return asdict(self)


def write_metrics_csv(path, reports, append: bool = True) -> None:
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0 or not append
    with path.open("a" if append else "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=METRICS_COLUMNS)
        if new:
            w.writeheader()
        for r in reports:
            w.writerow(r.row())


def read_metrics_csv(path) -> list[MetricsReport]:
    types = {f.name: f.type for f in fields(MetricsReport)}
    conv = {"str": str, "int": int, "float": float}
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            missing = set(METRICS_COLUMNS) - set(row)
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            out.append(MetricsReport(**{k: conv[types[k]](row[k]) for k in METRICS_COLUMNS}))
    return out


def report_from_trace(method, seed, channels, per_link_sinr_db, demand, capacity, deadline, threshold_db, miss_count, infer_time_s) -> MetricsReport:
    """Assemble a report from per-link evaluation results.

    ``capacity`` entries of 0 mark links that had demand but were never
    served (counted unschedulable); ``inf`` marks links that never had demand.
    """
    demand = np.asarray(demand, dtype=float)
    capacity = np.asarray(capacity, dtype=float)
    deadline = np.asarray(deadline, dtype=float)
    n = demand.size
    served = capacity > 0
    if served.any():
        ok = schedulable_ratio(demand[served], capacity[served], deadline[served]) * served.sum()
    else:
        ok = 0.0
    sched = float(round(ok)) / n
    rel = reliability(per_link_sinr_db, threshold_db)
    finite = np.asarray(per_link_sinr_db, dtype=float)
    if np.isfinite(finite).any():
        mean, p25, p75 = sinr_stats(finite)
    else:
        mean = p25 = p75 = float("nan")
    return MetricsReport(
        method=method,
        n_links=n,
        channels=channels,
        seed=seed,
        mean_sinr_db=mean,
        p25=p25,
        p75=p75,
        sched_ratio=sched,
        reliability=rel,
        capacity=network_capacity(n, sched, rel),
        miss_count=int(miss_count),
        infer_time_s=float(infer_time_s),
    )
