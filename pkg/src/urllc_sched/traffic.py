"""Periodic per-packet real-time traffic and per-slot feature snapshots."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

N_BASE_FEATURES = 7
BASE_FEATURE_NAMES = ("work_density", "snr", "demand", "deadline", "period", "x", "y")
DATASET_VERSION = "v1"


@dataclass(frozen=True)
class TrafficState:
    """Job state of every link at the start of ``slot``.

    Arrays are indexed by link id. ``miss_flags`` marks links whose job
    expired unserved during the previous slot; the ``*_total`` arrays are
    running counters since slot 0.
    """

    slot: int
    remaining: np.ndarray
    deadline_left: np.ndarray
    active: np.ndarray
    miss_flags: np.ndarray
    misses: np.ndarray
    released_total: np.ndarray
    served_total: np.ndarray
    busy_slots: np.ndarray
    jobs: np.ndarray

    @property
    def n(self) -> int:
        return self.remaining.shape[0]

    @property
    def demanding(self) -> np.ndarray:
        return self.active & (self.remaining > 0)


def _releases(links, slot: int) -> np.ndarray:
    return np.array(
        [slot >= l.arrival and (slot - l.arrival) % l.period == 0 for l in links], dtype=bool
    )


def initial_state(links) -> TrafficState:
    n = len(links)
    z = np.zeros(n, dtype=np.int64)
    state = TrafficState(
        slot=0,
        remaining=z.copy(),
        deadline_left=z.copy(),
        active=np.zeros(n, dtype=bool),
        miss_flags=np.zeros(n, dtype=bool),
        misses=z.copy(),
        released_total=z.copy(),
        served_total=z.copy(),
        busy_slots=z.copy(),
        jobs=z.copy(),
    )
    return _release(state, links)


def _release(state: TrafficState, links) -> TrafficState:
    rel = _releases(links, state.slot)
    if not rel.any():
        return state
    demand = np.array([l.demand for l in links], dtype=np.int64)
    deadline = np.array([l.deadline for l in links], dtype=np.int64)
    remaining = np.where(rel, demand, state.remaining)
    return replace(
        state,
        remaining=remaining,
        deadline_left=np.where(rel, deadline, state.deadline_left),
        active=np.where(rel, demand > 0, state.active),
        released_total=state.released_total + np.where(rel, demand, 0),
        jobs=state.jobs + rel,
    )


def advance_slot(state: TrafficState, links, served) -> TrafficState:
    """Apply one slot of service and move to the next slot.

    ``served`` maps link id to demand units delivered this slot (a dict or a
    length-N array). Jobs still holding demand when their deadline reaches 0
    are flagged as misses and dropped. New jobs are released at
    ``arrival + k * period``.
    """
    n = state.n
    if isinstance(served, dict):
        s = np.zeros(n, dtype=np.int64)
        for i, v in served.items():
            s[int(i)] = v
    else:
        s = np.asarray(served, dtype=np.int64)
        if s.shape != (n,):
            raise ValueError(f"served has shape {s.shape}, expected ({n},)")
    if np.any(s < 0):
        raise ValueError("served amounts must be non-negative")
    idle_served = (s > 0) & ~state.active
    if idle_served.any():
        raise ValueError(f"links {np.flatnonzero(idle_served).tolist()} served without an active job")
    over = s > state.remaining
    if over.any():
        raise ValueError(f"links {np.flatnonzero(over).tolist()} served beyond remaining demand")

    remaining = state.remaining - s
    active = state.active.copy()
    deadline_left = np.where(active, state.deadline_left - 1, state.deadline_left)
    done = active & (remaining == 0)
    miss = active & (remaining > 0) & (deadline_left <= 0)
    active &= ~(done | miss)
    remaining = np.where(miss, 0, remaining)
    deadline_left = np.where(active, deadline_left, 0)

    nxt = replace(
        state,
        slot=state.slot + 1,
        remaining=remaining,
        deadline_left=deadline_left,
        active=active,
        miss_flags=miss,
        misses=state.misses + miss,
        served_total=state.served_total + s,
        busy_slots=state.busy_slots + state.demanding,
    )
    return _release(nxt, links)


def replay_misses(links, served_log) -> np.ndarray:
    """Rebuild the (slots, N) miss-flag matrix from a log of served amounts."""
    state = initial_state(links)
    flags = []
    for served in served_log:
        state = advance_slot(state, links, served)
        flags.append(state.miss_flags)
    return np.array(flags, dtype=bool).reshape(len(flags), len(links))


def hyperperiod(links) -> int:
    return int(np.lcm.reduce([l.period for l in links]))


def channel_quality(n_links: int, n_channels: int, seed: int) -> np.ndarray:
    """Per-(link, channel) gain in [0.5, 1.0], fixed for a topology."""
    rng = np.random.default_rng([seed, 0xC4A])
    return rng.uniform(0.5, 1.0, size=(n_links, n_channels))


def work_density(remaining, deadline_left) -> np.ndarray:
    """Remaining demand per remaining slot; 0 for idle links, inf for expired ones."""
    x = np.asarray(remaining, dtype=float)
    d = np.asarray(deadline_left, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        wd = np.where(x > 0, x / d, 0.0)
    return wd


def minmax_columns(raw: np.ndarray) -> np.ndarray:
    lo = raw.min(axis=0)
    span = raw.max(axis=0) - lo
    out = np.zeros_like(raw, dtype=float)
    ok = span > 0
    out[:, ok] = (raw[:, ok] - lo[ok]) / span[ok]
    return out


def raw_features(state: TrafficState, links, snr_db, quality) -> np.ndarray:
    wd = work_density(state.remaining, state.deadline_left)
    finite = wd[np.isfinite(wd)]
    wd = np.where(np.isfinite(wd), wd, finite.max() if finite.size else 0.0)
    mid = np.array([l.midpoint for l in links], dtype=float)
    cols = [
        wd,
        np.asarray(snr_db, dtype=float),
        state.remaining.astype(float),
        state.deadline_left.astype(float),
        np.array([l.period for l in links], dtype=float),
        mid[:, 0],
        mid[:, 1],
    ]
    return np.column_stack(cols + [np.asarray(quality, dtype=float)])


def build_features(state: TrafficState, links, snr_db, quality) -> np.ndarray:
    """(N, 7 + C) feature matrix, every column min-max scaled to [0, 1].

    Column order: work density, SNR (dB), remaining demand, remaining
    deadline, period, x, y, then one quality entry per channel. A constant
    column maps to 0.
    """
    return minmax_columns(raw_features(state, links, snr_db, quality))


@dataclass
class SnapshotRecord:
    slot: int
    features: np.ndarray
    miss_flags: np.ndarray
    graph: object = None

    def to_json(self) -> dict:
        return {
            "slot": self.slot,
            "features": self.features.tolist(),
            "miss_flags": [bool(b) for b in self.miss_flags],
        }


def generate_dataset(config, n_snapshots: int, seed: int | None = None, links=None, graph=None) -> list[SnapshotRecord]:
    """Record ``n_snapshots`` consecutive slots simulated under the EDF-surrogate baseline."""
    from .sim import Environment  # sim depends on the scheduler module

    if n_snapshots < 1:
        raise ValueError("n_snapshots must be >= 1")
    env = Environment.build(config, seed=seed, links=links, graph=graph)
    state = env.reset()
    records = []
    miss = np.zeros(env.n, dtype=bool)
    for _ in range(n_snapshots):
        feats = env.features(state)
        assignment = env.baseline_assignment(state)
        state, _ = env.step(state, assignment)
        miss = state.miss_flags
        records.append(SnapshotRecord(state.slot - 1, feats, miss.copy(), env.graph))
    return records


def save_dataset(path, records, topology_path=None, topology_sha256=None) -> str:
    """Write JSON-lines (header + one record per line); returns the file's sha256."""
    n = records[0].features.shape[0] if records else 0
    width = records[0].features.shape[1] if records else 0
    header = {
        "type": "header",
        "version": DATASET_VERSION,
        "topology": {"path": None if topology_path is None else str(topology_path), "sha256": topology_sha256},
        "n_links": n,
        "n_features": width,
        "n_records": len(records),
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps(r.to_json()) for r in records]
    text = "\n".join(lines) + "\n"
    Path(path).write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def load_dataset(path) -> tuple[dict, list[SnapshotRecord]]:
    lines = Path(path).read_text().splitlines()
    header = json.loads(lines[0])
    if header.get("type") != "header" or header.get("version") != DATASET_VERSION:
        raise ValueError(f"{path}: missing or unsupported dataset header")
    records = []
    for line in lines[1:]:
        d = json.loads(line)
        records.append(
            SnapshotRecord(d["slot"], np.array(d["features"], dtype=float), np.array(d["miss_flags"], dtype=bool))
        )
    return header, records
