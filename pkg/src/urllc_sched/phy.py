"""Path loss, thermal noise, co-channel interference and SINR."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BOLTZMANN = 1.38e-23


@dataclass(frozen=True)
class PhyConstants:
    k: float = BOLTZMANN
    temperature: float = 290.0
    bandwidth: float = 2.0e7

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")


def to_db(x):
    return 10.0 * np.log10(x)


def from_db(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def received_power(d: float, alpha: float, p_tx: float) -> float:
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return p_tx / d**alpha


def noise_power(consts: PhyConstants) -> float:
    return consts.k * consts.temperature * consts.bandwidth


def _interferers(victim, graph, scope):
    if scope == "graph":
        return graph.neighbors(victim)
    if scope == "all":
        return [j for j in range(graph.n) if j != victim]
    raise ValueError(f"unknown interference scope {scope!r}")


def interference_power(victim, assignment, graph, links, rb, alpha=3.0, p_tx=1.0, scope="graph") -> float:
    """Co-channel interference at the receiver of ``victim`` on ``rb``.

    Sums ``p_tx / d^alpha`` over the conflict-graph neighbours of ``victim``
    that are active on the same RB, with ``d`` measured from the interferer's
    transmitter to the victim's receiver. ``scope="all"`` drops the graph mask
    and counts every co-channel transmitter.
    """
    rx = links[victim].rx_pos
    total = 0.0
    for j in _interferers(victim, graph, scope):
        if assignment.is_active(int(j), rb):
            total += received_power(math.dist(links[j].tx_pos, rx), alpha, p_tx)
    return total


@dataclass(frozen=True)
class SinrEntry:
    link: int
    rb: int
    signal: float
    interference: float
    noise: float

    @property
    def linear(self) -> float:
        return self.signal / (self.interference + self.noise)

    @property
    def db(self) -> float:
        return 10.0 * math.log10(self.linear)


def sinr(victim, rb, assignment, graph, links, consts=PhyConstants(), alpha=3.0, p_tx=1.0, scope="graph") -> SinrEntry:
    if not assignment.is_active(victim, rb):
        raise ValueError(f"link {victim} is not active on rb {rb}")
    signal = received_power(links[victim].length, alpha, p_tx)
    interf = interference_power(victim, assignment, graph, links, rb, alpha, p_tx, scope)
    return SinrEntry(victim, rb, signal, interf, noise_power(consts))


@dataclass
class SinrReport:
    """SINR of every active (link, RB) pair in a slot plus a per-link summary.

    ``linear``/``db``/``signal``/``interference`` are length-N arrays holding
    the per-link summary, NaN for links that did not transmit.
    """

    entries: list[SinrEntry]
    linear: np.ndarray
    db: np.ndarray
    signal: np.ndarray
    interference: np.ndarray
    noise: float

    def entry(self, link: int, rb: int) -> SinrEntry:
        for e in self.entries:
            if e.link == link and e.rb == rb:
                return e
        raise KeyError((link, rb))

    @property
    def active(self) -> np.ndarray:
        return np.flatnonzero(~np.isnan(self.linear))


def slot_sinr(assignment, graph, links, consts=PhyConstants(), alpha=3.0, p_tx=1.0, summary="min", scope="graph") -> SinrReport:
    """Per-RB SINR for every active link, reduced per link by ``summary`` (min or mean)."""
    if summary not in ("min", "mean"):
        raise ValueError("summary must be 'min' or 'mean'")
    n = assignment.n_links
    entries = []
    lin = np.full(n, np.nan)
    sig = np.full(n, np.nan)
    itf = np.full(n, np.nan)
    for i in range(n):
        rbs = assignment.rbs_of(i)
        if not rbs:
            continue
        es = [sinr(i, rb, assignment, graph, links, consts, alpha, p_tx, scope) for rb in rbs]
        entries.extend(es)
        vals = np.array([e.linear for e in es])
        if summary == "min":
            k = int(np.argmin(vals))
            lin[i], sig[i], itf[i] = vals[k], es[k].signal, es[k].interference
        else:
            lin[i] = vals.mean()
            sig[i] = es[0].signal
            itf[i] = float(np.mean([e.interference for e in es]))
    with np.errstate(invalid="ignore"):
        db = to_db(lin)
    return SinrReport(entries, lin, db, sig, itf, noise_power(consts))


def isolated_snr_db(links, consts=PhyConstants(), alpha=3.0, p_tx=1.0) -> np.ndarray:
    """Interference-free SNR of each link, in dB."""
    n0 = noise_power(consts)
    return np.array([to_db(received_power(l.length, alpha, p_tx) / n0) for l in links])
