"""Network topologies and the binary conflict graph.

Links are transmitter/receiver pairs dropped into a rectangular region that is
split into a grid of cells. Two links conflict when the interference one would
cause at the other's receiver rises above the thermal noise floor plus a
margin, using the same path-loss law as the SINR model.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .phy import BOLTZMANN, PhyConstants, noise_power, received_power

TOPOLOGY_VERSION = "v1"

# densest circle packing in the plane
_HEX_DENSITY = math.pi / (2 * math.sqrt(3))


@dataclass(frozen=True)
class NetworkConfig:
    region_w: float = 120.0
    region_h: float = 120.0
    n_links: int = 83
    n_nodes: int | None = None
    cell_grid: tuple[int, int] = (3, 3)
    n_channels: int = 7
    rb_capacity: int = 1
    path_loss_exp: float = 3.0
    tx_power: float = 1.0
    bandwidth: float = 2.0e7
    temperature: float = 290.0
    sinr_threshold_db: float = 15.0
    interference_margin_db: float = 10.0
    interference_scope: str = "graph"
    rng_seed: int = 0
    min_separation: float = 0.5
    max_link_distance: float | None = None
    # traffic generation
    demand_range: tuple[int, int] = (1, 2)
    periods: tuple[int, ...] = (10, 20, 40)
    deadline_frac: tuple[float, float] = (0.5, 1.0)

    def __post_init__(self):
        if not (self.region_w > 0 and self.region_h > 0):
            raise ValueError("region dimensions must be positive")
        if self.n_links < 1:
            raise ValueError(f"n_links must be >= 1, got {self.n_links}")
        if self.n_nodes is not None and self.n_nodes < 2 * self.n_links:
            raise ValueError("n_nodes must be at least 2 * n_links (one tx and one rx per link)")
        if self.n_channels < 1:
            raise ValueError("n_channels must be >= 1")
        if self.rb_capacity < 1:
            raise ValueError("rb_capacity must be >= 1")
        if self.path_loss_exp < 2:
            raise ValueError("path_loss_exp must be >= 2")
        if self.tx_power <= 0 or self.bandwidth <= 0 or self.temperature <= 0:
            raise ValueError("tx_power, bandwidth and temperature must be positive")
        if self.interference_scope not in ("graph", "all"):
            raise ValueError("interference_scope must be 'graph' or 'all'")
        rows, cols = self.cell_grid
        if rows < 1 or cols < 1:
            raise ValueError("cell_grid entries must be >= 1")
        lo, hi = self.demand_range
        if lo < 0 or hi < lo:
            raise ValueError("demand_range must satisfy 0 <= lo <= hi")
        if not self.periods or min(self.periods) < 1:
            raise ValueError("periods must be non-empty positive integers")
        flo, fhi = self.deadline_frac
        if not (0 < flo <= fhi <= 1):
            raise ValueError("deadline_frac must satisfy 0 < lo <= hi <= 1")

    @property
    def cell_size(self) -> tuple[float, float]:
        rows, cols = self.cell_grid
        return self.region_w / cols, self.region_h / rows

    @property
    def link_distance_cap(self) -> float:
        if self.max_link_distance is not None:
            return self.max_link_distance
        return math.hypot(*self.cell_size)

    @property
    def phy(self) -> PhyConstants:
        return PhyConstants(k=BOLTZMANN, temperature=self.temperature, bandwidth=self.bandwidth)

    def base_stations(self) -> np.ndarray:
        """Cell-centre anchor positions, row-major over the grid."""
        rows, cols = self.cell_grid
        cw, ch = self.cell_size
        return np.array(
            [((c + 0.5) * cw, (r + 0.5) * ch) for r in range(rows) for c in range(cols)]
        )

    def cell_of(self, pos) -> tuple[int, int]:
        rows, cols = self.cell_grid
        cw, ch = self.cell_size
        col = min(int(pos[0] // cw), cols - 1)
        row = min(int(pos[1] // ch), rows - 1)
        return row, col

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cell_grid"] = list(self.cell_grid)
        d["demand_range"] = list(self.demand_range)
        d["periods"] = list(self.periods)
        d["deadline_frac"] = list(self.deadline_frac)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> NetworkConfig:
        d = dict(d)
        for key in ("cell_grid", "demand_range", "deadline_frac", "periods"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def network1(**kw) -> NetworkConfig:
    """120 x 120 m, 3 x 3 cells, 83 links."""
    return NetworkConfig(**{"n_links": 83, **kw})


def network2(**kw) -> NetworkConfig:
    return NetworkConfig(**{"n_links": 163, **kw})


def network3(**kw) -> NetworkConfig:
    return NetworkConfig(
        **{"region_w": 240.0, "region_h": 240.0, "cell_grid": (6, 6), "n_links": 324, **kw}
    )


def desk_network(**kw) -> NetworkConfig:
    """Small 20-link, 3-channel instance used for quick training runs."""
    return NetworkConfig(**{"n_links": 20, "n_channels": 3, **kw})


@dataclass(frozen=True)
class LinkSpec:
    id: int
    tx_pos: tuple[float, float]
    rx_pos: tuple[float, float]
    demand: int
    period: int
    deadline: int
    arrival: int
    cell: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if not (0 < self.deadline <= self.period):
            raise ValueError(f"link {self.id}: need 0 < deadline <= period")
        if self.demand < 0:
            raise ValueError(f"link {self.id}: negative demand")
        if tuple(self.tx_pos) == tuple(self.rx_pos):
            raise ValueError(f"link {self.id}: tx and rx coincide")

    @property
    def length(self) -> float:
        return math.dist(self.tx_pos, self.rx_pos)

    @property
    def midpoint(self) -> tuple[float, float]:
        return (
            0.5 * (self.tx_pos[0] + self.rx_pos[0]),
            0.5 * (self.tx_pos[1] + self.rx_pos[1]),
        )


@dataclass
class ConflictGraph:
    adjacency: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=np.uint8)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if np.any(a > 1):
            raise ValueError("adjacency must be binary")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(a)):
            raise ValueError("adjacency must have a zero diagonal")
        a.setflags(write=False)
        self.adjacency = a
        self._nbrs = [np.flatnonzero(row) for row in a]

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self._nbrs[i]

    def conflicts(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i, j])

    def is_independent(self, nodes) -> bool:
        idx = np.fromiter(nodes, dtype=int)
        if idx.size < 2:
            return True
        return not self.adjacency[np.ix_(idx, idx)].any()

    def permuted(self, perm) -> ConflictGraph:
        """Graph with node ``perm[k]`` relabelled as ``k``."""
        perm = np.asarray(perm)
        return ConflictGraph(self.adjacency[np.ix_(perm, perm)])

    @classmethod
    def from_edges(cls, n: int, edges) -> ConflictGraph:
        a = np.zeros((n, n), dtype=np.uint8)
        for i, j in edges:
            a[i, j] = a[j, i] = 1
        return cls(a)


def _check_packable(config: NetworkConfig, n_points: int) -> None:
    # each point excludes a disc of radius sep/2 from its neighbours
    r = config.min_separation / 2
    needed = n_points * math.pi * r * r
    if needed > _HEX_DENSITY * config.region_w * config.region_h:
        raise ValueError(
            f"region {config.region_w}x{config.region_h} m too small for {n_points} nodes "
            f"at {config.min_separation} m separation"
        )


def _far_enough(p, placed: list, sep: float) -> bool:
    for q in placed:
        if (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 < sep * sep:
            return False
    return True


def generate_topology(config: NetworkConfig, seed: int | None = None, max_tries: int = 10_000) -> list[LinkSpec]:
    """Drop ``config.n_links`` links uniformly over the region.

    Each transmitter lands uniformly inside a cell chosen uniformly at random;
    its receiver lands uniformly in the disc of radius
    ``config.link_distance_cap`` around it, clipped to the region. All nodes
    keep ``config.min_separation`` from each other. Traffic parameters
    (demand, period, deadline, first arrival) are drawn from the config
    ranges. Output is a pure function of ``(config, seed)``.
    """
    if seed is None:
        seed = config.rng_seed
    _check_packable(config, 2 * config.n_links)
    rng = np.random.default_rng(seed)
    rows, cols = config.cell_grid
    cw, ch = config.cell_size
    cap = config.link_distance_cap
    sep = config.min_separation
    lo_len = max(sep, 1e-9)
    if cap < lo_len:
        raise ValueError("max_link_distance is below the minimum node separation")

    placed: list[tuple[float, float]] = []
    links = []
    for i in range(config.n_links):
        for _ in range(max_tries):
            r, c = int(rng.integers(rows)), int(rng.integers(cols))
            tx = (float((c + rng.random()) * cw), float((r + rng.random()) * ch))
            if _far_enough(tx, placed, sep):
                break
        else:
            raise ValueError("could not place transmitter; region too crowded")
        for _ in range(max_tries):
            # uniform over the annulus lo_len <= d <= cap
            d = math.sqrt(lo_len**2 + rng.random() * (cap**2 - lo_len**2))
            theta = rng.random() * 2 * math.pi
            rx = (tx[0] + d * math.cos(theta), tx[1] + d * math.sin(theta))
            if not (0 <= rx[0] <= config.region_w and 0 <= rx[1] <= config.region_h):
                continue
            if _far_enough(rx, placed, sep) and math.dist(tx, rx) >= sep:
                break
        else:
            raise ValueError("could not place receiver; region too crowded")
        placed.extend([tx, rx])

        period = int(rng.choice(config.periods))
        flo, fhi = config.deadline_frac
        deadline = int(np.clip(round(period * rng.uniform(flo, fhi)), 1, period))
        demand = int(rng.integers(config.demand_range[0], config.demand_range[1] + 1))
        arrival = int(rng.integers(period))
        links.append(
            LinkSpec(
                id=i,
                tx_pos=tx,
                rx_pos=(float(rx[0]), float(rx[1])),
                demand=demand,
                period=period,
                deadline=deadline,
                arrival=arrival,
                cell=(r, c),
            )
        )
    return links


def cross_gain_matrix(links: list[LinkSpec], alpha: float, p_tx: float) -> np.ndarray:
    """``G[i, j]`` = power from tx(j) received at rx(i); the diagonal is the own signal."""
    tx = np.array([l.tx_pos for l in links], dtype=float)
    rx = np.array([l.rx_pos for l in links], dtype=float)
    d = np.linalg.norm(rx[:, None, :] - tx[None, :, :], axis=-1)
    if np.any(d <= 0):
        raise ValueError("zero distance between a transmitter and a receiver")
    return p_tx / d**alpha


def build_conflict_graph(links: list[LinkSpec], config: NetworkConfig) -> ConflictGraph:
    """Edge (i, j) iff either link's transmitter lands above noise * margin at the other's receiver."""
    if not links:
        raise ValueError("need at least one link")
    g = cross_gain_matrix(links, config.path_loss_exp, config.tx_power)
    threshold = noise_power(config.phy) * 10 ** (config.interference_margin_db / 10)
    hot = g > threshold
    adj = (hot | hot.T).astype(np.uint8)
    np.fill_diagonal(adj, 0)
    return ConflictGraph(adj)


def pair_interference(link_i: LinkSpec, link_j: LinkSpec, config: NetworkConfig) -> float:
    """Scalar interference power from tx(j) at rx(i)."""
    return received_power(math.dist(link_j.tx_pos, link_i.rx_pos), config.path_loss_exp, config.tx_power)


# --- topology file -----------------------------------------------------------


def topology_to_dict(config: NetworkConfig, links: list[LinkSpec], graph: ConflictGraph) -> dict:
    return {
        "version": TOPOLOGY_VERSION,
        "config": config.to_dict(),
        "links": [
            {
                "id": l.id,
                "tx": list(l.tx_pos),
                "rx": list(l.rx_pos),
                "demand": l.demand,
                "period": l.period,
                "deadline": l.deadline,
                "arrival": l.arrival,
                "cell": list(l.cell),
            }
            for l in links
        ],
        "adjacency": graph.adjacency.reshape(-1).tolist(),
    }


def topology_from_dict(doc: dict) -> tuple[NetworkConfig, list[LinkSpec], ConflictGraph]:
    if doc.get("version") != TOPOLOGY_VERSION:
        raise ValueError(f"unsupported topology version {doc.get('version')!r}")
    config = NetworkConfig.from_dict(doc["config"])
    links = [
        LinkSpec(
            id=int(l["id"]),
            tx_pos=tuple(l["tx"]),
            rx_pos=tuple(l["rx"]),
            demand=int(l["demand"]),
            period=int(l["period"]),
            deadline=int(l["deadline"]),
            arrival=int(l["arrival"]),
            cell=tuple(l.get("cell", (0, 0))),
        )
        for l in doc["links"]
    ]
    n = len(links)
    flat = np.asarray(doc["adjacency"], dtype=np.uint8)
    if flat.size != n * n:
        raise ValueError(f"adjacency has {flat.size} entries, expected {n * n}")
    return config, links, ConflictGraph(flat.reshape(n, n))


def save_topology(path, config, links, graph) -> str:
    """Write the topology JSON; returns its sha256."""
    text = json.dumps(topology_to_dict(config, links, graph), sort_keys=True)
    Path(path).write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def load_topology(path) -> tuple[NetworkConfig, list[LinkSpec], ConflictGraph]:
    return topology_from_dict(json.loads(Path(path).read_text()))
