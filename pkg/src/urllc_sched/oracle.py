"""Brute-force references for tests and acceptance runs.

Nothing here calls into the code paths it is meant to check: SINR is
recomputed from coordinates pair by pair, the GCN forward pass is rebuilt
from a dense normalised adjacency, and MWIS is solved by enumeration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .assignment import SlotAssignment

MAX_MWIS_NODES = 24
MAX_SLOT_STATES = 10**7


@dataclass(frozen=True)
class OracleResult:
    best_set: tuple[int, ...]
    best_value: float
    count: int


def brute_force_mwis(adjacency, weights) -> OracleResult:
    """Exact maximum-weight independent set by enumerating every independent set.

    Ties go to the lexicographically smallest sorted index tuple. ``count``
    is the number of independent sets visited (including the empty set).
    """
    a = np.asarray(getattr(adjacency, "adjacency", adjacency))
    n = a.shape[0]
    if n > MAX_MWIS_NODES:
        raise ValueError(f"brute force limited to {MAX_MWIS_NODES} nodes, got {n}")
    w = [float(x) for x in weights]
    nbr_mask = [sum(1 << j for j in range(n) if a[i, j]) for i in range(n)]
    best = [(), 0.0]
    count = 0

    def visit(start, chosen, banned):
        nonlocal count
        count += 1
        value = math.fsum(w[i] for i in chosen)
        key = tuple(chosen)
        if value > best[1] or (value == best[1] and key < best[0]):
            best[0], best[1] = key, value
        for i in range(start, n):
            if not banned >> i & 1:
                chosen.append(i)
                visit(i + 1, chosen, banned | nbr_mask[i])
                chosen.pop()

    visit(0, [], 0)
    return OracleResult(best[0], best[1], count)


def dense_sinr(links, rb_lists, adjacency, alpha=3.0, p_tx=1.0, k=1.38e-23, temperature=290.0, bandwidth=2.0e7, scope="graph"):
    """``{(link, rb): linear SINR}`` by looping over every ordered link pair on every RB."""
    a = np.asarray(getattr(adjacency, "adjacency", adjacency))
    noise = k * temperature * bandwidth
    out = {}
    for rb, active in enumerate(rb_lists):
        active = list(active)
        for i in active:
            rx = links[i].rx_pos
            tx = links[i].tx_pos
            signal = p_tx / math.hypot(tx[0] - rx[0], tx[1] - rx[1]) ** alpha
            interf = 0.0
            for j in range(len(links)):
                if j == i or j not in active:
                    continue
                if scope == "graph" and not a[i][j]:
                    continue
                txj = links[j].tx_pos
                interf += p_tx / math.hypot(txj[0] - rx[0], txj[1] - rx[1]) ** alpha
            out[(i, rb)] = signal / (interf + noise)
    return out


def dense_normalized_adjacency(adjacency) -> np.ndarray:
    a = np.asarray(getattr(adjacency, "adjacency", adjacency), dtype=float)
    n = a.shape[0]
    deg = [1.0 + sum(a[i]) for i in range(n)]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i == j or a[i, j]:
                out[i, j] = 1.0 / math.sqrt(deg[i] * deg[j])
    return out


def dense_gcn_forward(features, adjacency, w1, w2, w_out, b_out) -> np.ndarray:
    """Reference ``ReLU(A ReLU(A X W1) W2) w_out + b`` with a dense ``A``."""
    a_hat = dense_normalized_adjacency(adjacency)
    h1 = np.maximum(a_hat @ features @ w1, 0.0)
    h2 = np.maximum(a_hat @ h1 @ w2, 0.0)
    return h2 @ w_out + b_out


def finite_difference_grad(f, x, h: float = 1e-5):
    """Central-difference gradient of scalar ``f`` at ``x``.

    ``x`` may be a float, an ndarray, or anything with ``flat()`` and
    ``with_flat()`` (such as the GCN parameter container); the result has
    the same kind.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if np.isscalar(x):
        return (f(x + h) - f(x - h)) / (2 * h)
    if hasattr(x, "flat") and hasattr(x, "with_flat"):
        vec = x.flat().astype(np.float64)
        g = _fd_vector(lambda v: f(x.with_flat(v)), vec, h)
        return x.with_flat(g)
    arr = np.asarray(x, dtype=np.float64)
    g = _fd_vector(lambda v: f(v.reshape(arr.shape)), arr.ravel(), h)
    return g.reshape(arr.shape)


def _fd_vector(f, vec, h):
    g = np.empty_like(vec)
    for k in range(vec.size):
        orig = vec[k]
        vec[k] = orig + h
        up = f(vec.copy())
        vec[k] = orig - h
        down = f(vec.copy())
        vec[k] = orig
        g[k] = (up - down) / (2 * h)
    return g


def exhaustive_best_slot(links, adjacency, n_rbs, alpha=3.0, p_tx=1.0, k=1.38e-23, temperature=290.0, bandwidth=2.0e7, scope="graph"):
    """Global maximiser of ``sum log2(1 + SINR)`` when each link takes at most one RB.

    Enumerates every feasible choice in ``{idle, RB 0, ..., RB C-1}`` per
    link. Ties go to the assignment with the smallest sum of squared RB
    loads (fewest co-channel transmitters), then to enumeration order.
    Returns ``(assignment, value, count)``.
    """
    a = np.asarray(getattr(adjacency, "adjacency", adjacency))
    n = len(links)
    if n > 10 or n_rbs > 3:
        raise ValueError("exhaustive search limited to 10 links and 3 RBs")
    if (n_rbs + 1) ** n > MAX_SLOT_STATES:
        raise ValueError("search space too large")
    options = list(range(n_rbs)) + [None]
    best_key, best, count = (-math.inf, 0), None, 0
    for choice in itertools.product(options, repeat=n):
        rb_lists = [[i for i in range(n) if choice[i] == rb] for rb in range(n_rbs)]
        if any(a[i, j] for ls in rb_lists for i, j in itertools.combinations(ls, 2)):
            continue
        count += 1
        s = dense_sinr(links, rb_lists, a, alpha, p_tx, k, temperature, bandwidth, scope)
        val = math.fsum(math.log2(1 + v) for v in s.values())
        key = (val, -sum(len(ls) ** 2 for ls in rb_lists))
        if key > best_key:
            best_key, best = key, rb_lists
    return SlotAssignment.from_rb_lists(n, best), best_key[0], count


def q_value_iteration(next_state, reward, terminal, gamma, tol=1e-12, max_iter=100_000) -> np.ndarray:
    """Optimal Q for a deterministic finite MDP given as (S, A) tables."""
    nxt = np.asarray(next_state)
    r = np.asarray(reward, dtype=float)
    term = np.asarray(terminal, dtype=bool)
    q = np.zeros_like(r)
    for _ in range(max_iter):
        v = q.max(axis=1)
        new = r + np.where(term, 0.0, gamma * v[nxt])
        if np.max(np.abs(new - q)) < tol:
            return new
        q = new
    return q
