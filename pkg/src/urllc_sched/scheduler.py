"""Slot schedulers: the GCN-DQN per-RB pass, greedy Q-ranked first-fit, and an EDF-style baseline.

Every scheduler here enforces the same hard rule: on each resource block the
admitted links form an independent set of the conflict graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gcn
from .assignment import SlotAssignment
from .dqn import Action, select_action

BASELINE_NAME = "EDF-surrogate"


def compute_priorities(features, adj, params: gcn.GcnParams) -> np.ndarray:
    """Per-link priority ``q_ACTIVE - q_INACTIVE`` (the raw score for a single-head net)."""
    q, _ = gcn.forward(features, adj, params)
    if q.shape[-1] == 1:
        return q[..., 0]
    return q[..., Action.ACTIVE] - q[..., Action.INACTIVE]


def priority_order(scores) -> np.ndarray:
    """Indices by descending score, ties broken by ascending index."""
    s = np.asarray(scores, dtype=float)
    return np.lexsort((np.arange(s.size), -s))


def served_from_assignment(assignment: SlotAssignment, remaining, rb_capacity: int = 1) -> np.ndarray:
    n_rbs = np.array([len(r) for r in assignment.link_rbs], dtype=np.int64)
    return np.minimum(np.asarray(remaining, dtype=np.int64), n_rbs * rb_capacity)


@dataclass(frozen=True)
class Decision:
    link: int
    rb: int
    action: Action
    priority: float


def schedule_slot_dqn(state, graph, features, adj, params, eps, rng, n_rbs, rb_capacity=1, mode="eval", q=None):
    """One pass of per-RB ACTIVE/INACTIVE decisions.

    RBs are visited in index order; on each RB the links still holding
    demand are visited by descending priority. A link already blocked by an
    admitted neighbour on that RB is skipped without a decision. Otherwise
    the agent picks ACTIVE or INACTIVE epsilon-greedily from the two Q heads,
    and an ACTIVE link is admitted and credited ``rb_capacity`` units.

    Returns ``(assignment, decisions)``; ``decisions`` is empty in eval mode
    and lists every decision point in train mode, to be turned into
    experiences once rewards are known. ``q`` may carry a precomputed
    forward pass for ``features``.
    """
    if mode not in ("train", "eval"):
        raise ValueError("mode must be 'train' or 'eval'")
    if q is None:
        q, _ = gcn.forward(features, adj, params)
    prio = q[:, Action.ACTIVE] - q[:, Action.INACTIVE]
    order = priority_order(prio)
    n = graph.n
    left = np.where(state.active, state.remaining, 0).astype(np.int64)
    assignment = SlotAssignment(n, n_rbs)
    decisions = []
    for rb in range(n_rbs):
        blocked = np.zeros(n, dtype=bool)
        for i in order:
            if left[i] <= 0 or blocked[i]:
                continue
            a = select_action(q[i, Action.ACTIVE], q[i, Action.INACTIVE], eps, rng)
            if mode == "train":
                decisions.append(Decision(int(i), rb, a, float(prio[i])))
            if a == Action.ACTIVE:
                assignment.assign(int(i), rb)
                left[i] -= min(rb_capacity, left[i])
                blocked[graph.neighbors(i)] = True
    return assignment, decisions


def first_fit(order, demands, graph, n_rbs, rb_capacity=1) -> SlotAssignment:
    """Give each link, in ``order``, the lowest free RBs until its demand is covered.

    An RB is free for a link when none of its conflict neighbours already
    occupies it. Capacity is per transmission: each RB a link holds carries
    ``rb_capacity`` of its units, so spatial reuse never eats into it.
    """
    n = graph.n
    need = np.asarray(demands, dtype=np.int64).copy()
    blocked = np.zeros((n_rbs, n), dtype=bool)
    assignment = SlotAssignment(n, n_rbs)
    for i in order:
        for rb in range(n_rbs):
            if need[i] <= 0:
                break
            if blocked[rb, i]:
                continue
            assignment.assign(int(i), rb)
            need[i] -= rb_capacity
            blocked[rb, graph.neighbors(i)] = True
    return assignment


def greedy_rb_allocation(q, demands, graph, n_rbs, rb_capacity=1) -> SlotAssignment:
    """Q-ranked first-fit allocation."""
    return first_fit(priority_order(q), demands, graph, n_rbs, rb_capacity)


def baseline_static_priority(state, graph, links, n_rbs, rb_capacity=1) -> SlotAssignment:
    """Earliest remaining deadline first, then larger remaining demand, then lower index."""
    demanding = state.active & (state.remaining > 0)
    idx = np.flatnonzero(demanding)
    order = sorted(idx.tolist(), key=lambda i: (state.deadline_left[i], -state.remaining[i], i))
    demands = np.where(demanding, state.remaining, 0)
    return first_fit(order, demands, graph, n_rbs, rb_capacity)


@dataclass(frozen=True)
class RewardConfig:
    signal_penalty: float = -1.0
    miss_penalty: float = -5.0


def compute_reward(decisions, sinr_report, miss_flags, threshold_db, cfg: RewardConfig = RewardConfig()) -> np.ndarray:
    """Reward for every decision of one slot.

    ACTIVE earns ``log2(1 + SINR)`` on that RB when the SINR clears the
    threshold and ``cfg.signal_penalty`` otherwise; INACTIVE earns 0. A link
    that misses its deadline this slot spreads ``cfg.miss_penalty`` evenly
    over its decisions.
    """
    r = np.zeros(len(decisions))
    per_link: dict[int, list[int]] = {}
    for k, d in enumerate(decisions):
        per_link.setdefault(d.link, []).append(k)
        if d.action == Action.ACTIVE:
            e = sinr_report.entry(d.link, d.rb)
            r[k] = np.log2(1.0 + e.linear) if e.db >= threshold_db else cfg.signal_penalty
    for link, ks in per_link.items():
        if miss_flags[link]:
            r[ks] += cfg.miss_penalty / len(ks)
    return r


def mwis_weight(remaining, deadline_left, sinr_linear) -> np.ndarray:
    """``log2(1 + SINR) * X / d''``; zero for expired jobs (``d'' = 0``)."""
    x = np.asarray(remaining, dtype=float)
    d = np.asarray(deadline_left, dtype=float)
    s = np.asarray(sinr_linear, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(d > 0, np.log2(1.0 + s) * x / np.where(d > 0, d, 1.0), 0.0)
    return w


def set_weight(nodes, weights) -> float:
    return float(sum(weights[i] for i in nodes))
