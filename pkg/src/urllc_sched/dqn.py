"""Deep Q-learning on top of the GCN trunk.

A state is one (snapshot, link, RB) decision point; its action values are the
two head outputs of the GCN at that link's node. Experiences carry references
to the shared feature snapshot rather than copies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import gcn


class Action(IntEnum):
    ACTIVE = 0
    INACTIVE = 1


class NotReady(RuntimeError):
    """Replay buffer holds fewer experiences than one batch."""


@dataclass(frozen=True, eq=False)
class StateRef:
    features: np.ndarray
    adj: gcn.NormalizedAdjacency
    link: int
    rb: int = 0
    priority: float = 0.0


@dataclass(frozen=True, eq=False)
class Experience:
    state: StateRef
    action: Action
    reward: float
    next_state: StateRef | None
    terminal: bool

    def __post_init__(self):
        if not np.isfinite(self.reward):
            raise ValueError("reward must be finite")
        if self.next_state is None and not self.terminal:
            raise ValueError("non-terminal experience needs a next state")


class ReplayBuffer:
    """Fixed-capacity ring buffer; the oldest entry is overwritten first."""

    def __init__(self, capacity: int = 10_000):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: list = []
        self._next = 0

    def __len__(self):
        return len(self._items)

    def push(self, exp) -> None:
        if len(self._items) < self.capacity:
            self._items.append(exp)
        else:
            self._items[self._next] = exp
        self._next = (self._next + 1) % self.capacity

    def extend(self, exps) -> None:
        for e in exps:
            self.push(e)

    def ready(self, batch: int) -> bool:
        return len(self._items) >= batch

    def sample(self, batch: int, rng) -> list:
        if len(self._items) < batch:
            raise NotReady(f"buffer holds {len(self._items)} < {batch} experiences")
        idx = rng.choice(len(self._items), size=batch, replace=False)
        return [self._items[i] for i in idx]

    def items(self) -> list:
        """Contents oldest-first."""
        if len(self._items) < self.capacity:
            return list(self._items)
        return self._items[self._next :] + self._items[: self._next]


@dataclass
class AgentConfig:
    gamma: float = 0.99
    batch_size: int = 32
    eps_start: float = 1.0
    eps_floor: float = 0.05
    eps_decay: float = 0.995
    target_sync: int = 100
    buffer_capacity: int = 10_000
    lr: float = 1e-3
    hidden: int = 128
    updates_per_slot: int = 1

    def __post_init__(self):
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must be in [0, 1)")
        if not (0 <= self.eps_floor <= self.eps_start <= 1):
            raise ValueError("need 0 <= eps_floor <= eps_start <= 1")
        if self.target_sync < 1 or self.batch_size < 1:
            raise ValueError("target_sync and batch_size must be >= 1")

    def epsilon(self, episode: int) -> float:
        return max(self.eps_floor, self.eps_start * self.eps_decay**episode)


def select_action(q_active: float, q_inactive: float, eps: float, rng) -> Action:
    """Epsilon-greedy over {ACTIVE, INACTIVE}; greedy ties go to ACTIVE."""
    if not 0 <= eps <= 1:
        raise ValueError("eps must be in [0, 1]")
    if eps > 0 and rng.random() < eps:
        return Action.ACTIVE if rng.random() < 0.5 else Action.INACTIVE
    return Action.ACTIVE if q_active >= q_inactive else Action.INACTIVE


def _grouped(states):
    groups: dict[int, list[int]] = {}
    for k, s in enumerate(states):
        groups.setdefault(id(s.adj), []).append(k)
    return groups.values()


def state_values(params: gcn.GcnParams, states) -> np.ndarray:
    """(B, K) action values for a list of decision states."""
    out = np.empty((len(states), params.n_out), dtype=params.dtype)
    for idx in _grouped(states):
        x = np.stack([states[k].features for k in idx])
        links = np.array([states[k].link for k in idx])
        out[idx], _ = gcn.forward_at(x, states[idx[0]].adj, params, links)
    return out


def bellman_target(exp: Experience, target_params: gcn.GcnParams, gamma: float) -> float:
    if exp.terminal:
        return float(exp.reward)
    q_next = state_values(target_params, [exp.next_state])[0]
    return float(exp.reward + gamma * q_next.max())


def bellman_targets(batch, target_params, gamma: float) -> np.ndarray:
    rewards = np.array([e.reward for e in batch], dtype=float)
    live = [k for k, e in enumerate(batch) if not e.terminal]
    y = rewards.copy()
    if live:
        q_next = state_values(target_params, [batch[k].next_state for k in live])
        y[live] += gamma * q_next.max(axis=1)
    return y


def td_loss_and_grad(batch, params, targets):
    """Mean squared TD error and its gradient with respect to ``params``."""
    states = [e.state for e in batch]
    actions = np.array([int(e.action) for e in batch])
    n = len(batch)
    grads = gcn.GcnParams.zeros_like(params)
    pred = np.empty(n)
    caches = []
    for idx in _grouped(states):
        x = np.stack([states[k].features for k in idx])
        links = np.array([states[k].link for k in idx])
        q, cache = gcn.forward_at(x, states[idx[0]].adj, params, links)
        rows = np.arange(len(idx))
        pred[idx] = q[rows, actions[idx]]
        caches.append((idx, q, cache, rows))
    err = pred - targets
    loss = float(np.mean(err**2))
    for idx, q, cache, rows in caches:
        gq = np.zeros_like(q)
        gq[rows, actions[idx]] = 2.0 * err[idx] / n
        g = gcn.backward_at(cache, gq)
        grads = gcn.GcnParams(*(a + b for a, b in zip(grads.arrays(), g.arrays())))
    return loss, grads


def train_step(buffer: ReplayBuffer, params, target_params, adam: gcn.AdamState, cfg: AgentConfig, rng):
    """One mini-batch update of the online network.

    Returns ``(loss, params, adam)`` where ``loss`` is measured before the
    update. Raises :class:`NotReady` when the buffer is under one batch.
    """
    batch = buffer.sample(cfg.batch_size, rng)
    y = bellman_targets(batch, target_params, cfg.gamma)
    loss, grads = td_loss_and_grad(batch, params, y)
    params, adam = gcn.adam_step(params, grads, adam)
    return loss, params, adam


def sync_target(params, target_params, step: int, k: int):
    if step % k == 0:
        return params.copy()
    return target_params


@dataclass
class DqnAgent:
    """Online/target networks, optimiser state, replay memory and RNG in one place."""

    params: gcn.GcnParams
    cfg: AgentConfig = field(default_factory=AgentConfig)
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    target: gcn.GcnParams | None = None
    adam: gcn.AdamState | None = None
    buffer: ReplayBuffer | None = None
    steps: int = 0

    def __post_init__(self):
        if self.target is None:
            self.target = self.params.copy()
        if self.adam is None:
            self.adam = gcn.AdamState.for_params(self.params, lr=self.cfg.lr)
        if self.buffer is None:
            self.buffer = ReplayBuffer(self.cfg.buffer_capacity)

    @classmethod
    def create(cls, n_features: int, cfg: AgentConfig | None = None, seed: int = 0, dtype=np.float64) -> DqnAgent:
        cfg = cfg or AgentConfig()
        rng = np.random.default_rng(seed)
        params = gcn.init_params(n_features, cfg.hidden, 2, rng=rng, dtype=dtype)
        return cls(params=params, cfg=cfg, rng=rng)

    def act(self, q_active, q_inactive, eps) -> Action:
        return select_action(q_active, q_inactive, eps, self.rng)

    def train_step(self) -> float | None:
        """One update if the buffer is ready; ``None`` otherwise."""
        if not self.buffer.ready(self.cfg.batch_size):
            return None
        loss, self.params, self.adam = train_step(
            self.buffer, self.params, self.target, self.adam, self.cfg, self.rng
        )
        self.steps += 1
        self.target = sync_target(self.params, self.target, self.steps, self.cfg.target_sync)
        return loss
