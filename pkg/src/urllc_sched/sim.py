"""Slot-level simulation: environment, DQN training loop, and evaluation runs."""

from __future__ import annotations

import csv
import dataclasses
import math
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import gcn, metrics, phy, traffic
from .dqn import AgentConfig, DqnAgent, Experience, StateRef
from .netmodel import NetworkConfig, build_conflict_graph, generate_topology
from .scheduler import (
    BASELINE_NAME,
    RewardConfig,
    baseline_static_priority,
    compute_priorities,
    compute_reward,
    greedy_rb_allocation,
    schedule_slot_dqn,
    served_from_assignment,
)

METHODS = ("dqn", "greedy", "baseline")
TRAINING_LOG_COLUMNS = ("step", "epsilon", "loss", "mean_q", "episodes", "deadline_misses", "reward")


class FeasibilityError(AssertionError):
    """A scheduler produced conflicting links on one resource block."""


@dataclass
class StepOutcome:
    served: np.ndarray
    sinr: phy.SinrReport


@dataclass
class Environment:
    config: NetworkConfig
    links: list
    graph: object
    adj: gcn.NormalizedAdjacency
    quality: np.ndarray
    snr_db: np.ndarray

    @classmethod
    def build(cls, config: NetworkConfig, seed=None, links=None, graph=None) -> Environment:
        if seed is not None and seed != config.rng_seed:
            config = dataclasses.replace(config, rng_seed=seed)
        seed = config.rng_seed
        if links is None:
            links = generate_topology(config, seed)
        if graph is None:
            graph = build_conflict_graph(links, config)
        return cls(
            config=config,
            links=links,
            graph=graph,
            adj=gcn.normalize_adjacency(graph),
            quality=traffic.channel_quality(len(links), config.n_channels, seed),
            snr_db=phy.isolated_snr_db(links, config.phy, config.path_loss_exp, config.tx_power),
        )

    @property
    def n(self) -> int:
        return len(self.links)

    @property
    def n_features(self) -> int:
        return traffic.N_BASE_FEATURES + self.config.n_channels

    def reset(self) -> traffic.TrafficState:
        return traffic.initial_state(self.links)

    def features(self, state) -> np.ndarray:
        return traffic.build_features(state, self.links, self.snr_db, self.quality)

    def baseline_assignment(self, state):
        return baseline_static_priority(state, self.graph, self.links, self.config.n_channels, self.config.rb_capacity)

    def sinr(self, assignment) -> phy.SinrReport:
        c = self.config
        return phy.slot_sinr(assignment, self.graph, self.links, c.phy, c.path_loss_exp, c.tx_power, "min", c.interference_scope)

    def step(self, state, assignment) -> tuple[traffic.TrafficState, StepOutcome]:
        bad = assignment.violations(self.graph)
        if bad:
            raise FeasibilityError(f"conflicting links share an RB: {bad[:5]}")
        served = served_from_assignment(assignment, np.where(state.active, state.remaining, 0), self.config.rb_capacity)
        report = self.sinr(assignment)
        return traffic.advance_slot(state, self.links, served), StepOutcome(served, report)

    def episode_length(self, cap: int | None = None) -> int:
        hp = traffic.hyperperiod(self.links)
        return hp if cap is None else min(hp, cap)


@dataclass
class EpisodeLog:
    step: int
    epsilon: float
    loss: float
    mean_q: float
    episodes: int
    deadline_misses: int
    reward: float


@dataclass
class TrainingResult:
    agent: DqnAgent
    log: list[EpisodeLog] = field(default_factory=list)
    initial_params: gcn.GcnParams | None = None

    @property
    def params(self) -> gcn.GcnParams:
        return self.agent.params

    def rewards(self) -> np.ndarray:
        return np.array([e.reward for e in self.log])


def run_training(
    config: NetworkConfig,
    episodes: int,
    seed: int = 0,
    agent_cfg: AgentConfig | None = None,
    reward_cfg: RewardConfig = RewardConfig(),
    episode_slots: int | None = 40,
    env: Environment | None = None,
    dtype=np.float64,
    on_episode=None,
) -> TrainingResult:
    """Train the GCN-DQN scheduler on one topology.

    Each slot: features -> Q heads -> per-RB decisions -> environment update
    -> rewards -> experiences into replay -> ``updates_per_slot`` mini-batch
    steps (the target net hard-syncs every ``target_sync`` steps). An
    episode restarts traffic from slot 0 and lasts one hyperperiod, capped
    at ``episode_slots``. Epsilon decays once per episode.
    """
    env = env or Environment.build(config)
    cfg = agent_cfg or AgentConfig()
    agent = DqnAgent.create(env.n_features, cfg, seed=seed, dtype=dtype)
    result = TrainingResult(agent, initial_params=agent.params.copy())
    n_slots = env.episode_length(episode_slots)
    c = env.config
    for ep in range(episodes):
        eps = cfg.epsilon(ep)
        state = env.reset()
        feats = env.features(state)
        losses, qs = [], []
        total_reward, misses = 0.0, 0
        for t in range(n_slots):
            q, _ = gcn.forward(feats, env.adj, agent.params)
            assignment, decisions = schedule_slot_dqn(
                state, env.graph, feats, env.adj, agent.params, eps, agent.rng,
                c.n_channels, c.rb_capacity, mode="train", q=q,
            )
            nxt, out = env.step(state, assignment)
            rewards = compute_reward(decisions, out.sinr, nxt.miss_flags, c.sinr_threshold_db, reward_cfg)
            terminal = t == n_slots - 1
            next_feats = env.features(nxt)
            for d, r in zip(decisions, rewards):
                s = StateRef(feats, env.adj, d.link, d.rb, d.priority)
                ns = None if terminal else StateRef(next_feats, env.adj, d.link, d.rb)
                agent.buffer.push(Experience(s, d.action, float(r), ns, terminal))
                qs.append(q[d.link, d.action])
            total_reward += float(rewards.sum())
            misses += int(nxt.miss_flags.sum())
            for _ in range(cfg.updates_per_slot):
                loss = agent.train_step()
                if loss is not None:
                    losses.append(loss)
            state, feats = nxt, next_feats
        entry = EpisodeLog(
            step=agent.steps,
            epsilon=eps,
            loss=float(np.mean(losses)) if losses else float("nan"),
            mean_q=float(np.mean(qs)) if qs else float("nan"),
            episodes=ep + 1,
            deadline_misses=misses,
            reward=total_reward,
        )
        result.log.append(entry)
        if on_episode is not None:
            on_episode(entry)
    return result


def write_training_log(path, log) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=TRAINING_LOG_COLUMNS)
        w.writeheader()
        for e in log:
            w.writerow(asdict(e))


@dataclass
class EvalResult:
    report: metrics.MetricsReport
    per_link_sinr_db: np.ndarray
    samples_db: np.ndarray
    slot_times: list[float]
    assignments: list
    misses: int


def schedule(env: Environment, state, method: str, params=None, rng=None):
    """Run the chosen scheduler for one slot with no exploration."""
    c = env.config
    if method == "baseline":
        return env.baseline_assignment(state)
    if params is None:
        raise ValueError(f"method {method!r} needs trained parameters")
    feats = env.features(state)
    if method == "dqn":
        assignment, _ = schedule_slot_dqn(state, env.graph, feats, env.adj, params, 0.0, rng, c.n_channels, c.rb_capacity)
        return assignment
    if method == "greedy":
        prio = compute_priorities(feats, env.adj, params)
        demands = np.where(state.active, state.remaining, 0)
        return greedy_rb_allocation(prio, demands, env.graph, c.n_channels, c.rb_capacity)
    raise ValueError(f"unknown method {method!r}")


def evaluate(env: Environment, method: str, params=None, n_slots: int | None = None, seed: int = 0, keep_assignments=False) -> EvalResult:
    """Run ``n_slots`` greedy (epsilon = 0) slots and summarise them.

    ``seed`` drives tie-breaking randomness only; the report is keyed by
    the topology seed. Per-link SINR is the dB mean over that link's
    transmissions (NaN if it never transmitted). A link's capacity for the
    schedulability test is the units it received per slot while it had
    pending demand.
    """
    if n_slots is None:
        n_slots = max(100, traffic.hyperperiod(env.links))
    rng = np.random.default_rng(seed)
    state = env.reset()
    per_link_samples = [[] for _ in range(env.n)]
    samples, times, kept = [], [], []
    for _ in range(n_slots):
        t0 = time.perf_counter()
        assignment = schedule(env, state, method, params, rng)
        times.append(time.perf_counter() - t0)
        state, out = env.step(state, assignment)
        act = out.sinr.active
        for i in act:
            per_link_samples[i].append(float(out.sinr.db[i]))
        samples.extend(out.sinr.db[act].tolist())
        if keep_assignments:
            kept.append(assignment)
    per_link = np.array([_shifted_mean(v) for v in per_link_samples])
    with np.errstate(invalid="ignore", divide="ignore"):
        cap = np.where(
            state.busy_slots > 0,
            state.served_total / np.maximum(state.busy_slots, 1),
            np.inf,
        )
    demand = [l.demand for l in env.links]
    deadline = [l.deadline for l in env.links]
    label = BASELINE_NAME if method == "baseline" else method
    report = metrics.report_from_trace(
        label, env.config.rng_seed, env.config.n_channels, per_link, demand, cap, deadline,
        env.config.sinr_threshold_db, int(state.misses.sum()), statistics.median(times),
    )
    return EvalResult(report, per_link, np.array(samples), times, kept, int(state.misses.sum()))


def _shifted_mean(values) -> float:
    # anchored on the first sample so a constant series averages to itself exactly
    if not values:
        return float("nan")
    x0 = values[0]
    return x0 + math.fsum(v - x0 for v in values) / len(values)


def time_inference(env: Environment, params, n_slots: int = 100, seed: int = 0) -> float:
    """Median wall time of one DQN scheduling slot (features, forward, RB pass)."""
    res = evaluate(env, "dqn", params, n_slots=n_slots, seed=seed)
    return statistics.median(res.slot_times)
