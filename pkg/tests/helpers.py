"""Shared fixtures-as-functions: toy MDP, small random instances, brute-force checks."""

from __future__ import annotations

import dataclasses

import numpy as np

from urllc_sched import dqn, gcn, traffic
from urllc_sched.assignment import SlotAssignment
from urllc_sched.netmodel import ConflictGraph, LinkSpec, desk_network
from urllc_sched.phy import PhyConstants, slot_sinr
from urllc_sched.scheduler import mwis_weight, schedule_slot_dqn, served_from_assignment

# Two states, two actions, no cycles:
#   s0 --a0--> s1 (r=1)    s0 --a1--> end (r=0.5)
#   s1 --a0--> end (r=2)   s1 --a1--> end (r=0)
TOY_NEXT = np.array([[1, 0], [0, 0]])
TOY_REWARD = np.array([[1.0, 0.5], [2.0, 0.0]])
TOY_TERMINAL = np.array([[False, True], [True, True]])


def toy_states():
    adj = gcn.normalize_adjacency(np.zeros((1, 1), dtype=np.uint8))
    return [dqn.StateRef(np.eye(2)[s][None, :], adj, 0) for s in range(2)]


def toy_q(params, states) -> np.ndarray:
    return dqn.state_values(params, states)


def run_toy_mdp(steps: int = 5000, seed: int = 0, gamma: float = 0.99, hidden: int = 128, check_every: int = 100):
    """Train a DQN agent on the toy MDP.

    Returns ``(agent, losses, errors)`` where ``errors`` holds
    ``(step, max|Q - Q*|)`` every ``check_every`` updates.
    """
    from urllc_sched.oracle import q_value_iteration

    q_star = q_value_iteration(TOY_NEXT, TOY_REWARD, TOY_TERMINAL, gamma)
    cfg = dqn.AgentConfig(gamma=gamma, hidden=hidden)
    agent = dqn.DqnAgent.create(2, cfg, seed=seed)
    states = toy_states()
    losses, errors = [], []
    s, episode = 0, 0
    while agent.steps < steps:
        q = toy_q(agent.params, [states[s]])[0]
        a = int(agent.act(q[0], q[1], cfg.epsilon(episode)))
        term = bool(TOY_TERMINAL[s, a])
        nxt = int(TOY_NEXT[s, a])
        agent.buffer.push(
            dqn.Experience(states[s], dqn.Action(a), float(TOY_REWARD[s, a]), None if term else states[nxt], term)
        )
        loss = agent.train_step()
        if loss is not None:
            losses.append(loss)
            if agent.steps % check_every == 0:
                err = np.max(np.abs(toy_q(agent.params, states) - q_star))
                errors.append((agent.steps, float(err)))
        if term:
            s, episode = 0, episode + 1
        else:
            s = nxt
    return agent, losses, errors


def random_links(n: int, rng, side: float = 50.0, min_len: float = 0.5, max_len: float = 8.0) -> list[LinkSpec]:
    links = []
    for i in range(n):
        tx = rng.uniform(0, side, 2)
        d = rng.uniform(min_len, max_len)
        th = rng.uniform(0, 2 * np.pi)
        rx = tx + d * np.array([np.cos(th), np.sin(th)])
        links.append(LinkSpec(i, (float(tx[0]), float(tx[1])), (float(rx[0]), float(rx[1])), 1, 10, 5, 0))
    return links


def random_graph(n: int, p: float, rng) -> ConflictGraph:
    upper = np.triu(rng.random((n, n)) < p, 1)
    return ConflictGraph((upper | upper.T).astype(np.uint8))


def twelve_link_fixture():
    """The 12-link, 3-channel, seed-0 network used by learning-progress checks."""
    return desk_network(n_links=12)


def make_state(remaining, deadline_left):
    remaining = np.asarray(remaining, dtype=np.int64)
    deadline_left = np.asarray(deadline_left, dtype=np.int64)
    n = remaining.size
    links = random_links(n, np.random.default_rng(0))
    base = traffic.initial_state(links)
    return dataclasses.replace(
        base, remaining=remaining, deadline_left=deadline_left, active=remaining > 0
    )


def no_edges(n):
    return ConflictGraph(np.zeros((n, n), dtype=np.uint8))


def dqn_slot(state, graph, q, n_rbs, eps=0.0, mode="eval", rng=None):
    rng = rng or np.random.default_rng(0)
    return schedule_slot_dqn(state, graph, None, None, None, eps, rng, n_rbs, mode=mode, q=np.asarray(q, dtype=float))


def random_instance(rng):
    n = int(rng.integers(1, 16))
    g = random_graph(n, float(rng.random()), rng)
    remaining = rng.integers(0, 4, n)
    deadline = np.where(remaining > 0, rng.integers(1, 6, n), 0)
    return g, make_state(remaining, deadline), int(rng.integers(1, 4))


def check_slot(a, g, state, n_rbs):
    assert a.violations(g) == []
    assert all(rb < n_rbs for rbs in a.link_rbs for rb in rbs)
    served = served_from_assignment(a, np.where(state.active, state.remaining, 0))
    n_rb = np.array([len(a.rbs_of(i)) for i in range(g.n)])
    assert np.all(served <= n_rb) and np.all(served <= state.remaining)


def oracle_weight_fixture(seed):
    """A <=12-node conflict graph with reward-consistent MWIS weights."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 13))
    links = random_links(n, rng, side=20.0)
    g = random_graph(n, float(rng.uniform(0.1, 0.7)), rng)
    remaining = rng.integers(0, 4, n)
    deadline = np.where(remaining > 0, rng.integers(1, 6, n), 0)
    own = SlotAssignment.from_rb_lists(n, [list(range(n))])
    snr = slot_sinr(own, no_edges(n), links, PhyConstants()).linear
    w = mwis_weight(remaining, deadline, snr)
    return g, w, make_state(remaining, deadline)
