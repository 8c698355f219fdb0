"""Conflict-graph link scheduling for multi-cell industrial wireless networks.

A two-layer GCN reads per-link features over the conflict graph and feeds a
DQN that makes per-resource-block ACTIVE/INACTIVE decisions. An EDF-style
static-priority scheduler serves as the baseline.
"""

from .assignment import SlotAssignment
from .netmodel import (
    ConflictGraph,
    LinkSpec,
    NetworkConfig,
    build_conflict_graph,
    desk_network,
    generate_topology,
    network1,
    network2,
    network3,
)
from .sim import Environment, evaluate, run_training

__all__ = [
    "ConflictGraph",
    "Environment",
    "LinkSpec",
    "NetworkConfig",
    "SlotAssignment",
    "build_conflict_graph",
    "desk_network",
    "evaluate",
    "generate_topology",
    "network1",
    "network2",
    "network3",
    "run_training",
]

__version__ = "0.1.0"
