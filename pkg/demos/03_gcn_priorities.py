"""
GCN priorities on a conflict graph
==================================

Features go through two graph convolutions; the difference of the two Q
heads is each link's priority.
"""

import numpy as np

from urllc_sched import gcn
from urllc_sched.oracle import dense_gcn_forward
from urllc_sched.scheduler import compute_priorities, priority_order
from urllc_sched.sim import Environment
from urllc_sched.netmodel import NetworkConfig

env = Environment.build(NetworkConfig(n_links=10, n_channels=3, interference_margin_db=75.0, rng_seed=3))
state = env.reset()
x = env.features(state)
print("feature matrix", x.shape, "(7 base columns + 3 channel qualities)")
print("conflict edges:", env.graph.n_edges)

params = gcn.init_params(env.n_features, rng=0)
q, _ = gcn.forward(x, env.adj, params)
prio = compute_priorities(x, env.adj, params)
print("priorities:", np.round(prio, 3))
print("visit order:", priority_order(prio))

###############################################################################
# The same numbers from a plain dense re-implementation:

ref = dense_gcn_forward(x, env.graph.adjacency, *params.arrays())
print("max |q - dense reference| =", np.abs(q - ref).max())

###############################################################################
# Relabelling the nodes only relabels the output.

perm = np.random.default_rng(0).permutation(env.n)
q_perm, _ = gcn.forward(x[perm], gcn.normalize_adjacency(env.graph.permuted(perm)), params)
print("equivariance error:", np.abs(q_perm - q[perm]).max())
