"""
Greedy allocation against the exact MWIS
========================================

On small graphs the best independent set can be found by enumeration. The
greedy first-fit allocator is measured against it.
"""

import numpy as np

from urllc_sched.netmodel import ConflictGraph
from urllc_sched.oracle import brute_force_mwis
from urllc_sched.scheduler import greedy_rb_allocation, set_weight

rng = np.random.default_rng(0)
ratios = []
for trial in range(200):
    n = int(rng.integers(4, 13))
    upper = np.triu(rng.random((n, n)) < 0.4, 1)
    g = ConflictGraph((upper | upper.T).astype(np.uint8))
    w = rng.exponential(1.0, n)
    best = brute_force_mwis(g, w)
    a = greedy_rb_allocation(w, np.ones(n, dtype=int), g, 1)
    ratios.append(set_weight(a.links_on(0), w) / best.best_value)

ratios = np.array(ratios)
print("greedy / optimum: min %.3f, mean %.3f, optimal in %d of %d" % (
    ratios.min(), ratios.mean(), np.sum(ratios > 1 - 1e-12), ratios.size))

###############################################################################
# A star fools greedy: the heavy centre blocks every leaf.

star = ConflictGraph.from_edges(6, [(0, k) for k in range(1, 6)])
w = np.array([1.1, 1.0, 1.0, 1.0, 1.0, 1.0])
print("star, greedy:", greedy_rb_allocation(w, np.ones(6, dtype=int), star, 1).links_on(0),
      " optimum:", brute_force_mwis(star, w).best_set)
