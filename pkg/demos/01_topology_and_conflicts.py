"""
Topologies and conflict graphs
==============================

Drop links over a cell grid, then derive which pairs may not share a
resource block.
"""

import dataclasses

import numpy as np

from urllc_sched.netmodel import build_conflict_graph, generate_topology, network1

cfg = network1(rng_seed=1)
links = generate_topology(cfg)
print(len(links), "links over", cfg.region_w, "x", cfg.region_h, "m,", cfg.cell_grid, "cells")

lengths = np.array([l.length for l in links])
print("link length: min %.2f m, median %.2f m, max %.2f m" % (lengths.min(), np.median(lengths), lengths.max()))

###############################################################################
# An edge means one link's transmitter lands above noise + margin at the
# other's receiver. With 1 W and a cubic path loss that holds across the
# whole 120 m region, so the default graph is complete.

for margin in (10.0, 60.0, 80.0, 100.0):
    g = build_conflict_graph(links, dataclasses.replace(cfg, interference_margin_db=margin))
    density = g.n_edges / (g.n * (g.n - 1) / 2)
    print(f"margin {margin:5.1f} dB: {g.n_edges:5d} edges, density {density:.3f}")

###############################################################################
# The first few links and the cell each transmitter fell in:

for l in links[:5]:
    print(l.id, "cell", l.cell, "tx", np.round(l.tx_pos, 1), "rx", np.round(l.rx_pos, 1),
          "demand", l.demand, "period", l.period, "deadline", l.deadline)
