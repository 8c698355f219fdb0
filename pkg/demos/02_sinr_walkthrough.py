"""
SINR by hand
============

One victim link, two would-be interferers, and the numbers behind each
term of the SINR.
"""

from urllc_sched.assignment import SlotAssignment
from urllc_sched.netmodel import ConflictGraph, LinkSpec
from urllc_sched.phy import PhyConstants, noise_power, sinr

links = [
    LinkSpec(0, (1.0, 0.0), (0.0, 0.0), 1, 10, 5, 0),     # victim, 1 m long
    LinkSpec(1, (0.0, 2.0), (0.0, 3.0), 1, 10, 5, 0),     # tx 2 m from the victim's rx
    LinkSpec(2, (0.0, -10.0), (0.0, -11.0), 1, 10, 5, 0),  # tx 10 m away
]
graph = ConflictGraph.from_edges(3, [(0, 1), (0, 2)])
print("thermal noise kTB = %.4e W" % noise_power(PhyConstants()))

for label, rb_lists in [
    ("alone", [[0]]),
    ("with the 2 m interferer", [[0, 1]]),
    ("with both", [[0, 1, 2]]),
    ("interferers on another RB", [[0], [1, 2]]),
]:
    a = SlotAssignment.from_rb_lists(3, rb_lists)
    e = sinr(0, 0, a, graph, links)
    print(f"{label:28s} I = {e.interference:.4f} W  SINR = {e.linear:.4e} ({e.db:6.2f} dB)")

###############################################################################
# Interferers that are not conflict-graph neighbours are ignored by default.
# ``scope="all"`` counts them anyway.

a = SlotAssignment.from_rb_lists(3, [[0, 1]])
empty = ConflictGraph.from_edges(3, [])
print("graph scope:", round(sinr(0, 0, a, empty, links).db, 2), "dB")
print("all scope:  ", round(sinr(0, 0, a, empty, links, scope="all").db, 2), "dB")
