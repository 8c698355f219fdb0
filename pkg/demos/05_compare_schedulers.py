"""
Comparing schedulers
====================

Train briefly, then evaluate the DQN pass, greedy Q-ranked allocation, and
the EDF-surrogate baseline with the same metrics.
"""

from urllc_sched import metrics
from urllc_sched.netmodel import desk_network
from urllc_sched.sim import Environment, evaluate, run_training

cfg = desk_network()
env = Environment.build(cfg)
params = run_training(cfg, 60, seed=0, env=env).params

reports = [evaluate(env, m, None if m == "baseline" else params).report for m in ("baseline", "dqn", "greedy")]
base = reports[0]
for r in reports:
    print(f"{r.method:14s} {metrics.format_range(r.mean_sinr_db, r.p25, r.p75):24s} "
          f"sched {r.sched_ratio:.2f}  rel {r.reliability:.2f}  cap {r.capacity:5.1f}  misses {r.miss_count}  "
          f"gain {metrics.sinr_gain(base.mean_sinr_db, r.mean_sinr_db):+.2f} dB  "
          f"t/slot {r.infer_time_s * 1e3:.2f} ms")

###############################################################################
# At the default 1 W and 10 dB margin the conflict graph is complete, so a
# feasible schedule never has co-channel interference. Every method then
# sees the same SINR per transmission, and the rows differ only in misses
# and timing. A sparser graph with every co-channel transmitter counted:

cfg = desk_network(interference_margin_db=60.0, interference_scope="all", tx_power=1e-3)
env = Environment.build(cfg)
params = run_training(cfg, 60, seed=0, env=env).params
for m in ("baseline", "dqn"):
    r = evaluate(env, m, None if m == "baseline" else params).report
    print(f"{r.method:14s} {metrics.format_range(r.mean_sinr_db, r.p25, r.p75):24s} rel {r.reliability:.2f}")
