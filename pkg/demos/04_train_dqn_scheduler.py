"""
Training the GCN-DQN scheduler
==============================

A short run on the 12-link desk network. Each slot the agent makes
ACTIVE/INACTIVE calls per resource block; rewards are log2(1 + SINR) for good
transmissions, with penalties for weak signals and missed deadlines.
"""

from urllc_sched.netmodel import desk_network
from urllc_sched.sim import run_training

cfg = desk_network(n_links=12)
res = run_training(cfg, 100, seed=0, on_episode=lambda e: e.episodes % 20 == 0 and print(
    f"episode {e.episodes:3d}  eps {e.epsilon:.3f}  loss {e.loss:9.2f}  "
    f"mean q {e.mean_q:7.2f}  reward {e.reward:8.2f}  misses {e.deadline_misses}"
))

rewards = res.rewards()
print("first 10 episodes: mean reward %.1f" % rewards[:10].mean())
print("last 10 episodes:  mean reward %.1f" % rewards[-10:].mean())
print("gradient steps:", res.agent.steps)
