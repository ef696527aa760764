# Plan a mission for four agents with the greedy presets and exhaustive search.
from pathlib import Path

import numpy as np

from cnaplan.cli import load_scenario
from cnaplan.planner import PRESETS, exhaustive_plan, greedy_plan
from cnaplan.simulator import run_mission
from cnaplan.uncertainty import cost_bounds

sc = load_scenario(Path(__file__).with_name("four_agent.json"))
lo, hi = cost_bounds(sc.agents, sc.noise, sc.horizon)
print(f"bounds on J': [{lo:.1f}, {hi:.1f}]")

for name, w in PRESETS.items():
    plan = greedy_plan(sc, w)
    print(name, plan.tasks, round(plan.cost, 2))

best, worst = exhaustive_plan(sc)
print("exhaustive best ", best.tasks, round(best.cost, 2), f"({best.n_evaluated} sequences)")
print("exhaustive worst", worst.tasks, round(worst.cost, 2))

# simulate the best plan step by step
m = run_mission(sc, best.tasks)
print("aiding steps", m.aiding_steps, "surfacing at", m.surfacing_step)
print("CNA travelled", round(float(np.sum(np.linalg.norm(np.diff(m.cna_path, axis=0), axis=1))), 1))
print("variance at end", np.round([tr[-1] for tr in m.agent_traces], 1))
