# A small Monte Carlo comparison of the planners.
from cnaplan.montecarlo import McConfig, run_experiment

cfg = McConfig(n_values=(3, 4, 5), trials=12, seed=1)
report = run_experiment(cfg)

for a in report.aggregates:
    print(f"N={a.N} {a.planner:17s} mean J'={a.mean_cost:8.1f}")
