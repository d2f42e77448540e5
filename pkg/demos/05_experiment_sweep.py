"""
Experiment sweep
================

A small grid of smoothed instances. Each run records observed steps next to the
analytic iteration bound. Results go to CSV and JSON plus a gnuplot script.
"""

# %%
import sys
import tempfile
from collections import defaultdict

from shapley_ndg.experiment import ExperimentConfig, run_experiment

config = ExperimentConfig(
    topologies=[{"kind": "parallel-links", "params": {"k": 20}},
                {"kind": "layered-dag", "params": {"layers": 3, "width": 3}}],
    phis=[1.0, 5.0], player_counts=[2, 4], epsilons=[0.1, 1.0],
    weight_schemes=["ones", "range:3"], instances_per_cell=10, base_seed=7,
)
report = run_experiment(config)
print("runs", len(report.runs), "bound violations", report.violations)

# %%
by_size = defaultdict(list)
for run in report.runs:
    by_size[run["m"]].append(run["T_observed"])
for m, ts in by_size.items():
    print(f"m={m:>3}: mean T {sum(ts) / len(ts):.2f}  max T {max(ts)}")

# %%
out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp()
report.write(out)
print("wrote experiment.csv, experiment_report.json, experiment.gp to", out)
