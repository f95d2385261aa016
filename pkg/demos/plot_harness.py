"""
Repeated trials and comparison tables
=====================================

The harness repeats an optimizer over seeded starting points, writes one
trace per trial and summarizes success rates and costs.
"""

import tempfile
from pathlib import Path

from asgf import ExperimentPlan, compare, emit_convergence_plot_data, run_experiment

out = Path(tempfile.mkdtemp())

# %%
# Trial k starts from a point drawn with seed base_seed + k, so ASGF and
# DGS below see the same starting points.
plans = [
    ExperimentPlan("sphere-10", "asgf", trial_count=10, base_seed=0, output_path=out),
    ExperimentPlan("sphere-10", "dgs", trial_count=10, base_seed=0, output_path=out,
                   algorithm_config={"learning_rate": 0.1, "sigma": 1.0, "sigma_decay": 0.01}),
]
print(compare(plans, output_path=out).to_text())

# %%
# Per-trial traces feed a quartile band of best-so-far values.
row, trials = run_experiment(
    ExperimentPlan("ackley-5", "asgf", trial_count=8, output_path=out), return_trials=True
)
csv_path = emit_convergence_plot_data(
    [t.trace for t in trials], out / "ackley.csv", svg_path=out / "ackley.svg"
)
print(row)
print("plot data:", csv_path)
print(csv_path.read_text().splitlines()[0])
