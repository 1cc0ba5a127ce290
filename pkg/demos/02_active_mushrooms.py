"""
Asking for fewer labels on the mushrooms data
=============================================

Train the five linear experts on a 20% split, then let the active forecaster
play the remaining 80%. It requests a label only when the experts disagree
by more than delta. A random forecaster that queries the same fraction of
labels is the natural baseline.
"""

from pathlib import Path

from activeforecast import bench

DATA = Path(__file__).resolve().parent.parent / "data"

config = bench.ExperimentConfig(
    dataset=str(DATA / "mushrooms"),
    policies=("EWAF", "AEWAF", "REWAF"),
    permutations=5,
)
prepared = bench.prepare(config)
print(f"{prepared.name}: T = {prepared.T} test rounds, N = {prepared.N} experts")
for expert in prepared.pool:
    print(f"  {expert.kind.value:10s} {expert.mistakes:3d} training mistakes")

results = bench.run_protocol(prepared, config)
for delta, s in bench.summaries(results):
    print(
        f"{s.policy:6s} regret {s.regret_rate_mean:.3f}% +/- {s.regret_rate_std:.3f}"
        f"  labels requested {100 * s.query_ratio_mean:5.1f}%"
    )

# every active run stays inside its worst-case bound
checks = bench.verify_bounds(bench.read_results_csv(bench.format_results_csv(results)))
print(f"{sum(c.passed for c in checks if c.applicable)} of {sum(c.applicable for c in checks)} bound checks pass")
