"""
Trading labels for regret
=========================

Sweeping delta traces a curve of regret against the fraction of labels
requested. At every point the confidence rule beats random querying at the
same label budget.
"""

from pathlib import Path

from activeforecast import bench

DATA = Path(__file__).resolve().parent.parent / "data"

config = bench.ExperimentConfig(
    dataset=str(DATA / "mushrooms"),
    policies=("AEWAF", "REWAF"),
    permutations=3,
    deltas=(0.05, 0.1, 0.2, 0.3, 0.5),
)
prepared = bench.prepare(config)
results = bench.sweep_protocol(prepared, config)

print(" delta  labels   AEWAF   REWAF")
rows = {}
for delta, s in bench.summaries(results):
    rows.setdefault(delta, {})[s.policy] = s
for delta, pair in rows.items():
    a, r = pair["AEWAF"], pair["REWAF"]
    print(f"{delta:6.2f}  {100 * a.query_ratio_mean:5.1f}%  {a.regret_rate_mean:.3f}%  {r.regret_rate_mean:.3f}%")
