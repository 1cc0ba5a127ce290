"""
Combining expert advice on a synthetic stream
=============================================

Five fixed experts predict a binary outcome each round. Two full-information
forecasters (exponentially weighted average and greedy) mix their advice and
we compare the regret they accumulate with the worst-case guarantee.
"""

import numpy as np

from activeforecast import analysis, forecasters

rng = np.random.default_rng(0)
T, N = 2000, 5

# labels are coin flips; expert i is right with probability 0.55 + 0.08 i
labels = rng.integers(0, 2, T)
skill = 0.55 + 0.08 * np.arange(N)
correct = rng.random((T, N)) < skill
confidence = rng.uniform(0.5, 1.0, (T, N))
F = np.where(correct, confidence, 1 - confidence)
F = np.where(labels[:, None] == 1, F, 1 - F)

eta = analysis.default_eta(N, T)
print(f"learning rate sqrt(8 ln N / T) = {eta:.4f}")

for kind in forecasters.FULL_INFORMATION_KINDS:
    trace = forecasters.run_forecaster(kind, F, labels, eta)
    r = analysis.regret(trace.forecaster_loss, trace.expert_losses)
    bound = analysis.full_information_bound(N, T, eta)
    print(f"{kind:5s} loss {trace.forecaster_loss:8.2f}  regret {r:7.2f}  bound {bound:6.2f}")

# the best expert is the most skilled one
print("expert losses:", np.round(np.abs(F - labels[:, None]).sum(axis=0), 1))
