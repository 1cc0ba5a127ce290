"""Regret accounting, worst-case bounds and aggregation over repeated runs."""

import math
from dataclasses import dataclass, asdict

import numpy as np


def regret(forecaster_loss, expert_losses):
    """Forecaster loss minus the best expert's loss (negative if it wins)."""
    expert_losses = np.asarray(expert_losses, dtype=np.float64).reshape(-1)
    if expert_losses.size == 0:
        raise ValueError("regret needs at least one expert")
    return float(forecaster_loss) - float(expert_losses.min())


def full_information_bound(N, T, eta):
    """Worst-case regret of EWA/GF with ``N`` experts over ``T`` rounds.

    ``ln N / eta + eta T / 8``; with ``eta = default_eta(N, T)`` this equals
    ``sqrt(T ln N / 2)``.
    """
    if N < 1 or T < 0:
        raise ValueError("need N >= 1 and T >= 0")
    if not eta > 0.0:
        raise ValueError("eta must be positive")
    return math.log(N) / eta + eta * T / 8.0


def active_bound(N, T, Q, eta, delta):
    """Worst-case regret of AEWAF/AGF that requested ``Q`` of ``T`` labels.

    Adds ``delta`` for every skipped round to :func:`full_information_bound`.
    """
    if not 0 <= Q <= T:
        raise ValueError(f"need 0 <= Q <= T, got Q={Q}, T={T}")
    return full_information_bound(N, T, eta) + delta * (T - Q)


def tuned_active_params(N, T, Q, a):
    """``(eta, delta)`` balancing the active bound for slack ratio ``a = delta/eta``.

    At these values ``active_bound`` equals
    ``2 sqrt(ln N) sqrt(T (a + 1/8) - Q a)``. Since ``Q`` is only known after
    a run, this is for post-hoc analysis rather than tuning.
    """
    if not a > 0.0:
        raise ValueError("a must be positive")
    if not 0 <= Q <= T:
        raise ValueError(f"need 0 <= Q <= T, got Q={Q}, T={T}")
    effective = T * (1.0 + 8.0 * a) - 8.0 * a * Q
    eta = math.sqrt(8.0 * math.log(N) / effective)
    return eta, a * eta


def tuned_active_value(N, T, Q, a):
    return 2.0 * math.sqrt(math.log(N)) * math.sqrt(T * (a + 0.125) - Q * a)


def default_eta(N, T):
    """Learning rate ``sqrt(8 ln N / T)``."""
    if N < 1 or T < 1:
        raise ValueError("need N >= 1 and T >= 1")
    if N == 1:
        raise ValueError(
            "the default learning rate is 0 for a single expert; pass eta explicitly"
        )
    return math.sqrt(8.0 * math.log(N) / T)


@dataclass
class RunResult:
    """Outcome of one forecaster on one permutation.

    ``regret_rate`` is the per-round regret in percent and ``query_ratio`` is
    a fraction in [0, 1].
    """

    policy: str
    T: int
    N: int
    Q: int
    eta: float
    delta: float
    forecaster_loss: float
    best_expert_loss: float
    wall_time_seconds: float = 0.0
    seed: int = 0
    rho: float = None
    dataset: str = ""

    def __post_init__(self):
        if not 0 <= self.Q <= self.T:
            raise ValueError(f"need 0 <= Q <= T, got Q={self.Q}, T={self.T}")

    @property
    def regret(self):
        return self.forecaster_loss - self.best_expert_loss

    @property
    def regret_rate(self):
        return 100.0 * self.regret / self.T if self.T else 0.0

    @property
    def query_ratio(self):
        return self.Q / self.T if self.T else 0.0

    def as_dict(self):
        out = asdict(self)
        out.update(regret_rate=self.regret_rate, query_ratio=self.query_ratio)
        return out


@dataclass
class Summary:
    policy: str
    runs: int
    regret_rate_mean: float
    regret_rate_std: float
    query_ratio_mean: float
    query_ratio_std: float
    wall_time_mean: float


def _mean_std(values):
    values = np.asarray(values, dtype=np.float64)
    # offsets from the first run keep identical runs at exactly zero spread
    offsets = values - values[0]
    mean = values[0] + offsets.mean()
    std = float(offsets.std(ddof=1)) if values.size > 1 else 0.0
    return float(mean), std


def summarize(results):
    """Mean and sample standard deviation over repeated runs of one policy."""
    results = list(results)
    if not results:
        raise ValueError("nothing to summarize")
    policies = {r.policy for r in results}
    if len(policies) != 1:
        raise ValueError(f"cannot pool different policies: {sorted(policies)}")
    rr_mean, rr_std = _mean_std([r.regret_rate for r in results])
    qr_mean, qr_std = _mean_std([r.query_ratio for r in results])
    return Summary(
        policy=results[0].policy,
        runs=len(results),
        regret_rate_mean=rr_mean,
        regret_rate_std=rr_std,
        query_ratio_mean=qr_mean,
        query_ratio_std=qr_std,
        wall_time_mean=float(np.mean([r.wall_time_seconds for r in results])),
    )
