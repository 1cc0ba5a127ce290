"""Experiment protocol behind the command-line harness.

One experiment trains the expert pool on a seeded 20% split, then plays
every requested forecaster over seeded permutations of the remaining 80%.
A random baseline is always paired with its active counterpart on the same
permutation and queries with probability equal to that run's realized
``Q / T``.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import active, forecasters
from .active import QueryPolicy, run_active_on_predictions
from .analysis import RunResult, active_bound, default_eta, full_information_bound, summarize
from .dataio import SplitSpec, load_dataset, permutation_seeds, shuffled_order, split
from .experts import DEFAULT_KINDS, ExpertKind, load_model, train_pool

ALL_POLICIES = ("EWAF", "GF", "AEWAF", "REWAF", "AGF", "RGF")
DEFAULT_DELTA = 0.2
DEFAULT_SWEEP_GRID = (0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.40, 0.50)

CSV_COLUMNS = (
    "row_type",
    "dataset",
    "policy",
    "seed",
    "T",
    "N",
    "eta",
    "delta",
    "rho",
    "Q",
    "query_ratio_pct",
    "forecaster_loss",
    "best_expert_loss",
    "regret_rate_pct",
    "wall_time_s",
    "runs",
    "query_ratio_pct_std",
    "regret_rate_pct_std",
)


@dataclass
class ExperimentConfig:
    dataset: str = None
    model: str = None
    output: str = None
    split_seed: int = 7
    train_fraction: float = 0.2
    permutation_seed: int = 0
    permutations: int = 20
    policies: tuple = ALL_POLICIES
    delta: float = DEFAULT_DELTA
    deltas: tuple = DEFAULT_SWEEP_GRID
    eta: float = None
    expert_params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.policies = tuple(self.policies)
        unknown = set(self.policies) - set(ALL_POLICIES)
        if unknown:
            raise ValueError(f"unknown policies: {sorted(unknown)}")
        if self.permutations < 1:
            raise ValueError("need at least one permutation")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        grid = tuple(float(d) for d in self.deltas)
        if not grid:
            raise ValueError("the delta grid is empty")
        if any(d < 0 for d in grid):
            raise ValueError("grid deltas must be non-negative")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid deltas must be distinct and sorted")
        self.deltas = grid
        if self.eta is not None and not self.eta > 0:
            raise ValueError("eta must be positive")
        SplitSpec(self.split_seed, self.train_fraction)


@dataclass
class Prepared:
    """Trained pool and the test split's expert predictions."""

    name: str
    pool: object
    test_preds: np.ndarray
    test_labels: np.ndarray

    @property
    def T(self):
        return self.test_labels.shape[0]

    @property
    def N(self):
        return self.test_preds.shape[1]

    def permuted(self, seed):
        order = shuffled_order(self.T, seed)
        return self.test_preds[order], self.test_labels[order]


def split_dataset(config):
    ds = load_dataset(config.dataset)
    return ds, split(ds, SplitSpec(config.split_seed, config.train_fraction))


def expert_params_from_config(config):
    """Translate flat ``pa_c``-style overrides into per-kind parameter dicts."""
    out = {}
    for key, value in config.expert_params.items():
        prefix, _, name = key.partition("_")
        kind = ExpertKind.parse(prefix)
        name = {"c": "C"}.get(name.lower(), name.lower())
        out.setdefault(kind, {})[name] = float(value)
    return out


def train_experts(config):
    """Train the five-expert pool on the training split of ``config.dataset``."""
    ds, (train, _) = split_dataset(config)
    return train_pool(train, dim=ds.dim, kinds=DEFAULT_KINDS, params=expert_params_from_config(config))


def prepare(config, pool=None):
    ds, (_, test) = split_dataset(config)
    if pool is None:
        pool = load_model(config.model) if config.model else train_experts(config)
    if pool.dim != ds.dim:
        raise ValueError(f"model has dim {pool.dim} but {config.dataset} has dim {ds.dim}")
    return Prepared(ds.name, pool, pool.prediction_matrix(test.vectors), test.labels)


def _result(kind, F, y, loss, Q, eta, delta, rho, seed, wall, name):
    best = float(np.abs(F - y[:, None]).sum(axis=0).min())
    return RunResult(
        policy=kind,
        T=int(y.shape[0]),
        N=int(F.shape[1]),
        Q=int(Q),
        eta=float(eta),
        delta=delta,
        forecaster_loss=float(loss),
        best_expert_loss=best,
        wall_time_seconds=wall,
        seed=int(seed),
        rho=rho,
        dataset=name,
    )


def run_policy(kind, F, y, eta, delta=None, rho=None, seed=0, name=""):
    """Play one forecaster on one ordered stream and score it."""
    if kind in forecasters.FULL_INFORMATION_KINDS:
        tr = forecasters.run_forecaster(kind, F, y, eta)
        return _result(kind, F, y, tr.forecaster_loss, len(y), eta, None, None, seed, tr.wall_time, name)
    policy = QueryPolicy(kind, rho=rho, rng_seed=seed if rho is not None else None)
    tr = run_active_on_predictions(F, y, policy, eta, delta, track_skipped=False)
    return _result(kind, F, y, tr.forecaster_loss, tr.query_count, eta, delta, rho, seed, tr.wall_time, name)


def run_permutation(prepared, seed, policies, delta, eta=None):
    """Every requested policy on one permutation, baselines matched to actives."""
    F, y = prepared.permuted(seed)
    eta = default_eta(prepared.N, prepared.T) if eta is None else eta
    results = {}
    wanted = list(policies)
    needed = list(wanted)
    for kind in wanted:
        partner = active.MATCHED_ACTIVE.get(kind)
        if partner and partner not in needed:
            needed.append(partner)
    for kind in sorted(needed, key=lambda k: k in active.RANDOM_KINDS):
        if kind in active.RANDOM_KINDS:
            ref = results[active.MATCHED_ACTIVE[kind]]
            rho = ref.Q / ref.T
            results[kind] = run_policy(kind, F, y, eta, delta, rho, seed, prepared.name)
        else:
            d = delta if kind in active.ACTIVE_KINDS else None
            results[kind] = run_policy(kind, F, y, eta, d, None, seed, prepared.name)
    return [results[k] for k in wanted]


def run_protocol(prepared, config):
    """Per-run results over all permutations, in (permutation, policy) order."""
    out = []
    for seed in permutation_seeds(config.permutations, config.permutation_seed):
        out.extend(run_permutation(prepared, seed, config.policies, config.delta, config.eta))
    return out


def sweep_protocol(prepared, config):
    """Per-run results for every grid delta, in (delta, permutation, policy) order."""
    out = []
    for delta in config.deltas:
        for seed in permutation_seeds(config.permutations, config.permutation_seed):
            out.extend(run_permutation(prepared, seed, config.policies, delta, config.eta))
    return out


def summaries(results):
    """One summary per (policy, delta) group, in first-appearance order."""
    groups = {}
    for r in results:
        groups.setdefault((r.policy, r.delta), []).append(r)
    return [(key[1], summarize(rs)) for key, rs in groups.items()]


# --------------------------------------------------------------------------
# CSV


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def result_row(r):
    return {
        "row_type": "run",
        "dataset": r.dataset,
        "policy": r.policy,
        "seed": _fmt(r.seed),
        "T": _fmt(r.T),
        "N": _fmt(r.N),
        "eta": _fmt(r.eta),
        "delta": _fmt(r.delta),
        "rho": _fmt(r.rho),
        "Q": _fmt(r.Q),
        "query_ratio_pct": _fmt(100.0 * r.query_ratio),
        "forecaster_loss": _fmt(r.forecaster_loss),
        "best_expert_loss": _fmt(r.best_expert_loss),
        "regret_rate_pct": _fmt(r.regret_rate),
        "wall_time_s": f"{r.wall_time_seconds:.6f}",
        "runs": "1",
        "query_ratio_pct_std": "",
        "regret_rate_pct_std": "",
    }


def summary_row(s, dataset, delta):
    row = dict.fromkeys(CSV_COLUMNS, "")
    row.update(
        row_type="summary",
        dataset=dataset,
        policy=s.policy,
        delta=_fmt(delta),
        query_ratio_pct=_fmt(100.0 * s.query_ratio_mean),
        regret_rate_pct=_fmt(s.regret_rate_mean),
        wall_time_s=f"{s.wall_time_mean:.6f}",
        runs=str(s.runs),
        query_ratio_pct_std=_fmt(100.0 * s.query_ratio_std),
        regret_rate_pct_std=_fmt(s.regret_rate_std),
    )
    return row


def format_results_csv(results, with_summary=True):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow(result_row(r))
    if with_summary and results:
        name = results[0].dataset
        for delta, s in summaries(results):
            writer.writerow(summary_row(s, name, delta))
    return buf.getvalue()


def read_results_csv(text):
    """Rows of a results CSV as dicts; raises ``ValueError`` on a bad header."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ValueError("empty CSV")
    missing = {"row_type", "policy", "T", "N", "Q", "eta", "delta", "forecaster_loss", "best_expert_loss"} - set(reader.fieldnames)
    if missing:
        raise ValueError(f"CSV lacks columns {sorted(missing)}")
    return list(reader)


# --------------------------------------------------------------------------
# bound verification


@dataclass
class BoundCheck:
    row: int  # 1-based data row number in the CSV
    policy: str
    seed: str
    regret: float
    bound: float

    @property
    def applicable(self):
        return not math.isnan(self.bound)

    @property
    def passed(self):
        return not self.applicable or self.regret <= self.bound + 1e-9


def check_row(row, number=0):
    """Recompute the worst-case bound that applies to one run row."""
    try:
        policy = row["policy"]
        T, N, Q = int(row["T"]), int(row["N"]), int(row["Q"])
        eta = float(row["eta"])
        regret = float(row["forecaster_loss"]) - float(row["best_expert_loss"])
        if policy in forecasters.FULL_INFORMATION_KINDS:
            bound = full_information_bound(N, T, eta)
        elif policy in active.ACTIVE_KINDS:
            bound = active_bound(N, T, Q, eta, float(row["delta"]))
        elif policy in active.RANDOM_KINDS:
            bound = float("nan")
        else:
            raise ValueError(f"unknown policy {policy!r}")
    except (KeyError, TypeError) as exc:
        raise ValueError(f"row {number}: malformed ({exc})") from None
    except ValueError as exc:
        raise ValueError(f"row {number}: {exc}") from None
    return BoundCheck(number, policy, row.get("seed", ""), regret, bound)


def verify_bounds(rows):
    return [
        check_row(row, i)
        for i, row in enumerate(rows, start=1)
        if row.get("row_type", "run") == "run"
    ]
