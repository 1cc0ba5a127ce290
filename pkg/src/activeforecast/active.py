"""Active forecasters: predict from queried losses only, ask for labels on doubt.

Each round the forecaster forms its prediction from the losses accumulated
on rounds whose label it requested. A confidence condition on the current
expert predictions decides whether to skip the label:

* AEWAF skips when the expert predictions span at most ``delta``;
* AGF skips when every expert is within ``delta`` of the unclipped greedy
  prediction.

REWAF and RGF replace the condition with an independent Bernoulli(rho) draw
and serve as baselines. A negative ``delta`` makes AEWAF/AGF query every
round.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .core import abs_loss
from .forecasters import expert_losses, ewa_prediction, gf_prediction

AEWAF = "AEWAF"
AGF = "AGF"
REWAF = "REWAF"
RGF = "RGF"
ACTIVE_KINDS = (AEWAF, AGF)
RANDOM_KINDS = (REWAF, RGF)
POLICY_KINDS = ACTIVE_KINDS + RANDOM_KINDS
EWA_FAMILY = (AEWAF, REWAF)

# the active policy each random baseline is matched against
MATCHED_ACTIVE = {REWAF: AEWAF, RGF: AGF}

# spawn key separating query draws from data shuffling of the same seed
_QUERY_STREAM = (0x51,)


@dataclass
class ActiveState:
    """Accumulators of one active run.

    ``skipped_losses`` needs labels the learner never asked for; it is kept
    only in evaluation mode and is ``None`` otherwise.
    """

    eta: float
    delta: float
    queried_losses: np.ndarray
    query_count: int = 0
    decisions: list = field(default_factory=list)
    skipped_losses: np.ndarray = None
    last_pre_clip: float = float("nan")

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ValueError(f"learning rate must be positive, got {self.eta!r}")
        self.queried_losses = np.array(self.queried_losses, dtype=np.float64)

    @classmethod
    def initial(cls, n_experts, eta, delta, track_skipped=True):
        return cls(
            float(eta),
            float(delta),
            np.zeros(n_experts),
            skipped_losses=np.zeros(n_experts) if track_skipped else None,
        )

    @property
    def rounds(self):
        return len(self.decisions)


@dataclass(frozen=True)
class QueryPolicy:
    kind: str
    rho: float = None
    rng_seed: int = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown query policy {self.kind!r}")
        random_kind = self.kind in RANDOM_KINDS
        if random_kind != (self.rho is not None):
            raise ValueError("rho is required for random policies and only for them")
        if random_kind:
            if not 0.0 <= self.rho <= 1.0:
                raise ValueError(f"rho must lie in [0, 1], got {self.rho!r}")
            if self.rng_seed is None:
                raise ValueError("random policies need an rng_seed")

    @property
    def is_random(self):
        return self.kind in RANDOM_KINDS

    @property
    def uses_ewa(self):
        return self.kind in EWA_FAMILY

    def make_rng(self):
        """Generator for Bernoulli query draws, independent of data shuffling."""
        if not self.is_random:
            return None
        seq = np.random.SeedSequence(self.rng_seed, spawn_key=_QUERY_STREAM)
        return np.random.Generator(np.random.PCG64(seq))


def aewaf_condition(preds, delta):
    """True (skip the label) when all expert predictions lie within ``delta``."""
    preds = np.asarray(preds, dtype=np.float64)
    return float(preds.max() - preds.min()) <= delta


def agf_condition(preds, p_bar, delta):
    """True (skip the label) when every expert is within ``delta`` of ``p_bar``."""
    preds = np.asarray(preds, dtype=np.float64)
    return float(np.abs(preds - p_bar).max()) <= delta


def active_predict(state, preds, kind):
    """``(p_hat, p_bar)`` computed from the queried losses only."""
    preds = np.asarray(preds, dtype=np.float64)
    if preds.shape != state.queried_losses.shape:
        raise ValueError(
            f"{preds.shape[0]} predictions for {state.queried_losses.shape[0]} experts"
        )
    if kind in EWA_FAMILY:
        p = ewa_prediction(state.queried_losses, preds, state.eta)
        return p, p
    if kind in (AGF, RGF):
        return gf_prediction(state.queried_losses, preds, state.eta)
    raise ValueError(f"unknown query policy {kind!r}")


def should_skip(policy, preds, p_bar, delta, rng=None):
    if policy.kind == AEWAF:
        return aewaf_condition(preds, delta)
    if policy.kind == AGF:
        return agf_condition(preds, p_bar, delta)
    if rng is None:
        raise ValueError("random policies need a generator")
    return not rng.random() < policy.rho


def active_step(state, preds, policy, oracle, rng=None):
    """Play one round of the active forecaster.

    Parameters
    ----------
    state : ActiveState
        Mutated in place.
    preds : array_like of shape (N,)
    policy : QueryPolicy
    oracle : callable
        Called with no arguments, at most once, when the label is requested.
    rng : numpy.random.Generator, optional
        Source of Bernoulli draws for random policies (see
        :meth:`QueryPolicy.make_rng`).

    Returns
    -------
    p_hat : float
    queried : bool
    state : ActiveState
    """
    preds = np.asarray(preds, dtype=np.float64)
    p_hat, p_bar = active_predict(state, preds, policy.kind)
    state.last_pre_clip = p_bar
    skip = should_skip(policy, preds, p_bar, state.delta, rng)
    if skip:
        state.decisions.append(False)
    else:
        y = oracle()
        state.queried_losses += expert_losses(preds, y)
        state.query_count += 1
        state.decisions.append(True)
    return p_hat, not skip, state


def record_skipped(state, preds, y):
    """Evaluation-mode bookkeeping of the loss an unqueried round would have cost."""
    if state.skipped_losses is not None:
        state.skipped_losses += expert_losses(preds, y)


@dataclass
class ActiveTrace:
    """Per-round record and final accumulators of one active run."""

    policy: QueryPolicy
    eta: float
    delta: float
    predictions: np.ndarray
    pre_clip: np.ndarray
    queried: np.ndarray
    labels: np.ndarray
    expert_preds: np.ndarray = field(repr=False)
    queried_losses: np.ndarray
    skipped_losses: np.ndarray
    query_count: int
    forecaster_loss: float
    wall_time: float = 0.0

    @property
    def T(self):
        return self.labels.shape[0]

    @property
    def expert_losses(self):
        """Full-information cumulative losses ``L_{i,T}`` of every expert."""
        if self.T == 0:
            return np.zeros(self.queried_losses.shape)
        return np.abs(self.expert_preds - self.labels[:, None]).sum(axis=0)

    @property
    def query_ratio(self):
        return self.query_count / self.T if self.T else 0.0


def run_active_on_predictions(expert_preds, labels, policy, eta, delta, track_skipped=True):
    """Algorithm loop over precomputed expert predictions of shape ``(T, N)``.

    Labels of skipped rounds are read only to score the forecaster and, when
    ``track_skipped`` is set, to maintain ``skipped_losses``.
    """
    F = np.asarray(expert_preds, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    T = labels.shape[0]
    if F.shape[0] != T:
        raise ValueError(f"{F.shape[0]} prediction rows for {T} labels")
    n = F.shape[1] if F.ndim == 2 else 0
    state = ActiveState.initial(n, eta, delta, track_skipped=track_skipped)
    rng = policy.make_rng()
    p_hat = np.empty(T)
    p_bar = np.empty(T)
    loss = 0.0
    start = time.perf_counter()
    for t in range(T):
        f = F[t]
        y = int(labels[t])
        # bind y now: the oracle must not see a later round's label
        p, queried, _ = active_step(state, f, policy, lambda y=y: y, rng)
        if not queried:
            record_skipped(state, f, y)
        p_hat[t] = p
        p_bar[t] = state.last_pre_clip
        loss += abs_loss(p, y)
    elapsed = time.perf_counter() - start
    return ActiveTrace(
        policy=policy,
        eta=float(eta),
        delta=float(delta),
        predictions=p_hat,
        pre_clip=p_bar,
        queried=np.array(state.decisions, dtype=bool),
        labels=labels,
        expert_preds=F,
        queried_losses=state.queried_losses,
        skipped_losses=state.skipped_losses,
        query_count=state.query_count,
        forecaster_loss=loss,
        wall_time=elapsed,
    )


def run_active(pool, stream, policy, eta, delta, track_skipped=True):
    """Run an active (or random-baseline) forecaster over ``stream``.

    ``stream`` is a sequence of ``(SparseVector, label)`` pairs; expert
    predictions are evaluated with ``pool``.
    """
    stream = list(stream)
    F = pool.prediction_matrix([x for x, _ in stream]).reshape(len(stream), len(pool))
    labels = [y for _, y in stream]
    return run_active_on_predictions(F, labels, policy, eta, delta, track_skipped)
