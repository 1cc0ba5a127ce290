"""Full-information forecasters: weighted average, EWA and the greedy forecaster.

All exponential weights are computed with the smallest cumulative loss
factored out first, so predictions stay finite however long the stream is.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import clip_unit

EWAF = "EWAF"
GF = "GF"
FULL_INFORMATION_KINDS = (EWAF, GF)


class DegenerateWeightsError(ValueError):
    """Every combination weight is zero."""


@dataclass
class ForecasterState:
    """Learning rate plus per-expert cumulative losses ``L_{i,t}``.

    ``update_losses`` mutates the state in place; ``eta`` is fixed for the
    life of a run.
    """

    eta: float
    cum_losses: np.ndarray
    rounds_seen: int = 0

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ValueError(f"learning rate must be positive, got {self.eta!r}")
        self.eta = float(self.eta)
        self.cum_losses = np.array(self.cum_losses, dtype=np.float64)

    @classmethod
    def initial(cls, n_experts, eta):
        return cls(eta, np.zeros(n_experts))

    @property
    def n_experts(self):
        return self.cum_losses.shape[0]


def _check_lengths(losses, preds):
    if losses.shape != preds.shape:
        raise ValueError(
            f"{preds.shape[0]} predictions for {losses.shape[0]} experts"
        )


def weighted_average(weights, preds):
    """Convex combination ``sum w_i f_i / sum w_i``."""
    w = np.asarray(weights, dtype=np.float64)
    f = np.asarray(preds, dtype=np.float64)
    _check_lengths(w, f)
    if np.any(w < 0.0):
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if not total > 0.0:
        raise DegenerateWeightsError("all combination weights are zero")
    p = float(w @ f) / total
    # guard against rounding just outside the hull
    return min(max(p, float(f.min())), float(f.max()))


def exp_weights(losses, eta):
    """``exp(-eta * (L_i - min L))``: EWA weights up to a common factor."""
    return np.exp(-eta * (losses - losses.min()))


def ewa_prediction(losses, preds, eta):
    """EWA prediction under an arbitrary loss vector (full or queried)."""
    return weighted_average(exp_weights(losses, eta), preds)


def log_sum_exp(a):
    m = a.max()
    return m + math.log(np.exp(a - m).sum())


def gf_prediction(losses, preds, eta):
    """Greedy forecaster under an arbitrary loss vector.

    Returns
    -------
    p_hat : float
        The clipped prediction.
    p_bar : float
        The value before projection onto [0, 1].
    """
    shifted = losses - losses.min()
    # loss against outcome 1 is 1 - f, against outcome 0 it is f
    lse_one = log_sum_exp(-eta * (shifted + (1.0 - preds)))
    lse_zero = log_sum_exp(-eta * (shifted + preds))
    p_bar = 0.5 + (lse_one - lse_zero) / (2.0 * eta)
    return clip_unit(p_bar), p_bar


def ewaf_predict(state, preds):
    preds = np.asarray(preds, dtype=np.float64)
    _check_lengths(state.cum_losses, preds)
    return ewa_prediction(state.cum_losses, preds, state.eta)


def gf_predict(state, preds):
    """Greedy forecaster prediction; returns ``(p_hat, p_bar)``."""
    preds = np.asarray(preds, dtype=np.float64)
    _check_lengths(state.cum_losses, preds)
    return gf_prediction(state.cum_losses, preds, state.eta)


def expert_losses(preds, y):
    """Absolute losses of every expert prediction against label ``y``."""
    if y not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {y!r}")
    return np.abs(np.asarray(preds, dtype=np.float64) - y)


def update_losses(state, preds, y):
    preds = np.asarray(preds, dtype=np.float64)
    _check_lengths(state.cum_losses, preds)
    state.cum_losses += expert_losses(preds, y)
    state.rounds_seen += 1
    return state


@dataclass
class ForecastTrace:
    """Per-round record of a full-information run."""

    kind: str
    eta: float
    predictions: np.ndarray
    labels: np.ndarray
    expert_losses: np.ndarray
    forecaster_loss: float
    wall_time: float = 0.0
    pre_clip: np.ndarray = field(default=None, repr=False)

    @property
    def T(self):
        return self.predictions.shape[0]


def run_forecaster(kind, expert_preds, labels, eta):
    """Play a full-information forecaster over a whole stream.

    Parameters
    ----------
    kind : {"EWAF", "GF"}
    expert_preds : ndarray of shape (T, N)
    labels : sequence of T labels in {0, 1}
    eta : float
    """
    if kind not in FULL_INFORMATION_KINDS:
        raise ValueError(f"unknown full-information forecaster {kind!r}")
    F = np.asarray(expert_preds, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    T = labels.shape[0]
    n = F.shape[1] if F.ndim == 2 else 0
    state = ForecasterState.initial(n, eta)
    p = np.empty(T)
    p_bar = np.empty(T)
    loss = 0.0
    start = time.perf_counter()
    for t in range(T):
        f = F[t]
        y = int(labels[t])
        if kind == EWAF:
            p[t] = p_bar[t] = ewaf_predict(state, f)
        else:
            p[t], p_bar[t] = gf_predict(state, f)
        loss += abs(p[t] - y)
        update_losses(state, f, y)
    elapsed = time.perf_counter() - start
    return ForecastTrace(
        kind, float(eta), p, labels, state.cum_losses, loss, elapsed, pre_clip=p_bar
    )
