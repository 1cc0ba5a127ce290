"""Linear expert pool: one-pass online training and frozen evaluation.

Each expert is a linear classifier ``u`` trained on the training split with
one of five classic online algorithms, then frozen and used as the function
``x -> clip(u.x + 0.5)``. Training maps labels ``y`` in {0, 1} to signed
labels ``2y - 1``.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import clip_unit, sparse_dot

# largest dimensionality that still keeps a full AROW covariance
AROW_FULL_COVARIANCE_MAX_DIM = 512


class ExpertKind(str, enum.Enum):
    PERCEPTRON = "Perceptron"
    ROMMA = "ROMMA"
    ALMA = "ALMA"
    PA = "PA"
    AROW = "AROW"

    @classmethod
    def parse(cls, name):
        for kind in cls:
            if kind.value.lower() == str(name).strip().lower():
                return kind
        raise ValueError(f"unknown expert kind {name!r}")


DEFAULT_KINDS = (
    ExpertKind.PERCEPTRON,
    ExpertKind.ROMMA,
    ExpertKind.ALMA,
    ExpertKind.PA,
    ExpertKind.AROW,
)

DEFAULT_PARAMS = {
    ExpertKind.PERCEPTRON: {},
    ExpertKind.ROMMA: {},
    ExpertKind.ALMA: {"p": 2.0, "alpha": 0.9, "C": math.sqrt(2.0)},
    ExpertKind.PA: {"C": 5.0},
    ExpertKind.AROW: {"r": 1.0},
}


@dataclass
class LinearExpert:
    """A frozen weight vector plus the algorithm that produced it."""

    weights: np.ndarray
    kind: ExpertKind
    mistakes: int = 0
    updates: int = 0
    auxiliary: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 1:
            raise ValueError("weights must be a vector")
        if not np.all(np.isfinite(self.weights)):
            raise FloatingPointError(f"{self.kind.value} weights are not finite")

    @property
    def dim(self):
        return self.weights.shape[0]

    def score(self, x):
        return sparse_dot(x, self.weights)

    def predict(self, x):
        return expert_predict(self, x)


class ExpertPool:
    """Ordered collection of experts sharing one dimensionality."""

    def __init__(self, experts):
        experts = list(experts)
        if not experts:
            raise ValueError("an expert pool needs at least one expert")
        dims = {e.dim for e in experts}
        if len(dims) != 1:
            raise ValueError(f"experts disagree on dimensionality: {sorted(dims)}")
        self.experts = experts
        self.dim = dims.pop()

    def __len__(self):
        return len(self.experts)

    def __iter__(self):
        return iter(self.experts)

    def __getitem__(self, i):
        return self.experts[i]

    @property
    def kinds(self):
        return [e.kind for e in self.experts]

    def evaluate(self, x):
        return pool_evaluate(self, x)

    def prediction_matrix(self, instances):
        """Expert predictions for a sequence of instances, shape ``(T, N)``.

        Row ``t`` equals ``pool_evaluate(self, instances[t])``.
        """
        out = np.empty((len(instances), len(self)))
        for t, x in enumerate(instances):
            out[t] = pool_evaluate(self, x)
        return out


def expert_predict(expert, x):
    """``clip(u.x + 0.5)`` for a single expert."""
    return clip_unit(sparse_dot(x, expert.weights) + 0.5)


def pool_evaluate(pool, x):
    """Vector of all N expert predictions on instance ``x``."""
    return np.array([expert_predict(e, x) for e in pool.experts])


# --------------------------------------------------------------------------
# training


def _signed(y):
    if y not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {y!r}")
    return 2.0 * y - 1.0


def _train_perceptron(stream, dim, w):
    mistakes = 0
    for x, y in stream:
        ys = _signed(y)
        if ys * (x.values @ w[x.indices]) <= 0.0:
            w[x.indices] += ys * x.values
            mistakes += 1
    return w, mistakes, mistakes, {}


def _train_pa(stream, dim, w, C=5.0):
    mistakes = updates = 0
    for x, y in stream:
        ys = _signed(y)
        margin = ys * (x.values @ w[x.indices])
        if margin <= 0.0:
            mistakes += 1
        loss = max(0.0, 1.0 - margin)
        sq = x.squared_norm()
        if loss > 0.0 and sq > 0.0:
            tau = min(C, loss / sq)
            w[x.indices] += tau * ys * x.values
            updates += 1
    return w, mistakes, updates, {}


def _train_romma(stream, dim, w):
    # update only on mistakes (the non-aggressive variant)
    mistakes = updates = 0
    for x, y in stream:
        ys = _signed(y)
        wx = x.values @ w[x.indices]
        if ys * wx > 0.0:
            continue
        mistakes += 1
        xx = x.squared_norm()
        if xx == 0.0:
            continue
        ww = w @ w
        if ww == 0.0:
            w[x.indices] += ys * x.values
            updates += 1
            continue
        denom = xx * ww - wx * wx
        if denom <= 0.0:
            # x parallel to w: the relaxed constraints are degenerate
            continue
        c = (xx * ww - ys * wx) / denom
        d = ww * (ys - wx) / denom
        w *= c
        w[x.indices] += d * x.values
        updates += 1
    return w, mistakes, updates, {}


def _train_alma(stream, dim, w, p=2.0, alpha=0.9, C=math.sqrt(2.0)):
    if p != 2.0:
        raise NotImplementedError("only the p = 2 norm is supported")
    B = 1.0 / alpha
    k = 1
    mistakes = updates = 0
    for x, y in stream:
        ys = _signed(y)
        norm = math.sqrt(x.squared_norm())
        if norm == 0.0:
            continue
        xv = x.values / norm
        margin = ys * (xv @ w[x.indices])
        if margin <= 0.0:
            mistakes += 1
        gamma = B * math.sqrt(p - 1.0) / math.sqrt(k)
        if margin <= (1.0 - alpha) * gamma:
            eta = C / (math.sqrt(p - 1.0) * math.sqrt(k))
            w[x.indices] += eta * ys * xv
            wn = math.sqrt(w @ w)
            if wn > 1.0:
                w /= wn
            k += 1
            updates += 1
    return w, mistakes, updates, {"k": k}


def _train_arow(stream, dim, w, r=1.0, full=None):
    if full is None:
        full = dim <= AROW_FULL_COVARIANCE_MAX_DIM
    sigma = np.eye(dim) if full else np.ones(dim)
    mistakes = updates = 0
    for x, y in stream:
        ys = _signed(y)
        idx, val = x.indices, x.values
        margin = ys * (val @ w[idx])
        if margin <= 0.0:
            mistakes += 1
        loss = max(0.0, 1.0 - margin)
        if loss <= 0.0:
            continue
        if full:
            sx = sigma[:, idx] @ val
            conf = val @ sx[idx]
            beta = 1.0 / (conf + r)
            w += (loss * beta * ys) * sx
            sigma -= beta * np.outer(sx, sx)
        else:
            s = sigma[idx]
            conf = val @ (s * val)
            beta = 1.0 / (conf + r)
            sx = s * val
            w[idx] += (loss * beta * ys) * sx
            sigma[idx] = s - beta * sx * sx
        updates += 1
    return w, mistakes, updates, {"sigma": sigma}


_TRAINERS = {
    ExpertKind.PERCEPTRON: _train_perceptron,
    ExpertKind.PA: _train_pa,
    ExpertKind.ROMMA: _train_romma,
    ExpertKind.ALMA: _train_alma,
    ExpertKind.AROW: _train_arow,
}


def train_expert(kind, stream, dim=None, params=None, initial=None, keep_auxiliary=False):
    """Train one expert with a single pass over ``stream`` in its given order.

    Parameters
    ----------
    kind : ExpertKind or str
    stream : sequence of (SparseVector, int)
        Instances with labels in {0, 1}.
    dim : int, optional
        Weight dimensionality; defaults to the instances' ``dim``.
    params : dict, optional
        Per-kind overrides of :data:`DEFAULT_PARAMS` (``C`` for PA, ``r`` for
        AROW, ``alpha``/``p``/``C`` for ALMA, ``full`` for AROW).
    initial : array_like, optional
        Starting weights; zero by default.
    """
    kind = ExpertKind.parse(kind) if not isinstance(kind, ExpertKind) else kind
    stream = list(stream)
    if not stream:
        raise ValueError("cannot train an expert on an empty stream")
    if dim is None:
        dim = stream[0][0].dim
    w = np.zeros(dim) if initial is None else np.array(initial, dtype=np.float64)
    if w.shape != (dim,):
        raise ValueError(f"initial weights have shape {w.shape}, expected ({dim},)")
    kwargs = dict(DEFAULT_PARAMS[kind])
    kwargs.update(params or {})
    w, mistakes, updates, aux = _TRAINERS[kind](stream, dim, w, **kwargs)
    return LinearExpert(
        w, kind, mistakes=mistakes, updates=updates, auxiliary=aux if keep_auxiliary else {}
    )


def train_pool(stream, dim=None, kinds=DEFAULT_KINDS, params=None):
    """Train the standard five-expert pool on one training split."""
    params = params or {}
    stream = list(stream)
    return ExpertPool(
        train_expert(k, stream, dim=dim, params=params.get(k)) for k in kinds
    )


# --------------------------------------------------------------------------
# model files


def format_model(pool):
    lines = [f"experts {len(pool)} {pool.dim}"]
    for e in pool:
        lines.append(e.kind.value)
        lines.append(" ".join(format(float(v), ".17g") for v in e.weights))
    return "\n".join(lines) + "\n"


def save_model(pool, path):
    with open(path, "w") as fh:
        fh.write(format_model(pool))


def parse_model(text):
    lines = text.splitlines()
    header = lines[0].split() if lines else []
    if len(header) != 3 or header[0] != "experts":
        raise ValueError("model file must start with 'experts N dim'")
    n, dim = int(header[1]), int(header[2])
    body = lines[1:]
    if len(body) < 2 * n:
        raise ValueError(f"model file declares {n} experts but has {len(body) // 2}")
    experts = []
    for i in range(n):
        kind = ExpertKind.parse(body[2 * i])
        w = np.array([float(t) for t in body[2 * i + 1].split()])
        if w.shape != (dim,):
            raise ValueError(f"expert {i} has {w.size} weights, expected {dim}")
        experts.append(LinearExpert(w, kind))
    return ExpertPool(experts)


def load_model(path):
    with open(path) as fh:
        return parse_model(fh.read())
