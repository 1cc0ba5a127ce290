"""Shared value types and scalar primitives.

Everything downstream predicts on the unit interval and scores with the
absolute loss, so the clipping projection and the loss live here together
with the sparse instance type.
"""

import math
from dataclasses import dataclass

import numpy as np


class DimensionMismatchError(ValueError):
    """A sparse instance references a coordinate the weight vector lacks."""


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Immutable sparse instance with 0-based, strictly increasing indices.

    Zero values are never stored. ``dim`` is the dataset-wide dimensionality
    and bounds every index.
    """

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        val = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if idx.shape != val.shape:
            raise ValueError("indices and values must have the same length")
        if idx.size:
            if idx[0] < 0:
                raise ValueError("indices must be non-negative")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")
            if idx[-1] >= self.dim:
                raise ValueError(f"index {idx[-1]} out of range for dim {self.dim}")
            if np.any(val == 0.0):
                raise ValueError("explicit zeros are not stored")
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "dim", int(self.dim))

    @classmethod
    def from_pairs(cls, pairs, dim):
        """Build from ``(index, value)`` pairs; zero values are dropped."""
        pairs = [(i, v) for i, v in pairs if v != 0.0]
        if not pairs:
            return cls(np.empty(0, np.int64), np.empty(0), dim)
        idx, val = zip(*pairs)
        return cls(np.array(idx), np.array(val, dtype=np.float64), dim)

    @classmethod
    def from_dense(cls, x):
        x = np.asarray(x, dtype=np.float64)
        nz = np.flatnonzero(x)
        return cls(nz, x[nz], x.size)

    @property
    def nnz(self):
        return self.indices.size

    def with_dim(self, dim):
        return SparseVector(self.indices, self.values, dim)

    def to_dense(self):
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def entries(self):
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def squared_norm(self):
        return float(self.values @ self.values)

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.dim, self.indices.tobytes(), self.values.tobytes()))

    def __repr__(self):
        return f"SparseVector({self.entries()}, dim={self.dim})"


def clip_unit(v):
    """Project a real onto [0, 1]."""
    v = float(v)
    if not math.isfinite(v):
        raise FloatingPointError(f"non-finite value {v!r} reached the unit projection")
    return max(0.0, min(1.0, v))


def abs_loss(p, y):
    """Absolute loss |p - y| of a unit prediction against a {0, 1} outcome."""
    if y not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {y!r}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"prediction {p!r} is outside [0, 1]")
    return abs(p - y)


def sparse_dot(x, u):
    """Inner product of a sparse instance with a dense weight vector."""
    u = np.asarray(u)
    if x.nnz and x.indices[-1] >= u.shape[0]:
        raise DimensionMismatchError(
            f"instance index {x.indices[-1]} exceeds weight length {u.shape[0]}"
        )
    return float(x.values @ u[x.indices])
