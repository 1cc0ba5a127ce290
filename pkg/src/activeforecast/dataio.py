"""Sparse text datasets, label normalization and seeded splits/permutations.

Shuffling is a Fisher-Yates pass: position ``i`` is swapped with a uniform
draw from ``i .. n-1``. The draws come from NumPy's PCG64 generator seeded
through ``SeedSequence(seed)``, so a seed fixes the order on every platform.
"""

import gzip
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import SparseVector


class ParseError(ValueError):
    def __init__(self, message, line=None, source=None):
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line
        self.source = source


class LabelError(ValueError):
    """The raw labels do not form a binary set."""


@dataclass
class Dataset:
    """Instances with {0, 1} labels and a dataset-wide dimensionality.

    ``raw_labels`` keeps the labels as written in the source file and
    ``label_map`` records how they were normalized.
    """

    instances: list
    dim: int
    name: str = ""
    raw_labels: list = None
    label_map: dict = field(default_factory=dict)

    def __post_init__(self):
        for x, y in self.instances:
            if y not in (0, 1):
                raise LabelError(f"label {y!r} is not normalized")
            if x.dim != self.dim:
                raise ValueError(f"instance dim {x.dim} differs from dataset dim {self.dim}")

    def __len__(self):
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def __getitem__(self, i):
        return self.instances[i]

    @property
    def labels(self):
        return np.array([y for _, y in self.instances], dtype=np.int64)

    @property
    def vectors(self):
        return [x for x, _ in self.instances]

    def subset(self, order, name=None):
        """Dataset of the instances at ``order`` (in that order)."""
        order = list(order)
        raw = [self.raw_labels[i] for i in order] if self.raw_labels is not None else None
        return replace(
            self,
            instances=[self.instances[i] for i in order],
            raw_labels=raw,
            name=self.name if name is None else name,
        )


@dataclass(frozen=True)
class SplitSpec:
    seed: int
    train_fraction: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def label_normalize(raw_labels):
    """Map a two-valued label set to {0, 1}, smaller value to 0.

    Returns
    -------
    labels : list of int
    mapping : dict
        Raw value -> normalized label.
    """
    observed = sorted(set(raw_labels))
    if len(observed) != 2:
        raise LabelError(f"expected exactly two distinct labels, observed {observed}")
    mapping = {observed[0]: 0, observed[1]: 1}
    return [mapping[v] for v in raw_labels], mapping


def _parse_line(line, lineno, source):
    tokens = line.split()
    try:
        label = float(tokens[0])
    except ValueError:
        raise ParseError(f"bad label token {tokens[0]!r}", lineno, source) from None
    if not math.isfinite(label):
        raise ParseError(f"bad label token {tokens[0]!r}", lineno, source)
    pairs = []
    last = 0
    for tok in tokens[1:]:
        idx, sep, val = tok.partition(":")
        if not sep:
            raise ParseError(f"malformed feature {tok!r}", lineno, source)
        try:
            i = int(idx)
            v = float(val)
        except ValueError:
            raise ParseError(f"malformed feature {tok!r}", lineno, source) from None
        if i < 1:
            raise ParseError(f"feature index {i} is below 1", lineno, source)
        if i <= last:
            raise ParseError(f"feature index {i} does not increase", lineno, source)
        if not math.isfinite(v):
            raise ParseError(f"non-finite feature value {tok!r}", lineno, source)
        last = i
        if v != 0.0:
            pairs.append((i - 1, v))
    return label, pairs, last


def parse_sparse_text(lines, name="", source=None):
    """Parse ``<label> <idx>:<val> ...`` lines with 1-based indices.

    Indices become 0-based, ``dim`` is the largest index in the file, and
    labels are normalized with :func:`label_normalize`.
    """
    rows = []
    dim = 0
    for lineno, line in enumerate(lines, start=1):
        if isinstance(line, bytes):
            line = line.decode()
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        label, pairs, last = _parse_line(line, lineno, source)
        rows.append((label, pairs))
        dim = max(dim, last)
    if not rows:
        raise ParseError("no instances found", source=source)
    raw = [label for label, _ in rows]
    try:
        labels, mapping = label_normalize(raw)
    except LabelError as exc:
        raise ParseError(str(exc), source=source) from None
    instances = [(SparseVector.from_pairs(p, dim), y) for (_, p), y in zip(rows, labels)]
    return Dataset(instances, dim, name=name, raw_labels=raw, label_map=mapping)


def load_dataset(path, name=None):
    """Read a sparse text file, gzip-compressed or plain."""
    path = Path(path)
    with open(path, "rb") as fh:
        gz = fh.read(2) == b"\x1f\x8b"
    opener = gzip.open if gz else open
    with opener(path, "rt") as fh:
        return parse_sparse_text(fh, name=name or path.name.split(".")[0], source=str(path))


def _format_number(v):
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def format_sparse_text(dataset):
    """Serialize back to 1-based sparse text using the raw labels."""
    inverse = {v: k for k, v in dataset.label_map.items()}
    raw = dataset.raw_labels
    # dim is inferred from the largest written index; pin it with an explicit zero if needed
    pin = dataset.dim > 0 and not any(
        x.nnz and x.indices[-1] == dataset.dim - 1 for x, _ in dataset.instances
    )
    out = io.StringIO()
    for t, (x, y) in enumerate(dataset.instances):
        label = raw[t] if raw is not None else inverse.get(y, y)
        feats = " ".join(f"{i + 1}:{_format_number(v)}" for i, v in x.entries())
        if pin and t == 0:
            feats = (feats + " " if feats else "") + f"{dataset.dim}:0"
        out.write(_format_number(label) + (" " + feats if feats else "") + "\n")
    return out.getvalue()


def save_dataset(dataset, path):
    with open(path, "w") as fh:
        fh.write(format_sparse_text(dataset))


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def shuffled_order(n, seed):
    """Fisher-Yates permutation of ``range(n)`` for a given seed."""
    order = np.arange(n)
    if n < 2:
        return order
    picks = make_rng(seed).integers(np.arange(n - 1), n)
    for i, j in enumerate(picks.tolist()):
        order[i], order[j] = order[j], order[i]
    return order


def split(dataset, spec):
    """Seeded shuffle, then the first ``floor(f * n)`` instances train."""
    n = len(dataset)
    if n == 0:
        raise ValueError("cannot split an empty dataset")
    order = shuffled_order(n, spec.seed)
    cut = math.floor(spec.train_fraction * n)
    if cut == 0 or cut == n:
        raise ValueError(
            f"splitting {n} instances at fraction {spec.train_fraction} leaves one side empty"
        )
    train = dataset.subset(order[:cut], name=f"{dataset.name}-train")
    test = dataset.subset(order[cut:], name=f"{dataset.name}-test")
    return train, test


def permutation_seeds(count, base_seed):
    if count < 1:
        raise ValueError("need at least one permutation")
    return [base_seed + k for k in range(count)]


def permutations(test, count, base_seed):
    """``count`` reorderings of ``test``; run ``k`` is shuffled with ``base_seed + k``."""
    return [
        test.subset(shuffled_order(len(test), s))
        for s in permutation_seeds(count, base_seed)
    ]
