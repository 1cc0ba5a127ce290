from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

_criteria = []


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_criteria, key=lambda c: str(c[0])):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def criterion():
    """Record a pass/fail line for the acceptance summary, then assert it."""

    def record(number, ok, detail):
        _criteria.append((number, bool(ok), detail))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {number}: {detail}"

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_stream(rng, T, N, agreement=0.5):
    """Expert predictions mixing near-consensus rounds with arbitrary ones."""
    F = rng.uniform(0, 1, size=(T, N))
    calm = rng.random(T) < agreement
    centre = rng.uniform(0, 1, size=T)
    width = rng.uniform(0, 0.3, size=T)
    near = np.clip(centre[:, None] + width[:, None] * (rng.random((T, N)) - 0.5), 0, 1)
    F[calm] = near[calm]
    labels = (rng.random(T) < 0.5).astype(np.int64)
    return F, labels
