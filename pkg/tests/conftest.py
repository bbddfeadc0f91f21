import math

import numpy as np
import pytest

from pucc.core import make_instance, make_rng


def oracle_energy(centers, radii, R):
    """Plain double loop over the overlap terms, written independently of the kernels."""
    total = 0.0
    n = len(radii)
    for i in range(n):
        xi, yi = float(centers[i][0]), float(centers[i][1])
        for j in range(i + 1, n):
            d = math.hypot(xi - float(centers[j][0]), yi - float(centers[j][1]))
            total += max(0.0, radii[i] + radii[j] - d) ** 2
        total += max(0.0, math.hypot(xi, yi) + radii[i] - R) ** 2
    return total


def oracle_gradient(centers, radii, R, h=1e-6):
    """Central finite differences of :func:`oracle_energy`."""
    c = np.array(centers, dtype=float)
    g = np.zeros_like(c)
    for i in range(c.shape[0]):
        for a in range(2):
            cp, cm = c.copy(), c.copy()
            cp[i, a] += h
            cm[i, a] -= h
            g[i, a] = (oracle_energy(cp, radii, R) - oracle_energy(cm, radii, R)) / (2 * h)
    return g


def random_config(rng, n, spread=None):
    """Random radii in [0.5, 3] and centers crowded enough to overlap."""
    radii = rng.uniform(0.5, 3.0, n)
    spread = spread if spread is not None else 1.2 * math.sqrt(n) * radii.mean()
    centers = rng.uniform(-spread, spread, (n, 2))
    R = 0.8 * spread + radii.max()
    return make_instance(radii), centers, R


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def two_disks():
    return make_instance([1.0, 2.0], name="two")



_VERDICTS = {}


@pytest.fixture
def verdict():
    """Record a pass/fail outcome under a criterion label; parts of one criterion are merged."""

    def record(label, ok, detail=""):
        _VERDICTS.setdefault(label, []).append((bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_VERDICTS, key=lambda k: int(k.split()[0][1:])):
        parts = _VERDICTS[label]
        ok = all(p for p, _ in parts)
        details = "; ".join(d for _, d in parts if d)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {details}")
