"""Overlap penalty energy, its gradient and feasibility measurement.

The energy of a pattern at container radius ``R`` is the sum of squared
overlap depths over all disk pairs plus the squared protrusion of every disk
through the container wall. It is zero exactly on feasible packings.

Kernels work on a flat coordinate vector ``x = (x0, y0, x1, y1, ...)``, which
is the C-order ravel of an ``(n, 2)`` centers array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

_GOLDEN = 0.6180339887498949
_SILVER = 0.4142135623730951


@numba.njit(cache=True)
def _pair_direction(i, j):
    # fixed unit vector for coincident centers, a function of the indices only
    t = (i + 1) * _GOLDEN + (j + 1) * _SILVER
    theta = 2.0 * math.pi * (t - math.floor(t))
    return math.cos(theta), math.sin(theta)


@numba.njit(cache=True)
def _origin_direction(i):
    t = (i + 1) * _GOLDEN
    theta = 2.0 * math.pi * (t - math.floor(t))
    return math.cos(theta), math.sin(theta)


@numba.njit(cache=True)
def energy_and_gradient(x, radii, R):
    """Energy and its gradient at flat coordinates ``x``.

    Inactive terms contribute nothing, so at a tangency the gradient is the
    one-sided derivative from the feasible side.
    """
    grad = np.empty(x.shape[0])
    f = energy_gradient_into(x, radii, R, grad)
    return f, grad


@numba.njit(cache=True)
def energy_gradient_into(x, radii, R, grad):
    """Return the energy at ``x`` and overwrite ``grad`` with its gradient."""
    n = radii.shape[0]
    grad[:] = 0.0
    f = 0.0
    for i in range(n):
        xi = x[2 * i]
        yi = x[2 * i + 1]
        ri = radii[i]
        for j in range(i + 1, n):
            dx = xi - x[2 * j]
            dy = yi - x[2 * j + 1]
            s = ri + radii[j]
            d2 = dx * dx + dy * dy
            if d2 < s * s:
                d = math.sqrt(d2)
                o = s - d
                f += o * o
                if d > 0.0:
                    ux = dx / d
                    uy = dy / d
                else:
                    ux, uy = _pair_direction(i, j)
                gx = 2.0 * o * ux
                gy = 2.0 * o * uy
                grad[2 * i] -= gx
                grad[2 * i + 1] -= gy
                grad[2 * j] += gx
                grad[2 * j + 1] += gy
        limit = R - ri
        c2 = xi * xi + yi * yi
        if limit < 0.0 or c2 > limit * limit:
            c = math.sqrt(c2)
            o = c + ri - R
            f += o * o
            if c > 0.0:
                ux = xi / c
                uy = yi / c
            else:
                ux, uy = _origin_direction(i)
            grad[2 * i] += 2.0 * o * ux
            grad[2 * i + 1] += 2.0 * o * uy
    return f


@numba.njit(cache=True)
def energy_and_violation(x, radii, R):
    n = radii.shape[0]
    f = 0.0
    worst = 0.0
    for i in range(n):
        xi = x[2 * i]
        yi = x[2 * i + 1]
        for j in range(i + 1, n):
            dx = xi - x[2 * j]
            dy = yi - x[2 * j + 1]
            o = radii[i] + radii[j] - math.sqrt(dx * dx + dy * dy)
            if o > 0.0:
                f += o * o
                if o > worst:
                    worst = o
        o = math.sqrt(xi * xi + yi * yi) + radii[i] - R
        if o > 0.0:
            f += o * o
            if o > worst:
                worst = o
    return f, worst


@dataclass(frozen=True)
class EnergyReport:
    energy: float
    max_violation: float


def _flat(pattern, instance) -> np.ndarray:
    centers = np.asarray(pattern, dtype=float)
    if centers.shape != (instance.n, 2):
        raise ValueError(f"pattern shape {centers.shape} does not match n={instance.n}")
    return np.ascontiguousarray(centers).reshape(-1)


def _check_index(i, n):
    if not 0 <= i < n:
        raise IndexError(f"disk index {i} out of range for n={n}")


def pair_overlap(pattern, instance, i: int, j: int) -> float:
    """Overlap depth ``max(0, r_i + r_j - |c_i - c_j|)`` of disks ``i`` and ``j``."""
    n = instance.n
    _check_index(i, n)
    _check_index(j, n)
    if i == j:
        raise IndexError("pair overlap needs two distinct disks")
    c = np.asarray(pattern, dtype=float)
    d = math.hypot(c[i, 0] - c[j, 0], c[i, 1] - c[j, 1])
    return max(0.0, float(instance.radii[i] + instance.radii[j]) - d)


def container_overlap(pattern, instance, R: float, i: int) -> float:
    """Protrusion ``max(0, |c_i| + r_i - R)`` of disk ``i`` through the container."""
    _check_index(i, instance.n)
    c = np.asarray(pattern, dtype=float)
    return max(0.0, math.hypot(c[i, 0], c[i, 1]) + float(instance.radii[i]) - R)


def energy(pattern, instance, R: float) -> EnergyReport:
    if not R > 0:
        raise ValueError(f"container radius must be positive, got {R}")
    f, worst = energy_and_violation(_flat(pattern, instance), instance.radii, float(R))
    return EnergyReport(energy=f, max_violation=worst)


def energy_gradient(pattern, instance, R: float) -> np.ndarray:
    """Gradient of the energy as an ``(n, 2)`` array matching ``pattern``."""
    if not R > 0:
        raise ValueError(f"container radius must be positive, got {R}")
    _, g = energy_and_gradient(_flat(pattern, instance), instance.radii, float(R))
    return g.reshape(-1, 2)


def max_violation(pattern, instance, R: float) -> float:
    return energy(pattern, instance, R).max_violation


def is_feasible(pattern, instance, R: float, tol: float = 1e-9) -> bool:
    return max_violation(pattern, instance, R) <= tol
