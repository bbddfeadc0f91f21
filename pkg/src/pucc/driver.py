"""Smallest-container search as a sequence of decision problems with descending radius."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from pucc.clock import WallClock
from pucc.core import Solution, SolverParams, make_rng
from pucc.energy import energy
from pucc.its import its_decide
from pucc.optimizer import minimize


class InfeasibleStartError(ValueError):
    """Tightening was asked to start from an infeasible pattern."""


@dataclass(frozen=True)
class HistoryEntry:
    target_radius: float
    feasible: bool
    radius: float  # tightened radius on success, nan otherwise
    elapsed: float
    time_slice: float


@dataclass
class SolveRun:
    best: Solution
    history: list = field(default_factory=list)
    params: SolverParams = None
    seed: Optional[int] = None
    time_to_best: float = 0.0

    @property
    def accepted_radii(self) -> list:
        return [h.radius for h in self.history if h.feasible]


def initial_radius(instance) -> float:
    return float(np.sum(instance.radii))


def lineup_pattern(instance) -> np.ndarray:
    """Disks in a row along a diameter, consecutive disks tangent, ends touching the wall."""
    r = instance.radii
    x = -np.sum(r) + 2.0 * np.concatenate([[0.0], np.cumsum(r)[:-1]]) + r
    return np.column_stack([x, np.zeros_like(x)])


def lower_bound(instance) -> float:
    """A radius no feasible container can beat.

    The largest of: the biggest disk, the area bound ``sqrt(sum r_i^2)``, and
    the two biggest radii together (two disks both inside the container and
    apart by ``r_i + r_j`` span at least that much of a diameter).
    """
    r = instance.radii
    bound = max(instance.max_radius, float(np.sqrt(np.sum(r**2))))
    if instance.n >= 2:
        bound = max(bound, float(r[-1] + r[-2]))
    return bound


def tighten(pattern, instance, R: float, params: SolverParams = None, clock=None):
    """Shrink the container by bisection while locally repairing the pattern.

    Each probe re-minimizes the last feasible pattern at the midpoint radius
    and keeps it when the result is feasible. Returns ``(pattern, radius)``
    with ``radius <= R``.
    """
    params = params or SolverParams()
    tol = params.feasibility_tol
    best = np.array(pattern, dtype=float)
    if energy(best, instance, R).max_violation > tol:
        raise InfeasibleStartError(f"pattern is not feasible at R={R}")
    lo, hi = lower_bound(instance), float(R)
    for _ in range(params.tighten_max_probes):
        if hi - lo <= params.tighten_rel_width * hi:
            break
        mid = 0.5 * (lo + hi)
        res = minimize(instance, mid, best, params.optimizer, clock)
        if energy(res.pattern, instance, mid).max_violation <= tol:
            best, hi = res.pattern, mid
        else:
            lo = mid
    return best, hi


def solve(
    instance,
    params: SolverParams = None,
    budget: float = 10.0,
    seed=None,
    *,
    rng=None,
    clock=None,
    trace=None,
    decide: Callable = its_decide,
    target_radius: Optional[float] = None,
) -> SolveRun:
    """Find the smallest container radius reachable within ``budget`` seconds.

    Starts from the in-line witness at the sum of radii, then repeatedly asks
    ``decide`` for a feasible pattern at ``R_best * (1 - delta)``. Success
    tightens the new pattern and resets ``delta``; failure halves it. The
    time slice given to ``decide`` starts at ``params.slice_min`` and doubles
    with each consecutive failure, up to ``params.slice_max``. Stops on budget
    exhaustion, after ``params.max_stall`` failures at the smallest
    ``delta``, once ``target_radius`` is reached, or when the radius meets
    :func:`lower_bound` and is therefore optimal.
    """
    if not budget > 0:
        raise ValueError("budget must be positive")
    params = params or SolverParams()
    rng = rng if rng is not None else make_rng(seed)
    clock = clock or WallClock()
    t0 = clock.elapsed()

    def elapsed():
        return clock.elapsed() - t0

    X, R = tighten(lineup_pattern(instance), instance, initial_radius(instance), params, clock)
    history = [HistoryEntry(initial_radius(instance), True, R, elapsed(), 0.0)]
    best_X, best_R = X, R
    time_to_best = elapsed()
    delta = params.shrink_initial
    failures = 0
    floor_failures = 0
    bound = lower_bound(instance)
    while target_radius is None or best_R > target_radius:
        remaining = budget - elapsed()
        if remaining <= 0 or best_R - bound <= params.tighten_rel_width * best_R:
            break
        R_t = max(best_R * (1.0 - delta), bound)
        time_slice = min(remaining, params.slice_min * 2.0**failures, params.slice_max)
        out = decide(instance, R_t, params, time_slice, rng, trace=trace, clock=clock)
        if out.feasible:
            best_X, best_R = tighten(out.pattern, instance, R_t, params, clock)
            time_to_best = elapsed()
            history.append(HistoryEntry(R_t, True, best_R, time_to_best, time_slice))
            delta = params.shrink_initial
            failures = floor_failures = 0
        else:
            history.append(HistoryEntry(R_t, False, math.nan, elapsed(), time_slice))
            failures += 1
            if delta <= params.shrink_floor:
                floor_failures += 1
                if floor_failures >= params.max_stall:
                    break
            delta = max(0.5 * delta, params.shrink_floor)

    rep = energy(best_X, instance, best_R)
    assert rep.max_violation <= params.feasibility_tol
    assert best_R >= bound - params.feasibility_tol
    best = Solution(best_R, best_X, rep.max_violation, instance.name)
    return SolveRun(best, history, params, seed, time_to_best)
