"""Iterated tabu search for the fixed-radius decision problem."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pucc.clock import WallClock
from pucc.energy import energy
from pucc.optimizer import minimize
from pucc.tabu import _improves, steepest_descent, swap_tabu_search


class InfeasibleRadiusError(ValueError):
    """The container cannot hold the largest disk."""


@dataclass
class DecideOutcome:
    feasible: bool
    pattern: np.ndarray
    energy: float
    restarts: int
    perturb_rounds: int
    elapsed: float
    max_violation: float = math.inf


def _uniform_in_disk(rng, radius, size):
    rho = radius * np.sqrt(rng.random(size))
    theta = 2.0 * np.pi * rng.random(size)
    return np.column_stack([rho * np.cos(theta), rho * np.sin(theta)])


def random_pattern(instance, R: float, rng) -> np.ndarray:
    """Centers drawn uniformly from the region where each disk lies inside the container."""
    room = np.maximum(0.0, R - instance.radii)
    return _uniform_in_disk(rng, room, instance.n)


def perturb_strength(n: int, params, rng) -> int:
    """Number of shift moves, uniform on ``1..max(1, n // 8)``."""
    return int(rng.integers(1, params.perturb_strength_max(n) + 1))


def shift_perturb(pattern, instance, R: float, params, rng, clock=None, strength=None) -> np.ndarray:
    """Relocate random disks to random in-container spots, re-minimizing after each.

    The number of shifts is drawn from ``1..max(1, n // 8)`` unless given.
    """
    n = instance.n
    if strength is None:
        strength = perturb_strength(n, params, rng)
    current = np.array(pattern, dtype=float)
    for _ in range(strength):
        i = int(rng.integers(n))
        room = max(0.0, R - float(instance.radii[i]))
        current[i] = _uniform_in_disk(rng, room, 1)[0]
        current = minimize(instance, R, current, params.optimizer, clock).pattern
    return current


def _check_radius(instance, R):
    if not R > instance.max_radius:
        raise InfeasibleRadiusError(
            f"container radius {R} cannot hold the largest disk (radius {instance.max_radius})"
        )


def _outcome(instance, R, params, pattern, restarts, rounds, clock):
    rep = energy(pattern, instance, R)
    return DecideOutcome(
        feasible=rep.max_violation <= params.feasibility_tol,
        pattern=pattern,
        energy=rep.energy,
        restarts=restarts,
        perturb_rounds=rounds,
        elapsed=clock.elapsed(),
        max_violation=rep.max_violation,
    )


def its_decide(instance, R: float, params, budget: float, rng, trace=None, clock=None) -> DecideOutcome:
    """Search for a feasible pattern at container radius ``R`` within ``budget`` seconds.

    Multi-start iterated local search: each restart scatters the disks at
    random, minimizes, and runs the swap tabu search; it then repeatedly
    shift-perturbs and re-runs the tabu search, accepting the result when it
    is no worse. A restart ends after ``perturb_depth(n)`` rounds without
    improving its own best. The budget is checked between rounds only.
    """
    _check_radius(instance, R)
    if not budget > 0:
        raise ValueError("budget must be positive")
    clock = clock or WallClock()
    start_time = clock.elapsed()
    n = instance.n
    depth = params.perturb_depth(n)
    best, best_e = None, math.inf
    restarts = rounds = 0
    while clock.elapsed() - start_time < budget:
        restarts += 1
        if trace is not None:
            trace.restart, trace.round = restarts, 0
        X = minimize(instance, R, random_pattern(instance, R, rng), params.optimizer, clock).pattern
        X = swap_tabu_search(X, instance, R, params, rng, trace, clock)
        e_x = energy(X, instance, R).energy
        if e_x < best_e:
            best, best_e = X, e_x
        if trace is not None:
            trace.record(0, "restart", e_x, best_e)
        if energy(X, instance, R).max_violation <= params.feasibility_tol:
            break
        stall = 0
        local_best = e_x
        found = False
        while stall < depth and clock.elapsed() - start_time < budget:
            rounds += 1
            if trace is not None:
                trace.round += 1
            Y = shift_perturb(X, instance, R, params, rng, clock)
            Y = swap_tabu_search(Y, instance, R, params, rng, trace, clock)
            rep = energy(Y, instance, R)
            accepted = rep.energy <= e_x
            if accepted:
                X, e_x = Y, rep.energy
            if _improves(rep.energy, local_best):
                local_best = rep.energy
                stall = 0
            else:
                stall += 1
            if rep.energy < best_e:
                best, best_e = Y, rep.energy
            if trace is not None:
                trace.record(0, "accept" if accepted else "reject", rep.energy, best_e)
            if rep.max_violation <= params.feasibility_tol:
                best, found = Y, True
                break
        if found:
            break
    if best is None:
        best = random_pattern(instance, R, rng)
    return _outcome(instance, R, params, best, restarts, rounds, clock)


def multistart_decide(instance, R: float, params, budget: float, rng, trace=None, clock=None,
                      local_search="tabu") -> DecideOutcome:
    """Repeated independent local searches from fresh random patterns.

    ``local_search`` is ``"tabu"`` (multistart tabu search) or ``"descent"``
    (multistart steepest descent).
    """
    _check_radius(instance, R)
    if local_search not in ("tabu", "descent"):
        raise ValueError(f"unknown local search {local_search!r}")
    clock = clock or WallClock()
    start_time = clock.elapsed()
    best, best_e = None, math.inf
    restarts = 0
    while clock.elapsed() - start_time < budget:
        restarts += 1
        if trace is not None:
            trace.restart, trace.round = restarts, 0
        X = minimize(instance, R, random_pattern(instance, R, rng), params.optimizer, clock).pattern
        if local_search == "tabu":
            X = swap_tabu_search(X, instance, R, params, rng, trace, clock)
        else:
            X = steepest_descent(X, instance, R, params, trace, clock, rng)
        rep = energy(X, instance, R)
        if rep.energy < best_e:
            best, best_e = X, rep.energy
        if trace is not None:
            trace.record(0, "restart", rep.energy, best_e)
        if rep.max_violation <= params.feasibility_tol:
            best = X
            break
    if best is None:
        best = random_pattern(instance, R, rng)
    return _outcome(instance, R, params, best, restarts, 0, clock)
