"""Swap-based tabu search over local minima, and the steepest-descent baseline.

A swap move exchanges the centers of two disks that are adjacent in the
sorted radius order and then re-minimizes the energy. Only pairs with
different radii are candidates, so there are at most ``n - 1`` moves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pucc.energy import energy
from pucc.optimizer import MinimizeResult, minimize

# relative margin below which a lower energy does not count as an improvement
IMPROVEMENT_RTOL = 1e-10


def _improves(e: float, best: float) -> bool:
    return e < best - IMPROVEMENT_RTOL * best


@dataclass(frozen=True)
class SwapMove:
    k: int


@dataclass
class TabuState:
    tabu_until: np.ndarray
    best_pattern: np.ndarray
    best_energy: float
    iteration: int = 0
    stall_count: int = 0
    # (iteration, move index, how it was admitted, tenure drawn)
    audit: list = field(default_factory=list)

    @property
    def tenure_remaining(self) -> np.ndarray:
        return np.maximum(self.tabu_until - self.iteration, 0)

    def is_tabu(self, k: int) -> bool:
        return self.tabu_until[k] > self.iteration


def candidate_moves(instance) -> list[SwapMove]:
    r = instance.radii
    return [SwapMove(k) for k in range(instance.n - 1) if r[k] != r[k + 1]]


def swap_move(pattern, instance, R: float, move: SwapMove, settings=None, clock=None) -> MinimizeResult:
    """Exchange the centers of sorted disks ``k`` and ``k+1`` and re-minimize."""
    k = move.k if isinstance(move, SwapMove) else int(move)
    if not 0 <= k <= instance.n - 2:
        raise IndexError(f"swap move {k} out of range for n={instance.n}")
    swapped = np.array(pattern, dtype=float)
    swapped[[k, k + 1]] = swapped[[k + 1, k]]
    return minimize(instance, R, swapped, settings, clock)


def _feasible(pattern, instance, R, params) -> bool:
    return energy(pattern, instance, R).max_violation <= params.feasibility_tol


def _pick(rng, energies: np.ndarray, allowed: np.ndarray) -> int:
    best = energies[allowed].min()
    ties = np.flatnonzero(allowed & (energies <= best + IMPROVEMENT_RTOL * best))
    return int(ties[0]) if len(ties) == 1 else int(rng.choice(ties))


def swap_tabu_search(start, instance, R: float, params, rng, trace=None, clock=None, state_out=None):
    """Tabu search in the restricted swap neighborhood, starting at a local minimum.

    Returns the best pattern found. Each iteration evaluates every candidate,
    moves to the best admissible one (non-tabu, or tabu but better than the
    best found), and forbids that move for a random tenure. The search ends
    after ``tabu_depth(n)`` iterations without improving the best, or as soon
    as a feasible pattern is found.
    """
    moves = candidate_moves(instance)
    current = np.array(start, dtype=float)
    cur_energy = energy(current, instance, R).energy
    state = TabuState(
        tabu_until=np.zeros(instance.n - 1, dtype=int) if instance.n > 1 else np.zeros(0, dtype=int),
        best_pattern=current.copy(),
        best_energy=cur_energy,
    )
    if state_out is not None:
        state_out.append(state)
    if not moves:
        return current
    if _feasible(current, instance, R, params):
        if trace is not None:
            trace.record(0, "tabu-feasible", cur_energy, cur_energy)
        return current
    settings = params.optimizer
    depth = params.tabu_depth(instance.n)
    ks = np.array([m.k for m in moves])

    while state.stall_count < depth:
        results = [swap_move(current, instance, R, m, settings, clock) for m in moves]
        energies = np.array([r.energy for r in results])
        tabu = state.tabu_until[ks] > state.iteration
        admissible = ~tabu | np.array([_improves(e, state.best_energy) for e in energies])
        if admissible.any():
            choice = _pick(rng, energies, admissible)
            admitted = "aspiration" if tabu[choice] else "free"
        else:
            # everything tabu and nothing aspirates: take the move released soonest
            soonest = state.tabu_until[ks] == state.tabu_until[ks].min()
            choice = _pick(rng, energies, soonest)
            admitted = "soonest"
        k = int(ks[choice])
        current = results[choice].pattern
        cur_energy = results[choice].energy
        state.iteration += 1
        tenure = params.tabu_tenure(instance.n, rng)
        state.tabu_until[k] = state.iteration + tenure
        state.audit.append((state.iteration, k, admitted, tenure))

        if _improves(cur_energy, state.best_energy):
            state.best_pattern = current.copy()
            state.best_energy = cur_energy
            state.stall_count = 0
        else:
            state.stall_count += 1
        if trace is not None:
            event = f"swap {k}" + ("" if admitted == "free" else f" {admitted}")
            trace.record(state.iteration, event, cur_energy, state.best_energy)
        if _feasible(current, instance, R, params):
            state.best_pattern = current.copy()
            state.best_energy = cur_energy
            if trace is not None:
                trace.record(state.iteration, "tabu-feasible", cur_energy, cur_energy)
            break
    return state.best_pattern


def steepest_descent(start, instance, R: float, params, trace=None, clock=None, rng=None):
    """Move to the best swap neighbor while it is no worse than the current pattern.

    Stops when every neighbor is worse, on feasibility, or after ``n``
    consecutive accepted moves without strict improvement. Ties between
    equally good neighbors go to the lowest move index unless ``rng`` is given.
    """
    moves = candidate_moves(instance)
    current = np.array(start, dtype=float)
    cur_energy = energy(current, instance, R).energy
    if not moves or _feasible(current, instance, R, params):
        return current
    settings = params.optimizer
    flat_steps = 0
    step = 0
    while True:
        results = [swap_move(current, instance, R, m, settings, clock) for m in moves]
        energies = np.array([r.energy for r in results])
        if rng is None:
            choice = int(np.argmin(energies))
        else:
            choice = _pick(rng, energies, np.ones(len(moves), dtype=bool))
        if energies[choice] > cur_energy:
            break
        flat_steps = 0 if _improves(energies[choice], cur_energy) else flat_steps + 1
        current = results[choice].pattern
        cur_energy = energies[choice]
        step += 1
        if trace is not None:
            trace.record(step, f"swap {moves[choice].k}", cur_energy, cur_energy)
        if _feasible(current, instance, R, params) or flat_steps >= instance.n:
            break
    return current
