import math

import numpy as np
import pytest

from pucc.clock import WallClock, WorkClock
from pucc.core import SolverParams, Trace, contest_instance, make_instance, make_rng
from pucc.energy import container_overlap, energy
from pucc.io import verify_solution
from pucc.core import Solution
from pucc.its import (
    InfeasibleRadiusError,
    its_decide,
    multistart_decide,
    perturb_strength,
    random_pattern,
    shift_perturb,
)
from pucc.optimizer import minimize

PARAMS = SolverParams()
OUTER_EVENTS = {"restart", "accept", "reject"}


def test_random_pattern_single_disk():
    inst = make_instance([1.0])
    rng = make_rng(0)
    for _ in range(200):
        c = random_pattern(inst, 3.0, rng)
        assert np.hypot(*c[0]) <= 2.0


def test_random_pattern_inside_container():
    inst = contest_instance(12)
    rng = make_rng(1)
    for _ in range(50):
        X = random_pattern(inst, 20.0, rng)
        assert all(container_overlap(X, inst, 20.0, i) == 0.0 for i in range(inst.n))


def test_random_pattern_oversized_disk_at_origin():
    inst = make_instance([1.0, 5.0])
    X = random_pattern(inst, 3.0, make_rng(2))
    assert np.array_equal(X[1], [0.0, 0.0])


def test_random_pattern_mean_at_origin():
    inst = make_instance([1.0])
    rng = make_rng(3)
    draws = np.array([random_pattern(inst, 3.0, rng)[0] for _ in range(10_000)])
    # uniform on a disk of radius 2: each coordinate has variance 2^2 / 4
    se = math.sqrt(1.0 / len(draws))
    assert np.all(np.abs(draws.mean(axis=0)) <= 3 * se)
    assert np.max(np.hypot(draws[:, 0], draws[:, 1])) <= 2.0


def test_perturb_strength_ranges():
    rng = make_rng(4)
    assert {perturb_strength(8, PARAMS, rng) for _ in range(200)} == {1}
    assert {perturb_strength(40, PARAMS, rng) for _ in range(500)} == {1, 2, 3, 4, 5}


def test_shift_perturb_returns_local_minimum():
    inst = contest_instance(8)
    R = 16.3
    rng = make_rng(5)
    X = minimize(inst, R, random_pattern(inst, R, rng)).pattern
    for _ in range(10):
        Y = shift_perturb(X, inst, R, PARAMS, rng)
        e = energy(Y, inst, R).energy
        again = minimize(inst, R, Y).energy
        assert abs(e - again) <= 1e-15 * e


def test_shift_perturb_moves_at_most_strength_disks_before_minimizing():
    inst = contest_instance(16)
    R = 1e3  # huge container: minimization leaves a non-overlapping pattern alone
    X = np.column_stack([np.arange(16) * 40.0 - 300.0, np.zeros(16)])
    Y = shift_perturb(X, inst, R, PARAMS, make_rng(6), strength=2)
    assert 1 <= np.sum(np.any(X != Y, axis=1)) <= 2


def test_its_rejects_radius_at_or_below_largest_disk():
    inst = make_instance([1.0, 2.0])
    for R in (1.5, 2.0):
        with pytest.raises(InfeasibleRadiusError):
            its_decide(inst, R, PARAMS, 1.0, make_rng(0))
        with pytest.raises(InfeasibleRadiusError):
            multistart_decide(inst, R, PARAMS, 1.0, make_rng(0))


def test_its_two_disks_below_optimum_is_infeasible():
    inst = make_instance([1.0, 2.0])
    out = its_decide(inst, 2.5, PARAMS, 0.2, make_rng(0), clock=WorkClock())
    assert not out.feasible
    assert out.energy > 0
    assert out.restarts >= 1


def test_its_contest5_feasible():
    inst = contest_instance(5)
    clock = WallClock()
    out = its_decide(inst, 9.00139775, PARAMS, 10.0, make_rng(0), clock=clock)
    assert out.feasible
    assert out.elapsed < 1.0


def _check_outcome(inst, R, out):
    rep = energy(out.pattern, inst, R)
    assert out.feasible == (rep.max_violation <= PARAMS.feasibility_tol)
    assert out.energy == rep.energy
    if out.feasible:
        assert verify_solution(inst, Solution(R, out.pattern, 0.0)).feasible


@pytest.mark.parametrize("seed", range(3))
def test_its_contest11(seed):
    inst = contest_instance(11)
    R = 24.96063429
    out = its_decide(inst, R, PARAMS, 120.0, make_rng(seed))
    assert out.feasible
    _check_outcome(inst, R, out)


@pytest.mark.parametrize("seed", range(3))
def test_its_trace_invariants(seed):
    inst = contest_instance(7)
    R = 13.40  # below the best known 13.4621: never feasible
    trace = Trace()
    out = its_decide(inst, R, PARAMS, 0.5, make_rng(seed), trace=trace, clock=WorkClock())
    assert not out.feasible
    _check_outcome(inst, R, out)
    outer = [r for r in trace if r.event in OUTER_EVENTS]
    assert outer and outer[0].event == "restart"
    best = [r.best_energy for r in outer]
    assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
    assert best[-1] == out.energy
    # accepted energies never rise within a restart
    current = {}
    for r in outer:
        if r.event == "restart":
            current[r.restart] = r.energy
        elif r.event == "accept":
            assert r.energy <= current[r.restart]
            current[r.restart] = r.energy
        else:
            assert r.energy > current[r.restart]


def test_restart_ends_after_perturb_depth_without_improvement():
    inst = contest_instance(5)
    R = 8.9  # infeasible; small n keeps restarts short
    trace = Trace()
    its_decide(inst, R, PARAMS, 2.0, make_rng(1), trace=trace, clock=WorkClock())
    outer = [r for r in trace if r.event in OUTER_EVENTS]
    restarts = sorted({r.restart for r in outer})
    assert len(restarts) >= 2
    depth = PARAMS.perturb_depth(inst.n)
    for k in restarts[:-1]:
        rows = [r for r in outer if r.restart == k]
        local_best, stall = rows[0].energy, 0
        for r in rows[1:]:
            if r.energy < local_best - 1e-10 * local_best:
                local_best, stall = r.energy, 0
            else:
                stall += 1
        assert stall == depth


def test_budget_is_checked_between_rounds():
    inst = contest_instance(9)
    R = 19.0
    budget = 0.5
    clock = WallClock()
    trace = Trace()
    out = its_decide(inst, R, PARAMS, budget, make_rng(2), trace=trace, clock=clock)
    # a round here takes well under a second on any machine that runs the suite
    assert budget <= out.elapsed <= budget + 1.0


def test_its_deterministic_under_work_clock():
    inst = contest_instance(8)
    runs = [its_decide(inst, 16.2, PARAMS, 0.3, make_rng(9), clock=WorkClock()) for _ in range(2)]
    assert np.array_equal(runs[0].pattern, runs[1].pattern)
    assert runs[0].restarts == runs[1].restarts
    assert runs[0].perturb_rounds == runs[1].perturb_rounds


@pytest.mark.parametrize("local_search", ["tabu", "descent"])
def test_multistart(local_search):
    inst = contest_instance(6)
    R = 11.06
    out = multistart_decide(inst, R, PARAMS, 5.0, make_rng(3), local_search=local_search)
    _check_outcome(inst, R, out)
    assert out.perturb_rounds == 0
    with pytest.raises(ValueError):
        multistart_decide(inst, R, PARAMS, 1.0, make_rng(3), local_search="annealing")
