"""Scikit-learn style wrappers.

The radii play the role of ``X`` (one sample per disk, a single feature) and
the fitted embedding is the ``(n, 2)`` array of centers, in the order the
radii were given, as with manifold learners that only offer ``fit_transform``.
"""

from __future__ import annotations

import functools

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from pucc.clock import WallClock, WorkClock
from pucc.core import Solution, SolverParams, make_instance, make_rng
from pucc.driver import solve
from pucc.its import its_decide, multistart_decide

_DECIDERS = {
    "its": its_decide,
    "mts": functools.partial(multistart_decide, local_search="tabu"),
    "sd": functools.partial(multistart_decide, local_search="descent"),
}


def check_radii(X) -> np.ndarray:
    """Validate radii given as shape ``(n,)`` or ``(n, 1)``; return them flat."""
    arr = check_array(X, ensure_2d=False, dtype=np.float64, input_name="X")
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected one radius per row, got shape {arr.shape}")
        arr = arr[:, 0]
    if np.any(arr <= 0):
        raise ValueError("radii must be strictly positive")
    return arr


def _check_random_state(random_state):
    if isinstance(random_state, np.random.Generator):
        return random_state
    return make_rng(random_state)


class _PackingBase(TransformerMixin, BaseEstimator):
    def fit_transform(self, X, y=None):
        return self.fit(X, y).centers_

    def transform(self, X):
        check_is_fitted(self, "centers_")
        radii = check_radii(X)
        if not np.array_equal(np.sort(radii), self.instance_.radii):
            raise ValueError("transform only accepts the radii the estimator was fitted on")
        # same multiset; map fitted centers onto the order given here
        sorted_centers = self.solution_.pattern
        return sorted_centers[np.argsort(np.argsort(radii, kind="stable"), kind="stable")]

    def _params(self) -> SolverParams:
        return SolverParams(feasibility_tol=self.feasibility_tol)

    def _clock(self):
        return WorkClock() if self.deterministic else WallClock()


class CirclePacker(_PackingBase):
    """Smallest enclosing container for a set of disks.

    Parameters
    ----------
    time_limit : float
        Search budget in seconds (virtual seconds when ``deterministic``).
    strategy : {"its", "mts", "sd"}
        Decision procedure used at each trial radius.
    target_radius : float or None
        Stop as soon as the container radius is at most this value.
    random_state : int, Generator or None
    deterministic : bool
        Measure the budget in counted work so equal seeds give equal results.

    Attributes
    ----------
    radius_ : float
    centers_ : ndarray of shape (n, 2)
        Disk centers in the order the radii were given.
    solution_ : Solution
        Best packing, in sorted-radius order.
    run_ : SolveRun
    """

    def __init__(
        self,
        time_limit=10.0,
        strategy="its",
        target_radius=None,
        feasibility_tol=1e-9,
        random_state=None,
        deterministic=False,
    ):
        self.time_limit = time_limit
        self.strategy = strategy
        self.target_radius = target_radius
        self.feasibility_tol = feasibility_tol
        self.random_state = random_state
        self.deterministic = deterministic

    def fit(self, X, y=None):
        if self.strategy not in _DECIDERS:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        self.instance_ = make_instance(check_radii(X))
        self.run_ = solve(
            self.instance_,
            self._params(),
            self.time_limit,
            rng=_check_random_state(self.random_state),
            clock=self._clock(),
            decide=_DECIDERS[self.strategy],
            target_radius=self.target_radius,
        )
        self.solution_ = self.run_.best
        self.radius_ = self.solution_.radius
        self.centers_ = self.instance_.to_input_order(self.solution_.pattern)
        return self

    def score(self, X=None, y=None):
        """Negative container radius, so that larger is better."""
        check_is_fitted(self, "radius_")
        return -self.radius_


class PackingDecider(_PackingBase):
    """Feasibility search at a fixed container radius.

    Attributes
    ----------
    feasible_ : bool
    energy_ : float
    centers_ : ndarray of shape (n, 2)
        Best pattern found, in input order.
    outcome_ : DecideOutcome
    """

    def __init__(
        self,
        radius=1.0,
        time_limit=10.0,
        strategy="its",
        feasibility_tol=1e-9,
        random_state=None,
        deterministic=False,
    ):
        self.radius = radius
        self.time_limit = time_limit
        self.strategy = strategy
        self.feasibility_tol = feasibility_tol
        self.random_state = random_state
        self.deterministic = deterministic

    def fit(self, X, y=None):
        if self.strategy not in _DECIDERS:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        self.instance_ = make_instance(check_radii(X))
        out = _DECIDERS[self.strategy](
            self.instance_,
            float(self.radius),
            self._params(),
            self.time_limit,
            _check_random_state(self.random_state),
            clock=self._clock(),
        )
        self.outcome_ = out
        self.feasible_ = out.feasible
        self.energy_ = out.energy
        self.solution_ = Solution(float(self.radius), out.pattern, out.max_violation)
        self.centers_ = self.instance_.to_input_order(out.pattern)
        return self

    def score(self, X=None, y=None):
        """Negative penalty energy of the best pattern found."""
        check_is_fitted(self, "energy_")
        return -self.energy_
