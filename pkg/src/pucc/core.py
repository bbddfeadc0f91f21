"""Problem and solution data types shared by the solver modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pucc.optimizer import OptimizerSettings


class InvalidInstanceError(ValueError):
    """Raised when a list of radii cannot form a packing instance."""


@dataclass(frozen=True, eq=False)
class Instance:
    """An immutable set of disk radii, stored in nondecreasing order.

    ``order[k]`` is the input position of the k-th sorted disk, so
    ``centers[inverse_order]`` maps sorted-order centers back to input order.
    """

    radii: np.ndarray
    name: str = ""
    order: np.ndarray = None

    def __post_init__(self):
        if self.order is None:
            object.__setattr__(self, "order", np.arange(len(self.radii)))
        self.radii.setflags(write=False)
        self.order.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.radii)

    @property
    def max_radius(self) -> float:
        return float(self.radii[-1])

    @property
    def inverse_order(self) -> np.ndarray:
        inv = np.empty_like(self.order)
        inv[self.order] = np.arange(self.n)
        return inv

    def to_input_order(self, centers: np.ndarray) -> np.ndarray:
        """Reorder sorted-order ``centers`` to match the radii as given."""
        return np.asarray(centers)[self.inverse_order]

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self.name == other.name and np.array_equal(self.radii, other.radii)

    def __repr__(self):
        return f"Instance(name={self.name!r}, n={self.n})"


def make_instance(radii, name: str = "") -> Instance:
    """Validate ``radii`` and build an :class:`Instance` with sorted radii.

    Raises :class:`InvalidInstanceError` on an empty list or on any
    nonpositive or non-finite radius.
    """
    try:
        arr = np.asarray(radii, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise InvalidInstanceError(f"radii are not numeric: {exc}") from None
    if arr.size == 0:
        raise InvalidInstanceError("at least one radius is required")
    if not np.all(np.isfinite(arr)):
        raise InvalidInstanceError("radii must be finite")
    if np.any(arr <= 0):
        raise InvalidInstanceError("radii must be strictly positive")
    order = np.argsort(arr, kind="stable")
    return Instance(radii=arr[order].copy(), name=name, order=order)


def contest_instance(n: int) -> Instance:
    """The contest instance with radii 1, 2, ..., n."""
    if n < 2:
        raise InvalidInstanceError(f"contest instances need n >= 2, got {n}")
    return make_instance(np.arange(1, n + 1, dtype=float), name=f"contest{n}")


def make_rng(seed=None) -> np.random.Generator:
    """The single generator threaded through every randomized operation."""
    return np.random.default_rng(seed)


@dataclass
class Solution:
    radius: float
    pattern: np.ndarray
    max_violation: float
    instance_name: str = ""

    def __post_init__(self):
        self.pattern = np.asarray(self.pattern, dtype=float)


@dataclass(frozen=True)
class SolverParams:
    """Search schedule and tolerances.

    Count rules follow the usual ITS settings: tenure ``n//5 + U{0..10}``,
    tabu depth ``10n``, perturbation strength ``U{1..max(1, n//8)}`` and
    perturbation depth ``10n``.
    """

    tenure_divisor: int = 5
    tenure_random_max: int = 10
    tabu_depth_factor: int = 10
    perturb_strength_divisor: int = 8
    perturb_depth_factor: int = 10
    feasibility_tol: float = 1e-9
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    # descending-R driver
    shrink_initial: float = 1e-3
    shrink_floor: float = 1e-7
    max_stall: int = 3
    slice_min: float = 5.0
    slice_max: float = 120.0
    tighten_rel_width: float = 1e-10
    tighten_max_probes: int = 60

    def __post_init__(self):
        counts = (
            self.tenure_divisor,
            self.tabu_depth_factor,
            self.perturb_strength_divisor,
            self.perturb_depth_factor,
            self.max_stall,
            self.tighten_max_probes,
        )
        if min(counts) < 1 or self.tenure_random_max < 0:
            raise ValueError("solver counts must be positive")
        tols = (self.feasibility_tol, self.shrink_initial, self.shrink_floor, self.tighten_rel_width)
        if min(tols) <= 0 or not all(math.isfinite(t) for t in tols):
            raise ValueError("solver tolerances must be strictly positive")
        if not 0 < self.slice_min <= self.slice_max:
            raise ValueError("need 0 < slice_min <= slice_max")

    def tabu_tenure(self, n: int, rng: np.random.Generator) -> int:
        return n // self.tenure_divisor + int(rng.integers(0, self.tenure_random_max + 1))

    def tabu_depth(self, n: int) -> int:
        return self.tabu_depth_factor * n

    def perturb_strength_max(self, n: int) -> int:
        return max(1, n // self.perturb_strength_divisor)

    def perturb_depth(self, n: int) -> int:
        return self.perturb_depth_factor * n


@dataclass(frozen=True)
class TraceRecord:
    restart: int
    round: int
    iteration: int
    event: str
    energy: float
    best_energy: float


class Trace:
    """Collects :class:`TraceRecord` rows; callers set the restart/round context."""

    def __init__(self):
        self.records: list[TraceRecord] = []
        self.restart = 0
        self.round = 0

    def record(self, iteration: int, event: str, energy: float, best_energy: float):
        self.records.append(
            TraceRecord(self.restart, self.round, iteration, event, float(energy), float(best_energy))
        )

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)
