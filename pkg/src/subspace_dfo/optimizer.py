"""Random-subspace derivative-free optimizer.

Each outer iteration draws a fresh uniformly random orthonormal basis for a
p-dimensional subspace, restricts the objective to that subspace around the
incumbent, and runs one inner iteration there: either coordinate polling
(complete or opportunistic) or a forward-difference linear-model step.  The
incumbent value is carried between iterations and never re-evaluated, so the
per-iteration evaluation cost is exactly 2p for complete polling and p + 1
for the model step (p = 1 model steps reuse their poll point when the model
already points at it).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InvalidDimensionError, NonFiniteObjectiveError
from .rng import RngStream, SubspaceBasis, sample_stiefel, split_stream

ITERATION_KINDS = ("ds-complete", "ds-opportunistic", "mb")

# Below this simplex-gradient norm the model direction is undefined and the
# iteration keeps the incumbent.
_GRADIENT_FLOOR = 1e-14


class ObjectiveHandle:
    """Black-box objective with an evaluation counter.

    The counter increments exactly once per evaluation and is lock-protected
    so poll points may be evaluated from worker threads.  Non-finite objective
    values abort the run immediately: silently propagating NaN would corrupt
    every later comparison.
    """

    def __init__(self, fn: Callable[[np.ndarray], float], dimension: int, name: str = ""):
        if dimension < 1:
            raise InvalidDimensionError(f"dimension must be positive, got {dimension}")
        self._fn = fn
        self.dimension = int(dimension)
        self.name = name
        self._count = 0
        self._lock = threading.Lock()

    @property
    def eval_count(self) -> int:
        return self._count

    def __call__(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise InvalidDimensionError(
                f"objective expects a vector of length {self.dimension}, got shape {x.shape}"
            )
        value = float(self._fn(x))
        if not math.isfinite(value):
            raise NonFiniteObjectiveError(
                f"objective {self.name or self._fn!r} returned {value!r} at x={x!r}"
            )
        with self._lock:
            self._count += 1
        return value


@dataclass
class SubspaceRestriction:
    """The objective restricted to base_point + span(basis columns).

    Callable on p-vectors: ``restriction(z)`` evaluates the underlying
    objective at ``base_point + columns @ z`` and counts as one evaluation.
    ``origin_value`` carries the already-known incumbent value so iterations
    never re-evaluate it.
    """

    base_point: np.ndarray
    basis: SubspaceBasis
    underlying: ObjectiveHandle
    origin_value: float | None = None

    def __post_init__(self) -> None:
        self.base_point = np.asarray(self.base_point, dtype=float)
        if self.base_point.shape != (self.basis.d,):
            raise InvalidDimensionError(
                f"base point has shape {self.base_point.shape}, basis lives in R^{self.basis.d}"
            )
        if self.underlying.dimension != self.basis.d:
            raise InvalidDimensionError(
                f"objective dimension {self.underlying.dimension} != basis dimension {self.basis.d}"
            )

    @property
    def p(self) -> int:
        return self.basis.p

    def __call__(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.p,):
            raise InvalidDimensionError(f"expected a {self.p}-vector, got shape {z.shape}")
        return self.underlying(self.base_point + self.basis.columns @ z)

    def value_at_origin(self) -> float:
        if self.origin_value is None:
            self.origin_value = self.underlying(self.base_point)
        return self.origin_value


@dataclass(frozen=True)
class IterationOutcome:
    """Result of one inner iteration in the subspace."""

    step_in_subspace: np.ndarray
    new_evaluations: int
    achieved_decrease: float

    def __post_init__(self) -> None:
        if self.achieved_decrease < 0.0:
            raise ValueError("iterations compare against the incumbent; decrease is >= 0")
        if self.new_evaluations < 0:
            raise ValueError("evaluation count cannot be negative")


@dataclass
class DriverConfig:
    """Outer-loop configuration.

    The step size contracts on iterations with zero decrease and expands on
    strict decrease; the default expand factor of 1 leaves successful steps
    unchanged.  The run stops when the evaluation budget is exhausted or the
    step size falls below ``min_step``, whichever happens first.
    """

    p: int
    max_evaluations: int
    initial_step: float = 1.0
    expand_factor: float = 1.0
    contract_factor: float = 0.5
    min_step: float = 1e-9
    iteration_kind: str = "ds-complete"

    def __post_init__(self) -> None:
        if self.p < 1:
            raise InvalidDimensionError(f"subspace dimension must be positive, got {self.p}")
        if self.max_evaluations < 0:
            raise ValueError("evaluation budget cannot be negative")
        if self.initial_step <= 0.0 or self.min_step <= 0.0:
            raise DomainError("step sizes must be positive")
        if not (0.0 < self.contract_factor < 1.0):
            raise DomainError(f"contract factor must be in (0, 1), got {self.contract_factor}")
        if self.expand_factor < 1.0:
            raise DomainError(f"expand factor must be >= 1, got {self.expand_factor}")
        if self.iteration_kind not in ITERATION_KINDS:
            raise ValueError(
                f"iteration kind must be one of {ITERATION_KINDS}, got {self.iteration_kind!r}"
            )


@dataclass(frozen=True)
class TraceRecord:
    """One row of the driver trace.

    ``step_size`` on row k >= 1 is the step used during iteration k; row 0
    carries the initial step.
    """

    iteration: int
    eval_count: int
    best_value: float
    step_size: float
    iterate: np.ndarray


@dataclass
class DriverTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def best_values(self) -> np.ndarray:
        return np.array([r.best_value for r in self.records])

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]


def simplex_gradient(
    restriction: SubspaceRestriction,
    z: np.ndarray,
    delta: float,
    value_at_z: float | None = None,
) -> np.ndarray:
    """Forward-difference gradient of the restricted objective at z.

    The sample set is z plus delta times each coordinate direction, so the
    i-th component is (f(z + delta e_i) - f(z)) / delta.  Consumes exactly p
    evaluations, plus one for f(z) when ``value_at_z`` is not supplied.  On a
    linear objective this reproduces the restricted gradient exactly for any
    delta.
    """
    if delta <= 0.0:
        raise DomainError(f"delta must be positive, got {delta}")
    z = np.asarray(z, dtype=float)
    if value_at_z is None:
        value_at_z = restriction(z)
    grad = np.empty(restriction.p)
    for i in range(restriction.p):
        zi = z.copy()
        zi[i] += delta
        grad[i] = (restriction(zi) - value_at_z) / delta
    return grad


def ds_iteration(
    restriction: SubspaceRestriction, delta: float, mode: str = "complete"
) -> IterationOutcome:
    """One polling iteration over the 2p signed coordinate directions.

    Complete mode evaluates every poll point and takes the best, keeping the
    incumbent on ties (ties resolve to the lowest index, positive sign first).
    Opportunistic mode evaluates opposite pairs in index order, positive
    direction first, and returns at the first strict improvement.
    """
    if delta <= 0.0:
        raise DomainError(f"delta must be positive, got {delta}")
    if mode not in ("complete", "opportunistic"):
        raise ValueError(f"mode must be 'complete' or 'opportunistic', got {mode!r}")
    p = restriction.p
    f0 = restriction.value_at_origin()
    best_value = f0
    best_step: np.ndarray | None = None
    evaluations = 0
    for i in range(p):
        improved = False
        for sign in (1.0, -1.0):
            step = np.zeros(p)
            step[i] = sign * delta
            value = restriction(step)
            evaluations += 1
            if value < best_value:
                best_value = value
                best_step = step
                improved = True
                if mode == "opportunistic":
                    break
        if mode == "opportunistic" and improved:
            break
    if best_step is None:
        best_step = np.zeros(p)
    return IterationOutcome(
        step_in_subspace=best_step,
        new_evaluations=evaluations,
        achieved_decrease=max(0.0, f0 - best_value),
    )


def mb_iteration(restriction: SubspaceRestriction, delta: float) -> IterationOutcome:
    """One linear-model iteration: forward differences, then a trust-region step.

    Builds the forward-difference gradient from the p poll points, steps delta
    against its normalized direction, and keeps the better of incumbent and
    trial.  When p = 1 and the model points back along the already-evaluated
    poll point, that value is reused instead of a new evaluation.  A
    numerically zero gradient keeps the incumbent (the step direction would be
    undefined).
    """
    if delta <= 0.0:
        raise DomainError(f"delta must be positive, got {delta}")
    p = restriction.p
    f0 = restriction.value_at_origin()
    poll_values = np.empty(p)
    for i in range(p):
        step = np.zeros(p)
        step[i] = delta
        poll_values[i] = restriction(step)
    evaluations = p
    grad = (poll_values - f0) / delta
    grad_norm = float(np.linalg.norm(grad))
    if grad_norm < _GRADIENT_FLOOR:
        return IterationOutcome(np.zeros(p), evaluations, 0.0)
    trial_step = -(delta / grad_norm) * grad
    if p == 1 and grad[0] < 0.0:
        # Model points along +e_1, whose poll value is already known.
        trial_value = float(poll_values[0])
    else:
        trial_value = restriction(trial_step)
        evaluations += 1
    if trial_value < f0:
        return IterationOutcome(trial_step, evaluations, f0 - trial_value)
    return IterationOutcome(np.zeros(p), evaluations, 0.0)


def run_driver(
    objective: ObjectiveHandle,
    x0: Sequence[float] | np.ndarray,
    config: DriverConfig,
    rng: RngStream,
) -> DriverTrace:
    """Run the random-subspace driver until the budget or step floor is hit.

    Iteration k (counting from 0) draws its basis from ``split_stream(rng, k)``,
    so a caller holding the same stream can reproduce every basis after the
    fact.  The initial point is always evaluated once before the loop; the
    trace starts with that record and gains one record per iteration, with
    best values nonincreasing by construction.
    """
    x = np.asarray(x0, dtype=float)
    d = objective.dimension
    if x.shape != (d,):
        raise InvalidDimensionError(f"x0 has shape {x.shape}, objective expects ({d},)")
    if config.p > d:
        raise InvalidDimensionError(f"subspace dimension {config.p} exceeds ambient {d}")

    fx = objective(x)
    delta = config.initial_step
    trace = DriverTrace()
    trace.records.append(
        TraceRecord(0, objective.eval_count, fx, delta, x.copy())
    )

    k = 0
    while objective.eval_count < config.max_evaluations and delta >= config.min_step:
        basis = sample_stiefel(d, config.p, split_stream(rng, k))
        restriction = SubspaceRestriction(x, basis, objective, origin_value=fx)
        if config.iteration_kind == "ds-complete":
            outcome = ds_iteration(restriction, delta, mode="complete")
        elif config.iteration_kind == "ds-opportunistic":
            outcome = ds_iteration(restriction, delta, mode="opportunistic")
        else:
            outcome = mb_iteration(restriction, delta)
        x = x + basis.columns @ outcome.step_in_subspace
        fx = fx - outcome.achieved_decrease
        step_used = delta
        if outcome.achieved_decrease > 0.0:
            delta *= config.expand_factor
        else:
            delta *= config.contract_factor
        k += 1
        trace.records.append(
            TraceRecord(k, objective.eval_count, fx, step_used, x.copy())
        )
    return trace
