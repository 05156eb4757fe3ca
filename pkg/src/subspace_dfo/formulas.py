"""Expected one-iteration decrease of random-subspace derivative-free steps.

The quantities here answer: applying one iteration of coordinate polling
("ds") or of a linear-model step ("mb") inside a uniformly random
p-dimensional subspace of R^d, to a linear objective whose unit gradient is
uniformly random, with unit step size, what objective decrease do we get on
average?  Both variants separate into a p-dependent factor times the common
dimension factor Gamma(d/2)/Gamma(d/2+1/2):

* the polling variant reduces to the mean largest absolute coordinate among
  the first p coordinates of a random point on the sphere S^{d-1}, whose
  p-factor involves a nested trigonometric integral evaluated here by
  quadrature (closed forms exist for p = 1 and p = 2);
* the model variant reduces to the mean Euclidean norm of the first p
  coordinates, which collapses to a pure ratio of gamma functions.

Per-evaluation variants divide by the number of new objective evaluations an
iteration consumes, and the parallel variant divides by the number of batched
evaluation rounds on a given number of cores.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.chebyshev import Chebyshev
from numpy.polynomial.legendre import leggauss

from .errors import DomainError, InvalidDimensionError, UnsupportedSubspaceDimensionError
from .specfun import SQRT_PI, gamma_half_ratio, log_gamma

VARIANTS = ("ds", "mb")

# Depth cap for the nested quadrature.  Larger subspace dimensions are served
# by the Monte Carlo estimator.
P_MAX = 8

METHOD_CLOSED = "closed-form"
METHOD_QUADRATURE = "quadrature"
METHOD_ASYMPTOTIC = "asymptotic"
_METHODS = (METHOD_CLOSED, METHOD_QUADRATURE, METHOD_ASYMPTOTIC)

# Error attributed to closed forms evaluated through log-gamma differences.
_CLOSED_FORM_ERROR = 1e-12


def _check_pd(p: int, d: int) -> None:
    if p < 1 or d < 1 or p > d:
        raise InvalidDimensionError(f"need 1 <= p <= d, got p={p}, d={d}")


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


@dataclass(frozen=True)
class NestedIntegral:
    """Value of the p-level nested sine-power integral with an error estimate."""

    p: int
    value: float
    abs_error: float

    def __post_init__(self) -> None:
        if self.p < 1:
            raise InvalidDimensionError(f"level must be positive, got {self.p}")
        if not (self.value > 0.0):
            raise ValueError(f"integral value must be positive, got {self.value!r}")


@dataclass(frozen=True)
class FormulaResult:
    """Expected decrease per iteration (or per evaluation) for one (p, d) cell."""

    value: float
    method: str
    p: int
    d: int
    estimated_abs_error: float

    def __post_init__(self) -> None:
        _check_pd(self.p, self.d)
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")
        if not (0.0 < self.value <= 1.0):
            raise ValueError(f"expected decrease must lie in (0, 1], got {self.value!r}")
        if self.estimated_abs_error < 0.0:
            raise ValueError("error estimate must be nonnegative")


def _tail_levels(p: int, n_quad: int, n_cheb: int) -> float:
    """One pass of the nested quadrature at fixed node counts.

    The integral is over angles t_1..t_{p-1} with integrand
    prod_i sin(t_i)^i; t_1 starts at pi/4 and each later t_i starts at
    arctan of the product of cosecants of the outer angles.  Writing c for
    that cosecant product, the tail from level i inward,

        T_i(c) = integral over [arctan c, pi/2] of sin(t)^i * T_{i+1}(c / sin t) dt,

    is a smooth function of the single variable c in [1, sqrt(i)], so each
    tail is represented by a Chebyshev interpolant built from Gauss-Legendre
    panel sums, level by level from the innermost outward.  The result is
    T_1(1).
    """
    x_gl, w_gl = leggauss(n_quad)

    def level_values(cs: np.ndarray, i: int, inner) -> np.ndarray:
        cs = np.atleast_1d(np.asarray(cs, dtype=float))
        lo = np.arctan(cs)
        half = (np.pi / 2.0 - lo) / 2.0
        mid = (np.pi / 2.0 + lo) / 2.0
        phi = mid[:, None] + half[:, None] * x_gl[None, :]
        s = np.sin(phi)
        vals = s**i
        if inner is not None:
            vals = vals * inner(cs[:, None] / s)
        return half * (vals @ w_gl)

    inner = None
    for i in range(p - 1, 1, -1):
        inner = Chebyshev.interpolate(
            (lambda cs, i=i, inner=inner: level_values(cs, i, inner)),
            n_cheb,
            domain=[1.0, math.sqrt(i)],
        )
    return float(level_values(np.array([1.0]), 1, inner)[0])


@functools.lru_cache(maxsize=None)
def _nested_sine_integral_cached(p: int, tol: float) -> NestedIntegral:
    value = _tail_levels(p, 24, 24)
    abs_error = math.inf
    for n in (48, 96, 192):
        refined = _tail_levels(p, n, n)
        abs_error = abs(refined - value)
        value = refined
        if abs_error <= tol:
            break
    if abs_error > tol:
        raise RuntimeError(
            f"nested quadrature did not reach tol={tol} at p={p} (error {abs_error})"
        )
    return NestedIntegral(p=p, value=value, abs_error=abs_error)


def nested_sine_integral(p: int, tol: float = 1e-10) -> NestedIntegral:
    """Nested sine-power integral entering the polling decrease formula.

    By convention the level-1 value is exactly 1; the level-2 value is
    1/sqrt(2).  Levels up to ``P_MAX`` are computed by nested Gauss-Legendre
    quadrature with Chebyshev-interpolated inner tails, refining node counts
    until two successive passes agree within ``tol`` (the reported
    ``abs_error`` is that last difference).
    """
    if p < 1:
        raise InvalidDimensionError(f"level must be positive, got {p}")
    if tol <= 0.0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    if p == 1:
        return NestedIntegral(p=1, value=1.0, abs_error=0.0)
    if p > P_MAX:
        raise UnsupportedSubspaceDimensionError(
            f"quadrature supports p <= {P_MAX}; use the Monte Carlo estimator for p={p}"
        )
    return _nested_sine_integral_cached(p, float(tol))


def _p_factor_ds(p: int) -> float:
    """p-dependent prefactor of the polling decrease, excluding the integral."""
    return (p / 2.0) * (2.0 / SQRT_PI) ** p * math.exp(log_gamma(p / 2.0 + 0.5))


def expected_decrease_ds(p: int, d: int, tol: float = 1e-10) -> FormulaResult:
    """Expected per-iteration decrease of complete coordinate polling.

    Closed forms cover p = 1 and p = 2; levels 3..P_MAX multiply the
    quadrature value of the nested integral by its gamma prefactor.  The
    degenerate one-dimensional problem returns exactly 1.
    """
    _check_pd(p, d)
    if p == 1 and d == 1:
        return FormulaResult(1.0, METHOD_CLOSED, p, d, 0.0)
    ratio = gamma_half_ratio(d).value
    if p == 1:
        return FormulaResult(ratio / SQRT_PI, METHOD_CLOSED, p, d, _CLOSED_FORM_ERROR)
    if p == 2:
        return FormulaResult(
            math.sqrt(2.0) * ratio / SQRT_PI, METHOD_CLOSED, p, d, _CLOSED_FORM_ERROR
        )
    integral = nested_sine_integral(p, tol)
    prefactor = _p_factor_ds(p)
    value = prefactor * ratio * integral.value
    err = prefactor * ratio * integral.abs_error + _CLOSED_FORM_ERROR * value
    return FormulaResult(value, METHOD_QUADRATURE, p, d, err)


def expected_decrease_mb(p: int, d: int) -> FormulaResult:
    """Expected per-iteration decrease of the linear-model step.

    Closed form Gamma(d/2) Gamma(p/2+1/2) / (Gamma(d/2+1/2) Gamma(p/2)),
    evaluated as the shared dimension factor times a p-only factor so that
    ratios between subspace dimensions cancel the dimension factor cleanly.
    The full-dimensional case is exactly 1.
    """
    _check_pd(p, d)
    if p == d:
        return FormulaResult(1.0, METHOD_CLOSED, p, d, 0.0)
    value = gamma_half_ratio(d).value / gamma_half_ratio(p).value
    return FormulaResult(value, METHOD_CLOSED, p, d, _CLOSED_FORM_ERROR)


def per_evaluation_ds(
    p: int, d: int, opportunistic: bool = False, tol: float = 1e-10
) -> FormulaResult:
    """Expected decrease per new objective evaluation for coordinate polling.

    Complete polling evaluates 2p points per iteration.  Opportunistic polling
    accepts the first improving point of each opposite pair; on a linear
    objective the first pair already improves, costing 3/2 evaluations on
    average for the decrease of the p = 1 case, so the value is independent
    of p.
    """
    _check_pd(p, d)
    if opportunistic:
        value = (2.0 / (3.0 * SQRT_PI)) * gamma_half_ratio(d).value
        return FormulaResult(value, METHOD_CLOSED, p, d, _CLOSED_FORM_ERROR)
    per_iter = expected_decrease_ds(p, d, tol)
    cost = 2.0 * p
    return FormulaResult(
        per_iter.value / cost, per_iter.method, p, d, per_iter.estimated_abs_error / cost
    )


def per_evaluation_mb(p: int, d: int) -> FormulaResult:
    """Expected decrease per new objective evaluation for the linear-model step.

    The step costs p + 1 evaluations (p for the forward differences, one for
    the trial point), except at p = 1 where the trial point coincides with the
    already-evaluated poll point half the time, for an average cost of 3/2.
    """
    _check_pd(p, d)
    per_iter = expected_decrease_mb(p, d)
    cost = 1.5 if p == 1 else p + 1.0
    return FormulaResult(
        per_iter.value / cost, per_iter.method, p, d, per_iter.estimated_abs_error / cost
    )


def parallel_rounds(p: int, cores: int, variant: str) -> float:
    """Evaluation rounds one iteration needs on ``cores`` parallel cores.

    Complete polling batches its 2p points into ceil(2p/c) rounds.  The model
    step needs ceil(p/c) rounds for the forward differences plus one for the
    trial point, except at p = 1 where the trial point coincides with the
    already-evaluated poll point half the time, so the expected round count is
    3/2 no matter how many cores are available.
    """
    _check_variant(variant)
    if cores < 1:
        raise DomainError(f"core count must be positive, got {cores}")
    if variant == "ds":
        return float(-((-2 * p) // cores))
    if p == 1:
        return 1.5
    return float(-((-p) // cores) + 1)


def parallel_per_work(
    p: int, d: int, cores: int, variant: str, tol: float = 1e-10
) -> FormulaResult:
    """Expected decrease per batched evaluation round on ``cores`` parallel cores."""
    _check_variant(variant)
    _check_pd(p, d)
    per_iter = (
        expected_decrease_ds(p, d, tol) if variant == "ds" else expected_decrease_mb(p, d)
    )
    rounds = parallel_rounds(p, cores, variant)
    return FormulaResult(
        per_iter.value / rounds,
        per_iter.method,
        p,
        d,
        per_iter.estimated_abs_error / rounds,
    )


def asymptotic_decrease(p: int, d: int, variant: str) -> FormulaResult:
    """Large-d limit of the per-iteration decrease, evaluated at d.

    Available for p in {1, 2}:

    * polling:  sqrt(2)/sqrt(pi d) at p = 1 and 2/sqrt(pi d) at p = 2;
    * model:    sqrt(2)/sqrt(pi d) at p = 1 and sqrt(pi)/sqrt(2 d) at p = 2.
    """
    _check_variant(variant)
    _check_pd(p, d)
    if p not in (1, 2):
        raise UnsupportedSubspaceDimensionError(
            f"asymptotic forms exist only for p in (1, 2), got p={p}"
        )
    if p == 1:
        value = math.sqrt(2.0) / (SQRT_PI * math.sqrt(d))
    elif variant == "ds":
        value = 2.0 / (SQRT_PI * math.sqrt(d))
    else:
        value = SQRT_PI / (math.sqrt(2.0) * math.sqrt(d))
    return FormulaResult(value, METHOD_ASYMPTOTIC, p, d, _CLOSED_FORM_ERROR)
