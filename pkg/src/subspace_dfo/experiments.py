"""Reproduction grids, parallel-cost sweeps, named objectives, and the gate suite.

Everything here is deterministic given a seed: each Monte Carlo cell derives
its child stream from the cell's identity (variant, p, d), CSV serialization
uses a fixed header and 17 significant digits, and re-running any experiment
with the same spec and seed produces byte-identical output.
"""

from __future__ import annotations

import dataclasses
import datetime
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidDimensionError
from .formulas import (
    P_MAX,
    VARIANTS,
    asymptotic_decrease,
    expected_decrease_ds,
    expected_decrease_mb,
    nested_sine_integral,
    parallel_per_work,
    parallel_rounds,
    per_evaluation_ds,
    per_evaluation_mb,
)
from .montecarlo import (
    estimate,
    evaluation_cost,
    paired_compare,
    paired_ratio_gap,
)
from .optimizer import (
    DriverConfig,
    DriverTrace,
    ObjectiveHandle,
    SubspaceRestriction,
    mb_iteration,
    run_driver,
)
from .rng import RngStream, sample_stiefel, sample_unit_vector, split_stream
from .specfun import gamma_half_ratio

DEFAULT_NSIMS = 10_000
DEFAULT_SEED = 0

D_GRID = (8, 16, 32, 64, 128, 256, 512, 1024)
P_LIST_VARY_P = (1, 2, 3, 4, 5, 10, 20, 50, 100, 200, 500, 1000)
D_VARY_P = 1000

METRIC_ITERATION = "per-iteration"
METRIC_EVALUATION = "per-evaluation"

METHOD_MC = "mc"
METHOD_EXACT = "exact"
METHOD_ASYMPTOTIC = "asymptotic"

CSV_HEADER = "variant,d,p,method,metric,value,std_error,n_sims,seed"

FIGURE_NAMES = (
    "ds-vary-d",
    "ds-vary-p",
    "ds-perfev-vary-d",
    "ds-perfev-vary-p",
    "mb-vary-d",
    "mb-vary-p",
    "mb-perfev-vary-d",
    "mb-perfev-vary-p",
    "parallel-sweep",
)

OBJECTIVE_NAMES = ("linear-random-g", "sphere-quadratic", "rosenbrock")

# Ratio of the polling decrease to the dimension factor at subspace dimensions
# 3 and 4, rounded from the symbolic evaluation of the nested integral.
DS_RATIO_P3 = 0.938
DS_RATIO_P4 = 1.036


@dataclass(frozen=True)
class ResultRow:
    """One cell of an experiment table.

    ``std_error`` is present exactly when the value came from Monte Carlo;
    ``n_sims`` and ``seed`` likewise record provenance for those rows only.
    """

    variant: str
    d: int
    p: int
    method: str
    metric: str
    value: float
    std_error: float | None = None
    n_sims: int | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.value <= 1.0):
            raise ValueError(f"expected decrease must lie in (0, 1], got {self.value!r}")
        if (self.std_error is not None) != (self.method == METHOD_MC):
            raise ValueError("std_error is present exactly for Monte Carlo rows")


def _fmt(x: float) -> str:
    return format(x, ".17g")


def rows_to_csv(rows: list[ResultRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        se = _fmt(r.std_error) if r.std_error is not None else ""
        n = str(r.n_sims) if r.n_sims is not None else ""
        seed = str(r.seed) if r.seed is not None else ""
        lines.append(
            f"{r.variant},{r.d},{r.p},{r.method},{r.metric},{_fmt(r.value)},{se},{n},{seed}"
        )
    return "\n".join(lines) + "\n"


def write_rows(path: str | Path, rows: list[ResultRow]) -> None:
    Path(path).write_text(rows_to_csv(rows), encoding="ascii", newline="\n")


def write_manifest(path: str | Path, payload: dict) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="ascii", newline="\n"
    )


@dataclass
class ExperimentSpec:
    """Declarative description of a reproduction grid.

    ``p_rule`` is either an explicit tuple of subspace dimensions or the
    string ``"standard"`` meaning {1, 2, d/2, d} per ambient dimension (integer
    division; duplicates collapse).  ``outputs`` selects per-iteration rows,
    per-evaluation rows, or both; ``include`` selects which methods to emit.
    """

    name: str
    variant: str
    d_values: tuple[int, ...]
    p_rule: tuple[int, ...] | str = "standard"
    n_sims: int = DEFAULT_NSIMS
    seed: int = DEFAULT_SEED
    outputs: str = "decrease"
    include: tuple[str, ...] = ("formula", "monte-carlo", "asymptotic")

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not self.d_values or any(d < 1 for d in self.d_values):
            raise ValueError(f"d_values must be positive, got {self.d_values}")
        if isinstance(self.p_rule, str):
            if self.p_rule != "standard":
                raise ValueError(f"unknown p rule {self.p_rule!r}")
        else:
            self.p_rule = tuple(int(p) for p in self.p_rule)
            top = max(self.d_values)
            if any(p < 1 or p > top for p in self.p_rule):
                raise ValueError(f"p values must lie in [1, max(d)], got {self.p_rule}")
        if self.n_sims < 1:
            raise ValueError("n_sims must be positive")
        if self.outputs not in ("decrease", "per-evaluation", "both"):
            raise ValueError(f"unknown outputs selector {self.outputs!r}")
        unknown = set(self.include) - {"formula", "monte-carlo", "asymptotic"}
        if unknown:
            raise ValueError(f"unknown include flags {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        data = dict(data)
        for key in ("d_values", "include"):
            if key in data and not isinstance(data[key], str):
                data[key] = tuple(data[key])
        if "p_rule" in data and not isinstance(data["p_rule"], str):
            data["p_rule"] = tuple(data["p_rule"])
        return cls(**data)

    def merged(self, **overrides) -> "ExperimentSpec":
        updates = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **updates)


def p_values_for(d: int, p_rule: tuple[int, ...] | str) -> tuple[int, ...]:
    if p_rule == "standard":
        return tuple(sorted({p for p in (1, 2, d // 2, d) if 1 <= p <= d}))
    return tuple(p for p in p_rule if p <= d)


def cell_stream(base: RngStream, variant: str, p: int, d: int) -> RngStream:
    """Child stream for one Monte Carlo cell, keyed by the cell's identity.

    Keying by (variant, p, d) rather than by enumeration order keeps a cell's
    randomness stable when grids are edited.
    """
    variant_index = VARIANTS.index(variant)
    return split_stream(split_stream(split_stream(base, variant_index), p), d)


def _metrics_for(outputs: str) -> tuple[str, ...]:
    if outputs == "decrease":
        return (METRIC_ITERATION,)
    if outputs == "per-evaluation":
        return (METRIC_EVALUATION,)
    return (METRIC_ITERATION, METRIC_EVALUATION)


def _exact_result(variant: str, p: int, d: int):
    return expected_decrease_ds(p, d) if variant == "ds" else expected_decrease_mb(p, d)


def _exact_per_eval(variant: str, p: int, d: int):
    return per_evaluation_ds(p, d) if variant == "ds" else per_evaluation_mb(p, d)


def _grid_rows(spec: ExperimentSpec, exact_p_limit) -> list[ResultRow]:
    """Shared emitter for the vary-d and vary-p grids.

    ``exact_p_limit(d)`` bounds which cells get exact rows.  Cell streams are
    keyed by cell identity under RngStream(spec.seed), so reruns with the same
    spec are bit-identical.
    """
    base = RngStream(spec.seed)
    metrics = _metrics_for(spec.outputs)
    rows: list[ResultRow] = []
    for d in spec.d_values:
        for p in p_values_for(d, spec.p_rule):
            if "monte-carlo" in spec.include:
                est = estimate(
                    spec.variant, p, d, spec.n_sims, cell_stream(base, spec.variant, p, d)
                )
                cost = evaluation_cost(spec.variant, p)
                for metric in metrics:
                    scale = 1.0 if metric == METRIC_ITERATION else cost
                    rows.append(
                        ResultRow(
                            spec.variant,
                            d,
                            p,
                            METHOD_MC,
                            metric,
                            est.mean / scale,
                            est.std_error / scale,
                            est.n_sims,
                            est.seed,
                        )
                    )
            if "formula" in spec.include and p <= exact_p_limit(d):
                for metric in metrics:
                    res = (
                        _exact_result(spec.variant, p, d)
                        if metric == METRIC_ITERATION
                        else _exact_per_eval(spec.variant, p, d)
                    )
                    rows.append(
                        ResultRow(spec.variant, d, p, METHOD_EXACT, metric, res.value)
                    )
            if "asymptotic" in spec.include and p in (1, 2):
                asym = asymptotic_decrease(p, d, spec.variant)
                cost = evaluation_cost(spec.variant, p)
                for metric in metrics:
                    scale = 1.0 if metric == METRIC_ITERATION else cost
                    rows.append(
                        ResultRow(
                            spec.variant, d, p, METHOD_ASYMPTOTIC, metric, asym.value / scale
                        )
                    )
    return rows


def run_figure_vary_d(spec: ExperimentSpec) -> list[ResultRow]:
    """Decrease versus ambient dimension: MC for every cell, exact and
    asymptotic rows for p in {1, 2}."""
    return _grid_rows(spec, exact_p_limit=lambda d: 2)


def run_figure_vary_p(spec: ExperimentSpec) -> list[ResultRow]:
    """Decrease versus subspace dimension at fixed d: MC for every cell,
    exact rows where the formula path applies (p <= P_MAX)."""
    return _grid_rows(spec, exact_p_limit=lambda d: P_MAX)


def default_figure_spec(
    name: str, n_sims: int = DEFAULT_NSIMS, seed: int = DEFAULT_SEED
) -> ExperimentSpec:
    if name not in FIGURE_NAMES or name == "parallel-sweep":
        raise ValueError(f"no grid spec for figure {name!r}")
    variant, _, rest = name.partition("-")
    perfev = rest.startswith("perfev")
    vary_p = rest.endswith("vary-p")
    if vary_p:
        d_values: tuple[int, ...] = (D_VARY_P,)
        p_rule: tuple[int, ...] | str = P_LIST_VARY_P
        include: tuple[str, ...] = ("formula", "monte-carlo")
    else:
        d_values = D_GRID
        p_rule = "standard"
        include = ("formula", "monte-carlo", "asymptotic")
    return ExperimentSpec(
        name=name,
        variant=variant,
        d_values=d_values,
        p_rule=p_rule,
        n_sims=n_sims,
        seed=seed,
        outputs="per-evaluation" if perfev else "decrease",
        include=include,
    )


def run_named_figure(spec: ExperimentSpec) -> list[ResultRow]:
    if spec.name.endswith("vary-p"):
        return run_figure_vary_p(spec)
    return run_figure_vary_d(spec)


@dataclass(frozen=True)
class SweepSummary:
    """Argmax report for one core count of a parallel sweep."""

    cores: int
    argmax_p: int
    max_value: float
    tied_p: tuple[int, ...]


def _sweep_grid(variant: str, d: int, cores: int, p_multiples: int) -> tuple[int, ...]:
    # Polling batches come in opposite pairs, so its natural grid steps by
    # c/2; the model grid steps by c.
    step = max(cores // 2, 1) if variant == "ds" else cores
    return tuple(range(step, min(p_multiples * step, d) + 1, step))


def run_parallel_sweep(
    variant: str,
    d: int,
    cores_list: tuple[int, ...],
    p_multiples: int = 100,
    n_sims: int = DEFAULT_NSIMS,
    seed: int = DEFAULT_SEED,
    rng: RngStream | None = None,
) -> tuple[list[ResultRow], list[SweepSummary]]:
    """Expected decrease per batched evaluation round over a p grid, per core count.

    Formula values cover the quadrature range; polling cells beyond it fall
    back to the Monte Carlo estimator divided by the deterministic round
    count.  Each summary reports the grid argmax (first index on ties within
    1e-12) and every tied grid point.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    base = rng if rng is not None else RngStream(seed)
    rows: list[ResultRow] = []
    summaries: list[SweepSummary] = []
    mc_cache: dict[int, object] = {}
    for cores in cores_list:
        metric = f"per-work({cores})"
        grid = _sweep_grid(variant, d, cores, p_multiples)
        values: list[float] = []
        for p in grid:
            if variant == "mb" or p <= P_MAX:
                res = parallel_per_work(p, d, cores, variant)
                rows.append(ResultRow(variant, d, p, METHOD_EXACT, metric, res.value))
                values.append(res.value)
            else:
                # One estimate per p serves every core count; the per-work
                # value only rescales it by the deterministic round count.
                if p not in mc_cache:
                    mc_cache[p] = estimate(variant, p, d, n_sims, cell_stream(base, variant, p, d))
                est = mc_cache[p]
                rounds = parallel_rounds(p, cores, variant)
                rows.append(
                    ResultRow(
                        variant,
                        d,
                        p,
                        METHOD_MC,
                        metric,
                        est.mean / rounds,
                        est.std_error / rounds,
                        est.n_sims,
                        est.seed,
                    )
                )
                values.append(est.mean / rounds)
        arr = np.asarray(values)
        top = float(arr.max())
        tied = tuple(
            int(p) for p, v in zip(grid, arr) if v >= top - max(1e-12, 1e-12 * abs(top))
        )
        summaries.append(SweepSummary(cores, tied[0], top, tied))
    return rows, summaries


def make_objective(name: str, d: int, rng: RngStream) -> tuple[ObjectiveHandle, np.ndarray]:
    """Named test objective plus its conventional starting point.

    ``linear-random-g`` draws a uniformly random unit gradient from ``rng``
    and starts at the origin; ``sphere-quadratic`` is half the squared norm
    from the all-ones point; ``rosenbrock`` uses the classic alternating
    start.
    """
    if d < 1:
        raise InvalidDimensionError(f"dimension must be positive, got {d}")
    if name == "linear-random-g":
        g = sample_unit_vector(d, rng).coords

        def linear(x: np.ndarray) -> float:
            return float(g @ x)

        return ObjectiveHandle(linear, d, name=name), np.zeros(d)
    if name == "sphere-quadratic":

        def sphere(x: np.ndarray) -> float:
            return 0.5 * float(x @ x)

        return ObjectiveHandle(sphere, d, name=name), np.ones(d)
    if name == "rosenbrock":

        def rosen(x: np.ndarray) -> float:
            return float(
                np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2)
            )

        x0 = np.ones(d)
        x0[::2] = -1.2
        return ObjectiveHandle(rosen, d, name=name), x0
    raise ValueError(f"unknown objective {name!r}; choose from {OBJECTIVE_NAMES}")


def run_optimizer_experiment(
    function_name: str, d: int, config: DriverConfig, seed: int = DEFAULT_SEED
) -> tuple[DriverTrace, ObjectiveHandle]:
    """Drive a named objective from one seed.

    Child stream 0 of the seed drives the optimizer, child stream 1 draws any
    randomness the objective itself needs, so traces are reproducible.
    """
    base = RngStream(seed)
    objective, x0 = make_objective(function_name, d, split_stream(base, 1))
    trace = run_driver(objective, x0, config, split_stream(base, 0))
    return trace, objective


TRACE_HEADER = "iteration,eval_count,best_value,step_size"


def trace_to_csv(trace: DriverTrace) -> str:
    lines = [TRACE_HEADER]
    for r in trace.records:
        lines.append(f"{r.iteration},{r.eval_count},{_fmt(r.best_value)},{_fmt(r.step_size)}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# Verification gates.  Each gate checks one acceptance bullet end to end and
# reports a deterministic detail string; the CLI turns failures into a nonzero
# exit code.
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class GateResult:
    criterion: int
    name: str
    passed: bool
    detail: str


def _gate_stream(seed: int, criterion: int) -> RngStream:
    return split_stream(RngStream(seed), criterion)


def gate_ds_closed_form(n_sims: int = DEFAULT_NSIMS, seed: int = DEFAULT_SEED) -> GateResult:
    """Polling closed forms at p in {1, 2} versus MC over the dimension grid."""
    base = _gate_stream(seed, 1)
    worst = 0.0
    worst_cell = (0, 0)
    ok = True
    for d in D_GRID:
        for p in (1, 2):
            est = estimate("ds", p, d, n_sims, cell_stream(base, "ds", p, d))
            exact = expected_decrease_ds(p, d).value
            z = abs(est.mean - exact) / est.std_error
            if z > worst:
                worst, worst_cell = z, (p, d)
            ok = ok and z <= 3.0
    return GateResult(
        1,
        "ds-closed-form-vs-mc",
        ok,
        f"max |z| = {_fmt(worst)} at (p={worst_cell[0]}; d={worst_cell[1]}); gate |z| <= 3",
    )


def gate_mb_closed_form(n_sims: int = DEFAULT_NSIMS, seed: int = DEFAULT_SEED) -> GateResult:
    """Model closed form versus MC at p in {1, 2, d/2, d}; p = d must be exact."""
    base = _gate_stream(seed, 2)
    worst = 0.0
    worst_cell = (0, 0)
    ok = True
    for d in D_GRID:
        for p in p_values_for(d, "standard"):
            est = estimate("mb", p, d, n_sims, cell_stream(base, "mb", p, d))
            exact = expected_decrease_mb(p, d).value
            if p == d:
                ok = ok and exact == 1.0 and est.mean == 1.0 and est.std_error == 0.0
                continue
            z = abs(est.mean - exact) / est.std_error
            if z > worst:
                worst, worst_cell = z, (p, d)
            ok = ok and z <= 3.0
    return GateResult(
        2,
        "mb-closed-form-vs-mc",
        ok,
        f"max |z| = {_fmt(worst)} at (p={worst_cell[0]}; d={worst_cell[1]}); p=d cells exact",
    )


def gate_quadrature_constants(
    n_sims: int = DEFAULT_NSIMS, seed: int = DEFAULT_SEED
) -> GateResult:
    """Level-2 integral and the p = 3, 4 decrease-to-dimension-factor constants."""
    level2 = abs(nested_sine_integral(2).value - 1.0 / math.sqrt(2.0))
    ok = level2 <= 1e-10
    worst3 = 0.0
    worst4 = 0.0
    for d in (3, 8, 64, 512, 4096):
        ratio = expected_decrease_ds(3, d).value / gamma_half_ratio(d).value
        worst3 = max(worst3, abs(ratio - DS_RATIO_P3))
    for d in (4, 8, 64, 512, 4096):
        ratio = expected_decrease_ds(4, d).value / gamma_half_ratio(d).value
        worst4 = max(worst4, abs(ratio - DS_RATIO_P4))
    ok = ok and worst3 <= 1e-3 and worst4 <= 1e-3
    return GateResult(
        3,
        "quadrature-constants",
        ok,
        f"|I2 - 1/sqrt2| = {_fmt(level2)}; |ratio3 - {DS_RATIO_P3}| = {_fmt(worst3)}; "
        f"|ratio4 - {DS_RATIO_P4}| = {_fmt(worst4)}",
    )


def gate_ratio_identities(n_sims: int = DEFAULT_NSIMS, seed: int = DEFAULT_SEED) -> GateResult:
    """The four p = 1 to p = 2 ratios, by formula and by paired MC at d = 1000."""
    base = _gate_stream(seed, 4)
    sqrt2 = math.sqrt(2.0)
    worst_formula = 0.0
    for d in (8, 64, 1000, 1024):
        checks = (
            expected_decrease_ds(2, d).value / expected_decrease_ds(1, d).value - sqrt2,
            expected_decrease_mb(2, d).value / expected_decrease_mb(1, d).value - math.pi / 2,
            per_evaluation_ds(2, d).value / per_evaluation_ds(1, d).value - sqrt2 / 2,
            per_evaluation_mb(2, d).value / per_evaluation_mb(1, d).value - math.pi / 4,
        )
        worst_formula = max(worst_formula, max(abs(c) for c in checks))
    ok = worst_formula <= 1e-10
    targets = (
        ("ds", sqrt2, False),
        ("mb", math.pi / 2, False),
        ("ds", sqrt2 / 2, True),
        ("mb", math.pi / 4, True),
    )
    worst_mc = 0.0
    for i, (variant, target, per_eval) in enumerate(targets):
        gap = paired_ratio_gap(
            variant, 1, 2, 1000, target, n_sims, split_stream(base, i), per_evaluation=per_eval
        )
        z = abs(gap.delta_mean) / gap.delta_std_error
        worst_mc = max(worst_mc, z)
        ok = ok and z <= 3.0
    return GateResult(
        4,
        "ratio-identities",
        ok,
        f"max formula residual = {_fmt(worst_formula)} (gate 1e-10); "
        f"max paired |z| = {_fmt(worst_mc)} (gate 3)",
    )


def gate_per_evaluation_monotonicity(
    n_sims: int = DEFAULT_NSIMS, seed: int = DEFAULT_SEED
) -> GateResult:
    """Per-evaluation decrease strictly falls as p grows, by formula and paired MC."""
    base = _gate_stream(seed, 5)
    ok = True
    for d in (64, 1024):
        ds_seq = [per_evaluation_ds(p, d).value for p in range(1, P_MAX + 1)]
        ok = ok and all(a > b for a, b in zip(ds_seq, ds_seq[1:]))
        mb_seq = [per_evaluation_mb(p, d).value for p in range(2, min(d - 1, 64) + 1)]
        ok = ok and all(a > b for a, b in zip(mb_seq, mb_seq[1:]))
        ok = ok and per_evaluation_mb(1, d).value > per_evaluation_mb(2, d).value
    min_z = math.inf
    cell = 0
    for variant in VARIANTS:
        for p in range(1, 6):
            delta = paired_compare(variant, p, p + 1, 1000, n_sims, split_stream(base, cell))
            cell += 1
            z = delta.delta_mean / delta.delta_std_error
            min_z = min(min_z, z)
            ok = ok and delta.delta_mean > 0.0 and z > 3.0
    return GateResult(
        5,
        "per-evaluation-monotonicity",
        ok,
        f"formula chains strict; min paired z = {_fmt(min_z)} (gate > 3)",
    )


def gate_separability(n_sims: int = DEFAULT_NSIMS, seed: int = DEFAULT_SEED) -> GateResult:
    """Cross-ratio identity over 100 random (p1, p2, d1, d2) tuples, both variants."""
    gen = _gate_stream(seed, 6).generator()
    worst = 0.0
    for _ in range(100):
        p1, p2 = int(gen.integers(1, P_MAX + 1)), int(gen.integers(1, P_MAX + 1))
        low = max(p1, p2)
        d1, d2 = int(gen.integers(low, 2049)), int(gen.integers(low, 2049))
        for fn in (expected_decrease_ds, expected_decrease_mb):
            cross = (fn(p1, d1).value * fn(p2, d2).value) / (
                fn(p1, d2).value * fn(p2, d1).value
            )
            worst = max(worst, abs(cross - 1.0))
    return GateResult(
        6,
        "separability",
        worst <= 1e-10,
        f"max |cross-ratio - 1| = {_fmt(worst)} (gate 1e-10)",
    )


def gate_asymptotics(n_sims: int = DEFAULT_NSIMS, seed: int = DEFAULT_SEED) -> GateResult:
    """Large-d forms within 1% of the exact values for d >= 100."""
    worst = 0.0
    for variant in VARIANTS:
        for p in (1, 2):
            for d in (100, 128, 256, 512, 1024, 4096):
                exact = _exact_result(variant, p, d).value
                asym = asymptotic_decrease(p, d, variant).value
                worst = max(worst, abs(asym - exact) / exact)
    return GateResult(
        7,
        "asymptotics",
        worst < 0.01,
        f"max relative gap = {_fmt(worst)} (gate 0.01)",
    )


def gate_basis_invariance(n_sims: int = DEFAULT_NSIMS, seed: int = DEFAULT_SEED) -> GateResult:
    """Full-basis sampling agrees with the reduced path at matched (p, d)."""
    base = _gate_stream(seed, 8)
    worst = 0.0
    ok = True
    cell = 0
    for variant in VARIANTS:
        for p, d in ((1, 16), (4, 16), (8, 64), (32, 64)):
            full = estimate(variant, p, d, n_sims, split_stream(base, cell), "full-basis")
            reduced = estimate(variant, p, d, n_sims, split_stream(base, cell + 1), "reduced")
            cell += 2
            z = abs(full.mean - reduced.mean) / math.hypot(full.std_error, reduced.std_error)
            worst = max(worst, z)
            ok = ok and z <= 3.0
    return GateResult(
        8,
        "basis-invariance",
        ok,
        f"max combined |z| = {_fmt(worst)} (gate 3)",
    )


def gate_parallel_sweeps(n_sims: int = DEFAULT_NSIMS, seed: int = DEFAULT_SEED) -> GateResult:
    """Per-work argmax lands at p = c/2 (polling) and p = c (model), with the
    documented two-way tie for the model at c = 2."""
    base = _gate_stream(seed, 9)
    ok = True
    notes = []
    _, ds_summaries = run_parallel_sweep(
        "ds", 64, (2, 4, 8), n_sims=n_sims, rng=split_stream(base, 0)
    )
    for s in ds_summaries:
        ok = ok and s.argmax_p == s.cores // 2
        notes.append(f"ds c={s.cores} argmax p={s.argmax_p}")
    _, mb_summaries = run_parallel_sweep(
        "mb", 128, (1, 2, 4, 8), n_sims=n_sims, rng=split_stream(base, 1)
    )
    for s in mb_summaries:
        ok = ok and s.argmax_p == s.cores
        notes.append(f"mb c={s.cores} argmax p={s.argmax_p}")
        if s.cores == 2:
            tie_gap = abs(
                parallel_per_work(2, 128, 2, "mb").value
                - parallel_per_work(4, 128, 2, "mb").value
            )
            ok = ok and 4 in s.tied_p and tie_gap <= 1e-12
            notes.append(f"tie gap = {_fmt(tie_gap)}")
    return GateResult(9, "parallel-sweeps", ok, "; ".join(notes))


def gate_optimizer_behavior(
    n_sims: int = DEFAULT_NSIMS, seed: int = DEFAULT_SEED
) -> GateResult:
    """Driver decreases match the projected-gradient norms exactly and the
    evaluation accounting matches the cost model."""
    base = _gate_stream(seed, 10)
    d, p = 50, 3
    g = sample_unit_vector(d, split_stream(base, 0)).coords
    worst_gap = 0.0
    ok = True
    for kind, norm_ord, cost, stream_idx in (
        ("ds-complete", np.inf, 2 * p, 1),
        ("mb", 2, p + 1, 2),
    ):
        objective = ObjectiveHandle(lambda x, g=g: float(g @ x), d, name="linear")
        config = DriverConfig(p=p, max_evaluations=420, iteration_kind=kind)
        driver_rng = split_stream(base, stream_idx)
        trace = run_driver(objective, np.zeros(d), config, driver_rng)
        best = trace.best_values()
        for k in range(1, len(trace.records)):
            basis = sample_stiefel(d, p, split_stream(driver_rng, k - 1))
            proj = float(np.linalg.norm(basis.columns.T @ g, ord=norm_ord))
            step = trace.records[k].step_size
            gap = abs((best[k - 1] - best[k]) - step * proj)
            worst_gap = max(worst_gap, gap)
            evals = trace.records[k].eval_count - trace.records[k - 1].eval_count
            ok = ok and evals == cost
    ok = ok and worst_gap <= 1e-12

    # Average evaluations of the p = 1 model iteration: the trial point reuses
    # the poll point whenever the model already points at it.
    d1 = 20
    g1 = sample_unit_vector(d1, split_stream(base, 3)).coords
    objective1 = ObjectiveHandle(lambda x: float(g1 @ x), d1, name="linear")
    counts = np.empty(n_sims)
    reuse_rng = split_stream(base, 4)
    for k in range(n_sims):
        basis = sample_stiefel(d1, 1, split_stream(reuse_rng, k))
        restriction = SubspaceRestriction(np.zeros(d1), basis, objective1, origin_value=0.0)
        outcome = mb_iteration(restriction, 1.0)
        counts[k] = outcome.new_evaluations
        ok = ok and outcome.new_evaluations in (1, 2)
    mean_cost = float(np.mean(counts))
    se_cost = float(np.std(counts, ddof=1) / math.sqrt(n_sims))
    ok = ok and abs(mean_cost - 1.5) <= 3.0 * se_cost
    return GateResult(
        10,
        "optimizer-behavior",
        ok,
        f"max decrease gap = {_fmt(worst_gap)} (gate 1e-12); "
        f"mean p=1 model cost = {_fmt(mean_cost)} +- {_fmt(se_cost)} (gate 1.5 within 3 se)",
    )


ALL_GATES = (
    gate_ds_closed_form,
    gate_mb_closed_form,
    gate_quadrature_constants,
    gate_ratio_identities,
    gate_per_evaluation_monotonicity,
    gate_separability,
    gate_asymptotics,
    gate_basis_invariance,
    gate_parallel_sweeps,
    gate_optimizer_behavior,
)

VERIFY_CSV_HEADER = "criterion,name,passed,detail"


def verify_results_to_csv(results: list[GateResult]) -> str:
    lines = [VERIFY_CSV_HEADER]
    for r in results:
        detail = r.detail.replace(",", ";")
        lines.append(f"{r.criterion},{r.name},{'pass' if r.passed else 'FAIL'},{detail}")
    return "\n".join(lines) + "\n"


def run_verify(
    seed: int = DEFAULT_SEED,
    n_sims: int = DEFAULT_NSIMS,
    out_dir: str | Path | None = None,
) -> tuple[list[GateResult], int]:
    """Run every gate; returns the results and a CLI exit code (0 iff all pass).

    With ``out_dir`` set, writes ``verify_gates.csv`` (deterministic bytes for
    a given seed) and a JSON manifest alongside.
    """
    results = [gate(n_sims=n_sims, seed=seed) for gate in ALL_GATES]
    exit_code = 0 if all(r.passed for r in results) else 1
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify_gates.csv").write_text(
            verify_results_to_csv(results), encoding="ascii", newline="\n"
        )
        write_manifest(
            out / "verify_manifest.json",
            {
                "seed": seed,
                "n_sims": n_sims,
                "version": __version__,
                "passed": exit_code == 0,
                "gates": {r.name: r.passed for r in results},
                "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            },
        )
    return results, exit_code
