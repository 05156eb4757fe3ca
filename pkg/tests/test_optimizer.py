"""Optimizer tests: evaluation accounting, exact decreases on linear objectives,
driver behavior."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subspace_dfo import (
    DriverConfig,
    InvalidDimensionError,
    NonFiniteObjectiveError,
    ObjectiveHandle,
    RngStream,
    SubspaceBasis,
    SubspaceRestriction,
    ds_iteration,
    mb_iteration,
    run_driver,
    sample_stiefel,
    sample_unit_vector,
    simplex_gradient,
    split_stream,
)


def linear_objective(g: np.ndarray) -> ObjectiveHandle:
    return ObjectiveHandle(lambda x: float(g @ x), g.size, name="linear")


def make_restriction(g: np.ndarray, p: int, seed: int) -> tuple[SubspaceRestriction, np.ndarray]:
    d = g.size
    basis = sample_stiefel(d, p, RngStream(seed))
    objective = linear_objective(g)
    restriction = SubspaceRestriction(np.zeros(d), basis, objective, origin_value=0.0)
    return restriction, basis.columns


class TestObjectiveHandle:
    def test_counts_every_evaluation(self):
        obj = ObjectiveHandle(lambda x: float(x.sum()), 3)
        for k in range(5):
            obj(np.arange(3.0))
        assert obj.eval_count == 5

    def test_rejects_wrong_shape(self):
        obj = ObjectiveHandle(lambda x: 0.0, 3)
        with pytest.raises(InvalidDimensionError):
            obj(np.zeros(4))

    def test_rejects_non_finite(self):
        obj = ObjectiveHandle(lambda x: math.inf, 2)
        with pytest.raises(NonFiniteObjectiveError):
            obj(np.zeros(2))
        assert obj.eval_count == 0


class TestSubspaceRestriction:
    def test_origin_matches_underlying(self):
        g = sample_unit_vector(6, RngStream(3)).coords
        objective = linear_objective(g)
        basis = sample_stiefel(6, 2, RngStream(4))
        x = np.linspace(-1.0, 1.0, 6)
        restriction = SubspaceRestriction(x, basis, objective)
        assert restriction.value_at_origin() == objective(x)
        # The cached value is reused afterwards.
        count = objective.eval_count
        restriction.value_at_origin()
        assert objective.eval_count == count

    def test_callable_maps_through_basis(self):
        g = sample_unit_vector(5, RngStream(8)).coords
        objective = linear_objective(g)
        basis = sample_stiefel(5, 3, RngStream(9))
        restriction = SubspaceRestriction(np.zeros(5), basis, objective)
        z = np.array([0.3, -0.2, 1.1])
        assert restriction(z) == pytest.approx(float(g @ (basis.columns @ z)), abs=1e-14)


class TestSimplexGradient:
    @given(st.integers(min_value=0, max_value=200))
    @settings(max_examples=40, deadline=None)
    def test_exact_on_linear_objectives(self, seed):
        # On a linear objective the forward differences recover the projected
        # gradient exactly, for any step size.
        d, p = 9, 4
        g = sample_unit_vector(d, RngStream(seed)).coords
        restriction, columns = make_restriction(g, p, seed + 1)
        for delta in (1e-3, 1.0, 17.0):
            grad = simplex_gradient(restriction, np.zeros(p), delta, value_at_z=0.0)
            assert np.max(np.abs(grad - columns.T @ g)) <= 1e-12

    def test_constant_objective_gives_zero(self):
        obj = ObjectiveHandle(lambda x: 4.5, 4)
        basis = sample_stiefel(4, 2, RngStream(0))
        restriction = SubspaceRestriction(np.zeros(4), basis, obj)
        grad = simplex_gradient(restriction, np.zeros(2), 0.5)
        assert np.all(grad == 0.0)

    def test_forward_difference_bias_on_quadratic(self):
        # f(x) = |x|^2 at the origin with the identity basis: each component is
        # delta itself.
        obj = ObjectiveHandle(lambda x: float(x @ x), 2)
        restriction = SubspaceRestriction(np.zeros(2), SubspaceBasis(np.eye(2)), obj)
        grad = simplex_gradient(restriction, np.zeros(2), 0.1)
        assert grad == pytest.approx([0.1, 0.1], abs=1e-14)

    def test_evaluation_cost(self):
        g = sample_unit_vector(7, RngStream(5)).coords
        restriction, _ = make_restriction(g, 3, 6)
        obj = restriction.underlying
        simplex_gradient(restriction, np.zeros(3), 1.0, value_at_z=0.0)
        assert obj.eval_count == 3
        simplex_gradient(restriction, np.zeros(3), 1.0)
        assert obj.eval_count == 7


class TestDsIteration:
    def test_axis_aligned_gradient(self):
        d = 5
        g = np.zeros(d)
        g[0] = 1.0
        objective = linear_objective(g)
        restriction = SubspaceRestriction(
            np.zeros(d), SubspaceBasis(np.eye(d)), objective, origin_value=0.0
        )
        outcome = ds_iteration(restriction, 1.0, mode="complete")
        assert outcome.achieved_decrease == pytest.approx(1.0, abs=1e-15)
        assert outcome.step_in_subspace[0] == -1.0
        assert outcome.new_evaluations == 2 * d

    @given(st.integers(min_value=0, max_value=300))
    @settings(max_examples=40, deadline=None)
    def test_complete_decrease_is_projected_max(self, seed):
        d, p = 11, 4
        g = sample_unit_vector(d, RngStream(seed)).coords
        restriction, columns = make_restriction(g, p, seed + 1000)
        delta = 0.75
        outcome = ds_iteration(restriction, delta, mode="complete")
        assert outcome.new_evaluations == 2 * p
        expected = delta * np.max(np.abs(columns.T @ g))
        assert outcome.achieved_decrease == pytest.approx(expected, abs=1e-12)

    def test_opportunistic_costs_one_or_two(self):
        costs = []
        for seed in range(300):
            g = sample_unit_vector(8, RngStream(seed)).coords
            restriction, _ = make_restriction(g, 3, seed + 5000)
            outcome = ds_iteration(restriction, 1.0, mode="opportunistic")
            assert outcome.achieved_decrease > 0.0
            costs.append(outcome.new_evaluations)
        assert set(costs) <= {1, 2}
        # Half the polls succeed on the first try.
        assert abs(np.mean(costs) - 1.5) < 0.1

    def test_no_improvement_keeps_incumbent(self):
        obj = ObjectiveHandle(lambda x: float(x @ x), 3)
        restriction = SubspaceRestriction(
            np.zeros(3), SubspaceBasis(np.eye(3)), obj, origin_value=0.0
        )
        outcome = ds_iteration(restriction, 1.0, mode="complete")
        assert outcome.achieved_decrease == 0.0
        assert np.all(outcome.step_in_subspace == 0.0)


class TestMbIteration:
    @given(st.integers(min_value=0, max_value=300))
    @settings(max_examples=40, deadline=None)
    def test_decrease_is_projected_norm(self, seed):
        d, p = 11, 4
        g = sample_unit_vector(d, RngStream(seed)).coords
        restriction, columns = make_restriction(g, p, seed + 2000)
        delta = 1.25
        outcome = mb_iteration(restriction, delta)
        assert outcome.new_evaluations == p + 1
        expected = delta * float(np.linalg.norm(columns.T @ g))
        assert outcome.achieved_decrease == pytest.approx(expected, abs=1e-12)

    def test_full_dimension_recovers_unit_decrease(self):
        d = 7
        g = sample_unit_vector(d, RngStream(21)).coords
        restriction, _ = make_restriction(g, d, 22)
        outcome = mb_iteration(restriction, 1.0)
        assert outcome.achieved_decrease == pytest.approx(1.0, abs=1e-12)

    @given(st.integers(min_value=0, max_value=200))
    @settings(max_examples=30, deadline=None)
    def test_model_dominates_polling_on_shared_basis(self, seed):
        # Euclidean norm dominates max coordinate, so for the same gradient,
        # basis, and step the model iteration never decreases less.
        d, p = 10, 3
        g = sample_unit_vector(d, RngStream(seed)).coords
        for delta in (0.5, 2.0):
            poll, _ = make_restriction(g, p, seed + 4000)
            model, _ = make_restriction(g, p, seed + 4000)
            ds_out = ds_iteration(poll, delta, mode="complete")
            mb_out = mb_iteration(model, delta)
            assert mb_out.achieved_decrease >= ds_out.achieved_decrease - 1e-13

    def test_constant_objective_zero_gradient_branch(self):
        obj = ObjectiveHandle(lambda x: 2.0, 4)
        restriction = SubspaceRestriction(
            np.zeros(4), SubspaceBasis(np.eye(4)), obj, origin_value=2.0
        )
        outcome = mb_iteration(restriction, 1.0)
        assert outcome.achieved_decrease == 0.0
        assert outcome.new_evaluations == 4
        assert np.all(outcome.step_in_subspace == 0.0)

    def test_p1_reuses_poll_point(self):
        # When the restricted slope is negative the model steps onto the poll
        # point, which must not cost a second evaluation.
        d = 6
        g = sample_unit_vector(d, RngStream(33)).coords
        counts = set()
        for seed in range(60):
            restriction, columns = make_restriction(g, 1, seed + 3000)
            slope = float(columns[:, 0] @ g)
            outcome = mb_iteration(restriction, 1.0)
            expected_cost = 1 if slope < 0 else 2
            assert outcome.new_evaluations == expected_cost
            counts.add(outcome.new_evaluations)
            assert outcome.achieved_decrease == pytest.approx(abs(slope), abs=1e-13)
        assert counts == {1, 2}


class TestDriver:
    def test_zero_budget_gives_single_record(self):
        g = sample_unit_vector(4, RngStream(0)).coords
        trace = run_driver(
            linear_objective(g),
            np.zeros(4),
            DriverConfig(p=1, max_evaluations=0),
            RngStream(1),
        )
        assert len(trace.records) == 1
        assert trace.records[0].eval_count == 1

    def test_linear_objective_strictly_decreases(self):
        g = sample_unit_vector(30, RngStream(2)).coords
        trace = run_driver(
            linear_objective(g),
            np.zeros(30),
            DriverConfig(p=2, max_evaluations=400),
            RngStream(3),
        )
        best = trace.best_values()
        assert np.all(np.diff(best) < 0.0)

    @pytest.mark.parametrize("kind", ["ds-complete", "ds-opportunistic", "mb"])
    def test_trace_nonincreasing(self, kind):
        obj = ObjectiveHandle(
            lambda x: float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1 - x[:-1]) ** 2)), 6
        )
        config = DriverConfig(p=2, max_evaluations=300, iteration_kind=kind)
        trace = run_driver(obj, np.full(6, -1.2), config, RngStream(7))
        best = trace.best_values()
        assert np.all(np.diff(best) <= 0.0)

    def test_quadratic_converges(self):
        # The expanding step rule is needed here: with no expansion the step
        # size only contracts, which stalls one-direction polling on the
        # sphere long before the gradient target.
        obj = ObjectiveHandle(lambda x: 0.5 * float(x @ x), 20)
        x0 = np.ones(20)
        config = DriverConfig(
            p=1, max_evaluations=2500, iteration_kind="ds-complete", expand_factor=2.0
        )
        trace = run_driver(obj, x0, config, RngStream(11))
        final = trace.final
        # Gradient of the half squared norm is the iterate itself.
        assert np.linalg.norm(final.iterate) < 0.1 * np.linalg.norm(x0)

    def test_evaluation_accounting_per_iteration(self):
        g = sample_unit_vector(12, RngStream(4)).coords
        for kind, cost in (("ds-complete", 6), ("mb", 4)):
            trace = run_driver(
                linear_objective(g),
                np.zeros(12),
                DriverConfig(p=3, max_evaluations=120, iteration_kind=kind),
                RngStream(5),
            )
            counts = np.array([r.eval_count for r in trace.records])
            assert np.all(np.diff(counts) == cost)

    def test_step_floor_stops(self):
        obj = ObjectiveHandle(lambda x: float(x @ x), 3)
        config = DriverConfig(
            p=1, max_evaluations=10_000, initial_step=1.0, min_step=0.25, contract_factor=0.5
        )
        trace = run_driver(obj, np.zeros(3), config, RngStream(0))
        # From the origin of the sphere every poll fails, so the step halves
        # each iteration (1.0, 0.5, 0.25) and the next value crosses the floor.
        assert trace.final.step_size == 0.25
        assert len(trace.records) == 4
        assert trace.final.eval_count == 7

    def test_basis_reconstruction_from_stream(self):
        # Iteration k draws its basis from child stream k of the driver stream.
        d, p = 10, 2
        g = sample_unit_vector(d, RngStream(6)).coords
        driver_rng = RngStream(777)
        trace = run_driver(
            linear_objective(g),
            np.zeros(d),
            DriverConfig(p=p, max_evaluations=40),
            driver_rng,
        )
        best = trace.best_values()
        for k in range(1, len(trace.records)):
            basis = sample_stiefel(d, p, split_stream(driver_rng, k - 1))
            expected = trace.records[k].step_size * np.max(np.abs(basis.columns.T @ g))
            assert best[k - 1] - best[k] == pytest.approx(expected, abs=1e-12)

    def test_dimension_mismatch(self):
        g = sample_unit_vector(4, RngStream(0)).coords
        with pytest.raises(InvalidDimensionError):
            run_driver(
                linear_objective(g), np.zeros(5), DriverConfig(p=1, max_evaluations=10), RngStream(0)
            )
        with pytest.raises(InvalidDimensionError):
            run_driver(
                linear_objective(g), np.zeros(4), DriverConfig(p=5, max_evaluations=10), RngStream(0)
            )

    def test_non_finite_objective_aborts(self):
        obj = ObjectiveHandle(lambda x: math.nan if x[0] != 0.0 else 0.0, 2)
        with pytest.raises(NonFiniteObjectiveError):
            run_driver(obj, np.zeros(2), DriverConfig(p=1, max_evaluations=10), RngStream(0))


class TestDriverConfigValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(p=0, max_evaluations=1),
            dict(p=1, max_evaluations=-1),
            dict(p=1, max_evaluations=1, initial_step=0.0),
            dict(p=1, max_evaluations=1, contract_factor=1.0),
            dict(p=1, max_evaluations=1, expand_factor=0.9),
            dict(p=1, max_evaluations=1, iteration_kind="newton"),
        ],
    )
    def test_rejects_bad_config(self, kwargs):
        with pytest.raises(Exception):
            DriverConfig(**kwargs)


class TestSmoothDecreaseBound:
    def test_chosen_direction_mean_decrease(self):
        # For a gradient-Lipschitz objective and the one-dimensional polling
        # scheme, the mean decrease at a fixed point is at least half the
        # directional-derivative gain once the step is small enough.
        d, n, delta = 10, 20_000, 0.2
        x = np.zeros(d)
        x[0] = 1.0

        def f(y):
            return 0.5 * float(y @ y)

        base = RngStream(17)
        decreases = np.empty(n)
        directional = np.empty(n)
        for i in range(n):
            b = sample_unit_vector(d, split_stream(base, i)).coords
            candidates = (x + delta * b, x - delta * b, x)
            values = [f(c) for c in candidates]
            j = int(np.argmin(values))
            decreases[i] = values[j] - f(x)
            directional[i] = (x @ (candidates[j] - x)) / delta
        gamma = -directional.mean()
        assert gamma > 0.0
        mean = decreases.mean()
        se = decreases.std(ddof=1) / math.sqrt(n)
        assert mean <= -(gamma / 2.0) * delta + 3.0 * se
