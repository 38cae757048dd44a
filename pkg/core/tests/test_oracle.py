import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import InvalidPerturbation
from core.numerics.fredholm import diagnose
from core.numerics.funcspace import SampledMatrixFunction
from core.numerics.oracle import (
    MAX_R, TRIAL_KINDS, PerturbationTrace, assemble_collocation, default_epsilons, numerical_index,
    perturbation_study, random_trial, run_trial, run_trials, trial_seeds,
)
from core.tests.utils import constant_problem, unit_grid


class CollocationTests(SimpleTestCase):

    def test_shape(self):
        problem = constant_problem(unit_grid(21), np.eye(3), 'cauchy_truncated', r=2)
        system = assemble_collocation(problem)
        self.assertEqual(system.shape, (3 * 20 + 2, 3 * 21))
        self.assertEqual(system.row_blocks[-1], ('boundary', 0))

    def test_well_posed_problem(self):
        problem = constant_problem(unit_grid(41), [[0.0, -1.0], [1.0, 0.0]])
        self.assertEqual(tuple(numerical_index(assemble_collocation(problem))), (0, 0, 0))

    def test_periodic_zero_coefficient(self):
        problem = constant_problem(unit_grid(41), np.zeros((2, 2)), 'periodic')
        result = numerical_index(assemble_collocation(problem))
        self.assertEqual(tuple(result), (2, 2, 0))
        self.assertGreater(result.spectral_gap, 1e3)

    def test_rectangular_index(self):
        problem = constant_problem(unit_grid(41), np.eye(2), 'cauchy_padded', r=5)
        dim_kernel, dim_cokernel, index = numerical_index(assemble_collocation(problem))
        self.assertEqual((dim_kernel, dim_cokernel, index), (0, 3, -3))

    def test_higher_order_operator(self):
        kernel = SampledMatrixFunction.constant(unit_grid(41), [[1.0, 0.0]])
        problem = constant_problem(unit_grid(41), [[0.0, -1.0], [1.0, 0.0]], 'integral', n=2, kernel=kernel)
        report = diagnose(problem)
        result = numerical_index(assemble_collocation(problem))
        self.assertEqual((result.dim_kernel, result.dim_cokernel), (report.dim_kernel, report.dim_cokernel))


class TrialTests(SimpleTestCase):

    def test_recipes_are_reproducible(self):
        first, second = random_trial(12345), random_trial(12345)
        self.assertEqual((first.m, first.n, first.kind), (second.m, second.n, second.kind))
        np.testing.assert_array_equal(first.coefficient, second.coefficient)
        redraws = {random_trial(12345, attempt).coefficient.tobytes() for attempt in range(10)}
        self.assertGreater(len(redraws), 1)

    def test_recipes_cover_the_corpus(self):
        recipes = [random_trial(seed) for seed in range(400)]
        self.assertEqual({recipe.kind for recipe in recipes}, set(TRIAL_KINDS))
        self.assertEqual({recipe.m for recipe in recipes}, {1, 2, 3, 4})
        self.assertEqual({recipe.n for recipe in recipes}, {1, 2})
        for recipe in recipes:
            problem = recipe.build(41)
            self.assertLessEqual(problem.r, MAX_R)
            self.assertLessEqual(recipe.coefficient.shape[0], 4)

    def test_seeds_are_reproducible(self):
        self.assertEqual(trial_seeds(1, 5), trial_seeds(1, 5))
        self.assertNotEqual(trial_seeds(1, 5), trial_seeds(2, 5))
        self.assertTrue(all(0 <= seed < 2 ** 64 for seed in trial_seeds(1, 5)))

    def test_single_trial(self):
        result = run_trial(3, grid_points=201)
        self.assertTrue(result.agree)
        self.assertEqual(result.index, result.m - result.r)
        self.assertEqual(result.oracle_index, result.index)

    def test_index_theorem_on_random_corpus(self):
        results = run_trials(1, 200, grid_points=201)
        self.assertEqual(len(results), 200)
        failing = [(result.seed, result.kind) for result in results if not result.agree]
        self.assertEqual(failing, [])
        for result in results:
            self.assertEqual((result.index, result.oracle_index), (result.m - result.r,) * 2)


class PerturbationTests(SimpleTestCase):

    def setUp(self):
        self.grid = unit_grid(201)
        self.A0 = SampledMatrixFunction.from_polynomial(self.grid, [[[0.0, 1.0], [-1.0, 0.0]], [[0.5, 0.0], [0.0, 0.2]]], 1)
        self.D = SampledMatrixFunction.from_callable(self.grid, lambda t: np.stack([
            np.stack([np.cos(t), t], -1), np.stack([0 * t, np.exp(-t)], -1),
        ], -2), 1)

    def test_default_epsilons(self):
        epsilons = default_epsilons()
        self.assertEqual(len(epsilons), 9)
        self.assertEqual(epsilons[0], 0.1)
        self.assertEqual(epsilons[-1], 0.1 / 256)

    def test_gaps_shrink_with_epsilon(self):
        for n in (1, 2):
            with self.subTest(n=n):
                trace = perturbation_study(self.A0, self.D, n=n)
                self.assertIsNone(trace.truncated_at)
                for gaps in (trace.output_gaps, trace.sup_gaps, trace.recovered_gaps):
                    self.assertTrue(all(later < earlier for earlier, later in zip(gaps, gaps[1:])))
                    self.assertLess(gaps[-1] / gaps[0], 1e-2)
                self.assertTrue(math.isfinite(trace.K))
                self.assertGreaterEqual(trace.K, 1.0)

    def test_scalar_gaps_are_linear_in_epsilon(self):
        one = SampledMatrixFunction.constant(unit_grid(1001), [[1.0]])
        trace = perturbation_study(one, one, [0.1, 0.01, 0.001], n=1, p=2.0)
        gaps = trace.output_gaps
        self.assertTrue(gaps[0] > gaps[1] > gaps[2])
        self.assertTrue(0.05 <= gaps[2] / gaps[1] <= 0.2)
        # Y_eps = exp(-(1 + eps) t) : le coefficient reconstruit suit le même ordre
        ratios = [recovered / output for recovered, output in zip(trace.recovered_gaps, gaps)]
        self.assertAlmostEqual(ratios[2] / ratios[1], 1.0, delta=0.1)

    def test_zero_direction(self):
        zero = SampledMatrixFunction.zeros(self.grid, 2, 2, 1)
        trace = perturbation_study(self.A0, zero, [0.1, 0.01])
        self.assertEqual(trace.output_gaps, [0.0, 0.0])
        self.assertEqual(trace.input_gaps, [0.0, 0.0])
        self.assertTrue(math.isnan(trace.K))

    def test_rows_follow_columns(self):
        trace = perturbation_study(self.A0, self.D, [0.1, 0.05])
        rows = trace.to_rows()
        self.assertEqual(len(rows), 2)
        self.assertEqual(len(rows[0]), len(PerturbationTrace.COLUMNS))
        self.assertEqual(rows[1][0], 0.05)

    def test_epsilons_must_decrease(self):
        for epsilons in ([], [0.1, 0.2], [0.1, 0.1]):
            with self.assertRaises(InvalidPerturbation):
                perturbation_study(self.A0, self.D, epsilons)

    def test_blow_up_truncates_trace(self):
        A0 = SampledMatrixFunction.constant(unit_grid(1001), [[0.0]])
        D = SampledMatrixFunction.constant(unit_grid(1001), [[-1.0]])
        with self.assertLogs('core.numerics.oracle', 'WARNING'):
            trace = perturbation_study(A0, D, [1e5, 1.0, 0.5])
        self.assertEqual(trace.truncated_at, 1e5)
        self.assertEqual(trace.epsilons, [])
