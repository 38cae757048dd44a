import math
from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase, override_settings
from scipy import linalg

from core.numerics.boundary import CharacteristicMatrix, apply_boundary
from core.numerics.fredholm import build_report, diagnose, kernel_basis
from core.numerics.funcspace import Grid, SampledMatrixFunction
from core.numerics.oracle import random_trial
from core.numerics.solver import ProblemSpec, ode_residual
from core.tests.utils import constant_problem, unit_grid


class ReportTests(SimpleTestCase):

    def test_initial_value_is_well_posed(self):
        report = diagnose(constant_problem(unit_grid(101), [[0.0, -1.0], [1.0, 0.0]]))
        self.assertTrue(report.well_posed)
        self.assertEqual((report.index, report.rank, report.dim_kernel, report.dim_cokernel), (0, 2, 0, 0))
        self.assertAlmostEqual(report.det_BY, 1.0)
        self.assertAlmostEqual(report.condition_number, 1.0)
        self.assertFalse(report.marginal_rank)

    def test_periodic_with_zero_coefficient(self):
        report = diagnose(constant_problem(unit_grid(101), np.zeros((3, 3)), 'periodic'))
        self.assertFalse(report.well_posed)
        self.assertEqual(report.rank, 0)
        self.assertEqual(report.dim_kernel, 3)
        self.assertEqual(report.dim_cokernel, 3)
        self.assertEqual(report.condition_number, math.inf)

    def test_periodic_determinant_matches_closed_form(self):
        report = diagnose(constant_problem(unit_grid(1001), np.diag([1.0, 2.0]), 'periodic'))
        expected = (math.exp(-1) - 1) * (math.exp(-2) - 1)
        self.assertTrue(report.well_posed)
        self.assertAlmostEqual(report.det_BY, expected, delta=1e-9)

    def test_rectangular_problems(self):
        grid = unit_grid(101)
        padded = diagnose(constant_problem(grid, np.eye(2), 'cauchy_padded', r=4))
        self.assertEqual((padded.index, padded.dim_kernel, padded.dim_cokernel), (-2, 0, 2))
        self.assertIsNone(padded.det_BY)
        truncated = diagnose(constant_problem(grid, np.eye(3), 'cauchy_truncated', r=1))
        self.assertEqual((truncated.index, truncated.dim_kernel, truncated.dim_cokernel), (2, 2, 0))
        self.assertFalse(truncated.well_posed)

    def test_integral_condition_determinant(self):
        # y' + y = 0, By = int_0^1 y : [BY] = 1 - 1/e
        grid = unit_grid(1001)
        kernel = SampledMatrixFunction.constant(grid, [[1.0]])
        problem = constant_problem(grid, [[1.0]], 'integral', kernel=kernel)
        self.assertAlmostEqual(diagnose(problem).det_BY, 1 - math.exp(-1), delta=1e-9)

    def test_exponent_is_reported(self):
        grid = Grid(0.0, 1.0, 11, 'inf')
        report = diagnose(constant_problem(grid, [[1.0]]))
        self.assertEqual(report.p, math.inf)

    def test_verdict_is_invariant_under_scaling_of_B(self):
        grid = Grid(0.0, math.pi, 401)
        rotation = [[0.0, -1.0], [1.0, 0.0]]
        problems = [
            constant_problem(grid, rotation),
            constant_problem(grid, rotation, 'two_point', M_a=[[1.0, 0.0], [0.0, 0.0]], M_b=[[0.0, 0.0], [1.0, 0.0]]),
            constant_problem(grid, np.zeros((2, 2)), 'periodic'),
            constant_problem(grid, rotation, 'cauchy_padded', r=3),
        ]
        for problem in problems:
            report = diagnose(problem)
            for factor in (1e-3, 1e3, -2 + 1j):
                with self.subTest(kind=problem.B.kind, factor=factor):
                    scaled = diagnose(replace(problem, B=problem.B.scaled(factor)))
                    self.assertEqual(
                        (scaled.well_posed, scaled.rank, scaled.dim_kernel, scaled.dim_cokernel, scaled.index),
                        (report.well_posed, report.rank, report.dim_kernel, report.dim_cokernel, report.index),
                    )
        scaled = diagnose(replace(problems[0], B=problems[0].B.scaled(-2 + 1j)))
        self.assertAlmostEqual(scaled.det_BY, (-2 + 1j) ** 2)

    def test_marginal_rank_is_flagged(self):
        entries = np.diag([1.0, 3e-8]).astype(complex)
        charmat = CharacteristicMatrix(entries, linalg.svdvals(entries), 1e-8)
        with self.assertLogs('core.numerics.fredholm', 'WARNING'):
            report = build_report(charmat, 1, 2.0)
        self.assertTrue(report.marginal_rank)
        self.assertEqual(report.rank, 2)

    @override_settings(FREDHOLM={'RANK_TOL': 1e-3})
    def test_rank_tolerance_from_settings(self):
        problem = constant_problem(unit_grid(101), np.zeros((2, 2)), 'two_point',
                                   M_a=np.diag([1.0, 0.0]), M_b=np.diag([0.0, 1e-5]))
        self.assertEqual(diagnose(problem).rank, 1)
        self.assertEqual(diagnose(problem, rank_tolerance=1e-8).rank, 2)


class IndexTheoremTests(SimpleTestCase):

    def test_index_and_dimensions_are_consistent(self):
        for seed in range(60):
            recipe = random_trial(seed)
            report = diagnose(recipe.build(101))
            with self.subTest(seed=seed, kind=recipe.kind):
                self.assertEqual(report.index, report.m - report.r)
                self.assertEqual(report.dim_kernel - report.dim_cokernel, report.index)
                self.assertEqual(report.well_posed, report.r == report.m == report.rank)


class KernelTests(SimpleTestCase):

    def setUp(self):
        self.grid = Grid(0.0, math.pi, 1001)
        self.problem = constant_problem(self.grid, [[0.0, -1.0], [1.0, 0.0]], 'two_point',
                                        M_a=[[1.0, 0.0], [0.0, 0.0]], M_b=[[0.0, 0.0], [1.0, 0.0]])

    def test_dirichlet_rotation_has_sine_kernel(self):
        basis = kernel_basis(self.problem)
        self.assertEqual(len(basis), 1)
        y = basis[0]
        np.testing.assert_allclose(apply_boundary(self.problem.B, y), 0, atol=1e-8)
        self.assertLess(ode_residual(self.problem, y), 1e-6)
        # y1 proportionnel à sin t
        first = y.values[:, 0, 0]
        scale = first[500]
        np.testing.assert_allclose(first, scale * np.sin(self.grid.points), atol=1e-8)

    def test_kernel_is_empty_when_well_posed(self):
        problem = constant_problem(self.grid, [[0.0, -1.0], [1.0, 0.0]])
        self.assertEqual(kernel_basis(problem), [])

    def test_periodic_zero_coefficient_kernel_is_the_constants(self):
        problem = constant_problem(unit_grid(101), np.zeros((2, 2)), 'periodic')
        basis = kernel_basis(problem)
        self.assertEqual(len(basis), 2)
        for y in basis:
            np.testing.assert_allclose(y.values, np.broadcast_to(y.values[:1], y.values.shape), atol=1e-12)
        starts = np.column_stack([y.values[0, :, 0] for y in basis])
        np.testing.assert_allclose(starts.conj().T @ starts, np.eye(2), atol=1e-12)

    def test_truncated_cauchy_kernel_is_second_unit_vector(self):
        problem = constant_problem(unit_grid(101), np.zeros((2, 2)), 'cauchy_truncated', r=1)
        basis = kernel_basis(problem)
        self.assertEqual(len(basis), 1)
        y = basis[0]
        np.testing.assert_allclose(y.values[:, 0, 0], 0, atol=1e-12)
        np.testing.assert_allclose(np.abs(y.values[:, 1, 0]), 1, atol=1e-12)
        self.assertLess(ode_residual(problem, y), 1e-9)
        self.assertLess(np.abs(apply_boundary(problem.B, y)).max(), 1e-9)

    def test_problem_spec_validates_dimensions(self):
        with self.assertRaises(ValueError):
            ProblemSpec(self.grid, self.problem.A, self.problem.f, self.problem.B, [0.0])
