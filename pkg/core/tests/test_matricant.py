import numpy as np
from django.test import SimpleTestCase

from core.exceptions import DimensionMismatch, MatricantBlowUp, MissingDerivativeLayers, NearSingularError
from core.numerics.funcspace import INF, Grid, SampledMatrixFunction, SobolevIndex, sobolev_norm
from core.numerics.matricant import (
    coefficient_digest, compute_matricant, invert_matrix_function, liouville_residual, midpoint_values,
    recover_coefficient,
)
from core.tests.utils import rotation_coefficient, unit_grid

CORPUS = {
    'scalaire': [[2.0]],
    'diagonal': [[[1.0, 0.0], [0.0, -0.5]], [[0.0, 0.0], [0.0, 1.0]]],
    'rotation': [[[0.0, -1.0], [1.0, 0.0]]],
    'couplé': [
        [[0.2, 0.1, 0.0], [0.0, -0.3, 0.5], [0.1, 0.0, 0.4]],
        [[0.0, 0.3, 0.1], [0.2, 0.0, 0.0], [0.0, -0.1, 0.3]],
        [[0.1, 0.0, 0.0], [0.0, 0.0, 0.2], [0.0, 0.1, 0.0]],
    ],
    'complexe_4x4': np.array([np.eye(4) * 0.3 + 0.2j * np.diag(np.ones(3), 1), 0.1 * np.ones((4, 4))]),
}


def polynomial_coefficient(grid, coefficients, deriv_order=0):
    coefficients = np.asarray(coefficients, dtype=complex)
    if coefficients.ndim == 2:
        coefficients = coefficients[None]
    return SampledMatrixFunction.from_polynomial(grid, coefficients, deriv_order)


class ClosedFormTests(SimpleTestCase):

    def setUp(self):
        self.grid = unit_grid(1001)
        self.t = self.grid.points

    def test_scalar_exponential(self):
        A = SampledMatrixFunction.constant(self.grid, [[2.0]])
        Y = compute_matricant(A, 1).Y
        np.testing.assert_allclose(Y.values[:, 0, 0], np.exp(-2 * self.t), atol=1e-8)
        np.testing.assert_allclose(Y.layer(1)[:, 0, 0], -2 * np.exp(-2 * self.t), atol=1e-8)

    def test_diagonal_time_dependent(self):
        A = polynomial_coefficient(self.grid, CORPUS['diagonal'])
        Y = compute_matricant(A, 1).Y.values
        np.testing.assert_allclose(Y[:, 0, 0], np.exp(-self.t), atol=1e-8)
        np.testing.assert_allclose(Y[:, 1, 1], np.exp(0.5 * self.t - self.t ** 2 / 2), atol=1e-8)
        np.testing.assert_allclose(Y[:, 0, 1], 0, atol=1e-14)

    def test_rotation(self):
        grid = Grid(0.0, np.pi, 1001)
        Y = compute_matricant(rotation_coefficient(grid), 1).Y.values
        t = grid.points
        expected = np.stack([np.stack([np.cos(t), np.sin(t)], -1), np.stack([-np.sin(t), np.cos(t)], -1)], -2)
        np.testing.assert_allclose(Y, expected, atol=1e-8)

    def test_starts_at_identity(self):
        A = polynomial_coefficient(self.grid, CORPUS['couplé'], 1)
        matricant = compute_matricant(A, 2)
        np.testing.assert_array_equal(matricant.Y.at_start(), np.eye(3))
        self.assertEqual(matricant.n, 2)
        self.assertEqual(matricant.m, 3)

    def test_layers_follow_the_equation(self):
        A = polynomial_coefficient(self.grid, CORPUS['couplé'], 2)
        Y = compute_matricant(A, 3).Y
        np.testing.assert_allclose(Y.layer(1), -A.values @ Y.values, atol=1e-14)
        # Y'' = -A' Y - A Y'
        np.testing.assert_allclose(Y.layer(2), -A.layer(1) @ Y.values - A.values @ Y.layer(1), atol=1e-13)


class LiouvilleTests(SimpleTestCase):

    def test_residual_is_small_on_corpus(self):
        grid = unit_grid(1001)
        for name, coefficients in CORPUS.items():
            with self.subTest(name):
                A = polynomial_coefficient(grid, coefficients)
                self.assertLess(liouville_residual(compute_matricant(A, 1), A), 1e-8)

    def test_determinant_never_vanishes(self):
        grid = unit_grid(201)
        A = polynomial_coefficient(grid, CORPUS['complexe_4x4'])
        self.assertGreater(np.abs(compute_matricant(A, 1).det_profile).min(), 0.1)


class InverseTests(SimpleTestCase):

    def test_pointwise_inverse_for_every_size(self):
        grid = unit_grid(201)
        for name, coefficients in CORPUS.items():
            with self.subTest(name):
                A = polynomial_coefficient(grid, coefficients, 1)
                Y = compute_matricant(A, 2).Y
                Z = invert_matrix_function(Y)
                m = Y.rows
                np.testing.assert_allclose(Y.values @ Z.values, np.broadcast_to(np.eye(m), Y.values.shape),
                                           atol=1e-9)
                # (Y Z)' = 0
                product_derivative = Y.layer(1) @ Z.values + Y.values @ Z.layer(1)
                np.testing.assert_allclose(product_derivative, 0, atol=1e-9)

    def test_singular_point_is_reported(self):
        grid = unit_grid(101)
        Y = SampledMatrixFunction.from_polynomial(grid, [[[0.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 0.0]]])
        with self.assertRaises(NearSingularError) as caught:
            invert_matrix_function(Y)
        self.assertEqual(caught.exception.t, 0.0)
        self.assertEqual(caught.exception.det, 0.0)

    def test_det_floor_is_configurable(self):
        grid = unit_grid(11)
        Y = SampledMatrixFunction.constant(grid, [[1e-6]])
        with self.assertRaises(NearSingularError):
            invert_matrix_function(Y, det_floor=1e-3)
        np.testing.assert_allclose(invert_matrix_function(Y).values, 1e6)

    def test_rejects_rectangular(self):
        with self.assertRaises(DimensionMismatch):
            invert_matrix_function(SampledMatrixFunction.zeros(unit_grid(11), 2, 3))


class RoundTripTests(SimpleTestCase):

    def test_recovered_coefficient_matches(self):
        grid = unit_grid(1001)
        for name, coefficients in CORPUS.items():
            for n in (1, 2, 3):
                A = polynomial_coefficient(grid, coefficients, n - 1)
                recovered = recover_coefficient(compute_matricant(A, n))
                self.assertEqual(recovered.deriv_order, n - 1)
                for p in (1, 2, INF):
                    with self.subTest(name, n=n, p=p):
                        gap = sobolev_norm(recovered - A, SobolevIndex(n - 1, p))
                        self.assertLess(gap, 1e-5)

    def test_digest_identifies_coefficient(self):
        grid = unit_grid(11)
        first = SampledMatrixFunction.constant(grid, [[1.0]])
        second = SampledMatrixFunction.constant(grid, [[1.0 + 1e-12]])
        self.assertEqual(coefficient_digest(first), coefficient_digest(SampledMatrixFunction.constant(grid, [[1.0]])))
        self.assertNotEqual(coefficient_digest(first), coefficient_digest(second))
        self.assertEqual(compute_matricant(first, 1).a_source, coefficient_digest(first))


class FailureTests(SimpleTestCase):

    def test_blow_up_reports_t(self):
        A = SampledMatrixFunction.constant(unit_grid(1001), [[-1e4]])
        with self.assertRaises(MatricantBlowUp) as caught:
            compute_matricant(A, 1)
        self.assertGreater(caught.exception.t, 0.0)
        self.assertLessEqual(caught.exception.t, 1.0)

    def test_requires_layers(self):
        A = SampledMatrixFunction.identity(unit_grid(11), 2)
        with self.assertRaises(MissingDerivativeLayers):
            compute_matricant(A, 2)

    def test_requires_square_coefficient(self):
        with self.assertRaises(DimensionMismatch):
            compute_matricant(SampledMatrixFunction.zeros(unit_grid(11), 2, 1), 1)

    def test_rough_coefficient_warns(self):
        grid = unit_grid(101)
        step = np.where(grid.points < 0.5, 0.0, 5.0)
        A = SampledMatrixFunction.from_values(grid, step)
        with self.assertLogs('core.numerics.matricant', 'WARNING'):
            compute_matricant(A, 1)


class MidpointTests(SimpleTestCase):

    def test_cubic_interpolation_is_exact_on_cubics(self):
        grid = unit_grid(11)
        t = grid.points
        cubic = lambda s: 1 - 2 * s + s ** 3
        np.testing.assert_allclose(midpoint_values(cubic(t)), cubic(t[:-1] + grid.h / 2), atol=1e-14)
