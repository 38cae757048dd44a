from pathlib import Path

import numpy as np

from core.numerics import boundary
from core.numerics.funcspace import Grid, SampledMatrixFunction
from core.numerics.solver import ProblemSpec

FIXTURES = Path(__file__).resolve().parent.parent / 'fixtures' / 'problems'


def fixture(name):
    return str(FIXTURES / name)


def expected_lines(name):
    return (FIXTURES / name).read_text(encoding='utf-8').splitlines()


def constant_problem(grid, A, kind='initial_value', f=None, c=None, n=1, **params):
    """Problème à coefficient constant A (m x m) et condition préréglée"""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    m = A.shape[0]
    coefficient = SampledMatrixFunction.constant(grid, A, n - 1)
    B = boundary.preset(kind, grid, m, n, **params)
    if f is None:
        f = SampledMatrixFunction.zeros(grid, m, 1, n - 1)
    c = np.zeros(B.r) if c is None else c
    return ProblemSpec(grid, coefficient, f, B, c)


def rotation_coefficient(grid, deriv_order=0):
    return SampledMatrixFunction.constant(grid, [[0, -1], [1, 0]], deriv_order)


def unit_grid(N=201, p=2.0):
    return Grid(0.0, 1.0, N, p)
