"""
Résolution du problème y' + A y = f, By = c.

Solution cherchée sous la forme y = Y q + y_part (variation des constantes) ;
q est donné par [BY] q = c - B y_part.
"""
import logging
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from core.conf import resolve
from core.exceptions import DimensionMismatch, IllConditionedError, NotWellPosed
from core.numerics.boundary import BoundaryOperator, apply_boundary
from core.numerics.fredholm import analyse, kernel_functions
from core.numerics.funcspace import Grid, SampledMatrixFunction, cumulative_simpson, stencil_derivative
from core.numerics.matricant import compute_matricant, invert_matrix_function

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    grid: Grid
    A: SampledMatrixFunction
    f: SampledMatrixFunction
    B: BoundaryOperator
    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=complex).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, 'c', c)
        if self.A.rows != self.A.cols:
            raise DimensionMismatch(f"Le coefficient A doit être carré, reçu {self.A.rows}x{self.A.cols}")
        for name, function in (('A', self.A), ('f', self.f), ('Phi', self.B.Phi)):
            if not function.grid.same_nodes(self.grid):
                raise DimensionMismatch(f"{name} n'est pas échantillonné sur la grille du problème")
        if self.f.shape != (self.m, 1):
            raise DimensionMismatch(f"Le second membre f doit être {self.m}x1, reçu {self.f.rows}x{self.f.cols}")
        if self.B.m != self.m:
            raise DimensionMismatch(f"B agit sur {self.B.m} composantes, le système en a {self.m}")
        if self.B.r != c.size:
            raise DimensionMismatch(f"B a {self.B.r} lignes mais c a {c.size} composantes")
        self.A.require_layers(self.n - 1, 'Le coefficient A')
        self.f.require_layers(self.n - 1, 'Le second membre f')

    @property
    def m(self):
        return self.A.rows

    @property
    def n(self):
        return self.B.n

    @property
    def r(self):
        return self.B.r

    def with_data(self, f=None, c=None):
        return replace(self, f=self.f if f is None else f, c=self.c if c is None else c)


@dataclass(frozen=True, eq=False)
class BvpSolution:
    y: SampledMatrixFunction
    q: np.ndarray
    y_part: SampledMatrixFunction
    ode_residual: float
    boundary_residual: float
    report: object = None


@dataclass(frozen=True, eq=False)
class GeneralSolution:
    solvable: bool
    residual: float
    q: np.ndarray
    y: SampledMatrixFunction | None
    kernel: list
    report: object = None


def particular_solution(A, f, n=None, matricant=None, det_floor=None):
    """y_part(t) = Y(t) int_a^t Y^{-1}(s) f(s) ds, couches par y' = f - A y"""
    n = min(A.deriv_order, f.deriv_order) + 1 if n is None else n
    A.require_layers(n - 1, 'Le coefficient A')
    f.require_layers(n - 1, 'Le second membre f')
    if matricant is None:
        matricant = compute_matricant(A.truncate(0), 1)
    Y = matricant.Y.truncate(0)
    Z = invert_matrix_function(Y, 0, det_floor).values

    y0 = Y.values @ cumulative_simpson(Z @ f.values, A.grid.h)
    y0[0] = 0
    layers = [y0]
    for k in range(n):
        coupling = sum(math.comb(k, j) * (A.samples[j] @ layers[k - j]) for j in range(k + 1))
        layers.append(f.samples[k] - coupling)
    return SampledMatrixFunction.from_layers(A.grid, layers)


def ode_residual(problem, y):
    """max |y' + A y - f|, y' étant redérivé des échantillons par différences finies"""
    derivative = stencil_derivative(y.values, problem.grid.h)
    residual = derivative + problem.A.values @ y.values - problem.f.values
    return float(np.abs(residual).max())


def boundary_residual(problem, y):
    return float(np.abs(apply_boundary(problem.B, y) - problem.c).max())


def solve(problem, rank_tolerance=None, det_floor=None, max_condition=None):
    """Solution unique d'un problème bien posé ; lève NotWellPosed sinon"""
    max_condition = resolve(max_condition, 'MAX_CONDITION')
    matricant, charmat, report = analyse(problem, rank_tolerance)
    if not report.well_posed:
        raise NotWellPosed(report)
    if report.condition_number > max_condition:
        logger.warning("[BY] mal conditionnée : %.3e > %.3e", report.condition_number, max_condition)
        raise IllConditionedError(report.condition_number)

    y_part = particular_solution(problem.A, problem.f, problem.n, matricant, det_floor)
    rhs = problem.c - apply_boundary(problem.B, y_part)
    with warnings.catch_warnings():
        warnings.simplefilter('error', linalg.LinAlgWarning)
        try:
            q = linalg.solve(charmat.entries, rhs)
        except (linalg.LinAlgError, linalg.LinAlgWarning):
            raise IllConditionedError(report.condition_number) from None

    y = matricant.Y.times_constant(q) + y_part
    solution = BvpSolution(
        y=y,
        q=q,
        y_part=y_part,
        ode_residual=ode_residual(problem, y),
        boundary_residual=boundary_residual(problem, y),
        report=report,
    )
    logger.info("Résidus : équation %.3e, conditions aux limites %.3e",
                solution.ode_residual, solution.boundary_residual)
    return solution


def general_solution(problem, rank_tolerance=None, consistency_tol=None, det_floor=None):
    """Ensemble affine des solutions (solution de norme minimale + noyau), ou verdict d'insolubilité"""
    consistency_tol = resolve(consistency_tol, 'CONSISTENCY_TOL')
    matricant, charmat, report = analyse(problem, rank_tolerance)
    y_part = particular_solution(problem.A, problem.f, problem.n, matricant, det_floor)
    rhs = problem.c - apply_boundary(problem.B, y_part)

    cutoff = charmat.rank_tolerance * max(charmat.r, charmat.m)
    q, *_ = linalg.lstsq(charmat.entries, rhs, cond=cutoff)
    residual = float(np.linalg.norm(charmat.entries @ q - rhs))
    solvable = residual <= consistency_tol * (1 + np.linalg.norm(problem.c))
    if not solvable:
        logger.info("Problème insoluble : résidu %.3e hors de l'image de [BY]", residual)
    return GeneralSolution(
        solvable=solvable,
        residual=residual,
        q=q,
        y=matricant.Y.times_constant(q) + y_part if solvable else None,
        kernel=kernel_functions(matricant, charmat),
        report=report,
    )
