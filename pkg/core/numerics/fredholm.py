"""
Diagnostic de Fredholm de l'opérateur (L, B) : indice m - r, dimensions du noyau
et du conoyau lues sur le rang numérique de [BY], verdict de bonne position.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from core.conf import fredholm_settings
from core.numerics.boundary import apply_boundary_matrix
from core.numerics.matricant import compute_matricant

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FredholmReport:
    m: int
    r: int
    n: int
    p: float
    index: int
    rank: int
    dim_kernel: int
    dim_cokernel: int
    well_posed: bool
    det_BY: complex | None
    condition_number: float
    rank_tolerance: float
    singular_values: tuple = ()
    marginal_rank: bool = False


def _is_marginal(charmat):
    threshold = charmat.threshold
    if threshold == 0:
        return False
    factor = fredholm_settings.MARGINAL_FACTOR
    sigma = charmat.singular_values
    return bool(np.any((sigma > threshold / factor) & (sigma < threshold * factor)))


def build_report(charmat, n, p):
    """Remplit le rapport à partir de [BY] déjà calculée"""
    r, m = charmat.r, charmat.m
    rank = charmat.rank()
    well_posed = r == m and rank == m
    sigma = charmat.singular_values
    condition_number = float(sigma[0] / sigma[-1]) if well_posed else math.inf
    marginal = _is_marginal(charmat)
    if marginal:
        logger.warning(
            "Rang numérique de [BY] marginal : une valeur singulière est à moins d'un facteur %g "
            "du seuil %.3e", fredholm_settings.MARGINAL_FACTOR, charmat.threshold
        )
    return FredholmReport(
        m=m,
        r=r,
        n=n,
        p=p,
        index=m - r,
        rank=rank,
        dim_kernel=m - rank,
        dim_cokernel=r - rank,
        well_posed=well_posed,
        det_BY=complex(linalg.det(charmat.entries)) if r == m else None,
        condition_number=condition_number,
        rank_tolerance=charmat.rank_tolerance,
        singular_values=tuple(float(s) for s in sigma),
        marginal_rank=marginal,
    )


def analyse(problem, rank_tolerance=None):
    """Matricante, [BY] et rapport ; point d'entrée commun de diagnose et du solveur"""
    matricant = compute_matricant(problem.A, problem.n)
    charmat = apply_boundary_matrix(problem.B, matricant, rank_tolerance)
    report = build_report(charmat, problem.n, problem.grid.p)
    logger.info("Diagnostic : m = %d, r = %d, rang [BY] = %d, bien posé = %s",
                report.m, report.r, report.rank, report.well_posed)
    return matricant, charmat, report


def diagnose(problem, rank_tolerance=None):
    return analyse(problem, rank_tolerance)[2]


def kernel_functions(matricant, charmat):
    return [matricant.Y.times_constant(q) for q in charmat.null_space().T]


def kernel_basis(problem, rank_tolerance=None):
    """Base y_i = Y q_i du noyau de (L, B), q_i parcourant le noyau numérique de [BY]"""
    matricant, charmat, _ = analyse(problem, rank_tolerance)
    return kernel_functions(matricant, charmat)
