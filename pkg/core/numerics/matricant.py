"""
Matricante Y du système y' + A y = 0 : Y' = -A Y, Y(a) = I_m.

Intégration RK4 sur la grille de stockage ; les couches de dérivées de Y viennent
de la récurrence de Leibniz Y^(k+1) = -sum_j C(k, j) A^(j) Y^(k-j), jamais d'une
différentiation numérique de Y.
"""
import hashlib
import logging
import math
from dataclasses import dataclass

import numpy as np

from core.conf import resolve
from core.exceptions import DimensionMismatch, MatricantBlowUp, NearSingularError
from core.numerics.funcspace import SampledMatrixFunction, cumulative_simpson, multiply

logger = logging.getLogger(__name__)

# Saut relatif entre deux noeuds voisins au-delà duquel A est jugé non régulier
ROUGHNESS_THRESHOLD = 0.1


@dataclass(frozen=True, eq=False)
class Matricant:
    Y: SampledMatrixFunction
    det_profile: np.ndarray
    a_source: str

    @property
    def grid(self):
        return self.Y.grid

    @property
    def m(self):
        return self.Y.rows

    @property
    def n(self):
        return self.Y.deriv_order


def coefficient_digest(A):
    return hashlib.sha1(np.ascontiguousarray(A.samples).tobytes()).hexdigest()[:16]


def midpoint_values(values):
    """Valeurs aux milieux des sous-intervalles par interpolation cubique (4 points)"""
    mid = np.empty((values.shape[0] - 1,) + values.shape[1:], dtype=values.dtype)
    mid[0] = (5 * values[0] + 15 * values[1] - 5 * values[2] + values[3]) / 16
    mid[1:-1] = (-values[:-3] + 9 * values[1:-2] + 9 * values[2:-1] - values[3:]) / 16
    mid[-1] = (values[-4] - 5 * values[-3] + 15 * values[-2] + 5 * values[-1]) / 16
    return mid


def _warn_if_rough(A):
    values = A.values
    jumps = np.abs(np.diff(values, axis=0)).max()
    scale = 1.0 + np.abs(values).max()
    if jumps > ROUGHNESS_THRESHOLD * scale:
        logger.warning(
            "Coefficient A peu régulier (saut %.3e entre deux noeuds) : "
            "précision d'ordre 4 non garantie", jumps
        )


def compute_matricant(A, n):
    """Matricante d'ordre n (couches 0..n) pour un coefficient A carré à n-1 couches"""
    if A.rows != A.cols:
        raise DimensionMismatch(f"Le coefficient A doit être carré, reçu {A.rows}x{A.cols}")
    if n < 1:
        raise DimensionMismatch(f"L'ordre n doit être >= 1 (reçu {n})")
    A.require_layers(n - 1, 'Le coefficient A')
    grid, m = A.grid, A.rows
    _warn_if_rough(A)

    values = A.values
    mid = midpoint_values(values)
    h = grid.h
    Y = np.empty((grid.N, m, m), dtype=complex)
    Y[0] = np.eye(m)
    for j in range(grid.N - 1):
        current = Y[j]
        k1 = -values[j] @ current
        k2 = -mid[j] @ (current + 0.5 * h * k1)
        k3 = -mid[j] @ (current + 0.5 * h * k2)
        k4 = -values[j + 1] @ (current + h * k3)
        Y[j + 1] = current + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(Y[j + 1]).all():
            raise MatricantBlowUp(float(grid.points[j + 1]))

    layers = [Y]
    for k in range(n):
        layers.append(-sum(math.comb(k, j) * (A.samples[j] @ layers[k - j]) for j in range(k + 1)))
    matricant = SampledMatrixFunction.from_layers(grid, layers)
    det_profile = np.linalg.det(Y)
    det_profile.setflags(write=False)
    logger.debug("Matricante %dx%d calculée sur %d points, min |det Y| = %.3e",
                 m, m, grid.N, np.abs(det_profile).min())
    return Matricant(matricant, det_profile, coefficient_digest(A))


def liouville_residual(matricant, A):
    """max_t |det Y(t) - exp(-int_a^t tr A)|"""
    trace = np.trace(A.values, axis1=1, axis2=2)
    expected = np.exp(-cumulative_simpson(trace, A.grid.h))
    return float(np.abs(matricant.det_profile - expected).max())


def _pointwise_inverse(values):
    m = values.shape[-1]
    if m == 1:
        det = values[:, 0, 0]
        return det, 1.0 / np.where(det == 0, 1, det)[:, None, None]
    if m == 2:
        a, b = values[:, 0, 0], values[:, 0, 1]
        c, d = values[:, 1, 0], values[:, 1, 1]
        det = a * d - b * c
        adjugate = np.stack([np.stack([d, -b], axis=-1), np.stack([-c, a], axis=-1)], axis=-2)
    elif m == 3:
        r0, r1, r2 = values[:, 0], values[:, 1], values[:, 2]
        columns = np.stack([np.cross(r1, r2), np.cross(r2, r0), np.cross(r0, r1)], axis=-1)
        det = np.einsum('ij,ij->i', r0, columns[:, :, 0])
        adjugate = columns
    else:
        det = np.linalg.det(values)
        regular = np.where((det == 0)[:, None, None], np.eye(m), values)
        return det, np.linalg.inv(regular)
    return det, adjugate / np.where(det == 0, 1, det)[:, None, None]


def invert_matrix_function(Y, n=None, det_floor=None):
    """Inverse ponctuel de Y et ses couches de dérivées 0..n"""
    if isinstance(Y, Matricant):
        Y = Y.Y
    if Y.rows != Y.cols:
        raise DimensionMismatch(f"Impossible d'inverser une fonction {Y.rows}x{Y.cols}")
    n = Y.deriv_order if n is None else n
    Y.require_layers(n, 'La fonction à inverser')
    det_floor = resolve(det_floor, 'DET_FLOOR')

    det, Z = _pointwise_inverse(Y.values)
    magnitude = np.abs(det)
    worst = int(np.argmin(magnitude))
    if not magnitude[worst] > det_floor:
        raise NearSingularError(float(Y.grid.points[worst]), float(magnitude[worst]))

    layers = [Z]
    for k in range(1, n + 1):
        acc = sum(math.comb(k, j) * (Y.samples[j] @ layers[k - j]) for j in range(1, k + 1))
        layers.append(-(Z @ acc))
    return SampledMatrixFunction.from_layers(Y.grid, layers)


def recover_coefficient(Y, det_floor=None):
    """A = -Y' Y^{-1}, avec couches 0..n-1"""
    if isinstance(Y, Matricant):
        Y = Y.Y
    Y.require_layers(1, 'La matricante')
    inverse = invert_matrix_function(Y, Y.deriv_order - 1, det_floor)
    return -multiply(Y.derivative(), inverse)
