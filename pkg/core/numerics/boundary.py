"""
Opérateur aux limites général B sous forme canonique :

    By = sum_{k<n} alpha_k y^(k)(a) + int_a^b Phi(t) y^(n)(t) dt

Les évaluations en un point intérieur t_i passent par des morceaux de noyau
tronqués (KernelPiece) : la quadrature est coupée au noeud de saut.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from core.conf import resolve
from core.exceptions import DimensionMismatch, UnsupportedBoundaryOperator
from core.numerics.funcspace import SampledMatrixFunction, cumulative_simpson, simpson

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class KernelPiece:
    """Noyau porté par [a, t_stop] : weight[j] agit sur y^(n) au noeud j <= stop"""
    stop: int
    weight: np.ndarray

    def __post_init__(self):
        weight = np.array(self.weight, dtype=complex)
        if weight.ndim != 3 or weight.shape[0] != self.stop + 1:
            raise DimensionMismatch(
                f"Morceau de noyau arrêté au noeud {self.stop} : forme {weight.shape} invalide"
            )
        weight.setflags(write=False)
        object.__setattr__(self, 'weight', weight)

    def integrate(self, top_layer, h):
        if self.stop == 0:
            return np.zeros((self.weight.shape[1],) + top_layer.shape[2:], dtype=complex)
        return simpson(self.weight @ top_layer[:self.stop + 1], h)


@dataclass(frozen=True, eq=False)
class BoundaryOperator:
    r: int
    m: int
    n: int
    alphas: tuple
    Phi: SampledMatrixFunction
    pieces: tuple = ()
    kind: str = 'explicit'
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        alphas = tuple(np.array(alpha, dtype=complex).reshape(self.r, self.m) for alpha in self.alphas)
        if len(alphas) != self.n:
            raise DimensionMismatch(f"{len(alphas)} matrices alpha pour un ordre n = {self.n}")
        if self.Phi.shape != (self.r, self.m):
            raise DimensionMismatch(f"Le noyau Phi est {self.Phi.shape}, attendu ({self.r}, {self.m})")
        for piece in self.pieces:
            if piece.weight.shape[1:] != (self.r, self.m) or piece.stop >= self.grid.N:
                raise DimensionMismatch("Morceau de noyau incompatible avec l'opérateur")
        for alpha in alphas:
            if not np.isfinite(alpha).all():
                raise DimensionMismatch("Les matrices alpha doivent être finies")
            alpha.setflags(write=False)
        object.__setattr__(self, 'alphas', alphas)
        object.__setattr__(self, 'pieces', tuple(self.pieces))

    @property
    def grid(self):
        return self.Phi.grid

    def scaled(self, factor):
        return BoundaryOperator(
            self.r, self.m, self.n,
            tuple(factor * alpha for alpha in self.alphas),
            self.Phi * factor,
            tuple(KernelPiece(piece.stop, factor * piece.weight) for piece in self.pieces),
            kind=self.kind,
            params=self.params,
        )

    def __repr__(self):
        return f"BoundaryOperator({self.kind}, r={self.r}, m={self.m}, n={self.n})"


@dataclass(frozen=True, eq=False)
class CharacteristicMatrix:
    """La matrice numérique [BY] (r x m) et ses valeurs singulières"""
    entries: np.ndarray
    singular_values: np.ndarray
    rank_tolerance: float

    @property
    def r(self):
        return self.entries.shape[0]

    @property
    def m(self):
        return self.entries.shape[1]

    @property
    def threshold(self):
        sigma_max = self.singular_values[0] if self.singular_values.size else 0.0
        return self.rank_tolerance * sigma_max * max(self.r, self.m)

    def rank(self, rank_tolerance=None):
        if rank_tolerance is not None and rank_tolerance != self.rank_tolerance:
            return CharacteristicMatrix(self.entries, self.singular_values, rank_tolerance).rank()
        if not self.singular_values.size or self.singular_values[0] == 0:
            return 0
        return int(np.count_nonzero(self.singular_values > self.threshold))

    def null_space(self, rank_tolerance=None):
        """Base orthonormée (colonnes) du noyau numérique de [BY]"""
        rank = self.rank(rank_tolerance)
        _, _, vh = linalg.svd(self.entries, full_matrices=True)
        return vh[rank:].conj().T


def _check_argument(B, y):
    if not B.grid.same_nodes(y.grid):
        raise DimensionMismatch("La fonction et l'opérateur B ne sont pas sur la même grille")
    if y.rows != B.m:
        raise DimensionMismatch(f"B agit sur des fonctions à {B.m} composantes, reçu {y.rows}")
    y.require_layers(B.n, 'La fonction')


def _apply(B, y):
    h = B.grid.h
    top = y.layer(B.n)
    value = sum(alpha @ y.at_start(k) for k, alpha in enumerate(B.alphas))
    value = value + simpson(B.Phi.values @ top, h)
    for piece in B.pieces:
        value = value + piece.integrate(top, h)
    return value


def apply_boundary(B, y):
    """By pour une fonction vectorielle y (m x 1) ; renvoie un vecteur de longueur r"""
    _check_argument(B, y)
    if y.cols != 1:
        raise DimensionMismatch(f"apply_boundary attend une colonne, reçu {y.rows}x{y.cols}")
    return _apply(B, y)[:, 0]


def apply_boundary_matrix(B, Y, rank_tolerance=None):
    """[BY] colonne par colonne, avec les valeurs singulières"""
    Y = getattr(Y, 'Y', Y)
    _check_argument(B, Y)
    entries = np.column_stack([apply_boundary(B, Y.column(j)) for j in range(Y.cols)])
    return CharacteristicMatrix(
        entries,
        linalg.svdvals(entries),
        resolve(rank_tolerance, 'RANK_TOL'),
    )


# Préréglages

def _identity_alphas(m, n):
    return tuple(np.eye(m) if k == 0 else np.zeros((m, m)) for k in range(n))


def _taylor_kernel(grid, matrix, end, n):
    """Valeurs de matrix (end - s)^(n-1) / (n-1)! aux noeuds s"""
    factor = (end - grid.points) ** (n - 1) / math.factorial(n - 1)
    return factor[:, None, None] * np.asarray(matrix, dtype=complex)


def explicit(grid, m, n, alphas, Phi=None, pieces=()):
    alphas = [np.atleast_2d(np.asarray(alpha, dtype=complex)) for alpha in alphas]
    if len(alphas) != n:
        raise DimensionMismatch(f"{len(alphas)} matrices alpha pour un ordre n = {n}")
    r = alphas[0].shape[0] if alphas else Phi.rows
    if Phi is None:
        Phi = SampledMatrixFunction.zeros(grid, r, m)
    return BoundaryOperator(r, m, n, tuple(alphas), Phi.truncate(0), pieces, kind='explicit')


def initial_value(grid, m, n):
    """By = y(a)"""
    return BoundaryOperator(m, m, n, _identity_alphas(m, n), SampledMatrixFunction.zeros(grid, m, m),
                            kind='initial_value')


def two_point(grid, m, n, M_a, M_b):
    """By = M_a y(a) + M_b y(b), via y(b) = sum_k (b-a)^k/k! y^(k)(a) + int (b-s)^(n-1)/(n-1)! y^(n)"""
    M_a = np.atleast_2d(np.asarray(M_a, dtype=complex))
    M_b = np.atleast_2d(np.asarray(M_b, dtype=complex))
    if M_a.shape != M_b.shape or M_a.shape[1] != m:
        raise DimensionMismatch(f"Matrices M_a {M_a.shape} et M_b {M_b.shape} incompatibles avec m = {m}")
    length = grid.b - grid.a
    alphas = [M_b * length ** k / math.factorial(k) for k in range(n)]
    alphas[0] = alphas[0] + M_a
    Phi = SampledMatrixFunction(grid, _taylor_kernel(grid, M_b, grid.b, n)[None])
    return BoundaryOperator(M_a.shape[0], m, n, tuple(alphas), Phi, kind='two_point',
                            params={'M_a': M_a, 'M_b': M_b})


def endpoint(grid, m, n):
    """By = y(b)"""
    operator = two_point(grid, m, n, np.zeros((m, m)), np.eye(m))
    return _renamed(operator, 'endpoint')


def periodic(grid, m, n):
    """By = y(b) - y(a)"""
    operator = two_point(grid, m, n, -np.eye(m), np.eye(m))
    return _renamed(operator, 'periodic')


def _renamed(operator, kind, params=None):
    return BoundaryOperator(operator.r, operator.m, operator.n, operator.alphas, operator.Phi,
                            operator.pieces, kind=kind, params=params or {})


def multipoint(grid, m, n, points):
    """By = sum_i M_i y(t_i), les t_i étant ramenés au noeud le plus proche"""
    if not points:
        raise DimensionMismatch("Condition multipoint sans aucun point")
    matrices = [np.atleast_2d(np.asarray(M, dtype=complex)) for _, M in points]
    r = matrices[0].shape[0]
    if any(M.shape != (r, m) for M in matrices):
        raise DimensionMismatch(f"Toutes les matrices M_i doivent être {r}x{m}")

    alphas = [np.zeros((r, m), dtype=complex) for _ in range(n)]
    Phi = np.zeros((grid.N, r, m), dtype=complex)
    pieces = []
    for (t, _), M in zip(points, matrices):
        index = grid.index_of(t)
        node = float(grid.points[index])
        if abs(node - t) > 1e-9 * (grid.b - grid.a):
            logger.warning("Point t = %g ramené au noeud %g (écart %.2e)", t, node, abs(node - t))
        for k in range(n):
            alphas[k] += M * (node - grid.a) ** k / math.factorial(k)
        if index == grid.N - 1:
            Phi += _taylor_kernel(grid, M, node, n)
        elif index > 0:
            weight = _taylor_kernel(grid, M, node, n)[:index + 1]
            pieces.append(KernelPiece(index, weight))
    return BoundaryOperator(r, m, n, tuple(alphas), SampledMatrixFunction(grid, Phi[None]), tuple(pieces),
                            kind='multipoint', params={'points': list(points)})


def integral(grid, m, n, kernel):
    """By = int_a^b K(s) y(s) ds, ramené à la forme canonique par Taylor avec reste intégral"""
    if kernel.cols != m:
        raise DimensionMismatch(f"Le noyau K doit avoir {m} colonnes, reçu {kernel.cols}")
    h = grid.h
    K = kernel.values
    shift = grid.points - grid.a
    alphas = tuple(simpson(K * (shift ** k / math.factorial(k))[:, None, None], h) for k in range(n))

    # Phi(u) = sum_j C(n-1, j) (-(u-a))^(n-1-j) int_u^b K(s) (s-a)^j ds / (n-1)!
    Phi = np.zeros_like(K)
    for j in range(n):
        moment = K * (shift ** j)[:, None, None]
        tail = simpson(moment, h) - cumulative_simpson(moment, h)
        Phi += math.comb(n - 1, j) * ((-shift) ** (n - 1 - j))[:, None, None] * tail
    Phi /= math.factorial(n - 1)
    return BoundaryOperator(kernel.rows, m, n, alphas, SampledMatrixFunction(grid, Phi[None]),
                            kind='integral', params={'kernel': kernel})


def cauchy_padded(grid, m, n, r):
    """By = (y_1(a), ..., y_m(a), 0, ..., 0) avec r > m"""
    if r <= m:
        raise DimensionMismatch(f"cauchy_padded demande r > m (r = {r}, m = {m})")
    alphas = tuple(np.eye(r, m) if k == 0 else np.zeros((r, m)) for k in range(n))
    return BoundaryOperator(r, m, n, alphas, SampledMatrixFunction.zeros(grid, r, m),
                            kind='cauchy_padded', params={'r': r})


def cauchy_truncated(grid, m, n, r):
    """By = (y_1(a), ..., y_r(a)) avec r < m"""
    if not 1 <= r < m:
        raise DimensionMismatch(f"cauchy_truncated demande 1 <= r < m (r = {r}, m = {m})")
    alphas = tuple(np.eye(r, m) if k == 0 else np.zeros((r, m)) for k in range(n))
    return BoundaryOperator(r, m, n, alphas, SampledMatrixFunction.zeros(grid, r, m),
                            kind='cauchy_truncated', params={'r': r})


def stack(*operators):
    """Concatène les conditions de plusieurs opérateurs (problèmes mixtes)"""
    if not operators:
        raise DimensionMismatch("Aucun opérateur à empiler")
    first = operators[0]
    for operator in operators[1:]:
        if (operator.m, operator.n) != (first.m, first.n) or not operator.grid.same_nodes(first.grid):
            raise DimensionMismatch("Opérateurs incompatibles (m, n ou grille)")
    r = sum(operator.r for operator in operators)
    alphas = tuple(np.vstack([operator.alphas[k] for operator in operators]) for k in range(first.n))
    Phi = SampledMatrixFunction(first.grid, np.concatenate([operator.Phi.samples for operator in operators], axis=2))
    pieces, offset = [], 0
    for operator in operators:
        for piece in operator.pieces:
            weight = np.zeros((piece.stop + 1, r, first.m), dtype=complex)
            weight[:, offset:offset + operator.r] = piece.weight
            pieces.append(KernelPiece(piece.stop, weight))
        offset += operator.r
    return BoundaryOperator(r, first.m, first.n, alphas, Phi, tuple(pieces), kind='stack',
                            params={'operators': operators})


PRESETS = {
    'initial_value': initial_value,
    'endpoint': endpoint,
    'periodic': periodic,
    'two_point': two_point,
    'multipoint': multipoint,
    'integral': integral,
    'cauchy_padded': cauchy_padded,
    'cauchy_truncated': cauchy_truncated,
    'explicit': explicit,
}


def preset(kind, grid, m, n, **params):
    try:
        builder = PRESETS[kind]
    except KeyError:
        raise UnsupportedBoundaryOperator(
            f"Type de condition aux limites inconnu : '{kind}' (connus : {', '.join(PRESETS)})"
        ) from None
    return builder(grid, m, n, **params)
