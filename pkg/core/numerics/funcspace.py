"""
Grilles uniformes, fonctions matricielles échantillonnées et normes de Sobolev W_p^n.

Une SampledMatrixFunction stocke ses couches de dérivées explicitement :
samples[k, j] est la dérivée d'ordre k au noeud j (matrice rows x cols).
La norme d'une fonction matricielle est la somme des normes scalaires de ses éléments.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate

from core.exceptions import DimensionMismatch, GridError, InvalidExponent, MissingDerivativeLayers

logger = logging.getLogger(__name__)

INF = math.inf

# Schémas d'ordre 4 (coefficients à diviser par h)
_CENTERED = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_FORWARD_0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_FORWARD_1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def parse_exponent(p):
    """Convertit un exposant de Lebesgue (nombre ou 'inf') et vérifie p >= 1"""
    if isinstance(p, str):
        if p.strip().lower() in ('inf', 'infinity', '∞'):
            return INF
        try:
            p = float(p)
        except ValueError:
            raise InvalidExponent(f"Exposant invalide : {p!r}") from None
    p = float(p)
    if math.isnan(p) or p < 1:
        raise InvalidExponent(f"L'exposant p doit vérifier p >= 1 (reçu {p})")
    return p


@dataclass(frozen=True)
class Grid:
    """Partition uniforme de [a, b] en N points (N impair) et exposant p"""
    a: float
    b: float
    N: int = 1001
    p: float = 2.0

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
            raise GridError(f"Intervalle invalide : a = {a}, b = {b} (il faut a < b)")
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise GridError(f"Nombre de points invalide : {self.N!r}")
        N = int(self.N)
        if N < 5 or N % 2 == 0:
            raise GridError(f"La grille doit avoir un nombre impair de points >= 5 (reçu {N})")
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'N', N)
        object.__setattr__(self, 'p', parse_exponent(self.p))

    @property
    def h(self):
        return (self.b - self.a) / (self.N - 1)

    @cached_property
    def points(self):
        t = np.linspace(self.a, self.b, self.N)
        t.setflags(write=False)
        return t

    @property
    def conjugate_exponent(self):
        if self.p == 1:
            return INF
        if self.p == INF:
            return 1.0
        return self.p / (self.p - 1)

    def same_nodes(self, other):
        return self.a == other.a and self.b == other.b and self.N == other.N

    def index_of(self, t):
        """Indice du noeud le plus proche de t (t doit appartenir à [a, b])"""
        slack = 1e-12 * (self.b - self.a)
        if not (self.a - slack <= t <= self.b + slack):
            raise GridError(f"Le point t = {t} est hors de [{self.a}, {self.b}]")
        return int(min(self.N - 1, max(0, round((t - self.a) / self.h))))


@dataclass(frozen=True)
class SobolevIndex:
    n: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise MissingDerivativeLayers(f"Ordre de Sobolev invalide : {self.n!r}")
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'p', parse_exponent(self.p))


@dataclass(frozen=True, eq=False)
class SampledMatrixFunction:
    """Fonction matricielle complexe sur une grille, avec ses couches de dérivées"""
    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex)
        if samples.ndim != 4:
            raise DimensionMismatch(
                f"Les échantillons doivent être indexés (dérivée, noeud, ligne, colonne), reçu {samples.shape}"
            )
        if samples.shape[1] != self.grid.N:
            raise DimensionMismatch(
                f"{samples.shape[1]} échantillons pour une grille de {self.grid.N} points"
            )
        if samples.shape[0] == 0 or samples.shape[2] == 0 or samples.shape[3] == 0:
            raise DimensionMismatch(f"Dimensions vides : {samples.shape}")
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    # Constructeurs

    @classmethod
    def from_layers(cls, grid, layers):
        return cls(grid, np.stack([np.asarray(layer, dtype=complex) for layer in layers]))

    @classmethod
    def constant(cls, grid, matrix, deriv_order=0):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        samples = np.zeros((deriv_order + 1, grid.N) + matrix.shape, dtype=complex)
        samples[0] = matrix
        return cls(grid, samples)

    @classmethod
    def zeros(cls, grid, rows, cols, deriv_order=0):
        return cls(grid, np.zeros((deriv_order + 1, grid.N, rows, cols), dtype=complex))

    @classmethod
    def identity(cls, grid, m, deriv_order=0):
        return cls.constant(grid, np.eye(m), deriv_order)

    @classmethod
    def from_values(cls, grid, values, deriv_order=0):
        """Échantillons denses ; les couches de dérivées sont obtenues par différences finies"""
        values = np.asarray(values, dtype=complex)
        if values.ndim == 1:
            values = values[:, None, None]
        elif values.ndim == 2:
            values = values[:, :, None]
        f = cls(grid, values[None])
        for _ in range(deriv_order):
            f = differentiate(f)
        return f

    @classmethod
    def from_callable(cls, grid, fn, deriv_order=0):
        values = np.asarray(fn(grid.points), dtype=complex)
        if values.ndim == 0 or values.shape[0] != grid.N:
            values = np.broadcast_to(values, (grid.N,) + values.shape)
        return cls.from_values(grid, values, deriv_order)

    @classmethod
    def from_polynomial(cls, grid, coefficients, deriv_order=0):
        """Polynôme matriciel sum_k C_k t^k avec ses dérivées exactes ; coefficients de forme (deg+1, rows, cols)"""
        coefficients = np.asarray(coefficients, dtype=complex)
        if coefficients.ndim == 1:
            coefficients = coefficients[:, None, None]
        t = grid.points
        layers = []
        for k in range(deriv_order + 1):
            c = np.polynomial.polynomial.polyder(coefficients, m=k, axis=0) if k else coefficients
            layers.append(np.moveaxis(np.polynomial.polynomial.polyval(t, c), -1, 0))
        return cls.from_layers(grid, layers)

    # Accès

    @property
    def rows(self):
        return self.samples.shape[2]

    @property
    def cols(self):
        return self.samples.shape[3]

    @property
    def shape(self):
        return self.samples.shape[2:]

    @property
    def deriv_order(self):
        return self.samples.shape[0] - 1

    @property
    def values(self):
        return self.samples[0]

    def require_layers(self, k, what='la fonction'):
        if self.deriv_order < k:
            raise MissingDerivativeLayers(
                f"{what} n'a que {self.deriv_order} couche(s) de dérivées, {k} requise(s)"
            )

    def layer(self, k):
        self.require_layers(k)
        return self.samples[k]

    def at_start(self, k=0):
        return self.layer(k)[0]

    def truncate(self, deriv_order):
        self.require_layers(deriv_order)
        return SampledMatrixFunction(self.grid, self.samples[:deriv_order + 1])

    def derivative(self):
        """La fonction dérivée (couches 1..d), d'ordre d - 1"""
        self.require_layers(1)
        return SampledMatrixFunction(self.grid, self.samples[1:])

    def column(self, j):
        return SampledMatrixFunction(self.grid, self.samples[:, :, :, j:j + 1])

    def times_constant(self, matrix):
        """Produit à droite par une matrice constante, couche par couche"""
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        if matrix.shape[0] != self.cols:
            raise DimensionMismatch(f"Produit {self.shape} x {matrix.shape} impossible")
        return SampledMatrixFunction(self.grid, self.samples @ matrix)

    # Arithmétique

    def _common_layers(self, other):
        if not isinstance(other, SampledMatrixFunction):
            return None
        if not self.grid.same_nodes(other.grid):
            raise DimensionMismatch("Les deux fonctions ne sont pas sur la même grille")
        if self.shape != other.shape:
            raise DimensionMismatch(f"Dimensions incompatibles : {self.shape} et {other.shape}")
        return min(self.deriv_order, other.deriv_order)

    def __add__(self, other):
        d = self._common_layers(other)
        if d is None:
            return NotImplemented
        return SampledMatrixFunction(self.grid, self.samples[:d + 1] + other.samples[:d + 1])

    def __sub__(self, other):
        d = self._common_layers(other)
        if d is None:
            return NotImplemented
        return SampledMatrixFunction(self.grid, self.samples[:d + 1] - other.samples[:d + 1])

    def __neg__(self):
        return SampledMatrixFunction(self.grid, -self.samples)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float, complex, np.number)):
            return NotImplemented
        return SampledMatrixFunction(self.grid, self.samples * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, SampledMatrixFunction):
            return NotImplemented
        return multiply(self, other)

    def __repr__(self):
        return (f"SampledMatrixFunction({self.rows}x{self.cols}, d={self.deriv_order}, "
                f"[{self.grid.a}, {self.grid.b}], N={self.grid.N})")


# Différentiation et quadrature

def stencil_derivative(values, h):
    """Dérivée le long de l'axe 0 : centrée d'ordre 4, décentrée d'ordre 4 aux deux bords"""
    values = np.asarray(values)
    if values.shape[0] < 5:
        raise GridError(f"Au moins 5 points sont nécessaires pour dériver (reçu {values.shape[0]})")
    out = np.empty(values.shape, dtype=np.result_type(values, float))
    out[2:-2] = (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * h)
    head, tail = values[:5], values[-5:]
    out[0] = np.tensordot(_FORWARD_0, head, axes=1) / h
    out[1] = np.tensordot(_FORWARD_1, head, axes=1) / h
    out[-2] = np.tensordot(-_FORWARD_1[::-1], tail, axes=1) / h
    out[-1] = np.tensordot(-_FORWARD_0[::-1], tail, axes=1) / h
    return out


def differentiation_matrix(N, h):
    """Matrice D telle que D @ y applique stencil_derivative aux échantillons y"""
    return stencil_derivative(np.eye(N), h)


def differentiate(f):
    """Ajoute à f une couche : la dérivée numérique de sa couche la plus haute"""
    top = f.layer(f.deriv_order)
    new_layer = stencil_derivative(top, f.grid.h)
    return SampledMatrixFunction(f.grid, np.concatenate([f.samples, new_layer[None]]))


def _split_complex(rule, values, **kwargs):
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return rule(values.real, **kwargs) + 1j * rule(values.imag, **kwargs)
    return rule(values, **kwargs)


def simpson(values, h):
    """Intégrale de Simpson composite le long de l'axe 0"""
    return _split_complex(integrate.simpson, values, dx=h, axis=0)


def cumulative_simpson(values, h):
    """Primitives s -> int_a^s le long de l'axe 0, nulles au premier noeud"""
    return _split_complex(integrate.cumulative_simpson, values, dx=h, axis=0, initial=0)


def simpson_weights(count, h):
    """Poids w tels que simpson(y[:count], h) == w @ y[:count]"""
    if count < 2:
        return np.zeros(count)
    return integrate.simpson(np.eye(count), dx=h, axis=0)


# Normes

def lp_norm(f, p=None, layer=0):
    """Somme des normes L_p des éléments de la couche demandée.

    Pour p = inf, chaque élément contribue son propre maximum sur la grille : la norme
    est la somme de ces maxima, pas le maximum global sur les noeuds et les éléments.
    """
    p = f.grid.p if p is None else parse_exponent(p)
    magnitude = np.abs(f.layer(layer))
    if p == INF:
        return float(magnitude.max(axis=0).sum())
    integrals = np.maximum(simpson(magnitude ** p, f.grid.h), 0.0)
    return float((integrals ** (1.0 / p)).sum())


def sobolev_norm(f, idx):
    """||f||_{n,p} : somme des normes L_p des couches 0..n"""
    if idx.n > f.deriv_order:
        raise MissingDerivativeLayers(
            f"Norme W_p^{idx.n} demandée pour une fonction à {f.deriv_order} couche(s) de dérivées"
        )
    return sum(lp_norm(f, idx.p, k) for k in range(idx.n + 1))


def multiply(f, g):
    """Produit ponctuel f(t) g(t) ; couches de dérivées par la règle de Leibniz"""
    if not f.grid.same_nodes(g.grid):
        raise DimensionMismatch("Les deux facteurs ne sont pas sur la même grille")
    if f.cols != g.rows:
        raise DimensionMismatch(f"Produit {f.shape} x {g.shape} impossible")
    d = min(f.deriv_order, g.deriv_order)
    layers = []
    for k in range(d + 1):
        layer = sum(math.comb(k, j) * (f.samples[j] @ g.samples[k - j]) for j in range(k + 1))
        layers.append(layer)
    return SampledMatrixFunction.from_layers(f.grid, layers)
