"""
Vérifications indépendantes.

- Collocation trapèzes de (L, B) : le rang de la matrice rectangulaire donne les
  dimensions du noyau et du conoyau sans passer par RK4 ni par [BY].
- Essais aléatoires reproductibles comparant ces dimensions au diagnostic de Fredholm.
- Étude de perturbation A0 + eps D -> Y_eps (continuité dans les deux sens).
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import linalg
from tqdm import tqdm

from core.conf import resolve
from core.exceptions import InvalidPerturbation, MatricantBlowUp
from core.numerics import boundary
from core.numerics.fredholm import diagnose
from core.numerics.funcspace import (
    INF, Grid, SampledMatrixFunction, SobolevIndex, differentiation_matrix, lp_norm, simpson_weights,
    sobolev_norm,
)
from core.numerics.matricant import compute_matricant, recover_coefficient
from core.numerics.solver import ProblemSpec

logger = logging.getLogger(__name__)

TRIAL_KINDS = (
    'initial_value', 'endpoint', 'periodic', 'two_point', 'multipoint',
    'integral', 'cauchy_padded', 'cauchy_truncated', 'explicit',
)
MAX_R = 6
MAX_REDRAWS = 50


# Collocation

@dataclass(frozen=True, eq=False)
class CollocationSystem:
    matrix: np.ndarray
    row_blocks: tuple
    grid: Grid

    @property
    def shape(self):
        return self.matrix.shape


def _boundary_rows(B, grid):
    """Matrice r x (N m) de B discrétisé (inconnues rangées noeud par noeud)"""
    N, m, r, n = grid.N, B.m, B.r, B.n
    D = differentiation_matrix(N, grid.h)
    rows = np.zeros((r, N * m), dtype=complex)
    power = np.eye(N)
    for alpha in B.alphas:
        rows += np.kron(power[0], alpha)
        power = D @ power
    # power vaut maintenant D^n
    blocks = np.einsum('l,lj,lrm->rjm', simpson_weights(N, grid.h), power, B.Phi.values)
    for piece in B.pieces:
        count = piece.stop + 1
        blocks += np.einsum('l,lj,lrm->rjm', simpson_weights(count, grid.h), power[:count], piece.weight)
    return rows + blocks.reshape(r, N * m)


def assemble_collocation(problem):
    grid, m = problem.grid, problem.m
    N, h = grid.N, grid.h
    A = problem.A.values
    identity = np.eye(m)
    matrix = np.zeros((m * (N - 1) + problem.r, m * N), dtype=complex)
    blocks = []
    for j in range(N - 1):
        rows = slice(j * m, (j + 1) * m)
        matrix[rows, j * m:(j + 1) * m] = -identity / h + A[j] / 2
        matrix[rows, (j + 1) * m:(j + 2) * m] = identity / h + A[j + 1] / 2
        blocks.append(('ode', j))
    matrix[m * (N - 1):] = _boundary_rows(problem.B, grid)
    blocks.append(('boundary', 0))
    return CollocationSystem(matrix, tuple(blocks), grid)


@dataclass(frozen=True)
class NumericalIndex:
    dim_kernel: int
    dim_cokernel: int
    index: int
    rank: int
    spectral_gap: float

    def __iter__(self):
        return iter((self.dim_kernel, self.dim_cokernel, self.index))


def numerical_index(system, tol=None):
    """(dim_ker, dim_coker, index) de la matrice de collocation, rang relatif à tol * sigma_max"""
    tol = resolve(tol, 'ORACLE_RANK_TOL')
    rows, cols = system.shape
    sigma = linalg.svdvals(system.matrix)
    rank = int(np.count_nonzero(sigma > tol * sigma[0])) if sigma[0] > 0 else 0
    if rank == 0 or rank == sigma.size or sigma[rank] == 0:
        gap = math.inf
    else:
        gap = float(sigma[rank - 1] / sigma[rank])
    return NumericalIndex(cols - rank, rows - rank, cols - rows, rank, gap)


# Essais aléatoires

@dataclass(frozen=True, eq=False)
class TrialRecipe:
    """Problème aléatoire réalisable sur n'importe quelle grille"""
    seed: int
    m: int
    n: int
    kind: str
    coefficient: np.ndarray
    params: dict = field(default_factory=dict)
    a: float = 0.0
    b: float = 1.0

    def build(self, grid_points):
        grid = Grid(self.a, self.b, grid_points)
        A = SampledMatrixFunction.from_polynomial(grid, self.coefficient, self.n - 1)
        params = {
            key: SampledMatrixFunction.from_polynomial(grid, value) if key in ('kernel', 'Phi') else value
            for key, value in self.params.items()
        }
        B = boundary.preset(self.kind, grid, self.m, self.n, **params)
        f = SampledMatrixFunction.zeros(grid, self.m, 1, self.n - 1)
        return ProblemSpec(grid, A, f, B, np.zeros(B.r))


def _complex_normal(rng, shape, scale=1.0):
    values = rng.normal(size=shape)
    if rng.random() < 0.5:
        values = values + 1j * rng.normal(size=shape)
    return scale * values


def random_trial(seed, attempt=0):
    rng = np.random.default_rng([seed, attempt])
    m = int(rng.integers(1, 5))
    n = int(rng.integers(1, 3))
    degree = int(rng.integers(0, 4))
    coefficient = _complex_normal(rng, (degree + 1, m, m), 0.5 / m)
    if rng.random() < 0.1:
        coefficient = np.zeros((1, m, m))

    kinds = [kind for kind in TRIAL_KINDS if kind != 'cauchy_truncated' or m > 1]
    kind = str(rng.choice(kinds))
    r = int(rng.integers(1, MAX_R + 1))
    params = {}
    if kind == 'two_point':
        params = {'M_a': _complex_normal(rng, (r, m)), 'M_b': _complex_normal(rng, (r, m))}
    elif kind == 'multipoint':
        nodes = rng.choice(9, size=int(rng.integers(1, 4)), replace=False)
        params = {'points': [(j / 8, _complex_normal(rng, (r, m))) for j in sorted(nodes)]}
    elif kind == 'integral':
        params = {'kernel': _complex_normal(rng, (int(rng.integers(1, 3)), r, m))}
    elif kind == 'cauchy_padded':
        params = {'r': int(rng.integers(m + 1, MAX_R + 1))}
    elif kind == 'cauchy_truncated':
        params = {'r': int(rng.integers(1, m))}
    elif kind == 'explicit':
        params = {
            'alphas': [_complex_normal(rng, (r, m)) for _ in range(n)],
            'Phi': _complex_normal(rng, (int(rng.integers(1, 3)), r, m)),
        }
    return TrialRecipe(seed, m, n, kind, coefficient, params)


def _is_ambiguous(report, ratio):
    sigma = np.asarray(report.singular_values)
    if not sigma.size or sigma[0] == 0:
        return False
    cutoff = report.rank_tolerance * sigma[0] * max(report.r, report.m)
    return bool(np.any((sigma > cutoff) & (sigma <= ratio * sigma[0])))


@dataclass(frozen=True)
class TrialResult:
    seed: int
    kind: str
    m: int
    r: int
    n: int
    dim_kernel: int
    dim_cokernel: int
    index: int
    oracle_dim_kernel: int
    oracle_dim_cokernel: int
    oracle_index: int
    agree: bool
    redraws: int = 0
    oracle_points: int = 0
    spectral_gap: float = math.inf


def run_trial(seed, grid_points=None, oracle_points=None, rank_tolerance=None, oracle_tolerance=None,
              spectral_gap=None, max_refinements=None, ambiguity_ratio=None):
    grid_points = resolve(grid_points, 'GRID_POINTS')
    oracle_points = resolve(oracle_points, 'ORACLE_GRID_POINTS')
    spectral_gap = resolve(spectral_gap, 'ORACLE_SPECTRAL_GAP')
    max_refinements = resolve(max_refinements, 'ORACLE_MAX_REFINEMENTS')
    ambiguity_ratio = resolve(ambiguity_ratio, 'ORACLE_AMBIGUITY_RATIO')

    for attempt in range(MAX_REDRAWS):
        recipe = random_trial(seed, attempt)
        report = diagnose(recipe.build(grid_points), rank_tolerance)
        if not _is_ambiguous(report, ambiguity_ratio):
            break
        logger.info("Essai %d : spectre de [BY] ambigu, nouveau tirage", seed)

    points = oracle_points
    for refinement in range(max_refinements + 1):
        result = numerical_index(assemble_collocation(recipe.build(points)), oracle_tolerance)
        if result.spectral_gap >= spectral_gap or refinement == max_refinements:
            break
        logger.warning("Essai %d : écart spectral %.1e insuffisant, reprise avec N = %d",
                       seed, result.spectral_gap, 2 * points - 1)
        points = 2 * points - 1

    agree = (
        (report.dim_kernel, report.dim_cokernel) == (result.dim_kernel, result.dim_cokernel)
        and report.index == result.index == recipe.m - report.r
    )
    if not agree:
        logger.warning("Essai %d (%s) : désaccord Fredholm (%d, %d) / collocation (%d, %d)",
                       seed, recipe.kind, report.dim_kernel, report.dim_cokernel,
                       result.dim_kernel, result.dim_cokernel)
    return TrialResult(
        seed=seed,
        kind=recipe.kind,
        m=recipe.m,
        r=report.r,
        n=recipe.n,
        dim_kernel=report.dim_kernel,
        dim_cokernel=report.dim_cokernel,
        index=report.index,
        oracle_dim_kernel=result.dim_kernel,
        oracle_dim_cokernel=result.dim_cokernel,
        oracle_index=result.index,
        agree=agree,
        redraws=attempt,
        oracle_points=points,
        spectral_gap=result.spectral_gap,
    )


def trial_seeds(seed, trials):
    """Graines 64 bits des essais, dérivées de la graine principale"""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(child.generate_state(1, np.uint64)[0]) for child in children]


def run_trials(seed, trials, jobs=1, progress=False, **options):
    options = {
        'grid_points': resolve(options.get('grid_points'), 'GRID_POINTS'),
        'oracle_points': resolve(options.get('oracle_points'), 'ORACLE_GRID_POINTS'),
        'rank_tolerance': resolve(options.get('rank_tolerance'), 'RANK_TOL'),
        'oracle_tolerance': resolve(options.get('oracle_tolerance'), 'ORACLE_RANK_TOL'),
        'spectral_gap': resolve(options.get('spectral_gap'), 'ORACLE_SPECTRAL_GAP'),
        'max_refinements': resolve(options.get('max_refinements'), 'ORACLE_MAX_REFINEMENTS'),
        'ambiguity_ratio': resolve(options.get('ambiguity_ratio'), 'ORACLE_AMBIGUITY_RATIO'),
    }
    seeds = trial_seeds(seed, trials)
    worker = partial(run_trial, **options)
    with tqdm(total=trials, desc='Essais', unit='essai', disable=not progress) as bar:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as executor:
                results = []
                for result in executor.map(worker, seeds):
                    results.append(result)
                    bar.update()
        else:
            results = []
            for trial_seed in seeds:
                results.append(worker(trial_seed))
                bar.update()
    return results


# Perturbations

@dataclass(frozen=True)
class PerturbationTrace:
    epsilons: list
    input_gaps: list
    output_gaps: list
    sup_gaps: list
    recovered_gaps: list
    K: float
    truncated_at: float | None = None

    COLUMNS = ('epsilon', 'input_gap', 'output_gap', 'sup_gap', 'recovered_gap')

    def to_rows(self):
        return list(zip(self.epsilons, self.input_gaps, self.output_gaps, self.sup_gaps, self.recovered_gaps))


def default_epsilons(start=0.1, halvings=8):
    return [start / 2 ** k for k in range(halvings + 1)]


def _bicontinuity_constant(inputs, outputs):
    ratios = [out / gap for gap, out in zip(inputs, outputs) if gap > 0 and out > 0]
    if not ratios:
        return math.nan
    return max(max(ratios), max(1 / ratio for ratio in ratios))


def perturbation_study(A0, D, epsilons=None, n=1, p=None, det_floor=None):
    """Écarts ||A_eps - A0||_{n-1,p}, ||Y_eps - Y0||_{n,p} et sup |Y_eps - Y0| le long de eps -> 0"""
    epsilons = default_epsilons() if epsilons is None else [float(eps) for eps in epsilons]
    if not epsilons or any(later >= earlier for earlier, later in zip(epsilons, epsilons[1:])):
        raise InvalidPerturbation("La suite des epsilon doit être non vide et strictement décroissante")
    p = A0.grid.p if p is None else p
    input_index, output_index = SobolevIndex(n - 1, p), SobolevIndex(n, p)

    Y0 = compute_matricant(A0, n)
    A0_recovered = recover_coefficient(Y0, det_floor)
    kept, inputs, outputs, sups, recovered = [], [], [], [], []
    truncated_at = None
    for eps in epsilons:
        A_eps = A0 + D * eps
        try:
            Y_eps = compute_matricant(A_eps, n)
        except MatricantBlowUp as exc:
            logger.warning("Trace de perturbation interrompue à eps = %g : %s", eps, exc)
            truncated_at = eps
            break
        difference = Y_eps.Y - Y0.Y
        kept.append(eps)
        inputs.append(sobolev_norm(A_eps - A0, input_index))
        outputs.append(sobolev_norm(difference, output_index))
        sups.append(lp_norm(difference, INF))
        recovered.append(sobolev_norm(recover_coefficient(Y_eps, det_floor) - A0_recovered, input_index))
    return PerturbationTrace(
        epsilons=kept,
        input_gaps=inputs,
        output_gaps=outputs,
        sup_gaps=sups,
        recovered_gaps=recovered,
        K=_bicontinuity_constant(inputs, outputs),
        truncated_at=truncated_at,
    )
