"""
Lecture, construction et réémission des fichiers de problème (YAML).

Un fichier validé par ProblemFileSerializer devient un ProblemSpec échantillonné
sur la grille demandée. Les coefficients peuvent aussi venir de fichiers CSV
(colonnes t, re_a11, im_a11, ...), chemins relatifs au fichier de problème.
"""
import csv
import json
import logging
from pathlib import Path

import numpy as np
import yaml

from core.conf import resolve
from core.exceptions import ProblemFileError
from core.numerics import boundary as boundary_presets
from core.numerics.exprlang import sample_matrix
from core.numerics.funcspace import Grid, SampledMatrixFunction
from core.numerics.solver import ProblemSpec
from core.serializers import CoefficientSerializer, ProblemFileSerializer, flatten_errors

logger = logging.getLogger(__name__)


def read_yaml(path):
    path = Path(path)
    try:
        with path.open(encoding='utf-8') as handle:
            document = yaml.safe_load(handle)
    except OSError as exc:
        raise ProblemFileError(f"{path}: lecture impossible ({exc.strerror or exc})")
    except yaml.YAMLError as exc:
        raise ProblemFileError(f"{path}: YAML invalide ({exc})")
    if not isinstance(document, dict):
        raise ProblemFileError(f"{path}: le document doit être un dictionnaire de sections")
    return document


def validate_problem_document(document):
    serializer = ProblemFileSerializer(data=document)
    if not serializer.is_valid():
        raise ProblemFileError(flatten_errors(serializer.errors))
    return serializer.validated_data


def load_problem_file(path, grid_points=None):
    """Lit, valide et échantillonne un fichier de problème"""
    path = Path(path)
    data = validate_problem_document(read_yaml(path))
    return build_problem(data, grid_points, base_dir=path.parent)


def _component_columns(rows, cols, prefix):
    names = []
    for i in range(rows):
        for j in range(cols):
            suffix = f"{i + 1}{j + 1}" if cols > 1 or prefix == 'a' else f"{i + 1}"
            names += [f"re_{prefix}{suffix}", f"im_{prefix}{suffix}"]
    return names


def load_samples_csv(path, grid, rows, cols, prefix, deriv_order=0, field='coefficient.csv'):
    """Échantillons denses d'une fonction matricielle lus dans un CSV aligné sur la grille"""
    expected = ['t'] + _component_columns(rows, cols, prefix)
    try:
        with open(path, newline='', encoding='utf-8') as handle:
            reader = csv.reader(handle)
            header = [name.strip() for name in next(reader, [])]
            table = [[float(value) for value in line] for line in reader if line]
    except OSError as exc:
        raise ProblemFileError(f"{field}: lecture impossible de {path} ({exc.strerror or exc})")
    except ValueError as exc:
        raise ProblemFileError(f"{field}: valeur non numérique dans {path} ({exc})")
    if header != expected:
        raise ProblemFileError(f"{field}: en-tête attendu {','.join(expected)}")
    table = np.array(table, dtype=float).reshape(-1, len(expected))
    if table.shape[0] != grid.N:
        raise ProblemFileError(f"{field}: {table.shape[0]} lignes pour une grille de {grid.N} points")
    if not np.allclose(table[:, 0], grid.points, rtol=0, atol=1e-9 * (grid.b - grid.a)):
        raise ProblemFileError(f"{field}: la colonne t ne coïncide pas avec les noeuds de la grille")
    values = (table[:, 1::2] + 1j * table[:, 2::2]).reshape(grid.N, rows, cols)
    return SampledMatrixFunction.from_values(grid, values, deriv_order)


def _resolve_path(name, base_dir):
    path = Path(name)
    if not path.is_absolute() and base_dir is not None:
        path = Path(base_dir) / path
    return path


def build_coefficient(section, grid, m, deriv_order, base_dir=None, field='coefficient'):
    if 'csv' in section:
        return load_samples_csv(_resolve_path(section['csv'], base_dir), grid, m, m, 'a',
                                deriv_order, f"{field}.csv")
    return sample_matrix(section['matrix'], grid, deriv_order)


def build_forcing(section, grid, m, deriv_order, base_dir=None):
    if section is None:
        return SampledMatrixFunction.zeros(grid, m, 1, deriv_order)
    if 'csv' in section:
        return load_samples_csv(_resolve_path(section['csv'], base_dir), grid, m, 1, 'f',
                                deriv_order, 'forcing.csv')
    return sample_matrix([[entry] for entry in section['vector']], grid, deriv_order)


def build_boundary(section, grid, m, n, r):
    if 'stack' in section:
        return boundary_presets.stack(*(
            build_boundary(item, grid, m, n, None) for item in section['stack']
        ))
    if 'alphas' in section:
        Phi = sample_matrix(section['phi'], grid) if 'phi' in section else None
        return boundary_presets.explicit(grid, m, n, section['alphas'], Phi)

    kind, params = section['preset'], dict(section.get('params', {}))
    if kind == 'multipoint':
        params['points'] = [(point['t'], point['M']) for point in params['points']]
    elif kind == 'integral':
        params['kernel'] = sample_matrix(params['kernel'], grid)
    elif kind in ('cauchy_padded', 'cauchy_truncated'):
        params.setdefault('r', r)
    return boundary_presets.preset(kind, grid, m, n, **params)


def build_problem(data, grid_points=None, base_dir=None):
    """ProblemSpec à partir des données validées ; grid_points l'emporte sur le fichier"""
    interval, dimensions = data['interval'], data['dimensions']
    N = grid_points or interval.get('grid_points') or resolve(None, 'GRID_POINTS')
    grid = Grid(interval['a'], interval['b'], N, dimensions['p'])
    m, n, r = dimensions['m'], dimensions['n'], dimensions['r']
    logger.debug("Construction du problème m = %d, n = %d, r = %d sur %d points", m, n, r, grid.N)
    A = build_coefficient(data['coefficient'], grid, m, n - 1, base_dir)
    f = build_forcing(data.get('forcing'), grid, m, n - 1, base_dir)
    B = build_boundary(data['boundary'], grid, m, n, r)
    return ProblemSpec(grid, A, f, B, np.array(data['rhs'], dtype=complex))


def load_coefficient_file(path, grid, m, deriv_order):
    """Direction de perturbation : CSV direct, ou YAML avec une section 'coefficient'"""
    path = Path(path)
    if path.suffix.lower() == '.csv':
        return load_samples_csv(path, grid, m, m, 'a', deriv_order, 'direction')
    document = read_yaml(path)
    serializer = CoefficientSerializer(data=document.get('coefficient'))
    if not serializer.is_valid():
        raise ProblemFileError(flatten_errors(serializer.errors, 'coefficient'))
    section = serializer.validated_data
    if 'matrix' in section and (len(section['matrix']) != m or any(len(row) != m for row in section['matrix'])):
        raise ProblemFileError(f"coefficient.matrix: la direction doit être {m}x{m}")
    return build_coefficient(section, grid, m, deriv_order, path.parent)


def dump_problem(data, base_dir=None):
    """Réémission canonique (YAML) de données validées.

    Avec base_dir (dossier du fichier lu), les chemins CSV relatifs sont réécrits en chemins
    absolus : le document reste valable quel que soit l'endroit où il est enregistré.
    """
    representation = json.loads(json.dumps(ProblemFileSerializer(data).data))
    if base_dir is not None:
        for name in ('coefficient', 'forcing'):
            section = representation.get(name) or {}
            if section.get('csv'):
                section['csv'] = str(_resolve_path(section['csv'], base_dir).resolve())
    return yaml.safe_dump(representation, sort_keys=False, allow_unicode=True)


def samples_to_rows(grid, function):
    """Lignes CSV t, re_1, im_1, ... pour une fonction colonne ou matricielle (couche 0)"""
    values = function.values.reshape(grid.N, -1)
    rows = []
    for t, row in zip(grid.points, values):
        line = [float(t)]
        for value in row:
            line += [float(value.real), float(value.imag)]
        rows.append(line)
    return rows
