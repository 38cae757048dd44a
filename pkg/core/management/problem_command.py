"""
Socle commun des commandes de gestion : journalisation selon --verbosity,
traduction des erreurs en codes de sortie, écriture CSV.

Codes de sortie : 0 succès, 2 entrée invalide, 3 problème non bien posé,
4 désaccord de l'oracle.
"""
import csv
import io
import logging
from contextlib import contextmanager
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import (
    DimensionMismatch, DomainFault, ExprSyntaxError, GridError, InvalidExponent, InvalidPerturbation,
    MatricantBlowUp, MissingDerivativeLayers, NearSingularError, ProblemFileError,
    UnsupportedBoundaryOperator,
)
from core.problems import load_problem_file
from core.serializers import render_key_values, render_value

EXIT_INPUT_ERROR = 2
EXIT_NOT_WELL_POSED = 3
EXIT_DISAGREEMENT = 4

INPUT_ERRORS = (
    ProblemFileError, ExprSyntaxError, DomainFault, GridError, DimensionMismatch,
    MissingDerivativeLayers, InvalidExponent, UnsupportedBoundaryOperator, InvalidPerturbation,
    MatricantBlowUp, NearSingularError,
)

LOG_LEVELS = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO, 3: logging.DEBUG}


def format_cell(value):
    if isinstance(value, (bool, str)) or value is None:
        return render_value(value)
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


class FredholmCommand(BaseCommand):

    def execute(self, *args, **options):
        logging.getLogger('core').setLevel(LOG_LEVELS.get(options.get('verbosity', 1), logging.DEBUG))
        return super().execute(*args, **options)

    @contextmanager
    def input_errors(self):
        """Toute erreur d'entrée devient une CommandError de code 2"""
        try:
            yield
        except INPUT_ERRORS as exc:
            raise CommandError(str(exc), returncode=EXIT_INPUT_ERROR) from exc

    def write_lines(self, lines, stream=None):
        stream = stream or self.stdout
        for line in lines:
            stream.write(line)

    def write_report(self, data, stream=None):
        self.write_lines(render_key_values(data), stream)

    def write_csv(self, header, rows, out=None):
        """CSV indépendant de la locale (point décimal, fins de ligne LF)"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(header)
        writer.writerows([format_cell(value) for value in row] for row in rows)
        self.write_output(buffer.getvalue(), out)

    def write_output(self, text, out=None):
        """Écrit dans le fichier out, ou sur la sortie standard ; un échec d'écriture est une erreur d'entrée"""
        if not out:
            self.stdout.write(text, ending='')
            return
        try:
            Path(out).write_text(text, encoding='utf-8')
        except OSError as exc:
            raise CommandError(f"Écriture impossible de {out} : {exc.strerror or exc}",
                               returncode=EXIT_INPUT_ERROR)

    def report_stream(self, out):
        """Le rapport suit le CSV sur stdout quand celui-ci va dans un fichier, sinon sur stderr"""
        return self.stdout if out else self.stderr


class ProblemCommand(FredholmCommand):
    # Tolérances exposées en options, seulement celles que la commande transmet
    tolerance_options = ('rank_tol', 'det_floor')

    def add_arguments(self, parser):
        parser.add_argument('problem_file', help='Fichier de problème (YAML)')
        parser.add_argument(
            '--grid-points',
            type=int,
            help='Nombre de points de la grille (impair, >= 5) ; remplace la valeur du fichier',
        )
        if 'rank_tol' in self.tolerance_options:
            parser.add_argument('--rank-tol', type=float, help='Tolérance relative du rang de [BY]')
        if 'det_floor' in self.tolerance_options:
            parser.add_argument('--det-floor', type=float,
                                help='Seuil de |det| en dessous duquel Y(t) est singulière')

    def load_problem(self, options):
        with self.input_errors():
            return load_problem_file(options['problem_file'], options.get('grid_points'))
