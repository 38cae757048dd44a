from django.core.management.base import CommandError

from core.management.problem_command import EXIT_INPUT_ERROR, ProblemCommand
from core.numerics.oracle import PerturbationTrace, default_epsilons, perturbation_study
from core.problems import load_coefficient_file


def parse_epsilons(text):
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise CommandError(f"--eps : liste de nombres attendue, reçu '{text}'", returncode=EXIT_INPUT_ERROR)


class Command(ProblemCommand):
    help = 'Étude de perturbation A0 + eps D : écarts entre coefficients et entre matricantes'
    tolerance_options = ('det_floor',)

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--direction', required=True, help='Direction D : CSV ou YAML avec une section coefficient')
        parser.add_argument('--eps', help='Valeurs de eps séparées par des virgules (défaut : 0.1 divisé 8 fois par 2)')
        parser.add_argument('--out', help='Fichier CSV de sortie (par défaut : sortie standard)')

    def handle(self, *args, **options):
        problem = self.load_problem(options)
        epsilons = parse_epsilons(options['eps']) if options['eps'] else default_epsilons()
        with self.input_errors():
            direction = load_coefficient_file(options['direction'], problem.grid, problem.m, problem.n - 1)
            trace = perturbation_study(problem.A, direction, epsilons, problem.n, problem.grid.p,
                                       options['det_floor'])

        self.write_csv(PerturbationTrace.COLUMNS, trace.to_rows(), options['out'])
        self.write_report({
            'K': trace.K,
            'truncated_at': trace.truncated_at,
        }, self.report_stream(options['out']))
