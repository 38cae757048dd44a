import numpy as np

from core.management.problem_command import ProblemCommand
from core.numerics.funcspace import SobolevIndex, sobolev_norm
from core.numerics.matricant import compute_matricant, liouville_residual, recover_coefficient
from core.problems import samples_to_rows


class Command(ProblemCommand):
    help = 'Calcule la matricante Y du coefficient A et contrôle Liouville et l\'aller-retour Y -> A'
    tolerance_options = ('det_floor',)

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--out', help='Fichier CSV de sortie (par défaut : sortie standard)')

    def handle(self, *args, **options):
        problem = self.load_problem(options)
        with self.input_errors():
            matricant = compute_matricant(problem.A, problem.n)
            recovered = recover_coefficient(matricant, options['det_floor'])

        A = problem.A.truncate(problem.n - 1)
        round_trip = sobolev_norm(recovered - A, SobolevIndex(problem.n - 1, problem.grid.p))
        header = ['t']
        for i in range(1, problem.m + 1):
            for j in range(1, problem.m + 1):
                header += [f're_Y{i}{j}', f'im_Y{i}{j}']
        self.write_csv(header, samples_to_rows(problem.grid, matricant.Y), options['out'])
        self.write_report({
            'liouville_residual': liouville_residual(matricant, problem.A),
            'min_abs_det': float(np.abs(matricant.det_profile).min()),
            'round_trip_gap': round_trip,
            'a_source': matricant.a_source,
        }, self.report_stream(options['out']))
