from django.core.management.base import CommandError

from core.exceptions import IllConditionedError, NotWellPosed
from core.management.problem_command import EXIT_NOT_WELL_POSED, ProblemCommand
from core.numerics.solver import general_solution, solve
from core.problems import samples_to_rows
from core.serializers import FredholmReportSerializer


class Command(ProblemCommand):
    help = 'Résout le problème aux limites et écrit la solution en CSV (t, re_y1, im_y1, ...)'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--out', help='Fichier CSV de sortie (par défaut : sortie standard)')
        parser.add_argument(
            '--general',
            action='store_true',
            help='Problème dégénéré : solution de norme minimale et dimension du noyau',
        )

    def handle(self, *args, **options):
        problem = self.load_problem(options)
        if options['general']:
            return self.handle_general(problem, options)

        with self.input_errors():
            try:
                solution = solve(problem, options['rank_tol'], options['det_floor'])
            except NotWellPosed as exc:
                self.write_report(FredholmReportSerializer(exc.report).data, self.stderr)
                raise CommandError(str(exc), returncode=EXIT_NOT_WELL_POSED)
            except IllConditionedError as exc:
                raise CommandError(str(exc), returncode=EXIT_NOT_WELL_POSED)

        self.write_solution(problem, solution.y, options['out'])
        self.write_report({
            'ode_residual': solution.ode_residual,
            'boundary_residual': solution.boundary_residual,
            'condition_number': solution.report.condition_number,
        }, self.report_stream(options['out']))

    def handle_general(self, problem, options):
        with self.input_errors():
            result = general_solution(problem, options['rank_tol'], det_floor=options['det_floor'])
        stream = self.report_stream(options['out'])
        if not result.solvable:
            self.write_report({'solvable': False, 'residual': result.residual}, self.stderr)
            raise CommandError(
                f"Second membre hors de l'image de (L, B) (résidu {result.residual:.3e})",
                returncode=EXIT_NOT_WELL_POSED,
            )
        self.write_solution(problem, result.y, options['out'])
        self.write_report({
            'solvable': True,
            'residual': result.residual,
            'dim_kernel': len(result.kernel),
        }, stream)

    def write_solution(self, problem, y, out):
        header = ['t']
        for i in range(1, problem.m + 1):
            header += [f're_y{i}', f'im_y{i}']
        self.write_csv(header, samples_to_rows(problem.grid, y), out)
