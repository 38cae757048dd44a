import json

from django.core.management.base import CommandError

from core.management.problem_command import EXIT_NOT_WELL_POSED, ProblemCommand
from core.numerics.fredholm import diagnose
from core.serializers import FredholmReportSerializer


class Command(ProblemCommand):
    help = 'Diagnostic de Fredholm d\'un problème aux limites : indice, noyau, conoyau, bonne position'
    tolerance_options = ('rank_tol',)

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--json', action='store_true', help='Rapport au format JSON')

    def handle(self, *args, **options):
        problem = self.load_problem(options)
        with self.input_errors():
            report = diagnose(problem, options['rank_tol'])

        data = FredholmReportSerializer(report).data
        if options['json']:
            self.stdout.write(json.dumps(data, indent=2))
        else:
            self.write_report(data)

        if not report.well_posed:
            raise CommandError(
                f"Problème non bien posé (rang [BY] = {report.rank}, r = {report.r}, m = {report.m})",
                returncode=EXIT_NOT_WELL_POSED,
            )
