from django.core.management.base import CommandError

from core.management.problem_command import EXIT_DISAGREEMENT, EXIT_INPUT_ERROR, FredholmCommand
from core.numerics.oracle import run_trials

COLUMNS = ('m', 'r', 'dim_ker', 'dim_coker', 'index', 'agree', 'seed', 'kind', 'n')


class Command(FredholmCommand):
    help = 'Compare le diagnostic de Fredholm à l\'oracle de collocation sur des problèmes aléatoires'

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, default=0, help='Graine 64 bits du lot d\'essais')
        parser.add_argument('--trials', type=int, default=50, help='Nombre d\'essais')
        parser.add_argument('--jobs', type=int, default=1, help='Nombre de processus')
        parser.add_argument('--grid-points', type=int, help='Points de la grille du diagnostic de Fredholm')
        parser.add_argument('--oracle-points', type=int, help='Points de la grille de collocation')
        parser.add_argument('--rank-tol', type=float, help='Tolérance relative du rang de [BY]')
        parser.add_argument('--out', help='Fichier CSV de sortie (par défaut : sortie standard)')
        parser.add_argument('--progress', action='store_true', help='Affiche une barre de progression')

    def handle(self, *args, **options):
        if options['trials'] < 1 or options['jobs'] < 1 or not 0 <= options['seed'] < 2 ** 64:
            raise CommandError("--trials et --jobs doivent être >= 1, --seed dans [0, 2^64)",
                               returncode=EXIT_INPUT_ERROR)
        with self.input_errors():
            results = run_trials(
                options['seed'],
                options['trials'],
                jobs=options['jobs'],
                progress=options['progress'],
                grid_points=options['grid_points'],
                oracle_points=options['oracle_points'],
                rank_tolerance=options['rank_tol'],
            )

        rows = [
            (result.m, result.r, result.oracle_dim_kernel, result.oracle_dim_cokernel, result.oracle_index,
             'agree' if result.agree else 'disagree', result.seed, result.kind, result.n)
            for result in results
        ]
        self.write_csv(COLUMNS, rows, options['out'])
        failing = [str(result.seed) for result in results if not result.agree]
        self.write_report({
            'trials': len(results),
            'agree': len(results) - len(failing),
            'redraws': sum(result.redraws for result in results),
        }, self.report_stream(options['out']))
        if failing:
            raise CommandError(f"Désaccord oracle / Fredholm pour les graines : {', '.join(failing)}",
                               returncode=EXIT_DISAGREEMENT)
        self.report_stream(options['out']).write(
            self.style.SUCCESS(f"✅ {len(results)} essais concordants"))
