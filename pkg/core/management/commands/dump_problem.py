from pathlib import Path

from core.management.problem_command import FredholmCommand
from core.problems import dump_problem, read_yaml, validate_problem_document


class Command(FredholmCommand):
    help = 'Valide un fichier de problème et le réémet sous forme canonique (YAML)'

    def add_arguments(self, parser):
        parser.add_argument('problem_file', help='Fichier de problème (YAML)')
        parser.add_argument('--out', help='Fichier de sortie (par défaut : sortie standard)')

    def handle(self, *args, **options):
        path = Path(options['problem_file'])
        with self.input_errors():
            text = dump_problem(validate_problem_document(read_yaml(path)), base_dir=path.parent)
        self.write_output(text, options['out'])
