from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from energy.metrics import read_metrics_csv
from experiments.compare import compare


def metrics_path(value):
    path = Path(value)
    return path / 'metrics.csv' if path.is_dir() else path


class Command(BaseCommand):
    help = "Compare metrics CSVs (or run directories) of one scenario against the WIE run."

    def add_arguments(self, parser):
        parser.add_argument('reports', nargs='+', help="metrics.csv files or run directories")
        parser.add_argument('--out', help="Write the formatted table to this CSV")

    def handle(self, *args, **options):
        paths = [metrics_path(value) for value in options['reports']]
        missing = [str(path) for path in paths if not path.is_file()]
        if missing:
            raise CommandError(f"No metrics file at {', '.join(missing)}")
        try:
            table = compare(read_metrics_csv(path) for path in paths)
        except ValidationError as e:
            raise CommandError('; '.join(e.messages))
        formatted = table.formatted()
        self.stdout.write(f"{table.scenario}, changes against {table.baseline}")
        self.stdout.write(formatted.to_string())
        if options['out']:
            formatted.to_csv(options['out'], index_label='metric')
            self.stdout.write(self.style.SUCCESS(f"wrote {options['out']}"))
