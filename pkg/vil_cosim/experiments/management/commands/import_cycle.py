"""
Convert an EPA drive-cycle schedule (seconds, mph; two header lines) into
the ``t_s,v_mps`` CSV the drive-cycle scenarios read.
"""
from pathlib import Path

import pandas as pd
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError
from django.utils.translation import gettext_lazy as _

from sim.cycles import CYCLE_COLUMNS
from sim.validators import validate_cycle_samples

MPH = 0.44704


def read_epa_schedule(path, skiprows=2):
    try:
        frame = pd.read_csv(path, sep=r'\s+', skiprows=skiprows, header=None, engine='python')
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame()
    if frame.shape[1] < 2:
        raise ValidationError({'samples': _('%(name)s has no seconds/mph columns.') % {'name': path.name}})
    frame = frame.iloc[:, :2]
    frame.columns = ['seconds', 'mph']
    frame = frame.apply(pd.to_numeric, errors='coerce').dropna()
    t = frame['seconds'].to_numpy(dtype=float)
    v = frame['mph'].to_numpy(dtype=float) * MPH
    validate_cycle_samples(t - t[0] if t.size else t, v)
    return pd.DataFrame({CYCLE_COLUMNS[0]: t - t[0], CYCLE_COLUMNS[1]: v})


class Command(BaseCommand):
    help = "Convert an EPA (seconds, mph) schedule into a t_s,v_mps cycle CSV."

    def add_arguments(self, parser):
        parser.add_argument('source', help="EPA schedule text file")
        parser.add_argument('target', help="CSV to write")
        parser.add_argument('--skip', type=int, default=2, help="Header lines before the data")

    def handle(self, *args, **options):
        source = Path(options['source'])
        if not source.is_file():
            raise CommandError(f"{source} does not exist")
        try:
            cycle = read_epa_schedule(source, skiprows=options['skip'])
        except ValidationError as e:
            raise CommandError('; '.join(e.messages))
        cycle.to_csv(options['target'], index=False, float_format='%.5f')
        self.stdout.write(self.style.SUCCESS(
            f"{len(cycle)} samples, {cycle['t_s'].iloc[-1]:.0f} s, peak {cycle['v_mps'].max():.2f} m/s "
            f"-> {options['target']}"))
