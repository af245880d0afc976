import logging
from pathlib import Path

import pandas as pd
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from energy.battery import BATTERY_COLUMNS
from energy.fuel import OBD_COLUMNS
from energy.metrics import TRACE_COLUMNS
from energy.validators import validate_trace_columns

logger = logging.getLogger(__name__)


class TraceRecorder:
    """
    Collects one row per recorded vehicle per tick. ``vehicle_ids`` limits
    recording to those vehicles; ``None`` records everyone.
    """

    def __init__(self, vehicle_ids=None):
        self.vehicle_ids = None if vehicle_ids is None else set(vehicle_ids)
        self.rows = []

    def __len__(self):
        return len(self.rows)

    def wants(self, vehicle_id):
        return self.vehicle_ids is None or vehicle_id in self.vehicle_ids

    def record(self, tick, t, vehicle_id, state, u, gap, zone, stale=False):
        if not self.wants(vehicle_id):
            return
        self.rows.append((tick, t, vehicle_id, state.s, state.v, state.a, u, gap, zone,
                          state.lap, stale))

    def frame(self):
        frame = pd.DataFrame(self.rows, columns=list(TRACE_COLUMNS))
        return frame.sort_values(['tick', 'vehicle_id'], kind='stable').reset_index(drop=True)

    def write_csv(self, path):
        path = Path(path)
        self.frame().to_csv(path, index=False, float_format='%.6f')
        logger.info("wrote %d trace rows to %s", len(self.rows), path)
        return path


def read_trace(path):
    return pd.read_csv(path)


def _read_signal_csv(path, columns, name):
    path = Path(path)
    if not path.is_file():
        raise ValidationError({name: _('%(path)s does not exist.') % {'path': path}})
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame()
    validate_trace_columns(frame, columns, name)
    frame = frame[list(columns)].apply(pd.to_numeric, errors='coerce')
    if frame.isna().any().any():
        raise ValidationError({name: _('%(path)s has missing or non-numeric samples.') % {'path': path.name}})
    if (frame['t'].diff().dropna() <= 0).any():
        raise ValidationError({name: _('Sample times in %(path)s must increase.') % {'path': path.name}})
    logger.debug("read %d %s samples from %s", len(frame), name, path)
    return frame.reset_index(drop=True)


def read_obd_trace(path):
    """OBD log with t, maf (g/s), lambda_c, ltft and stft (percent) columns."""
    return _read_signal_csv(path, OBD_COLUMNS, 'obd')


def read_battery_trace(path):
    """Battery log with t, voltage (V) and current (A, positive discharging)."""
    return _read_signal_csv(path, BATTERY_COLUMNS, 'battery')
