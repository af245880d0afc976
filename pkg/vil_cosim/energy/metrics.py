"""
Traffic-flow and energy figures from a per-tick trace.

A trace is a DataFrame with one row per vehicle per tick and the columns in
``TRACE_COLUMNS``. ``gap`` is the bumper-to-bumper distance to the
preceding vehicle and ``lap`` counts completed laps, so lap 0 is the first.
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from .exceptions import MissingLapsError
from .params import ProxyParams
from .tractive import energy_rate, icev_fuel_proxy, tractive_proxy
from .validators import validate_trace_columns

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ('tick', 't', 'vehicle_id', 's', 'v', 'a', 'u', 'gap', 'zone', 'lap', 'stale')
PLOT_COLUMNS = ('t', 'vehicle_id', 'v', 'u', 'gap', 'energy_rate')
HEADWAY_MIN_SPEED = 0.1


@dataclass
class LapMetrics:
    lap: int
    discarded: bool
    travel_time: float
    avg_headway: Optional[float]
    mean_gap: float
    max_gap: float
    energy: float


@dataclass
class MetricsReport:
    scenario: str
    controller: str
    travel_time: float
    avg_headway: Optional[float]
    mean_gap: float
    max_gap: float
    mean_center_gap: float
    max_center_gap: float
    min_gap: float
    net_energy: float
    fuel_litres: float
    accel_sq_integral: float
    upstream_energy: Optional[float]
    max_overspeed: float
    laps: List[LapMetrics] = field(default_factory=list)

    def as_row(self):
        row = asdict(self)
        row.pop('laps')
        return row

    def laps_frame(self):
        return pd.DataFrame([asdict(lap) for lap in self.laps])


def headways(gap, v, v_min=HEADWAY_MIN_SPEED):
    """Time headway gap / v; NaN where the vehicle is slower than v_min."""
    gap = np.asarray(gap, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.full(gap.shape, np.nan)
    moving = v >= v_min
    out[moving] = gap[moving] / v[moving]
    return out


def average_headway(gap, v, v_min=HEADWAY_MIN_SPEED):
    values = headways(gap, v, v_min)
    values = values[~np.isnan(values)]
    return float(values.mean()) if values.size else None


def _tick(times):
    steps = np.diff(times)
    return float(np.median(steps)) if steps.size else 0.0


def lap_metrics(rows, lap, discarded, tick, params):
    t = rows['t'].to_numpy(dtype=float)
    return LapMetrics(
        lap=int(lap),
        discarded=discarded,
        travel_time=float(t[-1] - t[0] + tick),
        avg_headway=average_headway(rows['gap'], rows['v']),
        mean_gap=float(rows['gap'].mean()),
        max_gap=float(rows['gap'].max()),
        energy=tractive_proxy(t, rows['v'], rows['a'], params),
    )


def flow_metrics(trace, ego_id, track, params=None, laps=None, discard_first_lap=True,
                 upstream_ids=(), scenario='', controller=''):
    """
    Metrics of vehicle ``ego_id``. ``laps`` is the number of laps the run
    was meant to cover; when given, every one of them must be in the trace.
    """
    params = params or ProxyParams()
    validate_trace_columns(trace, TRACE_COLUMNS)
    ego = trace[trace['vehicle_id'] == ego_id].sort_values('t')
    present = sorted(int(lap) for lap in ego['lap'].unique())
    expected = list(range(laps)) if laps is not None else present
    missing = [lap for lap in expected if lap not in present]
    first_kept = 1 if discard_first_lap else 0
    if missing or not [lap for lap in expected if lap >= first_kept]:
        raise MissingLapsError(missing or [first_kept])

    tick = _tick(ego['t'].to_numpy(dtype=float))
    per_lap = [
        lap_metrics(ego[ego['lap'] == lap], lap, lap < first_kept, tick, params)
        for lap in expected
    ]
    kept = ego[ego['lap'].isin([lap for lap in expected if lap >= first_kept])]
    t = kept['t'].to_numpy(dtype=float)
    gap = kept['gap'].to_numpy(dtype=float)
    limits = np.array([zone.v_limit for zone in track.zones])[kept['zone'].to_numpy(dtype=int)]

    upstream_energy = None
    if upstream_ids:
        window = trace[(trace['t'] >= t[0]) & (trace['t'] <= t[-1])]
        totals = []
        for vehicle_id in upstream_ids:
            rows = window[window['vehicle_id'] == vehicle_id].sort_values('t')
            totals.append(tractive_proxy(rows['t'], rows['v'], rows['a'], params))
        upstream_energy = float(np.mean(totals))

    report = MetricsReport(
        scenario=scenario,
        controller=controller,
        travel_time=float(sum(lap.travel_time for lap in per_lap if not lap.discarded)),
        avg_headway=average_headway(gap, kept['v']),
        mean_gap=float(np.nanmean(gap)),
        max_gap=float(np.nanmax(gap)),
        mean_center_gap=float(np.nanmean(gap) + track.vehicle_length),
        max_center_gap=float(np.nanmax(gap) + track.vehicle_length),
        min_gap=float(np.nanmin(gap)),
        net_energy=tractive_proxy(t, kept['v'], kept['a'], params),
        fuel_litres=icev_fuel_proxy(t, kept['v'], kept['a'], params.without_regen()),
        accel_sq_integral=float(trapezoid(kept['a'].to_numpy(dtype=float) ** 2, t)),
        upstream_energy=upstream_energy,
        max_overspeed=float(np.max(kept['v'].to_numpy(dtype=float) - limits)),
        laps=per_lap,
    )
    logger.info("%s/%s: travel %.1f s, headway %s, mean gap %.1f m over %d kept lap(s)",
                scenario, controller, report.travel_time,
                'n/a' if report.avg_headway is None else f'{report.avg_headway:.2f} s',
                report.mean_gap, len(per_lap) - first_kept)
    return report


def reports_frame(reports):
    return pd.DataFrame([report.as_row() for report in reports])


def write_metrics_csv(report, path):
    reports_frame([report]).to_csv(path, index=False)
    laps_path = path.with_name(path.stem + '_laps.csv')
    report.laps_frame().to_csv(laps_path, index=False)
    return laps_path


def read_metrics_csv(path):
    row = pd.read_csv(path).iloc[0].to_dict()
    row = {key: (None if isinstance(value, float) and np.isnan(value) else value) for key, value in row.items()}
    row['scenario'] = str(row['scenario'])
    row['controller'] = str(row['controller'])
    return MetricsReport(**row)


def plot_data(trace, vehicle_ids, params=None):
    """Tidy per-vehicle series for plotting."""
    params = params or ProxyParams()
    rows = trace[trace['vehicle_id'].isin(list(vehicle_ids))].copy()
    rows['energy_rate'] = energy_rate(rows['v'], rows['a'], params)
    return rows.loc[:, list(PLOT_COLUMNS)].reset_index(drop=True)
