"""
Controller comparison tables: one column per controller, one row per
metric, each value with its relative change against the WIE baseline.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from sim.scenario import CONTROLLER_LABELS

from .exceptions import ScenarioMismatch
from .validators import validate_comparable

logger = logging.getLogger(__name__)

BASELINE = 'WIE'
CONTROLLER_ORDER = tuple(CONTROLLER_LABELS.values())

# metric, decimals of the value, decimals of the percentage
COMPARED_METRICS = (
    ('travel_time', 1, 1),
    ('avg_headway', 2, 1),
    ('mean_gap', 1, 0),
    ('max_gap', 1, 0),
    ('net_energy', 0, 1),
    ('fuel_litres', 3, 1),
    ('accel_sq_integral', 1, 1),
    ('upstream_energy', 0, 1),
)
SUMMARY_FIELDS = tuple(metric for metric, _value, _delta in COMPARED_METRICS)


@dataclass(frozen=True)
class RunSummary:
    """The compared figures of one stored run."""
    scenario: str
    controller: str
    travel_time: Optional[float] = None
    avg_headway: Optional[float] = None
    mean_gap: Optional[float] = None
    max_gap: Optional[float] = None
    net_energy: Optional[float] = None
    fuel_litres: Optional[float] = None
    accel_sq_integral: Optional[float] = None
    upstream_energy: Optional[float] = None


def percent_change(value, baseline):
    if value is None or baseline is None or baseline == 0 or np.isnan(value) or np.isnan(baseline):
        return None
    return 100.0 * (value - baseline) / baseline


def format_percent(delta, decimals):
    if delta is None:
        return 'n/a'
    text = f'{delta:+.{decimals}f}%'
    return '0%' if float(text[:-1]) == 0 else text


@dataclass
class ComparisonTable:
    scenario: str
    baseline: str
    values: pd.DataFrame
    deltas: pd.DataFrame

    @property
    def controllers(self):
        return list(self.values.columns)

    def delta(self, metric, controller):
        value = self.deltas.loc[metric, controller]
        return None if pd.isna(value) else float(value)

    def formatted(self):
        """Table of ``value (change)`` strings as printed by the compare command."""
        rows = {}
        for metric, value_decimals, delta_decimals in COMPARED_METRICS:
            cells = {}
            for controller in self.controllers:
                value = self.values.loc[metric, controller]
                if pd.isna(value):
                    cells[controller] = 'n/a'
                    continue
                cell = f'{value:.{value_decimals}f}'
                if controller != self.baseline:
                    cell += f' ({format_percent(self.delta(metric, controller), delta_decimals)})'
                cells[controller] = cell
            rows[metric] = cells
        return pd.DataFrame.from_dict(rows, orient='index', columns=self.controllers)

    def to_frame(self):
        """Long form: metric, controller, value, delta_pct."""
        values = self.values.stack(future_stack=True).rename('value')
        deltas = self.deltas.stack(future_stack=True).rename('delta_pct')
        frame = pd.concat([values, deltas], axis=1).reset_index()
        frame.columns = ['metric', 'controller', 'value', 'delta_pct']
        frame.insert(0, 'scenario', self.scenario)
        return frame

    def to_dict(self):
        return {
            'scenario': self.scenario,
            'baseline': self.baseline,
            'controllers': self.controllers,
            'rows': [
                {
                    'metric': metric,
                    'values': {c: _number(self.values.loc[metric, c]) for c in self.controllers},
                    'delta_pct': {c: _number(self.deltas.loc[metric, c]) for c in self.controllers},
                }
                for metric, _value, _delta in COMPARED_METRICS
            ],
        }


def _number(value):
    return None if value is None or pd.isna(value) else round(float(value), 6)


def _order(controller):
    if controller in CONTROLLER_ORDER:
        return CONTROLLER_ORDER.index(controller), controller
    return len(CONTROLLER_ORDER), controller


def compare(reports):
    """
    Comparison table of ``reports`` (MetricsReport-like objects), which must
    all come from the same scenario. Changes are relative to WIE, or to the
    first controller in column order when WIE did not run.
    """
    reports = list(reports)
    validate_comparable(reports)
    scenarios = {report.scenario for report in reports}
    if len(scenarios) > 1:
        raise ScenarioMismatch(scenarios)
    reports.sort(key=lambda report: _order(report.controller))
    controllers = [report.controller for report in reports]
    baseline = BASELINE if BASELINE in controllers else controllers[0]
    base = reports[controllers.index(baseline)]

    metrics = list(SUMMARY_FIELDS)
    values = pd.DataFrame(index=metrics, columns=controllers, dtype=float)
    deltas = pd.DataFrame(index=metrics, columns=controllers, dtype=float)
    for report in reports:
        for metric in metrics:
            value = getattr(report, metric)
            values.loc[metric, report.controller] = np.nan if value is None else value
            delta = percent_change(value, getattr(base, metric))
            deltas.loc[metric, report.controller] = np.nan if delta is None else delta
    logger.info("compared %s on %s against %s", ', '.join(controllers), scenarios.pop(), baseline)
    return ComparisonTable(scenario=reports[0].scenario, baseline=baseline, values=values, deltas=deltas)
