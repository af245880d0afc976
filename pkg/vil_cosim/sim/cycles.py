"""
Drive cycles that set the preceding vehicle's speed profile.

Cycles are read from two-column ``t_s,v_mps`` CSV files, scaled, and put
on the tick grid. ``modify_cycle_for_track`` then makes a cycle drivable on
the circuit: it caps the speed by the braking envelope of the zone limits
along the integrated position and loops the cycle until the laps are done.
"""
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from track.geometry import envelope_limit

from .validators import validate_cycle_samples, validate_scale, validate_tick

logger = logging.getLogger(__name__)

CYCLE_COLUMNS = ('t_s', 'v_mps')
MAX_REPEATS = 1000
# m/s², used after a capped stretch when the cycle itself never speeds up
RECOVERY_ACCEL = 1.5


@dataclass(frozen=True)
class DriveCycle:
    """
    Speed samples on a time grid. ``positions`` holds the integrated
    odometer once the cycle has been fitted to a track.
    """
    name: str
    t: np.ndarray
    v: np.ndarray
    scale: float = 1.0
    positions: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, 't', np.asarray(self.t, dtype=float))
        object.__setattr__(self, 'v', np.asarray(self.v, dtype=float))
        validate_cycle_samples(self.t, self.v)
        validate_scale(self.scale)

    @property
    def duration(self):
        return float(self.t[-1])

    @property
    def peak(self):
        return float(self.v.max())

    def speed_at(self, t):
        return np.interp(t, self.t, self.v)

    def accel_at(self, t):
        if self.t.size < 2:
            return np.zeros_like(np.asarray(t, dtype=float))
        return np.interp(t, self.t, np.gradient(self.v, self.t))

    def position_at(self, t):
        if self.positions is None:
            raise ValidationError({'positions': _('Cycle %(name)s has not been fitted to a track.') % {
                'name': self.name}})
        return np.interp(t, self.t, self.positions)

    def as_frame(self):
        return pd.DataFrame({'t_s': self.t, 'v_mps': self.v})


def resample(t, v, tick):
    validate_tick(tick)
    grid = np.arange(0.0, t[-1] + tick / 2.0, tick)
    return grid, np.interp(grid, t, v)


def load_cycle(path, scale=1.0, tick=0.1, name=None):
    """
    Read a ``t_s,v_mps`` CSV, multiply speeds by ``scale`` and resample to
    the tick grid by linear interpolation.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError({'path': _('Drive cycle file %(path)s does not exist.') % {'path': path}})
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise ValidationError({'path': _('Drive cycle file %(path)s is empty.') % {'path': path}})
    missing = [column for column in CYCLE_COLUMNS if column not in frame.columns]
    if missing:
        raise ValidationError({
            'path': _('Drive cycle file lacks column(s) %(columns)s.') % {'columns': ', '.join(missing)}
        })
    validate_scale(scale)
    t = frame['t_s'].to_numpy(dtype=float)
    v = frame['v_mps'].to_numpy(dtype=float)
    validate_cycle_samples(t, v)
    grid, speeds = resample(t, v * scale, tick)
    cycle = DriveCycle(name=name or path.stem, t=grid, v=speeds, scale=scale)
    logger.info("loaded cycle %s: %.0f s, peak %.2f m/s at scale %.2f",
                cycle.name, cycle.duration, cycle.peak, scale)
    return cycle


def modify_cycle_for_track(cycle, track, laps=3, start_s=0.0, tick=None):
    """
    Fit ``cycle`` to ``track`` for a vehicle starting at ``start_s``.

    Each sample is capped by the speed the braking envelope allows at the
    position reached so far. Leaving a capped stretch, speed climbs back no
    faster than the largest per-sample rise in the cycle. Positions integrate
    trapezoidally and the cycle repeats until ``laps`` full laps past the
    start are driven.
    """
    if tick is None:
        tick = float(np.median(np.diff(cycle.t))) if cycle.t.size > 1 else 0.1
    validate_tick(tick)
    steps = np.diff(cycle.v)
    rise = float(steps.max()) if steps.size and steps.max() > 0 else RECOVERY_ACCEL * tick
    target = start_s + laps * track.circuit_length
    speeds = []
    positions = []
    s = start_s
    v_prev = 0.0
    repeats = 0
    while s < target:
        if repeats >= MAX_REPEATS:
            raise ValidationError({
                'cycle': _('Cycle %(name)s does not cover %(laps)s laps.') % {'name': cycle.name, 'laps': laps}
            })
        progressed = False
        for v_cycle in cycle.v:
            if speeds:
                v = min(float(v_cycle), v_prev + rise, envelope_limit(track, s + v_prev * tick, 0.0))
                ahead = s + 0.5 * (v_prev + v) * tick
                cap = envelope_limit(track, ahead, 0.0)
                if v > cap:
                    v = cap
                    ahead = s + 0.5 * (v_prev + v) * tick
                s = ahead
            else:
                v = min(float(v_cycle), envelope_limit(track, s, 0.0))
            speeds.append(v)
            positions.append(s)
            progressed = progressed or v > 0
            v_prev = v
            if s >= target:
                break
        if not progressed:
            raise ValidationError({'cycle': _('Cycle %(name)s never moves.') % {'name': cycle.name}})
        repeats += 1

    t = tick * np.arange(len(speeds))
    logger.info("fitted cycle %s to the track: %d repeat(s), %.0f s", cycle.name, repeats, t[-1])
    return replace(cycle, name=f'{cycle.name}-track', t=t, v=np.array(speeds), positions=np.array(positions))
