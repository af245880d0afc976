"""
Wiedemann 99 psycho-physical car following.

Thresholds follow the VISSIM formulation:

    sdxc  desired minimum following distance   CC0 + CC1 * v_slower
    sdxo  maximum following distance           sdxc + CC2
    sdxv  perception threshold when closing    sdxo + CC3 * (dv - CC4)
    sdv   speed perception widening            CC6 * 1e-4 * dx^2
    sdvc  closing speed threshold              CC4 - sdv
    sdvo  opening speed threshold              sdv + CC5

dv is the preceding vehicle's speed minus the ego's, so a negative dv means
the ego is closing in.
"""
import enum
import math
from dataclasses import dataclass

from .validators import validate_gap

MAX_DECEL = 10.0
CC6_SCALE = 1e-4


class FollowingState(str, enum.Enum):
    INCREASE_DISTANCE = 'A'
    DECREASE_DISTANCE = 'B'
    KEEP_DISTANCE = 'f'
    KEEP_SPEED = 'w'

    @property
    def description(self):
        return {
            'A': 'increase distance',
            'B': 'decrease distance',
            'f': 'keep distance',
            'w': 'keep speed',
        }[self.value]


@dataclass(frozen=True)
class Thresholds:
    sdxc: float
    sdxo: float
    sdxv: float
    sdv: float
    sdvc: float
    sdvo: float


def thresholds(v, v_pv, a_pv, dx, p):
    dv = v_pv - v
    if v_pv <= 0:
        sdxc = p.cc0
    else:
        if dv >= 0 or a_pv < -1.0:
            v_slower = v
        else:
            v_slower = v_pv + dv * (p.driver_random - 0.5)
        sdxc = p.cc0 + p.cc1 * v_slower
    sdxo = sdxc + p.cc2
    sdxv = sdxo + p.cc3 * (dv - p.cc4)
    sdv = p.cc6 * CC6_SCALE * dx ** 2
    sdvc = p.cc4 - sdv if v_pv > 0 else 0.0
    sdvo = sdv + p.cc5 if v > p.cc5 else sdv
    return Thresholds(sdxc, sdxo, sdxv, sdv, sdvc, sdvo)


def wie99_accel(ego, pv, gap, p, fs, v_desired, a_prev=None):
    """
    One Wiedemann 99 decision for the ego behind ``pv``.

    ``gap`` is bumper-to-bumper, ``v_desired`` the free-flow target speed and
    ``a_prev`` the previous command (the ego acceleration when omitted); the
    sign of the oscillation inside the following band carries over from it.
    Returns the command and the new regime.
    """
    validate_gap(gap)
    v = max(ego.v, 0.0)
    dv = pv.v - v
    dx = gap
    a_prev = ego.a if a_prev is None else a_prev
    th = thresholds(v, pv.v, pv.a, dx, p)
    a_max = p.accel_bound(v)

    if dv < th.sdvo and dx <= th.sdxc:
        state = FollowingState.INCREASE_DISTANCE
        a = 0.0
        if v > 0:
            if dv < 0:
                if dx > p.cc0:
                    a = min(pv.a + dv * dv / (p.cc0 - dx), 0.0)
                else:
                    a = min(pv.a + 0.5 * (dv - th.sdvo), 0.0)
            if a > -p.cc7:
                a = -p.cc7
            else:
                a = max(a, -MAX_DECEL + 0.5 * math.sqrt(v))
    elif dv < th.sdvc and dx < th.sdxv:
        state = FollowingState.DECREASE_DISTANCE
        a = max(0.5 * dv * dv / (-dx + th.sdxc - 0.1), -MAX_DECEL)
    elif dv < th.sdvo and dx < th.sdxo:
        state = FollowingState.KEEP_DISTANCE
        if fs != FollowingState.KEEP_DISTANCE:
            a_prev = -1.0 if dv <= 0 else 1.0
        if a_prev <= 0:
            a = -p.cc7
        else:
            a = min(p.cc7, v_desired - v)
    else:
        state = FollowingState.KEEP_SPEED
        if dx < th.sdxo and dv > 0:
            a = min(dv * dv / (th.sdxo - dx), a_max)
        else:
            a = a_max
        a = min(a, v_desired - v)

    return min(max(a, -MAX_DECEL), a_max), state
