import logging

from dataclasses import replace

from .idm import idm_accel
from .speed_limit import apply_speed_limit
from .wiedemann import FollowingState, wie99_accel

logger = logging.getLogger(__name__)


class WiedemannDriver:
    """Per-vehicle Wiedemann 99 driver; owns its regime and last command."""

    name = 'WIE'

    def __init__(self, params, track, lead_time=0.0):
        self.params = params
        self.track = track
        self.lead_time = lead_time
        self.state = FollowingState.KEEP_SPEED
        self.last_command = 0.0

    def command(self, ego, pv, gap):
        v_desired = self.track.limit_at(ego.s)
        a, state = wie99_accel(ego, pv, gap, self.params, self.state,
                               v_desired, a_prev=self.last_command)
        if state != self.state:
            logger.debug("WIE regime %s -> %s at s=%.1f", self.state.value, state.value, ego.s)
        self.state = state
        u = apply_speed_limit(a, ego, self.track, self.lead_time)
        self.last_command = u
        return u


class IdmDriver:
    """Per-vehicle IDM driver tracking the current zone limit."""

    name = 'IDM'

    def __init__(self, params, track, lead_time=0.0):
        self.params = params
        self.track = track
        self.lead_time = lead_time

    def command(self, ego, pv, gap):
        params = replace(self.params, v0=self.track.limit_at(ego.s))
        a = idm_accel(ego.v, ego.v - pv.v, gap, params)
        return apply_speed_limit(a, ego, self.track, self.lead_time)
