"""
Closed test circuit: two straights joined by two semicircular U-turns.

Arc length s runs from 0 at the start of the first straight, which lies on
the x axis heading east. The first U-turn is centred at (L, R), the second
straight runs west at y = 2R and the second U-turn is centred at (0, R).
"""
import math
from dataclasses import dataclass, replace
from typing import Optional

from .validators import (
    validate_comfortable_decel,
    validate_positive_length,
    validate_speed_pair,
    validate_speed_zones,
    validate_vehicle_length,
)

STRAIGHT = 'straight'
TURN = 'turn'


@dataclass(frozen=True)
class SpeedZone:
    start_s: float
    end_s: float
    v_limit: float
    kind: str = STRAIGHT

    @property
    def length(self):
        return self.end_s - self.start_s

    def contains(self, s):
        return self.start_s <= s < self.end_s


@dataclass(frozen=True)
class DropBoundary:
    """A zone boundary where the speed limit falls."""
    distance: float
    v_hi: float
    v_lo: float


@dataclass(frozen=True)
class TrackMap:
    zones: tuple
    a_c: float = -2.0
    vehicle_length: float = 5.0
    straight_length: float = 1550.0
    turn_radius: float = 47.5

    def __post_init__(self):
        object.__setattr__(self, 'zones', tuple(self.zones))
        validate_speed_zones(self.zones)
        validate_comfortable_decel(self.a_c)
        validate_vehicle_length(self.vehicle_length)

    @classmethod
    def from_config(cls, config):
        return build_track(
            straight_length=config['straight_length'],
            turn_diameter=config['turn_diameter'],
            v_straight=config['v_straight'],
            v_turn=config['v_turn'],
            a_c=config['a_c'],
            vehicle_length=config['vehicle_length'],
        )

    @property
    def circuit_length(self):
        return self.zones[-1].end_s

    def wrap(self, s):
        s = math.fmod(s, self.circuit_length)
        if s < 0:
            s += self.circuit_length
        if s >= self.circuit_length:
            s = 0.0
        return s

    def zone_index(self, s):
        s = self.wrap(s)
        for index, zone in enumerate(self.zones):
            if zone.contains(s):
                return index
        return len(self.zones) - 1

    def zone_at(self, s):
        return self.zones[self.zone_index(s)]

    def limit_at(self, s):
        return self.zone_at(s).v_limit

    def drop_boundaries(self, s, reach):
        """
        Boundaries ahead of ``s`` (within ``reach`` metres) where the limit
        falls, ordered by distance.
        """
        s = self.wrap(s)
        index = self.zone_index(s)
        count = len(self.zones)
        distance = self.zones[index].end_s - s
        found = []
        while distance <= reach:
            current = self.zones[index]
            nxt = self.zones[(index + 1) % count]
            if nxt.v_limit < current.v_limit:
                found.append(DropBoundary(distance, current.v_limit, nxt.v_limit))
            index = (index + 1) % count
            distance += self.zones[index].length
        return found

    def next_drop(self, s):
        boundaries = self.drop_boundaries(s, reach=self.circuit_length)
        return boundaries[0] if boundaries else None

    def _segment(self, s):
        """Segment index 0..3 at arc length s and the distance into it."""
        s = self.wrap(s)
        L = self.straight_length
        half = math.pi * self.turn_radius
        for index, length in enumerate((L, half, L)):
            if s < length:
                return index, s
            s -= length
        return 3, s

    def heading_at(self, s):
        """Heading in radians at arc length s, zero along the first straight."""
        index, into = self._segment(s)
        if index == 0:
            return 0.0
        if index == 2:
            return math.pi
        phi = into / self.turn_radius
        return phi if index == 1 else math.pi + phi

    def position_xy(self, s):
        """Planar (x, y, heading) of the centreline point at arc length s."""
        index, into = self._segment(s)
        L = self.straight_length
        R = self.turn_radius
        heading = self.heading_at(s)
        if index == 0:
            return into, 0.0, heading
        if index == 2:
            return L - into, 2.0 * R, heading
        phi = into / R
        if index == 1:
            return L + R * math.sin(phi), R - R * math.cos(phi), heading
        return -R * math.sin(phi), R + R * math.cos(phi), heading

    def project(self, x, y):
        """Arc length of the centreline point closest to (x, y)."""
        L = self.straight_length
        R = self.turn_radius
        half = math.pi * R
        candidates = []

        sx = min(max(x, 0.0), L)
        candidates.append((math.hypot(x - sx, y), sx))

        sx = min(max(x, 0.0), L)
        candidates.append((math.hypot(x - sx, y - 2.0 * R), L + half + (L - sx)))

        phi = min(max(math.atan2(x - L, R - y), 0.0), math.pi)
        px, py = L + R * math.sin(phi), R - R * math.cos(phi)
        candidates.append((math.hypot(x - px, y - py), L + R * phi))

        phi = min(max(math.atan2(-x, y - R), 0.0), math.pi)
        px, py = -R * math.sin(phi), R + R * math.cos(phi)
        candidates.append((math.hypot(x - px, y - py), 2.0 * L + half + R * phi))

        _, s = min(candidates)
        return self.wrap(s)


@dataclass
class VehicleState:
    s: float = 0.0
    v: float = 0.0
    a: float = 0.0
    heading: float = 0.0
    lap: int = 0
    brake_on: bool = False
    timestamp: float = 0.0

    def odometer(self, track):
        return self.s + self.lap * track.circuit_length


def build_track(straight_length=1550.0, turn_diameter=95.0, v_straight=22.3,
                v_turn=7.0, a_c=-2.0, vehicle_length=5.0):
    validate_positive_length(straight_length, 'straight_length')
    validate_positive_length(turn_diameter, 'turn_diameter')
    radius = turn_diameter / 2.0
    turn = math.pi * radius
    bounds = [0.0, straight_length, straight_length + turn,
              2.0 * straight_length + turn, 2.0 * straight_length + 2.0 * turn]
    kinds = [(STRAIGHT, v_straight), (TURN, v_turn)] * 2
    zones = tuple(
        SpeedZone(bounds[i], bounds[i + 1], limit, kind)
        for i, (kind, limit) in enumerate(kinds)
    )
    return TrackMap(zones=zones, a_c=a_c, vehicle_length=vehicle_length,
                    straight_length=straight_length, turn_radius=radius)


def default_track(**overrides):
    """
    The published circuit: 1550 m straights limited to 22.3 m/s joined by
    95 m diameter U-turns limited to 7.0 m/s.
    """
    return build_track(**overrides)


def center_gap(follower, leader, track):
    return (leader.s - follower.s) % track.circuit_length


def gap_ahead(follower, leader, track):
    """Bumper-to-bumper distance from follower to leader around the ring."""
    return max(center_gap(follower, leader, track) - track.vehicle_length, 0.0)


def decel_distance(v_hi, v_lo, a_c):
    """Distance needed to slow from v_hi to v_lo at constant a_c."""
    validate_comfortable_decel(a_c)
    validate_speed_pair(v_hi, v_lo)
    return (v_lo ** 2 - v_hi ** 2) / (2.0 * a_c)


def advance(state, ds, track):
    """Move a state forward by ds metres, counting completed laps."""
    laps, s = divmod(state.s + ds, track.circuit_length)
    lap = state.lap + int(laps)
    if s >= track.circuit_length:
        s -= track.circuit_length
        lap += 1
    return replace(state, s=s, lap=lap, heading=track.heading_at(s))


def envelope_limit(track, s, distance_ahead, boundaries: Optional[list] = None):
    """
    Speed allowed at ``distance_ahead`` metres past ``s``: the zone limit
    there, lowered by the comfortable-deceleration envelope of every limit
    drop still ahead of that point.
    """
    if boundaries is None:
        boundaries = track.drop_boundaries(s, reach=distance_ahead + track.circuit_length)
    limit = track.limit_at(s + distance_ahead)
    for boundary in boundaries:
        remaining = boundary.distance - distance_ahead
        if remaining < 0:
            continue
        limit = min(limit, math.sqrt(boundary.v_lo ** 2 - 2.0 * track.a_c * remaining))
    return limit
