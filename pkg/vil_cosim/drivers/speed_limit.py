import math

from track.geometry import decel_distance


def apply_speed_limit(u, ego, track, lead_time=0.0):
    """
    Force comfortable braking ahead of a lower speed limit.

    Inside ``decel_distance`` of a limit drop the command is capped at a_c
    whenever the ego is above the braking envelope. ``lead_time`` shifts the
    envelope upstream by v * lead_time to absorb actuator lag. An ego already
    above its zone limit is capped as well.
    """
    if ego.v > track.limit_at(ego.s):
        return min(u, track.a_c)

    drop = track.next_drop(ego.s)
    if drop is None:
        return u

    if drop.distance > decel_distance(drop.v_hi, drop.v_lo, track.a_c):
        return u

    remaining = drop.distance - ego.v * lead_time
    allowed = math.sqrt(max(drop.v_lo ** 2 - 2.0 * track.a_c * remaining, 0.0))
    if ego.v > allowed:
        return min(u, track.a_c)
    return u
