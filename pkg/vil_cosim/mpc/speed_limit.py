import numpy as np

from track.geometry import envelope_limit


def moving_speed_limit(ego, track, N, dt_h):
    """
    Speed bound over the horizon at constant-velocity position estimates
    s + v*i*dt_h, including the braking envelope ahead of each slower zone.
    """
    reach = ego.v * N * dt_h + track.circuit_length
    boundaries = track.drop_boundaries(ego.s, reach=reach)
    return np.array([
        envelope_limit(track, ego.s, ego.v * i * dt_h, boundaries)
        for i in range(N + 1)
    ])
