import math

from .validators import validate_gap


def desired_gap(v, dv, p):
    """Dynamic desired gap s*; dv is the approach rate (ego minus leader)."""
    return p.s0 + max(0.0, p.T * v + v * dv / (2.0 * math.sqrt(p.a0 * p.b0)))


def idm_accel(v, dv, ds, p):
    """
    Intelligent driver model acceleration.

    The interaction term s*/ds enters linearly, not squared, and the command
    is floored at three times the comfortable braking rate b0.
    """
    validate_gap(ds)
    free = (max(v, 0.0) / p.v0) ** p.delta
    interaction = desired_gap(v, dv, p) / ds
    return max(p.a0 * (1.0 - free - interaction), -3.0 * p.b0)


def equilibrium_gap(v, p):
    """Gap at which idm_accel vanishes for a leader at the same speed v < v0."""
    return desired_gap(v, 0.0, p) / (1.0 - (v / p.v0) ** p.delta)
