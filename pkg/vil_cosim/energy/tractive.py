"""
Energy proxies computed from simulated kinematics.

The EV proxy charges positive wheel power through the drive efficiency and
credits negative power through regeneration. The ICEV proxy burns fuel for
positive power only, with lambda enriched above a power threshold.
"""
import numpy as np
from scipy.integrate import trapezoid


def wheel_power(v, a, params):
    """Inertial plus road-load power at the wheels, W."""
    v = np.asarray(v, dtype=float)
    a = np.asarray(a, dtype=float)
    road_load = params.c0 + params.c1 * v + params.c2 * v ** 2
    return params.mass * a * v + road_load * v


def energy_rate(v, a, params):
    """Battery-side power of the EV proxy, W."""
    power = wheel_power(v, a, params)
    return np.where(power > 0, power / params.eta_drive, power * params.eta_regen)


def tractive_proxy(t, v, a, params):
    """EV proxy energy in joules."""
    t = np.asarray(t, dtype=float)
    if t.size < 2:
        return 0.0
    return float(trapezoid(energy_rate(v, a, params), t))


def enrichment_lambda(power, params):
    """Commanded lambda: stoichiometric up to the threshold, then leaning rich linearly."""
    span = params.rich_power_full - params.rich_power_start
    fraction = np.clip((np.asarray(power, dtype=float) - params.rich_power_start) / span, 0.0, 1.0)
    return 1.0 - (1.0 - params.lambda_min) * fraction


def icev_fuel_proxy(t, v, a, params):
    """ICEV proxy fuel volume in litres."""
    t = np.asarray(t, dtype=float)
    if t.size < 2:
        return 0.0
    power = np.maximum(wheel_power(v, a, params), 0.0)
    fuel_power = power / (params.icev_efficiency * enrichment_lambda(power, params))
    return float(trapezoid(fuel_power, t)) / params.fuel_lhv
