import numpy as np
from scipy.integrate import trapezoid

from .validators import validate_min_samples, validate_terminal_voltage, validate_trace_columns

BATTERY_COLUMNS = ('t', 'voltage', 'current')
R_SERIES = 0.1


def battery_power(voltage, current, r_s=R_SERIES):
    """Internal battery power: terminal power plus the series-resistance loss."""
    current = np.asarray(current, dtype=float)
    return np.asarray(voltage, dtype=float) * current + r_s * current ** 2


def battery_energy(trace, r_s=R_SERIES):
    """Net battery energy in joules, positive for net discharge."""
    validate_trace_columns(trace, BATTERY_COLUMNS)
    validate_min_samples(trace, 2)
    validate_terminal_voltage(trace['voltage'])
    power = battery_power(trace['voltage'], trace['current'], r_s)
    return float(trapezoid(power, trace['t'].to_numpy(dtype=float)))
