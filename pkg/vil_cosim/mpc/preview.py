"""
Preceding-vehicle preview for the MPC horizon.

Positions in a preview are measured from the ego's front bumper to the
preceding vehicle's rear bumper, so s_r(0) is the current gap.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

logger = logging.getLogger(__name__)

CONNECTED = 'connected'
PREDICTED = 'predicted'


@dataclass
class PvPreview:
    s_r: np.ndarray
    v_r: np.ndarray
    s_alpha: np.ndarray
    source: str = PREDICTED

    @property
    def buffer(self):
        return self.s_r - self.s_alpha


def predict_pv(s_r0, v_r0, a_r0, v_bar, N, dt_h):
    """
    Constant-acceleration prediction with saturation at 0 and v_bar.

    The acceleration is dropped once the speed sits on a bound it would
    otherwise cross. A stop or saturation inside a step is integrated
    exactly, so positions never move backwards.
    """
    s = np.empty(N + 1)
    v = np.empty(N + 1)
    a = np.empty(N + 1)
    s[0] = s_r0
    v[0] = min(max(v_r0, 0.0), v_bar)
    for i in range(N + 1):
        blocked = (v[i] <= 0.0 and a_r0 < 0.0) or (v[i] >= v_bar and a_r0 > 0.0)
        a[i] = 0.0 if blocked else a_r0
        if i == N:
            break
        v_next = v[i] + a[i] * dt_h
        if v_next < 0.0:
            s[i + 1] = s[i] + v[i] ** 2 / (2.0 * -a[i])
            v[i + 1] = 0.0
        elif v_next > v_bar:
            t_sat = (v_bar - v[i]) / a[i]
            s[i + 1] = s[i] + v[i] * t_sat + 0.5 * a[i] * t_sat ** 2 + v_bar * (dt_h - t_sat)
            v[i + 1] = v_bar
        else:
            s[i + 1] = s[i] + v[i] * dt_h + 0.5 * a[i] * dt_h ** 2
            v[i + 1] = v_next
    return s, v, a


def alpha_schedule(t, params):
    """
    Confidence level at prediction time t: alpha_hi up to 1 s, falling
    linearly to alpha_lo at t_f and held there.
    """
    if t < 1.0:
        return params.alpha_hi
    if t > params.t_f:
        return params.alpha_lo
    return (params.alpha_lo - params.alpha_hi) * t / params.t_f + params.alpha_hi


def _position_spread(i, model):
    """Position standard deviation per unit acceleration deviation after i steps."""
    return abs(np.linalg.matrix_power(model.A_d, i)[0, 2])


def position_bound(i, params, model, sigma_a=None):
    """
    Buffer b(i) = s_r(i) - s_alpha(i) from propagating an acceleration
    uncertainty of standard deviation sigma_a through the model.
    """
    sigma_a = params.sigma_a if sigma_a is None else sigma_a
    alpha = alpha_schedule(i * params.dt_h, params)
    return float(norm.ppf(alpha) * sigma_a * _position_spread(i, model))


def buffer_profile(params, model, sigma_a=None):
    return np.array([position_bound(i, params, model, sigma_a) for i in range(params.N + 1)])


def calibrate_sigma(target, params, model, horizon=None):
    """
    Acceleration deviation giving a peak buffer of ``target`` metres.
    Returns (sigma_a, time of the peak).
    """
    steps = horizon if horizon is not None else max(params.N, int(np.ceil(params.t_f / params.dt_h)))

    def profile(sigma):
        return np.array([position_bound(i, params, model, sigma_a=sigma) for i in range(steps + 1)])

    unit = profile(1.0)
    if unit.max() <= 0:
        raise ValueError('buffer profile is identically zero')
    upper = 2.0 * target / unit.max()
    sigma = brentq(lambda value: profile(value).max() - target, 0.0, upper, xtol=1e-12)
    peak = int(np.argmax(profile(sigma)))
    logger.info("calibrated sigma_a=%.4f for a %.2f m peak buffer at t=%.1f s",
                sigma, target, peak * params.dt_h)
    return sigma, peak * params.dt_h


def preview_from_prediction(gap, pv, v_bar, params, model):
    s_r, v_r, _ = predict_pv(gap, pv.v, pv.a, v_bar, params.N, params.dt_h)
    s_alpha = s_r - buffer_profile(params, model)
    return PvPreview(s_r=s_r, v_r=v_r, s_alpha=s_alpha, source=PREDICTED)


@dataclass
class PvPlan:
    """A received trajectory plan in the receiver's odometer frame."""
    t_plan: float
    dt_h: float
    positions: np.ndarray
    v_final: float


def align_plan(positions, pv_odometer, circuit_length):
    """
    Shift odometer positions reported in the sender's lap count onto the
    receiver's estimate of the sender's odometer.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.size == 0:
        return positions
    laps = np.round((pv_odometer - positions[0]) / circuit_length)
    return positions + laps * circuit_length


def resample_plan(plan, now, pv_odometer, N, dt_h):
    """
    Positions of the planning vehicle at now + j*dt_h, j = 0..N.

    The current observed position anchors the start; the plan knots follow
    and the final planned speed extrapolates past the last knot.
    """
    elapsed = max(now - plan.t_plan, 0.0)
    knot_t = plan.t_plan + plan.dt_h * np.arange(1, len(plan.positions) + 1)
    ahead = knot_t > now
    times = np.concatenate([[now], knot_t[ahead]])
    values = np.concatenate([[pv_odometer], plan.positions[ahead]])
    values = np.maximum.accumulate(values)
    query = now + dt_h * np.arange(N + 1)
    result = np.interp(query, times, values)
    beyond = query > times[-1]
    result[beyond] = values[-1] + plan.v_final * (query[beyond] - times[-1])
    if elapsed > plan.dt_h * len(plan.positions):
        logger.debug("plan from t=%.2f is fully expired at t=%.2f", plan.t_plan, now)
    return result


def preview_from_plan(plan, now, ego_odometer, pv_odometer, vehicle_length, params):
    """Connected preview: the communicated plan is both s_r and s_alpha."""
    positions = resample_plan(plan, now, pv_odometer, params.N, params.dt_h)
    s_r = positions - ego_odometer - vehicle_length
    v_r = np.gradient(positions, params.dt_h) if params.N >= 1 else np.zeros(1)
    return PvPreview(s_r=s_r, v_r=np.maximum(v_r, 0.0), s_alpha=s_r.copy(), source=CONNECTED)


def plan_from_v2v(message, pv_odometer, circuit_length, dt_h):
    """Received V2V frame as a plan in the receiver's odometer frame."""
    positions = align_plan(message.s, pv_odometer, circuit_length)
    return PvPlan(t_plan=message.timestamp, dt_h=dt_h, positions=positions, v_final=message.v_final)
