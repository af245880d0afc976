from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _


def validate_mpc_params(params):
    """
    Range checks for an MPC parameter profile.
    """
    if params.N < 1:
        raise ValidationError({'N': _('Horizon must have at least one step.')})
    if params.dt_h <= 0:
        raise ValidationError({'dt_h': _('Prediction step must be positive.')})
    if params.tau_a <= 0:
        raise ValidationError({'tau_a': _('Actuator time constant must be positive.')})
    if params.u_min >= 0:
        raise ValidationError({'u_min': _('Minimum input must be a deceleration.')})
    if params.q_a < 0 or params.q_g < 0:
        raise ValidationError({'q_a': _('Objective weights cannot be negative.')})
    if any(rho <= 0 for rho in params.rho):
        raise ValidationError({'rho': _('Slack penalties must be positive.')})
    if params.sigma_a < 0:
        raise ValidationError({'sigma_a': _('Acceleration deviation cannot be negative.')})
    if not (0.5 <= params.alpha_lo <= params.alpha_hi < 1.0):
        raise ValidationError({
            'alpha_lo': _('Confidence levels must satisfy 0.5 <= alpha_lo <= alpha_hi < 1.')
        })
    if params.t_f <= 1.0:
        raise ValidationError({'t_f': _('Confidence relaxation time must exceed 1 s.')})


def validate_preview_length(name, values, expected):
    if len(values) != expected:
        raise ValidationError({
            name: _('Preview %(name)s has %(got)s stages, expected %(expected)s.') % {
                'name': name, 'got': len(values), 'expected': expected}
        })
