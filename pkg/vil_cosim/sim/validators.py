import numpy as np
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _


def validate_tick(value):
    if value is None or not np.isfinite(value) or value <= 0:
        raise ValidationError({'tick': _('Tick length must be a positive number of seconds.')})


def validate_cycle_samples(t, v):
    """
    A drive cycle starts at t = 0, runs strictly forward in time and never
    asks for a negative speed.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    if t.size == 0:
        raise ValidationError({'samples': _('A drive cycle needs at least one sample.')})
    if t.shape != v.shape:
        raise ValidationError({'samples': _('Time and speed columns differ in length.')})
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
        raise ValidationError({'samples': _('Drive cycle samples must be finite.')})
    if abs(t[0]) > 1e-9:
        raise ValidationError({'t_s': _('Drive cycle time must start at 0, got %(t0)s.') % {'t0': t[0]}})
    steps = np.diff(t)
    if np.any(steps <= 0):
        row = int(np.argmax(steps <= 0)) + 1
        raise ValidationError({
            't_s': _('Drive cycle time is not strictly increasing at row %(row)s.') % {'row': row}
        })
    if np.any(v < 0):
        row = int(np.argmax(v < 0))
        raise ValidationError({
            'v_mps': _('Negative speed at row %(row)s.') % {'row': row}
        })


def validate_scale(value):
    if value is None or not np.isfinite(value) or value <= 0:
        raise ValidationError({'scale': _('Cycle scale must be positive.')})


def validate_scenario(config):
    """
    Cross-field checks for a scenario.
    """
    if config.laps < 1:
        raise ValidationError({'laps': _('A run needs at least one lap.')})
    if config.n_vehicles < 2:
        raise ValidationError({'n_vehicles': _('A run needs at least two vehicles.')})
    if not (0 <= config.ego_index < config.n_vehicles):
        raise ValidationError({
            'ego_index': _('Ego index %(index)s is outside the %(count)s vehicles.') % {
                'index': config.ego_index, 'count': config.n_vehicles}
        })
    if config.n_cav_string < 0 or config.n_cav_string > config.n_vehicles - 2:
        raise ValidationError({
            'n_cav_string': _('The CAV string must leave at least one human driver on the ring.')
        })
    validate_tick(config.tick)
    if config.seed < 0:
        raise ValidationError({'seed': _('Seed cannot be negative.')})


def validate_choice(field, value, choices):
    if value not in choices:
        raise ValidationError({
            field: _('Unknown %(field)s %(value)s; expected one of %(choices)s.') % {
                'field': field, 'value': repr(value), 'choices': ', '.join(choices)}
        })
