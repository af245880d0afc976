import math

from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from .exceptions import CollisionError


def validate_gap(value):
    if value is None or not math.isfinite(value):
        raise ValidationError({'gap': _('Gap must be a finite distance.')})
    if value <= 0:
        raise CollisionError(value)


def validate_wie99_params(params):
    """
    Cross-field checks for a Wiedemann 99 parameter set.
    """
    if params.cc0 <= 0:
        raise ValidationError({'cc0': _('Standstill distance CC0 must be positive.')})
    if params.cc1 <= 0:
        raise ValidationError({'cc1': _('Headway time CC1 must be positive.')})
    if params.cc9 <= 0:
        raise ValidationError({'cc9': _('Acceleration at 80 km/h CC9 must be positive.')})
    if params.cc8 < params.cc9:
        raise ValidationError({
            'cc8': _('Standstill acceleration CC8 (%(cc8)s) cannot be below CC9 (%(cc9)s).') % {
                'cc8': params.cc8, 'cc9': params.cc9}
        })
    if params.cc7 < 0:
        raise ValidationError({'cc7': _('Oscillation amplitude CC7 cannot be negative.')})
    if not (0.0 <= params.driver_random <= 1.0):
        raise ValidationError({
            'driver_random': _('Driver random value must lie in [0, 1].')
        })


def validate_idm_params(params):
    for name in ('a0', 'b0', 'T', 's0', 'v0'):
        value = getattr(params, name)
        if value is None or value <= 0:
            raise ValidationError({
                name: _('%(name)s must be positive.') % {'name': name}
            })
    if params.delta < 1:
        raise ValidationError({'delta': _('Acceleration exponent must be at least 1.')})
