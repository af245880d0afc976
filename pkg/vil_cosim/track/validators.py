import math

from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _


def validate_comfortable_decel(value):
    """
    The comfortable deceleration is a braking rate and must be negative.
    """
    if value is None or not math.isfinite(value):
        raise ValidationError(_('Comfortable deceleration must be a finite number.'))
    if value >= 0:
        raise ValidationError(
            _('Comfortable deceleration must be negative, got %(value)s m/s².') % {
                'value': value}
        )


def validate_positive_length(value, field='length'):
    if value is None or not math.isfinite(value) or value <= 0:
        raise ValidationError({
            field: _('%(field)s must be a positive distance.') % {'field': field}
        })


def validate_vehicle_length(value):
    if value is None or not math.isfinite(value) or value < 0:
        raise ValidationError({
            'vehicle_length': _('Vehicle length cannot be negative.')
        })


def validate_speed_zones(zones):
    """
    Zones must be ordered, start at zero and tile the circuit without gaps
    or overlaps. Each zone needs a positive speed limit.
    """
    if not zones:
        raise ValidationError(_('A track needs at least one speed zone.'))

    if abs(zones[0].start_s) > 1e-9:
        raise ValidationError(_('The first speed zone must start at s = 0.'))

    for index, zone in enumerate(zones):
        if zone.start_s >= zone.end_s:
            raise ValidationError({
                'zones': _('Zone %(index)s has start %(start)s not below end %(end)s.') % {
                    'index': index, 'start': zone.start_s, 'end': zone.end_s}
            })
        if zone.v_limit <= 0:
            raise ValidationError({
                'zones': _('Zone %(index)s has a non-positive speed limit.') % {
                    'index': index}
            })
        if index > 0 and abs(zones[index - 1].end_s - zone.start_s) > 1e-9:
            raise ValidationError({
                'zones': _('Zones %(prev)s and %(index)s leave a gap or overlap.') % {
                    'prev': index - 1, 'index': index}
            })


def validate_speed_pair(v_hi, v_lo):
    if v_lo < 0:
        raise ValidationError({'v_lo': _('Target speed cannot be negative.')})
    if v_hi < v_lo:
        raise ValidationError({
            'v_hi': _('Initial speed %(v_hi)s is below target speed %(v_lo)s.') % {
                'v_hi': v_hi, 'v_lo': v_lo}
        })
