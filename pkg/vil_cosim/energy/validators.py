import numpy as np
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _


def validate_trace_columns(frame, columns, name='trace'):
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise ValidationError({
            name: _('Trace lacks column(s) %(columns)s.') % {'columns': ', '.join(missing)}
        })


def validate_min_samples(frame, minimum, name='trace'):
    if len(frame) < minimum:
        raise ValidationError({
            name: _('At least %(minimum)s samples are needed, got %(count)s.') % {
                'minimum': minimum, 'count': len(frame)}
        })


def validate_lambda(lambda_c):
    """
    Commanded air-fuel equivalence ratios must be positive.
    """
    if np.any(np.asarray(lambda_c, dtype=float) <= 0):
        raise ValidationError({'lambda_c': _('Commanded lambda must be positive.')})


def validate_terminal_voltage(voltage):
    if np.any(np.asarray(voltage, dtype=float) <= 0):
        raise ValidationError({'voltage': _('Terminal voltage must be positive.')})


def validate_proxy_params(params):
    if params.mass <= 0:
        raise ValidationError({'mass': _('Vehicle mass must be positive.')})
    if not (0 < params.eta_drive <= 1):
        raise ValidationError({'eta_drive': _('Drive efficiency must lie in (0, 1].')})
    if not (0 <= params.eta_regen <= 1):
        raise ValidationError({'eta_regen': _('Regeneration efficiency must lie in [0, 1].')})
    if not (0 < params.lambda_min <= 1):
        raise ValidationError({'lambda_min': _('Richest lambda must lie in (0, 1].')})
    if params.rich_power_full <= params.rich_power_start:
        raise ValidationError({
            'rich_power_full': _('Full enrichment power must exceed the enrichment start.')
        })
