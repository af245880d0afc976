import numpy as np
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from .exceptions import DimensionError

PSD_TOLERANCE = 1e-9


def validate_problem_dimensions(H, g, G, h, lb, ub):
    n = g.shape[0]
    if H.shape != (n, n):
        raise DimensionError({
            'H': _('Cost matrix has shape %(shape)s, expected (%(n)s, %(n)s).') % {
                'shape': H.shape, 'n': n}
        })
    if G.ndim != 2 or G.shape[1] != n:
        raise DimensionError({
            'G': _('Constraint matrix needs %(n)s columns, got shape %(shape)s.') % {
                'n': n, 'shape': G.shape}
        })
    if h.shape != (G.shape[0],):
        raise DimensionError({
            'h': _('Constraint bound has %(got)s entries for %(rows)s rows.') % {
                'got': h.shape[0], 'rows': G.shape[0]}
        })
    for name, bound in (('lb', lb), ('ub', ub)):
        if bound.shape != (n,):
            raise DimensionError({
                name: _('Box bound has %(got)s entries for %(n)s variables.') % {
                    'got': bound.shape[0], 'n': n}
            })


def validate_cost_matrix(H):
    """
    H must be symmetric and positive semidefinite up to a small tolerance.
    """
    if not np.all(np.isfinite(H)):
        raise ValidationError({'H': _('Cost matrix contains non-finite entries.')})
    scale = max(1.0, float(np.abs(H).max())) if H.size else 1.0
    if not np.allclose(H, H.T, atol=1e-10 * scale, rtol=0.0):
        raise ValidationError({'H': _('Cost matrix must be symmetric.')})
    if H.size and np.linalg.eigvalsh(H).min() < -PSD_TOLERANCE * scale:
        raise ValidationError({'H': _('Cost matrix must be positive semidefinite.')})


def validate_box(lb, ub):
    if np.any(lb > ub):
        raise ValidationError({'lb': _('Lower box bound exceeds upper bound.')})
