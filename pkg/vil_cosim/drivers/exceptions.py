from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _


class CollisionError(ValidationError):
    """Raised when a follower reports a non-positive gap to its leader."""

    def __init__(self, gap):
        self.gap = gap
        super().__init__(
            _('Non-positive gap %(gap)s m to the preceding vehicle.') % {'gap': gap},
            code='collision',
        )
