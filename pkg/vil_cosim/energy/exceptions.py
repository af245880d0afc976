from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _


class MissingLapsError(ValidationError):
    """The trace does not cover the laps a metric was asked for."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__(
            _('Trace is missing lap(s) %(laps)s.') % {'laps': ', '.join(map(str, self.missing))},
            code='missing_laps',
        )
