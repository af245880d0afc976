from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _


class ScenarioMismatch(ValidationError):
    """Reports from different scenarios cannot share a comparison table."""

    def __init__(self, scenarios):
        self.scenarios = tuple(sorted(scenarios))
        super().__init__(
            _('Cannot compare runs of different scenarios: %(scenarios)s.') % {
                'scenarios': ', '.join(self.scenarios)},
            code='scenario_mismatch',
        )
