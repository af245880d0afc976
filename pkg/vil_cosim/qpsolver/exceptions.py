from django.core.exceptions import ValidationError


class DimensionError(ValidationError):
    """Problem data with inconsistent shapes."""
