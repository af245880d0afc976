from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

TRUE_WORDS = ('1', 'true', 'yes')
FALSE_WORDS = ('0', 'false', 'no')


def _where(key, line):
    if line is None:
        return key
    return _('%(key)s (line %(line)s)') % {'key': key, 'line': line}


def validate_config_key(key, known, line=None):
    if key not in known:
        raise ValidationError({
            'config': _('Unknown config key %(key)s.') % {'key': _where(key, line)}
        })


def coerce_value(key, raw, default, line=None):
    """``raw`` converted to the type of ``default``."""
    text = str(raw).strip()
    try:
        if isinstance(default, bool):
            word = text.lower()
            if word in TRUE_WORDS:
                return True
            if word in FALSE_WORDS:
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ValidationError({
            'config': _('Value %(value)s for %(key)s is not a %(type)s.') % {
                'value': repr(text), 'key': _where(key, line), 'type': type(default).__name__}
        })
    return text


def validate_jobs(value):
    if value < 1:
        raise ValidationError({'jobs': _('At least one job is needed.')})


def validate_comparable(reports):
    if len(reports) < 2:
        raise ValidationError({'reports': _('A comparison needs at least two reports.')})
    controllers = [report.controller for report in reports]
    duplicates = sorted({name for name in controllers if controllers.count(name) > 1})
    if duplicates:
        raise ValidationError({
            'reports': _('More than one report for %(controllers)s.') % {'controllers': ', '.join(duplicates)}
        })
