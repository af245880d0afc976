"""
Run configuration.

Defaults come from ``settings.VIL_COSIM``. A flat ``key = value`` file and
then ``VIL_<KEY>`` environment variables (dots written as ``__``) override
them; every value takes the type of its default.
"""
import logging
import os
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from .validators import coerce_value, validate_config_key

logger = logging.getLogger(__name__)

ENV_PREFIX = 'VIL_'


def env_name(key):
    return ENV_PREFIX + key.replace('.', '__').upper()


def read_config_file(path, defaults):
    """Overrides from a ``key = value`` file; ``#`` starts a comment."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError({'config': _('Config file %(path)s does not exist.') % {'path': path}})
    overrides = {}
    for number, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ValidationError({
                'config': _('%(path)s line %(line)s is not "key = value": %(text)s') % {
                    'path': path.name, 'line': number, 'text': raw.strip()}
            })
        key, value = (part.strip() for part in line.split('=', 1))
        validate_config_key(key, defaults, line=number)
        overrides[key] = coerce_value(key, value, defaults[key], line=number)
    return overrides


def load_config(path=None, environ=None):
    """Defaults, then the file at ``path``, then the environment."""
    config = dict(settings.VIL_COSIM)
    if path:
        overrides = read_config_file(path, config)
        config.update(overrides)
        logger.info("loaded %d override(s) from %s", len(overrides), path)
    environ = os.environ if environ is None else environ
    for key, default in settings.VIL_COSIM.items():
        name = env_name(key)
        if name in environ:
            config[key] = coerce_value(key, environ[name], default)
            logger.debug("%s set from %s", key, name)
    return config
