from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _


class FrameError(ValidationError):
    """A datagram that is not a valid frame."""


class UnknownPreamble(FrameError):

    def __init__(self, preamble):
        self.preamble = preamble
        super().__init__(_('Unknown preamble byte 0x%(byte)02X.') % {'byte': preamble},
                         code='unknown_preamble')


class TruncatedFrame(FrameError):

    def __init__(self, needed, got):
        self.needed = needed
        self.got = got
        super().__init__(_('Frame truncated: needed %(needed)s bytes, got %(got)s.') % {
            'needed': needed, 'got': got}, code='truncated')


class LengthMismatch(FrameError):

    def __init__(self, expected, got):
        self.expected = expected
        self.got = got
        super().__init__(_('Frame length %(got)s does not match the %(expected)s bytes its '
                           'counts imply.') % {'expected': expected, 'got': got},
                         code='length_mismatch')


class FieldOutOfRange(FrameError):

    def __init__(self, field, value):
        self.field = field
        self.value = value
        super().__init__({field: _('Value %(value)s does not fit the wire field.') % {
            'value': value}}, code='out_of_range')
