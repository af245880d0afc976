import logging
import time
from collections import deque
from dataclasses import dataclass

from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClockSync:
    """Estimated server-minus-client offset and the exchange round trip."""
    offset: float = 0.0
    round_trip: float = 0.0
    last_update: float = 0.0


def ntp_update(t0, t1, t2, t3):
    """
    Offset and round trip from one client/server exchange.

    t0: client transmit, t1: server receive, t2: server transmit,
    t3: client receive. Client stamps use the client clock, server stamps
    the server clock.
    """
    round_trip = (t3 - t0) - (t2 - t1)
    if round_trip < 0:
        raise ValidationError({
            'round_trip': _('Exchange has a negative round trip of %(rt)s s.') % {'rt': round_trip}
        })
    offset = ((t1 - t0) - (t3 - t2)) / 2.0
    return ClockSync(offset=offset, round_trip=round_trip, last_update=t3)


class ClockFilter:
    """
    Keeps the last ``window`` exchanges and reports the one with the
    smallest round trip, whose offset has the tightest asymmetry bound.
    """

    def __init__(self, window=8, clock=time.time):
        self.samples = deque(maxlen=window)
        self.clock = clock

    def add(self, t0, t1, t2, t3):
        try:
            sample = ntp_update(t0, t1, t2, t3)
        except ValidationError:
            logger.warning("discarding clock exchange with negative round trip")
            return self.best
        self.samples.append(sample)
        return self.best

    @property
    def best(self):
        if not self.samples:
            return None
        return min(self.samples, key=lambda sample: sample.round_trip)

    @property
    def offset(self):
        best = self.best
        return best.offset if best else 0.0

    def now(self):
        """Local clock corrected onto the server's time base."""
        return self.clock() + self.offset
