"""
Datagram transport between the server and vehicle clients.

One message per datagram, no retransmission. ``UdpEndpoint`` runs a
receiver thread that decodes frames into a single-consumer queue;
``LoopbackChannel`` offers the same interface in memory for deterministic
in-process runs. Receivers keep the latest state per sender themselves.
"""
import logging
import queue
import socket
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Any, Tuple

from .codec import decode, encode
from .exceptions import FrameError

logger = logging.getLogger(__name__)

MAX_DATAGRAM = 65507
RELEASE_EPSILON = 1e-9


def extrapolate(s, v, dt):
    """Position estimate half a reporting interval ahead."""
    return s + v * dt / 2.0


@dataclass(frozen=True)
class Envelope:
    message: Any
    address: Tuple
    received_at: float


class DelayLine:
    """FIFO that releases each item no earlier than its send time plus delay."""

    def __init__(self):
        self._items = deque()
        self._last_release = float('-inf')

    def __len__(self):
        return len(self._items)

    def push(self, item, now, delay):
        if delay < 0:
            raise ValueError('delay cannot be negative')
        release = max(now + delay, self._last_release)
        self._last_release = release
        self._items.append((release, item))

    def pop_ready(self, now):
        ready = []
        while self._items and self._items[0][0] <= now + RELEASE_EPSILON:
            ready.append(self._items.popleft()[1])
        return ready


def delayed_send(line, message, now, delay):
    """Schedule ``message`` on ``line`` for release at now + delay."""
    line.push(message, now, delay)


class LoopbackChannel:
    """In-memory datagram network keyed by address."""

    def __init__(self, clock=time.time):
        self.clock = clock
        self._queues = {}

    def endpoint(self, address):
        endpoint = LoopbackEndpoint(self, address)
        self._queues[address] = deque()
        return endpoint

    def deliver(self, data, source, destination):
        inbox = self._queues.get(destination)
        if inbox is None:
            logger.debug("loopback frame to unknown address %s dropped", destination)
            return
        inbox.append((bytes(data), source, self.clock()))

    def drain(self, address):
        inbox = self._queues[address]
        items = list(inbox)
        inbox.clear()
        return items


class LoopbackEndpoint:

    def __init__(self, channel, address):
        self.channel = channel
        self.address = address

    def send(self, message, address):
        self.channel.deliver(encode(message), self.address, address)

    def poll(self, timeout=None):
        return _decode_all(self.channel.drain(self.address))

    def close(self):
        pass


class UdpEndpoint:
    """
    UDP socket with a background receiver. ``poll`` drains everything
    received since the last call, in arrival order.
    """

    def __init__(self, host='127.0.0.1', port=0, clock=time.time, queue_size=4096, timeout=0.2):
        self.clock = clock
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self.sock.bind((host, port))
        self.sock.settimeout(timeout)
        self._inbox = queue.Queue(maxsize=queue_size)
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._receive_loop, name=f'udp-{self.address[1]}',
                                        daemon=True)
        self._thread.start()
        logger.info("UDP endpoint listening on %s:%s", *self.address)

    @property
    def address(self):
        return self.sock.getsockname()

    def _receive_loop(self):
        while not self._stop.is_set():
            try:
                data, source = self.sock.recvfrom(MAX_DATAGRAM)
            except socket.timeout:
                continue
            except OSError:
                break
            try:
                self._inbox.put_nowait((data, source, self.clock()))
            except queue.Full:
                logger.warning("receive queue full; dropping frame from %s", source)

    def send(self, message, address):
        try:
            self.sock.sendto(encode(message), address)
        except OSError as exc:
            logger.warning("send to %s failed: %s", address, exc)

    def poll(self, timeout=None):
        items = []
        if timeout:
            try:
                items.append(self._inbox.get(timeout=timeout))
            except queue.Empty:
                return []
        while True:
            try:
                items.append(self._inbox.get_nowait())
            except queue.Empty:
                break
        return _decode_all(items)

    def close(self):
        self._stop.set()
        self._thread.join(timeout=1.0)
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _decode_all(items):
    envelopes = []
    for data, source, received_at in items:
        try:
            envelopes.append(Envelope(decode(data), source, received_at))
        except FrameError as exc:
            logger.warning("dropping malformed frame from %s: %s", source, exc.messages[0])
    return envelopes
