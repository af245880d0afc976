"""
Fixed-layout binary codec.

Little-endian, IEEE-754 binary64 floats, unsigned integers, no padding.
Frame sizes (bytes, preamble included):

    Subscription    49
    V2Sim           47
    Sim2V           4 + 46 * count
    V2V             24 + 16 * n
    TimeSync        26
"""
import math
import numbers
import struct

from .exceptions import FieldOutOfRange, LengthMismatch, TruncatedFrame, UnknownPreamble
from .messages import (
    SIM2V,
    SUBSCRIPTION,
    TIME_SYNC,
    V2SIM,
    V2V,
    ProbeData,
    Sim2V,
    SimulatedVehicle,
    Subscription,
    TimeSync,
    V2Sim,
    V2VPlan,
    VehicleType,
)

PROBE = struct.Struct('<ddddBd')
SUBSCRIPTION_HEAD = struct.Struct('<BBIB')
V2SIM_HEAD = struct.Struct('<BI')
SIM2V_HEAD = struct.Struct('<BH')
SIM2V_ENTRY = struct.Struct('<IBddddBd')
V2V_HEAD = struct.Struct('<BIdH')
TIME_SYNC_FRAME = struct.Struct('<BdddB')
FLAG = struct.Struct('<B')
FLOAT = struct.Struct('<d')

U16_MAX = 0xFFFF
U32_MAX = 0xFFFFFFFF

SUBSCRIPTION_SIZE = SUBSCRIPTION_HEAD.size + PROBE.size + FLAG.size
V2SIM_SIZE = V2SIM_HEAD.size + PROBE.size + FLAG.size


def _check_int(name, value, upper):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or not 0 <= value <= upper:
        raise FieldOutOfRange(name, value)
    return int(value)


def _check_flag(name, value):
    return _check_int(name, int(value) if isinstance(value, bool) else value, 1)


def _check_speed(name, value):
    if math.isnan(value) or value < 0:
        raise FieldOutOfRange(name, value)
    return float(value)


def _pack_probe(probe):
    return PROBE.pack(_check_speed('v', probe.v), probe.x, probe.y, probe.heading,
                      _check_flag('brake_on', probe.brake_on), probe.timestamp)


def _unpack_probe(data, offset):
    v, x, y, heading, brake, timestamp = PROBE.unpack_from(data, offset)
    _check_flag('brake_on', brake)
    _check_speed('v', v)
    return ProbeData(v=v, x=x, y=y, heading=heading, brake_on=brake, timestamp=timestamp)


def _encode_subscription(m):
    head = SUBSCRIPTION_HEAD.pack(SUBSCRIPTION, _check_flag('sim_physical_flag', m.sim_physical_flag),
                                  _check_int('vehicle_id', m.vehicle_id, U32_MAX),
                                  _check_flag('sub_flag', m.sub_flag))
    return head + _pack_probe(m.probe) + FLAG.pack(_check_flag('error', m.error))


def _encode_v2sim(m):
    head = V2SIM_HEAD.pack(V2SIM, _check_int('vehicle_id', m.vehicle_id, U32_MAX))
    return head + _pack_probe(m.probe) + FLAG.pack(_check_flag('error', m.error))


def _encode_sim2v(m):
    _check_int('count', m.count, U16_MAX)
    parts = [SIM2V_HEAD.pack(SIM2V, m.count)]
    for entry in m.vehicles:
        parts.append(SIM2V_ENTRY.pack(
            _check_int('vehicle_id', entry.vehicle_id, U32_MAX),
            _check_int('vehicle_type', int(entry.vehicle_type), max(VehicleType)),
            _check_speed('v', entry.v), entry.dx, entry.dy, entry.heading,
            _check_flag('brake_on', entry.brake_on), entry.timestamp,
        ))
    parts.append(FLAG.pack(_check_flag('error', m.error)))
    return b''.join(parts)


def _encode_v2v(m):
    _check_int('n', m.n, U16_MAX)
    if len(m.l) != m.n:
        raise FieldOutOfRange('l', len(m.l))
    body = struct.pack(f'<{m.n}d{m.n}dd', *m.s, *m.l, m.v_final)
    head = V2V_HEAD.pack(V2V, _check_int('vehicle_id', m.vehicle_id, U32_MAX), m.timestamp, m.n)
    return head + body + FLAG.pack(_check_flag('error', m.error))


def _encode_time_sync(m):
    return TIME_SYNC_FRAME.pack(TIME_SYNC, m.t0, m.t1, m.t2, _check_flag('error', m.error))


ENCODERS = {
    Subscription: _encode_subscription,
    V2Sim: _encode_v2sim,
    Sim2V: _encode_sim2v,
    V2VPlan: _encode_v2v,
    TimeSync: _encode_time_sync,
}


def encode(message):
    """Serialize a message to its frame bytes."""
    try:
        encoder = ENCODERS[type(message)]
    except KeyError:
        raise TypeError(f'cannot encode {type(message).__name__}') from None
    return encoder(message)


def _expect_size(data, size):
    if len(data) < size:
        raise TruncatedFrame(size, len(data))
    if len(data) > size:
        raise LengthMismatch(size, len(data))


def _decode_subscription(data):
    _expect_size(data, SUBSCRIPTION_SIZE)
    _, physical, vehicle_id, sub = SUBSCRIPTION_HEAD.unpack_from(data, 0)
    probe = _unpack_probe(data, SUBSCRIPTION_HEAD.size)
    (error,) = FLAG.unpack_from(data, SUBSCRIPTION_SIZE - 1)
    return Subscription(vehicle_id=vehicle_id, probe=probe,
                        sim_physical_flag=_check_flag('sim_physical_flag', physical),
                        sub_flag=_check_flag('sub_flag', sub), error=_check_flag('error', error))


def _decode_v2sim(data):
    _expect_size(data, V2SIM_SIZE)
    _, vehicle_id = V2SIM_HEAD.unpack_from(data, 0)
    probe = _unpack_probe(data, V2SIM_HEAD.size)
    (error,) = FLAG.unpack_from(data, V2SIM_SIZE - 1)
    return V2Sim(vehicle_id=vehicle_id, probe=probe, error=_check_flag('error', error))


def _decode_sim2v(data):
    if len(data) < SIM2V_HEAD.size:
        raise TruncatedFrame(SIM2V_HEAD.size + FLAG.size, len(data))
    _, count = SIM2V_HEAD.unpack_from(data, 0)
    _expect_size(data, SIM2V_HEAD.size + count * SIM2V_ENTRY.size + FLAG.size)
    vehicles = []
    for offset in range(SIM2V_HEAD.size, SIM2V_HEAD.size + count * SIM2V_ENTRY.size, SIM2V_ENTRY.size):
        vehicle_id, kind, v, dx, dy, heading, brake, timestamp = SIM2V_ENTRY.unpack_from(data, offset)
        _check_int('vehicle_type', kind, max(VehicleType))
        _check_speed('v', v)
        vehicles.append(SimulatedVehicle(vehicle_id=vehicle_id, vehicle_type=VehicleType(kind), v=v,
                                         dx=dx, dy=dy, heading=heading,
                                         brake_on=_check_flag('brake_on', brake), timestamp=timestamp))
    (error,) = FLAG.unpack_from(data, len(data) - 1)
    return Sim2V(vehicles=tuple(vehicles), error=_check_flag('error', error))


def _decode_v2v(data):
    if len(data) < V2V_HEAD.size:
        raise TruncatedFrame(V2V_HEAD.size + FLOAT.size + FLAG.size, len(data))
    _, vehicle_id, timestamp, n = V2V_HEAD.unpack_from(data, 0)
    _expect_size(data, V2V_HEAD.size + 16 * n + FLOAT.size + FLAG.size)
    values = struct.unpack_from(f'<{n}d{n}dd', data, V2V_HEAD.size)
    (error,) = FLAG.unpack_from(data, len(data) - 1)
    return V2VPlan(vehicle_id=vehicle_id, timestamp=timestamp, s=values[:n], l=values[n:2 * n],
                   v_final=values[-1], error=_check_flag('error', error))


def _decode_time_sync(data):
    _expect_size(data, TIME_SYNC_FRAME.size)
    _, t0, t1, t2, error = TIME_SYNC_FRAME.unpack(data)
    return TimeSync(t0=t0, t1=t1, t2=t2, error=_check_flag('error', error))


DECODERS = {
    SUBSCRIPTION: _decode_subscription,
    V2SIM: _decode_v2sim,
    SIM2V: _decode_sim2v,
    V2V: _decode_v2v,
    TIME_SYNC: _decode_time_sync,
}


def decode(data):
    """Parse one frame; raises a FrameError subclass on malformed input."""
    data = bytes(data)
    if not data:
        raise TruncatedFrame(1, 0)
    try:
        decoder = DECODERS[data[0]]
    except KeyError:
        raise UnknownPreamble(data[0]) from None
    return decoder(data)


def frame_size(preamble, count=0):
    """Byte length of a frame of the given variant and count field."""
    sizes = {
        SUBSCRIPTION: SUBSCRIPTION_SIZE,
        V2SIM: V2SIM_SIZE,
        SIM2V: SIM2V_HEAD.size + count * SIM2V_ENTRY.size + FLAG.size,
        V2V: V2V_HEAD.size + 16 * count + FLOAT.size + FLAG.size,
        TIME_SYNC: TIME_SYNC_FRAME.size,
    }
    try:
        return sizes[preamble]
    except KeyError:
        raise UnknownPreamble(preamble) from None
