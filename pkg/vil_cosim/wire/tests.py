import struct
import time

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .clock import ClockFilter, ntp_update
from .codec import decode, encode, frame_size
from .exceptions import FieldOutOfRange, FrameError, LengthMismatch, TruncatedFrame, UnknownPreamble
from .messages import (
    SIM2V,
    STATUS_OK,
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
from .transport import DelayLine, LoopbackChannel, UdpEndpoint, delayed_send, extrapolate

ROUND_TRIPS = 10000


def random_probe(rng):
    return ProbeData(v=float(rng.uniform(0, 40)), x=float(rng.normal(0, 1e3)), y=float(rng.normal(0, 1e3)),
                     heading=float(rng.uniform(-np.pi, np.pi)), brake_on=int(rng.integers(0, 2)),
                     timestamp=float(rng.uniform(1.6e9, 1.8e9)))


def random_message(rng, kind):
    vehicle_id = int(rng.integers(0, 2 ** 32))
    error = int(rng.integers(0, 2))
    if kind == SUBSCRIPTION:
        return Subscription(vehicle_id=vehicle_id, probe=random_probe(rng),
                            sim_physical_flag=int(rng.integers(0, 2)), sub_flag=int(rng.integers(0, 2)),
                            error=error)
    if kind == V2SIM:
        return V2Sim(vehicle_id=vehicle_id, probe=random_probe(rng), error=error)
    if kind == SIM2V:
        vehicles = tuple(
            SimulatedVehicle(vehicle_id=int(rng.integers(0, 2 ** 32)),
                             vehicle_type=VehicleType(int(rng.integers(0, 2))),
                             v=float(rng.uniform(0, 30)), dx=float(rng.normal(0, 500)),
                             dy=float(rng.normal(0, 2)), heading=float(rng.uniform(-np.pi, np.pi)),
                             brake_on=int(rng.integers(0, 2)), timestamp=float(rng.uniform(0, 1e4)))
            for _ in range(int(rng.integers(0, 8)))
        )
        return Sim2V(vehicles=vehicles, error=error)
    if kind == V2V:
        n = int(rng.integers(0, 25))
        return V2VPlan(vehicle_id=vehicle_id, timestamp=float(rng.uniform(0, 1e4)),
                       s=rng.uniform(0, 1e5, n).tolist(), l=rng.normal(0, 1, n).tolist(),
                       v_final=float(rng.uniform(0, 30)), error=error)
    return TimeSync(t0=float(rng.uniform(0, 1e9)), t1=float(rng.uniform(0, 1e9)),
                    t2=float(rng.uniform(0, 1e9)), error=error)


class CodecTests(SimpleTestCase):

    def test_round_trip_every_variant(self):
        """Test decode inverts encode, and encode inverts decode, on random frames"""
        rng = np.random.default_rng(2024)
        for kind in (SUBSCRIPTION, V2SIM, SIM2V, V2V, TIME_SYNC):
            for _ in range(ROUND_TRIPS):
                message = random_message(rng, kind)
                frame = encode(message)
                decoded = decode(frame)
                self.assertEqual(decoded, message)
                self.assertEqual(encode(decoded), frame)

    def test_v2v_frame_size(self):
        plan = V2VPlan(vehicle_id=7, timestamp=12.5, s=[float(i) for i in range(17)], v_final=20.0)
        frame = encode(plan)
        self.assertEqual(len(frame), 296)
        self.assertEqual(frame_size(V2V, 17), 296)
        self.assertEqual(decode(frame).l, (0.0,) * 17)

    def test_preamble_bytes(self):
        """Test each variant leads with its assigned preamble"""
        self.assertEqual(encode(Subscription(vehicle_id=1, sub_flag=1))[0], 0x16)
        self.assertEqual(encode(V2Sim(vehicle_id=1))[0], 0x43)
        self.assertEqual(encode(Sim2V())[0], 0xEC)
        self.assertEqual(encode(V2VPlan(vehicle_id=1, timestamp=0.0))[0], 0x6B)
        self.assertEqual(encode(TimeSync(t0=1.0))[0], 0x54)

    def test_sizes_depend_only_on_counts(self):
        rng = np.random.default_rng(5)
        for kind in (SUBSCRIPTION, V2SIM, SIM2V, V2V, TIME_SYNC):
            for _ in range(50):
                message = random_message(rng, kind)
                count = message.count if kind == SIM2V else message.n if kind == V2V else 0
                self.assertEqual(len(encode(message)), frame_size(kind, count))

    def test_little_endian_layout(self):
        frame = encode(V2Sim(vehicle_id=0x01020304, probe=ProbeData(v=1.0)))
        self.assertEqual(frame[1:5], bytes([4, 3, 2, 1]))
        self.assertEqual(frame[5:13], struct.pack('<d', 1.0))

    def test_sim2v_detected_by_preamble(self):
        message = decode(encode(Sim2V(vehicles=[SimulatedVehicle(vehicle_id=3, vehicle_type=VehicleType.CAV)])))
        self.assertIsInstance(message, Sim2V)
        self.assertEqual(message.vehicle(3).vehicle_type, VehicleType.CAV)
        self.assertIsNone(message.vehicle(4))

    def test_ok_status(self):
        message = decode(encode(V2Sim(vehicle_id=9, error=STATUS_OK)))
        self.assertEqual(message.error, 1)

    def test_empty_buffer(self):
        with self.assertRaises(TruncatedFrame):
            decode(b'')

    def test_unknown_preamble(self):
        with self.assertRaises(UnknownPreamble) as ctx:
            decode(b'\x99' + bytes(10))
        self.assertEqual(ctx.exception.preamble, 0x99)

    def test_truncated_and_overlong(self):
        """Test short frames and frames with trailing bytes raise distinct errors"""
        frame = encode(V2VPlan(vehicle_id=1, timestamp=0.0, s=[1.0, 2.0], v_final=3.0))
        with self.assertRaises(TruncatedFrame):
            decode(frame[:-1])
        with self.assertRaises(TruncatedFrame):
            decode(frame[:5])
        with self.assertRaises(LengthMismatch):
            decode(frame + b'\x00')
        sim2v = encode(Sim2V(vehicles=[SimulatedVehicle(vehicle_id=1)]))
        with self.assertRaises(TruncatedFrame):
            decode(sim2v[:20])
        with self.assertRaises(LengthMismatch):
            decode(sim2v + bytes(3))

    def test_errors_are_frame_errors(self):
        for exc in (TruncatedFrame, UnknownPreamble, LengthMismatch, FieldOutOfRange):
            self.assertTrue(issubclass(exc, FrameError))
            self.assertTrue(issubclass(exc, ValidationError))

    def test_out_of_range_fields(self):
        with self.assertRaises(FieldOutOfRange):
            encode(V2Sim(vehicle_id=2 ** 32))
        with self.assertRaises(FieldOutOfRange):
            encode(V2Sim(vehicle_id=1, probe=ProbeData(v=-1.0)))
        with self.assertRaises(FieldOutOfRange):
            encode(V2Sim(vehicle_id=1, probe=ProbeData(brake_on=2)))
        with self.assertRaises(FieldOutOfRange):
            encode(V2VPlan(vehicle_id=1, timestamp=0.0, s=[1.0, 2.0], l=[0.0]))
        bad_flag = bytearray(encode(V2Sim(vehicle_id=1)))
        bad_flag[-1] = 7
        with self.assertRaises(FieldOutOfRange):
            decode(bytes(bad_flag))

    def test_negative_speed_rejected_on_decode(self):
        """Test frames carrying a negative speed fail to decode"""
        frame = bytearray(encode(V2Sim(vehicle_id=1, probe=ProbeData(v=2.0))))
        frame[5:13] = struct.pack('<d', -2.0)
        with self.assertRaises(FieldOutOfRange) as ctx:
            decode(bytes(frame))
        self.assertEqual(ctx.exception.field, 'v')
        subscription = bytearray(encode(Subscription(vehicle_id=1, sub_flag=1)))
        subscription[7:15] = struct.pack('<d', float('nan'))
        with self.assertRaises(FieldOutOfRange):
            decode(bytes(subscription))
        sim2v = bytearray(encode(Sim2V(vehicles=[SimulatedVehicle(vehicle_id=4, v=3.0)])))
        sim2v[8:16] = struct.pack('<d', -0.5)
        with self.assertRaises(FieldOutOfRange):
            decode(bytes(sim2v))


class ClockTests(SimpleTestCase):

    def test_hand_example(self):
        """Test a 5 ms offset with 3 ms one-way delays"""
        sync = ntp_update(1.000, 1.008, 1.009, 1.007)
        self.assertAlmostEqual(sync.offset, 0.005, places=12)
        self.assertAlmostEqual(sync.round_trip, 0.006, places=12)

    def test_identical_stamps(self):
        sync = ntp_update(5.0, 5.0, 5.0, 5.0)
        self.assertEqual((sync.offset, sync.round_trip), (0.0, 0.0))

    def test_negative_round_trip_rejected(self):
        with self.assertRaises(ValidationError):
            ntp_update(1.0, 1.0, 1.5, 1.1)

    def test_random_exchanges(self):
        """Test exact recovery with symmetric delays and the half-asymmetry bound otherwise"""
        rng = np.random.default_rng(17)
        for _ in range(1000):
            theta = rng.uniform(-5.0, 5.0)
            t0 = rng.uniform(0, 1e4)
            d = rng.uniform(0, 0.05)
            hold = rng.uniform(0, 0.01)
            t1 = t0 + theta + d
            t2 = t1 + hold
            sync = ntp_update(t0, t1, t2, t0 + 2 * d + hold)
            self.assertAlmostEqual(sync.offset, theta, places=9)

            d_out, d_back = rng.uniform(0, 0.05, 2)
            t1 = t0 + theta + d_out
            t2 = t1 + hold
            sync = ntp_update(t0, t1, t2, t0 + d_out + hold + d_back)
            self.assertLessEqual(abs(sync.offset - theta), abs(d_out - d_back) / 2 + 1e-9)

    def test_filter_prefers_smallest_round_trip(self):
        clock_filter = ClockFilter(window=3, clock=lambda: 100.0)
        clock_filter.add(0.0, 0.52, 0.52, 0.06)
        clock_filter.add(1.0, 1.501, 1.501, 1.002)
        clock_filter.add(2.0, 2.53, 2.53, 2.04)
        self.assertAlmostEqual(clock_filter.offset, 0.5, places=9)
        self.assertAlmostEqual(clock_filter.now(), 100.5, places=9)
        for t in (3.0, 4.0, 5.0):
            clock_filter.add(t, t + 0.6, t + 0.6, t + 0.02)
        self.assertAlmostEqual(clock_filter.offset, 0.59, places=9)

    def test_filter_ignores_bad_exchange(self):
        clock_filter = ClockFilter()
        with self.assertLogs('wire.clock', level='WARNING'):
            clock_filter.add(1.0, 1.0, 1.5, 1.1)
        self.assertIsNone(clock_filter.best)
        self.assertEqual(clock_filter.offset, 0.0)


class TransportTests(SimpleTestCase):

    def test_extrapolate(self):
        self.assertAlmostEqual(extrapolate(100.0, 10.0, 0.1), 100.5)
        self.assertEqual(extrapolate(100.0, 10.0, 0.0), 100.0)
        self.assertEqual(extrapolate(100.0, 0.0, 0.1), 100.0)

    def test_delay_line_release_time(self):
        """Test a delayed message is held until the delay has passed"""
        line = DelayLine()
        delayed_send(line, 'plan', now=1.0, delay=0.1)
        self.assertEqual(line.pop_ready(1.0), [])
        self.assertEqual(line.pop_ready(1.05), [])
        self.assertEqual(line.pop_ready(1.1), ['plan'])
        self.assertEqual(len(line), 0)

    def test_zero_delay_next_poll(self):
        line = DelayLine()
        delayed_send(line, 'a', now=2.0, delay=0.0)
        self.assertEqual(line.pop_ready(2.1), ['a'])

    def test_fifo_order(self):
        line = DelayLine()
        delayed_send(line, 'first', now=0.0, delay=0.1)
        delayed_send(line, 'second', now=0.01, delay=0.1)
        delayed_send(line, 'third', now=0.02, delay=0.0)
        self.assertEqual(line.pop_ready(0.2), ['first', 'second', 'third'])

    def test_loopback_delivery(self):
        channel = LoopbackChannel(clock=lambda: 42.0)
        server = channel.endpoint(('server', 0))
        client = channel.endpoint(('client', 1))
        client.send(V2Sim(vehicle_id=5), server.address)
        client.send(V2Sim(vehicle_id=6), server.address)
        envelopes = server.poll()
        self.assertEqual([e.message.vehicle_id for e in envelopes], [5, 6])
        self.assertEqual(envelopes[0].address, ('client', 1))
        self.assertEqual(envelopes[0].received_at, 42.0)
        self.assertEqual(server.poll(), [])

    def test_loopback_drops_malformed(self):
        channel = LoopbackChannel()
        server = channel.endpoint('server')
        channel.deliver(b'\x99\x00', 'x', 'server')
        with self.assertLogs('wire.transport', level='WARNING'):
            self.assertEqual(server.poll(), [])

    def test_udp_localhost(self):
        """Test frames cross a real localhost socket pair"""
        with UdpEndpoint(port=0) as server, UdpEndpoint(port=0) as client:
            plan = V2VPlan(vehicle_id=3, timestamp=time.time(), s=[1.0, 2.0, 3.0], v_final=4.0)
            client.send(plan, server.address)
            envelopes = server.poll(timeout=2.0)
            self.assertEqual(len(envelopes), 1)
            self.assertEqual(envelopes[0].message, plan)
            self.assertEqual(envelopes[0].address, client.address)
