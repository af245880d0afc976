import math

from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .geometry import (
    TURN,
    VehicleState,
    advance,
    build_track,
    center_gap,
    decel_distance,
    default_track,
    envelope_limit,
    gap_ahead,
)


class DefaultTrackTests(SimpleTestCase):

    def setUp(self):
        self.track = default_track()

    def test_circuit_length(self):
        """Test the circuit is two straights plus two semicircles"""
        self.assertAlmostEqual(self.track.circuit_length, 3100 + math.pi * 95, places=9)
        self.assertAlmostEqual(self.track.circuit_length, 3398.45, places=2)

    def test_zone_layout(self):
        """Test four zones alternating straight and U-turn limits"""
        limits = [zone.v_limit for zone in self.track.zones]
        self.assertEqual(limits, [22.3, 7.0, 22.3, 7.0])
        self.assertEqual(self.track.zones[1].kind, TURN)
        total = sum(zone.length for zone in self.track.zones)
        self.assertAlmostEqual(total, self.track.circuit_length, places=9)

    def test_zone_lookup_is_unique(self):
        """Test every position falls in exactly one zone"""
        for s in [0.0, 1549.999, 1550.0, 1700.0, 3000.0, self.track.circuit_length - 1e-9]:
            matches = [zone for zone in self.track.zones if zone.contains(s)]
            self.assertEqual(len(matches), 1, msg=f"s={s}")
            self.assertIs(self.track.zone_at(s), matches[0])

    def test_comfortable_decel(self):
        self.assertEqual(self.track.a_c, -2.0)

    def test_from_config(self):
        """Test a track built from flat config keys"""
        config = {
            'straight_length': 100.0, 'turn_diameter': 20.0, 'v_straight': 15.0,
            'v_turn': 5.0, 'a_c': -1.5, 'vehicle_length': 4.0,
        }
        track = type(self.track).from_config(config)
        self.assertAlmostEqual(track.circuit_length, 200 + math.pi * 20)
        self.assertEqual(track.vehicle_length, 4.0)
        self.assertEqual(track.a_c, -1.5)

    def test_rejects_non_negative_decel(self):
        with self.assertRaises(ValidationError):
            build_track(a_c=0.0)


class GapTests(SimpleTestCase):

    def setUp(self):
        self.track = default_track(vehicle_length=0.0)

    def test_simple_gap(self):
        follower = VehicleState(s=10.0)
        leader = VehicleState(s=40.0)
        self.assertAlmostEqual(gap_ahead(follower, leader, self.track), 30.0)

    def test_gap_wraps_around_ring(self):
        """Test the gap across the start line uses modular arithmetic"""
        follower = VehicleState(s=3390.0)
        leader = VehicleState(s=5.0)
        expected = self.track.circuit_length - 3390.0 + 5.0
        self.assertAlmostEqual(gap_ahead(follower, leader, self.track), expected)
        self.assertAlmostEqual(expected, 13.45, places=2)

    def test_coincident_vehicles(self):
        state = VehicleState(s=250.0)
        self.assertEqual(gap_ahead(state, state, self.track), 0.0)

    def test_bumper_gap_subtracts_length(self):
        """Test the bumper gap removes the vehicle length from the centre gap"""
        track = default_track()
        follower = VehicleState(s=10.0)
        leader = VehicleState(s=40.0)
        self.assertAlmostEqual(center_gap(follower, leader, track), 30.0)
        self.assertAlmostEqual(gap_ahead(follower, leader, track), 25.0)

    def test_gap_bounds(self):
        """Test gaps stay within [0, circuit_length) for sampled pairs"""
        length = self.track.circuit_length
        for s1 in [0.0, 17.3, 1600.2, 3398.0]:
            for s2 in [0.0, 5.5, 1549.9, 3397.1]:
                gap = gap_ahead(VehicleState(s=s1), VehicleState(s=s2), self.track)
                self.assertGreaterEqual(gap, 0.0)
                self.assertLess(gap, length)


class DecelDistanceTests(SimpleTestCase):

    def test_straight_to_turn(self):
        self.assertAlmostEqual(decel_distance(22.3, 7.0, -2.0), 112.0725, places=4)

    def test_equal_speeds(self):
        self.assertEqual(decel_distance(9.0, 9.0, -2.0), 0.0)

    def test_to_standstill(self):
        self.assertAlmostEqual(decel_distance(10.0, 0.0, -2.0), 25.0)

    def test_rejects_positive_decel(self):
        """Test a non-negative deceleration is rejected"""
        with self.assertRaises(ValidationError):
            decel_distance(22.3, 7.0, 0.0)
        with self.assertRaises(ValidationError):
            decel_distance(22.3, 7.0, 1.0)


class AdvanceTests(SimpleTestCase):

    def setUp(self):
        self.track = default_track()

    def test_full_lap(self):
        """Test advancing one circuit length keeps s and counts one lap"""
        state = VehicleState(s=123.4, lap=2)
        moved = advance(state, self.track.circuit_length, self.track)
        self.assertAlmostEqual(moved.s, 123.4, places=9)
        self.assertEqual(moved.lap, 3)

    def test_crossing_start_line(self):
        state = VehicleState(s=self.track.circuit_length - 1.0)
        moved = advance(state, 3.0, self.track)
        self.assertAlmostEqual(moved.s, 2.0, places=9)
        self.assertEqual(moved.lap, 1)

    def test_heading_follows_turn(self):
        """Test advancing into the first U-turn turns the heading by s/R"""
        state = VehicleState(s=1540.0, heading=0.0)
        moved = advance(state, 10.0 + math.pi * 47.5 / 4, self.track)
        self.assertAlmostEqual(moved.heading, math.pi / 4)
        moved = advance(moved, self.track.circuit_length - moved.s + 5.0, self.track)
        self.assertEqual(moved.heading, 0.0)
        self.assertEqual(moved.lap, 1)

    def test_odometer(self):
        state = VehicleState(s=10.0, lap=2)
        self.assertAlmostEqual(state.odometer(self.track), 10.0 + 2 * self.track.circuit_length)


class PlanarGeometryTests(SimpleTestCase):

    def setUp(self):
        self.track = default_track()

    def test_key_points(self):
        """Test the straights and turn apexes land where the layout puts them"""
        x, y, heading = self.track.position_xy(0.0)
        self.assertEqual((x, y, heading), (0.0, 0.0, 0.0))
        x, y, heading = self.track.position_xy(1550.0 + math.pi * 47.5 / 2)
        self.assertAlmostEqual(x, 1550.0 + 47.5)
        self.assertAlmostEqual(y, 47.5)
        self.assertAlmostEqual(heading, math.pi / 2)
        x, y, heading = self.track.position_xy(1550.0 + math.pi * 47.5 + 10.0)
        self.assertAlmostEqual(x, 1540.0)
        self.assertAlmostEqual(y, 95.0)
        self.assertAlmostEqual(heading, math.pi)

    def test_heading_matches_position(self):
        for s in [0.0, 1549.9, 1600.0, 1700.0, 2500.0, 3260.0, 3300.0, 3394.0]:
            self.assertEqual(self.track.heading_at(s), self.track.position_xy(s)[2], msg=s)
        self.assertAlmostEqual(self.track.heading_at(3100.0 + 1.5 * math.pi * 47.5), 1.5 * math.pi)

    def test_project_inverts_position(self):
        """Test projection recovers arc length on every segment"""
        for s in [0.0, 800.0, 1600.0, 1690.0, 2000.0, 3200.0, 3390.0]:
            x, y, _ = self.track.position_xy(s)
            self.assertAlmostEqual(self.track.project(x, y), s, places=6)

    def test_project_off_centreline(self):
        self.assertAlmostEqual(self.track.project(300.0, 1.5), 300.0, places=9)


class EnvelopeTests(SimpleTestCase):

    def setUp(self):
        self.track = default_track()

    def test_next_drop_before_turn(self):
        drop = self.track.next_drop(1500.0)
        self.assertAlmostEqual(drop.distance, 50.0)
        self.assertEqual((drop.v_hi, drop.v_lo), (22.3, 7.0))

    def test_envelope_far_from_turn(self):
        self.assertEqual(envelope_limit(self.track, 100.0, 0.0), 22.3)

    def test_envelope_at_decel_start(self):
        """Test the envelope equals the straight limit exactly one braking distance out"""
        start = 1550.0 - decel_distance(22.3, 7.0, -2.0)
        self.assertAlmostEqual(envelope_limit(self.track, start, 0.0), 22.3, places=9)
        self.assertAlmostEqual(envelope_limit(self.track, start, 50.0),
                               math.sqrt(22.3 ** 2 - 4.0 * 50.0), places=9)

    def test_envelope_inside_turn(self):
        self.assertEqual(envelope_limit(self.track, 1560.0, 20.0), 7.0)
