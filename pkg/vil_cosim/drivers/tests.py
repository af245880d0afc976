import numpy as np
from django.test import SimpleTestCase

from track.geometry import VehicleState, default_track

from .controllers import IdmDriver, WiedemannDriver
from .exceptions import CollisionError
from .idm import equilibrium_gap, idm_accel
from .params import IdmParams, Wie99Params
from .speed_limit import apply_speed_limit
from .wiedemann import FollowingState, thresholds, wie99_accel


class IdmAccelTests(SimpleTestCase):

    def setUp(self):
        self.params = IdmParams()

    def test_standstill_equilibrium(self):
        """Test zero command at rest with the gap equal to s0"""
        self.assertAlmostEqual(idm_accel(0.0, 0.0, 10.0, self.params), 0.0)

    def test_free_flow_equilibrium(self):
        self.assertAlmostEqual(idm_accel(22.3, 0.0, 1e9, self.params), 0.0, places=6)

    def test_hand_evaluated_point(self):
        """Test v=10, equal speeds, 30 m gap against a hand evaluation"""
        a = idm_accel(10.0, 0.0, 30.0, self.params)
        self.assertAlmostEqual(a, 0.435, places=3)

    def test_monotone_in_gap_and_capped(self):
        """Test the command never decreases with the gap and never exceeds a0"""
        gaps = np.linspace(0.5, 500.0, 400)
        for v, dv in [(0.0, 0.0), (10.0, 2.0), (20.0, -3.0)]:
            commands = [idm_accel(v, dv, gap, self.params) for gap in gaps]
            self.assertTrue(all(b >= a - 1e-12 for a, b in zip(commands, commands[1:])))
            self.assertTrue(all(c <= self.params.a0 for c in commands))

    def test_braking_floor(self):
        a = idm_accel(20.0, 15.0, 0.2, self.params)
        self.assertEqual(a, -3.0 * self.params.b0)

    def test_collision_rejected(self):
        """Test a non-positive gap raises a collision error"""
        with self.assertRaises(CollisionError):
            idm_accel(5.0, 0.0, 0.0, self.params)
        with self.assertRaises(CollisionError):
            idm_accel(5.0, 0.0, -1.0, self.params)

    def test_equilibrium_gap_zeroes_command(self):
        gap = equilibrium_gap(12.0, self.params)
        self.assertAlmostEqual(idm_accel(12.0, 0.0, gap, self.params), 0.0, places=9)

    def test_steady_following_converges(self):
        """Test a follower behind a steady leader settles at the equilibrium gap"""
        dt = 0.05
        v_lead = 10.0
        gap, v = 60.0, 5.0
        for _ in range(int(600 / dt)):
            a = idm_accel(v, v - v_lead, gap, self.params)
            v = max(v + a * dt, 0.0)
            gap += (v_lead - v) * dt
        expected = equilibrium_gap(v_lead, self.params)
        self.assertLess(abs(gap - expected) / expected, 0.01)


class Wie99Tests(SimpleTestCase):

    def setUp(self):
        self.params = Wie99Params()

    def test_desired_following_distance(self):
        """Test sdxc equals CC0 + CC1 v when the leader is not slower"""
        th = thresholds(10.0, 10.0, 0.0, 20.0, self.params)
        self.assertAlmostEqual(th.sdxc, 16.5)
        self.assertAlmostEqual(th.sdxo, 24.5)

    def test_following_band_oscillation(self):
        """Test keep-distance regime at the desired distance with equal speeds"""
        ego = VehicleState(s=0.0, v=10.0, a=0.0)
        pv = VehicleState(s=25.0, v=10.0, a=0.0)
        a, state = wie99_accel(ego, pv, 20.0, self.params, FollowingState.KEEP_SPEED, 22.3)
        self.assertEqual(state, FollowingState.KEEP_DISTANCE)
        self.assertLessEqual(abs(a), self.params.cc7)
        self.assertAlmostEqual(a, -0.25)

    def test_following_keeps_positive_oscillation(self):
        ego = VehicleState(v=10.0)
        pv = VehicleState(v=10.0)
        a, state = wie99_accel(ego, pv, 20.0, self.params, FollowingState.KEEP_DISTANCE,
                               22.3, a_prev=0.25)
        self.assertEqual(state, FollowingState.KEEP_DISTANCE)
        self.assertAlmostEqual(a, 0.25)

    def test_free_driving_from_rest(self):
        """Test free driving from standstill is bounded by CC8"""
        ego = VehicleState(v=0.0)
        pv = VehicleState(v=20.0)
        a, state = wie99_accel(ego, pv, 500.0, self.params, FollowingState.KEEP_SPEED, 22.3)
        self.assertEqual(state, FollowingState.KEEP_SPEED)
        self.assertLessEqual(a, self.params.cc8)
        self.assertAlmostEqual(a, 3.5)

    def test_free_driving_tracks_desired_speed(self):
        ego = VehicleState(v=22.0)
        pv = VehicleState(v=22.3)
        a, _ = wie99_accel(ego, pv, 1000.0, self.params, FollowingState.KEEP_SPEED, 22.3)
        self.assertAlmostEqual(a, 0.3)

    def test_closing_in(self):
        """Test approaching a slower leader from beyond the band decelerates"""
        ego = VehicleState(v=20.0)
        pv = VehicleState(v=10.0)
        a, state = wie99_accel(ego, pv, 40.0, self.params, FollowingState.KEEP_SPEED, 22.3)
        self.assertEqual(state, FollowingState.DECREASE_DISTANCE)
        self.assertLess(a, 0.0)

    def test_too_close(self):
        ego = VehicleState(v=10.0)
        pv = VehicleState(v=8.0)
        a, state = wie99_accel(ego, pv, 5.0, self.params, FollowingState.KEEP_DISTANCE, 22.3)
        self.assertEqual(state, FollowingState.INCREASE_DISTANCE)
        self.assertLessEqual(a, -self.params.cc7)

    def test_accel_bound_interpolation(self):
        self.assertAlmostEqual(self.params.accel_bound(0.0), 3.5)
        self.assertAlmostEqual(self.params.accel_bound(80 / 3.6), 1.5)
        self.assertAlmostEqual(self.params.accel_bound(40 / 3.6), 2.5)
        self.assertAlmostEqual(self.params.accel_bound(30.0), 1.5)

    def test_command_never_exceeds_bound(self):
        """Test sampled decisions stay under the speed-dependent bound"""
        rng = np.random.default_rng(3)
        for _ in range(500):
            v = rng.uniform(0.0, 25.0)
            ego = VehicleState(v=v)
            pv = VehicleState(v=rng.uniform(0.0, 25.0), a=rng.uniform(-3.0, 2.0))
            gap = rng.uniform(0.5, 200.0)
            state = FollowingState(rng.choice(['A', 'B', 'f', 'w']))
            a, _ = wie99_accel(ego, pv, gap, self.params, state, 22.3,
                               a_prev=rng.uniform(-1.0, 1.0))
            self.assertLessEqual(a, self.params.accel_bound(v) + 1e-12)

    def test_deterministic_for_fixed_driver(self):
        ego = VehicleState(v=15.0)
        pv = VehicleState(v=12.0, a=-0.5)
        first = wie99_accel(ego, pv, 30.0, self.params, FollowingState.KEEP_SPEED, 22.3)
        second = wie99_accel(ego, pv, 30.0, self.params, FollowingState.KEEP_SPEED, 22.3)
        self.assertEqual(first, second)

    def test_collision_rejected(self):
        with self.assertRaises(CollisionError):
            wie99_accel(VehicleState(v=5.0), VehicleState(v=5.0), 0.0, self.params,
                        FollowingState.KEEP_SPEED, 22.3)

    def test_state_descriptions(self):
        self.assertEqual(FollowingState('A').description, 'increase distance')
        self.assertEqual(FollowingState('w').description, 'keep speed')


class SpeedLimitTests(SimpleTestCase):

    def setUp(self):
        self.track = default_track()

    def test_far_from_turn(self):
        ego = VehicleState(s=200.0, v=22.3)
        self.assertEqual(apply_speed_limit(1.0, ego, self.track), 1.0)

    def test_inside_braking_distance(self):
        """Test 50 m before the U-turn at the straight limit forces a_c"""
        ego = VehicleState(s=1500.0, v=22.3)
        self.assertEqual(apply_speed_limit(0.5, ego, self.track), -2.0)
        self.assertEqual(apply_speed_limit(0.5, ego, self.track, lead_time=0.275), -2.0)

    def test_inside_turn_at_limit(self):
        ego = VehicleState(s=1600.0, v=7.0)
        self.assertEqual(apply_speed_limit(-0.3, ego, self.track), -0.3)

    def test_inside_turn_over_limit(self):
        ego = VehicleState(s=1600.0, v=7.4)
        self.assertEqual(apply_speed_limit(0.2, ego, self.track), -2.0)

    def test_slow_vehicle_near_turn(self):
        """Test a vehicle already under the envelope is left alone"""
        ego = VehicleState(s=1500.0, v=6.0)
        self.assertEqual(apply_speed_limit(0.4, ego, self.track), 0.4)

    def test_never_increases_command(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            ego = VehicleState(s=rng.uniform(0.0, self.track.circuit_length),
                               v=rng.uniform(0.0, 25.0))
            u = rng.uniform(-5.0, 3.0)
            self.assertLessEqual(apply_speed_limit(u, ego, self.track, 0.275), u)


class DriverTests(SimpleTestCase):

    def setUp(self):
        self.track = default_track()

    def test_wiedemann_driver_tracks_regime(self):
        driver = WiedemannDriver(Wie99Params(), self.track)
        ego = VehicleState(s=100.0, v=10.0)
        pv = VehicleState(s=125.0, v=10.0)
        u = driver.command(ego, pv, 20.0)
        self.assertEqual(driver.state, FollowingState.KEEP_DISTANCE)
        self.assertAlmostEqual(u, -0.25)
        self.assertEqual(driver.last_command, u)

    def test_idm_driver_uses_zone_limit(self):
        """Test the IDM desired speed drops to the turn limit inside a U-turn"""
        driver = IdmDriver(IdmParams(), self.track)
        ego = VehicleState(s=1600.0, v=7.0)
        pv = VehicleState(s=2000.0, v=7.0)
        self.assertLess(driver.command(ego, pv, 395.0), 0.01)
