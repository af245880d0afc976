import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from qpsolver.admm import AdmmSolver
from track.geometry import VehicleState, build_track, decel_distance, default_track

from .controller import MpcController, mpc_step
from .model import discretize, prediction_matrices
from .ocp import COLLISION, SPEED, OcpBuilder, assemble_ocp
from .params import MpcParams
from .preview import (
    PvPlan,
    align_plan,
    alpha_schedule,
    buffer_profile,
    calibrate_sigma,
    position_bound,
    predict_pv,
    preview_from_prediction,
    resample_plan,
)
from .speed_limit import moving_speed_limit


def straight_track():
    return build_track(straight_length=100000.0)


class DiscretizeTests(SimpleTestCase):

    def test_lag_pole(self):
        """Test the acceleration row decays by exp(-dt/tau)"""
        model = discretize(0.275, 1.0)
        self.assertAlmostEqual(model.A_d[2, 2], math.exp(-1.0 / 0.275), places=10)
        self.assertAlmostEqual(model.A_d[2, 2], 0.02638, places=5)

    def test_integrator_row(self):
        for tau in (0.1, 0.275, 2.0):
            model = discretize(tau, 1.0)
            x = model.step(np.array([0.0, 5.0, 0.0]), 0.0)
            self.assertAlmostEqual(x[0], 5.0)
            self.assertAlmostEqual(x[1], 5.0)

    def test_unity_dc_gain(self):
        """Test a held input is eventually matched by the acceleration state"""
        model = discretize(0.275, 0.1)
        x = np.zeros(3)
        for _ in range(200):
            x = model.step(x, 1.5)
        self.assertAlmostEqual(x[2], 1.5, places=9)

    def test_prediction_matrices_match_recursion(self):
        model = discretize(0.275, 1.0)
        Phi, Gamma = prediction_matrices(model, 5)
        rng = np.random.default_rng(3)
        U = rng.uniform(-2.0, 2.0, 5)
        x0 = np.array([0.0, 8.0, -0.5])
        x = x0.copy()
        for i in range(5):
            x = model.step(x, U[i])
            np.testing.assert_allclose(Phi[i + 1] @ x0 + Gamma[i + 1] @ U, x, atol=1e-12)


class PredictPvTests(SimpleTestCase):

    def test_constant_speed(self):
        s, v, a = predict_pv(3.0, 5.0, 0.0, 22.3, 10, 1.0)
        np.testing.assert_allclose(s, 3.0 + 5.0 * np.arange(11))
        np.testing.assert_allclose(v, 5.0)

    def test_saturates_at_speed_limit(self):
        """Test the speed holds at the limit once reached and acceleration drops to zero"""
        s, v, a = predict_pv(0.0, 21.0, 2.0, 22.3, 6, 1.0)
        np.testing.assert_allclose(v[1:], 22.3)
        self.assertEqual(a[0], 2.0)
        np.testing.assert_allclose(a[1:], 0.0)
        self.assertTrue(np.all(np.diff(s) > 0))

    def test_stops_and_stays_stopped(self):
        s, v, a = predict_pv(10.0, 1.0, -2.0, 22.3, 5, 1.0)
        self.assertEqual(v[1], 0.0)
        np.testing.assert_allclose(v[1:], 0.0)
        self.assertAlmostEqual(s[1], 10.25)
        np.testing.assert_allclose(s[1:], 10.25)

    def test_positions_never_decrease(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            s, v, _ = predict_pv(rng.uniform(0, 50), rng.uniform(0, 22.3), rng.uniform(-8, 3),
                                 22.3, 17, 1.0)
            self.assertTrue(np.all(np.diff(s) >= 0.0))
            self.assertTrue(np.all((v >= 0.0) & (v <= 22.3)))


class PositionBoundTests(SimpleTestCase):

    def setUp(self):
        self.params = MpcParams.profile('mpc-u')
        self.model = discretize(self.params.tau_a, self.params.dt_h)

    def test_alpha_schedule(self):
        """Test the confidence schedule at its breakpoints and in between"""
        p = self.params
        self.assertEqual(alpha_schedule(0.0, p), p.alpha_hi)
        self.assertAlmostEqual(alpha_schedule(6.0, p), 0.699996, places=6)
        self.assertAlmostEqual(alpha_schedule(10.0, p), 0.5, places=12)
        self.assertEqual(alpha_schedule(14.0, p), p.alpha_lo)

    def test_median_gives_zero_buffer(self):
        params = self.params.with_overrides(alpha_lo=0.5, alpha_hi=0.5)
        for i in range(params.N + 1):
            self.assertAlmostEqual(position_bound(i, params, self.model), 0.0)

    def test_default_peak_buffer(self):
        """Test the shipped deviation gives a peak buffer near 9.5 m around 5-6 s"""
        profile = buffer_profile(self.params, self.model)
        self.assertAlmostEqual(profile.max(), 9.5, places=2)
        peak_time = int(np.argmax(profile)) * self.params.dt_h
        self.assertLessEqual(abs(peak_time - 6.0), 1.0)

    def test_calibration_recovers_default(self):
        sigma, peak_time = calibrate_sigma(9.5, self.params, self.model)
        self.assertAlmostEqual(sigma, 10.84, places=2)
        self.assertEqual(peak_time, 5.0)

    def test_interior_maximum(self):
        """Test the buffer starts at zero, rises, then falls back to zero"""
        profile = buffer_profile(self.params, self.model)
        self.assertEqual(profile[0], 0.0)
        self.assertTrue(np.all(profile >= 0.0))
        peak = int(np.argmax(profile))
        self.assertTrue(0 < peak < self.params.N)
        self.assertTrue(np.all(np.diff(profile[:peak + 1]) > 0))
        self.assertTrue(np.all(np.diff(profile[peak:11]) < 0))
        self.assertAlmostEqual(profile[10], 0.0, places=9)

    def test_preview_bound_below_nominal(self):
        pv = VehicleState(s=50.0, v=12.0, a=-1.0)
        preview = preview_from_prediction(20.0, pv, 22.3, self.params, self.model)
        self.assertTrue(np.all(preview.s_alpha <= preview.s_r))
        self.assertEqual(preview.s_r[0], 20.0)


class AccelLimitTests(SimpleTestCase):

    def test_bound_at_rest(self):
        self.assertAlmostEqual(MpcParams().accel_limit(0.0), 2.0)

    def test_crossover(self):
        """Test the two acceleration lines meet near 6.97 m/s"""
        v = 2.83 / 0.406
        self.assertAlmostEqual(v, 6.97, places=2)
        p = MpcParams()
        self.assertAlmostEqual(p.m[0] * v + p.b[0], p.m[1] * v + p.b[1], places=9)
        self.assertAlmostEqual(p.accel_limit(v), 0.285 * v + 2.0, places=9)

    def test_profiles(self):
        connected = MpcParams.profile('mpc-c')
        self.assertEqual((connected.N, connected.q_a, connected.T, connected.d_r), (17, 4000.0, 0.0, 6.0))
        self.assertTrue(connected.connected)
        self.assertFalse(MpcParams.profile('mpc-u').connected)


class MovingSpeedLimitTests(SimpleTestCase):

    def setUp(self):
        self.track = default_track()

    def test_far_from_turn_at_rest(self):
        ego = VehicleState(s=100.0, v=0.0)
        np.testing.assert_allclose(moving_speed_limit(ego, self.track, 16, 1.0), 22.3)

    def test_inside_turn(self):
        ego = VehicleState(s=1560.0, v=7.0)
        np.testing.assert_allclose(moving_speed_limit(ego, self.track, 16, 1.0), 7.0)

    def test_braking_envelope(self):
        """Test the bound follows the square-root envelope from its start to the turn"""
        delta = decel_distance(22.3, 7.0, -2.0)
        ego = VehicleState(s=1550.0 - delta, v=22.3)
        v_bar = moving_speed_limit(ego, self.track, 16, 1.0)
        for i in range(12):
            projected = 22.3 * i
            expected = math.sqrt(22.3 ** 2 + 2.0 * -2.0 * min(projected, delta))
            self.assertAlmostEqual(v_bar[i], expected, places=6)


class OcpTests(SimpleTestCase):

    def on_target(self, params, v=10.0):
        """Ego at speed v, PV at the same constant speed exactly at the target gap."""
        model = discretize(params.tau_a, params.dt_h)
        gap = params.T * v + params.d_r
        ego = VehicleState(s=100.0, v=v)
        preview = preview_from_prediction(gap, VehicleState(s=100.0 + gap + 5.0, v=v), 22.3, params, model)
        v_bar = np.full(params.N + 1, 22.3)
        return ego, preview, v_bar

    def test_on_target_is_optimal_at_rest(self):
        """Test zero input, zero slack and zero cost when already tracking"""
        params = MpcParams.profile('mpc-u')
        ego, preview, v_bar = self.on_target(params)
        ocp = assemble_ocp(ego, preview, v_bar, params)
        solution = AdmmSolver().solve(ocp.problem)
        self.assertTrue(solution.optimal)
        np.testing.assert_allclose(ocp.inputs(solution.x), 0.0, atol=1e-5)
        np.testing.assert_allclose(ocp.slacks(solution.x), 0.0, atol=1e-6)
        self.assertAlmostEqual(ocp.cost(solution.x), 0.0, delta=1e-3)
        self.assertAlmostEqual(ocp.cost(np.zeros(ocp.problem.n)), 0.0, places=9)

    def test_per_stage_slacks(self):
        params = MpcParams.profile('mpc-u', per_stage_slacks=True)
        builder = OcpBuilder(params)
        self.assertEqual(builder.n, params.N + 4 * params.N)
        self.assertEqual(builder.slack_index(COLLISION, 1), params.N)
        self.assertEqual(builder.slack_index(SPEED, 3), params.N + params.N + 2)
        ego, preview, v_bar = self.on_target(params)
        ocp = builder.assemble(ego.v, ego.a, preview, v_bar)
        solution = AdmmSolver().solve(ocp.problem)
        self.assertTrue(solution.optimal)
        np.testing.assert_allclose(ocp.inputs(solution.x), 0.0, atol=1e-5)

    def test_hessian_constant_between_steps(self):
        params = MpcParams.profile('mpc-c')
        builder = OcpBuilder(params)
        ego, preview, v_bar = self.on_target(params, v=12.0)
        first = builder.assemble(ego.v, ego.a, preview, v_bar)
        second = builder.assemble(ego.v + 1.0, 0.3, preview, v_bar)
        np.testing.assert_array_equal(first.problem.H, second.problem.H)
        np.testing.assert_array_equal(first.problem.G, second.problem.G)
        self.assertFalse(np.array_equal(first.problem.g, second.problem.g))

    def test_short_preview_rejected(self):
        params = MpcParams.profile('mpc-u')
        ego, preview, v_bar = self.on_target(params)
        with self.assertRaises(ValidationError):
            assemble_ocp(ego, preview, v_bar[:-1], params)

    def test_hard_input_bounds_hold(self):
        """Test every planned input respects u_min and the velocity-dependent ceiling"""
        params = MpcParams.profile('mpc-u')
        builder = OcpBuilder(params)
        model = builder.model
        ego = VehicleState(s=100.0, v=3.0)
        preview = preview_from_prediction(150.0, VehicleState(s=255.0, v=20.0), 22.3, params, model)
        ocp = builder.assemble(ego.v, ego.a, preview, np.full(params.N + 1, 22.3))
        solution = AdmmSolver().solve(ocp.problem)
        self.assertTrue(solution.optimal)
        U = ocp.inputs(solution.x)
        states = builder.trajectory(ego.v, ego.a, U)
        for i in range(params.N):
            self.assertGreaterEqual(U[i], params.u_min - 1e-6)
            self.assertLessEqual(U[i], params.accel_limit(states[i, 1]) + 1e-6)
        self.assertGreater(U[0], 0.0)


class MpcStepTests(SimpleTestCase):

    def setUp(self):
        self.track = straight_track()

    def test_hard_braking_leader_uses_collision_slack(self):
        """Test a sudden stop ahead is absorbed by the collision slack, not the input bound"""
        params = MpcParams.profile('mpc-u')
        ego = VehicleState(s=100.0, v=20.0)
        pv = VehicleState(s=115.0, v=20.0, a=-8.0)
        result = mpc_step(ego, 10.0, self.track, params, pv=pv)
        self.assertFalse(result.fallback)
        self.assertGreater(result.slacks[COLLISION], 0.0)
        self.assertGreaterEqual(result.u0, params.u_min)
        self.assertLess(result.u0, 0.0)

    def test_connected_equilibrium(self):
        """Test a plan already at the target spacing asks for no acceleration"""
        params = MpcParams.profile('mpc-c')
        v = 15.0
        ego = VehicleState(s=100.0, v=v)
        gap = params.d_r
        pv_odometer = ego.s + gap + self.track.vehicle_length
        plan = PvPlan(t_plan=0.0, dt_h=1.0, v_final=v,
                      positions=pv_odometer + v * np.arange(1, params.N + 1))
        result = mpc_step(ego, gap, self.track, params, plan=plan, now=0.0)
        self.assertFalse(result.fallback)
        self.assertAlmostEqual(result.u0, 0.0, places=4)
        self.assertEqual(result.source, 'connected')
        self.assertEqual(len(result.plan), params.N)
        self.assertAlmostEqual(result.v_final, v, places=3)

    def test_translation_invariance(self):
        """Test shifting ego and plan together leaves the command unchanged"""
        params = MpcParams.profile('mpc-c')
        commands = []
        for shift in (0.0, 750.0):
            ego = VehicleState(s=100.0 + shift, v=12.0)
            pv_odometer = ego.s + 9.0 + self.track.vehicle_length
            plan = PvPlan(t_plan=0.0, dt_h=1.0, v_final=13.0,
                          positions=pv_odometer + 13.0 * np.arange(1, params.N + 1))
            commands.append(mpc_step(ego, 9.0, self.track, params, plan=plan).u0)
        self.assertAlmostEqual(commands[0], commands[1], places=6)

    def test_deterministic(self):
        params = MpcParams.profile('mpc-u')
        ego = VehicleState(s=100.0, v=14.0, a=0.4)
        pv = VehicleState(s=140.0, v=11.0, a=-0.5)
        first = MpcController(params, self.track).step(ego, 35.0, pv=pv)
        second = MpcController(params, self.track).step(ego, 35.0, pv=pv)
        self.assertEqual(first.u0, second.u0)
        np.testing.assert_array_equal(first.plan, second.plan)

    def test_requires_pv_information(self):
        with self.assertRaises(ValueError):
            mpc_step(VehicleState(s=0.0, v=5.0), 20.0, self.track, MpcParams())

    def test_closed_loop_reaches_headway_target(self):
        """Test an ego starting at rest settles at T v + d_r behind a steady PV"""
        params = MpcParams.profile('mpc-u')
        controller = MpcController(params, self.track)
        plant = discretize(params.tau_a, 0.1)
        v_pv = 15.0
        x = np.array([0.0, 0.0, 0.0])
        pv_s = 200.0 + self.track.vehicle_length
        min_gap = np.inf
        for _ in range(1800):
            gap = pv_s - x[0] - self.track.vehicle_length
            min_gap = min(min_gap, gap)
            ego = VehicleState(s=100.0 + x[0], v=x[1], a=x[2])
            u = controller.step(ego, gap, pv=VehicleState(s=100.0 + pv_s, v=v_pv)).u0
            x = plant.step(x, u)
            pv_s += v_pv * 0.1
        gap = pv_s - x[0] - self.track.vehicle_length
        self.assertLess(abs(gap - (params.T * v_pv + params.d_r)), 1.0)
        self.assertAlmostEqual(x[1], v_pv, delta=0.2)
        self.assertGreater(min_gap, params.d_min)


class PlanHandlingTests(SimpleTestCase):

    def test_align_plan_to_receiver_laps(self):
        length = default_track().circuit_length
        aligned = align_plan([10.0, 20.0], length + 12.0, length)
        np.testing.assert_allclose(aligned, [10.0 + length, 20.0 + length])

    def test_resample_with_extrapolation(self):
        """Test resampling anchors on the observed position and extends with the final speed"""
        plan = PvPlan(t_plan=0.0, dt_h=1.0, positions=np.array([10.0, 20.0, 30.0]), v_final=10.0)
        positions = resample_plan(plan, 0.5, 5.0, 3, 1.0)
        np.testing.assert_allclose(positions, [5.0, 15.0, 25.0, 35.0])
