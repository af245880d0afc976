import numpy as np
import pandas as pd
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from track.geometry import default_track

from .battery import battery_energy
from .exceptions import MissingLapsError
from .fuel import (
    MafCorrection,
    calibrate_e_f,
    cumulative_fuel,
    fuel_rate,
    maf_correction,
    trim_error,
)
from .metrics import average_headway, flow_metrics, plot_data, reports_frame
from .params import ProxyParams
from .tractive import enrichment_lambda, icev_fuel_proxy, tractive_proxy, wheel_power


def obd_trace(t, maf, lambda_c=1.0, ltft=0.0, stft=0.0):
    n = len(t)
    return pd.DataFrame({
        't': t, 'maf': maf,
        'lambda_c': np.broadcast_to(lambda_c, n).astype(float),
        'ltft': np.broadcast_to(ltft, n).astype(float),
        'stft': np.broadcast_to(stft, n).astype(float),
    })


def vehicle_trace(t, v, a, gap, lap, vehicle_id=1, zone=0):
    n = len(t)
    return pd.DataFrame({
        'tick': np.arange(n), 't': t, 'vehicle_id': vehicle_id,
        's': np.cumsum(v) * 0.1, 'v': v, 'a': a, 'u': a, 'gap': gap,
        'zone': zone, 'lap': lap, 'stale': False,
    })


class FuelTests(SimpleTestCase):

    def setUp(self):
        self.t = np.arange(0.0, 10.5, 0.5)
        self.maf = 10.0 + 2.0 * self.t

    def test_trim_error(self):
        self.assertAlmostEqual(float(trim_error(5.0, -2.0, 0.01)), 1.02)

    def test_zero_trims_give_unit_bins(self):
        correction = maf_correction(obd_trace(self.t, self.maf))
        np.testing.assert_allclose(correction.values, 1.0)
        np.testing.assert_allclose(correction.centres, [15.0, 25.0, 35.0])

    def test_fuel_rate_examples(self):
        """Test the stoichiometric, zero-airflow and rich-command cases"""
        self.assertAlmostEqual(float(fuel_rate(14.1, 1.0)), 1.0)
        self.assertEqual(float(fuel_rate(0.0, 1.0)), 0.0)
        ratio = float(fuel_rate(20.0, 0.70)) / float(fuel_rate(20.0, 1.0))
        self.assertAlmostEqual(ratio, 1.0 / 0.70)
        with self.assertRaises(ValidationError):
            fuel_rate(10.0, 0.0)

    def test_homogeneous_in_airflow(self):
        correction = MafCorrection.flat(1.03)
        self.assertAlmostEqual(float(fuel_rate(30.0, 0.9, correction)), 3 * float(fuel_rate(10.0, 0.9, correction)))

    def test_flat_cumulative_fuel(self):
        """Test total fuel equals integrated airflow over 14.1 at lambda 1"""
        total = cumulative_fuel(obd_trace(self.t, self.maf), MafCorrection.flat())
        self.assertAlmostEqual(total / (200.0 / 14.1), 1.0, places=9)

    def test_known_trims_cumulative_fuel(self):
        trace = obd_trace(self.t, self.maf, ltft=4.0, stft=1.0)
        total = cumulative_fuel(trace, maf_correction(trace, e_f=0.02))
        expected = 1.03 * 200.0 / 14.1
        self.assertLess(abs(total - expected) / expected, 1e-6)

    def test_calibration(self):
        """Test calibrated bins land within 5 % of unity"""
        rng = np.random.default_rng(8)
        t = np.arange(0.0, 600.0, 1.0)
        maf = rng.uniform(2.0, 60.0, t.size)
        trace = obd_trace(t, maf, ltft=3.0, stft=rng.uniform(-1.0, 1.0, t.size))
        reference = cumulative_fuel(trace, MafCorrection.flat())
        e_f = calibrate_e_f(trace, reference)
        self.assertAlmostEqual(e_f, 0.03, delta=0.005)
        correction = maf_correction(trace, e_f)
        self.assertTrue(np.all((correction.values >= 0.95) & (correction.values <= 1.05)))
        self.assertAlmostEqual(cumulative_fuel(trace, correction), reference, places=6)

    def test_empty_trace(self):
        with self.assertRaises(ValidationError):
            maf_correction(obd_trace([], []))


class BatteryTests(SimpleTestCase):

    def test_constant_discharge(self):
        trace = pd.DataFrame({'t': [0.0, 1.0], 'voltage': [360.0, 360.0], 'current': [10.0, 10.0]})
        self.assertAlmostEqual(battery_energy(trace, r_s=0.1), 3610.0)

    def test_no_current(self):
        trace = pd.DataFrame({'t': [0.0, 1.0, 2.0], 'voltage': [350.0] * 3, 'current': [0.0] * 3})
        self.assertEqual(battery_energy(trace), 0.0)

    def test_discharge_then_charge_cancels(self):
        trace = pd.DataFrame({'t': [0.0, 1.0, 2.0, 3.0], 'voltage': [360.0] * 4,
                              'current': [10.0, 10.0, -10.0, -10.0]})
        self.assertAlmostEqual(battery_energy(trace, r_s=0.0), 0.0)

    def test_piecewise_linear_exact(self):
        """Test a linear current ramp integrates exactly"""
        t = np.linspace(0.0, 10.0, 7)
        trace = pd.DataFrame({'t': t, 'voltage': 400.0, 'current': 2.0 * t})
        expected = 400.0 * 100.0
        self.assertLess(abs(battery_energy(trace, r_s=0.0) - expected) / expected, 1e-9)

    def test_rejects_short_or_invalid(self):
        with self.assertRaises(ValidationError):
            battery_energy(pd.DataFrame({'t': [0.0], 'voltage': [360.0], 'current': [1.0]}))
        with self.assertRaises(ValidationError):
            battery_energy(pd.DataFrame({'t': [0.0, 1.0], 'voltage': [0.0, 360.0], 'current': [1.0, 1.0]}))


class TractiveTests(SimpleTestCase):

    def setUp(self):
        self.params = ProxyParams()

    def test_standstill(self):
        t = np.arange(0.0, 10.0, 0.1)
        self.assertEqual(tractive_proxy(t, np.zeros_like(t), np.zeros_like(t), self.params), 0.0)

    def test_cruise_closed_form(self):
        t = np.arange(0.0, 100.1, 0.1)
        v = np.full_like(t, 20.0)
        energy = tractive_proxy(t, v, np.zeros_like(t), self.params)
        expected = (120.0 + 20.0 + 0.55 * 400.0) * 20.0 * 100.0 / 0.85
        self.assertAlmostEqual(energy / expected, 1.0, places=9)

    def test_closed_speed_loop_leaves_road_load(self):
        """Test the inertial term cancels over a speed cycle with lossless drive and regeneration"""
        params = ProxyParams(eta_drive=1.0, eta_regen=1.0)
        t = np.arange(0.0, 20.0 + 1e-9, 0.001)
        omega = 2 * np.pi / 20.0
        v = 10.0 + 5.0 * np.sin(omega * t)
        a = 5.0 * omega * np.cos(omega * t)
        road_load = tractive_proxy(t, v, np.zeros_like(t), params)
        self.assertAlmostEqual(tractive_proxy(t, v, a, params) / road_load, 1.0, places=6)

    def test_deterministic(self):
        t = np.arange(0.0, 30.0, 0.1)
        v = 10.0 + np.sin(t)
        a = np.cos(t)
        self.assertEqual(tractive_proxy(t, v, a, self.params), tractive_proxy(t, v, a, self.params))

    def test_enrichment_schedule(self):
        np.testing.assert_allclose(enrichment_lambda([20e3, 45e3, 80e3], self.params), [1.0, 0.85, 0.70])

    def test_icev_cruise_volume(self):
        t = np.arange(0.0, 100.1, 0.1)
        v = np.full_like(t, 20.0)
        power = float(wheel_power(20.0, 0.0, self.params))
        expected = power * 100.0 / 0.30 / 32e6
        self.assertAlmostEqual(icev_fuel_proxy(t, v, np.zeros_like(t), self.params), expected, places=9)


class FlowMetricsTests(SimpleTestCase):

    def setUp(self):
        self.track = default_track()

    def constant_run(self, gap=30.0, v=15.0, laps=3, per_lap=10):
        n = laps * per_lap
        t = np.arange(n) * 0.1
        return vehicle_trace(t, np.full(n, v), np.zeros(n), np.full(n, gap), np.arange(n) // per_lap)

    def test_headway_examples(self):
        self.assertAlmostEqual(average_headway([28.0], [14.0]), 2.0)
        self.assertIsNone(average_headway([10.0, 12.0], [0.05, 0.05]))

    def test_constant_gap_run(self):
        """Test constant gap and speed give equal mean and max and a fixed headway"""
        report = flow_metrics(self.constant_run(), 1, self.track, laps=3, scenario='microsim', controller='wie')
        self.assertEqual(report.mean_gap, 30.0)
        self.assertEqual(report.max_gap, 30.0)
        self.assertEqual(report.mean_center_gap, 35.0)
        self.assertAlmostEqual(report.avg_headway, 2.0)
        self.assertAlmostEqual(report.travel_time, 2.0)
        self.assertAlmostEqual(report.max_overspeed, 15.0 - 22.3)
        self.assertEqual(report.accel_sq_integral, 0.0)
        self.assertEqual([lap.discarded for lap in report.laps], [True, False, False])

    def test_keep_first_lap(self):
        report = flow_metrics(self.constant_run(), 1, self.track, discard_first_lap=False)
        self.assertAlmostEqual(report.travel_time, 3.0)
        self.assertFalse(any(lap.discarded for lap in report.laps))

    def test_missing_laps(self):
        with self.assertRaises(MissingLapsError) as ctx:
            flow_metrics(self.constant_run(laps=3), 1, self.track, laps=4)
        self.assertEqual(ctx.exception.missing, (3,))
        with self.assertRaises(MissingLapsError):
            flow_metrics(self.constant_run(laps=1), 1, self.track)

    def test_stopped_run_has_no_headway(self):
        report = flow_metrics(self.constant_run(v=0.05), 1, self.track)
        self.assertIsNone(report.avg_headway)

    def test_upstream_energy(self):
        ego = self.constant_run()
        follower = ego.copy()
        follower['vehicle_id'] = 2
        report = flow_metrics(pd.concat([ego, follower]), 1, self.track, upstream_ids=[2])
        self.assertAlmostEqual(report.upstream_energy, report.net_energy)

    def test_resampling_invariance(self):
        """Test halving the tick changes the smooth-trace figures by under 0.5 %"""
        reports = []
        for dt in (0.1, 0.05):
            t = np.arange(0.0, 300.0 - 1e-9, dt)
            v = 15.0 + 2.0 * np.sin(0.1 * t)
            a = 0.2 * np.cos(0.1 * t)
            gap = 30.0 + 5.0 * np.sin(0.05 * t)
            reports.append(flow_metrics(vehicle_trace(t, v, a, gap, (t // 100).astype(int)), 1, self.track))
        coarse, fine = reports
        for name in ('travel_time', 'avg_headway', 'mean_gap', 'max_gap', 'net_energy', 'accel_sq_integral'):
            a, b = getattr(coarse, name), getattr(fine, name)
            self.assertLess(abs(a - b) / abs(b), 0.005, name)

    def test_tables(self):
        report = flow_metrics(self.constant_run(), 1, self.track)
        frame = reports_frame([report])
        self.assertNotIn('laps', frame.columns)
        self.assertEqual(len(report.laps_frame()), 3)
        plot = plot_data(self.constant_run(), [1])
        self.assertEqual(list(plot.columns), ['t', 'vehicle_id', 'v', 'u', 'gap', 'energy_rate'])
