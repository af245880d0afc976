"""
Full-size ring experiments. Each run takes minutes, so they only run with
VIL_LONG_TESTS=1 in the environment.
"""
import os
import unittest

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from track.geometry import TrackMap, decel_distance

from .runner import LOOPBACK, NETWORKED, run_scenario
from .scenario import CONTROLLERS, IDM, MPC_C, MPC_U, WIE, ScenarioConfig

LONG = os.environ.get('VIL_LONG_TESTS') == '1'


@unittest.skipUnless(LONG, 'set VIL_LONG_TESTS=1 to run the full ring experiments')
class RingExperimentTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.config = dict(settings.VIL_COSIM)
        cls.track = TrackMap.from_config(cls.config)
        cls.results = {
            controller: run_scenario(ScenarioConfig.from_config(cls.config, controller=controller), cls.config)
            for controller in CONTROLLERS
        }

    def report(self, controller):
        return self.results[controller].report

    def test_no_collisions(self):
        for controller, result in self.results.items():
            with self.subTest(controller):
                self.assertGreater(result.trace['gap'].dropna().min(), 0.0)

    def test_headway_ordering(self):
        """Test the connected controller drives closest, then the unconnected one"""
        self.assertLessEqual(self.report(MPC_U).avg_headway, self.report(WIE).avg_headway)
        self.assertLessEqual(self.report(MPC_C).avg_headway, self.report(MPC_U).avg_headway)

    def test_smoother_acceleration(self):
        wie = self.report(WIE).accel_sq_integral
        unconnected = self.report(MPC_U).accel_sq_integral
        connected = self.report(MPC_C).accel_sq_integral
        self.assertLessEqual(unconnected, 0.9 * wie)
        self.assertLessEqual(connected, 0.9 * unconnected)

    def test_energy_ordering(self):
        self.assertLess(self.report(MPC_C).net_energy, self.report(MPC_U).net_energy)
        self.assertLess(self.report(MPC_U).net_energy, self.report(WIE).net_energy)

    def test_upstream_smoothing(self):
        """Test traffic behind a connected ego uses less energy"""
        self.assertLess(self.report(MPC_C).upstream_energy, self.report(WIE).upstream_energy)

    def test_zone_limits_respected(self):
        self.assertAlmostEqual(decel_distance(22.3, 7.0, -2.0), 112.07, places=2)
        limits = np.array([zone.v_limit for zone in self.track.zones])
        for controller in [WIE, IDM, MPC_U, MPC_C]:
            trace = self.results[controller].trace
            excess = trace['v'].to_numpy() - limits[trace['zone'].to_numpy(dtype=int)]
            with self.subTest(controller):
                self.assertLessEqual(excess.max(), 0.5)


@unittest.skipUnless(LONG, 'set VIL_LONG_TESTS=1 to run the full ring experiments')
class NetworkedParityTests(SimpleTestCase):

    def test_connected_ring_matches_loopback(self):
        """Test UDP and in-process runs of the connected ring agree"""
        config = dict(settings.VIL_COSIM)
        config['time_scale'] = 3.0
        scenario = ScenarioConfig.from_config(config, controller=MPC_C)
        loopback = run_scenario(scenario, config, mode=LOOPBACK).report
        networked = run_scenario(scenario, config, mode=NETWORKED).report
        self.assertAlmostEqual(networked.travel_time / loopback.travel_time, 1.0, delta=0.02)
        self.assertAlmostEqual(networked.mean_gap / loopback.mean_gap, 1.0, delta=0.02)
