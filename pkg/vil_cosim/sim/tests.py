import math
import tempfile
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from pandas.testing import assert_frame_equal

from track.geometry import TURN, TrackMap, VehicleState, default_track, gap_ahead
from wire.codec import encode
from wire.messages import ProbeData, Sim2V, SimulatedVehicle, Subscription, TimeSync, V2Sim, V2VPlan
from wire.transport import LoopbackChannel

from .agents import Agent, CycleAgent, DriverAgent, MpcAgent, build_agent
from .client import EgoClient, client_tick, observe_pv
from .cycles import RECOVERY_ACCEL, DriveCycle, load_cycle, modify_cycle_for_track
from .plant import TAU_A, PlantState, plant_integrate
from .runner import SimClock, run_loopback, run_networked, run_scenario, scenario_cycle
from .scenario import IDM, MPC_C, MPC_U, US06, WIE, ScenarioConfig
from .server import SimServer
from .trace import TraceRecorder, read_trace
from .world import VirtualVehicle, World, build_world, server_tick, string_indices, upstream_ids

SERVER = ('server', 0)
CLIENT = ('client', 0)


def small_config(**overrides):
    config = dict(settings.VIL_COSIM)
    config['straight_length'] = 100.0
    config.update(overrides)
    return config


def write_csv(directory, name, text):
    path = Path(directory) / name
    path.write_text(text)
    return path


class ZeroAgent(Agent):
    name = 'ZERO'

    def control(self, ego, pv, gap, now, plan=None):
        return 0.0


class PlantTests(SimpleTestCase):

    def setUp(self):
        self.track = default_track()

    def test_cruise(self):
        """Test a cruising vehicle covers v * dt"""
        plant = PlantState(vehicle=VehicleState(s=100.0, v=10.0))
        new = plant_integrate(plant, 0.0, 0.1, self.track)
        self.assertAlmostEqual(new.s, 101.0, places=9)
        self.assertAlmostEqual(new.v, 10.0, places=9)
        self.assertAlmostEqual(new.vehicle.timestamp, 0.1)

    def test_actuator_lag(self):
        """Test one time constant from rest reaches 1 - 1/e of the command"""
        new = plant_integrate(PlantState(), 1.0, TAU_A, self.track)
        self.assertAlmostEqual(new.a, 1.0 - math.exp(-1.0), places=9)
        self.assertAlmostEqual(new.v, TAU_A * math.exp(-1.0), places=9)
        self.assertEqual(new.u, 1.0)

    def test_never_reverses(self):
        """Test braking at standstill leaves the vehicle where it is"""
        plant = PlantState(vehicle=VehicleState(s=50.0))
        new = plant_integrate(plant, -2.0, 0.1, self.track)
        self.assertEqual(new.v, 0.0)
        self.assertEqual(new.a, 0.0)
        self.assertEqual(new.s, 50.0)
        self.assertTrue(new.vehicle.brake_on)
        self.assertAlmostEqual(new.vehicle.timestamp, 0.1)

    def test_lap_wrap(self):
        plant = PlantState(vehicle=VehicleState(s=self.track.circuit_length - 0.5, v=10.0, heading=math.pi))
        new = plant_integrate(plant, 0.0, 0.1, self.track)
        self.assertEqual(new.vehicle.lap, 1)
        self.assertAlmostEqual(new.s, 0.5, places=9)
        self.assertAlmostEqual(new.vehicle.heading, 0.0)

    def test_rejects_bad_tick(self):
        for dt in [0.0, -0.1, float('nan')]:
            with self.assertRaises(ValidationError):
                plant_integrate(PlantState(), 0.0, dt, self.track)


class CycleTests(SimpleTestCase):

    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.dir = directory.name
        self.track = build_small_track()

    def test_load_scales_and_resamples(self):
        """Test speeds are scaled and put on the tick grid"""
        path = write_csv(self.dir, 'ramp.csv', 't_s,v_mps\n0,0\n1,10\n2,20\n3,10\n4,0\n')
        cycle = load_cycle(path, scale=0.6, tick=0.5)
        self.assertEqual(cycle.name, 'ramp')
        self.assertEqual(len(cycle.t), 9)
        self.assertAlmostEqual(cycle.speed_at(1.0), 6.0)
        self.assertAlmostEqual(cycle.speed_at(1.5), 9.0)
        self.assertAlmostEqual(cycle.peak, 12.0)
        self.assertEqual(cycle.scale, 0.6)

    def test_unit_scale_on_native_grid(self):
        path = write_csv(self.dir, 'ramp.csv', 't_s,v_mps\n0,0\n1,10\n2,20\n')
        cycle = load_cycle(path, scale=1.0, tick=1.0)
        np.testing.assert_allclose(cycle.t, [0.0, 1.0, 2.0])
        np.testing.assert_allclose(cycle.v, [0.0, 10.0, 20.0])

    def test_rejects_bad_files(self):
        """Test missing, empty and malformed cycle files"""
        bad = {
            'empty.csv': '',
            'header.csv': 't_s,v_mps\n',
            'columns.csv': 'time,speed\n0,0\n1,1\n',
            'backwards.csv': 't_s,v_mps\n0,0\n2,1\n1,2\n',
            'negative.csv': 't_s,v_mps\n0,0\n1,-1\n',
            'late.csv': 't_s,v_mps\n1,0\n2,1\n',
        }
        for name, text in bad.items():
            with self.subTest(name), self.assertRaises(ValidationError):
                load_cycle(write_csv(self.dir, name, text))
        with self.assertRaises(ValidationError):
            load_cycle(Path(self.dir) / 'absent.csv')

    def test_rejects_bad_scale(self):
        path = write_csv(self.dir, 'ramp.csv', 't_s,v_mps\n0,0\n1,10\n')
        with self.assertRaises(ValidationError):
            load_cycle(path, scale=0.0)

    def test_fitted_cycle_respects_turn_limit(self):
        """Test a fast cycle is slowed to the U-turn limit inside the turns"""
        t = np.arange(0.0, 200.0, 0.1)
        cycle = DriveCycle('fast', t, np.full(t.shape, 20.0))
        fitted = modify_cycle_for_track(cycle, self.track, laps=2)
        self.assertGreaterEqual(fitted.positions[-1], 2 * self.track.circuit_length)
        turns = np.array([self.track.zone_at(s).kind == TURN for s in fitted.positions])
        self.assertTrue(turns.any())
        self.assertTrue(np.all(fitted.v[turns] <= 7.0 + 1e-9))
        self.assertTrue(np.all(fitted.v <= 22.3 + 1e-9))
        self.assertTrue(np.all(np.diff(fitted.positions) >= 0))
        self.assertEqual(fitted.name, 'fast-track')

    def test_speed_recovers_gradually_after_turn(self):
        """Test leaving a U-turn the speed climbs back instead of jumping to the cycle"""
        t = np.arange(0.0, 200.0, 0.1)
        cycle = DriveCycle('fast', t, np.full(t.shape, 20.0))
        fitted = modify_cycle_for_track(cycle, self.track, laps=2)
        self.assertLessEqual(np.diff(fitted.v).max(), RECOVERY_ACCEL * 0.1 + 1e-9)
        later = fitted.positions > self.track.circuit_length
        straights = later & np.array([self.track.zone_at(s).kind != TURN for s in fitted.positions])
        self.assertGreater(fitted.v[straights].max(), 7.5)
        self.assertLess(fitted.v[straights].max(), 16.0)

    def test_recovery_follows_cycle_acceleration(self):
        t = np.arange(0.0, 200.0, 0.1)
        cycle = DriveCycle('ramp', t, np.minimum(0.05 * np.arange(t.size), 20.0))
        fitted = modify_cycle_for_track(cycle, self.track, laps=2)
        self.assertLessEqual(np.diff(fitted.v).max(), 0.05 + 1e-9)
        np.testing.assert_allclose(fitted.v[:100], cycle.v[:100])

    def test_slow_cycle_unchanged(self):
        """Test a cycle under every limit keeps its speeds"""
        t = np.arange(0.0, 100.0, 0.1)
        cycle = DriveCycle('slow', t, np.full(t.shape, 5.0))
        fitted = modify_cycle_for_track(cycle, self.track, laps=1)
        np.testing.assert_allclose(fitted.v, 5.0)
        self.assertAlmostEqual(fitted.positions[10], 5.0, places=9)
        self.assertAlmostEqual(fitted.position_at(1.0), 5.0, places=9)

    def test_cycle_repeats_until_laps_are_done(self):
        t = np.arange(0.0, 20.0, 0.1)
        cycle = DriveCycle('short', t, np.full(t.shape, 5.0))
        fitted = modify_cycle_for_track(cycle, self.track, laps=1, start_s=7.0)
        self.assertGreater(fitted.duration, cycle.duration)
        self.assertAlmostEqual(fitted.positions[0], 7.0)
        self.assertGreaterEqual(fitted.positions[-1], 7.0 + self.track.circuit_length)

    def test_standing_cycle_rejected(self):
        cycle = DriveCycle('parked', [0.0, 1.0], [0.0, 0.0])
        with self.assertRaises(ValidationError):
            modify_cycle_for_track(cycle, self.track, laps=1)

    def test_unfitted_position(self):
        with self.assertRaises(ValidationError):
            DriveCycle('raw', [0.0, 1.0], [0.0, 1.0]).position_at(0.5)


def build_small_track():
    return TrackMap.from_config(small_config())


class WorldTests(SimpleTestCase):

    def setUp(self):
        self.config = small_config()
        self.track = build_small_track()

    def at(self, s, **kwargs):
        return PlantState(vehicle=VehicleState(s=s, heading=self.track.position_xy(s)[2], **kwargs))

    def test_zero_commands_at_rest(self):
        """Test a world at rest under zero commands only advances time"""
        vehicles = [VirtualVehicle(0, self.at(40.0), ZeroAgent()), VirtualVehicle(1, self.at(0.0), ZeroAgent())]
        recorder = TraceRecorder()
        world = World(vehicles, self.track, recorder=recorder)
        server_tick(world, 0.0)
        self.assertAlmostEqual(world.time, 0.1)
        self.assertEqual(world.vehicle(0).state.s, 40.0)
        self.assertEqual(world.vehicle(1).state.s, 0.0)
        self.assertEqual(world.vehicle(1).state.v, 0.0)
        self.assertAlmostEqual(world.vehicle(1).state.timestamp, 0.1)
        self.assertEqual(world.vehicle(1).gap, 35.0)
        frame = recorder.frame()
        self.assertEqual(list(frame['vehicle_id']), [0, 1])
        self.assertEqual(list(frame['u']), [0.0, 0.0])

    def test_cav_string_layout(self):
        """Test the CAV string sits ahead of the ego with an MPC-U lead"""
        scenario = ScenarioConfig(controller=MPC_C, n_vehicles=10, n_cav_string=3, ego_index=5, laps=1)
        world = build_world(scenario, self.config, self.track)
        self.assertEqual(string_indices(scenario), [2, 3, 4])
        self.assertEqual(world.vehicle(2).agent.name, 'MPC-U')
        self.assertEqual(world.vehicle(3).agent.name, 'MPC-C')
        self.assertTrue(world.vehicle(4).agent.connected)
        self.assertIsInstance(world.vehicle(1).agent, DriverAgent)
        self.assertTrue(world.vehicle(5).remote)
        self.assertEqual(world.vehicle(5).state.s, 0.0)
        spacing = self.track.circuit_length / 10
        for i in range(10):
            gap = gap_ahead(world.vehicle(i).state, world.leader(i).state, self.track)
            self.assertAlmostEqual(gap, spacing - self.track.vehicle_length, places=6)

    def test_no_string_without_connected_ego(self):
        scenario = ScenarioConfig(controller=MPC_U, n_vehicles=10, n_cav_string=3, ego_index=5, laps=1)
        self.assertEqual(string_indices(scenario), [])
        world = build_world(scenario, self.config, self.track)
        self.assertFalse(any(isinstance(vehicle.agent, MpcAgent) for vehicle in world.vehicles))

    def test_upstream_ids(self):
        self.assertEqual(upstream_ids(ScenarioConfig()), list(range(38, 49)))
        self.assertEqual(upstream_ids(ScenarioConfig(n_vehicles=5, ego_index=3, n_cav_string=0)), [4, 0, 1, 2])
        self.assertEqual(upstream_ids(ScenarioConfig(kind=US06, n_vehicles=2, n_cav_string=0, ego_index=1)), [])

    def test_sim2v_neighbours(self):
        """Test Sim2V holds the PV ahead and the follower behind"""
        scenario = ScenarioConfig(n_vehicles=10, n_cav_string=0, ego_index=5, laps=1)
        world = build_world(scenario, self.config, self.track)
        frame = world.sim2v_for(5, 0.0)
        spacing = self.track.circuit_length / 10
        self.assertEqual(frame.count, 2)
        self.assertAlmostEqual(frame.vehicle(4).dx, spacing, places=6)
        self.assertAlmostEqual(frame.vehicle(6).dx, -spacing, places=6)
        self.assertEqual(frame.vehicle(4).dy, 0.0)

    def test_silent_client_goes_stale(self):
        vehicles = [VirtualVehicle(0, self.at(40.0), ZeroAgent()),
                    VirtualVehicle(1, self.at(0.0, v=5.0), remote=True)]
        world = World(vehicles, self.track, stale_timeout=0.5)
        server_tick(world, 0.3)
        self.assertFalse(world.vehicle(1).stale)
        self.assertAlmostEqual(world.vehicle(1).state.s, 0.5)
        with self.assertLogs('sim.world', level='WARNING'):
            server_tick(world, 0.6)
        self.assertTrue(world.vehicle(1).stale)

    def test_inject_probe(self):
        """Test a report is stored and carried half a tick ahead"""
        vehicles = [VirtualVehicle(0, self.at(200.0), ZeroAgent()),
                    VirtualVehicle(1, self.at(100.0, v=10.0), remote=True)]
        world = World(vehicles, self.track, tick=0.1)
        probe = ProbeData(v=11.0, timestamp=0.1)
        world.inject_probe(1, 101.0, probe)
        vehicle = world.vehicle(1)
        self.assertAlmostEqual(vehicle.reported.s, 101.0)
        self.assertAlmostEqual(vehicle.reported.a, 10.0)
        self.assertAlmostEqual(vehicle.state.s, 101.55)
        self.assertEqual(vehicle.last_update, 0.1)

    def test_inject_probe_across_the_line(self):
        circuit = self.track.circuit_length
        vehicles = [VirtualVehicle(0, self.at(200.0), ZeroAgent()),
                    VirtualVehicle(1, self.at(circuit - 0.5, v=10.0), remote=True)]
        world = World(vehicles, self.track, tick=0.1)
        world.inject_probe(1, 0.5, ProbeData(v=10.0, timestamp=0.1))
        self.assertEqual(world.vehicle(1).reported.lap, 1)
        self.assertAlmostEqual(world.vehicle(1).reported.s, 0.5)

    def test_cycle_world(self):
        """Test the cycle vehicle starts d_min ahead of the ego"""
        t = np.arange(0.0, 600.0, 0.1)
        cycle = DriveCycle('flat', t, np.full(t.shape, 5.0))
        scenario = ScenarioConfig.from_config(self.config, US06, IDM, laps=1)
        world = build_world(scenario, self.config, self.track, cycle=cycle)
        pv, ego = world.vehicles
        self.assertIsInstance(pv.agent, CycleAgent)
        self.assertTrue(ego.remote)
        self.assertEqual(ego.vehicle_id, 1)
        self.assertAlmostEqual(gap_ahead(ego.state, pv.state, self.track), 2.0)
        self.assertIsNone(pv.agent.v2v(0, 0.0))

    def test_cycle_world_publishes_plan_for_connected_ego(self):
        t = np.arange(0.0, 600.0, 0.1)
        cycle = DriveCycle('flat', t, np.full(t.shape, 5.0))
        scenario = ScenarioConfig.from_config(self.config, US06, MPC_C, laps=1)
        world = build_world(scenario, self.config, self.track, cycle=cycle)
        message = world.vehicles[0].agent.v2v(0, 0.0)
        self.assertEqual(message.n, 17)
        self.assertAlmostEqual(message.s[0], 7.0 + 5.0, places=6)
        self.assertAlmostEqual(message.v_final, 5.0)


class ClientTests(SimpleTestCase):

    def setUp(self):
        self.config = small_config()
        self.track = default_track()
        self.ego = PlantState(vehicle=VehicleState(s=100.0, v=15.0))

    def sim2v(self, dx=32.0, v=15.0, timestamp=0.0):
        return Sim2V(vehicles=[
            SimulatedVehicle(vehicle_id=4, v=v, dx=dx, timestamp=timestamp),
            SimulatedVehicle(vehicle_id=6, v=15.0, dx=-40.0, timestamp=timestamp),
        ])

    def test_observe_pv(self):
        """Test the PV is placed on the ego's odometer"""
        pv = observe_pv(self.sim2v(), self.ego.vehicle, self.track)
        self.assertEqual(pv.vehicle_id, 4)
        self.assertAlmostEqual(pv.gap, 27.0)
        self.assertAlmostEqual(pv.state.s, 132.0)
        self.assertEqual(pv.state.a, 0.0)
        later = observe_pv(self.sim2v(v=16.0, timestamp=0.1), self.ego.vehicle, self.track, previous=pv)
        self.assertAlmostEqual(later.state.a, 10.0)

    def test_observe_pv_without_vehicle_ahead(self):
        frame = Sim2V(vehicles=[SimulatedVehicle(vehicle_id=6, dx=-40.0)])
        self.assertIsNone(observe_pv(frame, self.ego.vehicle, self.track))
        self.assertIsNone(observe_pv(Sim2V(), self.ego.vehicle, self.track))

    def test_fallback_without_sim2v(self):
        """Test the ego brakes comfortably with no traffic view"""
        agent = build_agent(WIE, self.config, self.track)
        step = client_tick(self.ego, None, None, agent, 0.0, self.track, vehicle_id=5)
        self.assertTrue(step.fallback)
        self.assertEqual(step.u, self.track.a_c)
        self.assertIsNone(step.v2v)
        self.assertEqual(step.v2sim.vehicle_id, 5)

    def test_stale_sim2v_falls_back(self):
        agent = build_agent(WIE, self.config, self.track)
        step = client_tick(self.ego, self.sim2v(), None, agent, 1.0, self.track, vehicle_id=5, stale=True)
        self.assertTrue(step.fallback)
        self.assertEqual(step.u, self.track.a_c)

    def test_driver_accelerates_behind_distant_pv(self):
        agent = build_agent(WIE, self.config, self.track)
        plant = PlantState(vehicle=VehicleState(s=100.0))
        step = client_tick(plant, self.sim2v(dx=200.0), None, agent, 0.0, self.track, vehicle_id=5)
        self.assertFalse(step.fallback)
        self.assertGreater(step.u, 0.0)
        self.assertGreater(step.plant.v, 0.0)

    def test_connected_ego_publishes_plan(self):
        """Test an MPC-C ego follows the PV plan and shares its own"""
        agent = build_agent(MPC_C, self.config, self.track)
        pv_odometer = 100.0 + 32.0
        plan = V2VPlan(vehicle_id=4, timestamp=0.0, s=pv_odometer + 15.0 * np.arange(1, 18), v_final=15.0)
        step = client_tick(self.ego, self.sim2v(), plan, agent, 0.0, self.track, vehicle_id=5)
        self.assertFalse(step.fallback)
        self.assertEqual(step.v2v.vehicle_id, 5)
        self.assertEqual(step.v2v.n, 17)
        self.assertEqual(len(encode(step.v2v)), 296)

    def test_probe_reports_track_position(self):
        agent = build_agent(IDM, self.config, self.track)
        step = client_tick(self.ego, self.sim2v(), None, agent, 0.0, self.track, vehicle_id=5)
        s = self.track.project(step.v2sim.probe.x, step.v2sim.probe.y)
        self.assertAlmostEqual(s, step.plant.s, places=6)
        self.assertAlmostEqual(step.v2sim.probe.timestamp, 0.1)

    def test_client_over_loopback(self):
        """Test subscribe, fallback logging and probe sending"""
        clock = SimClock()
        channel = LoopbackChannel(clock=clock)
        server = channel.endpoint(SERVER)
        client = EgoClient(5, build_agent(WIE, self.config, self.track), self.track,
                           channel.endpoint(CLIENT), SERVER, clock=clock)
        client.subscribe()
        with self.assertLogs('sim.client', level='WARNING'):
            client.step(0.0)
        messages = [envelope.message for envelope in server.poll()]
        self.assertIsInstance(messages[0], Subscription)
        self.assertEqual(messages[0].sub_flag, 1)
        self.assertIsInstance(messages[1], V2Sim)
        self.assertTrue(client.fallback)

        clock.now = 0.1
        server.send(self.sim2v(timestamp=0.1), CLIENT)
        self.assertTrue(client.receive(client.endpoint.poll()))
        with self.assertLogs('sim.client', level='INFO'):
            step = client.step(0.1)
        self.assertFalse(step.fallback)
        client.leave()
        self.assertEqual(server.poll()[-1].message.sub_flag, 0)


class ServerTests(SimpleTestCase):

    def setUp(self):
        self.config = small_config()
        self.track = build_small_track()
        self.clock = SimClock()
        self.channel = LoopbackChannel(clock=self.clock)
        scenario = ScenarioConfig(n_vehicles=4, n_cav_string=0, ego_index=2, laps=1)
        self.world = build_world(scenario, self.config, self.track)
        self.server = SimServer(self.world, self.channel.endpoint(SERVER), clock=self.clock)
        self.client = self.channel.endpoint(CLIENT)

    def received(self, kind):
        return [envelope.message for envelope in self.client.poll() if isinstance(envelope.message, kind)]

    def test_refuses_server_vehicle(self):
        self.client.send(Subscription(vehicle_id=0), SERVER)
        with self.assertLogs('sim.server', level='WARNING'):
            self.server.step(0.0)
        self.assertEqual(self.server.clients, {})

    def test_subscription_and_sim2v(self):
        """Test a subscribed client gets its Sim2V view each step"""
        self.client.send(Subscription(vehicle_id=2), SERVER)
        self.server.step(0.0)
        self.assertEqual(self.server.clients, {2: CLIENT})
        frames = self.received(Sim2V)
        self.assertEqual(len(frames), 1)
        self.assertEqual({entry.vehicle_id for entry in frames[0].vehicles}, {1, 3})
        self.client.send(Subscription(vehicle_id=2, sub_flag=0), SERVER)
        self.server.step(0.1)
        self.assertTrue(self.server.finished)

    def test_time_sync_echo(self):
        self.clock.now = 5.0
        self.client.send(TimeSync(t0=4.5), SERVER)
        self.server.step(0.0)
        echo, = self.received(TimeSync)
        self.assertEqual(echo.t0, 4.5)
        self.assertEqual(echo.t1, 5.0)
        self.assertEqual(echo.t2, 5.0)

    def test_v2v_forwarded_after_delay(self):
        """Test a leader's plan reaches its follower one delay later"""
        self.client.send(Subscription(vehicle_id=2), SERVER)
        self.server.step(0.0)
        self.client.poll()
        self.world.publish_plan(V2VPlan(vehicle_id=1, timestamp=0.1, s=(1.0, 2.0)), 0.1)
        self.server.step(0.1)
        self.assertEqual(self.received(V2VPlan), [])
        self.server.step(0.2)
        plans = self.received(V2VPlan)
        self.assertEqual(len(plans), 1)
        self.assertEqual(plans[0].s, (1.0, 2.0))

    def test_probe_moves_remote_vehicle(self):
        self.client.send(Subscription(vehicle_id=2), SERVER)
        self.server.step(0.0)
        x, y, heading = self.track.position_xy(3.0)
        self.client.send(V2Sim(vehicle_id=2, probe=ProbeData(v=2.0, x=x, y=y, heading=heading,
                                                             timestamp=0.1)), SERVER)
        self.server.step(0.1)
        self.assertAlmostEqual(self.world.vehicle(2).reported.s, 3.0, places=6)


class RunTests(SimpleTestCase):

    def setUp(self):
        self.config = small_config()
        self.track = build_small_track()

    def scenario(self, controller=WIE, **overrides):
        values = dict(controller=controller, n_vehicles=6, n_cav_string=0, ego_index=3, laps=2)
        values.update(overrides)
        return ScenarioConfig(**values)

    def test_loopback_run(self):
        """Test a small Wiedemann ring completes its laps without collisions"""
        trace, steps = run_loopback(self.scenario(), self.config, self.track)
        self.assertGreater(steps, 0)
        ego = trace[trace['vehicle_id'] == 3]
        self.assertEqual(sorted(ego['lap'].unique()), [0, 1])
        self.assertEqual(set(trace['vehicle_id']), set(range(6)))
        self.assertTrue((trace['gap'].dropna() > 0).all())
        self.assertFalse(ego['stale'].any())

    def test_loopback_is_deterministic(self):
        first, _ = run_loopback(self.scenario(laps=1), self.config, self.track)
        second, _ = run_loopback(self.scenario(laps=1), self.config, self.track)
        assert_frame_equal(first, second)

    def test_seed_changes_drivers(self):
        first, _ = run_loopback(self.scenario(laps=1, seed=1), self.config, self.track)
        second, _ = run_loopback(self.scenario(laps=1, seed=2), self.config, self.track)
        self.assertFalse(first.equals(second))

    def test_connected_string_run(self):
        """Test an MPC-C ego behind a CAV string until the time limit"""
        scenario = self.scenario(MPC_C, n_cav_string=2, max_time=20.0)
        with self.assertLogs('sim.runner', level='WARNING'):
            trace, steps = run_loopback(scenario, self.config, self.track)
        self.assertEqual(steps, 200)
        self.assertEqual(set(trace['vehicle_id']), set(range(6)))
        self.assertTrue((trace['gap'].dropna() > 0).all())
        ego = trace[trace['vehicle_id'] == 3]
        self.assertGreater(ego['v'].iloc[-1], 0.0)

    def test_run_scenario_writes_artifacts(self):
        """Test a full run computes metrics and writes its CSVs"""
        with tempfile.TemporaryDirectory() as out:
            result = run_scenario(self.scenario(), self.config, out_dir=out)
            self.assertEqual(result.report.controller, 'WIE')
            self.assertEqual(len(result.report.laps), 2)
            self.assertTrue(result.report.laps[0].discarded)
            self.assertGreater(result.report.travel_time, 0.0)
            self.assertGreaterEqual(result.report.max_gap, result.report.mean_gap)
            for name in ['trace', 'plot', 'metrics', 'laps']:
                self.assertTrue(result.paths[name].is_file(), msg=name)
            written = read_trace(result.paths['trace'])
            self.assertEqual(len(written), len(result.trace))
        self.assertGreater(result.speedup, 0.0)

    def test_cycle_without_file(self):
        scenario = ScenarioConfig.from_config(self.config, US06, IDM)
        with self.assertRaises(ValidationError):
            scenario_cycle(scenario, self.config)
        with self.assertRaises(ValidationError):
            run_scenario(scenario, self.config)

    def test_cycle_run(self):
        """Test an IDM ego following a drive cycle"""
        with tempfile.TemporaryDirectory() as directory:
            rows = ['t_s,v_mps'] + [f'{t},{min(t, 12.0)}' for t in range(0, 300)]
            path = write_csv(directory, 'synthetic.csv', '\n'.join(rows) + '\n')
            config = small_config(**{'cycle.us06': str(path), 'cycle.us06_scale': 1.0})
            scenario = ScenarioConfig.from_config(config, US06, IDM, laps=1)
            result = run_scenario(scenario, config)
        trace = result.trace
        self.assertEqual(set(trace['vehicle_id']), {0, 1})
        self.assertTrue((trace['gap'].dropna() > 0).all())
        self.assertFalse(result.report.laps[0].discarded)
        pv = trace[trace['vehicle_id'] == 0]
        turns = np.array([self.track.zones[zone].kind == TURN for zone in pv['zone']])
        self.assertTrue(np.all(pv['v'].to_numpy()[turns] <= 7.0 + 1e-6))

    def test_networked_run(self):
        """Test the ego completes a lap against a server thread over UDP"""
        config = small_config(time_scale=20.0)
        trace, steps = run_networked(self.scenario(laps=1), config, self.track)
        self.assertGreater(steps, 0)
        ego = trace[trace['vehicle_id'] == 3]
        self.assertFalse(ego.empty)
        self.assertTrue(ego['t'].is_monotonic_increasing)
        self.assertIn(0, set(trace['vehicle_id']))
