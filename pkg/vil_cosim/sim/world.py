"""
Server-side traffic state.

Vehicles sit on a single-lane ring in driving order: the leader of vehicle
``i`` is vehicle ``i - 1`` (wrapping around). Vehicles driven by a client
are ``remote``; the server only carries their last reported state forward.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from mpc.preview import plan_from_v2v
from track.geometry import VehicleState, advance, center_gap, gap_ahead
from wire.messages import Sim2V, SimulatedVehicle, VehicleType
from wire.transport import DelayLine, extrapolate

from .agents import Agent, CycleAgent, MpcAgent, build_agent
from .cycles import modify_cycle_for_track
from .plant import PlantState, plant_integrate
from .scenario import MPC_C, MPC_U, WIE

logger = logging.getLogger(__name__)


@dataclass
class VirtualVehicle:
    vehicle_id: int
    plant: PlantState
    agent: Optional[Agent] = None
    remote: bool = False
    stale: bool = False
    last_update: float = 0.0
    gap: float = math.nan
    reported: Optional[VehicleState] = None

    @property
    def state(self):
        return self.plant.vehicle

    @property
    def vehicle_type(self):
        if self.remote:
            return VehicleType.CAV
        return self.agent.vehicle_type


class World:

    def __init__(self, vehicles, track, tick=0.1, v2v_delay=0.1, stale_timeout=0.5,
                 tau_a=0.275, recorder=None):
        self.vehicles = list(vehicles)
        self.track = track
        self.tick = tick
        self.v2v_delay = v2v_delay
        self.stale_timeout = stale_timeout
        self.tau_a = tau_a
        self.recorder = recorder
        self.time = 0.0
        self.plans = {}
        self.v2v_line = DelayLine()
        self._index = {vehicle.vehicle_id: i for i, vehicle in enumerate(self.vehicles)}

    def __len__(self):
        return len(self.vehicles)

    def vehicle(self, vehicle_id):
        return self.vehicles[self._index[vehicle_id]]

    def leader(self, vehicle_id):
        return self.vehicles[(self._index[vehicle_id] - 1) % len(self.vehicles)]

    def follower(self, vehicle_id):
        return self.vehicles[(self._index[vehicle_id] + 1) % len(self.vehicles)]

    @property
    def remotes(self):
        return [vehicle for vehicle in self.vehicles if vehicle.remote]

    def publish_plan(self, message, now):
        self.v2v_line.push(message, now, self.v2v_delay)

    def release_plans(self, now):
        released = self.v2v_line.pop_ready(now)
        for message in released:
            self.plans[message.vehicle_id] = message
        return released

    def plan_for(self, vehicle, now):
        """The leader's latest plan as seen by ``vehicle``, or None when absent or too old."""
        leader = self.leader(vehicle.vehicle_id)
        message = self.plans.get(leader.vehicle_id)
        if message is None or not isinstance(vehicle.agent, MpcAgent):
            return None
        if now - message.timestamp > self.stale_timeout + self.v2v_delay:
            return None
        gap = gap_ahead(vehicle.state, leader.state, self.track)
        pv_odometer = vehicle.state.odometer(self.track) + gap + self.track.vehicle_length
        dt_h = vehicle.agent.controller.params.dt_h
        return plan_from_v2v(message, pv_odometer, self.track.circuit_length, dt_h)

    def inject_probe(self, vehicle_id, s, probe):
        """
        Take a client's reported position ``s`` (already projected onto the
        centreline) and probe. The stored state is moved half a tick ahead.
        """
        vehicle = self.vehicle(vehicle_id)
        previous = vehicle.state
        delta = (s - previous.s) % self.track.circuit_length
        if delta > self.track.circuit_length / 2.0:
            delta -= self.track.circuit_length
        elapsed = probe.timestamp - previous.timestamp
        a = (probe.v - previous.v) / elapsed if elapsed > 0 else previous.a
        lap, s = divmod(previous.odometer(self.track) + delta, self.track.circuit_length)
        vehicle.reported = replace(previous, s=s, lap=int(lap), v=probe.v, a=a, heading=probe.heading,
                                   brake_on=bool(probe.brake_on), timestamp=probe.timestamp)
        vehicle.plant = PlantState(
            vehicle=advance(vehicle.reported, extrapolate(0.0, probe.v, self.tick), self.track),
            u=vehicle.plant.u,
        )
        vehicle.last_update = probe.timestamp
        if vehicle.stale:
            logger.info("vehicle %s reporting again", vehicle_id)
        vehicle.stale = False

    def sim2v_for(self, vehicle_id, now):
        """
        Sim2V frame for a client: its preceding vehicle and its follower,
        placed relative to the position the client last reported.
        """
        vehicle = self.vehicle(vehicle_id)
        ego = vehicle.state if vehicle.stale or vehicle.reported is None else vehicle.reported
        leader = self.leader(vehicle_id)
        follower = self.follower(vehicle_id)
        entries = [
            self._entry(leader, center_gap(ego, leader.state, self.track), now),
            self._entry(follower, -center_gap(follower.state, ego, self.track), now),
        ]
        return Sim2V(vehicles=entries)

    def _entry(self, vehicle, dx, now):
        state = vehicle.state
        return SimulatedVehicle(
            vehicle_id=vehicle.vehicle_id,
            vehicle_type=vehicle.vehicle_type,
            v=max(state.v, 0.0),
            dx=dx,
            dy=0.0,
            heading=state.heading,
            brake_on=int(vehicle.plant.u < 0.0),
            timestamp=now,
        )


def server_tick(world, now):
    """
    Advance every server-side vehicle by one tick from time ``now``.

    Commands are computed from the states at ``now`` for all vehicles
    before any of them moves. Remote vehicles are carried forward at their
    last speed and flagged stale once their report is older than the
    stale timeout.
    """
    track = world.track
    tick = world.tick
    world.release_plans(now)
    step = int(round(now / tick))

    for vehicle in world.remotes:
        stale = now - vehicle.last_update > world.stale_timeout
        if stale and not vehicle.stale:
            logger.warning("vehicle %s silent for %.2f s; extrapolating", vehicle.vehicle_id,
                           now - vehicle.last_update)
        vehicle.stale = stale

    commands = {}
    for vehicle in world.vehicles:
        if vehicle.remote:
            continue
        leader = world.leader(vehicle.vehicle_id)
        gap = gap_ahead(vehicle.state, leader.state, track)
        vehicle.gap = gap
        plan = world.plan_for(vehicle, now)
        commands[vehicle.vehicle_id] = vehicle.agent.control(vehicle.state, leader.state, gap, now, plan)
        if world.recorder is not None:
            world.recorder.record(step, now, vehicle.vehicle_id, vehicle.state,
                                  commands[vehicle.vehicle_id], gap, track.zone_index(vehicle.state.s))

    for vehicle in world.vehicles:
        if vehicle.remote:
            continue
        message = vehicle.agent.v2v(vehicle.vehicle_id, now)
        if message is not None:
            world.publish_plan(message, now)

    for vehicle in world.vehicles:
        if vehicle.remote:
            state = vehicle.state
            moved = advance(state, max(state.v, 0.0) * tick, track)
            vehicle.plant = replace(vehicle.plant, vehicle=moved)
        elif isinstance(vehicle.agent, CycleAgent):
            vehicle.plant = cycle_plant(vehicle.agent, now + tick, track, commands[vehicle.vehicle_id])
        else:
            vehicle.plant = plant_integrate(vehicle.plant, commands[vehicle.vehicle_id], tick,
                                            track, world.tau_a)

    world.time = now + tick
    return world


def cycle_plant(agent, t, track, u=0.0):
    odometer, v, a = agent.kinematics(t)
    lap, s = divmod(odometer, track.circuit_length)
    heading = track.position_xy(s)[2]
    state = VehicleState(s=s, v=v, a=a, heading=heading, lap=int(lap), brake_on=a < 0.0, timestamp=t)
    return PlantState(vehicle=state, u=u)


def string_indices(scenario):
    """Indices of the simulated CAVs ahead of the ego, lead CAV first."""
    if scenario.controller != MPC_C:
        return []
    n = scenario.n_vehicles
    return [(scenario.ego_index - k) % n for k in range(scenario.n_cav_string, 0, -1)]


def upstream_ids(scenario):
    """Vehicles following the ego, nearest first."""
    if scenario.is_cycle:
        return []
    n = scenario.n_vehicles
    count = min(scenario.upstream_count, n - 1)
    return [(scenario.ego_index + k) % n for k in range(1, count + 1)]


def build_world(scenario, config, track, cycle=None, recorder=None):
    """
    Initial world for ``scenario``: all vehicles at rest, uniformly spaced
    on the ring with the ego at s = 0, or a cycle-playing vehicle d_min
    ahead of the ego for drive-cycle scenarios. The ego slot is remote.
    """
    common = dict(tick=scenario.tick, v2v_delay=config['v2v_delay'],
                  stale_timeout=config['stale_timeout'], tau_a=config['mpc.tau_a'],
                  recorder=recorder)
    if scenario.is_cycle:
        return World(_cycle_vehicles(scenario, config, track, cycle), track, **common)

    n = scenario.n_vehicles
    spacing = track.circuit_length / n
    if spacing <= track.vehicle_length:
        logger.warning("%d vehicles leave no room on a %.0f m circuit", n, track.circuit_length)
    rng = np.random.default_rng(scenario.seed)
    string = string_indices(scenario)
    vehicles = []
    for i in range(n):
        s = ((scenario.ego_index - i) % n) * spacing
        plant = PlantState(vehicle=VehicleState(s=s, heading=track.position_xy(s)[2]))
        if i == scenario.ego_index:
            vehicles.append(VirtualVehicle(vehicle_id=i, plant=plant, remote=True))
            continue
        if i in string:
            name = MPC_U if i == string[0] else MPC_C
            agent = build_agent(name, config, track)
        else:
            agent = build_agent(WIE, config, track, rng=rng)
        vehicles.append(VirtualVehicle(vehicle_id=i, plant=plant, agent=agent))
    logger.info("built %s world: %d vehicles %.1f m apart, ego %d, CAV string %s",
                scenario.kind, n, spacing, scenario.ego_index, string or 'none')
    return World(vehicles, track, **common)


def _cycle_vehicles(scenario, config, track, cycle):
    start = track.vehicle_length + config['mpc.d_min']
    fitted = modify_cycle_for_track(cycle, track, laps=scenario.laps + 1, start_s=start, tick=scenario.tick)
    plan_steps = config['mpc_c.N'] if scenario.controller == MPC_C else 0
    agent = CycleAgent(fitted, plan_steps=plan_steps, dt_h=config['mpc.dt_h'])
    pv = VirtualVehicle(vehicle_id=0, plant=cycle_plant(agent, 0.0, track), agent=agent)
    ego = VirtualVehicle(vehicle_id=scenario.ego_index, remote=True, plant=PlantState())
    return [pv, ego]
