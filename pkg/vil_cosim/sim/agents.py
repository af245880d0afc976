"""
Per-vehicle decision makers shared by the server's virtual vehicles and
the ego client.

Every agent answers ``control(ego, pv, gap, now, plan)`` with an
acceleration command. MPC agents also publish their planned trajectory as
a V2V frame.
"""
import logging

import numpy as np

from drivers.controllers import IdmDriver, WiedemannDriver
from drivers.params import IdmParams, Wie99Params
from mpc.controller import MpcController
from mpc.params import MpcParams
from qpsolver.admm import AdmmSettings
from wire.messages import V2VPlan, VehicleType

from .scenario import IDM, MPC_C, MPC_U, WIE

logger = logging.getLogger(__name__)


class Agent:
    name = ''
    vehicle_type = VehicleType.HUMAN

    def control(self, ego, pv, gap, now, plan=None):
        raise NotImplementedError

    def v2v(self, vehicle_id, now):
        return None


class DriverAgent(Agent):
    """A car-following model driving one vehicle."""

    def __init__(self, driver):
        self.driver = driver
        self.name = driver.name

    def control(self, ego, pv, gap, now, plan=None):
        return self.driver.command(ego, pv, gap)


class MpcAgent(Agent):
    """
    An MPC-driven CAV. A connected agent follows the latest plan of its
    preceding vehicle when it has one and predicts the vehicle otherwise.
    """
    vehicle_type = VehicleType.CAV

    def __init__(self, controller):
        self.controller = controller
        self.name = controller.params.name.upper()
        self.result = None

    @property
    def connected(self):
        return self.controller.params.connected

    def control(self, ego, pv, gap, now, plan=None):
        if not self.connected:
            plan = None
        self.result = self.controller.step(ego, gap, pv=pv, plan=plan, now=now)
        return self.result.u0

    def v2v(self, vehicle_id, now):
        if self.result is None:
            return None
        return V2VPlan(vehicle_id=vehicle_id, timestamp=now, s=self.result.plan,
                       v_final=max(self.result.v_final, 0.0))


class CycleAgent(Agent):
    """
    Plays a track-fitted drive cycle. Its state is prescribed, so the
    command is only the cycle's own acceleration. When asked for V2V it
    publishes the cycle's upcoming positions.
    """
    name = 'CYCLE'

    def __init__(self, cycle, plan_steps=0, dt_h=1.0):
        self.cycle = cycle
        self.plan_steps = plan_steps
        self.dt_h = dt_h

    @property
    def finished_at(self):
        return self.cycle.duration

    def kinematics(self, now):
        return (float(self.cycle.position_at(now)), float(self.cycle.speed_at(now)),
                float(self.cycle.accel_at(now)))

    def control(self, ego, pv, gap, now, plan=None):
        return float(self.cycle.accel_at(now))

    def v2v(self, vehicle_id, now):
        if not self.plan_steps:
            return None
        times = now + self.dt_h * np.arange(1, self.plan_steps + 1)
        return V2VPlan(vehicle_id=vehicle_id, timestamp=now, s=self.cycle.position_at(times),
                       v_final=float(self.cycle.speed_at(times[-1])))


def build_agent(name, config, track, rng=None):
    """
    Agent for controller ``name`` built from the merged config. ``rng``
    draws the Wiedemann driver random value; without it the configured
    value is used.
    """
    lead_time = config['limit_lead_time']
    if name == WIE:
        params = Wie99Params.from_config(config)
        if rng is not None:
            params = params.with_driver_random(float(rng.random()))
        return DriverAgent(WiedemannDriver(params, track, lead_time=lead_time))
    if name == IDM:
        return DriverAgent(IdmDriver(IdmParams.from_config(config), track, lead_time=lead_time))
    if name in (MPC_U, MPC_C):
        params = MpcParams.from_config(config, name)
        return MpcAgent(MpcController(params, track, AdmmSettings.from_config(config)))
    raise ValueError(f'unknown controller {name!r}')
