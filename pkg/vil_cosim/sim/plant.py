"""
Longitudinal plant used for every simulated vehicle and for the ego.

The same double integrator with first-order actuator lag the MPC plans
with, sampled exactly at the tick length.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from mpc.model import discretize
from track.geometry import VehicleState, advance

from .validators import validate_tick

TAU_A = 0.275


@dataclass
class PlantState:
    vehicle: VehicleState = field(default_factory=VehicleState)
    u: float = 0.0

    @property
    def s(self):
        return self.vehicle.s

    @property
    def v(self):
        return self.vehicle.v

    @property
    def a(self):
        return self.vehicle.a


def plant_integrate(plant, u, dt, track, tau_a=TAU_A):
    """
    Hold ``u`` for ``dt`` seconds and return the new plant state.

    The vehicle never reverses: a step that would end below zero speed
    stops the vehicle where it stands and zeroes its acceleration.
    """
    validate_tick(dt)
    model = discretize(tau_a, dt)
    state = plant.vehicle
    x = model.step(np.array([0.0, state.v, state.a]), u)
    ds, v, a = float(x[0]), float(x[1]), float(x[2])
    if v < 0.0:
        v, a = 0.0, 0.0
    ds = max(ds, 0.0)
    moved = advance(state, ds, track)
    vehicle = replace(moved, v=v, a=a, brake_on=u < 0.0, timestamp=state.timestamp + dt)
    return PlantState(vehicle=vehicle, u=float(u))
