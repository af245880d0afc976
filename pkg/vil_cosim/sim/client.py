"""
Vehicle client: runs the ego controller against the server's view of the
surrounding traffic.

Each tick the client reads the preceding vehicle out of the latest Sim2V,
asks its agent for a command, integrates the ego plant and reports the new
probe. Without a fresh Sim2V it holds the comfortable deceleration.
"""
import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Optional

from mpc.preview import plan_from_v2v
from track.geometry import VehicleState
from wire.clock import ClockFilter
from wire.messages import ProbeData, Sim2V, Subscription, TimeSync, V2Sim, V2VPlan

from .agents import MpcAgent
from .plant import TAU_A, PlantState, plant_integrate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PvObservation:
    vehicle_id: int
    state: VehicleState
    gap: float
    timestamp: float


@dataclass
class ClientStep:
    u: float
    plant: PlantState
    v2sim: V2Sim
    v2v: Optional[V2VPlan] = None
    pv: Optional[PvObservation] = None
    fallback: bool = False


def observe_pv(sim2v, ego, track, previous=None):
    """
    Preceding vehicle from a Sim2V frame, placed on the ego's odometer.
    Its acceleration is the speed change since ``previous``.
    """
    ahead = [entry for entry in sim2v.vehicles if entry.dx > 0]
    if not ahead:
        return None
    entry = min(ahead, key=lambda item: item.dx)
    odometer = ego.odometer(track) + entry.dx
    lap, s = divmod(odometer, track.circuit_length)
    a = 0.0
    if previous is not None and previous.vehicle_id == entry.vehicle_id and entry.timestamp > previous.timestamp:
        a = (entry.v - previous.state.v) / (entry.timestamp - previous.timestamp)
    elif previous is not None and previous.vehicle_id == entry.vehicle_id:
        a = previous.state.a
    state = VehicleState(s=s, v=entry.v, a=a, heading=entry.heading, lap=int(lap),
                         brake_on=bool(entry.brake_on), timestamp=entry.timestamp)
    gap = max(entry.dx - track.vehicle_length, 0.0)
    return PvObservation(vehicle_id=entry.vehicle_id, state=state, gap=gap, timestamp=entry.timestamp)


def probe_for(state, track):
    x, y, heading = track.position_xy(state.s)
    return ProbeData(v=max(state.v, 0.0), x=x, y=y, heading=heading,
                     brake_on=int(state.brake_on), timestamp=state.timestamp)


def client_tick(plant, sim2v, v2v, agent, now, track, vehicle_id, tick=0.1, tau_a=TAU_A,
                previous_pv=None, stale=False):
    """
    One control tick of the ego.

    ``sim2v`` and ``v2v`` are the latest frames received (or None). With no
    usable Sim2V, or when it is ``stale``, the command falls back to the
    track's comfortable deceleration and no plan is published.
    """
    pv = None if sim2v is None or stale else observe_pv(sim2v, plant.vehicle, track, previous_pv)
    if pv is None:
        u = track.a_c
        fallback = True
    else:
        plan = None
        if v2v is not None and v2v.vehicle_id == pv.vehicle_id and isinstance(agent, MpcAgent):
            pv_odometer = plant.vehicle.odometer(track) + pv.gap + track.vehicle_length
            plan = plan_from_v2v(v2v, pv_odometer, track.circuit_length,
                                 agent.controller.params.dt_h)
        u = agent.control(plant.vehicle, pv.state, pv.gap, now, plan)
        fallback = False

    new = plant_integrate(replace(plant, vehicle=replace(plant.vehicle, timestamp=now)), u, tick,
                          track, tau_a)
    message = None if fallback else agent.v2v(vehicle_id, now)
    return ClientStep(u=u, plant=new, v2sim=V2Sim(vehicle_id=vehicle_id, probe=probe_for(new.vehicle, track)),
                      v2v=message, pv=pv, fallback=fallback)


class EgoClient:
    """
    The ego's side of a run. ``receive`` stores the newest frames; ``step``
    runs one tick at time ``now`` and sends the probe (and plan) back.
    """

    def __init__(self, vehicle_id, agent, track, endpoint, server_address, tick=0.1,
                 tau_a=TAU_A, stale_timeout=0.5, plan_timeout=0.6, plant=None, recorder=None,
                 clock=time.time):
        self.vehicle_id = vehicle_id
        self.agent = agent
        self.track = track
        self.endpoint = endpoint
        self.server_address = server_address
        self.tick = tick
        self.tau_a = tau_a
        self.stale_timeout = stale_timeout
        self.plan_timeout = plan_timeout
        self.plant = plant or PlantState()
        self.recorder = recorder
        self.clock = clock
        self.clock_filter = ClockFilter(clock=clock)
        self.sim2v = None
        self.sim2v_time = -math.inf
        self.v2v = None
        self.pv = None
        self.fallback = False

    @property
    def state(self):
        return self.plant.vehicle

    def subscribe(self, sub_flag=1):
        self.endpoint.send(Subscription(vehicle_id=self.vehicle_id, probe=probe_for(self.state, self.track),
                                        sub_flag=sub_flag), self.server_address)

    def leave(self):
        self.subscribe(sub_flag=0)

    def sync_clock(self):
        self.endpoint.send(TimeSync(t0=self.clock()), self.server_address)

    def receive(self, envelopes):
        """Keep the newest Sim2V and V2V; returns True if a Sim2V arrived."""
        fresh = False
        for envelope in envelopes:
            message = envelope.message
            if isinstance(message, Sim2V):
                stamps = [entry.timestamp for entry in message.vehicles]
                self.sim2v = message
                self.sim2v_time = max(stamps) if stamps else envelope.received_at
                fresh = True
            elif isinstance(message, V2VPlan):
                self.v2v = message
            elif isinstance(message, TimeSync):
                best = self.clock_filter.add(message.t0, message.t1, message.t2, envelope.received_at)
                if best is not None:
                    logger.debug("clock offset %.6f s over %.6f s round trip", best.offset, best.round_trip)
        return fresh

    def step(self, now):
        behind = now - self.state.timestamp
        if behind > 1e-9:
            # frames were skipped; hold the last command up to now
            self.plant = plant_integrate(self.plant, self.plant.u, behind, self.track, self.tau_a)
        stale = now - self.sim2v_time > self.stale_timeout
        v2v = self.v2v if self.v2v is not None and now - self.v2v.timestamp <= self.plan_timeout else None
        result = client_tick(self.plant, self.sim2v, v2v, self.agent, now, self.track,
                             self.vehicle_id, self.tick, self.tau_a, self.pv, stale)
        if result.fallback and not self.fallback:
            logger.warning("vehicle %s: no fresh Sim2V at t=%.1f; braking at %.1f m/s²",
                           self.vehicle_id, now, self.track.a_c)
        elif self.fallback and not result.fallback:
            logger.info("vehicle %s: traffic view restored at t=%.1f", self.vehicle_id, now)
        self.fallback = result.fallback
        if self.recorder is not None:
            gap = result.pv.gap if result.pv is not None else math.nan
            self.recorder.record(int(round(now / self.tick)), now, self.vehicle_id, self.plant.vehicle,
                                 result.u, gap, self.track.zone_index(self.state.s), stale=result.fallback)
        self.pv = result.pv or self.pv
        self.plant = result.plant
        self.endpoint.send(result.v2sim, self.server_address)
        if result.v2v is not None:
            self.endpoint.send(result.v2v, self.server_address)
        return result
