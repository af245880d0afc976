"""
Simulation server: owns the world and talks to vehicle clients.

A step polls the endpoint, folds client reports into the world, forwards
released V2V plans to the clients that follow their senders, sends every
client its Sim2V view and then advances the world by one tick.
"""
import logging
import time

from wire.messages import Sim2V, Subscription, TimeSync, V2Sim, V2VPlan

from .world import server_tick

logger = logging.getLogger(__name__)


class SimServer:

    def __init__(self, world, endpoint, clock=time.time):
        self.world = world
        self.endpoint = endpoint
        self.clock = clock
        self.clients = {}
        self.departed = set()

    @property
    def finished(self):
        """True once every client that joined has left."""
        return bool(self.departed) and not self.clients

    def handle(self, envelope, now):
        message = envelope.message
        if isinstance(message, Subscription):
            self._subscription(message, envelope.address)
        elif isinstance(message, V2Sim):
            if message.vehicle_id not in self.clients:
                logger.debug("probe from unsubscribed vehicle %s ignored", message.vehicle_id)
                return
            s = self.world.track.project(message.probe.x, message.probe.y)
            self.world.inject_probe(message.vehicle_id, s, message.probe)
        elif isinstance(message, V2VPlan):
            self.world.publish_plan(message, now)
        elif isinstance(message, TimeSync):
            self.endpoint.send(TimeSync(t0=message.t0, t1=envelope.received_at, t2=self.clock()),
                               envelope.address)
        elif isinstance(message, Sim2V):
            logger.debug("unexpected Sim2V from %s", envelope.address)

    def _subscription(self, message, address):
        vehicle_id = message.vehicle_id
        if message.sub_flag:
            try:
                vehicle = self.world.vehicle(vehicle_id)
            except KeyError:
                logger.warning("subscription for unknown vehicle %s from %s", vehicle_id, address)
                return
            if not vehicle.remote:
                logger.warning("vehicle %s is simulated on the server; subscription refused", vehicle_id)
                return
            self.clients[vehicle_id] = address
            logger.info("vehicle %s subscribed from %s", vehicle_id, address)
        elif self.clients.pop(vehicle_id, None) is not None:
            self.departed.add(vehicle_id)
            logger.info("vehicle %s left", vehicle_id)

    def step(self, now):
        for envelope in self.endpoint.poll():
            self.handle(envelope, now)
        for message in self.world.release_plans(now):
            for vehicle_id, address in self.clients.items():
                if self.world.leader(vehicle_id).vehicle_id == message.vehicle_id:
                    self.endpoint.send(message, address)
        for vehicle_id, address in self.clients.items():
            self.endpoint.send(self.world.sim2v_for(vehicle_id, now), address)
        server_tick(self.world, now)


def serve(server, tick, time_scale=1.0, max_time=3600.0, idle_timeout=5.0, clock=time.monotonic,
          sleep=time.sleep):
    """
    Run ``server`` against the wall clock, one step every tick / time_scale
    seconds from the first subscription, until its clients have left,
    ``max_time`` of simulated time has passed, or nobody subscribed within
    ``idle_timeout`` seconds.
    """
    started = clock()
    epoch = None
    step = 0
    while not server.finished:
        if not server.clients and not server.departed:
            if clock() - started > idle_timeout:
                logger.warning("no client subscribed within %.1f s", idle_timeout)
                break
            for envelope in server.endpoint.poll(timeout=tick / time_scale):
                server.handle(envelope, 0.0)
            continue
        if epoch is None:
            epoch = clock()
        now = step * tick
        if now >= max_time:
            logger.warning("server reached the %.0f s time limit", max_time)
            break
        server.step(now)
        step += 1
        lag = epoch + step * tick / time_scale - clock()
        if lag > 0:
            sleep(lag)
    return step
