"""
Scenario runs, in process or over UDP.

Loopback runs step the server and the ego client alternately on a
simulated clock through an in-memory channel, so a seed fixes every
number. Networked runs put the server loop on its own thread behind a UDP
socket, paced against the wall clock, and drive the client from the Sim2V
frames it receives.
"""
import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from django.conf import settings
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from energy.metrics import flow_metrics, plot_data, write_metrics_csv
from energy.params import ProxyParams
from track.geometry import TrackMap
from wire.transport import LoopbackChannel, UdpEndpoint

from .agents import build_agent
from .client import EgoClient
from .cycles import load_cycle
from .plant import PlantState
from .server import SimServer, serve
from .trace import TraceRecorder
from .world import build_world, string_indices, upstream_ids

logger = logging.getLogger(__name__)

LOOPBACK = 'loopback'
NETWORKED = 'networked'
MODES = (LOOPBACK, NETWORKED)

SERVER_ADDRESS = ('server', 0)
CLIENT_ADDRESS = ('client', 0)
SUBSCRIBE_TIMEOUT = 5.0


class SimClock:
    """Settable clock for loopback runs."""

    def __init__(self, now=0.0):
        self.now = now

    def __call__(self):
        return self.now


@dataclass
class RunResult:
    scenario: object
    mode: str
    trace: pd.DataFrame
    ticks: int
    wall_time: float
    report: Optional[object] = None
    paths: dict = field(default_factory=dict)

    @property
    def sim_time(self):
        return self.ticks * self.scenario.tick

    @property
    def speedup(self):
        return self.sim_time / self.wall_time if self.wall_time > 0 else float('inf')


def default_config():
    return dict(settings.VIL_COSIM)


def scenario_cycle(scenario, config):
    """The drive cycle a cycle scenario plays, loaded from its configured file."""
    if not scenario.is_cycle:
        return None
    path = config[f'cycle.{scenario.kind}']
    if not path:
        raise ValidationError({
            'cycle': _('No drive cycle file is configured for %(kind)s; set cycle.%(kind)s.') % {
                'kind': scenario.kind}
        })
    return load_cycle(path, scale=config[f'cycle.{scenario.kind}_scale'], tick=scenario.tick,
                      name=scenario.kind)


def recorded_ids(scenario, config):
    if config['trace_all_vehicles'] or scenario.is_cycle:
        return None
    ego = scenario.ego_index
    leader = (ego - 1) % scenario.n_vehicles
    return {ego, leader, *upstream_ids(scenario), *string_indices(scenario)}


def build_client(scenario, config, track, endpoint, server_address, recorder=None, clock=time.time):
    rng = np.random.default_rng([scenario.seed, scenario.ego_id])
    agent = build_agent(scenario.controller, config, track, rng=rng)
    return EgoClient(
        vehicle_id=scenario.ego_id,
        agent=agent,
        track=track,
        endpoint=endpoint,
        server_address=server_address,
        tick=scenario.tick,
        tau_a=config['mpc.tau_a'],
        stale_timeout=config['stale_timeout'],
        plan_timeout=config['stale_timeout'] + config['v2v_delay'],
        plant=PlantState(),
        recorder=recorder,
        clock=clock,
    )


def run_loopback(scenario, config, track, cycle=None):
    """Lockstep run through an in-memory channel; returns (trace, ticks)."""
    clock = SimClock()
    channel = LoopbackChannel(clock=clock)
    recorder = TraceRecorder(recorded_ids(scenario, config))
    world = build_world(scenario, config, track, cycle=cycle, recorder=recorder)
    server = SimServer(world, channel.endpoint(SERVER_ADDRESS), clock=clock)
    client = build_client(scenario, config, track, channel.endpoint(CLIENT_ADDRESS), SERVER_ADDRESS,
                          recorder=recorder, clock=clock)
    client.subscribe()
    step = 0
    while client.state.lap < scenario.laps:
        now = step * scenario.tick
        if now >= scenario.max_time:
            logger.warning("run stopped at the %.0f s limit after %d lap(s)", now, client.state.lap)
            break
        clock.now = now
        server.step(now)
        client.receive(client.endpoint.poll())
        client.step(now)
        step += 1
    client.leave()
    return recorder.frame(), step


def drive_client(client, laps, tick, time_scale=1.0, max_time=3600.0, sync_period=1.0,
                 clock=time.monotonic):
    """
    Networked client loop. Sim2V timestamps set the simulated time; when
    frames stop arriving the client keeps ticking on its own and the stale
    fallback takes over.
    """
    client.subscribe()
    client.sync_clock()
    wait = client.stale_timeout / time_scale
    started = last_sync = clock()
    now = None
    steps = 0
    while client.state.lap < laps:
        fresh = client.receive(client.endpoint.poll(timeout=wait))
        if fresh and (now is None or client.sim2v_time > now):
            now = client.sim2v_time
        elif now is None:
            if clock() - started > SUBSCRIBE_TIMEOUT:
                raise ValidationError(_('The server did not answer the subscription.'))
            client.subscribe()
            continue
        elif fresh:
            continue
        else:
            now += tick
        if now >= max_time:
            logger.warning("client stopped at the %.0f s limit", now)
            break
        client.step(now)
        steps += 1
        if clock() - last_sync > sync_period:
            client.sync_clock()
            last_sync = clock()
    client.leave()
    return steps


def run_networked(scenario, config, track, cycle=None, host='127.0.0.1', port=0):
    """Server thread and ego client over localhost UDP; returns (trace, ticks)."""
    time_scale = config['time_scale']
    server_recorder = TraceRecorder(recorded_ids(scenario, config))
    client_recorder = TraceRecorder({scenario.ego_id})
    world = build_world(scenario, config, track, cycle=cycle, recorder=server_recorder)
    with UdpEndpoint(host, port) as server_endpoint, UdpEndpoint(host, 0) as client_endpoint:
        server = SimServer(world, server_endpoint)
        thread = threading.Thread(
            target=serve, name='sim-server',
            kwargs=dict(server=server, tick=scenario.tick, time_scale=time_scale,
                        max_time=scenario.max_time + 1.0, idle_timeout=SUBSCRIBE_TIMEOUT),
            daemon=True,
        )
        thread.start()
        client = build_client(scenario, config, track, client_endpoint, server_endpoint.address,
                              recorder=client_recorder)
        try:
            steps = drive_client(client, scenario.laps, scenario.tick, time_scale, scenario.max_time,
                                 config['clock_sync_period'])
        finally:
            client.leave()
            thread.join(timeout=10.0)
    trace = pd.concat([server_recorder.frame(), client_recorder.frame()], ignore_index=True)
    return trace.sort_values(['tick', 'vehicle_id'], kind='stable').reset_index(drop=True), steps


def write_artifacts(result, out_dir, config):
    """Trace, plot data and metrics CSVs of one run in ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scenario = result.scenario
    trace_path = out_dir / 'trace.csv'
    result.trace.to_csv(trace_path, index=False, float_format='%.6f')
    vehicles = [scenario.ego_id, (scenario.ego_index - 1) % scenario.n_vehicles]
    plot_path = out_dir / 'plot.csv'
    plot_data(result.trace, vehicles, ProxyParams.from_config(config)).to_csv(
        plot_path, index=False, float_format='%.6f')
    paths = {'trace': trace_path, 'plot': plot_path}
    if result.report is not None:
        metrics_path = out_dir / 'metrics.csv'
        paths['laps'] = write_metrics_csv(result.report, metrics_path)
        paths['metrics'] = metrics_path
    result.paths = paths
    return paths


def run_scenario(scenario, config=None, mode=LOOPBACK, out_dir=None, port=0):
    """
    Run one scenario and compute its metrics. Artifacts go to ``out_dir``
    when given.
    """
    config = config or default_config()
    track = TrackMap.from_config(config)
    cycle = scenario_cycle(scenario, config)
    logger.info("run %s/%s seed %d (%s): %d vehicles, %d laps", scenario.kind, scenario.label,
                scenario.seed, mode, scenario.n_vehicles, scenario.laps)
    started = time.perf_counter()
    if mode == NETWORKED:
        trace, ticks = run_networked(scenario, config, track, cycle=cycle, host=config['server_host'],
                                     port=port)
    else:
        trace, ticks = run_loopback(scenario, config, track, cycle=cycle)
    result = RunResult(scenario=scenario, mode=mode, trace=trace, ticks=ticks,
                       wall_time=time.perf_counter() - started)
    try:
        result.report = flow_metrics(
            trace, scenario.ego_id, track, ProxyParams.from_config(config),
            laps=scenario.laps, discard_first_lap=scenario.discard_first_lap,
            upstream_ids=upstream_ids(scenario), scenario=scenario.kind, controller=scenario.label,
        )
    finally:
        if out_dir is not None:
            write_artifacts(result, out_dir, config)
    logger.info("run %s/%s finished: %.0f s simulated in %.1f s (%.1fx)", scenario.kind,
                scenario.label, result.sim_time, result.wall_time, result.speedup)
    return result
