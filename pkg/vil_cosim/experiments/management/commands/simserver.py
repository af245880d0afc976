from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from experiments.config import load_config
from sim.runner import recorded_ids, scenario_cycle
from sim.scenario import CONTROLLERS, MICROSIM, SCENARIOS, WIE, ScenarioConfig
from sim.server import SimServer, serve
from sim.trace import TraceRecorder
from sim.world import build_world
from track.geometry import TrackMap
from wire.transport import UdpEndpoint


class Command(BaseCommand):
    help = "Serve a scenario's virtual traffic over UDP until the ego client leaves."

    def add_arguments(self, parser):
        parser.add_argument('--scenario', default=MICROSIM, choices=SCENARIOS)
        parser.add_argument('--controller', default=WIE, choices=CONTROLLERS,
                            help="The ego's controller; sets up the CAV string for mpc-c")
        parser.add_argument('--laps', type=int)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--host', help="Bind address (default server_host)")
        parser.add_argument('--port', type=int, help="Bind port (default server_port)")
        parser.add_argument('--config')
        parser.add_argument('--out', default='runs/server', help="Directory for the server trace")
        parser.add_argument('--idle-timeout', type=float, default=60.0,
                            help="Give up when no client subscribes within this many seconds")

    def handle(self, *args, **options):
        try:
            config = load_config(options['config'])
            overrides = {'seed': options['seed']}
            if options['laps']:
                overrides['laps'] = options['laps']
            scenario = ScenarioConfig.from_config(config, options['scenario'], options['controller'], **overrides)
            track = TrackMap.from_config(config)
            recorder = TraceRecorder(recorded_ids(scenario, config))
            world = build_world(scenario, config, track, cycle=scenario_cycle(scenario, config), recorder=recorder)
        except ValidationError as e:
            raise CommandError('; '.join(e.messages))

        host = options['host'] or config['server_host']
        port = config['server_port'] if options['port'] is None else options['port']
        with UdpEndpoint(host, port) as endpoint:
            self.stdout.write(f"serving {scenario.kind}/{scenario.label} on {host}:{endpoint.address[1]}, "
                              f"ego vehicle {scenario.ego_id}")
            server = SimServer(world, endpoint)
            try:
                steps = serve(server, scenario.tick, time_scale=config['time_scale'],
                              max_time=scenario.max_time, idle_timeout=options['idle_timeout'])
            except KeyboardInterrupt:
                steps = None
                self.stderr.write("interrupted")

        out = Path(options['out'])
        out.mkdir(parents=True, exist_ok=True)
        path = recorder.write_csv(out / 'server_trace.csv')
        if not server.departed:
            raise CommandError(f"no client completed a run; partial trace in {path}")
        self.stdout.write(self.style.SUCCESS(f"{steps} tick(s) served; trace in {path}"))
