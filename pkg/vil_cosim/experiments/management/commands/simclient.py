from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from experiments.config import load_config
from sim.runner import build_client, drive_client
from sim.scenario import CONTROLLERS, MICROSIM, SCENARIOS, WIE, ScenarioConfig
from sim.trace import TraceRecorder
from track.geometry import TrackMap
from wire.transport import UdpEndpoint


class Command(BaseCommand):
    help = "Drive the ego vehicle against a running simserver."

    def add_arguments(self, parser):
        parser.add_argument('--scenario', default=MICROSIM, choices=SCENARIOS)
        parser.add_argument('--controller', default=WIE, choices=CONTROLLERS)
        parser.add_argument('--laps', type=int)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--server', help="host:port of the server (default server_host:server_port)")
        parser.add_argument('--port', type=int, help="Local port (default client_port)")
        parser.add_argument('--config')
        parser.add_argument('--out', default='runs/client', help="Directory for the ego trace")

    def handle(self, *args, **options):
        try:
            config = load_config(options['config'])
            overrides = {'seed': options['seed']}
            if options['laps']:
                overrides['laps'] = options['laps']
            scenario = ScenarioConfig.from_config(config, options['scenario'], options['controller'], **overrides)
            track = TrackMap.from_config(config)
        except ValidationError as e:
            raise CommandError('; '.join(e.messages))

        if options['server']:
            host, _, port = options['server'].rpartition(':')
            if not host or not port.isdigit():
                raise CommandError(f"--server must be host:port, got {options['server']!r}")
            server_address = (host, int(port))
        else:
            server_address = (config['server_host'], config['server_port'])
        local_port = config['client_port'] if options['port'] is None else options['port']

        recorder = TraceRecorder({scenario.ego_id})
        with UdpEndpoint('0.0.0.0', local_port) as endpoint:
            client = build_client(scenario, config, track, endpoint, server_address, recorder=recorder)
            self.stdout.write(f"vehicle {scenario.ego_id} ({scenario.label}) -> {server_address[0]}:{server_address[1]}")
            try:
                steps = drive_client(client, scenario.laps, scenario.tick, config['time_scale'],
                                     scenario.max_time, config['clock_sync_period'])
            except ValidationError as e:
                raise CommandError('; '.join(e.messages))
            except KeyboardInterrupt:
                client.leave()
                steps = None
                self.stderr.write("interrupted")

        out = Path(options['out'])
        out.mkdir(parents=True, exist_ok=True)
        path = recorder.write_csv(out / 'client_trace.csv')
        self.stdout.write(self.style.SUCCESS(f"{steps} tick(s) driven, {client.state.lap} lap(s); trace in {path}"))
