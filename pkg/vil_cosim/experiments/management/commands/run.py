from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from experiments.compare import compare
from experiments.config import load_config
from experiments.manifest import MATRIX_ALL, RunEntry, RunManifest, run_manifest, write_comparisons
from experiments.models import ExperimentRun
from sim.runner import LOOPBACK, MODES
from sim.scenario import CONTROLLERS, MICROSIM, SCENARIOS, WIE


class Command(BaseCommand):
    help = "Run one scenario/controller pair, or the whole matrix, and write traces and metrics."

    def add_arguments(self, parser):
        parser.add_argument('--scenario', default=MICROSIM, choices=SCENARIOS)
        parser.add_argument('--controller', default=WIE, choices=CONTROLLERS)
        parser.add_argument('--matrix', choices=[MATRIX_ALL],
                            help="Run every scenario with every controller")
        parser.add_argument('--laps', type=int, help="Override the scenario's lap count")
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--mode', default=LOOPBACK, choices=MODES)
        parser.add_argument('--port', type=int, default=0, help="Server port for networked runs (0 picks one)")
        parser.add_argument('--config', help="Flat key = value file overriding the defaults")
        parser.add_argument('--out', default='runs', help="Output directory")
        parser.add_argument('--jobs', type=int, default=1, help="Parallel runs")
        parser.add_argument('--no-record', action='store_true', help="Do not store results in the database")

    def handle(self, *args, **options):
        try:
            config = load_config(options['config'])
            if options['matrix']:
                manifest = RunManifest.matrix(options['out'], seed=options['seed'], mode=options['mode'],
                                              laps=options['laps'], port=options['port'])
            else:
                entry = RunEntry(options['scenario'], options['controller'])
                manifest = RunManifest([entry], options['out'], seed=options['seed'], mode=options['mode'],
                                       laps=options['laps'], port=options['port'])
        except ValidationError as e:
            raise CommandError('; '.join(e.messages))

        runs = {} if options['no_record'] else self._start_runs(manifest, config)
        try:
            outcomes = run_manifest(manifest, config, jobs=options['jobs'])
        except ValidationError as e:
            for run in runs.values():
                run.fail('; '.join(e.messages))
            raise CommandError('; '.join(e.messages))

        for outcome in outcomes:
            run = runs.get(outcome.entry)
            if run is not None:
                if outcome.ok:
                    run.complete(outcome.report)
                else:
                    run.fail(outcome.error)
            if outcome.ok:
                report = outcome.report
                self.stdout.write(self.style.SUCCESS(
                    f"{outcome.entry}: travel {report.travel_time:.1f} s, mean gap {report.mean_gap:.1f} m "
                    f"({outcome.wall_time:.0f} s) -> {outcome.run_dir}"))
            else:
                self.stderr.write(f"{outcome.entry}: {outcome.error}")

        for scenario, path in write_comparisons(outcomes, manifest.out_dir).items():
            self.stdout.write(f"{scenario} comparison: {path}")
            if options['verbosity'] > 1:
                table = compare(outcome.report for outcome in outcomes
                                if outcome.ok and outcome.entry.scenario == scenario)
                self.stdout.write(table.formatted().to_string())

        failed = [outcome for outcome in outcomes if not outcome.ok]
        if failed:
            raise CommandError(f"{len(failed)} of {len(outcomes)} run(s) failed; artifacts kept in {manifest.out_dir}")

    def _start_runs(self, manifest, config):
        """Create a RUNNING record for every entry before any of them executes."""
        runs = {}
        for entry in manifest.entries:
            try:
                laps = manifest.scenario_for(entry, config).laps
            except ValidationError:
                laps = manifest.laps or 1
            run = ExperimentRun(scenario=entry.scenario, controller=entry.controller,
                                seed=manifest.seed, mode=manifest.mode, laps=laps,
                                out_dir=str(Path(manifest.run_dir(entry)).resolve()))
            run.start()
            runs[entry] = run
        return runs
