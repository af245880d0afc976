import tempfile
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, TestCase
from django.urls import reverse
from rest_framework import status
from rest_framework.test import APITestCase

from energy.metrics import LapMetrics, MetricsReport
from sim.runner import NETWORKED

from .compare import ComparisonTable, compare, format_percent, percent_change
from .config import env_name, load_config, read_config_file
from .exceptions import ScenarioMismatch
from .manifest import RunEntry, RunManifest, RunOutcome, run_manifest, write_comparisons
from .models import ExperimentRun, LapRecord


def make_report(controller='WIE', scenario='microsim', **values):
    fields = dict(
        travel_time=250.0, avg_headway=3.47, mean_gap=60.0, max_gap=120.0, mean_center_gap=65.0,
        max_center_gap=125.0, min_gap=20.0, net_energy=900000.0, fuel_litres=0.180,
        accel_sq_integral=150.0, upstream_energy=950000.0, max_overspeed=0.2,
    )
    fields.update(values)
    laps = [
        LapMetrics(lap=0, discarded=True, travel_time=130.0, avg_headway=3.1, mean_gap=55.0,
                   max_gap=110.0, energy=480000.0),
        LapMetrics(lap=1, discarded=False, travel_time=125.0, avg_headway=3.4, mean_gap=60.0,
                   max_gap=120.0, energy=450000.0),
    ]
    return MetricsReport(scenario=scenario, controller=controller, laps=laps, **fields)


def write_text(directory, name, text):
    path = Path(directory) / name
    path.write_text(text)
    return path


class ConfigTests(SimpleTestCase):
    """Test cases for run configuration loading"""

    def test_defaults(self):
        config = load_config(environ={})
        self.assertEqual(config, settings.VIL_COSIM)
        self.assertIsNot(config, settings.VIL_COSIM)

    def test_env_name(self):
        self.assertEqual(env_name('mpc_c.q_a'), 'VIL_MPC_C__Q_A')
        self.assertEqual(env_name('tick'), 'VIL_TICK')

    def test_file_overrides(self):
        """Test a config file overrides the defaults with typed values"""
        with tempfile.TemporaryDirectory() as directory:
            path = write_text(directory, 'small.cfg', (
                "# small ring\n"
                "straight_length = 120   # metres\n"
                "\n"
                "scenario.laps = 3\n"
                "trace_all_vehicles = yes\n"
                "cycle.us06 = data/us06.csv\n"
            ))
            config = load_config(path, environ={})
        self.assertEqual(config['straight_length'], 120.0)
        self.assertIsInstance(config['straight_length'], float)
        self.assertEqual(config['scenario.laps'], 3)
        self.assertIsInstance(config['scenario.laps'], int)
        self.assertIs(config['trace_all_vehicles'], True)
        self.assertEqual(config['cycle.us06'], 'data/us06.csv')
        self.assertEqual(config['tick'], settings.VIL_COSIM['tick'])

    def test_environment_wins_over_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = write_text(directory, 'run.cfg', "scenario.laps = 3\n")
            config = load_config(path, environ={'VIL_SCENARIO__LAPS': '4', 'VIL_TIME_SCALE': '5',
                                                'VIL_NOT_A_KEY': 'ignored'})
        self.assertEqual(config['scenario.laps'], 4)
        self.assertEqual(config['time_scale'], 5.0)
        self.assertNotIn('not_a_key', config)

    def test_unknown_key(self):
        """Test an unknown key is reported with its line number"""
        with tempfile.TemporaryDirectory() as directory:
            path = write_text(directory, 'bad.cfg', "tick = 0.1\nwarp_speed = 9\n")
            with self.assertRaises(ValidationError) as context:
                read_config_file(path, settings.VIL_COSIM)
        self.assertIn('config', context.exception.error_dict)
        self.assertIn('warp_speed (line 2)', str(context.exception))

    def test_malformed_line(self):
        with tempfile.TemporaryDirectory() as directory:
            path = write_text(directory, 'bad.cfg', "tick 0.1\n")
            with self.assertRaises(ValidationError) as context:
                load_config(path, environ={})
        self.assertIn('line 1', str(context.exception))

    def test_values_must_match_default_type(self):
        with tempfile.TemporaryDirectory() as directory:
            path = write_text(directory, 'bad.cfg', "scenario.laps = three\n")
            with self.assertRaises(ValidationError) as context:
                load_config(path, environ={})
        self.assertIn('is not a int', str(context.exception))
        with self.assertRaises(ValidationError):
            load_config(environ={'VIL_TRACE_ALL_VEHICLES': 'maybe'})

    def test_missing_file(self):
        with self.assertRaises(ValidationError):
            load_config('/nonexistent/run.cfg', environ={})


class CompareTests(SimpleTestCase):
    """Test cases for controller comparison tables"""

    def test_percent_change(self):
        self.assertAlmostEqual(percent_change(3.32, 3.47), -4.3228, places=4)
        self.assertIsNone(percent_change(1.0, 0.0))
        self.assertIsNone(percent_change(None, 1.0))
        self.assertIsNone(percent_change(float('nan'), 1.0))

    def test_format_percent(self):
        self.assertEqual(format_percent(-4.3228, 1), '-4.3%')
        self.assertEqual(format_percent(12.6, 0), '+13%')
        self.assertEqual(format_percent(0.0, 1), '0%')
        self.assertEqual(format_percent(-0.01, 1), '0%')
        self.assertEqual(format_percent(None, 1), 'n/a')

    def test_headway_reduction(self):
        """Test a shorter headway shows as a negative change against WIE"""
        table = compare([make_report('IDM', avg_headway=3.32), make_report('WIE')])
        self.assertIsInstance(table, ComparisonTable)
        self.assertEqual(table.baseline, 'WIE')
        self.assertEqual(table.controllers, ['WIE', 'IDM'])
        self.assertAlmostEqual(table.delta('avg_headway', 'IDM'), -4.3228, places=4)
        formatted = table.formatted()
        self.assertEqual(formatted.loc['avg_headway', 'IDM'], '3.32 (-4.3%)')
        self.assertEqual(formatted.loc['avg_headway', 'WIE'], '3.47')

    def test_identical_runs(self):
        table = compare([make_report('WIE'), make_report('MPC-U')])
        formatted = table.formatted()
        for metric in table.values.index:
            self.assertTrue(formatted.loc[metric, 'MPC-U'].endswith('(0%)'), msg=metric)

    def test_column_order(self):
        reports = [make_report(name) for name in ['MPC-C', 'IDM', 'WIE', 'MPC-U']]
        self.assertEqual(compare(reports).controllers, ['WIE', 'IDM', 'MPC-U', 'MPC-C'])

    def test_baseline_without_wie(self):
        table = compare([make_report('MPC-C', travel_time=200.0), make_report('IDM')])
        self.assertEqual(table.baseline, 'IDM')
        self.assertAlmostEqual(table.delta('travel_time', 'MPC-C'), -20.0)

    def test_missing_values(self):
        table = compare([make_report('WIE', upstream_energy=None), make_report('IDM')])
        self.assertIsNone(table.delta('upstream_energy', 'IDM'))
        self.assertEqual(table.formatted().loc['upstream_energy', 'WIE'], 'n/a')
        rows = {row['metric']: row for row in table.to_dict()['rows']}
        self.assertIsNone(rows['upstream_energy']['values']['WIE'])

    def test_single_report(self):
        with self.assertRaises(ValidationError):
            compare([make_report('WIE')])

    def test_duplicate_controller(self):
        with self.assertRaises(ValidationError) as context:
            compare([make_report('WIE'), make_report('WIE', travel_time=1.0)])
        self.assertIn('WIE', str(context.exception))

    def test_scenario_mismatch(self):
        """Test reports from two scenarios cannot be compared"""
        with self.assertRaises(ScenarioMismatch) as context:
            compare([make_report('WIE'), make_report('IDM', scenario='us06')])
        self.assertEqual(context.exception.scenarios, ('microsim', 'us06'))
        self.assertIsInstance(context.exception, ValidationError)

    def test_long_frame(self):
        table = compare([make_report('WIE'), make_report('IDM', travel_time=260.0)])
        frame = table.to_frame()
        self.assertEqual(list(frame.columns), ['scenario', 'metric', 'controller', 'value', 'delta_pct'])
        self.assertEqual(len(frame), 2 * len(table.values.index))
        row = frame[(frame['metric'] == 'travel_time') & (frame['controller'] == 'IDM')].iloc[0]
        self.assertAlmostEqual(row['delta_pct'], 4.0)


class ManifestTests(SimpleTestCase):
    """Test cases for run manifests"""

    def test_entry_names(self):
        entry = RunEntry('MicroSim', 'MPC-C')
        self.assertEqual(str(entry), 'microsim/mpc-c')
        with self.assertRaises(ValidationError):
            RunEntry('microsim', 'acc')
        with self.assertRaises(ValidationError):
            RunEntry('nedc', 'wie')

    def test_matrix(self):
        manifest = RunManifest.matrix('out', seed=3)
        self.assertEqual(len(manifest.entries), 12)
        entry = RunEntry('udds', 'idm')
        self.assertIn(entry, manifest.entries)
        self.assertEqual(manifest.run_dir(entry), Path('out') / 'udds' / 'idm-seed3')

    def test_invalid_manifest(self):
        entry = RunEntry('microsim', 'wie')
        with self.assertRaises(ValidationError):
            RunManifest([], 'out')
        with self.assertRaises(ValidationError):
            RunManifest([entry], 'out', mode='carrier-pigeon')
        with self.assertRaises(ValidationError):
            RunManifest([entry], 'out', laps=0)
        with self.assertRaises(ValidationError):
            RunManifest([entry], 'out', seed=-1)

    def test_scenario_overrides(self):
        manifest = RunManifest([RunEntry('us06', 'mpc-u')], 'out', seed=2, laps=1)
        scenario = manifest.scenario_for(manifest.entries[0], dict(settings.VIL_COSIM))
        self.assertEqual(scenario.laps, 1)
        self.assertEqual(scenario.seed, 2)
        self.assertEqual(scenario.n_vehicles, 2)

    def test_job_limits(self):
        manifest = RunManifest([RunEntry('microsim', 'wie')], 'out', mode=NETWORKED, port=47600)
        with self.assertRaises(ValidationError):
            run_manifest(manifest, dict(settings.VIL_COSIM), jobs=0)
        with self.assertRaises(ValidationError):
            run_manifest(manifest, dict(settings.VIL_COSIM), jobs=2)

    def test_write_comparisons(self):
        """Test comparison CSVs are written for scenarios with two finished runs"""
        with tempfile.TemporaryDirectory() as out:
            outcomes = [
                RunOutcome(RunEntry('microsim', 'wie'), Path(out), report=make_report('WIE')),
                RunOutcome(RunEntry('microsim', 'idm'), Path(out), report=make_report('IDM')),
                RunOutcome(RunEntry('us06', 'wie'), Path(out), report=make_report('WIE', scenario='us06')),
                RunOutcome(RunEntry('us06', 'idm'), Path(out), error='no cycle'),
            ]
            written = write_comparisons(outcomes, out)
            self.assertEqual(list(written), ['microsim'])
            self.assertTrue(written['microsim'].is_file())
            self.assertTrue((Path(out) / 'microsim' / 'comparison_long.csv').is_file())
        self.assertFalse(outcomes[3].ok)


class ExperimentRunModelTests(TestCase):
    """Test cases for the ExperimentRun model"""

    def setUp(self):
        self.run = ExperimentRun.objects.create(scenario='microsim', controller='wie', laps=2)

    def test_start(self):
        self.run.start()
        self.run.refresh_from_db()
        self.assertEqual(self.run.status, ExperimentRun.RUNNING)
        self.assertIsNotNone(self.run.started_at)

    def test_complete_stores_metrics_and_laps(self):
        """Test completing a run stores its metrics and one record per lap"""
        self.run.complete(make_report('WIE'))
        self.run.refresh_from_db()
        self.assertEqual(self.run.status, ExperimentRun.COMPLETED)
        self.assertEqual(self.run.travel_time, 250.0)
        self.assertEqual(self.run.fuel_litres, 0.180)
        self.assertEqual(self.run.lap_records.count(), 2)
        self.assertTrue(self.run.lap_records.get(lap=0).discarded)

        # completing again replaces the laps
        self.run.complete(make_report('WIE', travel_time=240.0))
        self.assertEqual(LapRecord.objects.filter(run=self.run).count(), 2)

    def test_summary(self):
        self.run.complete(make_report('WIE', avg_headway=None))
        summary = self.run.summary()
        self.assertEqual(summary.controller, 'WIE')
        self.assertEqual(summary.scenario, 'microsim')
        self.assertIsNone(summary.avg_headway)
        self.assertEqual(summary.max_gap, 120.0)

    def test_fail(self):
        self.run.fail(ValidationError('No drive cycle file is configured'))
        self.run.refresh_from_db()
        self.assertEqual(self.run.status, ExperimentRun.FAILED)
        self.assertIn('No drive cycle file', self.run.error)
        self.assertIsNotNone(self.run.finished_at)

    def test_str(self):
        self.assertEqual(str(self.run), 'microsim/WIE seed 0 (pending)')


class ExperimentRunAPITests(APITestCase):
    """Test cases for the experiment run endpoints"""

    def setUp(self):
        self.wie = self.completed('wie', make_report('WIE'))
        self.idm = self.completed('idm', make_report('IDM', avg_headway=3.32, travel_time=260.0))
        self.us06 = self.completed('idm', make_report('IDM', scenario='us06'), scenario='us06')
        self.failed = ExperimentRun.objects.create(scenario='microsim', controller='mpc-c', laps=6)
        self.failed.fail('solver diverged')

    def completed(self, controller, report, scenario='microsim', seed=0):
        run = ExperimentRun.objects.create(scenario=scenario, controller=controller, laps=2, seed=seed)
        run.start()
        run.complete(report)
        return run

    def test_list_runs(self):
        response = self.client.get(reverse('run-list'))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data), 4)

    def test_filter_runs(self):
        """Test filtering runs by scenario, controller and status"""
        response = self.client.get(reverse('run-list'), {'scenario': 'microsim', 'controller': 'idm'})
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual([run['id'] for run in response.data], [self.idm.id])
        self.assertEqual(response.data[0]['controller_label'], 'IDM')

        response = self.client.get(reverse('run-list'), {'status': 'failed'})
        self.assertEqual([run['id'] for run in response.data], [self.failed.id])

    def test_invalid_filter(self):
        response = self.client.get(reverse('run-list'), {'controller': 'acc'})
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_run_detail(self):
        response = self.client.get(reverse('run-detail', kwargs={'pk': self.wie.pk}))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data['lap_records']), 2)
        self.assertEqual(response.data['lap_records'][1]['lap'], 1)
        self.assertIn('out_dir', response.data)

    def test_run_detail_not_found(self):
        response = self.client.get(reverse('run-detail', kwargs={'pk': 9999}))
        self.assertEqual(response.status_code, status.HTTP_404_NOT_FOUND)

    def test_compare(self):
        """Test the comparison endpoint uses completed runs of one scenario"""
        response = self.client.get(reverse('run-compare'), {'scenario': 'microsim'})
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['baseline'], 'WIE')
        self.assertEqual(response.data['controllers'], ['WIE', 'IDM'])
        self.assertEqual(response.data['runs'], {'WIE': self.wie.pk, 'IDM': self.idm.pk})
        rows = {row['metric']: row for row in response.data['rows']}
        self.assertAlmostEqual(rows['avg_headway']['delta_pct']['IDM'], -4.3228, places=4)
        self.assertAlmostEqual(rows['travel_time']['delta_pct']['IDM'], 4.0)
        self.assertEqual(rows['travel_time']['delta_pct']['WIE'], 0.0)

    def test_compare_uses_latest_run(self):
        newer = self.completed('idm', make_report('IDM', travel_time=275.0))
        response = self.client.get(reverse('run-compare'), {'scenario': 'microsim'})
        self.assertEqual(response.data['runs']['IDM'], newer.pk)

    def test_compare_by_seed(self):
        response = self.client.get(reverse('run-compare'), {'scenario': 'microsim', 'seed': '1'})
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        response = self.client.get(reverse('run-compare'), {'scenario': 'microsim', 'seed': 'x'})
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('seed', response.data)

    def test_compare_needs_scenario(self):
        response = self.client.get(reverse('run-compare'))
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('scenario', response.data)

    def test_compare_needs_two_controllers(self):
        response = self.client.get(reverse('run-compare'), {'scenario': 'us06'})
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('reports', response.data)

    def test_runs_are_read_only(self):
        response = self.client.post(reverse('run-list'), {'scenario': 'udds', 'controller': 'wie', 'laps': 1})
        self.assertEqual(response.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)
