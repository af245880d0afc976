import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from energy.metrics import write_metrics_csv

from .models import ExperimentRun
from .tests import make_report, write_text

SMALL_RING = (
    "straight_length = 100\n"
    "scenario.n_vehicles = 6\n"
    "scenario.n_cav_string = 0\n"
    "scenario.ego_index = 3\n"
    "scenario.laps = 2\n"
    "scenario.max_time = 600\n"
)


class CompareCommandTests(SimpleTestCase):

    def test_compare_run_directories(self):
        """Test the compare command prints changes against WIE"""
        with tempfile.TemporaryDirectory() as out:
            for name, report in [('wie-seed0', make_report('WIE')),
                                 ('idm-seed0', make_report('IDM', avg_headway=3.32))]:
                directory = Path(out) / name
                directory.mkdir()
                write_metrics_csv(report, directory / 'metrics.csv')
            table_path = Path(out) / 'table.csv'
            stdout = StringIO()
            call_command('compare', str(Path(out) / 'wie-seed0'), str(Path(out) / 'idm-seed0' / 'metrics.csv'),
                         '--out', str(table_path), stdout=stdout)
            table = pd.read_csv(table_path, index_col='metric')
        output = stdout.getvalue()
        self.assertIn('microsim, changes against WIE', output)
        self.assertIn('3.32 (-4.3%)', output)
        self.assertEqual(table.loc['avg_headway', 'IDM'], '3.32 (-4.3%)')

    def test_missing_metrics(self):
        with tempfile.TemporaryDirectory() as out:
            with self.assertRaises(CommandError):
                call_command('compare', out, str(Path(out) / 'other.csv'), stdout=StringIO())

    def test_single_report(self):
        with tempfile.TemporaryDirectory() as out:
            path = Path(out) / 'metrics.csv'
            write_metrics_csv(make_report('WIE'), path)
            with self.assertRaises(CommandError):
                call_command('compare', str(path), stdout=StringIO())


def obd_frame(maf=14.1, ltft=0.0, stft=0.0, seconds=10):
    t = np.arange(seconds + 1, dtype=float)
    return pd.DataFrame({'t': t, 'maf': maf, 'lambda_c': 1.0, 'ltft': ltft, 'stft': stft})


class EnergyCommandTests(SimpleTestCase):

    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.dir = Path(directory.name)

    def test_obd_fuel(self):
        """Test stoichiometric airflow with zero trims burns maf / 14.1 grams per second"""
        obd_frame().to_csv(self.dir / 'drive.csv', index=False)
        stdout = StringIO()
        call_command('energy', str(self.dir / 'drive.csv'), stdout=stdout)
        results = pd.read_csv(self.dir / 'drive_energy.csv')
        bins = pd.read_csv(self.dir / 'drive_energy_bins.csv')
        self.assertEqual(list(results.columns), ['t', 'fuel_rate_gps', 'fuel_g'])
        np.testing.assert_allclose(results['fuel_rate_gps'], 1.0)
        self.assertAlmostEqual(results['fuel_g'].iloc[-1], 10.0, places=5)
        self.assertEqual(bins['maf_bin_centre'].tolist(), [15.0])
        self.assertIn('10.00 g fuel', stdout.getvalue())

    def test_config_overrides_stoichiometric_ratio(self):
        obd_frame().to_csv(self.dir / 'drive.csv', index=False)
        config = write_text(self.dir, 'afr.cfg', "energy.afr_s = 14.7\nenergy.maf_bin_width = 5\n")
        out = self.dir / 'fuel.csv'
        call_command('energy', str(self.dir / 'drive.csv'), '--config', str(config), '--out', str(out),
                     stdout=StringIO())
        results = pd.read_csv(out)
        self.assertAlmostEqual(results['fuel_g'].iloc[-1], 141.0 / 14.7, places=5)
        self.assertEqual(pd.read_csv(self.dir / 'fuel_bins.csv')['maf_bin_centre'].tolist(), [12.5])

    def test_calibration_removes_fuel_system_error(self):
        """Test a fitted e_F brings a trimmed trace back to the reference total"""
        obd_frame(ltft=5.0).to_csv(self.dir / 'calibration.csv', index=False)
        obd_frame(ltft=5.0, seconds=20).to_csv(self.dir / 'drive.csv', index=False)
        stdout = StringIO()
        call_command('energy', str(self.dir / 'drive.csv'), '--calibration', str(self.dir / 'calibration.csv'),
                     '--reference-fuel', '10.0', stdout=stdout)
        results = pd.read_csv(self.dir / 'drive_energy.csv')
        self.assertAlmostEqual(results['fuel_g'].iloc[-1], 20.0, places=5)
        self.assertIn('e_F = 0.05000', stdout.getvalue())

    def test_battery_energy(self):
        """Test constant 12 V and 10 A with the default 0.1 ohm series loss"""
        t = np.arange(11, dtype=float)
        pd.DataFrame({'t': t, 'voltage': 12.0, 'current': 10.0}).to_csv(self.dir / 'pack.csv', index=False)
        stdout = StringIO()
        call_command('energy', str(self.dir / 'pack.csv'), '--kind', 'battery', stdout=stdout)
        results = pd.read_csv(self.dir / 'pack_energy.csv')
        self.assertEqual(list(results.columns), ['t', 'power_w', 'energy_j'])
        np.testing.assert_allclose(results['power_w'], 130.0)
        self.assertAlmostEqual(results['energy_j'].iloc[-1], 1300.0, places=3)
        self.assertIn('1300.0 J', stdout.getvalue())
        config = write_text(self.dir, 'lossless.cfg', "energy.r_s = 0\n")
        call_command('energy', str(self.dir / 'pack.csv'), '--kind', 'battery', '--config', str(config),
                     stdout=StringIO())
        self.assertAlmostEqual(pd.read_csv(self.dir / 'pack_energy.csv')['energy_j'].iloc[-1], 1200.0, places=3)

    def test_bad_traces(self):
        """Test missing files, missing columns and unpaired calibration options"""
        pd.DataFrame({'t': [0.0, 1.0], 'maf': [3.0, 3.0]}).to_csv(self.dir / 'short.csv', index=False)
        with self.assertRaises(CommandError):
            call_command('energy', str(self.dir / 'short.csv'), stdout=StringIO())
        with self.assertRaises(CommandError):
            call_command('energy', str(self.dir / 'absent.csv'), stdout=StringIO())
        with self.assertRaises(CommandError):
            call_command('energy', str(self.dir / 'short.csv'), '--kind', 'battery', stdout=StringIO())
        obd_frame().to_csv(self.dir / 'drive.csv', index=False)
        with self.assertRaises(CommandError):
            call_command('energy', str(self.dir / 'drive.csv'), '--reference-fuel', '10', stdout=StringIO())


class ImportCycleCommandTests(SimpleTestCase):

    def test_import_epa_schedule(self):
        """Test an EPA schedule converts from mph to m/s"""
        with tempfile.TemporaryDirectory() as directory:
            source = write_text(directory, 'us06.txt', (
                "EPA US06 Driving Schedule\n"
                "Test Time, secs\tSpeed, mph\n"
                "0\t0.0\n"
                "1\t0.5\n"
                "2\t10.0\n"
                "3\t22.4\n"
            ))
            target = Path(directory) / 'us06.csv'
            call_command('import_cycle', str(source), str(target), stdout=StringIO())
            cycle = pd.read_csv(target)
        self.assertEqual(list(cycle.columns), ['t_s', 'v_mps'])
        self.assertEqual(cycle['t_s'].tolist(), [0.0, 1.0, 2.0, 3.0])
        self.assertAlmostEqual(cycle['v_mps'].iloc[2], 4.4704, places=5)
        self.assertAlmostEqual(cycle['v_mps'].iloc[3], 10.01370, places=4)

    def test_bad_schedule(self):
        with tempfile.TemporaryDirectory() as directory:
            source = write_text(directory, 'bad.txt', "header\nheader\n0\t5\n2\t4\n1\t3\n")
            with self.assertRaises(CommandError):
                call_command('import_cycle', str(source), str(Path(directory) / 'out.csv'))
            with self.assertRaises(CommandError):
                call_command('import_cycle', str(Path(directory) / 'absent.txt'), 'out.csv')


class NetworkCommandTests(SimpleTestCase):

    def test_client_needs_host_and_port(self):
        with self.assertRaises(CommandError):
            call_command('simclient', '--server', 'localhost', stdout=StringIO())

    def test_server_without_clients(self):
        """Test the server gives up when nobody subscribes"""
        with tempfile.TemporaryDirectory() as out:
            with self.assertRaises(CommandError) as context:
                call_command('simserver', '--port', '0', '--idle-timeout', '0.3', '--out', out,
                             stdout=StringIO())
            self.assertTrue((Path(out) / 'server_trace.csv').is_file())
        self.assertIn('no client', str(context.exception))


class RunCommandTests(TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.addCleanup(self.directory.cleanup)
        self.config = write_text(self.directory.name, 'small.cfg', SMALL_RING)
        self.out = Path(self.directory.name) / 'runs'

    def test_run_records_results(self):
        """Test a run writes its artifacts and stores the result"""
        stdout = StringIO()
        call_command('run', '--config', str(self.config), '--out', str(self.out), '--controller', 'wie',
                     stdout=stdout)
        run_dir = self.out / 'microsim' / 'wie-seed0'
        for name in ['trace.csv', 'plot.csv', 'metrics.csv', 'metrics_laps.csv']:
            self.assertTrue((run_dir / name).is_file(), msg=name)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, ExperimentRun.COMPLETED)
        self.assertEqual(run.laps, 2)
        self.assertEqual(run.lap_records.count(), 2)
        self.assertGreater(run.travel_time, 0.0)
        self.assertEqual(Path(run.out_dir), run_dir.resolve())
        self.assertIn('microsim/wie', stdout.getvalue())

    def test_no_record(self):
        call_command('run', '--config', str(self.config), '--out', str(self.out), '--seed', '4',
                     '--no-record', stdout=StringIO())
        self.assertFalse(ExperimentRun.objects.exists())
        self.assertTrue((self.out / 'microsim' / 'wie-seed4' / 'trace.csv').is_file())

    def test_missing_cycle_fails(self):
        """Test a cycle run without a cycle file fails and is recorded as failed"""
        with self.assertRaises(CommandError) as context:
            call_command('run', '--config', str(self.config), '--out', str(self.out), '--scenario', 'us06',
                         stdout=StringIO(), stderr=StringIO())
        self.assertIn('1 of 1', str(context.exception))
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, ExperimentRun.FAILED)
        self.assertIn('cycle.us06', run.error)

    def test_runs_are_marked_running_first(self):
        """Test every run is stored as RUNNING before the manifest executes"""
        seen = []

        def record_statuses(manifest, config, jobs=1):
            seen.extend(ExperimentRun.objects.values_list('status', 'started_at'))
            raise ValidationError('solver exploded')

        with mock.patch('experiments.management.commands.run.run_manifest', side_effect=record_statuses):
            with self.assertRaises(CommandError):
                call_command('run', '--config', str(self.config), '--out', str(self.out), '--matrix', 'all',
                             stdout=StringIO())
        self.assertEqual(len(seen), 12)
        self.assertTrue(all(status == ExperimentRun.RUNNING and started for status, started in seen))
        self.assertEqual(ExperimentRun.objects.filter(status=ExperimentRun.FAILED).count(), 12)
        self.assertIn('solver exploded', ExperimentRun.objects.first().error)

    def test_bad_config(self):
        config = write_text(self.directory.name, 'bad.cfg', "laps = 2\n")
        with self.assertRaises(CommandError):
            call_command('run', '--config', str(config), '--out', str(self.out), stdout=StringIO())
