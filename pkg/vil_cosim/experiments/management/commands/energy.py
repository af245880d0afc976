"""
Fuel or battery energy from a logged vehicle trace.

An OBD trace gives per-sample fuel flow and the cumulative fuel in grams,
using the airflow-binned trim correction. With a calibration trace and its
measured fuel total, the fuel-system error is fitted first. A battery trace
gives internal power and cumulative energy in joules.
"""
from pathlib import Path

import pandas as pd
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError
from scipy.integrate import cumulative_trapezoid

from energy.battery import battery_energy, battery_power
from energy.fuel import calibrate_e_f, cumulative_fuel, fuel_rate, maf_correction
from experiments.config import load_config
from sim.trace import read_battery_trace, read_obd_trace

OBD = 'obd'
BATTERY = 'battery'


class Command(BaseCommand):
    help = "Estimate fuel use from an OBD trace, or battery energy from a voltage/current trace."

    def add_arguments(self, parser):
        parser.add_argument('trace', help="CSV trace to evaluate")
        parser.add_argument('--kind', default=OBD, choices=[OBD, BATTERY])
        parser.add_argument('--calibration', help="OBD trace with a known fuel total for fitting e_F")
        parser.add_argument('--reference-fuel', type=float, help="Measured fuel of the calibration trace in grams")
        parser.add_argument('--config', help="Flat key = value file overriding the defaults")
        parser.add_argument('--out', help="Results CSV (default: <trace>_energy.csv)")

    def handle(self, *args, **options):
        trace_path = Path(options['trace'])
        out = Path(options['out']) if options['out'] else trace_path.with_name(f'{trace_path.stem}_energy.csv')
        if (options['calibration'] is None) != (options['reference_fuel'] is None):
            raise CommandError("--calibration and --reference-fuel go together")
        try:
            config = load_config(options['config'])
            if options['kind'] == BATTERY:
                summary = self._battery(trace_path, out, config)
            else:
                summary = self._obd(trace_path, out, config, options['calibration'], options['reference_fuel'])
        except ValidationError as e:
            raise CommandError('; '.join(e.messages))
        self.stdout.write(self.style.SUCCESS(f"{summary} -> {out}"))

    def _obd(self, path, out, config, calibration, reference_fuel):
        afr_s = config['energy.afr_s']
        bin_width = config['energy.maf_bin_width']
        trace = read_obd_trace(path)
        e_f = 0.0
        if calibration is not None:
            e_f = calibrate_e_f(read_obd_trace(calibration), reference_fuel, afr_s=afr_s, bin_width=bin_width)
            self.stdout.write(f"fitted e_F = {e_f:.5f}")
        correction = maf_correction(trace, e_f, bin_width)
        rate = fuel_rate(trace['maf'], trace['lambda_c'], correction, afr_s)
        t = trace['t'].to_numpy(dtype=float)
        pd.DataFrame({
            't': t,
            'fuel_rate_gps': rate,
            'fuel_g': cumulative_trapezoid(rate, t, initial=0.0),
        }).to_csv(out, index=False, float_format='%.6f')
        bins_path = out.with_name(f'{out.stem}_bins.csv')
        correction.as_series().to_csv(bins_path, float_format='%.6f')
        total = cumulative_fuel(trace, correction, afr_s)
        return f"{total:.2f} g fuel over {t[-1] - t[0]:.0f} s (e_F = {e_f:.5f}, bins in {bins_path.name})"

    def _battery(self, path, out, config):
        r_s = config['energy.r_s']
        trace = read_battery_trace(path)
        power = battery_power(trace['voltage'], trace['current'], r_s)
        t = trace['t'].to_numpy(dtype=float)
        pd.DataFrame({
            't': t,
            'power_w': power,
            'energy_j': cumulative_trapezoid(power, t, initial=0.0),
        }).to_csv(out, index=False, float_format='%.6f')
        total = battery_energy(trace, r_s)
        return f"{total:.1f} J battery energy over {t[-1] - t[0]:.0f} s"
