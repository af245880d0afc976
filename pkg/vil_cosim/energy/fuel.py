"""
Fuel flow estimated from OBD signals.

The ECU commands fuel as mass airflow over the stoichiometric air-fuel
ratio and the commanded lambda, corrected by the fuel trims. What the trims
do not capture is a constant fuel-system error e_F, calibrated once against
a trace with a known fuel total.
"""
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _
from scipy.integrate import trapezoid

from .validators import validate_lambda, validate_min_samples, validate_trace_columns

logger = logging.getLogger(__name__)

OBD_COLUMNS = ('t', 'maf', 'lambda_c', 'ltft', 'stft')
AFR_STOICH = 14.1


def trim_error(ltft, stft, e_f=0.0):
    """Per-sample correction E_A from long- and short-term trims in percent."""
    return 1.0 + (np.asarray(ltft, dtype=float) + np.asarray(stft, dtype=float)) / 100.0 - e_f


@dataclass(frozen=True)
class MafCorrection:
    """Mean correction per airflow bin, interpolated between bin centres."""
    centres: np.ndarray
    values: np.ndarray

    def __call__(self, maf):
        return np.interp(np.asarray(maf, dtype=float), self.centres, self.values)

    @classmethod
    def flat(cls, value=1.0):
        return cls(centres=np.array([0.0]), values=np.array([value]))

    def shifted(self, delta):
        return MafCorrection(centres=self.centres, values=self.values - delta)

    def as_series(self):
        return pd.Series(self.values, index=pd.Index(self.centres, name='maf_bin_centre'), name='E_A')


def maf_correction(trace, e_f=0.0, bin_width=10.0):
    """Bin the per-sample correction by airflow; empty bins are left out."""
    validate_trace_columns(trace, OBD_COLUMNS)
    validate_min_samples(trace, 1)
    if bin_width <= 0:
        raise ValidationError({'bin_width': _('Airflow bin width must be positive.')})
    bins = np.floor(trace['maf'].to_numpy(dtype=float) / bin_width).astype(int)
    frame = pd.DataFrame({'bin': bins, 'E_A': trim_error(trace['ltft'], trace['stft'], e_f)})
    means = frame.groupby('bin')['E_A'].mean()
    centres = (means.index.to_numpy(dtype=float) + 0.5) * bin_width
    return MafCorrection(centres=centres, values=means.to_numpy(dtype=float))


def fuel_rate(maf, lambda_c, correction=None, afr_s=AFR_STOICH):
    """Fuel mass flow in g/s."""
    validate_lambda(lambda_c)
    maf = np.asarray(maf, dtype=float)
    factor = 1.0 if correction is None else correction(maf)
    return maf / (afr_s * np.asarray(lambda_c, dtype=float)) * factor


def cumulative_fuel(trace, correction=None, afr_s=AFR_STOICH):
    """Total fuel mass in grams over the trace."""
    validate_trace_columns(trace, OBD_COLUMNS)
    validate_min_samples(trace, 2)
    rate = fuel_rate(trace['maf'], trace['lambda_c'], correction, afr_s)
    return float(trapezoid(rate, trace['t'].to_numpy(dtype=float)))


def calibrate_e_f(trace, reference_fuel, afr_s=AFR_STOICH, bin_width=10.0):
    """
    Fuel-system error that makes the trace's estimated fuel total match
    ``reference_fuel`` grams. The estimate is affine in e_F.
    """
    uncorrected = maf_correction(trace, 0.0, bin_width)
    at_zero = cumulative_fuel(trace, uncorrected, afr_s)
    sensitivity = at_zero - cumulative_fuel(trace, uncorrected.shifted(1.0), afr_s)
    if sensitivity <= 0:
        raise ValidationError({'trace': _('Calibration trace carries no airflow.')})
    e_f = (at_zero - reference_fuel) / sensitivity
    logger.info("calibrated e_F=%.5f against %.1f g reference", e_f, reference_fuel)
    return e_f
