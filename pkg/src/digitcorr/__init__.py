"""Exact binary digit-correlation measures and central-limit experiments."""

__version__ = "0.1.0"

from .dyadic import BudgetError, Dyadic, tail_power_sum
from .corrmeasure import (
    DigitString,
    HybridMeasure,
    MeasurePair,
    cusick_c,
    measure_of,
    moment,
    pair_step,
    seed_pair,
    variance_closed_form,
)
from .charfn import charfn_eval, enumerate_type_sum, extract_AB, moments_via_series
from .ergodic import BitStream, SourceSpec, analytic_F, asymptotic_variance, s_n_sum
from .oracle import density_scan, digit_delta
from .cltlab import ExperimentPlan, cusick_scan, gaussian_moment, lemma_main_gap, run_clt
