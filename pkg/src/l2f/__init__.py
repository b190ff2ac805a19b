"""Multiexponential decay analysis by Hermite expansion and Fourier peak finding."""

from .errors import (
    ConfigurationError,
    DomainError,
    EstimationFailure,
    NoPeakError,
    NumericError,
    ShapeError,
    SupportError,
)
from .hermite import GaussRule, HermiteBasis, eval_psi, eval_psi_batch, gauss_rule, glambda_coefficients
from .leastsq import GramSystem, HermiteExpansion, build_gram, error_norms, fit, fourier_of_expansion, raw_coefficients
from .measures import SMZMeasure, equispaced_measure, gauss_measure, restrict_to_window, validate_smz
from .pipeline import L2FConfig, SampledSource, estimate_t22, run_l2f, run_nlls_baseline
from .simlab import NoiseSpec, SignalModel, SyntheticSource, run_batch

__version__ = "0.1.0"
