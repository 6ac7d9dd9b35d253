"""Exact, Fourier-free experiments with the density-increment proof of Roth's theorem."""

from .certify import CertificateReport, InequalityReport, VerifyConfig, verify_all
from .correlation import (
    BalancedProfile,
    CorrelationProfile,
    EnergyValue,
    ScaledFunction,
    WindowProfile,
    autocorrelation,
    autocorrelation_all,
    balanced_profile,
    energy,
    trilinear,
    v_profile,
    window_sums,
)
from .errors import BudgetExceeded, CapacityError, RothlabError
from .increment import IncrementConfig, IncrementResult, Progression, density_increment, rescale
from .iterate import Trajectory, bound_report, run
from .modring import ModContext, centered_rep, choose_modulus, mod_inverse
from .sets import DenseSet, FreenessReport, behrend, greedy_free, is_3ap_free, r3_exact, random_subset

__version__ = "0.1.0"
