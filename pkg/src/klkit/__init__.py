"""Numerical toolkit for Kullback-Leibler support of kernel mixture priors."""
from .approximants import ApproximantSequence, verify_lower_bounds
from .conditions import (ConditionReport, check_A_conditions,
                         check_completely_monotone, check_location_scale,
                         check_moment, check_theorem)
from .density import (DensitySpec, MixingDistribution, MixtureDensity,
                      log_transform, make_density, phi_delta)
from .kernels import KernelSpec, make_kernel, to_location_scale
from .kl import (KLResult, convergence_study, floor_transform, kl_divergence,
                 lemma4_bound_check)
from .prior_mc import (BaseMeasure, DPSpec, MassEstimate,
                       hierarchical_mass_estimate, kl_mass_estimate,
                       stick_breaking_sample)
from .special_fn import DomainError, digamma, log_gamma

__version__ = "0.1.0"

__all__ = [
    "ApproximantSequence", "BaseMeasure", "ConditionReport", "DPSpec",
    "DensitySpec", "DomainError", "KLResult", "KernelSpec", "MassEstimate",
    "MixingDistribution", "MixtureDensity", "check_A_conditions",
    "check_completely_monotone", "check_location_scale", "check_moment",
    "check_theorem", "convergence_study", "digamma", "floor_transform",
    "hierarchical_mass_estimate", "kl_divergence", "kl_mass_estimate",
    "lemma4_bound_check", "log_gamma", "log_transform", "make_density",
    "make_kernel", "phi_delta", "stick_breaking_sample", "to_location_scale",
    "verify_lower_bounds",
]
