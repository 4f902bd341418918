"""Parameter-free community recovery in stochastic block models."""

from .errors import (ComparisonFailure, EstimationFailure,
                     NoFeasibleHyperparameters, ParameterError, PipelineError,
                     RecoveryError)
from .graphs import (CommunityLabels, EdgeSubset, Graph, Regime, SbmParams,
                     cross_count, neighborhood_shells, sample_sbm, split_edges)
from .spectral import (DepthOverrides, EigenEstimate, ExactSpectrum,
                       basic_eigenvalue_approx, exact_spectrum,
                       improved_eigenvalue_approx, moment_determinants,
                       vandermonde_gamma)

__all__ = [
    "CommunityLabels", "ComparisonFailure", "DepthOverrides", "EdgeSubset",
    "EigenEstimate", "EstimationFailure", "ExactSpectrum", "Graph",
    "NoFeasibleHyperparameters", "ParameterError", "PipelineError",
    "RecoveryError", "Regime", "SbmParams", "basic_eigenvalue_approx",
    "cross_count", "exact_spectrum", "improved_eigenvalue_approx",
    "moment_determinants", "neighborhood_shells", "sample_sbm",
    "split_edges", "vandermonde_gamma",
]

__version__ = "0.1.0"
