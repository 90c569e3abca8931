"""Distances, geodesics and moment problems for power spectral densities.

Spectra are sampled on the uniform grid ``theta_k = -pi + 2 pi k / n`` and
every frequency-domain integral is the grid mean.
"""

from .core import (
    DEFAULT_GRID_SIZE,
    MeanOrder,
    RationalPsd,
    SignedGrid,
    SpectrumGrid,
    generalized_mean,
    geometric_mean,
    harmonic_mean,
    mean,
    sample_rational,
    theta_grid,
)
from .distances import (
    DistanceValue,
    Measure,
    delta_ag,
    delta_kl,
    delta_rs,
    delta_smooth,
    delta_sym,
    distance,
    rho_ag,
    rho_smooth,
)
from .errors import SpectralError
from .geodesics import (
    GeodesicPath,
    QuadraticFormKind,
    expansion_residual,
    geodesic_residual,
    log_interval,
    logpath_length,
    path_length,
    quadratic_form,
)
from .moments import MomentSolution, MomentVector, compute_moments, levinson_durbin, solve_ag_closest
from .prediction import (
    factorize,
    mismatched_prediction_variance,
    mismatched_smoothing_variance,
    prediction_variance,
    simulate_prediction,
    smoothing_variance,
)

__version__ = "0.1.0"
