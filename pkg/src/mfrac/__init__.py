"""Simulation of multifractional Brownian motion and estimation of its
pointwise Hölder exponent."""

__version__ = "0.1.0"

from .errors import (DegenerateError, InvalidArgumentError, MfracError, NumericalError,
                     ParseError, SimulationError)
from .increments import IncrementSequence, generalized_increments, make_difference_sequence, vanishing_moments
from .paths import HolderFunction, SamplePath
from .simulate import PhiForm, apply_phi, fgn_covariance, simulate_fbm, simulate_mbm
from .exact import mbm_covariance_exact, simulate_mbm_exact
from .estimate import (EstimateSeries, EstimatorConfig, estimate, estimate_gqv, estimate_lgqv,
                       estimate_oscillation, lgqv_radius, neighborhood, quadratic_variation,
                       radius_diagnostics)
from .theory import c_tilde_closed, c_tilde_integral, fbm_increment_covariance
