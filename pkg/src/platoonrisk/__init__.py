"""Collision-risk analysis of delayed stochastic vehicle platoons.

Library + CLI for quantifying inter-vehicle collision risk in platoons with
delayed linear feedback and additive noise: Laplacian spectra of the
communication topology, delay-dependent stability, closed-form steady-state
distance variances, VaR/CVaR/EVaR risk levels, spectral EVaR bounds, and a
Monte Carlo SDDE validator.

Numerical hot paths live in a compiled extension (``platoonrisk._kernels``)
with a pure numpy fallback; set PLATOONRISK_PURE=1 to force the fallback.
"""

from ._kernels import BACKEND
from .bounds import SpectralBounds, evar_bounds
from .config import ScenarioConfig, load_scenario, parse_scenario
from .errors import (ConfigError, DivergenceError, DomainError,
                     EigenConvergenceError, GraphError, NearInstabilityError,
                     PlatoonRiskError, QuadratureError, StabilityError)
from .graphs import (LaplacianSpectrum, WeightedGraph, build_topology,
                     graph_from_spec, laplacian, spectrum)
from .risk import (PairRisk, RiskValue, alpha, chernoff_exponent, cvar,
                   d_epsilon, evar, kappa_epsilon, pair_risks, psi_epsilon,
                   tail_probability, var)
from .sim import SimConfig, SimulationResult, empirical_tail_check, simulate
from .stability import StabilityVerdict, in_region_S, platoon_stable, s2_cap
from .variance import (PairVariances, PlatoonParams, f_integral, f_reference,
                       pair_variances, sigma_z_sq)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError", "DivergenceError", "DomainError", "EigenConvergenceError",
    "GraphError", "NearInstabilityError", "PlatoonRiskError",
    "QuadratureError", "StabilityError",
    "LaplacianSpectrum", "WeightedGraph", "build_topology", "graph_from_spec",
    "laplacian", "spectrum",
    "StabilityVerdict", "in_region_S", "platoon_stable", "s2_cap",
    "PairVariances", "PlatoonParams", "f_integral", "f_reference",
    "pair_variances", "sigma_z_sq",
    "PairRisk", "RiskValue", "alpha", "chernoff_exponent", "cvar",
    "d_epsilon", "evar", "kappa_epsilon", "pair_risks", "psi_epsilon",
    "tail_probability", "var",
    "SpectralBounds", "evar_bounds",
    "SimConfig", "SimulationResult", "empirical_tail_check", "simulate",
    "ScenarioConfig", "load_scenario", "parse_scenario",
    "__version__",
]
