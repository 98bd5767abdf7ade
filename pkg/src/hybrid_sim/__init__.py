"""Unitary dynamics of parameter-interpolated classical/quantum systems.

Subsystem j carries the variables (x_j, p_j, chi_j, pi_j) with
[x_j, p_j] = i hbar a_j and [x_j, pi_j] = [chi_j, p_j] = i hbar; a_j = 0 is
classical, a_j = 1 quantum. States live on a periodic grid over
(x1, chi1, x2, chi2) and evolve under generators compiled to a
position-diagonal plus a Fourier-diagonal part.
"""
from .algebra import (AlgebraParams, Grid, ObservableId, PacketSpec, State, commutator_residual,
                      default_grid, expectation, gaussian_state, make_grid)
from .errors import ConfigurationError, DiagnosticError, HybridSimError, NumericalDomainError, StaleStateError
from .generator import (ClassicalClassical, FSpec, GeneralIAS, GradientCoupledIAS, HybridFiniteA,
                        NonInteracting, SpecialDecoupledHybrid, build_plan, pde_residuals)
from .potentials import (Bilinear, Cosine, GaussianWell, Harmonic, PolynomialRawW, PolynomialSum, Quartic,
                         RawW, WSpec, ZeroV, admissible_projection_exists, consistency_residual)
from .propagator import EvolveConfig, TimeSeries, conserved_moments, ehrenfest_residuals, evolve, step

__version__ = "0.1.0"

__all__ = [
    "AlgebraParams", "Grid", "ObservableId", "PacketSpec", "State", "commutator_residual", "default_grid",
    "expectation", "gaussian_state", "make_grid",
    "ConfigurationError", "DiagnosticError", "HybridSimError", "NumericalDomainError", "StaleStateError",
    "ClassicalClassical", "FSpec", "GeneralIAS", "GradientCoupledIAS", "HybridFiniteA", "NonInteracting",
    "SpecialDecoupledHybrid", "build_plan", "pde_residuals",
    "Bilinear", "Cosine", "GaussianWell", "Harmonic", "PolynomialRawW", "PolynomialSum", "Quartic", "RawW",
    "WSpec", "ZeroV", "admissible_projection_exists", "consistency_residual",
    "EvolveConfig", "TimeSeries", "conserved_moments", "ehrenfest_residuals", "evolve", "step",
]
