"""Dephased discrete-time quantum walks on a 1-d lattice.

Simulation of a spin-1/2 walker under per-step spin/spatial dephasing,
discrete phase-space (Wigner) analysis, quasi-stationary (long-memory)
dephasing with closed-form coherence suppression, maximum-likelihood rate
extraction from measured histograms, and physical decoherence-rate estimates
for neutral atoms in state-dependent optical lattices.
"""

__version__ = "0.1.0"

from .coherence import (
    CorrelationProfile,
    central_peak_falloff,
    correlation_function,
    fit_coherence_length,
    model_coherence_length,
    off_diagonal_mass,
)
from .core import (
    BandPoint,
    SpinorLatticeState,
    WalkParameters,
    ballistic_variance,
    band_structure,
    brillouin_grid,
    coin_matrix,
    dispersion,
    effective_mass,
    eigenspinor,
    evolve_state,
    group_velocity,
    make_initial_state,
)
from .density import (
    OBSERVABLES,
    DecoherenceParameters,
    WalkMoments,
    diffusion_constant,
    evolve,
    kraus_step,
    momentum_distribution,
    moments,
    position_distribution,
    state_to_density,
)
from .errors import (
    ConvergenceError,
    InsufficientDataError,
    InvalidArgumentError,
    LatticeWalkError,
    MissingConstantError,
    ParseError,
    ResolutionError,
    SingularMassError,
    TruncationError,
)
from .fitting import (
    DetectionModel,
    FitResult,
    PositionHistogram,
    clopper_pearson,
    discriminate_mechanism,
    fit,
    predicted_distribution,
    synthesize_histogram,
)
from .memory import (
    DephasingDistribution,
    coherence_length_from_T2,
    dephased_correlation,
    monte_carlo_correlation,
    suppression_factor,
    zeta_walk_amplitudes,
    zeta_wavepacket_split,
)
from .rates import (
    AtomPhysicalParameters,
    NoiseSpectrum,
    RateReport,
    calibrate_gamma_tot,
    inhomogeneous_T2_and_length,
    mechanism_table,
    phase_variance,
    rate_report,
    scalar_light_shift_eta,
    scattering_rates,
    vector_light_shift_eta,
)
from .wigner import WignerGrid, band_filling, marginals, negativity_summary, wigner

__all__ = [
    "__version__",
    "AtomPhysicalParameters",
    "BandPoint",
    "ConvergenceError",
    "CorrelationProfile",
    "DecoherenceParameters",
    "DephasingDistribution",
    "DetectionModel",
    "FitResult",
    "InsufficientDataError",
    "InvalidArgumentError",
    "LatticeWalkError",
    "MissingConstantError",
    "NoiseSpectrum",
    "OBSERVABLES",
    "ParseError",
    "PositionHistogram",
    "RateReport",
    "ResolutionError",
    "SingularMassError",
    "SpinorLatticeState",
    "TruncationError",
    "WalkMoments",
    "WalkParameters",
    "WignerGrid",
    "ballistic_variance",
    "band_filling",
    "band_structure",
    "brillouin_grid",
    "calibrate_gamma_tot",
    "central_peak_falloff",
    "clopper_pearson",
    "coherence_length_from_T2",
    "coin_matrix",
    "correlation_function",
    "dephased_correlation",
    "diffusion_constant",
    "discriminate_mechanism",
    "dispersion",
    "effective_mass",
    "eigenspinor",
    "evolve",
    "evolve_state",
    "fit",
    "fit_coherence_length",
    "group_velocity",
    "inhomogeneous_T2_and_length",
    "kraus_step",
    "make_initial_state",
    "marginals",
    "mechanism_table",
    "model_coherence_length",
    "moments",
    "momentum_distribution",
    "monte_carlo_correlation",
    "negativity_summary",
    "off_diagonal_mass",
    "phase_variance",
    "position_distribution",
    "predicted_distribution",
    "rate_report",
    "scalar_light_shift_eta",
    "scattering_rates",
    "state_to_density",
    "suppression_factor",
    "synthesize_histogram",
    "vector_light_shift_eta",
    "wigner",
    "zeta_walk_amplitudes",
    "zeta_wavepacket_split",
]
