"""Pulsed-diffusion passive scalars on the 2-torus.

Pseudo-spectral simulation and analysis of scalars advected by hyperbolic
toral automorphisms (and their volume-preserving shear perturbations) with
pulsed diffusion and stochastic low-mode forcing: stationary power spectra,
cumulative and exponential-shell mass laws, angular sparsity, pulse
localization, and the rate probes behind them.
"""

from .fields import (
    Annulus,
    Ball,
    Complement,
    ExpShell,
    HighPass,
    ModeSelector,
    PulseSet,
    ScalarField,
    Sector,
    SparseField,
    anisotropic_norm,
    dyadic_cone_norm,
    field_from_grid,
    l2_norm,
    load_field,
    make_field,
    new_pure_mode,
    project,
    random_field,
    sample_on_grid,
    save_field,
    sobolev_seminorm,
    zero_field,
)
from .montecarlo import mc_expected_projection, omega_normal, random_shift_heat, sample_chain
from .probes import (
    AnisoProbe,
    CriticalScales,
    DecayFit,
    anisotropic_decay_probe,
    critical_scales,
    enhanced_dissipation_time,
    h_minus1_decay_rate,
)
from .spectral import (
    SpectralDistribution,
    centroid_pushforward_check,
    centroid_variance_track,
    chebyshev_tail,
    pulse_sequence,
    spectral_distribution,
)
from .stationary import (
    NumericalError,
    StationarySpectrum,
    cumulative_curve,
    dissipative_mass,
    offpulse_mass,
    sector_profile,
    fit_sector_decay,
    shell_masses,
    stationary_spectrum,
)
from .torusmaps import (
    ARNOLD,
    HyperbolicData,
    IntMatrix2,
    PerturbedCatMap,
    ShearStep,
    analyze_matrix,
    cone_preservation_ratio,
    jacobian_forward,
    jacobian_inverse_sup,
    map_forward,
    map_inverse,
)
from .transfer import (
    HEAT_CONSTANT,
    PulseRecord,
    PulseTrack,
    TruncationOverflow,
    cat_transfer,
    general_transfer,
    heat,
    iterate_pulses,
    pulsed_step,
)

__version__ = "0.1.0"
