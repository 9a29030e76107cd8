"""Phase-space simulator and analytics for the oscillator Otto cycle.

Submodules:

    thermo    closed-form quasistatic cycle thermodynamics
    ensemble  stochastic particle representation of the Wigner function
    entropy   Fock populations, energy entropy, grid entropy
    special   Laguerre / Bessel / hypergeometric kernels and quadrature
    cli       config-driven experiment runner
"""

from .ensemble import (
    BathSpec,
    Ensemble,
    FrequencySchedule,
    Hold,
    Jump,
    LinearRamp,
    Snapshot,
    diffusion_coefficient,
    energy,
    evolve_schedule,
    mean_occupation,
    sample_squeezed_thermal,
    squeezing,
    step,
)
from .entropy import (
    EntropyReport,
    PopulationVector,
    energy_entropy,
    fock_wigner_radial,
    populations_equilibrium,
    populations_from_ensemble,
    populations_squeezed_thermal_approx,
    populations_squeezed_thermal_exact,
    quasiclassical_entropy,
    squeezing_deltas,
)
from .thermo import (
    CycleMode,
    CycleReport,
    QuasistaticCycle,
    Reservoir,
    clausius_residuals,
    cooling_limit,
    nu_kappa,
    quasistatic_report,
    stage_entropy,
    thermal_occupation,
)

__version__ = "0.1.0"
