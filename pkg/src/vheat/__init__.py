"""Steady states and thermodynamics of periodically modulated multilevel
systems coupled to two heat baths.

The core objects are `MachineConfig` (system + baths + modulation +
initial state), the sideband-resolved generator in `generator`, steady
states (closed-form and numeric) in `steady`, and heat currents, power,
and enhancement ratios in `thermo`.  `sweep` scans parameters and emits
CSV tables; `vheat.cli` wraps everything behind a config-file CLI.
"""

from .bath import BathSpec, FlatBand, Lorentzian, OhmicExp, coupling_spectrum, separated_band_baths
from .floquet import WeightTable, bessel_jq, modulation_weights
from .generator import (
    ReducedOde,
    SubbathGenerator,
    build_subbath_generator,
    build_total_generator,
    coefficient_determinant,
    reduced_ode_system,
    subbath_generators,
)
from .model import (
    AlignmentError,
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    CustomModulation,
    DensityMatrix,
    DipoleGram,
    MachineConfig,
    NumericsSpec,
    SinusoidalModulation,
    SystemSpec,
    VheatError,
    bright_dark_basis,
    dark_projection,
    initial_state,
    resolve_initial_state,
    two_band_machine,
    validate_config,
)
from .steady import (
    analytic_steady_state,
    boltzmann_factor,
    effective_inverse_temperature,
    numeric_steady_state,
    per_level_boltzmann,
    propagate,
)
from .sweep import (
    PowerOptimum,
    SweepTable,
    dark_overlap_state,
    figure_datasets,
    maximize_power,
    rescale_to_beta_eff,
    sweep_grid,
)
from .thermo import (
    EnhancementRatios,
    ThermoReport,
    enhancement_ratios,
    misaligned_power_ratio,
    subbath_heat_current,
    thermo_report,
    tls_reference_power,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "BathSpec",
    "ConfigError",
    "ConsistencyError",
    "ConvergenceError",
    "CustomModulation",
    "DensityMatrix",
    "DipoleGram",
    "EnhancementRatios",
    "FlatBand",
    "Lorentzian",
    "MachineConfig",
    "NumericsSpec",
    "OhmicExp",
    "PowerOptimum",
    "ReducedOde",
    "SinusoidalModulation",
    "SubbathGenerator",
    "SweepTable",
    "SystemSpec",
    "ThermoReport",
    "VheatError",
    "WeightTable",
    "analytic_steady_state",
    "bessel_jq",
    "boltzmann_factor",
    "bright_dark_basis",
    "build_subbath_generator",
    "build_total_generator",
    "coefficient_determinant",
    "coupling_spectrum",
    "dark_overlap_state",
    "dark_projection",
    "effective_inverse_temperature",
    "enhancement_ratios",
    "figure_datasets",
    "initial_state",
    "maximize_power",
    "misaligned_power_ratio",
    "modulation_weights",
    "numeric_steady_state",
    "per_level_boltzmann",
    "propagate",
    "reduced_ode_system",
    "rescale_to_beta_eff",
    "resolve_initial_state",
    "separated_band_baths",
    "subbath_generators",
    "subbath_heat_current",
    "sweep_grid",
    "thermo_report",
    "tls_reference_power",
    "two_band_machine",
    "validate_config",
]
