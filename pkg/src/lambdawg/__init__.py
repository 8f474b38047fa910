"""Non-Markovian emission of Lambda-type atoms in front of a waveguide mirror."""

from .analytic import (
    BoundState,
    InvalidRootError,
    LaplacePoleError,
    UnsupportedConfigurationError,
    bound_state_energy,
    bound_state_population,
    bound_states,
    final_value,
    laplace_amplitude,
    series_solution,
    steady_state_condition,
    steady_state_population,
)
from .dde import (
    IntegrationDivergedError,
    StepSizeError,
    Trajectory,
    integrate_single,
    integrate_two_atom,
    symmetric_antisymmetric,
)
from .kernel import BACKEND
from .model import (
    ChannelParams,
    FrequencyShift,
    InvalidParameterError,
    SingleAtomConfig,
    TwoAtomConfig,
    channel_from_geometry,
    mirror_amplitude,
    shift_value,
)
from .observables import OutputField, flux_components, integrated_flux, output_field
from .oracle import (
    ModeGrid,
    ModeState,
    OracleAccuracyError,
    evolve_modes_single,
    evolve_modes_two,
    realspace_field,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundState",
    "ChannelParams",
    "FrequencyShift",
    "IntegrationDivergedError",
    "InvalidParameterError",
    "InvalidRootError",
    "LaplacePoleError",
    "ModeGrid",
    "ModeState",
    "OracleAccuracyError",
    "OutputField",
    "SingleAtomConfig",
    "StepSizeError",
    "Trajectory",
    "TwoAtomConfig",
    "UnsupportedConfigurationError",
    "bound_state_energy",
    "bound_state_population",
    "bound_states",
    "channel_from_geometry",
    "evolve_modes_single",
    "evolve_modes_two",
    "final_value",
    "flux_components",
    "integrate_single",
    "integrate_two_atom",
    "integrated_flux",
    "laplace_amplitude",
    "mirror_amplitude",
    "output_field",
    "realspace_field",
    "series_solution",
    "shift_value",
    "steady_state_condition",
    "steady_state_population",
    "symmetric_antisymmetric",
]
