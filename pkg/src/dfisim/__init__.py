"""Delay-aware simulation of decoherence-free interactions between
modulated giant atoms coupled to waveguides."""

from .core import (
    DFIConditionViolated,
    FreqModParams,
    Model,
    ModulationKind,
    ModulationProfile,
    ParseError,
    PhysicalParams,
    Regime,
    ScenarioConfig,
    StepControl,
    ValidationError,
    derived_coupling_Gm,
    dfi_phase,
    eval_modulation,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
    with_params,
)
from .models import (
    DomainError,
    HistoryUnderflow,
    RhsFunction,
    bessel_first_kind,
    build_rhs,
    delayed_term,
)
from .integrator import (
    HistoryBuffer,
    NumericalBlowup,
    StepTooLarge,
    TimeSeries,
    integrate_dde,
    integrate_euler_oracle,
    integrate_ode,
)
from .analysis import (
    CirculationReport,
    DegenerateLoop,
    EffectiveHamiltonian,
    InsufficientOscillations,
    Ordering,
    build_effective_hamiltonian,
    circulation_order,
    extract_rabi_frequency,
    find_first_peaks,
    loop_flux,
    propagate_effective,
    smooth_trace,
)
from .presets import PRESET_NAMES, preset

__version__ = "0.1.0"
