"""Shared parameterization for modulated giant-atom simulations.

Unit conventions
----------------
Everything is dimensionless.  The single-point radiative decay rate of the
constant-coupling atoms sets the energy unit (Gamma0 = 1) and times are
measured in 1/Gamma0.  The modulated coupling enters only through the
dimensionless amplitude ratio chi, so every right-hand-side coefficient is a
product of Gamma0, chi, and cosines of the drive phase.  Angles (phi, theta)
are radians, tau is the propagation delay between adjacent coupling points in
units of 1/Gamma0, and detunings/modulation frequencies (delta, omega) are in
units of Gamma0.

All types below are frozen dataclasses; the functions are pure and safe to
call concurrently.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

#: Tolerance (radians) for checking the dissipationless phase condition.
DFI_PHASE_TOL = 1e-12


class DFIConditionViolated(ValueError):
    """The coupling-point phase does not sit on a dissipationless point."""


class ParseError(ValueError):
    """A scenario document is structurally invalid (bad JSON, unknown key, ...)."""


class ValidationError(ValueError):
    """A structurally valid scenario violates one or more invariants."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


class Model(enum.Enum):
    """Coupling-point layout being simulated."""

    DIMER_COUPLING_MOD = "dimer_coupling_mod"
    TRIMER_DIRECT = "trimer_direct"
    TRIMER_TWO_WAVEGUIDE = "trimer_two_waveguide"
    TRIMER_SINGLE_WAVEGUIDE = "trimer_single_waveguide"
    DIMER_FREQUENCY_MOD = "dimer_frequency_mod"


#: Number of emitters per model.
ATOM_COUNT = {
    Model.DIMER_COUPLING_MOD: 2,
    Model.TRIMER_DIRECT: 3,
    Model.TRIMER_TWO_WAVEGUIDE: 3,
    Model.TRIMER_SINGLE_WAVEGUIDE: 3,
    Model.DIMER_FREQUENCY_MOD: 2,
}


class Regime(enum.Enum):
    """Level of approximation applied to the equations of motion."""

    FULL_DELAY = "full_delay"          # time-delayed equations, finite tau
    MARKOVIAN_ODE = "markovian_ode"    # tau -> 0, modulation kept explicitly
    RWA_EFFECTIVE = "rwa_effective"    # resonant rotating frame, static couplings


class ModulationKind(enum.Enum):
    CONSTANT = "constant"
    COSINE = "cosine"


@dataclass(frozen=True)
class ModulationProfile:
    """Real drive a(t): either a constant or a*cos(omega*t + phase).

    Constant profiles ignore ``frequency`` and ``phase``.
    """

    kind: ModulationKind
    amplitude: float
    frequency: float = 0.0
    phase: float = 0.0

    @staticmethod
    def constant(amplitude: float) -> "ModulationProfile":
        return ModulationProfile(ModulationKind.CONSTANT, amplitude)

    @staticmethod
    def cosine(amplitude: float, frequency: float, phase: float = 0.0) -> "ModulationProfile":
        return ModulationProfile(ModulationKind.COSINE, amplitude, frequency, phase)

    def as_callable(self):
        """Bound fast-path evaluator, equivalent to eval_modulation(self, t)."""
        if self.kind is ModulationKind.CONSTANT:
            a = self.amplitude
            return lambda t: a
        a, w, ph = self.amplitude, self.frequency, self.phase
        cos = math.cos
        return lambda t: a * cos(w * t + ph)


def eval_modulation(profile: ModulationProfile, t: float) -> float:
    """Value of the drive at time t (pure, total)."""
    if profile.kind is ModulationKind.CONSTANT:
        return profile.amplitude
    return profile.amplitude * math.cos(profile.frequency * t + profile.phase)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensionless physical parameters (Gamma0 = 1).

    chi    -- modulation amplitude over the constant coupling strength (>= 0)
    phi    -- phase accumulated between adjacent coupling points (radians);
              for the single-waveguide trimer this is the primed phase
    tau    -- propagation delay between adjacent coupling points (>= 0);
              primed delay for the single-waveguide trimer
    delta  -- detuning of the constant-coupling atoms from the modulated one
    omega  -- coupling-modulation frequency
    theta  -- modulation phase (becomes the synthetic flux in closed loops)
    m      -- integer branch selecting which dissipationless phase point
              phi = (m + 1/2)*pi is meant when one is required
    """

    chi: float
    phi: float
    tau: float
    delta: float
    omega: float
    theta: float
    m: int = 0


@dataclass(frozen=True)
class FreqModParams:
    """Detuning drive delta0 + delta_g_prime*cos(omega_prime*t + theta_prime)."""

    delta0: float
    delta_g_prime: float
    omega_prime: float
    theta_prime: float


@dataclass(frozen=True)
class StepControl:
    """Integrator step selection: the delay grid is refined until the node
    spacing is at most max_step, with at least 2*substeps_per_tau nodes per tau."""

    max_step: float = 1e-3
    substeps_per_tau: int = 2


@dataclass(frozen=True)
class ScenarioConfig:
    model: Model
    regime: Regime
    params: PhysicalParams
    initial_state: tuple[complex, ...]
    t_end: float
    sample_interval: float = 0.01
    step_control: StepControl = field(default_factory=StepControl)
    freq_mod: FreqModParams | None = None


def dfi_phase(m: int) -> float:
    """The dissipationless coupling-point phase (m + 1/2)*pi."""
    return (m + 0.5) * math.pi


def derived_coupling_Gm(params: PhysicalParams) -> float:
    """Effective exchange strength at the dissipationless point, (-1)^m * chi.

    Requires phi = (m + 1/2)*pi for the declared branch m (within
    DFI_PHASE_TOL); raises DFIConditionViolated otherwise.
    """
    target = dfi_phase(params.m)
    if abs(params.phi - target) > DFI_PHASE_TOL:
        raise DFIConditionViolated(
            f"phi={params.phi!r} is not (m+1/2)*pi for m={params.m} "
            f"(expected {target!r})"
        )
    return (-1.0) ** params.m * params.chi


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate_scenario(cfg: ScenarioConfig) -> list[str]:
    """Collect invariant violations; an empty list means the scenario is runnable.

    Pure and side-effect free; never raises for bad values, only reports.
    """
    diags: list[str] = []
    p = cfg.params

    expected = ATOM_COUNT[cfg.model]
    if len(cfg.initial_state) != expected:
        diags.append(
            f"state length mismatch: {cfg.model.value} needs {expected} "
            f"initial amplitudes, got {len(cfg.initial_state)}"
        )

    for name, value in (("chi", p.chi), ("phi", p.phi), ("tau", p.tau),
                        ("delta", p.delta), ("omega", p.omega), ("theta", p.theta)):
        if not _finite(value):
            diags.append(f"params.{name} must be finite")
    if _finite(p.chi) and p.chi < 0:
        diags.append("chi must be >= 0")
    if _finite(p.tau) and p.tau < 0:
        diags.append("tau must be >= 0")

    norm = sum(abs(u) ** 2 for u in cfg.initial_state)
    if not math.isfinite(norm) or norm > 1.0 + 1e-9:
        diags.append(f"total initial probability {norm:.6g} exceeds 1")

    if not (_finite(cfg.t_end) and cfg.t_end > 0):
        diags.append("t_end must be > 0")
    if not (_finite(cfg.sample_interval) and cfg.sample_interval > 0):
        diags.append("sample_interval must be > 0")
    if not (_finite(cfg.step_control.max_step) and cfg.step_control.max_step > 0):
        diags.append("step_control.max_step must be > 0")
    if cfg.step_control.substeps_per_tau < 2:
        diags.append("step_control.substeps_per_tau must be >= 2")

    if cfg.regime is Regime.FULL_DELAY and not (_finite(p.tau) and p.tau > 0):
        diags.append("tau must be > 0 in FullDelay")

    if cfg.model is Model.DIMER_FREQUENCY_MOD:
        if cfg.freq_mod is None:
            diags.append("dimer_frequency_mod requires the freq_mod record")
        else:
            for name in ("delta0", "delta_g_prime", "omega_prime", "theta_prime"):
                if not _finite(getattr(cfg.freq_mod, name)):
                    diags.append(f"freq_mod.{name} must be finite")
    elif cfg.freq_mod is not None:
        diags.append("freq_mod is only meaningful for dimer_frequency_mod")

    if cfg.regime is Regime.MARKOVIAN_ODE and cfg.model is not Model.DIMER_COUPLING_MOD:
        diags.append("markovian_ode regime is only defined for dimer_coupling_mod")

    if cfg.regime is Regime.RWA_EFFECTIVE:
        diags.extend(_rwa_diagnostics(cfg))

    return diags


def _rwa_diagnostics(cfg: ScenarioConfig) -> list[str]:
    """Conditions under which the rotating-frame reductions were derived."""
    diags: list[str] = []
    p = cfg.params
    if not (_finite(p.phi) and _finite(p.omega) and _finite(p.delta)):
        return diags

    if cfg.model is Model.DIMER_COUPLING_MOD:
        target = dfi_phase(p.m)
        cond_name = "(m+1/2)*pi"
    elif cfg.model is Model.TRIMER_SINGLE_WAVEGUIDE:
        target = (2 * p.m + 1.0 / 3.0) * math.pi
        cond_name = "(2m+1/3)*pi"
    else:
        target = dfi_phase(0)
        cond_name = "pi/2"
    if abs(p.phi - target) > DFI_PHASE_TOL:
        diags.append(f"rwa_effective requires phi = {cond_name} (got {p.phi!r})")

    if cfg.model is Model.DIMER_FREQUENCY_MOD:
        fm = cfg.freq_mod
        if fm is not None and _finite(fm.omega_prime) and _finite(fm.delta0):
            if abs(fm.omega_prime - fm.delta0) > 1e-9 * max(1.0, abs(fm.delta0)):
                diags.append("rwa_effective requires omega_prime = delta0")
    else:
        if abs(p.omega - p.delta) > 1e-9 * max(1.0, abs(p.delta)):
            diags.append("rwa_effective requires omega = delta (resonant modulation)")
    return diags


# --- JSON scenario schema -----------------------------------------------
#
# A scenario is a single JSON object mirroring ScenarioConfig field names in
# snake_case.  Angles are radians, times are 1/Gamma0, complex amplitudes are
# [re, im] pairs.  Unknown keys are rejected so that typos cannot silently
# change the physics.  See docs/scenario_schema.md for examples.

_PARAM_KEYS = ("chi", "phi", "tau", "delta", "omega", "theta", "m")
_FREQ_MOD_KEYS = ("delta0", "delta_g_prime", "omega_prime", "theta_prime")
_STEP_KEYS = ("max_step", "substeps_per_tau")
_TOP_KEYS = ("model", "regime", "params", "initial_state", "t_end",
             "sample_interval", "step_control", "freq_mod")


def _reject_unknown(data: dict, allowed: tuple[str, ...], where: str) -> None:
    for key in data:
        if key not in allowed:
            raise ParseError(f"unknown key '{key}' in {where}")


def _number(data: dict, key: str, where: str) -> float:
    if key not in data:
        raise ParseError(f"missing key '{key}' in {where}")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"key '{key}' in {where} must be a number")
    return float(value)


def scenario_from_dict(data: object) -> ScenarioConfig:
    """Strictly decode a scenario document (see docs/scenario_schema.md)."""
    if not isinstance(data, dict):
        raise ParseError("scenario document must be a JSON object")
    _reject_unknown(data, _TOP_KEYS, "scenario")

    try:
        model = Model(data.get("model"))
    except ValueError:
        raise ParseError(f"unknown model {data.get('model')!r}") from None
    try:
        regime = Regime(data.get("regime"))
    except ValueError:
        raise ParseError(f"unknown regime {data.get('regime')!r}") from None

    raw_params = data.get("params")
    if not isinstance(raw_params, dict):
        raise ParseError("'params' must be an object")
    _reject_unknown(raw_params, _PARAM_KEYS, "params")
    m_raw = raw_params.get("m", 0)
    if isinstance(m_raw, bool) or not isinstance(m_raw, int):
        raise ParseError("key 'm' in params must be an integer")
    params = PhysicalParams(
        chi=_number(raw_params, "chi", "params"),
        phi=_number(raw_params, "phi", "params"),
        tau=_number(raw_params, "tau", "params"),
        delta=_number(raw_params, "delta", "params"),
        omega=_number(raw_params, "omega", "params"),
        theta=_number(raw_params, "theta", "params"),
        m=m_raw,
    )

    freq_mod = None
    if data.get("freq_mod") is not None:
        raw_fm = data["freq_mod"]
        if not isinstance(raw_fm, dict):
            raise ParseError("'freq_mod' must be an object")
        _reject_unknown(raw_fm, _FREQ_MOD_KEYS, "freq_mod")
        freq_mod = FreqModParams(*(_number(raw_fm, k, "freq_mod") for k in _FREQ_MOD_KEYS))

    if "initial_state" in data:
        raw_state = data["initial_state"]
        if not isinstance(raw_state, list) or not raw_state:
            raise ParseError("'initial_state' must be a non-empty list of [re, im] pairs")
        state = []
        for i, entry in enumerate(raw_state):
            if (not isinstance(entry, list) or len(entry) != 2
                    or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in entry)):
                raise ParseError(f"initial_state[{i}] must be a [re, im] pair")
            state.append(complex(entry[0], entry[1]))
    else:
        # default: the excitation starts on atom A
        state = [1 + 0j] + [0j] * (ATOM_COUNT[model] - 1)

    step = StepControl()
    if data.get("step_control") is not None:
        raw_step = data["step_control"]
        if not isinstance(raw_step, dict):
            raise ParseError("'step_control' must be an object")
        _reject_unknown(raw_step, _STEP_KEYS, "step_control")
        substeps = raw_step.get("substeps_per_tau", StepControl.substeps_per_tau)
        if isinstance(substeps, bool) or not isinstance(substeps, int):
            raise ParseError("key 'substeps_per_tau' in step_control must be an integer")
        max_step = StepControl.max_step
        if "max_step" in raw_step:
            max_step = _number(raw_step, "max_step", "step_control")
        step = StepControl(max_step=max_step, substeps_per_tau=substeps)

    return ScenarioConfig(
        model=model,
        regime=regime,
        params=params,
        initial_state=tuple(state),
        t_end=_number(data, "t_end", "scenario"),
        sample_interval=_number(data, "sample_interval", "scenario")
        if "sample_interval" in data else ScenarioConfig.sample_interval,
        step_control=step,
        freq_mod=freq_mod,
    )


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Canonical JSON-ready form; round-trips through scenario_from_dict."""
    doc: dict = {
        "model": cfg.model.value,
        "regime": cfg.regime.value,
        "params": {
            "chi": cfg.params.chi,
            "phi": cfg.params.phi,
            "tau": cfg.params.tau,
            "delta": cfg.params.delta,
            "omega": cfg.params.omega,
            "theta": cfg.params.theta,
            "m": cfg.params.m,
        },
        "initial_state": [[u.real, u.imag] for u in cfg.initial_state],
        "t_end": cfg.t_end,
        "sample_interval": cfg.sample_interval,
        "step_control": {
            "max_step": cfg.step_control.max_step,
            "substeps_per_tau": cfg.step_control.substeps_per_tau,
        },
    }
    if cfg.freq_mod is not None:
        doc["freq_mod"] = {
            "delta0": cfg.freq_mod.delta0,
            "delta_g_prime": cfg.freq_mod.delta_g_prime,
            "omega_prime": cfg.freq_mod.omega_prime,
            "theta_prime": cfg.freq_mod.theta_prime,
        }
    return doc


def with_params(cfg: ScenarioConfig, **updates) -> ScenarioConfig:
    """Copy of cfg with selected PhysicalParams fields replaced."""
    return replace(cfg, params=replace(cfg.params, **updates))
