"""Right-hand sides for every model/regime pair.

Every emitter layout reduces, in Gamma0 = 1 units, to a linear system for the
complex excitation amplitudes u_j(t).  The time-delayed equations couple the
current state to retarded terms

    D_{j,l}(t) = exp(i*l*phi) * u_j(t - l*tau) * Theta(t - l*tau),

where Theta(x) = 1 for x > 0 and 0 for x <= 0, so delayed contributions are
exactly zero until strictly after the photon has had time to propagate.

An RhsFunction evaluates the derivative given (t, state, delays), where
``delays`` is a tuple indexed as delays[l-1][j] holding the D_{j,l} values for
l = 1..max_lag (None for the reduced, delay-free regimes).  Evaluation is pure;
the integrator owns all history bookkeeping.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

from .core import (
    DFI_PHASE_TOL,
    DFIConditionViolated,
    FreqModParams,
    Model,
    ModulationProfile,
    PhysicalParams,
    Regime,
    ScenarioConfig,
    derived_coupling_Gm,
    dfi_phase,
)

DelayTable = tuple[tuple[complex, ...], ...]


class HistoryUnderflow(LookupError):
    """A delayed lookup fell inside [0, t) but before the stored history."""


@dataclass(frozen=True)
class RhsFunction:
    """Pure derivative evaluator: (t, state, delays) -> state derivative."""

    arity: int
    max_lag: int
    evaluate: Callable[[float, tuple, Optional[DelayTable]], tuple]


def delayed_term(j: int, l: int, t: float, history, params: PhysicalParams) -> complex:
    """Single retarded term D_{j,l}(t) looked up from a history buffer.

    Returns exactly 0 for t <= l*tau (Heaviside gate); otherwise
    exp(i*l*phi) * u_j(t - l*tau) with dense interpolation between nodes.
    Raises HistoryUnderflow when the requested time is >= 0 but precedes the
    stored history.
    """
    t_ret = t - l * params.tau
    if t_ret <= 0.0:
        return 0j
    state = history.state_at(t_ret)
    return cmath.exp(1j * l * params.phi) * state[j]


def _coupling_drive(params: PhysicalParams, phase: float) -> Callable[[float], float]:
    """g(t)/g0 = chi*cos(omega*t + phase) as a fast callable."""
    return ModulationProfile.cosine(params.chi, params.omega, phase).as_callable()


# --- giant-atom dimer with coupling modulation ----------------------------

def rhs_dimer_dde(params: PhysicalParams) -> RhsFunction:
    """Time-delayed dimer: braided coupling points, modulated atom A.

    du_A = -[2 g(t) (g(t) u_A + g(t-2tau) D_A2) + g(t) (3 D_B1 + D_B3)]
    du_B = -i delta u_B - [2 (u_B + D_B2) + 3 g(t-tau) D_A1 + g(t-3tau) D_A3]

    with g in units of g0 (so g(t) = chi*cos(omega*t + theta)).
    """
    g = _coupling_drive(params, params.theta)
    tau = params.tau
    i_delta = 1j * params.delta

    def evaluate(t, state, delays):
        uA, uB = state
        (dA1, dB1), (dA2, dB2), (dA3, dB3) = delays
        gt = g(t)
        duA = -(2.0 * gt * (gt * uA + g(t - 2.0 * tau) * dA2) + gt * (3.0 * dB1 + dB3))
        duB = (-i_delta * uB
               - (2.0 * (uB + dB2) + 3.0 * g(t - tau) * dA1 + g(t - 3.0 * tau) * dA3))
        return (duA, duB)

    return RhsFunction(arity=2, max_lag=3, evaluate=evaluate)


def rhs_dimer_markovian(params: PhysicalParams) -> RhsFunction:
    """tau -> 0 limit of the dimer; retardation collapsed into phase factors.

    du_A = -2 g(t)^2 (1 + e^{2i phi}) u_A - g(t) (3 e^{i phi} + e^{3i phi}) u_B
    du_B = -i delta u_B - 2 (1 + e^{2i phi}) u_B - g(t) (3 e^{i phi} + e^{3i phi}) u_A
    """
    g = _coupling_drive(params, params.theta)
    self_fac = 1.0 + cmath.exp(2j * params.phi)
    cross_fac = 3.0 * cmath.exp(1j * params.phi) + cmath.exp(3j * params.phi)
    i_delta = 1j * params.delta

    def evaluate(t, state, delays):
        uA, uB = state
        gt = g(t)
        duA = -2.0 * gt * gt * self_fac * uA - gt * cross_fac * uB
        duB = -i_delta * uB - 2.0 * self_fac * uB - gt * cross_fac * uA
        return (duA, duB)

    return RhsFunction(arity=2, max_lag=0, evaluate=evaluate)


def rhs_dimer_rwa(params: PhysicalParams) -> RhsFunction:
    """Resonant rotating frame at the dissipationless point: pure exchange.

    du_A = -i G_m e^{i theta} u_B,  du_B = -i G_m e^{-i theta} u_A
    """
    gm = derived_coupling_Gm(params)
    c_ab = -1j * gm * cmath.exp(1j * params.theta)
    c_ba = -1j * gm * cmath.exp(-1j * params.theta)

    def evaluate(t, state, delays):
        uA, uB = state
        return (c_ab * uB, c_ba * uA)

    return RhsFunction(arity=2, max_lag=0, evaluate=evaluate)


# --- trimer with a directly coupled third atom -----------------------------

def rhs_trimer_direct_dde(params: PhysicalParams) -> RhsFunction:
    """Dimer equations plus atom C coupled directly: lam(t) = 2 G0 cos(omega t)
    to A and a constant G0 to B, both detuned by delta from A."""
    g = _coupling_drive(params, params.theta)
    lam = _coupling_drive(params, 0.0)  # lam(t)/2 in g0 units: G0 cos(omega t)
    g0_eff = params.chi  # direct coupling strength G0 = chi * Gamma0
    tau = params.tau
    i_delta = 1j * params.delta

    def evaluate(t, state, delays):
        uA, uB, uC = state
        (dA1, dB1, _), (dA2, dB2, _), (dA3, dB3, _) = delays
        gt = g(t)
        lam_t = 2.0 * lam(t)
        duA = (-(2.0 * gt * (gt * uA + g(t - 2.0 * tau) * dA2) + gt * (3.0 * dB1 + dB3))
               - 1j * lam_t * uC)
        duB = (-i_delta * uB
               - (2.0 * (uB + dB2) + 3.0 * g(t - tau) * dA1 + g(t - 3.0 * tau) * dA3)
               - 1j * g0_eff * uC)
        duC = -i_delta * uC - 1j * (lam_t * uA + g0_eff * uB)
        return (duA, duB, duC)

    return RhsFunction(arity=3, max_lag=3, evaluate=evaluate)


def rhs_trimer_direct_rwa(params: PhysicalParams) -> RhsFunction:
    """Closed-loop trimer in the resonant frame; theta is the loop flux.

    du_A = -i G0 (e^{i theta} u_B + u_C)
    du_B = -i G0 (e^{-i theta} u_A + u_C)
    du_C = -i G0 (u_A + u_B)
    """
    _require_phase(params.phi, dfi_phase(0), "pi/2")
    g0_eff = params.chi
    e_p = cmath.exp(1j * params.theta)
    e_m = cmath.exp(-1j * params.theta)

    def evaluate(t, state, delays):
        uA, uB, uC = state
        return (
            -1j * g0_eff * (e_p * uB + uC),
            -1j * g0_eff * (e_m * uA + uC),
            -1j * g0_eff * (uA + uB),
        )

    return RhsFunction(arity=3, max_lag=0, evaluate=evaluate)


# --- all-giant-atom trimer on two waveguides --------------------------------

def rhs_trimer_two_wg_dde(params: PhysicalParams) -> RhsFunction:
    """Three giant atoms, two waveguides; atom A carries two drives
    g(t) = chi cos(omega t + theta) and g'(t) = chi cos(omega t); lags to 4 tau."""
    g = _coupling_drive(params, params.theta)
    gp = _coupling_drive(params, 0.0)
    tau = params.tau
    i_delta = 1j * params.delta

    def evaluate(t, state, delays):
        uA, uB, uC = state
        (dA1, dB1, dC1), (dA2, dB2, dC2), (dA3, dB3, dC3), (dA4, _, dC4) = delays
        gt = g(t)
        gpt = gp(t)
        duA = -(2.0 * (gt * gt + gpt * gpt) * uA
                + 2.0 * (gt * g(t - 2.0 * tau) + gpt * gp(t - 2.0 * tau)) * dA2
                + gt * (3.0 * dB1 + dB3)
                + gt * (uC + 2.0 * dC2 + dC4)
                + gpt * (3.0 * dC1 + dC3))
        duB = (-i_delta * uB
               - (2.0 * (uB + dB2)
                  + 3.0 * g(t - tau) * dA1 + g(t - 3.0 * tau) * dA3
                  + 3.0 * dC1 + dC3))
        duC = (-i_delta * uC
               - (4.0 * (uC + dC2)
                  + gt * uA + 2.0 * g(t - 2.0 * tau) * dA2 + g(t - 4.0 * tau) * dA4
                  + 3.0 * gp(t - tau) * dA1 + gp(t - 3.0 * tau) * dA3
                  + 3.0 * dB1 + dB3))
        return (duA, duB, duC)

    return RhsFunction(arity=3, max_lag=4, evaluate=evaluate)


def rhs_trimer_two_wg_rwa(params: PhysicalParams) -> RhsFunction:
    """Protected all-to-all ring: A-B and A-C exchange G0 (flux on A-B),
    B-C exchange 2*Gamma0; all magnitudes equal when chi = 2."""
    _require_phase(params.phi, dfi_phase(0), "pi/2")
    g0_eff = params.chi
    e_p = cmath.exp(1j * params.theta)
    e_m = cmath.exp(-1j * params.theta)

    def evaluate(t, state, delays):
        uA, uB, uC = state
        return (
            -1j * g0_eff * e_p * uB - 1j * g0_eff * uC,
            -1j * g0_eff * e_m * uA - 2j * uC,
            -1j * g0_eff * uA - 2j * uB,
        )

    return RhsFunction(arity=3, max_lag=0, evaluate=evaluate)


# --- all-giant-atom trimer on a single waveguide ----------------------------

def rhs_trimer_single_wg_dde(params: PhysicalParams) -> RhsFunction:
    """Single-waveguide trimer; params.phi/params.tau play the primed role
    (point spacing d'); lags extend to 5 tau'."""
    g = _coupling_drive(params, params.theta)
    tau = params.tau
    i_delta = 1j * params.delta

    def evaluate(t, state, delays):
        uA, uB, uC = state
        ((dA1, dB1, dC1), (dA2, dB2, dC2), (dA3, dB3, dC3),
         (dA4, dB4, dC4), (dA5, _, dC5)) = delays
        gt = g(t)
        duA = -(2.0 * gt * (gt * uA + g(t - 3.0 * tau) * dA3)
                + gt * (2.0 * dB1 + dB2 + dB4 + dC1 + 2.0 * dC2 + dC5))
        duB = (-i_delta * uB
               - (2.0 * (uB + dB3)
                  + 2.0 * g(t - tau) * dA1 + g(t - 2.0 * tau) * dA2
                  + g(t - 4.0 * tau) * dA4
                  + 2.0 * dC1 + dC2 + dC4))
        duC = (-i_delta * uC
               - (2.0 * (uC + dC3)
                  + g(t - tau) * dA1 + 2.0 * g(t - 2.0 * tau) * dA2
                  + g(t - 5.0 * tau) * dA5
                  + 2.0 * dB1 + dB2 + dB4))
        return (duA, duB, duC)

    return RhsFunction(arity=3, max_lag=5, evaluate=evaluate)


def rhs_trimer_single_wg_rwa(params: PhysicalParams) -> RhsFunction:
    """Single-waveguide ring in the resonant frame: both A links carry
    e^{i theta}, so the loop flux vanishes for every theta.

    Couplings are scaled by sin(pi/3) relative to the two-waveguide layout.
    """
    target = (2 * params.m + 1.0 / 3.0) * math.pi
    _require_phase(params.phi, target, "(2m+1/3)*pi")
    s3 = math.sin(math.pi / 3.0)
    g_eff = params.chi * s3          # G' = G0 sin(pi/3)
    gamma_eff = s3                   # Gamma' = Gamma0 sin(pi/3)
    e_p = cmath.exp(1j * params.theta)
    e_m = cmath.exp(-1j * params.theta)

    def evaluate(t, state, delays):
        uA, uB, uC = state
        return (
            -1j * g_eff * e_p * (uB + uC),
            -1j * g_eff * e_m * uA - 2j * gamma_eff * uC,
            -1j * g_eff * e_m * uA - 2j * gamma_eff * uB,
        )

    return RhsFunction(arity=3, max_lag=0, evaluate=evaluate)


# --- frequency-modulated dimer ----------------------------------------------

def rhs_freqmod_dimer_dde(params: PhysicalParams, freq_mod: FreqModParams) -> RhsFunction:
    """Dimer with constant couplings and a modulated detuning on atom B.

    du_A = -(2 u_A + 2 D_A2 + 3 D_B1 + D_B3)
    du_B = -i [delta0 + delta_g' cos(omega' t + theta')] u_B
           - (2 u_B + 2 D_B2 + 3 D_A1 + D_A3)
    """
    drive = ModulationProfile.cosine(
        freq_mod.delta_g_prime, freq_mod.omega_prime, freq_mod.theta_prime
    ).as_callable()
    delta0 = freq_mod.delta0

    def evaluate(t, state, delays):
        uA, uB = state
        (dA1, dB1), (dA2, dB2), (dA3, dB3) = delays
        duA = -(2.0 * uA + 2.0 * dA2 + 3.0 * dB1 + dB3)
        duB = (-1j * (delta0 + drive(t)) * uB
               - (2.0 * uB + 2.0 * dB2 + 3.0 * dA1 + dA3))
        return (duA, duB)

    return RhsFunction(arity=2, max_lag=3, evaluate=evaluate)


def rhs_freqmod_dimer_rwa(freq_mod: FreqModParams) -> RhsFunction:
    """Sideband-resolved exchange with Bessel-suppressed strength.

    du_A = -2i J_{-1}(eta) e^{i theta'} u_B, du_B = -2i J_{-1}(eta) e^{-i theta'} u_A,
    with eta = delta_g'/omega' and J_{-1}(eta) = -J_1(eta).
    """
    eta = freq_mod.delta_g_prime / freq_mod.omega_prime
    g_eff = 2.0 * bessel_first_kind(-1, eta)
    c_ab = -1j * g_eff * cmath.exp(1j * freq_mod.theta_prime)
    c_ba = -1j * g_eff * cmath.exp(-1j * freq_mod.theta_prime)

    def evaluate(t, state, delays):
        uA, uB = state
        return (c_ab * uB, c_ba * uA)

    return RhsFunction(arity=2, max_lag=0, evaluate=evaluate)


# --- dispatch ----------------------------------------------------------------

def build_rhs(cfg: ScenarioConfig) -> RhsFunction:
    """RhsFunction for a validated scenario (model/regime pair)."""
    model, regime, p = cfg.model, cfg.regime, cfg.params
    if model is Model.DIMER_COUPLING_MOD:
        if regime is Regime.FULL_DELAY:
            return rhs_dimer_dde(p)
        if regime is Regime.MARKOVIAN_ODE:
            return rhs_dimer_markovian(p)
        return rhs_dimer_rwa(p)
    if model is Model.TRIMER_DIRECT:
        return rhs_trimer_direct_dde(p) if regime is Regime.FULL_DELAY else rhs_trimer_direct_rwa(p)
    if model is Model.TRIMER_TWO_WAVEGUIDE:
        return rhs_trimer_two_wg_dde(p) if regime is Regime.FULL_DELAY else rhs_trimer_two_wg_rwa(p)
    if model is Model.TRIMER_SINGLE_WAVEGUIDE:
        return rhs_trimer_single_wg_dde(p) if regime is Regime.FULL_DELAY else rhs_trimer_single_wg_rwa(p)
    if model is Model.DIMER_FREQUENCY_MOD:
        if cfg.freq_mod is None:
            raise ValueError("dimer_frequency_mod requires freq_mod parameters")
        if regime is Regime.FULL_DELAY:
            return rhs_freqmod_dimer_dde(p, cfg.freq_mod)
        return rhs_freqmod_dimer_rwa(cfg.freq_mod)
    raise ValueError(f"unsupported model/regime: {model}/{regime}")


def _require_phase(phi: float, target: float, name: str) -> None:
    if abs(phi - target) > DFI_PHASE_TOL:
        raise DFIConditionViolated(f"phi={phi!r} must equal {name} ({target!r})")


# --- Bessel functions of the first kind --------------------------------------

BESSEL_MAX_ORDER = 30
BESSEL_MAX_ARG = 50.0


class DomainError(ValueError):
    """Argument outside the supported Bessel evaluation range."""


def bessel_first_kind(q: int, z: float) -> float:
    """J_q(z) by the ascending power series.

    Terms are added until the next one falls below 1e-14 relative to the
    accumulated sum.  Negative orders and arguments use the symmetries
    J_{-q}(z) = (-1)^q J_q(z) and J_q(-z) = (-1)^q J_q(z).  Intended for the
    moderate orders/arguments of sideband physics; accuracy degrades by
    cancellation once |z| substantially exceeds the order.
    """
    if abs(q) > BESSEL_MAX_ORDER or abs(z) > BESSEL_MAX_ARG:
        raise DomainError(f"bessel_first_kind supports |q| <= {BESSEL_MAX_ORDER}, "
                          f"|z| <= {BESSEL_MAX_ARG}; got q={q}, z={z}")
    sign = 1.0
    if q < 0:
        q = -q
        if q % 2:
            sign = -sign
    if z < 0:
        z = -z
        if q % 2:
            sign = -sign
    if z == 0.0:
        return sign if q == 0 else 0.0

    half = 0.5 * z
    term = half ** q / math.factorial(q)
    total = term
    ratio_base = -half * half
    for k in range(1, 400):
        term *= ratio_base / (k * (q + k))
        total += term
        if abs(term) <= 1e-14 * abs(total):
            break
    return sign * total
