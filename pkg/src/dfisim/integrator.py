"""Fixed-step, delay-aware classical Runge-Kutta integration.

The delay grid is chosen commensurate with the propagation delay: the node
spacing h divides tau exactly (h = tau / (2 * substeps_per_tau * k) with the
smallest integer k giving h <= max_step).  Every retarded argument t - l*tau
then lands exactly on a node for node-time stages and exactly on an interval
midpoint for the half-step stages, where the stored (state, derivative) pairs
give a cubic Hermite value with O(h^4) error, matching the integrator order.

The solution's derivative jumps when a delayed term switches on at t = l*tau.
Those points coincide with grid nodes by construction; the stepper evaluates
the first stage with the right-sided limit and the last stage with the
left-sided limit, and stores both one-sided derivatives at the jump nodes so
dense interpolation on either adjacent interval uses the correct slope.  This
keeps the classical fourth-order convergence across the turn-on points.

A first-order Euler scheme with nearest-node delayed lookups is included as a
deliberately independent cross-check; it shares no stepping or interpolation
code with the main method.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import Regime, ScenarioConfig
from .models import HistoryUnderflow, RhsFunction

#: Amplitudes are physically bounded by 1; exceeding this signals divergence.
BLOWUP_LIMIT = 2.0


class StepTooLarge(ValueError):
    """The resolved step cannot resolve the delay or the fastest frequency."""


class NumericalBlowup(RuntimeError):
    """An amplitude left the physically meaningful range during stepping."""


@dataclass(frozen=True)
class TimeSeries:
    """Sampled trajectory: complex amplitudes and derived probabilities."""

    times: np.ndarray            # (S,) float, strictly increasing
    amplitudes: np.ndarray       # (S, n) complex
    probabilities: np.ndarray    # (S, n) float, P_j = |u_j|^2
    total_probability: np.ndarray  # (S,) float

    @staticmethod
    def build(times: Sequence[float], states: Sequence[tuple]) -> "TimeSeries":
        t = np.asarray(times, dtype=float)
        amps = np.asarray(states, dtype=complex)
        probs = np.abs(amps) ** 2
        return TimeSeries(t, amps, probs, probs.sum(axis=1))

    @property
    def n_atoms(self) -> int:
        return self.amplitudes.shape[1]

    def probability(self, atom: int) -> np.ndarray:
        return self.probabilities[:, atom]


class HistoryBuffer:
    """Uniform-grid (time, state, derivative) nodes with dense interpolation.

    Node i sits at t = i*step.  ``slopes[i]`` is the right-sided derivative at
    node i (the value used when stepping away from it); nodes where the
    derivative jumps additionally keep the left-sided value in
    ``left_slopes``.  Lookups at t < 0 return the prehistory, which is
    identically zero unless a different history function is supplied.
    """

    def __init__(self, step: float, arity: int,
                 prehistory: Callable[[float], tuple] | None = None):
        self.step = step
        self.arity = arity
        self.prehistory = prehistory if prehistory is not None else (
            lambda t, _z=(0j,) * arity: _z)
        self.states: list[tuple] = []
        self.slopes: list[tuple] = []
        self.left_slopes: dict[int, tuple] = {}
        self.start_index = 0

    def append(self, state: tuple, slope: tuple) -> None:
        self.states.append(state)
        self.slopes.append(slope)

    @property
    def node_count(self) -> int:
        return len(self.states)

    @property
    def t_last(self) -> float:
        return (len(self.states) - 1) * self.step

    def trim_before(self, t: float) -> None:
        """Release nodes strictly earlier than t (keeps indices stable)."""
        cut = min(len(self.states), int(math.floor(t / self.step + 1e-9)))
        for i in range(self.start_index, cut):
            self.states[i] = None
            self.slopes[i] = None
        self.start_index = max(self.start_index, cut)

    def state_at(self, t: float) -> tuple:
        """Dense lookup: prehistory for t < 0, node values, cubic Hermite between."""
        if t < 0.0:
            return self.prehistory(t)
        h = self.step
        x = t / h
        last = len(self.states) - 1
        nearest = round(x)
        if abs(x - nearest) <= 1e-6:
            i = int(nearest)
            if i > last:
                raise ValueError(f"history ends at t={last * h:.6g}, asked for {t:.6g}")
            if i < self.start_index:
                raise HistoryUnderflow(f"history trimmed past t={t:.6g}")
            return self.states[i]
        i = int(math.floor(x))
        if i + 1 > last:
            raise ValueError(f"history ends at t={last * h:.6g}, asked for {t:.6g}")
        if i < self.start_index:
            raise HistoryUnderflow(f"history trimmed past t={t:.6g}")
        s = x - i
        uL, uR = self.states[i], self.states[i + 1]
        fL = self.slopes[i]
        fR = self.left_slopes.get(i + 1, self.slopes[i + 1])
        s2 = s * s
        s3 = s2 * s
        h00 = 2.0 * s3 - 3.0 * s2 + 1.0
        h10 = (s3 - 2.0 * s2 + s) * h
        h01 = -2.0 * s3 + 3.0 * s2
        h11 = (s3 - s2) * h
        return tuple(h00 * a + h10 * fa + h01 * b + h11 * fb
                     for a, b, fa, fb in zip(uL, uR, fL, fR))


def dde_step_size(cfg: ScenarioConfig) -> tuple[float, int]:
    """(h, nodes per tau): the finest commensurate grid with h <= max_step."""
    ctrl = cfg.step_control
    base = 2 * ctrl.substeps_per_tau
    k = max(1, math.ceil(cfg.params.tau / (base * ctrl.max_step) - 1e-12))
    return cfg.params.tau / (base * k), base * k


def ode_step_size(cfg: ScenarioConfig) -> float:
    """Largest step <= max_step that divides the sample interval."""
    m = max(1, math.ceil(cfg.sample_interval / cfg.step_control.max_step - 1e-12))
    return cfg.sample_interval / m


def _fastest_frequency(cfg: ScenarioConfig) -> float:
    fast = max(abs(cfg.params.omega), abs(cfg.params.delta))
    if cfg.freq_mod is not None:
        fast = max(fast, abs(cfg.freq_mod.omega_prime), abs(cfg.freq_mod.delta0))
    return fast


def _check_step(h: float, cfg: ScenarioConfig, tau: float | None = None) -> None:
    if tau is not None and h > 0.5 * tau:
        raise StepTooLarge(f"step {h:.3g} exceeds tau/2 = {0.5 * tau:.3g}")
    fast = _fastest_frequency(cfg)
    if h * fast > 0.1:
        raise StepTooLarge(
            f"step {h:.3g} under-resolves the fastest frequency {fast:.3g} "
            f"(h*f = {h * fast:.3g} > 0.1); lower step_control.max_step")


def _step_count(t_end: float, h: float) -> int:
    return int(math.ceil(t_end / h - 1e-9))


def _sample_times(cfg: ScenarioConfig) -> list[float]:
    n = int(math.floor(cfg.t_end / cfg.sample_interval + 1e-9))
    return [j * cfg.sample_interval for j in range(n + 1)]


def integrate_dde(rhs: RhsFunction, cfg: ScenarioConfig,
                  prehistory: Callable[[float], tuple] | None = None,
                  with_history: bool = False):
    """Advance the time-delayed equations; returns samples at sample_interval.

    The caller is responsible for validating cfg (see core.validate_scenario);
    only the structural requirements of the scheme are re-checked here.
    With ``with_history`` the dense HistoryBuffer is returned alongside the
    series for post-hoc interpolation.
    """
    if cfg.regime is not Regime.FULL_DELAY:
        raise ValueError("integrate_dde requires the full_delay regime")
    if len(cfg.initial_state) != rhs.arity:
        raise ValueError("initial_state length does not match rhs arity")
    tau = cfg.params.tau
    if not (math.isfinite(tau) and tau > 0):
        raise ValueError("full_delay integration requires tau > 0")

    h, lag_steps = dde_step_size(cfg)
    _check_step(h, cfg, tau=tau)

    arity, L = rhs.arity, rhs.max_lag
    buf = HistoryBuffer(h, arity, prehistory=prehistory)
    states, slopes, left_slopes = buf.states, buf.slopes, buf.left_slopes
    pre = buf.prehistory
    phases = [cmath.exp(1j * l * cfg.params.phi) for l in range(L + 1)]
    offsets = [l * lag_steps for l in range(L + 1)]
    breakpoints = frozenset(offsets[1:])
    ev = rhs.evaluate
    h2, h6, q8 = 0.5 * h, h / 6.0, h / 8.0
    lag_range = range(1, L + 1)

    def node_delays(i: int, rightward: bool):
        # Retarded values at a node time; ``rightward`` selects the one-sided
        # limit taken exactly at a turn-on boundary.
        cols = []
        for l in lag_range:
            m = i - offsets[l]
            if m > 0 or (m == 0 and rightward):
                vals = states[m]
            else:
                vals = pre(m * h)
            ph = phases[l]
            cols.append(tuple(ph * v for v in vals))
        return tuple(cols)

    def half_delays(i: int):
        # Retarded values at a node time + h/2: always an interval midpoint,
        # where the cubic Hermite value has the closed form below.
        cols = []
        for l in lag_range:
            m = i - offsets[l]
            ph = phases[l]
            if m >= 0:
                uL, uR = states[m], states[m + 1]
                fL = slopes[m]
                fR = left_slopes.get(m + 1, slopes[m + 1])
                cols.append(tuple(ph * (0.5 * (a + b) + q8 * (fa - fb))
                                  for a, b, fa, fb in zip(uL, uR, fL, fR)))
            else:
                cols.append(tuple(ph * v for v in pre((m + 0.5) * h)))
        return tuple(cols)

    u = tuple(complex(v) for v in cfg.initial_state)
    states.append(u)
    k_next = ev(0.0, u, node_delays(0, True))
    slopes.append(k_next)

    for n in range(_step_count(cfg.t_end, h)):
        t = n * h
        k1 = k_next
        dmid = half_delays(n)
        u2 = tuple(a + h2 * b for a, b in zip(u, k1))
        k2 = ev(t + h2, u2, dmid)
        u3 = tuple(a + h2 * b for a, b in zip(u, k2))
        k3 = ev(t + h2, u3, dmid)
        i1 = n + 1
        t1 = i1 * h
        dleft = node_delays(i1, False)
        u4 = tuple(a + h * b for a, b in zip(u, k3))
        k4 = ev(t1, u4, dleft)
        u = tuple(a + h6 * (b1 + 2.0 * (b2 + b3) + b4)
                  for a, b1, b2, b3, b4 in zip(u, k1, k2, k3, k4))
        for v in u:
            if abs(v) > BLOWUP_LIMIT:
                raise NumericalBlowup(f"|u| = {abs(v):.3g} > {BLOWUP_LIMIT} at t = {t1:.6g}")
        states.append(u)
        if i1 in breakpoints:
            left_slopes[i1] = ev(t1, u, dleft)
            k_next = ev(t1, u, node_delays(i1, True))
        else:
            k_next = ev(t1, u, dleft)
        slopes.append(k_next)

    sample_times = _sample_times(cfg)
    series = TimeSeries.build(sample_times, [buf.state_at(t) for t in sample_times])
    return (series, buf) if with_history else series


def integrate_ode(rhs: RhsFunction, cfg: ScenarioConfig) -> TimeSeries:
    """Same Runge-Kutta scheme for the delay-free (reduced) regimes."""
    if cfg.regime is Regime.FULL_DELAY:
        raise ValueError("integrate_ode handles the reduced regimes only")
    if len(cfg.initial_state) != rhs.arity:
        raise ValueError("initial_state length does not match rhs arity")

    dt = cfg.sample_interval
    h = ode_step_size(cfg)
    _check_step(h, cfg)
    per_sample = round(dt / h)
    n_samples = int(math.floor(cfg.t_end / dt + 1e-9))
    ev = rhs.evaluate
    h2, h6 = 0.5 * h, h / 6.0

    u = tuple(complex(v) for v in cfg.initial_state)
    times = [0.0]
    snaps = [u]
    for j in range(n_samples):
        base = j * dt
        for i in range(per_sample):
            t = base + i * h
            k1 = ev(t, u, None)
            k2 = ev(t + h2, tuple(a + h2 * b for a, b in zip(u, k1)), None)
            k3 = ev(t + h2, tuple(a + h2 * b for a, b in zip(u, k2)), None)
            k4 = ev(t + h, tuple(a + h * b for a, b in zip(u, k3)), None)
            u = tuple(a + h6 * (b1 + 2.0 * (b2 + b3) + b4)
                      for a, b1, b2, b3, b4 in zip(u, k1, k2, k3, k4))
        for v in u:
            if abs(v) > BLOWUP_LIMIT:
                raise NumericalBlowup(f"|u| = {abs(v):.3g} > {BLOWUP_LIMIT} "
                                      f"at t = {(j + 1) * dt:.6g}")
        times.append((j + 1) * dt)
        snaps.append(u)
    return TimeSeries.build(times, snaps)


def integrate_euler_oracle(rhs: RhsFunction, cfg: ScenarioConfig, h_tiny: float,
                           prehistory: Callable[[float], tuple] | None = None) -> TimeSeries:
    """Brute-force first-order reference used only for cross-validation.

    Explicit Euler stepping with nearest-node delayed lookups (no
    interpolation).  h_tiny must be at most 1/50 of the step the main method
    would use for the same scenario.
    """
    if len(cfg.initial_state) != rhs.arity:
        raise ValueError("initial_state length does not match rhs arity")
    if cfg.regime is Regime.FULL_DELAY:
        h_ref, _ = dde_step_size(cfg)
    else:
        h_ref = ode_step_size(cfg)
    if h_tiny > h_ref / 50.0 * (1.0 + 1e-12):
        raise ValueError(f"h_tiny = {h_tiny:.3g} exceeds h/50 = {h_ref / 50.0:.3g}")

    arity, L = rhs.arity, rhs.max_lag
    pre = prehistory if prehistory is not None else (lambda t: (0j,) * arity)
    delayed = cfg.regime is Regime.FULL_DELAY and L > 0
    if delayed:
        offsets = [round(l * cfg.params.tau / h_tiny) for l in range(1, L + 1)]
        phases = [cmath.exp(1j * l * cfg.params.phi) for l in range(1, L + 1)]
        ring_len = offsets[-1] + 1
        ring = [None] * ring_len
        ring[0] = tuple(complex(v) for v in cfg.initial_state)

    ev = rhs.evaluate
    dt = cfg.sample_interval
    n_steps = _step_count(cfg.t_end, h_tiny)
    n_samples = int(math.floor(cfg.t_end / dt + 1e-9))
    targets = [round(j * dt / h_tiny) for j in range(n_samples + 1)]

    u = tuple(complex(v) for v in cfg.initial_state)
    times: list[float] = []
    snaps: list[tuple] = []
    j_next = 0
    for n in range(n_steps + 1):
        if j_next <= n_samples and n == targets[j_next]:
            times.append(j_next * dt)
            snaps.append(u)
            j_next += 1
        if n == n_steps:
            break
        if delayed:
            cols = []
            for off, ph in zip(offsets, phases):
                m = n - off
                vals = ring[m % ring_len] if m > 0 else pre(m * h_tiny)
                cols.append(tuple(ph * v for v in vals))
            table = tuple(cols)
        else:
            table = None
        f = ev(n * h_tiny, u, table)
        u = tuple(a + h_tiny * b for a, b in zip(u, f))
        for v in u:
            if abs(v) > BLOWUP_LIMIT:
                raise NumericalBlowup(f"|u| = {abs(v):.3g} > {BLOWUP_LIMIT} "
                                      f"at t = {(n + 1) * h_tiny:.6g}")
        if delayed:
            ring[(n + 1) % ring_len] = u
    return TimeSeries.build(times, snaps)
