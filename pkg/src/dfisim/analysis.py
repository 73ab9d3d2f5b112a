"""Observables and closed-form oracles for the reduced dynamics.

Peak detection works directly on sampled probability traces.  Trajectories
from the time-delayed equations carry a fast ripple at the modulation
harmonics on top of the slow exchange envelope; passing a ``smooth_window``
equal to one or two modulation periods averages the ripple away so that peak
times refer to the envelope, which is how the transfer dynamics are read.
Smoothing is centered and is applied identically to every atom, so relative
peak ordering is unaffected.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DFI_PHASE_TOL,
    DFIConditionViolated,
    FreqModParams,
    Model,
    PhysicalParams,
    derived_coupling_Gm,
    dfi_phase,
)
from .integrator import TimeSeries
from .models import bessel_first_kind


class DegenerateLoop(ValueError):
    """A loop flux was requested but one of the couplings vanishes."""


class InsufficientOscillations(ValueError):
    """Fewer than two qualifying maxima in the trace."""


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Hermitian generator of the reduced dynamics, u' = -i H u.

    The upper triangle is specified and the lower triangle is its exact
    conjugate, so H = H^dagger holds by construction.
    """

    matrix: np.ndarray
    source_model: Model

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def _hermitian(n: int, upper: dict[tuple[int, int], complex]) -> np.ndarray:
    h = np.zeros((n, n), dtype=complex)
    for (i, j), v in upper.items():
        h[i, j] = v
        h[j, i] = v.conjugate()
    return h


def build_effective_hamiltonian(model: Model, params: PhysicalParams,
                                freq_mod: FreqModParams | None = None) -> EffectiveHamiltonian:
    """Reduced-frame generator for each layout (Gamma0 = 1 units).

    Raises DFIConditionViolated unless the layout's dissipationless phase
    condition holds.
    """
    theta = params.theta
    if model is Model.DIMER_COUPLING_MOD:
        gm = derived_coupling_Gm(params)
        mat = _hermitian(2, {(0, 1): gm * cmath.exp(1j * theta)})
    elif model is Model.TRIMER_DIRECT:
        _check_phase(params.phi, dfi_phase(0), "pi/2")
        g0 = params.chi
        mat = _hermitian(3, {(0, 1): g0 * cmath.exp(1j * theta), (0, 2): g0, (1, 2): g0})
    elif model is Model.TRIMER_TWO_WAVEGUIDE:
        _check_phase(params.phi, dfi_phase(0), "pi/2")
        g0 = params.chi
        mat = _hermitian(3, {(0, 1): g0 * cmath.exp(1j * theta), (0, 2): g0, (1, 2): 2.0})
    elif model is Model.TRIMER_SINGLE_WAVEGUIDE:
        _check_phase(params.phi, (2 * params.m + 1.0 / 3.0) * math.pi, "(2m+1/3)*pi")
        s3 = math.sin(math.pi / 3.0)
        gp = params.chi * s3
        e_t = cmath.exp(1j * theta)
        mat = _hermitian(3, {(0, 1): gp * e_t, (0, 2): gp * e_t, (1, 2): 2.0 * s3})
    elif model is Model.DIMER_FREQUENCY_MOD:
        if freq_mod is None:
            raise ValueError("dimer_frequency_mod requires freq_mod parameters")
        eta = freq_mod.delta_g_prime / freq_mod.omega_prime
        g_eff = 2.0 * bessel_first_kind(-1, eta)
        mat = _hermitian(2, {(0, 1): g_eff * cmath.exp(1j * freq_mod.theta_prime)})
    else:
        raise ValueError(f"unknown model {model}")
    return EffectiveHamiltonian(mat, model)


def _check_phase(phi: float, target: float, name: str) -> None:
    if abs(phi - target) > DFI_PHASE_TOL:
        raise DFIConditionViolated(f"phi={phi!r} must equal {name} ({target!r})")


def wrap_angle(x: float) -> float:
    """Wrap to (-pi, pi]; exact at 0."""
    y = x - 2.0 * math.pi * math.floor(x / (2.0 * math.pi) + 0.5)
    if y <= -math.pi:
        y += 2.0 * math.pi
    return y


def loop_flux(ham: EffectiveHamiltonian) -> float:
    """Gauge-invariant phase arg(H_AB * H_BC * H_CA), wrapped to (-pi, pi].

    Computed as the sum of the three coupling phases, which is identical to
    the argument of the product and returns an exact 0.0 when the A links are
    exact conjugates (zero-flux layouts).
    """
    if ham.dimension != 3:
        raise ValueError("loop flux is defined for three-atom loops")
    h = ham.matrix
    legs = (h[0, 1], h[1, 2], h[2, 0])
    if any(v == 0 for v in legs):
        raise DegenerateLoop("a loop coupling is zero; flux undefined")
    return wrap_angle(sum(cmath.phase(v) for v in legs))


def propagate_effective(ham: EffectiveHamiltonian, u0, t: float) -> np.ndarray:
    """u(t) = exp(-i H t) u0 for the Hermitian generator.

    2x2 uses the closed Pauli form; 3x3 uses a Hermitian eigendecomposition.
    Unitary to machine precision either way.
    """
    u0 = np.asarray(u0, dtype=complex)
    if t == 0.0:
        return u0.copy()
    h = ham.matrix
    if ham.dimension == 2:
        a, c = h[0, 0].real, h[1, 1].real
        b = h[0, 1]
        mean = 0.5 * (a + c)
        d = 0.5 * (a - c)
        r = math.hypot(d, abs(b))
        phase = cmath.exp(-1j * mean * t)
        if r == 0.0:
            return phase * u0
        cos_rt = math.cos(r * t)
        sinc = -1j * math.sin(r * t) / r
        m00 = cos_rt + sinc * d
        m11 = cos_rt - sinc * d
        m01 = sinc * b
        m10 = sinc * b.conjugate()
        return phase * np.array([m00 * u0[0] + m01 * u0[1],
                                 m10 * u0[0] + m11 * u0[1]])
    evals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * evals * t)) @ (vecs.conj().T @ u0)


# --- peak structure -----------------------------------------------------------

def smooth_trace(values: np.ndarray, times: np.ndarray, window: float) -> np.ndarray:
    """Centered moving average over ``window`` time units (odd sample count).

    window <= 0 returns the input unchanged; edges average over the available
    samples only.
    """
    if window <= 0.0 or len(values) < 3:
        return values
    dt = times[1] - times[0]
    w = int(round(window / dt))
    if w <= 1:
        return values
    if w % 2 == 0:
        w += 1
    kernel = np.ones(w)
    sums = np.convolve(values, kernel, mode="same")
    counts = np.convolve(np.ones(len(values)), kernel, mode="same")
    return sums / counts


def find_first_peaks(series: TimeSeries, atom: int, min_height: float,
                     smooth_window: float = 0.0) -> float | None:
    """Time of the first local maximum of P_atom at or above min_height.

    The first index i with P[i-1] < P[i] >= P[i+1] and P[i] >= min_height is
    refined by a quadratic fit through the three samples; returns None when no
    sample qualifies.
    """
    p = smooth_trace(series.probability(atom), series.times, smooth_window)
    t = series.times
    for i in range(1, len(p) - 1):
        if p[i - 1] < p[i] >= p[i + 1] and p[i] >= min_height:
            return _refine_peak(t, p, i)
    return None


def _refine_peak(t: np.ndarray, p: np.ndarray, i: int) -> float:
    a, b, c = p[i - 1], p[i], p[i + 1]
    denom = a - 2.0 * b + c
    if denom >= 0.0:  # numerically flat; keep the sample time
        return float(t[i])
    shift = 0.5 * (a - c) / denom
    return float(t[i] + shift * (t[i + 1] - t[i]))


def _crest_peaks(p: np.ndarray, t: np.ndarray, min_height: float) -> list[float]:
    """Refined times of the highest local maximum in each excursion above
    min_height.  Grouping by excursion keeps any residual fast ripple riding a
    single exchange crest from being counted as separate oscillations."""
    peaks: list[float] = []
    best: int | None = None
    for i in range(1, len(p) - 1):
        if p[i] >= min_height:
            if p[i - 1] < p[i] >= p[i + 1] and (best is None or p[i] > p[best]):
                best = i
        elif best is not None:
            peaks.append(_refine_peak(t, p, best))
            best = None
    if best is not None:
        peaks.append(_refine_peak(t, p, best))
    return peaks


class Ordering(enum.Enum):
    A_TO_B_TO_C = "A->B->C"
    A_TO_C_TO_B = "A->C->B"
    SYMMETRIC = "symmetric"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class CirculationReport:
    """First-peak times of P_B and P_C and the transfer ordering they imply."""

    peak_time_b: float | None
    peak_time_c: float | None
    ordering: Ordering
    gap: float


def circulation_order(series: TimeSeries, min_height: float,
                      smooth_window: float = 0.0,
                      tol: float | None = None) -> CirculationReport:
    """Classify the transfer direction in a three-atom run by peak ordering.

    Symmetric requires the B and C first peaks to agree within ``tol``
    (default: two sample intervals); a missing peak gives Indeterminate.
    """
    if series.n_atoms != 3:
        raise ValueError("circulation_order requires a three-atom series")
    if tol is None:
        tol = 2.0 * (series.times[1] - series.times[0])
    t_b = find_first_peaks(series, 1, min_height, smooth_window)
    t_c = find_first_peaks(series, 2, min_height, smooth_window)
    if t_b is None or t_c is None:
        return CirculationReport(t_b, t_c, Ordering.INDETERMINATE, math.nan)
    gap = abs(t_b - t_c)
    if gap <= tol:
        ordering = Ordering.SYMMETRIC
    elif t_b < t_c:
        ordering = Ordering.A_TO_B_TO_C
    else:
        ordering = Ordering.A_TO_C_TO_B
    return CirculationReport(t_b, t_c, ordering, gap)


def extract_rabi_frequency(series: TimeSeries, atom: int,
                           min_height: float = 0.5,
                           smooth_window: float = 0.0) -> float:
    """Exchange rate from the spacing of the first two maxima of P_atom.

    For ideal two-level exchange P(t) = sin^2(G t) the maxima are pi/G apart,
    so pi / gap recovers |G|.  Raises InsufficientOscillations with fewer than
    two qualifying peaks.
    """
    p = smooth_trace(series.probability(atom), series.times, smooth_window)
    peaks = _crest_peaks(p, series.times, min_height)
    if len(peaks) < 2:
        raise InsufficientOscillations(
            f"found {len(peaks)} peak(s) >= {min_height}; need 2")
    return math.pi / (peaks[1] - peaks[0])
