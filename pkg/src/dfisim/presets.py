"""Ready-made scenarios matching the reference parameter sets.

All presets integrate the full time-delayed equations over t*Gamma0 in
[0, 15] with the excitation starting on atom A, phi = pi/2 (m = 0) and
resonant modulation (delta = omega).  fig2*/fig3*/fig4* use tau*Gamma0 =
0.001; the fig5* family probes stronger retardation with tau*Gamma0 = 0.01
and decreasing modulation frequency.
"""

from __future__ import annotations

import math

from .core import Model, PhysicalParams, Regime, ScenarioConfig

_PI = math.pi
_PHI_DFI = 0.5 * _PI


def _full_delay(model: Model, chi: float, omega: float, theta: float,
                tau: float, atoms: int) -> ScenarioConfig:
    state = (1.0 + 0j,) + (0j,) * (atoms - 1)
    return ScenarioConfig(
        model=model,
        regime=Regime.FULL_DELAY,
        params=PhysicalParams(chi=chi, phi=_PHI_DFI, tau=tau,
                              delta=omega, omega=omega, theta=theta, m=0),
        initial_state=state,
        t_end=15.0,
    )


def _dimer(chi: float, omega: float = 10.0 * _PI, tau: float = 1e-3) -> ScenarioConfig:
    return _full_delay(Model.DIMER_COUPLING_MOD, chi, omega, 0.0, tau, 2)


def _trimer_direct(theta: float) -> ScenarioConfig:
    return _full_delay(Model.TRIMER_DIRECT, 1.0, 10.0 * _PI, theta, 1e-3, 3)


def _trimer_two_wg(chi: float, omega: float, tau: float) -> ScenarioConfig:
    return _full_delay(Model.TRIMER_TWO_WAVEGUIDE, chi, omega, 0.5 * _PI, tau, 3)


_BUILDERS = {
    "fig2a": lambda: _dimer(chi=1.0),
    "fig2b": lambda: _dimer(chi=2.0),
    "fig3a": lambda: _trimer_direct(theta=0.5 * _PI),
    "fig3b": lambda: _trimer_direct(theta=0.0),
    "fig3c": lambda: _trimer_direct(theta=-0.5 * _PI),
    "fig4a": lambda: _trimer_two_wg(chi=2.0, omega=10.0 * _PI, tau=1e-3),
    "fig4b": lambda: _trimer_two_wg(chi=1.0, omega=10.0 * _PI, tau=1e-3),
    "fig4c": lambda: _trimer_two_wg(chi=0.5, omega=10.0 * _PI, tau=1e-3),
    "fig5a": lambda: _trimer_two_wg(chi=2.0, omega=10.0 * _PI, tau=1e-2),
    "fig5b": lambda: _trimer_two_wg(chi=2.0, omega=5.0 * _PI, tau=1e-2),
    "fig5c": lambda: _trimer_two_wg(chi=2.0, omega=3.0 * _PI, tau=1e-2),
    "fig5d": lambda: _trimer_two_wg(chi=2.0, omega=1.0 * _PI, tau=1e-2),
}

PRESET_NAMES = tuple(sorted(_BUILDERS))


def preset(name: str) -> ScenarioConfig:
    """Fully validated scenario for a named reference parameter set."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    return builder()
