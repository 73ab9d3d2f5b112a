"""Integrator checks: exact delay oracles, convergence order, guard rails."""

import math
from dataclasses import replace

import numpy as np
import pytest

from dfisim.core import (
    Model,
    PhysicalParams,
    Regime,
    ScenarioConfig,
    StepControl,
    with_params,
)
from dfisim.integrator import (
    HistoryBuffer,
    NumericalBlowup,
    StepTooLarge,
    dde_step_size,
    integrate_dde,
    integrate_euler_oracle,
    integrate_ode,
)
from dfisim.models import RhsFunction, build_rhs
from dfisim.presets import preset
from dfisim.analysis import find_first_peaks

PI = math.pi


def scalar_cfg(t_end=2.0, sample_interval=0.25, max_step=0.05):
    # model field is nominal; integrate_* only checks arity against the rhs
    return ScenarioConfig(
        model=Model.DIMER_COUPLING_MOD, regime=Regime.FULL_DELAY,
        params=PhysicalParams(chi=0.0, phi=0.0, tau=1.0, delta=0.0, omega=0.0, theta=0.0),
        initial_state=(1 + 0j,), t_end=t_end, sample_interval=sample_interval,
        step_control=StepControl(max_step=max_step, substeps_per_tau=2))


SCALAR_DELAY_RHS = RhsFunction(arity=1, max_lag=1,
                               evaluate=lambda t, u, d: (-d[0][0],))


class TestScalarDelayOracle:
    """u'(t) = -u(t - 1) with u = 1 on t <= 0 has a piecewise-polynomial
    solution: u(t) = 1 - t on [0, 1], u(t) = -2t + 2 + (t^2 - 1)/2 on [1, 2]."""

    def test_method_of_steps_values(self):
        series = integrate_dde(SCALAR_DELAY_RHS, scalar_cfg(),
                               prehistory=lambda t: (1 + 0j,))
        at = dict(zip(np.round(series.times, 6), series.amplitudes[:, 0]))
        assert at[1.0] == pytest.approx(0.0, abs=1e-12)
        assert at[2.0] == pytest.approx(-0.5, abs=1e-12)
        assert at[0.5] == pytest.approx(0.5, abs=1e-12)
        assert at[1.5] == pytest.approx(-0.375, abs=1e-12)

    def test_euler_oracle_converges_here_too(self):
        cfg = scalar_cfg()
        h, _ = dde_step_size(cfg)
        errs = []
        for div in (50, 100):
            eu = integrate_euler_oracle(SCALAR_DELAY_RHS, cfg, h / div,
                                        prehistory=lambda t: (1 + 0j,))
            errs.append(abs(eu.amplitudes[-1, 0] - (-0.5)))
        ratio = errs[0] / errs[1]
        assert 1.6 < ratio < 2.4  # first order: halving h halves the error

    def test_stored_slopes_equal_rhs_at_nodes(self):
        cfg = scalar_cfg()
        series, buf = integrate_dde(SCALAR_DELAY_RHS, scalar_cfg(),
                                    prehistory=lambda t: (1 + 0j,),
                                    with_history=True)
        h = buf.step
        _, lag_steps = dde_step_size(cfg)
        for i in range(lag_steps + 1, buf.node_count):
            want = -buf.states[i - lag_steps][0]
            assert abs(buf.slopes[i][0] - want) < 1e-12


class TestDelayFreeLimit:
    def test_exponential_decay(self):
        rhs = RhsFunction(arity=1, max_lag=0, evaluate=lambda t, u, d: (-u[0],))
        cfg = replace(scalar_cfg(t_end=1.0, sample_interval=0.5, max_step=1e-3),
                      params=PhysicalParams(chi=0, phi=0, tau=8e-3, delta=0, omega=0, theta=0))
        series = integrate_dde(rhs, cfg)
        assert abs(series.amplitudes[-1, 0] - math.exp(-1.0)) < 1e-8

    def test_euler_first_order_convergence(self):
        rhs = RhsFunction(arity=1, max_lag=0, evaluate=lambda t, u, d: (-u[0],))
        cfg = ScenarioConfig(
            model=Model.DIMER_COUPLING_MOD, regime=Regime.RWA_EFFECTIVE,
            params=PhysicalParams(chi=1.0, phi=PI / 2, tau=0.0, delta=0.0,
                                  omega=0.0, theta=0.0),
            initial_state=(1 + 0j,), t_end=1.0, sample_interval=0.5)
        errs = [abs(integrate_euler_oracle(rhs, cfg, h).amplitudes[-1, 0] - math.exp(-1.0))
                for h in (2e-5, 1e-5)]
        assert 1.6 < errs[0] / errs[1] < 2.4

    def test_euler_zero_state_stays_zero(self):
        rhs = RhsFunction(arity=1, max_lag=0, evaluate=lambda t, u, d: (-u[0],))
        cfg = ScenarioConfig(
            model=Model.DIMER_COUPLING_MOD, regime=Regime.RWA_EFFECTIVE,
            params=PhysicalParams(chi=1.0, phi=PI / 2, tau=0.0, delta=0.0,
                                  omega=0.0, theta=0.0),
            initial_state=(0j,), t_end=1.0, sample_interval=0.5)
        series = integrate_euler_oracle(rhs, cfg, 1e-5)
        assert np.all(series.probabilities == 0.0)


class TestReducedRegimes:
    def test_dimer_rwa_closed_form(self):
        cfg = ScenarioConfig(
            model=Model.DIMER_COUPLING_MOD, regime=Regime.RWA_EFFECTIVE,
            params=PhysicalParams(chi=1.0, phi=PI / 2, tau=0.0, delta=10 * PI,
                                  omega=10 * PI, theta=0.0),
            initial_state=(1 + 0j, 0j), t_end=3.0,
            step_control=StepControl(max_step=1e-4))
        series = integrate_ode(build_rhs(cfg), cfg)
        err = np.abs(series.probability(0) - np.cos(series.times) ** 2).max()
        assert err < 1e-6

    def test_trimer_rwa_revival_at_eigenperiod(self):
        cfg = ScenarioConfig(
            model=Model.TRIMER_DIRECT, regime=Regime.RWA_EFFECTIVE,
            params=PhysicalParams(chi=1.0, phi=PI / 2, tau=0.0, delta=10 * PI,
                                  omega=10 * PI, theta=PI / 2),
            initial_state=(1 + 0j, 0j, 0j), t_end=4.0)
        series = integrate_ode(build_rhs(cfg), cfg)
        t_rev = 2 * PI / math.sqrt(3.0)  # eigenfrequencies {0, +-sqrt(3) G0}
        i = int(np.argmin(np.abs(series.times - t_rev)))
        assert series.probability(0)[i] > 0.999

    def test_zero_initial_state(self):
        cfg = ScenarioConfig(
            model=Model.DIMER_COUPLING_MOD, regime=Regime.RWA_EFFECTIVE,
            params=PhysicalParams(chi=1.0, phi=PI / 2, tau=0.0, delta=10 * PI,
                                  omega=10 * PI, theta=0.0),
            initial_state=(0j, 0j), t_end=2.0)
        series = integrate_ode(build_rhs(cfg), cfg)
        assert np.all(series.probabilities == 0.0)

    def test_rwa_norm_conservation(self):
        cfg = ScenarioConfig(
            model=Model.TRIMER_DIRECT, regime=Regime.RWA_EFFECTIVE,
            params=PhysicalParams(chi=1.0, phi=PI / 2, tau=0.0, delta=10 * PI,
                                  omega=10 * PI, theta=0.7),
            initial_state=(1 + 0j, 0j, 0j), t_end=20.0)
        series = integrate_ode(build_rhs(cfg), cfg)
        assert np.abs(series.total_probability - 1.0).max() < 1e-8


class TestFullDelayRuns:
    def test_first_exchange_peak(self):
        cfg = replace(preset("fig2a"), t_end=2.5)
        series = integrate_dde(build_rhs(cfg), cfg)
        t_peak = find_first_peaks(series, 1, 0.95, smooth_window=0.2)
        assert t_peak is not None
        assert abs(t_peak - PI / 2) < 0.05 * (PI / 2)

    def test_convergence_order_under_step_halving(self):
        cfg = replace(preset("fig2a"), t_end=1.5)
        runs = {}
        for s in (2, 4, 8):
            c = replace(cfg, step_control=replace(cfg.step_control, substeps_per_tau=s))
            runs[s] = integrate_dde(build_rhs(c), c)
        err_h = np.abs(runs[2].amplitudes - runs[4].amplitudes).max()
        err_h2 = np.abs(runs[4].amplitudes - runs[8].amplitudes).max()
        assert err_h / err_h2 >= 8.0

    def test_norm_bound_and_series_invariants(self):
        cfg = preset("fig5a")
        series = integrate_dde(build_rhs(cfg), cfg)
        assert np.all(series.total_probability <= 1.0 + 1e-6)
        assert np.all(series.probabilities >= 0.0)
        assert np.all(series.probabilities <= 1.0 + 1e-6)
        assert np.all(np.diff(series.times) > 0)

    def test_determinism_bit_identical(self):
        cfg = replace(preset("fig5a"), t_end=2.0)
        a = integrate_dde(build_rhs(cfg), cfg)
        b = integrate_dde(build_rhs(cfg), cfg)
        assert np.array_equal(a.amplitudes, b.amplitudes)
        assert np.array_equal(a.times, b.times)

    def test_step_divides_tau(self):
        for name in ("fig2a", "fig5a"):
            cfg = preset(name)
            h, lag_steps = dde_step_size(cfg)
            assert h <= cfg.step_control.max_step + 1e-15
            assert lag_steps * h == pytest.approx(cfg.params.tau, rel=1e-12)
            assert lag_steps >= 2 * cfg.step_control.substeps_per_tau


class TestGuards:
    def test_step_too_large_on_fast_modulation(self):
        cfg = with_params(preset("fig2a"), omega=1e6, delta=1e6)
        with pytest.raises(StepTooLarge):
            integrate_dde(build_rhs(cfg), cfg)

    def test_numerical_blowup(self):
        rhs = RhsFunction(arity=1, max_lag=0, evaluate=lambda t, u, d: (5.0 * u[0],))
        cfg = ScenarioConfig(
            model=Model.DIMER_COUPLING_MOD, regime=Regime.RWA_EFFECTIVE,
            params=PhysicalParams(chi=1.0, phi=PI / 2, tau=0.0, delta=0.0,
                                  omega=0.0, theta=0.0),
            initial_state=(1 + 0j,), t_end=2.0)
        with pytest.raises(NumericalBlowup):
            integrate_ode(rhs, cfg)

    def test_regime_mismatch(self):
        cfg = preset("fig2a")
        with pytest.raises(ValueError):
            integrate_ode(build_rhs(cfg), cfg)
        rwa = replace(cfg, regime=Regime.RWA_EFFECTIVE)
        with pytest.raises(ValueError):
            integrate_dde(build_rhs(rwa), rwa)

    def test_euler_step_precondition(self):
        cfg = scalar_cfg()
        h, _ = dde_step_size(cfg)
        with pytest.raises(ValueError, match="h/50"):
            integrate_euler_oracle(SCALAR_DELAY_RHS, cfg, h / 10)

    def test_arity_mismatch(self):
        cfg = preset("fig2a")  # two amplitudes
        with pytest.raises(ValueError, match="arity"):
            integrate_dde(SCALAR_DELAY_RHS, cfg)


class TestHistoryBuffer:
    def test_prehistory_defaults_to_zero(self):
        buf = HistoryBuffer(0.1, 2)
        assert buf.state_at(-0.5) == (0j, 0j)

    def test_node_and_midpoint_lookup(self):
        # nodes of u(t) = t^2 with exact slopes: cubic Hermite is exact
        buf = HistoryBuffer(0.5, 1)
        for i in range(5):
            t = 0.5 * i
            buf.append((complex(t * t),), (complex(2 * t),))
        assert buf.state_at(1.0) == (1 + 0j,)
        assert buf.state_at(0.75)[0] == pytest.approx(0.5625, abs=1e-14)

    def test_lookup_past_end_raises(self):
        buf = HistoryBuffer(0.5, 1)
        buf.append((0j,), (0j,))
        with pytest.raises(ValueError):
            buf.state_at(1.0)
