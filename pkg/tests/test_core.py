"""Parameterization, modulation profiles, validation, and the JSON schema."""

import json
import math
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from dfisim.core import (
    DFIConditionViolated,
    ModulationProfile,
    ParseError,
    PhysicalParams,
    Regime,
    ScenarioConfig,
    derived_coupling_Gm,
    eval_modulation,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
    with_params,
)
from dfisim.presets import preset

PI = math.pi


def params(**kw):
    base = dict(chi=1.0, phi=PI / 2, tau=1e-3, delta=10 * PI, omega=10 * PI,
                theta=0.0, m=0)
    base.update(kw)
    return PhysicalParams(**base)


class TestEvalModulation:
    def test_zero_frequency_identity(self):
        p = ModulationProfile.cosine(1.0, 0.0, 0.0)
        assert eval_modulation(p, 7.3) == 1.0

    def test_cosine_at_pi(self):
        p = ModulationProfile.cosine(1.0, PI, 0.0)
        assert eval_modulation(p, 1.0) == pytest.approx(-1.0, abs=1e-15)

    def test_drive_at_t0_matches_amplitude(self):
        # chi = 1 drive at t = 0 with zero phase starts at full strength
        p = ModulationProfile.cosine(1.0, 10 * PI, 0.0)
        assert eval_modulation(p, 0.0) == 1.0

    def test_constant_ignores_frequency_and_phase(self):
        p = ModulationProfile.constant(0.7)
        assert eval_modulation(p, 0.0) == eval_modulation(p, 123.4) == 0.7

    def test_as_callable_matches_eval(self):
        p = ModulationProfile.cosine(1.3, 4.2, 0.6)
        g = p.as_callable()
        for t in (0.0, 0.1, 2.7, -3.3):
            assert g(t) == eval_modulation(p, t)

    @given(st.floats(0.1, 50.0), st.floats(-PI, PI), st.floats(0.0, 20.0))
    def test_cosine_periodicity(self, omega, theta, t):
        p = ModulationProfile.cosine(1.0, omega, theta)
        period = 2 * PI / omega
        assert abs(eval_modulation(p, t) - eval_modulation(p, t + period)) < 1e-10


class TestDerivedCoupling:
    def test_branch_zero_equals_chi(self):
        assert derived_coupling_Gm(params(chi=1.0, phi=0.5 * PI, m=0)) == 1.0

    def test_branch_one_sign_flip(self):
        assert derived_coupling_Gm(params(chi=2.0, phi=1.5 * PI, m=1)) == -2.0

    def test_zero_amplitude(self):
        for m in (0, 1, 3):
            assert derived_coupling_Gm(params(chi=0.0, phi=(m + 0.5) * PI, m=m)) == 0.0

    def test_off_condition_raises(self):
        with pytest.raises(DFIConditionViolated):
            derived_coupling_Gm(params(phi=0.5 * PI + 1e-6))

    @given(st.floats(0.0, 5.0), st.integers(-4, 4))
    def test_sign_alternation(self, chi, m):
        a = derived_coupling_Gm(params(chi=chi, phi=(m + 0.5) * PI, m=m))
        b = derived_coupling_Gm(params(chi=chi, phi=(m + 1.5) * PI, m=m + 1))
        assert a == -b


class TestValidateScenario:
    def test_known_good_preset(self):
        assert validate_scenario(preset("fig2a")) == []

    def test_all_presets_validate(self):
        from dfisim.presets import PRESET_NAMES
        for name in PRESET_NAMES:
            assert validate_scenario(preset(name)) == [], name

    def test_full_delay_needs_positive_tau(self):
        cfg = with_params(preset("fig2a"), tau=0.0)
        diags = validate_scenario(cfg)
        assert any("tau must be > 0 in FullDelay" in d for d in diags)

    def test_state_length_mismatch(self):
        cfg = replace(preset("fig2a"), initial_state=(1 + 0j, 0j, 0j))
        diags = validate_scenario(cfg)
        assert any("state length mismatch" in d for d in diags)

    def test_overnormalized_state(self):
        cfg = replace(preset("fig2a"), initial_state=(1 + 0j, 0.5 + 0j))
        assert any("exceeds 1" in d for d in validate_scenario(cfg))

    def test_markovian_restricted_to_dimer(self):
        cfg = replace(preset("fig3a"), regime=Regime.MARKOVIAN_ODE)
        assert any("markovian_ode" in d for d in validate_scenario(cfg))

    def test_rwa_requires_resonant_modulation(self):
        cfg = replace(with_params(preset("fig2a"), delta=5.0), regime=Regime.RWA_EFFECTIVE)
        assert any("omega = delta" in d for d in validate_scenario(cfg))

    def test_idempotent_and_pure(self):
        cfg = with_params(preset("fig2a"), tau=0.0)
        first = validate_scenario(cfg)
        second = validate_scenario(cfg)
        assert first == second
        assert cfg == with_params(preset("fig2a"), tau=0.0)


class TestScenarioSchema:
    def test_round_trip_preserves_config(self):
        cfg = preset("fig2a")
        text = json.dumps(scenario_to_dict(cfg))
        assert scenario_from_dict(json.loads(text)) == cfg

    def test_round_trip_freq_mod(self):
        from dfisim.core import FreqModParams, Model
        cfg = ScenarioConfig(
            model=Model.DIMER_FREQUENCY_MOD, regime=Regime.FULL_DELAY,
            params=params(tau=1e-4), initial_state=(1 + 0j, 0j), t_end=6.0,
            freq_mod=FreqModParams(62.8, 62.8, 62.8, 0.5))
        assert scenario_from_dict(scenario_to_dict(cfg)) == cfg

    def test_unknown_top_level_key(self):
        doc = scenario_to_dict(preset("fig2a"))
        doc["gamma0"] = 1.0
        with pytest.raises(ParseError, match="gamma0"):
            scenario_from_dict(doc)

    def test_unknown_nested_key(self):
        doc = scenario_to_dict(preset("fig2a"))
        doc["params"]["g0"] = 1.0
        with pytest.raises(ParseError, match="g0"):
            scenario_from_dict(doc)

    def test_missing_required_key(self):
        doc = scenario_to_dict(preset("fig2a"))
        del doc["t_end"]
        with pytest.raises(ParseError, match="t_end"):
            scenario_from_dict(doc)

    def test_bad_state_entry(self):
        doc = scenario_to_dict(preset("fig2a"))
        doc["initial_state"] = [[1.0, 0.0], [0.0]]
        with pytest.raises(ParseError, match="initial_state"):
            scenario_from_dict(doc)

    def test_unknown_model_value(self):
        doc = scenario_to_dict(preset("fig2a"))
        doc["model"] = "qubit_chain"
        with pytest.raises(ParseError, match="model"):
            scenario_from_dict(doc)

    def test_initial_state_defaults_to_atom_a(self):
        doc = scenario_to_dict(preset("fig3a"))
        del doc["initial_state"]
        cfg = scenario_from_dict(doc)
        assert cfg.initial_state == (1 + 0j, 0j, 0j)
