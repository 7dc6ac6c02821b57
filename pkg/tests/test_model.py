import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dickebattery.dynamics import IntegratorConfig, evolve, ground_state, liouvillian
from dickebattery.model import (
    BathSpec,
    ModelError,
    ModelParams,
    RateMode,
    Scenario,
    TWO_PI,
    battery_gap,
    bose_einstein,
    build_anharmonic_model,
    build_commuting_charger,
    build_direct_drive,
    build_model,
    build_nonlinear_dicke,
    charger_interaction,
    linear_interaction,
    local_energy_commutator,
    local_hamiltonians,
    max_transmon_levels,
    ohmic_J,
    transition_frequencies,
    transmon_channels,
    transmon_spectrum,
)
from dickebattery.operators import annihilation, embed

DEFAULT_BATH = BathSpec()

all_params = [
    ModelParams(scenario=Scenario.NONLINEAR_DICKE, F=0.5, g1=0.1, g2=0.1),
    ModelParams(scenario=Scenario.COMMUTING_CHARGER, F=0.5, g1=0.1, g2=0.1),
    ModelParams(scenario=Scenario.DIRECT_DRIVE, F=0.5),
    ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, F=0.5, g1=0.1, omega_tilde1=0.06, n_cavity=9),
    ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, F=0.1, g1=0.1, omega_tilde1=0.06, n_cavity=9,
                rate_mode=RateMode.LITERAL_EQ25),
]


def test_ohmic_examples():
    assert ohmic_J(1.0, DEFAULT_BATH) == pytest.approx(math.exp(-0.001))
    assert ohmic_J(1.0, BathSpec(alpha=0.5)) == pytest.approx(0.4995, abs=1e-4)
    assert ohmic_J(1000.0, DEFAULT_BATH) == pytest.approx(1000 / math.e)
    with pytest.raises(ModelError):
        ohmic_J(0.0, DEFAULT_BATH)


def test_bose_einstein_examples():
    assert bose_einstein(1.0, 1.0) == pytest.approx(0.58198, abs=1e-5)
    assert bose_einstein(1.0, 50.0) < 1e-20
    assert bose_einstein(1.0, 0.1) == pytest.approx(9.5083, abs=1e-4)
    with pytest.raises(ModelError):
        bose_einstein(-1.0, 1.0)


@pytest.mark.parametrize("kw", [dict(F=-0.1), dict(g1=-1), dict(g2=-0.1), dict(omega0=0),
                                dict(n_cavity=1), dict(rate_prefactor=0.0)])
def test_params_invariants(kw):
    with pytest.raises(ModelError):
        ModelParams(**kw)


def test_bath_invariants():
    for kw in (dict(alpha=0), dict(omega_max=-1), dict(beta=0)):
        with pytest.raises(ModelError):
            BathSpec(**kw)


def test_level_inversion_rejected():
    assert max_transmon_levels(1.06, 0.06) == 10
    assert max_transmon_levels(1.06, 0.07) == 9
    ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, omega_tilde1=0.06, n_cavity=10)
    with pytest.raises(ModelError):
        ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, omega_tilde1=0.06, n_cavity=11)
    assert max_transmon_levels(1.0, 0.0) is None


@settings(max_examples=50)
@given(st.floats(0.5, 2.0), st.floats(0.005, 0.2))
def test_max_levels_is_tight(w0, w1):
    n = max_transmon_levels(w0, w1)
    transmon_spectrum(w0, w1, n)
    with pytest.raises(ModelError):
        transmon_spectrum(w0, w1, n + 1)


def test_transmon_spectrum_examples():
    eps = transmon_spectrum(1.06, 0.06, 3)
    assert eps[1] == pytest.approx(1.00)
    assert eps[2] == pytest.approx(1.88)
    assert np.allclose(transmon_spectrum(1.06, 0.0, 5), 1.06 * np.arange(5))
    w = transition_frequencies(1.06, 0.06, 9)
    assert w[0] == pytest.approx(1.00)
    assert np.all(np.diff(w) < 0)
    assert np.allclose(w, np.diff(transmon_spectrum(1.06, 0.06, 9)))


def test_transmon_lowest_channel():
    p = ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, omega_tilde1=0.06, n_cavity=4)
    ch = transmon_channels(p)
    assert len(ch) == 6
    rate, T0 = ch[0]
    expected = np.zeros((4, 4))
    expected[0, 1] = 1
    assert np.allclose(T0.data, np.kron(expected, np.eye(2)))
    j, n = ohmic_J(1.0, DEFAULT_BATH), bose_einstein(1.0, 1.0)
    assert rate == pytest.approx(TWO_PI * j * (1 + n))
    assert ch[1][0] == pytest.approx(TWO_PI * j * n)


def test_transmon_cold_bath_has_no_up_rates():
    # the upper gaps shrink with n, so the bound needs a small truncation
    p = ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, omega_tilde1=0.06, n_cavity=3,
                    bath=BathSpec(beta=50.0))
    ups = [r for r, _ in transmon_channels(p)[1::2]]
    assert max(ups) < 1e-18


def test_literal_mode_uses_equal_rates():
    p = ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, omega_tilde1=0.06, n_cavity=5,
                    rate_mode=RateMode.LITERAL_EQ25)
    ch = transmon_channels(p)
    for (down, _), (up, _) in zip(ch[0::2], ch[1::2]):
        assert up == down


@pytest.mark.parametrize("p", all_params[:4], ids=lambda p: p.scenario.value)
def test_detailed_balance_ratio(p):
    m = build_model(p)
    ch = m.channels
    freqs = (transition_frequencies(p.omega_tilde0, p.omega_tilde1, p.n_cavity)
             if p.scenario is Scenario.ANHARMONIC_LINEAR else [p.omega0])
    for w, (down, _), (up, _) in zip(freqs, ch[0::2], ch[1::2]):
        assert abs(up / down - math.exp(-p.bath.beta * w)) < 1e-12


def test_harmonic_transmon_channels_recombine_into_ladder():
    p = ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, omega_tilde0=1.0, n_cavity=6)
    ch = transmon_channels(p)
    assert len(ch) == 2
    a = embed(annihilation(6), 0, [6, 2])
    assert np.allclose(ch[0][1].data, a.data)
    assert np.allclose(ch[1][1].data, a.dag().data)
    ref = build_nonlinear_dicke(ModelParams(n_cavity=6))
    assert ch[0][0] == pytest.approx(TWO_PI * ref.channels[0][0])


def test_unmerged_channels_are_per_level():
    p = ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, omega_tilde0=1.0, n_cavity=6,
                    merge_degenerate=False)
    assert len(transmon_channels(p)) == 10


def test_harmonic_limit_matches_linear_battery():
    common = dict(F=0.3, g1=0.1, n_cavity=6)
    anh = build_anharmonic_model(ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, omega_tilde0=1.0,
                                             rate_prefactor=1.0, **common))
    lin = build_nonlinear_dicke(ModelParams(**common))
    assert np.allclose(liouvillian(anh), liouvillian(lin), atol=1e-14)
    assert np.allclose(anh.aux_H.data, lin.aux_H.data)


def test_transmon_battery_gap_and_frame():
    p = ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, omega_tilde1=0.06, n_cavity=4)
    assert battery_gap(p) == pytest.approx(1.0)
    H = build_anharmonic_model(p).hamiltonian.data
    # no drive or coupling: diagonal entries are the rotating-frame levels eps_n - n * gap
    diag = np.diag(H).real[::2]
    assert np.allclose(diag, transmon_spectrum(1.06, 0.06, 4) - np.arange(4) * 1.0)


@pytest.mark.parametrize("p", all_params, ids=lambda p: f"{p.scenario.value}-{p.rate_mode.value}")
def test_models_are_valid(p):
    m = build_model(p)
    assert m.hamiltonian.is_hermitian(1e-12)
    assert all(r >= 0 for r, _ in m.channels)
    assert m.params is p


def test_empty_nonlinear_model_is_pure_thermalization():
    m = build_nonlinear_dicke(ModelParams())
    assert np.all(m.hamiltonian.data == 0)
    assert len(m.channels) == 2


def test_linear_coupling_commutes_with_local_energy():
    p = ModelParams(g1=0.1)
    assert np.max(np.abs(local_energy_commutator(p, linear_interaction(p)).data)) < 1e-12


def test_charger_commutes_with_local_energy():
    p = ModelParams(scenario=Scenario.COMMUTING_CHARGER, g1=0.1, g2=0.1)
    total = linear_interaction(p) + charger_interaction(p)
    assert np.max(np.abs(local_energy_commutator(p, total).data)) < 1e-12


def test_two_photon_coupling_does_not_commute():
    from dickebattery.model import two_photon_interaction
    p = ModelParams(g2=0.1)
    assert np.max(np.abs(local_energy_commutator(p, two_photon_interaction(p)).data)) > 1e-3


def test_charger_without_g2_is_the_linear_model():
    lin = build_nonlinear_dicke(ModelParams(F=0.5, g1=0.1))
    ch = build_commuting_charger(ModelParams(scenario=Scenario.COMMUTING_CHARGER, F=0.5, g1=0.1))
    assert np.array_equal(lin.hamiltonian.data, ch.hamiltonian.data)
    for (r1, L1), (r2, L2) in zip(lin.channels, ch.channels):
        assert r1 == r2 and np.array_equal(L1.data, L2.data)


def test_charger_energy_bookkeeping_along_trajectory():
    p = ModelParams(scenario=Scenario.COMMUTING_CHARGER, F=0.5, g1=0.1, g2=0.1, n_cavity=6)
    m = build_model(p)
    h_a, h_b = local_hamiltonians(p)
    Hloc = (h_a + h_b).data
    H_int = (linear_interaction(p) + charger_interaction(p)).data
    cfg = IntegratorConfig(t_end=5.0, record_stride=500, keep_snapshots=True)
    tr = evolve(ground_state(m), m, cfg)
    for rho in tr.snapshots:
        rate = np.trace(-1j * (H_int @ rho - rho @ H_int) @ Hloc)
        assert abs(rate) < 1e-12


def test_direct_drive_conventions():
    p = ModelParams(scenario=Scenario.DIRECT_DRIVE, F=0.5)
    assert np.allclose(build_direct_drive(p).hamiltonian.data, 0.25 * np.array([[0, 1], [1, 0]]))
    lit = build_direct_drive(p.with_(drive_convention="literal"))
    assert np.allclose(lit.hamiltonian.data, 0.5 * np.array([[0, 1], [1, 0]]))
    assert build_direct_drive(p).aux_H is None


def test_wrong_scenario_for_builder():
    with pytest.raises(ModelError):
        build_direct_drive(ModelParams())
    with pytest.raises(ModelError):
        transmon_channels(ModelParams())


def test_as_dict_flattens_bath():
    d = ModelParams(F=0.5).as_dict()
    assert d["bath.beta"] == 1.0 and d["scenario"] == "nonlinear_dicke" and d["F"] == 0.5
