"""Sudden-switch positron emission: coefficients, spectrum, bookkeeping."""

import warnings

import numpy as np
import pytest

from diracwell import (
    DiracWellError,
    TransitionScenario,
    charge_ledger,
    emission_spectrum,
    escape_time_guard,
    overlap_coefficients,
    row_completeness,
    scattering_wavefunction,
    channel_phase,
)
from diracwell.core import overlap

V_1C = 3.456727996652333


@pytest.fixture(scope="module")
def default_run():
    scenario = TransitionScenario.default()
    coeffs = overlap_coefficients(scenario)
    spectrum = emission_spectrum(coeffs, scenario)
    return scenario, coeffs, spectrum


def _small(L=100.0, **kwargs):
    scenario = TransitionScenario.default(L=L, **kwargs)
    return scenario, emission_spectrum(overlap_coefficients(scenario), scenario)


def test_degenerate_switch_is_identity():
    scenario = TransitionScenario(m=1.0, a=0.7, V_sub=2.5, V_super=2.5, L=60.0)
    coeffs = overlap_coefficients(scenario)
    diag = coeffs.A[np.isfinite(coeffs.A)]
    assert np.max(np.abs(diag - 1.0)) < 1e-12
    diag_minus = coeffs.L[np.isfinite(coeffs.L)]
    assert np.max(np.abs(diag_minus - 1.0)) < 1e-12
    cross = coeffs.M[np.isfinite(coeffs.M)]
    assert np.max(np.abs(cross)) < 1e-12
    assert np.isnan(scenario.resonance_momentum)
    spectrum = emission_spectrum(coeffs, scenario)
    assert spectrum.total < 1e-20
    assert np.isnan(spectrum.k_resonance)


def test_default_scenario_frozen_values(default_run):
    scenario, coeffs, spectrum = default_run
    assert scenario.V_sub == pytest.approx(0.99 * V_1C, rel=1e-12)
    assert scenario.V_super == pytest.approx(1.01 * V_1C, rel=1e-12)
    assert coeffs.bound_energy_sub == pytest.approx(-0.997154603502673, rel=1e-11)
    assert coeffs.odd_bound_energy_sub == pytest.approx(0.16850886983795751, rel=1e-10)
    assert coeffs.odd_bound_energy_super == pytest.approx(0.12680778382503713, rel=1e-10)
    assert abs(coeffs.bound_overlap_odd) == pytest.approx(0.9998683854870889, rel=1e-9)
    first_rows = [abs(m) for m in coeffs.M[:3]]
    assert first_rows[0] == pytest.approx(0.0663583654057159, rel=1e-8)
    assert first_rows[1] == pytest.approx(0.12749124818652494, rel=1e-8)
    assert first_rows[2] == pytest.approx(0.17926485242339965, rel=1e-8)
    assert spectrum.total == pytest.approx(0.9999827170220787, rel=1e-9)
    assert spectrum.peak_k == pytest.approx(0.0535626826143012, rel=1e-6)
    assert spectrum.k_resonance == pytest.approx(0.2651970150234173, rel=1e-10)
    assert spectrum.initial_occupation == "vacant"
    assert len(spectrum.k) == len(spectrum.N_k) == len(spectrum.dos)


def test_sum_rule_close_to_one(default_run):
    _, _, spectrum = default_run
    assert 0.99 <= spectrum.total < 1.0


def test_box_modes_are_orthonormal(default_run):
    scenario, coeffs, _ = default_run
    params, L = scenario.params_super, scenario.L
    ks = coeffs.k_super_minus[np.isfinite(coeffs.k_super_minus)][5:9]
    modes = [
        scattering_wavefunction(
            k, -1, "even", params, norm_kind="box", L=L,
            phase=channel_phase(k, -1, "even", params),
        )
        for k in ks
    ]
    for i, u in enumerate(modes):
        for j, v in enumerate(modes):
            target = 1.0 if i == j else 0.0
            assert abs(overlap(u, v, -L, L) - target) < 1e-10


def test_cross_parity_modes_are_orthogonal(default_run):
    scenario, coeffs, _ = default_run
    params, L = scenario.params_super, scenario.L
    k_even = float(coeffs.k_super_minus[np.isfinite(coeffs.k_super_minus)][6])
    k_odd = float(coeffs.k_super_minus_odd[np.isfinite(coeffs.k_super_minus_odd)][6])
    even = scattering_wavefunction(
        k_even, -1, "even", params, norm_kind="box", L=L,
        phase=channel_phase(k_even, -1, "even", params),
    )
    odd = scattering_wavefunction(
        k_odd, -1, "odd", params, norm_kind="box", L=L,
        phase=channel_phase(k_odd, -1, "odd", params),
    )
    assert abs(overlap(even, odd, -L, L)) < 1e-12


def test_minus_rows_are_unitary_away_from_threshold(default_run):
    scenario, coeffs, _ = default_run
    k = coeffs.k_super_minus
    sel = np.isfinite(k) & (k >= 4.0 * scenario.resonance_momentum)
    assert sel.sum() > 1000
    row = (
        np.abs(coeffs.G[sel]) ** 2
        + np.abs(coeffs.L[sel]) ** 2
        + np.abs(coeffs.M[sel]) ** 2
    )
    assert np.max(np.abs(row - 1.0)) < 1e-2


def test_odd_channel_is_a_spectator(default_run):
    _, coeffs, _ = default_run
    diag = np.abs(coeffs.A_odd[np.isfinite(coeffs.A_odd)])
    assert np.min(diag) > 1.0 - 1e-3
    assert np.max(diag) <= 1.0 + 1e-12


def test_row_completeness_near_resonance(default_run):
    scenario, _, _ = default_run
    assert row_completeness(scenario, 422, -1, "even") > 1.0 - 1e-6


def test_sum_rule_grows_monotonically_with_box_size(default_run):
    _, _, big = default_run
    _, small = _small(L=100.0)
    _, medium = _small(L=200.0)
    assert small.total == pytest.approx(0.999982702851831, rel=1e-9)
    assert medium.total == pytest.approx(0.9999827170134704, rel=1e-9)
    assert small.total < medium.total < big.total < 1.0


def test_filled_initial_state_emits_nothing():
    _, spectrum = _small(L=100.0, initial_occupation="filled")
    assert spectrum.total == 0.0
    assert np.all(spectrum.N_k == 0.0)


def test_charge_ledger_balances(default_run):
    scenario, _, spectrum = default_run
    ledger = charge_ledger(scenario, spectrum)
    assert ledger.occupation_charge == 1.0
    assert ledger.emitted_charge == spectrum.total
    # one level below E=0 before the switch, none after
    assert (ledger.N_plus_before, ledger.N_minus_before) == (1, 1)
    assert (ledger.N_plus_after, ledger.N_minus_after) == (1, 0)
    # the smooth-background-subtracted charge is the same integer on both sides
    assert ledger.Q0_subtracted_before == pytest.approx(-1.0, abs=1e-9)
    assert ledger.Q0_subtracted_after == pytest.approx(-1.0, abs=1e-9)
    drift = abs(ledger.total_after - ledger.total_before)
    assert drift < 1e-2
    assert drift == pytest.approx(1.728e-5, abs=1e-6)


def test_escape_time_guard(default_run):
    scenario, _, _ = default_run
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        delay = escape_time_guard(scenario)
    assert delay == pytest.approx(3.660178882642597, rel=1e-9)
    with pytest.warns(UserWarning, match="enlarge L"):
        escape_time_guard(TransitionScenario.default(L=5.0))


def test_scenario_validation():
    with pytest.raises(DiracWellError, match="must straddle"):
        TransitionScenario(m=1.0, a=0.7, V_sub=3.5, V_super=3.52)
    with pytest.raises(DiracWellError, match="second even appearance"):
        TransitionScenario(m=1.0, a=0.7, V_sub=3.4, V_super=3.7)
    with pytest.raises(DiracWellError, match="initial_occupation"):
        TransitionScenario(m=1.0, a=0.7, V_sub=3.4, V_super=3.5, initial_occupation="half")
    with pytest.raises(DiracWellError, match="must exceed"):
        TransitionScenario(m=1.0, a=0.7, V_sub=3.4, V_super=3.5, L=0.5)
    with pytest.warns(UserWarning, match="5%"):
        TransitionScenario(m=1.0, a=0.7, V_sub=0.94 * V_1C, V_super=1.01 * V_1C)


def test_too_small_box_rejects_bound_tail():
    with pytest.raises(DiracWellError, match="increase L"):
        overlap_coefficients(TransitionScenario.default(L=60.0))


def test_thread_count_does_not_change_results(monkeypatch):
    monkeypatch.setenv("DIRACWELL_THREADS", "1")
    _, serial = _small(L=100.0)
    monkeypatch.setenv("DIRACWELL_THREADS", "3")
    _, threaded = _small(L=100.0)
    assert serial.total == threaded.total
    assert np.array_equal(serial.N_k, threaded.N_k)
    assert np.array_equal(serial.k, threaded.k)
