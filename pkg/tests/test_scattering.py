"""Phase-shift continuation, thresholds, resonances, and time delay."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diracwell import (
    DiracWellError,
    WellParams,
    channel_integers,
    channel_phase,
    phase_shift,
    phase_shift_curve,
    threshold_integers,
    threshold_phase,
    time_delay,
    transmission_resonances,
)
from diracwell.core import channel_phase_mod_pi
from diracwell.scattering import AmbiguousThresholdError

M, A = 1.0, 0.7
V_1C = 3.456727996652333
V_ODD1 = 1.456727996652333


def _params(V, a=A):
    return WellParams(m=M, a=a, V=V)


def _mod_pi_gap(x, y):
    d = abs(x - y) % math.pi
    return min(d, math.pi - d)


def test_total_phase_matches_closed_form():
    # independent check: tan(delta + 2ka) = (1+g^2)/(2g) * tan(2pa) with
    # g = (k/p)(E+V+m)/(E+m), compared as angles so tan blowups don't bite
    rng = np.random.default_rng(7)
    for _ in range(12):
        a = float(rng.uniform(0.3, 1.2))
        V = float(rng.uniform(0.2, 6.0))
        E = float(rng.choice([-1.0, 1.0])) * float(rng.uniform(1.001, 40.0))
        params = WellParams(m=M, a=a, V=V)
        k = math.sqrt(E * E - M * M)
        w = (E + V) ** 2 - M * M
        if w <= 1e-6:
            continue
        p = math.sqrt(w)
        g = (k / p) * (E + V + M) / (E + M)
        lhs = math.atan(math.tan(phase_shift(E, params) + 2 * k * a))
        rhs = math.atan((1 + g * g) / (2 * g) * math.tan(2 * p * a))
        assert _mod_pi_gap(lhs, rhs) < 1e-12


def test_zero_depth_phase_vanishes():
    for E in (-5.0, -1.5, 1.5, 5.0, 1e4):
        assert phase_shift(E, _params(0.0)) == 0.0
    assert channel_phase(0.3, 1, "even", _params(0.0)) == 0.0


def test_phase_needs_propagating_energy():
    with pytest.raises(DiracWellError):
        phase_shift(0.5, _params(2.0))
    with pytest.raises(DiracWellError):
        phase_shift(-1.0, _params(2.0))


def test_threshold_values_sit_on_half_integer_grid():
    # upper threshold locks to pi/2 mod pi, lower to -pi/2 mod pi
    for V in (0.4, 1.0, 2.0, 3.3, 5.0, 7.2):
        up = threshold_phase(_params(V), +1)
        dn = threshold_phase(_params(V), -1)
        assert _mod_pi_gap(up, math.pi / 2) < 1e-8
        assert _mod_pi_gap(dn, -math.pi / 2) < 1e-8


def test_threshold_integers_frozen():
    assert threshold_integers(_params(1.0)) == (1, 0)
    assert threshold_integers(_params(2.0)) == (2, 0)
    assert threshold_integers(_params(3.5)) == (2, -1)


def test_channel_integers_frozen():
    assert channel_integers(_params(2.0)) == {
        "even_plus": 1,
        "odd_plus": 1,
        "even_minus": 0,
        "odd_minus": 0,
    }


def test_exact_transition_depth_raises():
    with pytest.raises(AmbiguousThresholdError):
        threshold_phase(_params(V_ODD1), +1)
    with pytest.raises(AmbiguousThresholdError):
        channel_integers(_params(V_ODD1))
    # a small offset clears the guard band
    assert threshold_integers(_params(V_ODD1 + 1e-6)) == (2, 0)
    assert threshold_integers(_params(V_ODD1 - 1e-6)) == (1, 0)


def test_high_energy_asymptotes():
    curve = phase_shift_curve(_params(2.0), n_points=40)
    assert curve.asymptote_plus == pytest.approx(2 * 2.0 * A, abs=1e-9)
    assert curve.asymptote_minus == pytest.approx(-2 * 2.0 * A, abs=1e-9)
    # the two branches cancel at matched high energies
    assert phase_shift(1e6, _params(2.0)) + phase_shift(-1e6, _params(2.0)) == pytest.approx(
        0.0, abs=1e-6
    )


def test_phase_curve_structure():
    curve = phase_shift_curve(_params(2.0), n_points=60)
    assert len(curve.samples) == 60
    eps = [s[0] for s in curve.samples]
    assert all(e > M for e in eps)
    assert eps == sorted(eps)
    assert curve.n == 2 and curve.n_prime == 0
    assert curve.threshold_plus == pytest.approx(1.5 * math.pi, abs=1e-8)
    assert curve.threshold_minus == pytest.approx(-0.5 * math.pi, abs=1e-8)
    # continuation never tears: adjacent samples stay well inside a branch
    for col in (1, 2):
        vals = [s[col] for s in curve.samples]
        assert max(abs(b - a_) for a_, b in zip(vals, vals[1:])) < 0.5 * math.pi
    # endpoints join the threshold and asymptote anchors
    assert curve.samples[0][1] == pytest.approx(curve.threshold_plus, abs=1e-3)
    assert curve.samples[0][2] == pytest.approx(curve.threshold_minus, abs=1e-3)


def test_zero_depth_curve_is_flat():
    curve = phase_shift_curve(_params(0.0), n_points=25)
    assert all(s[1] == 0.0 and s[2] == 0.0 for s in curve.samples)
    assert curve.n == 0 and curve.n_prime == 0


def test_reflectionless_energies_frozen():
    res = transmission_resonances(_params(6.0), (-5.0, -1.1))
    assert [r.N for r in res] == [1, 2]
    assert res[0].energy == pytest.approx(-3.5432720033476666, rel=1e-12)
    assert res[0].k == pytest.approx(3.3992317499263547, rel=1e-12)
    assert res[1].energy == pytest.approx(-1.4019515228586874, rel=1e-12)
    assert res[1].k == pytest.approx(0.9825823489386488, rel=1e-12)
    assert all(r.reflection < 1e-12 for r in res)
    assert transmission_resonances(_params(0.0), (-5.0, -1.1)) == []


def test_reflectionless_condition_is_interior_half_waves():
    # at each listed energy the interior momentum satisfies 2pa = N*pi
    for r in transmission_resonances(_params(6.0), (-5.0, -1.1)):
        p = math.sqrt((r.energy + 6.0) ** 2 - M * M)
        assert 2 * p * A == pytest.approx(r.N * math.pi, abs=1e-10)


def test_time_delay_report_frozen():
    td = time_delay(_params(1.001 * V_1C), N=1)
    assert td.N == 1
    assert td.energy == pytest.approx(-1.0034567279966513, rel=1e-12)
    assert td.k == pytest.approx(0.0832190180292068, rel=1e-10)
    assert td.v0 == pytest.approx(0.0829323434756865, rel=1e-10)
    assert td.d_delta_dk == pytest.approx(0.9587050102660202, rel=1e-9)
    assert td.closed_form == pytest.approx(0.9610579347807562, rel=1e-12)
    assert td.delta_t == pytest.approx(11.560085849341, rel=1e-9)
    # finite-difference cross-check agrees with the analytic slope
    assert td.d_delta_dk_fd == pytest.approx(td.d_delta_dk, rel=1e-6)
    # near criticality the approximate form lands within half a percent
    assert td.closed_form == pytest.approx(td.d_delta_dk, rel=5e-3)
    # the delay is the phase slope divided by the group speed k/|E|
    assert td.v0 == pytest.approx(td.k / abs(td.energy), rel=1e-12)
    assert td.delta_t == pytest.approx(td.d_delta_dk / td.v0, rel=1e-12)


def test_time_delay_needs_supercritical_depth():
    with pytest.raises(DiracWellError):
        time_delay(_params(2.0), N=1)


@settings(max_examples=40, deadline=None)
@given(
    k=st.floats(min_value=1e-2, max_value=50.0),
    sign=st.sampled_from([-1, 1]),
    channel=st.sampled_from(["even", "odd"]),
)
def test_unwrapped_phase_agrees_with_branch_free_form(k, sign, channel):
    params = _params(2.0)
    delta = channel_phase(k, sign, channel, params)
    t = k * k / (M + math.hypot(k, M))
    theta, k_back = channel_phase_mod_pi(t, sign, channel, params)
    assert k_back == pytest.approx(k, rel=1e-12)
    ratio = (delta + k * A - theta) / math.pi
    assert abs(ratio - round(ratio)) < 1e-9
