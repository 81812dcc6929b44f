"""Bound spectra, gap-edge depths, and level continuation."""

import math

import pytest

from diracwell import (
    LevelLostError,
    WellParams,
    bound_states,
    critical_potentials,
    level_curve,
)

M, A = 1.0, 0.7

# analytic gap-edge depths sqrt((j*pi/2a)^2 + m^2) -/+ m at m=1, a=0.7
V_1C = 3.456727996652333
V_ODD1 = 1.456727996652333
V_EVEN2 = 3.5980484771413126
V_2C = 5.598048477141313

# levels frozen from the solver after cross-validation against the phase-sum
# counts and the quadrature-checked wavefunction residuals
FROZEN = {
    0.5: [("even", 1, 0.8502475044931578)],
    1.0: [("even", 1, 0.5653679802187657)],
    2.0: [("odd", 1, 0.8926120521929347), ("even", 1, -0.1194132533462578)],
    3.0: [("odd", 1, 0.4155203854809463), ("even", 1, -0.8016467917697053)],
    3.4: [("odd", 1, 0.1818168761349047), ("even", 1, -0.9929653507459666)],
    5.0: [("even", 2, 0.4720352938694223), ("odd", 1, -0.7783278121742842)],
}


def _params(V):
    return WellParams(m=M, a=A, V=V)


def test_frozen_levels():
    for V, expected in FROZEN.items():
        states = bound_states(_params(V))
        got = [(s.parity, s.index, s.energy) for s in states]
        assert len(got) == len(expected)
        for (par, idx, e), (par_x, idx_x, e_x) in zip(got, expected):
            assert (par, idx) == (par_x, idx_x)
            assert e == pytest.approx(e_x, abs=1e-12)


def test_levels_sorted_descending_with_small_residuals():
    states = bound_states(_params(4.0))
    energies = [s.energy for s in states]
    assert energies == sorted(energies, reverse=True)
    assert all(abs(s.residual) < 1e-9 for s in states)
    assert all(-M < s.energy < M for s in states)


def test_counts_step_at_gap_edges():
    for depth, parity in ((V_ODD1, "odd"), (V_EVEN2, "even")):
        below = [s for s in bound_states(_params(depth - 1e-6)) if s.parity == parity]
        above = [s for s in bound_states(_params(depth + 1e-6)) if s.parity == parity]
        assert len(above) == len(below) + 1
    for depth, parity in ((V_1C, "even"), (V_2C, "odd")):
        below = [s for s in bound_states(_params(depth - 1e-6)) if s.parity == parity]
        above = [s for s in bound_states(_params(depth + 1e-6)) if s.parity == parity]
        assert len(above) == len(below) - 1


def test_empty_well_has_no_levels():
    assert bound_states(_params(0.0)) == []


def test_critical_report_closed_forms():
    report = critical_potentials(_params(1.0))
    assert report.V_1c == pytest.approx(V_1C, abs=1e-14)
    assert report.V_odd1 == pytest.approx(V_ODD1, abs=1e-14)
    assert report.V_even2 == pytest.approx(V_EVEN2, abs=1e-14)
    assert report.V_2c == pytest.approx(V_2C, abs=1e-14)
    # closed forms are sqrt((j pi / 2a)^2 + m^2) -/+ m
    assert report.V_1c == pytest.approx(math.hypot(math.pi / (2 * A), M) + M, rel=1e-15)
    assert report.V_even2 == pytest.approx(math.hypot(math.pi / A, M) - M, rel=1e-15)


def test_critical_report_zero_crossings():
    report = critical_potentials(_params(1.0))
    crossings = report.zero_crossings
    # first even level crosses E=0, later the first odd level does
    assert crossings[0].parity == "even"
    # closed form at E=0: tan(a*sqrt(V^2-m^2)) = sqrt((V+m)/(V-m)), resp. -cot
    assert crossings[0].V == pytest.approx(1.8316061724271444, abs=1e-12)
    odd = [c for c in crossings if c.parity == "odd"]
    assert odd[0].V == pytest.approx(3.6992412101328283, abs=1e-12)
    for c in crossings:
        assert c.kind == "zero_crossing"
        assert M < c.V < report.v_scope


def test_all_depths_sorted():
    report = critical_potentials(_params(1.0))
    depths = [d.V for d in report.all_depths()]
    assert depths == sorted(depths)


def test_level_curve_follows_one_level():
    grid = [0.5 + (3.4 - 0.5) * i / 39 for i in range(40)]
    curve = level_curve(_params(0.5), "even", 1, grid)
    assert curve.monotone_decreasing
    energies = [e for _, e in curve]
    assert len(curve) == 40
    assert energies[0] == pytest.approx(FROZEN[0.5][0][2], abs=1e-9)
    # the level descends monotonically toward the lower gap edge
    assert all(e1 > e2 for e1, e2 in zip(energies, energies[1:]))
    assert energies[-1] > -M


def test_level_curve_lost_past_disappearance():
    grid = [2.0 + (V_1C + 0.2 - 2.0) * i / 29 for i in range(30)]
    with pytest.raises(LevelLostError):
        level_curve(_params(2.0), "even", 1, grid)
