"""Threshold counting, vacuum charge, and box-regularized mode bookkeeping."""

import math

import pytest

from diracwell import (
    DiracWellError,
    WellParams,
    bound_states,
    box_mode_count,
    levinson_check,
    parity_phases,
    vacuum_charge,
)

M, A = 1.0, 0.7
V_ODD1 = 1.456727996652333
# depth where the first even level sits exactly at E=0 (frozen from brentq on
# the E=0 matching residual; satisfies tan(a*sqrt(V^2-m^2)) = sqrt((V+m)/(V-m)))
V_ZERO_EVEN = 1.8316061724271444


def _params(V):
    return WellParams(m=M, a=A, V=V)


def test_counts_match_direct_spectrum():
    for V in (0.3, 0.9, 2.0, 3.0, 3.4, 5.0, 5.4):
        n_even, n_odd, residuals = levinson_check(_params(V))
        states = bound_states(_params(V))
        assert n_even == sum(1 for s in states if s.parity == "even")
        assert n_odd == sum(1 for s in states if s.parity == "odd")
        assert residuals["even"] < 1e-9
        assert residuals["odd"] < 1e-9
        assert residuals["total"] < 1e-9


def test_zero_depth_counts():
    assert levinson_check(_params(0.0)) == (0, 0, {"even": 0.0, "odd": 0.0, "total": 0.0})


def test_threshold_phase_structure():
    # quarter-turn grid at the band edges: even/+ on pi/2 mod pi, odd/+ on
    # 0 mod pi, even/- on 0 mod pi, odd/- on -pi/2 mod pi
    pp = parity_phases(M, _params(2.0))
    assert pp.even_plus == pytest.approx(0.5 * math.pi, abs=1e-8)
    assert pp.odd_plus == pytest.approx(math.pi, abs=1e-8)
    assert pp.even_minus == pytest.approx(0.0, abs=1e-8)
    assert pp.odd_minus == pytest.approx(-0.5 * math.pi, abs=1e-8)
    assert (pp.n_even_plus, pp.n_odd_plus, pp.n_even_minus, pp.n_odd_minus) == (1, 1, 0, 0)
    # the per-parity count relation n = (D+(m) + D-(m))/pi + 1/2
    assert (pp.even_plus + pp.even_minus) / math.pi + 0.5 == pytest.approx(1.0, abs=1e-9)
    assert (pp.odd_plus + pp.odd_minus) / math.pi + 0.5 == pytest.approx(1.0, abs=1e-9)
    assert pp.total_plus == pp.even_plus + pp.odd_plus
    assert pp.total_minus == pp.even_minus + pp.odd_minus


def test_branch_integers_do_not_depend_on_eps():
    lo = parity_phases(M, _params(2.0))
    hi = parity_phases(3.0, _params(2.0))
    assert (hi.n_even_plus, hi.n_odd_plus, hi.n_even_minus, hi.n_odd_minus) == (
        lo.n_even_plus,
        lo.n_odd_plus,
        lo.n_even_minus,
        lo.n_odd_minus,
    )
    assert hi.eps == 3.0


def test_parity_phases_rejects_gap_energies():
    with pytest.raises(DiracWellError):
        parity_phases(0.5, _params(2.0))


def test_vacuum_charge_frozen_values():
    for V, q0 in ((0.5, 0.22281692032865347), (1.0, 0.44563384065730693)):
        report = vacuum_charge(_params(V))
        assert report.Q0 == pytest.approx(q0, abs=1e-12)
        assert report.Q0_subtracted == pytest.approx(0.0, abs=1e-10)
        assert (report.N_plus, report.N_minus) == (1, 0)
        assert report.delta_plus_threshold == pytest.approx(0.5 * math.pi, abs=1e-8)
        assert report.delta_minus_threshold == pytest.approx(-0.5 * math.pi, abs=1e-8)
        assert report.Q0 - 2.0 * V * A / math.pi == pytest.approx(
            report.Q0_subtracted, abs=1e-12
        )
        assert report.V == V
    empty = vacuum_charge(_params(0.0))
    assert empty.Q0 == 0.0 and empty.Q0_subtracted == 0.0


def test_subtracted_charge_steps_only_at_zero_crossings():
    # flat at 0 below the crossing; threshold extrapolation loses a couple of
    # digits within ~1e-5 of a transition depth, hence the looser band there
    for V in (1.2, 1.7):
        assert vacuum_charge(_params(V)).Q0_subtracted == pytest.approx(0.0, abs=1e-9)
    for V in (V_ODD1 - 1e-4, V_ODD1 + 1e-4):
        assert vacuum_charge(_params(V)).Q0_subtracted == pytest.approx(0.0, abs=1e-8)
    # drops to -1 once the even level dives through E=0
    for V in (2.0, 2.5, 3.0):
        assert vacuum_charge(_params(V)).Q0_subtracted == pytest.approx(-1.0, abs=1e-9)


def test_zero_mode_conventions_split_at_crossing():
    at = _params(V_ZERO_EVEN)
    # the level really does sit at E=0 there
    zero = [s for s in bound_states(at) if abs(s.energy) < 1e-12]
    assert len(zero) == 1
    electron = vacuum_charge(at, zero_mode_convention="electron")
    positron = vacuum_charge(at, zero_mode_convention="positron")
    assert electron.Q0 - positron.Q0 == pytest.approx(1.0, abs=1e-12)
    assert electron.Q0_subtracted == pytest.approx(0.0, abs=1e-9)
    assert positron.Q0_subtracted == pytest.approx(-1.0, abs=1e-9)
    assert (electron.N_plus, electron.N_minus) == (2, 0)
    assert (positron.N_plus, positron.N_minus) == (1, 1)
    # each convention continues the matching side limit
    assert electron.Q0 == pytest.approx(
        vacuum_charge(_params(V_ZERO_EVEN - 1e-9)).Q0, abs=1e-6
    )
    assert positron.Q0 == pytest.approx(
        vacuum_charge(_params(V_ZERO_EVEN + 1e-9)).Q0, abs=1e-6
    )
    # away from a zero mode the convention is inert
    a = vacuum_charge(_params(2.5), "electron")
    b = vacuum_charge(_params(2.5), "positron")
    assert (a.Q0, a.Q0_subtracted, a.N_plus, a.N_minus) == (b.Q0, b.Q0_subtracted, b.N_plus, b.N_minus)


def test_vacuum_charge_rejects_unknown_convention():
    with pytest.raises(ValueError):
        vacuum_charge(_params(1.0), zero_mode_convention="bogus")


def test_box_counts_frozen():
    box = box_mode_count(_params(2.0), 500.0, 50.0)
    assert box.counts == {
        "even_plus": 7957,
        "odd_plus": 7956,
        "even_minus": 7957,
        "odd_minus": 7958,
    }
    assert box.n_bound == 2
    assert box.n_edge_modes == 0
    assert box.nu_max == 7957
    assert box.total == 31830
    assert all(0.0 < k < 3.0 * math.pi / 500.0 for k in box.k_min.values())


def test_box_empty_well_keeps_edge_modes():
    box = box_mode_count(_params(0.0), 500.0, 50.0)
    assert set(box.counts.values()) == {7957}
    assert box.n_bound == 0
    assert box.n_edge_modes == 2
    assert box.total == 31830


def test_box_weak_well_closed_form():
    # the weak well pulls one even/+ mode down into the gap: the channel is
    # left with round(LK/pi) - 1 box modes
    box = box_mode_count(_params(0.01), 500.0, 50.0)
    assert box.counts["even_plus"] == round(500.0 * 50.0 / math.pi) - 1
    assert box.n_bound == 1


def test_box_total_is_depth_independent():
    totals = {
        V: box_mode_count(_params(V), 500.0, 50.0).total for V in (0.0, 0.01, 2.0, 3.3, 5.0)
    }
    assert len(set(totals.values())) == 1
