"""End-to-end verification suite.

Every advertised guarantee of the package is exercised by one named check
returning a pass/fail verdict with a one-line summary.  The CLI `verify`
subcommand and the test suite both run these; keeping them here means the
shipped artifact can re-certify itself without the test tree.

All randomized checks draw from a seeded generator, so a fixed seed gives a
bit-reproducible verdict.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .core import EVEN, ODD, WellParams, bound_matching_residual
from .delta_well import delta_bound_state, delta_phase_shift
from .emission import TransitionScenario, charge_ledger, emission_spectrum, overlap_coefficients
from .levinson import box_mode_count, levinson_check, vacuum_charge
from .scattering import phase_shift, threshold_phase, time_delay
from .spectrum import bound_states, critical_potentials

DEFAULT_SEED = 20260814

_PI = math.pi


@dataclass(frozen=True)
class CheckResult:
    """Verdict of one verification check."""

    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.name:<24s} {self.seconds:7.2f}s  {self.detail}"


def _result(name: str, t0: float, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail, seconds=time.perf_counter() - t0)


def _mod_pi_distance(x: float, target: float) -> float:
    """Distance from x to target modulo pi."""
    r = math.fmod(x - target, _PI)
    if r < 0.0:
        r += _PI
    return min(r, _PI - r)


def _transition_depths(m: float, a: float, v_max: float) -> list:
    """All gap-edge depths (level at E=+m or E=-m) up to v_max."""
    depths = []
    j = 0
    while True:
        r = math.hypot(j * _PI / (2.0 * a), m)
        if r - m > v_max and j > 0:
            break
        for d in (r - m, r + m):
            if 0.0 < d <= v_max:
                depths.append(d)
        j += 1
    return depths


def _draw_clear_depth(rng, lo: float, hi: float, depths, margin: float = 3e-5) -> float:
    """Uniform draw from (lo, hi) staying `margin` away from any transition."""
    for _ in range(1000):
        v = rng.uniform(lo, hi)
        if all(abs(v - d) > margin for d in depths):
            return v
    raise RuntimeError("could not draw a depth away from transitions")


# ----------------------------------------------------------------------------
# 1. threshold-phase sums count bound states exactly
# ----------------------------------------------------------------------------


def check_levinson_counts(seed: int = DEFAULT_SEED) -> CheckResult:
    """200 random subcritical wells: phase-sum counts equal direct root counts."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed + 1)
    n_draws = 200
    worst = 0.0
    bad = 0
    for _ in range(n_draws):
        a = rng.uniform(0.3, 1.5)
        v_1c = math.hypot(_PI / (2.0 * a), 1.0) + 1.0
        depths = _transition_depths(1.0, a, 0.96 * v_1c)
        V = _draw_clear_depth(rng, 0.05 * v_1c, 0.95 * v_1c, depths)
        params = WellParams(m=1.0, a=a, V=V)
        n_even, n_odd, residuals = levinson_check(params)
        states = bound_states(params)
        direct_even = sum(1 for s in states if s.parity == EVEN)
        direct_odd = sum(1 for s in states if s.parity == ODD)
        if (n_even, n_odd) != (direct_even, direct_odd):
            bad += 1
        worst = max(worst, residuals["even"], residuals["odd"], residuals["total"])
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and worst < 1e-6 and elapsed < 30.0
    detail = f"{n_draws - bad}/{n_draws} count pairs exact; worst residual {worst:.2e}"
    return _result("levinson-counts", t0, ok, detail)


# ----------------------------------------------------------------------------
# 2. threshold phases sit on the universal values (mod pi)
# ----------------------------------------------------------------------------


def check_threshold_phases(seed: int = DEFAULT_SEED) -> CheckResult:
    """50 random depths: delta_+(m) = pi/2 and delta_-(thr) = -pi/2 (mod pi)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed + 2)
    a = 0.7
    depths = _transition_depths(1.0, a, 7.6)
    worst = 0.0
    for _ in range(50):
        V = _draw_clear_depth(rng, 0.05, 7.5, depths)
        params = WellParams(m=1.0, a=a, V=V)
        d_plus = threshold_phase(params, +1, "total")
        d_minus = threshold_phase(params, -1, "total")
        worst = max(
            worst,
            _mod_pi_distance(d_plus, _PI / 2.0),
            _mod_pi_distance(d_minus, -_PI / 2.0),
        )
    ok = worst < 1e-8
    return _result("threshold-phases", t0, ok, f"50 depths; worst mod-pi defect {worst:.2e}")


# ----------------------------------------------------------------------------
# 3. high-energy behaviour: delta -> +/-2Va and the signed sum vanishes
# ----------------------------------------------------------------------------


def check_high_energy_asymptote(seed: int = DEFAULT_SEED) -> CheckResult:
    """50 random depths: |delta_+(1e4 m) - 2Va| < 1e-3 and delta_+ + delta_- -> 0."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed + 3)
    a = 0.7
    depths = _transition_depths(1.0, a, 7.6)
    worst_abs = 0.0
    worst_sum = 0.0
    for _ in range(50):
        V = _draw_clear_depth(rng, 0.05, 7.5, depths)
        params = WellParams(m=1.0, a=a, V=V)
        worst_abs = max(worst_abs, abs(phase_shift(1.0e4, params) - 2.0 * V * a))
        s = phase_shift(1.0e6, params) + phase_shift(-1.0e6, params)
        worst_sum = max(worst_sum, abs(s))
    ok = worst_abs < 1e-3 and worst_sum < 1e-6
    detail = f"50 depths; worst |delta(1e4)-2Va| {worst_abs:.2e}; worst signed sum {worst_sum:.2e}"
    return _result("high-energy-asymptote", t0, ok, detail)


# ----------------------------------------------------------------------------
# 4. gap-edge depths: closed forms vs independent root finding
# ----------------------------------------------------------------------------


def _edge_depth(parity: str, edge_sign: int, lo: float, hi: float, m: float, a: float) -> float:
    """Depth at which a `parity` level sits exactly at E = edge_sign*m.

    Root-finds the matching residual evaluated at the gap edge as a function
    of V, so it is an independent cross-check of the analytic depths.
    """

    def residual(V):
        return bound_matching_residual(edge_sign * m, parity, WellParams(m=m, a=a, V=V))

    return brentq(residual, lo, hi, xtol=1e-12, rtol=8.9e-16)


def check_critical_depths(seed: int = DEFAULT_SEED) -> CheckResult:
    """m=1, a=0.7 gap-edge depths from closed forms match direct root finding."""
    t0 = time.perf_counter()
    report = critical_potentials(WellParams(m=1.0, a=0.7, V=1.0))
    targets = [
        ("V_odd1", report.V_odd1, ODD, +1, 1.3, 1.6),
        ("V_1c", report.V_1c, EVEN, -1, 3.3, 3.52),
        ("V_even2", report.V_even2, EVEN, +1, 3.52, 3.8),
        ("V_2c", report.V_2c, ODD, -1, 5.45, 5.7),
    ]
    worst = 0.0
    pieces = []
    for name, closed, parity, edge_sign, lo, hi in targets:
        found = _edge_depth(parity, edge_sign, lo, hi, 1.0, 0.7)
        err = abs(found - closed)
        worst = max(worst, err)
        pieces.append(f"{name}={closed:.5f} ({err:.1e})")
    ok = worst < 1e-8
    return _result("critical-depths", t0, ok, "; ".join(pieces))


# ----------------------------------------------------------------------------
# 5. vacuum charge: continuous at gap edges, unit drop at E=0
# ----------------------------------------------------------------------------


def check_vacuum_charge_steps(seed: int = DEFAULT_SEED) -> CheckResult:
    """Q0 continuous across gap-edge depths; jump of exactly -1 at an E=0 crossing."""
    t0 = time.perf_counter()
    report = critical_potentials(WellParams(m=1.0, a=0.7, V=1.0))

    def q0(V):
        return vacuum_charge(WellParams(m=1.0, a=0.7, V=V)).Q0

    gap_jump = 0.0
    for depth in (report.V_odd1, report.V_1c):
        gap_jump = max(gap_jump, abs(q0(depth + 1e-4) - q0(depth - 1e-4)))

    v0 = report.zero_crossings[0].V  # first even level at E=0, root-found
    drop = q0(v0 + 1e-7) - q0(v0 - 1e-7)
    ok = gap_jump < 1e-3 and abs(drop + 1.0) < 1e-6
    detail = f"gap-edge |dQ0| {gap_jump:.2e}; E=0 drop {drop:+.9f}"
    return _result("vacuum-charge-steps", t0, ok, detail)


# ----------------------------------------------------------------------------
# 6. contact-potential limit: squeezed well vs closed forms
# ----------------------------------------------------------------------------


def check_contact_limit(seed: int = DEFAULT_SEED) -> CheckResult:
    """V=1e4 squeezed wells match the contact-potential phase and bound level."""
    t0 = time.perf_counter()
    V = 1.0e4
    ks = np.logspace(-2.0, 2.0, 50)
    worst_phase = 0.0
    worst_level = 0.0
    for lam in (0.3, 1.0, 2.0, _PI / 2.0 - 0.01, _PI / 2.0 + 0.01):
        params = WellParams(m=1.0, a=lam / (2.0 * V), V=V)
        for k in ks:
            e = math.hypot(k, 1.0)
            for energy in (e, -e):
                diff = abs(phase_shift(energy, params) - delta_phase_shift(energy, lam))
                worst_phase = max(worst_phase, diff)
        oracle = delta_bound_state(lam)
        states = bound_states(params)
        levels = [s for s in states if s.parity == oracle.parity]
        if len(states) != 1 or len(levels) != 1:
            return _result(
                "contact-limit",
                t0,
                False,
                f"lam={lam}: expected one {oracle.parity} level, got {states}",
            )
        worst_level = max(worst_level, abs(levels[0].energy - oracle.energy))
    ok = worst_phase < 1e-3 and worst_level < 1e-3
    detail = f"worst phase diff {worst_phase:.2e}; worst level diff {worst_level:.2e}"
    return _result("contact-limit", t0, ok, detail)


# ----------------------------------------------------------------------------
# 7-9. sudden-switch emission: sum rule, peak location, charge bookkeeping
# ----------------------------------------------------------------------------


@functools.lru_cache(maxsize=4)
def _default_emission(L: float):
    scenario = TransitionScenario.default(L=L)
    coeffs = overlap_coefficients(scenario)
    return scenario, coeffs, emission_spectrum(coeffs, scenario)


def check_emission_sum_rule(seed: int = DEFAULT_SEED) -> CheckResult:
    """Default scenario: sum rule >= 0.99, stable under box doubling, filled -> 0."""
    t0 = time.perf_counter()
    scenario, coeffs, spectrum = _default_emission(400.0)
    _, _, doubled = _default_emission(800.0)
    filled = emission_spectrum(coeffs, replace(scenario, initial_occupation="filled"))
    elapsed = time.perf_counter() - t0
    # by L=400 the sum is box-converged to ~1e-11, so "monotone toward 1" is
    # asserted as non-decreasing within a 1e-9 convergence floor
    ok = (
        spectrum.total >= 0.99
        and doubled.total >= spectrum.total - 1e-9
        and doubled.total <= 1.0 + 1e-9
        and filled.total == 0.0
        and not np.any(filled.N_k != 0.0)
        and elapsed < 120.0
    )
    detail = (
        f"total {spectrum.total:.6f} (L=400) and {doubled.total:.6f} (L=800); "
        f"filled total {filled.total:.1f}"
    )
    return _result("emission-sum-rule", t0, ok, detail)


def check_emission_peak_location(seed: int = DEFAULT_SEED) -> CheckResult:
    """Spectrum peak within 2 grid spacings of the first reflectionless momentum.

    This encodes an expected behaviour that the faithfully computed overlap
    spectrum does not show: the peak tracks the bound-tail momentum scale
    (~kappa of the initial level), which for the default scenario lies well
    below the reflectionless momentum of the deep well.  The check reports the
    honest distance; see the design notes for the numerical evidence.
    """
    t0 = time.perf_counter()
    scenario, _, spectrum = _default_emission(400.0)
    spacing = _PI / scenario.L
    gap = abs(spectrum.peak_k - spectrum.k_resonance)
    ok = gap <= 2.0 * spacing
    detail = (
        f"peak k={spectrum.peak_k:.6f} vs reflectionless k={spectrum.k_resonance:.6f} "
        f"({gap / spacing:.1f} grid spacings; allowed 2)"
    )
    return _result("emission-peak-location", t0, ok, detail)


def check_charge_conservation(seed: int = DEFAULT_SEED) -> CheckResult:
    """Total charge constant across the switch; subtracted asymmetry unchanged."""
    t0 = time.perf_counter()
    scenario, coeffs, spectrum = _default_emission(400.0)
    ledger = charge_ledger(scenario, spectrum)
    sub_diff = abs(ledger.Q0_subtracted_after - ledger.Q0_subtracted_before)
    raw_diff = abs(ledger.Q0_after - ledger.Q0_before)
    ok = abs(ledger.drift) < 1e-2 and sub_diff < 1e-6
    detail = (
        f"stage drift {ledger.drift:.2e}; subtracted-asymmetry diff {sub_diff:.2e} "
        f"(raw background diff {raw_diff:.4f})"
    )
    return _result("charge-conservation", t0, ok, detail)


# ----------------------------------------------------------------------------
# 10. dwell time at the first reflectionless energy
# ----------------------------------------------------------------------------


def check_time_delay(seed: int = DEFAULT_SEED) -> CheckResult:
    """Closed form = 0.96106 (1e-5); exact vs finite-difference; 5% agreement."""
    t0 = time.perf_counter()
    v_1c = math.hypot(_PI / 1.4, 1.0) + 1.0
    report = time_delay(WellParams(m=1.0, a=0.7, V=1.001 * v_1c), N=1)
    closed_err = abs(report.closed_form - 0.96106)
    fd_rel = abs(report.d_delta_dk - report.d_delta_dk_fd) / abs(report.d_delta_dk)
    closed_rel = abs(report.closed_form - report.d_delta_dk) / abs(report.d_delta_dk)
    ok = closed_err < 1e-5 and fd_rel < 1e-4 and closed_rel < 0.05
    detail = (
        f"closed {report.closed_form:.6f} (err {closed_err:.1e}); "
        f"FD rel diff {fd_rel:.1e}; closed-vs-exact {closed_rel:.2%}"
    )
    return _result("time-delay", t0, ok, detail)


# ----------------------------------------------------------------------------
# 11. periodic-box bookkeeping
# ----------------------------------------------------------------------------


def check_box_counting(seed: int = DEFAULT_SEED) -> CheckResult:
    """Weak-well count equals round(LK/pi - 1); totals conserved for V in {0, 2}."""
    t0 = time.perf_counter()
    L, K = 500.0, 50.0
    weak = box_mode_count(WellParams(m=1.0, a=0.7, V=0.01), L, K)
    expected_weak = round(L * K / _PI - 1.0)
    box_free = box_mode_count(WellParams(m=1.0, a=0.7, V=0.0), L, K)
    box_two = box_mode_count(WellParams(m=1.0, a=0.7, V=2.0), L, K)
    ok = (
        weak.counts["even_plus"] == expected_weak
        and box_free.total == box_two.total
    )
    detail = (
        f"weak even/+ count {weak.counts['even_plus']} (expected {expected_weak}); "
        f"totals {box_free.total} (V=0) vs {box_two.total} (V=2)"
    )
    return _result("box-counting", t0, ok, detail)


# ----------------------------------------------------------------------------
# runner
# ----------------------------------------------------------------------------

ALL_CHECKS = (
    ("levinson-counts", check_levinson_counts),
    ("threshold-phases", check_threshold_phases),
    ("high-energy-asymptote", check_high_energy_asymptote),
    ("critical-depths", check_critical_depths),
    ("vacuum-charge-steps", check_vacuum_charge_steps),
    ("contact-limit", check_contact_limit),
    ("emission-sum-rule", check_emission_sum_rule),
    ("emission-peak-location", check_emission_peak_location),
    ("charge-conservation", check_charge_conservation),
    ("time-delay", check_time_delay),
    ("box-counting", check_box_counting),
)

# documented-to-fail checks: implemented faithfully, reported honestly; see
# the design-notes ledger for the measured evidence
EXPECTED_FAILURES = frozenset({"emission-peak-location"})


def run_all(seed: int = DEFAULT_SEED, stream=None, names=None) -> list:
    """Run the verification checks, print one line each, return the results.

    `names` optionally restricts to a subset (iterable of check names).
    """
    wanted = None if names is None else set(names)
    results = []
    for name, func in ALL_CHECKS:
        if wanted is not None and name not in wanted:
            continue
        result = func(seed=seed)
        if stream is not None:
            print(result.line(), file=stream, flush=True)
        results.append(result)
    return results
