"""Sudden-switch pair creation at the first supercritical transition.

The scenario: the depth jumps instantaneously between V_sub (even ground
level bound, just above the lower gap edge) and V_super (level dived into the
lower continuum).  Both Hamiltonians are diagonalized in the same periodic
box of half-width L, the initial eigenbasis is expanded in the final one, and
the Bogoliubov rows give the emission physics:

  * initial level vacant -> the vacancy spreads over final negative-energy
    modes with probabilities |M_nu|^2: the positron emission spectrum, peaked
    at the momentum where the dived level sits as a transmission resonance;
  * initial level filled -> the level simply joins the sea; nothing is
    emitted.

The odd channel is a spectator: its bound level exists with E > 0 on both
sides of the transition and carries over with overlap ~ 1.  Scenarios where
that fails are rejected.

All overlaps are closed-form per segment, spot-checked against quadrature.
Charge bookkeeping uses the background-subtracted vacuum charge, which is
constant across the transition, so the stage totals must agree.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .core import (
    EVEN,
    ODD,
    DiracWellError,
    PiecewiseSpinor,
    Segment,
    WellParams,
    _scaled,
    bound_wavefunction,
    norm_squared,
    overlap,
    overlap_quad,
    scattering_wavefunction,
)
from .levinson import vacuum_charge
from .scattering import (
    channel_integers,
    channel_phase,
    channel_phase_derivative,
    time_delay,
)
from .spectrum import bound_states

__all__ = [
    "ChargeLedger",
    "EmissionSpectrum",
    "OverlapCoefficients",
    "TransitionScenario",
    "charge_ledger",
    "emission_spectrum",
    "escape_time_guard",
    "first_supercritical_depth",
    "overlap_coefficients",
]

_PI = math.pi

OCCUPATIONS = ("filled", "vacant")

# fraction of the bound state's norm allowed outside the box
_TAIL_LIMIT = 1e-6
# closed-form vs quadrature overlap spot-check tolerance
_QUAD_TOL = 1e-8


def first_supercritical_depth(m: float, a: float) -> float:
    """Depth at which the even ground level reaches the lower gap edge."""
    return math.hypot(_PI / (2.0 * a), m) + m


def _second_even_appearance(m: float, a: float) -> float:
    """Depth where a second even level detaches from the upper edge."""
    return math.hypot(_PI / a, m) - m


def _n_workers() -> int:
    env = os.environ.get("DIRACWELL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise DiracWellError(f"DIRACWELL_THREADS={env!r} is not an integer") from exc
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class TransitionScenario:
    """A sudden V_sub <-> V_super switch diagonalized in a periodic box.

    initial_occupation says whether the even level is filled or vacant before
    the switch.  eps_max sets the energy cutoff of the mode towers (default
    10m).  V_sub == V_super < V_1c is allowed as a degenerate no-switch
    scenario (useful for exercising the machinery; every row is then exactly
    diagonal).
    """

    m: float
    a: float
    V_sub: float
    V_super: float
    initial_occupation: str = "vacant"
    L: float = 400.0
    eps_max: Optional[float] = None

    @classmethod
    def default(
        cls,
        m: float = 1.0,
        a: float = 0.7,
        band: float = 0.01,
        initial_occupation: str = "vacant",
        L: float = 400.0,
        eps_max: Optional[float] = None,
    ) -> "TransitionScenario":
        """Symmetric switch V_1c*(1 -/+ band) around the first transition."""
        v1c = first_supercritical_depth(m, a)
        return cls(
            m=m,
            a=a,
            V_sub=(1.0 - band) * v1c,
            V_super=(1.0 + band) * v1c,
            initial_occupation=initial_occupation,
            L=L,
            eps_max=eps_max,
        )

    def __post_init__(self):
        if self.m <= 0 or self.a <= 0:
            raise DiracWellError("scenario needs m > 0 and a > 0")
        if self.L <= self.a:
            raise DiracWellError(f"box half-width L={self.L} must exceed a={self.a}")
        if self.initial_occupation not in OCCUPATIONS:
            raise DiracWellError(
                f"initial_occupation must be one of {OCCUPATIONS}, "
                f"got {self.initial_occupation!r}"
            )
        if self.eps_max is None:
            object.__setattr__(self, "eps_max", 10.0 * self.m)
        if self.eps_max <= self.m:
            raise DiracWellError("eps_max must exceed m")
        v1c = self.V_critical
        degenerate = self.V_sub == self.V_super and self.V_sub < v1c
        if not degenerate and not (0.0 < self.V_sub < v1c < self.V_super):
            raise DiracWellError(
                f"scenario must straddle the first transition: "
                f"V_sub={self.V_sub} < V_1c={v1c} < V_super={self.V_super} "
                "(or V_sub == V_super below it)"
            )
        if self.V_super >= _second_even_appearance(self.m, self.a):
            raise DiracWellError(
                f"V_super={self.V_super} is at/above the second even appearance "
                f"{_second_even_appearance(self.m, self.a)}; the single-level "
                "bookkeeping no longer applies"
            )
        if max(self.V_super / v1c - 1.0, 1.0 - self.V_sub / v1c) > 0.05 and not degenerate:
            warnings.warn(
                "switch further than 5% from the critical depth: the emission "
                "line broadens and the sum rule converges slowly in L",
                stacklevel=2,
            )
        # the odd level must be a spectator: present, positive, on both sides
        for V in {self.V_sub, self.V_super}:
            odd = [s for s in bound_states(WellParams(self.m, self.a, V)) if s.parity == ODD]
            if len(odd) != 1 or odd[0].energy <= 0.0:
                raise DiracWellError(
                    f"odd channel is not a spectator at V={V}: need exactly one "
                    "odd level with E > 0 on both sides of the switch"
                )

    @property
    def V_critical(self) -> float:
        return first_supercritical_depth(self.m, self.a)

    @property
    def params_sub(self) -> WellParams:
        return WellParams(m=self.m, a=self.a, V=self.V_sub)

    @property
    def params_super(self) -> WellParams:
        return WellParams(m=self.m, a=self.a, V=self.V_super)

    @property
    def resonance_momentum(self) -> float:
        """k of the dived level's transmission resonance at V_super.

        NaN for a degenerate (subcritical) scenario, where the level has not
        dived and there is no resonance.
        """
        E = -self.V_super + math.hypot(_PI / (2.0 * self.a), self.m)
        if E >= -self.m:
            return math.nan
        return math.sqrt((E - self.m) * (E + self.m))


# ----------------------------------------------------------------------------
# Box mode towers
# ----------------------------------------------------------------------------


_FLOOR_KEY = {
    (+1, EVEN): ("even_plus", -1),
    (+1, ODD): ("odd_plus", 0),
    (-1, EVEN): ("even_minus", 0),
    (-1, ODD): ("odd_minus", -1),
}


def _tower_floor(params: WellParams, sign: int, channel: str) -> int:
    """floor(Delta_thr/pi) for the channel, via the exact branch integers."""
    key, off = _FLOOR_KEY[(sign, channel)]
    return channel_integers(params)[key] + off


def _tower_momenta(params: WellParams, sign: int, channel: str, L: float, eps_max: float):
    """Box momenta k_nu solving kL + Delta(k) = nu*pi, threshold to cutoff.

    Returns (nus, ks) as arrays; nu starts just above the threshold branch
    and stops at the comoving cutoff floor((k_max L + Delta(k_max))/pi).
    """
    m = params.m
    k_max = math.sqrt((eps_max - m) * (eps_max + m))
    d_max = channel_phase(k_max, sign, channel, params)
    nu_min = _tower_floor(params, sign, channel) + 1
    nu_max = math.floor((k_max * L + d_max) / _PI)

    def f(k, nu):
        return k * L + channel_phase(k, sign, channel, params) - nu * _PI

    nus, ks = [], []
    k_prev = 1e-13 * m
    for nu in range(nu_min, nu_max + 1):
        lo = k_prev
        hi = min(((nu + 2) * _PI + 4.0 * _PI) / L, k_max * 1.5)
        while f(hi, nu) < 0.0:
            hi *= 1.5
        k_nu = brentq(f, lo, hi, args=(nu,), xtol=1e-14, rtol=8.9e-16)
        nus.append(nu)
        ks.append(k_nu)
        k_prev = k_nu
    return np.asarray(nus, dtype=int), np.asarray(ks, dtype=float)


def _mode(params: WellParams, sign: int, channel: str, k: float, L: float) -> PiecewiseSpinor:
    delta = channel_phase(k, sign, channel, params)
    return scattering_wavefunction(k, sign, channel, params, norm_kind="box", L=L, phase=delta)


def _box_bound(params: WellParams, parity: str, L: float) -> PiecewiseSpinor:
    """The parity's single bound level, renormalized to the box."""
    levels = [s for s in bound_states(params) if s.parity == parity]
    if len(levels) != 1:
        raise DiracWellError(
            f"expected exactly one {parity} bound level at V={params.V}, found {len(levels)}"
        )
    u = bound_wavefunction(levels[0].energy, parity, params)
    inside = norm_squared(u, -L, L)
    tail = 1.0 - inside
    if tail > _TAIL_LIMIT:
        kappa = math.sqrt((params.m - levels[0].energy) * (params.m + levels[0].energy))
        needed = params.a + 0.5 * math.log(1.0 / _TAIL_LIMIT) / kappa
        raise DiracWellError(
            f"bound-state tail outside the box is {tail:.2e} (limit {_TAIL_LIMIT}); "
            f"increase L to at least ~{needed:.0f}"
        )
    scale = 1.0 / math.sqrt(inside)
    segs = tuple(Segment(s.x0, s.x1, _scaled(s.terms, scale)) for s in u.segments)
    return replace(u, segments=segs, norm_kind="box")


# ----------------------------------------------------------------------------
# Overlap coefficients
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapCoefficients:
    """Row-aligned Bogoliubov coefficients between the two box bases.

    Arrays are indexed by the shared mode index nu; entries are NaN where a
    tower has no such mode (below its threshold branch or beyond its cutoff).
    Unprimed arrays are the even channel; final(+)-rows carry A, B, F and
    final(-)-rows carry G, L, M:

        A = <final+,nu | initial+,nu>    G = <final-,nu | initial+,nu>
        B = <final+,nu | initial-,nu>    L = <final-,nu | initial-,nu>
        F = <final+,nu | initial bound>  M = <final-,nu | initial bound>

    so |M|^2 is the emission weight of mode nu.  The *_odd arrays are the
    spectator-channel analogues; bound_overlap_odd is the direct carry-over
    of the odd level (magnitude ~ 1).
    """

    scenario: TransitionScenario
    nu: np.ndarray
    k_sub_plus: np.ndarray
    k_sub_minus: np.ndarray
    k_super_plus: np.ndarray
    k_super_minus: np.ndarray
    A: np.ndarray
    B: np.ndarray
    F: np.ndarray
    G: np.ndarray
    L: np.ndarray
    M: np.ndarray
    nu_odd: np.ndarray
    k_sub_plus_odd: np.ndarray
    k_sub_minus_odd: np.ndarray
    k_super_plus_odd: np.ndarray
    k_super_minus_odd: np.ndarray
    A_odd: np.ndarray
    B_odd: np.ndarray
    F_odd: np.ndarray
    G_odd: np.ndarray
    L_odd: np.ndarray
    M_odd: np.ndarray
    bound_overlap_odd: complex
    bound_energy_sub: float
    odd_bound_energy_sub: float
    odd_bound_energy_super: float


def _channel_towers(scenario: TransitionScenario, channel: str):
    """Mode momenta of the four towers (sub/super x +/-) for one channel."""
    out = {}
    for label, params in (("sub", scenario.params_sub), ("super", scenario.params_super)):
        for sign in (+1, -1):
            nus, ks = _tower_momenta(params, sign, channel, scenario.L, scenario.eps_max)
            out[(label, sign)] = dict(zip(nus.tolist(), ks.tolist()))
    return out


def _aligned(towers: dict):
    """Common nu axis plus per-tower k arrays aligned on it (NaN = absent)."""
    all_nus = sorted(set().union(*(d.keys() for d in towers.values())))
    nu_arr = np.asarray(all_nus, dtype=int)
    k_arrs = {
        key: np.asarray([d.get(nu, math.nan) for nu in all_nus], dtype=float)
        for key, d in towers.items()
    }
    return nu_arr, k_arrs


def _channel_rows(scenario: TransitionScenario, channel: str, u_bound_sub):
    """Aligned coefficient arrays for one parity channel."""
    L = scenario.L
    p_sub, p_super = scenario.params_sub, scenario.params_super
    towers = _channel_towers(scenario, channel)
    nu_arr, k_arrs = _aligned(towers)
    n = len(nu_arr)
    cols = {name: np.full(n, math.nan, dtype=complex) for name in "ABFGLM"}

    def build(params, sign, k):
        return _mode(params, sign, channel, k, L)

    def row(i):
        nu = int(nu_arr[i])
        k_fp = towers[("super", +1)].get(nu)
        k_fm = towers[("super", -1)].get(nu)
        k_ip = towers[("sub", +1)].get(nu)
        k_im = towers[("sub", -1)].get(nu)
        u_ip = build(p_sub, +1, k_ip) if k_ip is not None else None
        u_im = build(p_sub, -1, k_im) if k_im is not None else None
        vals = {}
        if k_fp is not None:
            u_fp = build(p_super, +1, k_fp)
            if u_ip is not None:
                vals["A"] = overlap(u_fp, u_ip)
            if u_im is not None:
                vals["B"] = overlap(u_fp, u_im)
            if u_bound_sub is not None:
                vals["F"] = overlap(u_fp, u_bound_sub)
        if k_fm is not None:
            u_fm = build(p_super, -1, k_fm)
            if u_ip is not None:
                vals["G"] = overlap(u_fm, u_ip)
            if u_im is not None:
                vals["L"] = overlap(u_fm, u_im)
            if u_bound_sub is not None:
                vals["M"] = overlap(u_fm, u_bound_sub)
        return i, vals

    workers = _n_workers()
    if workers > 1 and n > 64:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(row, range(n)))
    else:
        results = [row(i) for i in range(n)]
    for i, vals in results:
        for name, v in vals.items():
            cols[name][i] = v

    return nu_arr, k_arrs, cols


def _spot_check_quadrature(scenario, nu_arr, towers_k, cols, channel, u_bound_sub):
    """Recompute a few closed-form overlaps by quadrature; mismatch is fatal."""
    defined = [i for i in range(len(nu_arr)) if not math.isnan(cols["M"][i].real)]
    if not defined or u_bound_sub is None:
        return
    picks = {defined[0], defined[len(defined) // 2], defined[-1]}
    for i in picks:
        k = towers_k[("super", -1)][i]
        u_fm = _mode(scenario.params_super, -1, channel, k, scenario.L)
        direct = overlap_quad(u_fm, u_bound_sub)
        if abs(direct - cols["M"][i]) > _QUAD_TOL:
            raise DiracWellError(
                f"closed-form overlap disagrees with quadrature at nu={nu_arr[i]}: "
                f"{cols['M'][i]} vs {direct}"
            )


def overlap_coefficients(scenario: TransitionScenario) -> OverlapCoefficients:
    """Expand the V_sub eigenbasis in the V_super eigenbasis, row by row.

    Rows are aligned by box index nu (the adiabatic partner pairing).  The
    even channel carries the transition physics; the odd channel rides along
    and is reported for completeness checks.  A bound tail leaking more than
    1e-6 of its norm outside the box raises, as does any closed-form overlap
    failing the quadrature spot check.
    """
    ub_even_sub = _box_bound(scenario.params_sub, EVEN, scenario.L)
    ub_odd_sub = _box_bound(scenario.params_sub, ODD, scenario.L)
    ub_odd_super = _box_bound(scenario.params_super, ODD, scenario.L)

    nu_e, k_e, cols_e = _channel_rows(scenario, EVEN, ub_even_sub)
    nu_o, k_o, cols_o = _channel_rows(scenario, ODD, ub_odd_sub)

    _spot_check_quadrature(scenario, nu_e, k_e, cols_e, EVEN, ub_even_sub)

    return OverlapCoefficients(
        scenario=scenario,
        nu=nu_e,
        k_sub_plus=k_e[("sub", +1)],
        k_sub_minus=k_e[("sub", -1)],
        k_super_plus=k_e[("super", +1)],
        k_super_minus=k_e[("super", -1)],
        A=cols_e["A"],
        B=cols_e["B"],
        F=cols_e["F"],
        G=cols_e["G"],
        L=cols_e["L"],
        M=cols_e["M"],
        nu_odd=nu_o,
        k_sub_plus_odd=k_o[("sub", +1)],
        k_sub_minus_odd=k_o[("sub", -1)],
        k_super_plus_odd=k_o[("super", +1)],
        k_super_minus_odd=k_o[("super", -1)],
        A_odd=cols_o["A"],
        B_odd=cols_o["B"],
        F_odd=cols_o["F"],
        G_odd=cols_o["G"],
        L_odd=cols_o["L"],
        M_odd=cols_o["M"],
        bound_overlap_odd=complex(overlap(ub_odd_super, ub_odd_sub)),
        bound_energy_sub=ub_even_sub.energy,
        odd_bound_energy_sub=ub_odd_sub.energy,
        odd_bound_energy_super=ub_odd_super.energy,
    )


def row_completeness(
    scenario: TransitionScenario,
    nu: int,
    sign: int = -1,
    channel: str = EVEN,
    start_window: int = 48,
    tol: float = 1e-6,
) -> float:
    """Sum of |<final mode nu | initial mode>|^2 over the initial basis.

    Expands one final mode over initial modes in a nu window around it (plus
    the bound level), doubling the window until the sum stabilizes to tol.
    Equals 1 for a complete expansion; low-k rows converge slowly because the
    switch redistributes weight over many neighbours there.
    """
    L = scenario.L
    towers = _channel_towers(scenario, channel)
    k_final = towers[(("super", sign))].get(nu)
    if k_final is None:
        raise DiracWellError(f"final tower has no mode nu={nu}")
    u_fin = _mode(scenario.params_super, sign, channel, k_final, L)
    total_bound = 0.0
    if channel == EVEN:
        ub = _box_bound(scenario.params_sub, EVEN, L)
        total_bound = abs(overlap(u_fin, ub)) ** 2
    else:
        ub = _box_bound(scenario.params_sub, ODD, L)
        total_bound = abs(overlap(u_fin, ub)) ** 2

    def windowed(half):
        s = total_bound
        for isign in (+1, -1):
            d = towers[("sub", isign)]
            for nu_i in range(nu - half, nu + half + 1):
                k_i = d.get(nu_i)
                if k_i is None:
                    continue
                u_i = _mode(scenario.params_sub, isign, channel, k_i, L)
                s += abs(overlap(u_fin, u_i)) ** 2
        return s

    half = start_window
    prev = windowed(half)
    while half < 4096:
        half *= 2
        cur = windowed(half)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    return prev


# ----------------------------------------------------------------------------
# Emission spectrum and charge bookkeeping
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class EmissionSpectrum:
    """Occupation of final negative-energy modes after the switch."""

    k: np.ndarray  # final-basis negative-branch even modes
    dos: np.ndarray  # density of states (L + dDelta/dk)/pi at each mode
    N_k: np.ndarray  # emission probability per mode
    total: float
    peak_k: Optional[float]
    k_resonance: float
    initial_occupation: str

    @property
    def dN_dk(self) -> np.ndarray:
        """Continuum-density form of the spectrum."""
        return self.N_k * self.dos


def emission_spectrum(coeffs: OverlapCoefficients, scenario: TransitionScenario) -> EmissionSpectrum:
    """Per-mode emission probabilities from the Bogoliubov M column.

    Vacant initial level: N_k = |M_k|^2 (the vacancy spreads over the final
    sea; observed as positrons).  Filled initial level: identically zero.
    """
    mask = ~np.isnan(coeffs.k_super_minus)
    ks = coeffs.k_super_minus[mask]
    p_super = scenario.params_super
    dos = np.array(
        [
            (scenario.L + channel_phase_derivative(k, -1, EVEN, p_super)) / _PI
            for k in ks
        ]
    )
    if scenario.initial_occupation == "vacant":
        M = coeffs.M[mask]
        N = np.where(np.isnan(M.real), 0.0, np.abs(M) ** 2)
    else:
        N = np.zeros_like(ks)
    total = float(N.sum())
    peak_k = float(ks[int(np.argmax(N))]) if total > 0.0 else None
    return EmissionSpectrum(
        k=ks,
        dos=dos,
        N_k=N,
        total=total,
        peak_k=peak_k,
        k_resonance=scenario.resonance_momentum,
        initial_occupation=scenario.initial_occupation,
    )


@dataclass(frozen=True)
class ChargeLedger:
    """Charge bookkeeping across the switch, in background-subtracted form.

    The reference at each depth is the filled sea (levels with E < 0
    occupied), whose subtracted charge Q0_subtracted is the same on both
    sides of the transition.  Deviations of the actual state from the
    reference are listed explicitly; stage totals must agree.
    """

    Q0_before: float
    Q0_after: float
    Q0_subtracted_before: float
    Q0_subtracted_after: float
    N_plus_before: int
    N_minus_before: int
    N_plus_after: int
    N_minus_after: int
    occupation_charge: float  # vacancy of the even level relative to the reference
    emitted_charge: float  # sum of final-sea hole occupations
    total_before: float
    total_after: float

    @property
    def drift(self) -> float:
        return abs(self.total_after - self.total_before)

    def stages(self) -> dict:
        return {"before": self.total_before, "after": self.total_after}


def charge_ledger(scenario: TransitionScenario, spectrum: EmissionSpectrum) -> ChargeLedger:
    """Conservation audit of the switch.

    Before: subtracted vacuum charge at V_sub, plus +1 if the (sea-side) even
    level is vacant.  After: subtracted vacuum charge at V_super, plus the
    emitted hole charge.  The two totals agree up to the finite-box leakage
    of the emission sum rule.
    """
    r_sub = vacuum_charge(scenario.params_sub)
    r_super = vacuum_charge(scenario.params_super)
    ref_filled = None
    occ = 0.0
    even_levels = [s for s in bound_states(scenario.params_sub) if s.parity == EVEN]
    if even_levels:
        ref_filled = even_levels[0].energy < 0.0
        actually_filled = scenario.initial_occupation == "filled"
        # charge of an electron is -1; deviation from the reference occupation
        occ = (-1.0 if actually_filled else 0.0) - (-1.0 if ref_filled else 0.0)
    emitted = spectrum.total if scenario.initial_occupation == "vacant" else 0.0
    return ChargeLedger(
        Q0_before=r_sub.Q0,
        Q0_after=r_super.Q0,
        Q0_subtracted_before=r_sub.Q0_subtracted,
        Q0_subtracted_after=r_super.Q0_subtracted,
        N_plus_before=r_sub.N_plus,
        N_minus_before=r_sub.N_minus,
        N_plus_after=r_super.N_plus,
        N_minus_after=r_super.N_minus,
        occupation_charge=occ,
        emitted_charge=emitted,
        total_before=r_sub.Q0_subtracted + occ,
        total_after=r_super.Q0_subtracted + emitted,
    )


def escape_time_guard(scenario: TransitionScenario) -> float:
    """Dwell time of the emitted positron at the V_super resonance.

    Returns the stationary-phase delay at the N=1 resonance of the final
    well.  If it is not small against the box traversal time L/v0, a single
    snapshot box diagonalization cannot separate the emitted wave from the
    well region, and a warning is issued.
    """
    td = time_delay(scenario.params_super, 1)
    traversal = scenario.L / td.v0
    if td.delta_t > 0.1 * traversal:
        warnings.warn(
            f"resonance dwell time {td.delta_t:.3g} is not small against the "
            f"box traversal {traversal:.3g}; enlarge L",
            stacklevel=2,
        )
    return td.delta_t
