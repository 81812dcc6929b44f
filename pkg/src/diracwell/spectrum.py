"""Bound-state spectrum, level continuation, and critical depths.

The bound condition in each parity channel is written in the pole-free form

    even:  sin(ap) sqrt((m+E)(E+V-m)) - cos(ap) sqrt((m-E)(E+V+m)) = 0
    odd:   sin(ap) sqrt((m-E)(E+V+m)) + cos(ap) sqrt((m+E)(E+V-m)) = 0

which is continuous across tan(ap) poles, so roots can be bracketed on the
branch grid ap in (j*pi/2, (j+1)*pi/2) and bisected with guaranteed
convergence.  Even roots live on branches with tan(ap) > 0, odd roots on
branches with tan(ap) < 0, which fixes the per-parity level index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import (
    EVEN,
    ODD,
    PARITIES,
    DiracWellError,
    THRESHOLD_BAND,
    WellParams,
    bound_matching_residual,
)

__all__ = [
    "BoundState",
    "CriticalDepth",
    "CriticalityReport",
    "LevelCurve",
    "LevelLostError",
    "bound_states",
    "critical_potentials",
    "level_curve",
]

# scan/bisection controls
_EDGE = 1e-13          # relative margin keeping the scan off the exact band edges
_XTOL = 1e-13          # bisection interval tolerance, relative to m
_DEDUP = 1e-8          # minimum relative gap between distinct roots
_SUBSAMPLES = 8        # sign-scan points per branch interval


class LevelLostError(DiracWellError):
    """The tracked level does not exist at the requested depth."""

    def __init__(self, parity, index, V):
        super().__init__(
            f"{parity} level {index} is not bound at V={V} "
            "(not yet appeared, or already merged with the lower continuum)"
        )
        self.parity = parity
        self.index = index
        self.V = V


@dataclass(frozen=True)
class BoundState:
    """One bound level: energy in (-m, m), parity channel, per-parity index.

    threshold marks states within 1e-9*m of |E|=m, whose wavefunction
    normalization is skipped by the core module.  residual is the relative
    matching residual of the returned root.
    """

    energy: float
    parity: str
    index: int
    V: float
    threshold: bool = False
    residual: float = 0.0


@dataclass(frozen=True)
class CriticalDepth:
    """A depth where a level's energy hits +m, -m, or 0."""

    V: float
    parity: str
    order: int
    kind: str  # 'appearance' | 'disappearance' | 'zero_crossing'


@dataclass(frozen=True)
class CriticalityReport:
    m: float
    a: float
    V_1c: float
    V_odd1: float
    V_even2: float
    V_2c: float
    appearances: tuple
    disappearances: tuple
    zero_crossings: tuple
    v_scope: float

    def all_depths(self) -> list:
        out = list(self.appearances) + list(self.disappearances) + list(self.zero_crossings)
        return sorted(out, key=lambda d: d.V)


def _interior_momentum(E: float, params: WellParams) -> float:
    w = (E + params.V - params.m) * (E + params.V + params.m)
    return math.sqrt(max(w, 0.0))


def _residual_scale(params: WellParams) -> float:
    m, V = params.m, params.V
    return math.sqrt(2.0 * m * (V + 2.0 * m)) + 1e-300


def _branch_grid(params: WellParams):
    """Energies of the branch knots ap = j*pi/2 inside the bound window."""
    m, a, V = params.m, params.a, params.V
    lo = max(-m, m - V)
    hi = m
    knots = []
    j = 1
    while True:
        p = j * math.pi / (2.0 * a)
        E = math.sqrt(p * p + m * m) - V
        if E >= hi:
            break
        if E > lo:
            knots.append(E)
        j += 1
    return lo, hi, knots


def _bisect(f, lo, hi, flo, fhi, xtol):
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid, fm
        if (flo < 0) != (fm < 0):
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi), f(0.5 * (lo + hi))


def _polish(f, x, lo, hi, fx):
    # two secant steps, clamped to the bisection bracket
    h = max(1e-9 * (hi - lo), 1e-15)
    for _ in range(2):
        f1 = f(x + h)
        slope = (f1 - fx) / h
        if slope == 0.0:
            break
        step = -fx / slope
        x_new = min(max(x + step, lo), hi)
        if x_new == x:
            break
        x, fx = x_new, f(x_new)
        if fx == 0.0:
            break
    return x, fx


def _index_from_ap(ap: float, parity: str) -> int:
    # even roots sit in (j*pi, j*pi + pi/2) -> index j+1;
    # odd roots sit in (j*pi - pi/2, j*pi) -> index j
    if parity == EVEN:
        return int(math.floor(ap / math.pi)) + 1
    return int(round(ap / math.pi))


def _channel_roots(parity: str, params: WellParams) -> list:
    m = params.m
    lo, hi, knots = _branch_grid(params)
    edge = _EDGE * m
    pts = [lo + edge] + knots + [hi - edge]
    f = lambda E: bound_matching_residual(E, parity, params)

    roots = []
    for x0, x1 in zip(pts, pts[1:]):
        if x1 <= x0:
            continue
        xs = [x0 + (x1 - x0) * i / _SUBSAMPLES for i in range(_SUBSAMPLES + 1)]
        fs = [f(x) for x in xs]
        for xa, xb, fa, fb in zip(xs, xs[1:], fs, fs[1:]):
            if fa == 0.0:
                roots.append((xa, fa))
                continue
            if (fa < 0) != (fb < 0):
                r, fr = _bisect(f, xa, xb, fa, fb, _XTOL * m)
                r, fr = _polish(f, r, xa, xb, fr)
                roots.append((r, fr))
    # drop duplicates from roots landing on shared interval edges
    roots.sort()
    cleaned = []
    for r, fr in roots:
        if cleaned and abs(r - cleaned[-1][0]) < _DEDUP * m:
            continue
        cleaned.append((r, fr))

    scale = _residual_scale(params)
    out = []
    for E, fE in cleaned:
        ap = params.a * _interior_momentum(E, params)
        out.append(
            BoundState(
                energy=E,
                parity=parity,
                index=_index_from_ap(ap, parity),
                V=params.V,
                threshold=(m - abs(E)) <= THRESHOLD_BAND * m,
                residual=abs(fE) / scale,
            )
        )
    return out


def bound_states(params: WellParams) -> list:
    """All bound levels at this depth, sorted by energy descending.

    Empty only for V=0.  Each root is bisected to ~1e-13*m and secant-polished;
    the relative matching residual is recorded on the state.
    """
    if params.V == 0.0:
        return []
    states = _channel_roots(EVEN, params) + _channel_roots(ODD, params)
    states.sort(key=lambda s: -s.energy)
    return states


def _count(params: WellParams, parity: str) -> int:
    return len(_channel_roots(parity, params))


# ----------------------------------------------------------------------------
# Critical depths
# ----------------------------------------------------------------------------


def _appearance_depth(j: int, m: float, a: float) -> float:
    """Depth at which branch j's level sits exactly at E=+m (ap = j*pi/2)."""
    pj = j * math.pi / (2.0 * a)
    return math.sqrt(pj * pj + m * m) - m


def _disappearance_depth(j: int, m: float, a: float) -> float:
    """Depth at which branch j's level reaches E=-m."""
    pj = j * math.pi / (2.0 * a)
    return math.sqrt(pj * pj + m * m) + m


def _zero_crossing_residual(V: float, parity: str, m: float, a: float) -> float:
    return bound_matching_residual(0.0, parity, WellParams(m=m, a=a, V=V))


def _zero_crossings_upto(v_scope: float, m: float, a: float) -> list:
    """Depths V in (m, v_scope] where a level sits exactly at E=0.

    Bracketed on the branch grid a*sqrt(V^2-m^2) = j*pi/2 and bisected in V.
    """
    if v_scope <= m:
        return []
    knots = []
    j = 1
    while True:
        pj = j * math.pi / (2.0 * a)
        Vj = math.sqrt(pj * pj + m * m)
        if Vj >= v_scope:
            break
        knots.append(Vj)
        j += 1
    pts = [m * (1.0 + 1e-12)] + knots + [v_scope]

    found = []
    for parity in PARITIES:
        f = lambda V: _zero_crossing_residual(V, parity, m, a)
        for x0, x1 in zip(pts, pts[1:]):
            if x1 <= x0:
                continue
            xs = [x0 + (x1 - x0) * i / _SUBSAMPLES for i in range(_SUBSAMPLES + 1)]
            fs = [f(x) for x in xs]
            for xa, xb, fa, fb in zip(xs, xs[1:], fs, fs[1:]):
                if fa == 0.0 or (fa < 0) != (fb < 0):
                    r, fr = _bisect(f, xa, xb, fa, fb, 1e-12 * m)
                    r, fr = _polish(f, r, xa, xb, fr)
                    ap = a * math.sqrt(r * r - m * m)
                    found.append(
                        CriticalDepth(
                            V=r,
                            parity=parity,
                            order=_index_from_ap(ap, parity),
                            kind="zero_crossing",
                        )
                    )
    found.sort(key=lambda d: d.V)
    deduped = []
    for d in found:
        if deduped and abs(d.V - deduped[-1].V) < 1e-10 * m and d.parity == deduped[-1].parity:
            continue
        deduped.append(d)
    return deduped


def critical_potentials(params: WellParams) -> CriticalityReport:
    """Closed-form appearance/disappearance depths and root-found zero crossings.

    Appearances (level at E=+m) happen at V = sqrt((j*pi/2a)^2 + m^2) - m with
    even parity for even j (j=0 is the weak-well state appearing at V=0+);
    disappearances (level at E=-m) at V = sqrt((j*pi/2a)^2 + m^2) + m with even
    parity for odd j.  The report covers depths up to V_2c (the first odd
    disappearance).
    """
    m, a = params.m, params.a
    V_1c = _disappearance_depth(1, m, a)
    V_odd1 = _appearance_depth(1, m, a)
    V_even2 = _appearance_depth(2, m, a)
    V_2c = _disappearance_depth(2, m, a)
    v_scope = V_2c

    appearances = []
    j = 0
    while True:
        V = _appearance_depth(j, m, a)
        if V > v_scope:
            break
        parity = EVEN if j % 2 == 0 else ODD
        order = j // 2 + 1 if parity == EVEN else (j + 1) // 2
        appearances.append(CriticalDepth(V=V, parity=parity, order=order, kind="appearance"))
        j += 1

    disappearances = []
    j = 1
    while True:
        V = _disappearance_depth(j, m, a)
        if V > v_scope:
            break
        parity = EVEN if j % 2 == 1 else ODD
        order = (j + 1) // 2 if parity == EVEN else j // 2
        disappearances.append(
            CriticalDepth(V=V, parity=parity, order=order, kind="disappearance")
        )
        j += 1

    return CriticalityReport(
        m=m,
        a=a,
        V_1c=V_1c,
        V_odd1=V_odd1,
        V_even2=V_even2,
        V_2c=V_2c,
        appearances=tuple(appearances),
        disappearances=tuple(disappearances),
        zero_crossings=tuple(_zero_crossings_upto(v_scope, m, a)),
        v_scope=v_scope,
    )


# ----------------------------------------------------------------------------
# Level continuation
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelCurve:
    """E(V) samples for one tracked level; iterates as (V, E) pairs."""

    parity: str
    index: int
    samples: tuple
    monotone_decreasing: bool

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, i):
        return self.samples[i]


def _ap_window(parity: str, index: int):
    if parity == EVEN:
        lo = (index - 1) * math.pi
        return lo, lo + 0.5 * math.pi
    hi = index * math.pi
    return hi - 0.5 * math.pi, hi


def _solve_level(params: WellParams, parity: str, index: int) -> float:
    """Root of the bound condition inside this level's ap window, or raise."""
    m, a, V = params.m, params.a, params.V
    ap_lo, ap_hi = _ap_window(parity, index)
    E_window_lo = math.sqrt((ap_lo / a) ** 2 + m * m) - V
    E_window_hi = math.sqrt((ap_hi / a) ** 2 + m * m) - V
    lo = max(E_window_lo, max(-m, m - V)) + _EDGE * m
    hi = min(E_window_hi, m) - _EDGE * m
    if hi <= lo:
        raise LevelLostError(parity, index, V)
    f = lambda E: bound_matching_residual(E, parity, params)
    xs = [lo + (hi - lo) * i / 4 for i in range(5)]
    fs = [f(x) for x in xs]
    for xa, xb, fa, fb in zip(xs, xs[1:], fs, fs[1:]):
        if fa == 0.0:
            return xa
        if (fa < 0) != (fb < 0):
            r, fr = _bisect(f, xa, xb, fa, fb, _XTOL * m)
            r, _ = _polish(f, r, xa, xb, fr)
            return r
    raise LevelLostError(parity, index, V)


def level_curve(
    params_base: WellParams, parity: str, index: int, V_grid: Sequence[float]
) -> LevelCurve:
    """Track one level's energy over an increasing depth grid.

    Raises LevelLostError at the first grid depth where the level is absent
    (before its appearance, or after it merges with the lower continuum).
    """
    if parity not in PARITIES:
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if index < 1:
        raise ValueError(f"level index is 1-based, got {index}")
    V_list = list(V_grid)
    if not V_list:
        raise ValueError("V_grid is empty")
    if any(b <= a_ for a_, b in zip(V_list, V_list[1:])):
        raise ValueError("V_grid must be strictly increasing")

    samples = []
    for V in V_list:
        p = WellParams(m=params_base.m, a=params_base.a, V=V)
        samples.append((V, _solve_level(p, parity, index)))
    energies = [E for _, E in samples]
    monotone = all(e1 <= e0 + 1e-12 for e0, e1 in zip(energies, energies[1:]))
    return LevelCurve(
        parity=parity, index=index, samples=tuple(samples), monotone_decreasing=monotone
    )
