"""Phase shifts with convention-anchored unwrapping, resonances, time delay.

The physical branch is fixed at high energy, where the phase of either parity
channel tends to +Va on the positive branch and -Va on the negative one
(total +/-2Va).  Values at lower energies follow by continuation: adaptive
steps downward in k, each pinned to the nearest branch of the closed-form
mod-pi phase, with midpoint verification and step halving whenever the
unwrapped value moves too fast.  Threshold values are Richardson-extrapolated
in k from three pinned points near the band edge; this keeps them accurate to
~1e-11 despite the square-root kinematics.

Everything downstream (Levinson counting, vacuum charge, box quantization,
emission grids) consumes these unwrapped branches, so the anchoring
convention lives here and only here.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    EVEN,
    ODD,
    DiracWellError,
    WellParams,
    channel_phase_mod_pi,
    travelling_wave,
)

__all__ = [
    "AmbiguousThresholdError",
    "PhaseShiftCurve",
    "Resonance",
    "TimeDelayReport",
    "channel_integers",
    "phase_shift",
    "phase_shift_curve",
    "threshold_integers",
    "threshold_phase",
    "time_delay",
    "transmission_resonances",
]

_PI = math.pi

# continuation controls
_ANCHOR_EPS_FACTOR = 1e8     # anchor energy in units of m
_T_FLOOR_FACTOR = 1e-16      # lowest eps-m (units of m) tabulated
_RICHARDSON_T = 1e-10        # starting eps-m offset (units of m) at thresholds
_MAX_JUMP = _PI / 3.0        # largest accepted per-step phase change


class AmbiguousThresholdError(DiracWellError):
    """The depth sits exactly at a spectral transition; integers undefined."""

    def __init__(self, V, kind, depth):
        super().__init__(
            f"V={V} is within the guard band of the {kind} depth {depth}; "
            "the threshold phase takes its half-step value there and counts "
            "are ambiguous — offset V and retry"
        )
        self.V = V
        self.kind = kind
        self.depth = depth


def _t_of_k(k: float, m: float) -> float:
    """eps - m computed from k without cancellation."""
    return k * k / (m + math.hypot(k, m))


def _k_of_t(t: float, m: float) -> float:
    return math.sqrt(t * (2.0 * m + t))


class _PhaseBranch:
    """Unwrapped channel phase Delta(k) for one (params, sign, channel)."""

    def __init__(self, params: WellParams, sign: int, channel: str):
        self.params = params
        self.sign = sign
        self.channel = channel
        self.m = params.m
        self.a = params.a
        self._build()
        self._threshold = self._richardson_threshold()

    # -- closed-form pieces ---------------------------------------------------

    def _mod_total(self, k: float) -> float:
        """(k a + Delta) reduced to (-pi/2, pi/2]."""
        theta, _ = channel_phase_mod_pi(_t_of_k(k, self.m), self.sign, self.channel, self.params)
        return theta

    def _asymptotic(self, k: float) -> float:
        """High-energy form Delta ~ a*(p - k), evaluated without cancellation."""
        m, V, a = self.m, self.params.V, self.a
        E = self.sign * math.hypot(k, m)
        p = math.sqrt((E + V - m) * (E + V + m))
        return a * (V * V + 2.0 * E * V) / (p + k)

    def _pin(self, k: float, guess: float) -> float:
        """Branch value at k nearest to guess."""
        rep = self._mod_total(k) - k * self.a
        return rep + _PI * round((guess - rep) / _PI)

    # -- table construction ---------------------------------------------------

    def _build(self):
        m, V, a = self.m, self.params.V, self.a
        k_hi = _ANCHOR_EPS_FACTOR * m
        k_floor = _k_of_t(_T_FLOOR_FACTOR * m, m)
        # below k_turn the asymptotic form is no longer trusted for pinning
        k_turn = max(6.0 * m, 6.0 * m * math.sqrt(a * V / m + 1.0), 1.5 * (V + 2.0 * m))

        ks = [k_hi]
        ds = [self._pin(k_hi, self._asymptotic(k_hi))]
        k = k_hi
        while k > k_turn * 2.0:
            k = max(k / 3.0, k_turn * 2.0)
            ks.append(k)
            ds.append(self._pin(k, self._asymptotic(k)))

        h = k_turn / 64.0
        while k > k_floor:
            h = min(h, 0.35 * k)
            k_next = k - h
            if k_next < k_floor:
                k_next = k_floor
            slope_guess = 0.0
            if len(ks) >= 2:
                dk = ks[-1] - ks[-2]
                if abs(dk) > 0:
                    slope_guess = (ds[-1] - ds[-2]) / dk
            guess = ds[-1] + slope_guess * (k_next - ks[-1])
            d_next = self._pin(k_next, guess)
            if abs(d_next - ds[-1]) > _MAX_JUMP:
                h *= 0.5
                if h < 1e-14 * max(k, m):
                    raise DiracWellError(
                        f"phase continuation stalled at k={k} "
                        f"({self.channel}, sign {self.sign:+d}, V={V})"
                    )
                continue
            k_mid = 0.5 * (k + k_next)
            d_mid = self._pin(k_mid, 0.5 * (ds[-1] + d_next))
            if abs(d_mid - 0.5 * (ds[-1] + d_next)) > _MAX_JUMP:
                h *= 0.5
                continue
            ks.extend((k_mid, k_next))
            ds.extend((d_mid, d_next))
            k = k_next
            if abs(d_next - ds[-3]) < _PI / 12.0:
                h *= 1.4
        order = np.argsort(ks)
        self._ks = np.asarray(ks, dtype=float)[order]
        self._ds = np.asarray(ds, dtype=float)[order]

    def _richardson_threshold(self) -> float:
        """k -> 0 limit, extrapolated and self-checked.

        The phase is delta(0) + c1*k + c3*k^3 + ... near a band edge, so three
        nodes (k0/4, k0/2, k0) kill the linear term and leave O(c3*k0^3).
        Close to a spectral transition c3 grows like the inverse cube of the
        distance to the critical depth, so the offset is shrunk (x1/16 in
        eps-m, x1/4 in k) until two successive extrapolations agree; each
        shrink divides the residual by 64.
        """

        def three_node(t):
            k0 = _k_of_t(t, self.m)
            f1 = self.delta(k0 / 4.0)
            f2 = self.delta(k0 / 2.0)
            f3 = self.delta(k0)
            return (8.0 * f1 - 6.0 * f2 + f3) / 3.0

        t = _RICHARDSON_T * self.m
        prev = three_node(t)
        for _ in range(4):
            t /= 16.0
            cur = three_node(t)
            if abs(cur - prev) < 6e-10:
                return cur
            prev = cur
        return prev

    # -- queries ---------------------------------------------------------------

    def delta(self, k: float) -> float:
        """Unwrapped phase at exterior wavevector k > 0."""
        if k <= 0.0:
            raise DiracWellError(f"phase defined for k > 0, got k={k}")
        ks, ds = self._ks, self._ds
        if k >= ks[-1]:
            return self._pin(k, self._asymptotic(k))
        if k <= ks[0]:
            guess = getattr(self, "_threshold", None)
            if guess is None:  # during construction of the threshold itself
                guess = ds[0]
            return self._pin(k, guess)
        j = int(np.searchsorted(ks, k))
        w = (k - ks[j - 1]) / (ks[j] - ks[j - 1])
        guess = ds[j - 1] * (1.0 - w) + ds[j] * w
        return self._pin(k, guess)

    def threshold(self) -> float:
        return self._threshold

    def d_delta_dk(self, k: float) -> float:
        """Five-point finite-difference derivative of the unwrapped phase."""
        h = max(1e-5 * k, 1e-9 * self.m)
        d = self.delta
        return (8.0 * (d(k + h) - d(k - h)) - (d(k + 2 * h) - d(k - 2 * h))) / (12.0 * h)


_BRANCH_CACHE: "OrderedDict[tuple, _PhaseBranch]" = OrderedDict()
_CACHE_CAP = 256


def _branch(params: WellParams, sign: int, channel: str) -> _PhaseBranch:
    key = (params.m, params.a, params.V, sign, channel)
    br = _BRANCH_CACHE.get(key)
    if br is None:
        br = _PhaseBranch(params, sign, channel)
        _BRANCH_CACHE[key] = br
        while len(_BRANCH_CACHE) > _CACHE_CAP:
            _BRANCH_CACHE.popitem(last=False)
    else:
        _BRANCH_CACHE.move_to_end(key)
    return br


def channel_phase(k: float, sign: int, channel: str, params: WellParams) -> float:
    """Unwrapped parity-channel phase at exterior wavevector k."""
    if params.V == 0.0:
        return 0.0
    return _branch(params, sign, channel).delta(k)


def channel_phase_derivative(k: float, sign: int, channel: str, params: WellParams) -> float:
    if params.V == 0.0:
        return 0.0
    return _branch(params, sign, channel).d_delta_dk(k)


def phase_shift(E: float, params: WellParams) -> float:
    """Total unwrapped phase shift (even + odd channel) at energy E, |E| > m.

    Continuous in E on each branch and anchored by the +/-2Va high-energy
    limits; not reduced mod pi.
    """
    m = params.m
    if abs(E) <= m:
        raise DiracWellError(f"scattering phase needs |E| > m, got E={E}")
    if params.V == 0.0:
        return 0.0
    sign = 1 if E > 0 else -1
    k = math.sqrt((abs(E) - m) * (abs(E) + m))
    return channel_phase(k, sign, EVEN, params) + channel_phase(k, sign, ODD, params)


def threshold_phase(params: WellParams, sign: int, channel: str = "total") -> float:
    """Unwrapped phase limit as |E| -> m on the given branch.

    channel is 'even', 'odd', or 'total' (the sum entering Levinson counting
    and the vacuum charge).
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    if params.V == 0.0:
        return 0.0
    # on an exact transition depth the limit is the half-step value and every
    # integer-valued consumer (counts, Q0) becomes convention-dependent
    _transition_guard(params)
    if channel == "total":
        return _branch(params, sign, EVEN).threshold() + _branch(params, sign, ODD).threshold()
    if channel not in (EVEN, ODD):
        raise ValueError(f"channel must be 'even', 'odd' or 'total', got {channel!r}")
    return _branch(params, sign, channel).threshold()


# ----------------------------------------------------------------------------
# Threshold integers
# ----------------------------------------------------------------------------


def _transition_guard(params: WellParams, guard: float = 1e-9):
    """Raise if V sits on an appearance/disappearance depth (ap = j*pi/2)."""
    m, a, V = params.m, params.a, params.V
    ap_up = a * math.sqrt(V * (V + 2.0 * m))
    j = round(2.0 * ap_up / _PI)
    if abs(ap_up - j * _PI / 2.0) < guard:
        pj = j * _PI / (2.0 * a)
        depth = math.sqrt(pj * pj + m * m) - m
        raise AmbiguousThresholdError(V, "appearance", depth)
    if V > 2.0 * m:
        ap_dn = a * math.sqrt(V * (V - 2.0 * m))
        j = round(2.0 * ap_dn / _PI)
        if j >= 1 and abs(ap_dn - j * _PI / 2.0) < guard:
            pj = j * _PI / (2.0 * a)
            depth = math.sqrt(pj * pj + m * m) + m
            raise AmbiguousThresholdError(V, "disappearance", depth)


def channel_integers(params: WellParams) -> dict:
    """Per-channel branch integers of the threshold phases.

    Keys 'even_plus', 'odd_plus', 'even_minus', 'odd_minus'.  even_plus +
    even_minus is the even bound count, and likewise for odd (the parity-
    resolved Levinson relations).  Raises AmbiguousThresholdError on exact
    transition depths.
    """
    if params.V == 0.0:
        return {"even_plus": 0, "odd_plus": 0, "even_minus": 0, "odd_minus": 0}
    _transition_guard(params)
    ep = threshold_phase(params, +1, EVEN)
    op_ = threshold_phase(params, +1, ODD)
    em = threshold_phase(params, -1, EVEN)
    om = threshold_phase(params, -1, ODD)
    return {
        "even_plus": int(round((ep - 0.5 * _PI) / _PI)) + 1,
        "odd_plus": int(round(op_ / _PI)),
        "even_minus": int(round(em / _PI)),
        "odd_minus": int(round((om + 0.5 * _PI) / _PI)),
    }


def threshold_integers(params: WellParams) -> tuple:
    """(n, n') from the unwrapped total threshold phases.

    n counts levels that have entered through E=+m (including the weak-well
    even state); n' is minus the number that have left through E=-m, so the
    current bound count is n + n'.  Exact transition depths raise
    AmbiguousThresholdError naming the depth.
    """
    if params.V == 0.0:
        return (0, 0)
    _transition_guard(params)
    d_plus = threshold_phase(params, +1, "total")
    d_minus = threshold_phase(params, -1, "total")
    n = int(round((d_plus - 0.5 * _PI) / _PI)) + 1
    n_prime = int(round((d_minus + 0.5 * _PI) / _PI))
    return (n, n_prime)


# ----------------------------------------------------------------------------
# Curve export
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseShiftCurve:
    """Unwrapped total phase shifts on both branches over a log energy grid."""

    params: WellParams
    samples: tuple  # of (eps, delta_plus, delta_minus)
    threshold_plus: float
    threshold_minus: float
    n: Optional[int]
    n_prime: Optional[int]
    asymptote_plus: float
    asymptote_minus: float

    @property
    def eps(self):
        return tuple(s[0] for s in self.samples)

    @property
    def delta_plus(self):
        return tuple(s[1] for s in self.samples)

    @property
    def delta_minus(self):
        return tuple(s[2] for s in self.samples)


def phase_shift_curve(
    params: WellParams,
    *,
    eps_max: Optional[float] = None,
    n_points: int = 400,
) -> PhaseShiftCurve:
    """Both unwrapped branches sampled log-uniformly in eps-m.

    The grid is densified (midpoint insertion) until adjacent unwrapped values
    differ by less than pi/2 on both branches.
    """
    m = params.m
    if eps_max is None:
        eps_max = 100.0 * m
    if eps_max <= m:
        raise ValueError("eps_max must exceed m")
    t_lo, t_hi = 1e-8 * m, eps_max - m
    ts = list(np.geomspace(t_lo, t_hi, n_points))

    def both(t):
        if params.V == 0.0:
            return (0.0, 0.0)
        k = _k_of_t(t, m)
        dp = channel_phase(k, +1, EVEN, params) + channel_phase(k, +1, ODD, params)
        dm = channel_phase(k, -1, EVEN, params) + channel_phase(k, -1, ODD, params)
        return (dp, dm)

    vals = [both(t) for t in ts]
    for _ in range(6):
        inserts = []
        for i in range(len(ts) - 1):
            if (
                abs(vals[i + 1][0] - vals[i][0]) >= 0.5 * _PI
                or abs(vals[i + 1][1] - vals[i][1]) >= 0.5 * _PI
            ):
                inserts.append(i)
        if not inserts or len(ts) > 6000:
            break
        for off, i in enumerate(inserts):
            t_new = math.sqrt(ts[i + off] * ts[i + off + 1])
            ts.insert(i + off + 1, t_new)
            vals.insert(i + off + 1, both(t_new))

    try:
        n, n_prime = threshold_integers(params)
    except AmbiguousThresholdError:
        n, n_prime = None, None

    eps_anchor = 1e6 * m
    k_anchor = math.sqrt(eps_anchor**2 - m * m)
    if params.V == 0.0:
        asym_p = asym_m = 0.0
        thr_p = thr_m = 0.0
    else:
        asym_p = channel_phase(k_anchor, +1, EVEN, params) + channel_phase(
            k_anchor, +1, ODD, params
        )
        asym_m = channel_phase(k_anchor, -1, EVEN, params) + channel_phase(
            k_anchor, -1, ODD, params
        )
        thr_p = threshold_phase(params, +1, "total")
        thr_m = threshold_phase(params, -1, "total")

    samples = tuple((m + t, dp, dm) for t, (dp, dm) in zip(ts, vals))
    return PhaseShiftCurve(
        params=params,
        samples=samples,
        threshold_plus=thr_p,
        threshold_minus=thr_m,
        n=n,
        n_prime=n_prime,
        asymptote_plus=asym_p,
        asymptote_minus=asym_m,
    )


# ----------------------------------------------------------------------------
# Transmission resonances and time delay
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Resonance:
    """Reflectionless energy with interior phase 2pa = N*pi."""

    N: int
    energy: float
    k: float
    reflection: float  # |B| measured from the travelling solution


def transmission_resonances(params: WellParams, E_range: tuple) -> list:
    """All reflectionless energies 2pa = N*pi inside E_range.

    E_range must avoid the gap (-m, m).  Each candidate is verified by
    constructing the travelling solution and measuring |B|.  V=0 returns an
    empty list: everything is reflectionless, so there are no isolated
    resonances.
    """
    m, a, V = params.m, params.a, params.V
    E_lo, E_hi = E_range
    if not E_lo < E_hi:
        raise ValueError(f"empty energy range {E_range}")
    if E_lo < m and E_hi > -m and not (E_hi <= -m or E_lo >= m):
        raise ValueError(f"E_range {E_range} intersects the gap (-{m}, {m})")
    if V == 0.0:
        return []

    def n_window(R_lo, R_hi):
        """Integer N with R_N in [R_lo, R_hi], R_N = hypot(N pi/2a, m)."""
        R_lo = max(R_lo, m)
        if R_hi < R_lo:
            return range(0)
        n_lo = (2.0 * a / _PI) * math.sqrt(max(R_lo * R_lo - m * m, 0.0))
        n_hi = (2.0 * a / _PI) * math.sqrt(R_hi * R_hi - m * m)
        return range(max(1, math.ceil(n_lo - 1e-12)), math.floor(n_hi + 1e-12) + 1)

    out = []
    # upper branch E = -V + R_N and lower branch E = -V - R_N
    for N in n_window(V + E_lo, V + E_hi):
        E = -V + math.hypot(N * _PI / (2.0 * a), m)
        if E_lo <= E <= E_hi and abs(E) > m * (1.0 + 1e-12):
            k = math.sqrt((abs(E) - m) * (abs(E) + m))
            _, coeffs = travelling_wave(k, 1 if E > 0 else -1, params)
            out.append(Resonance(N=N, energy=E, k=k, reflection=abs(coeffs["B"])))
    for N in n_window(-V - E_hi, -V - E_lo):
        E = -V - math.hypot(N * _PI / (2.0 * a), m)
        if E_lo <= E <= E_hi and abs(E) > m * (1.0 + 1e-12):
            k = math.sqrt((abs(E) - m) * (abs(E) + m))
            _, coeffs = travelling_wave(k, 1 if E > 0 else -1, params)
            out.append(Resonance(N=N, energy=E, k=k, reflection=abs(coeffs["B"])))
    out.sort(key=lambda r: r.energy)
    return out


@dataclass(frozen=True)
class TimeDelayReport:
    """Stationary-phase dwell time at the N-th negative-branch resonance."""

    N: int
    energy: float
    k: float
    v0: float
    d_delta_dk: float
    d_delta_dk_fd: float
    closed_form: Optional[float]
    delta_t: float


def resonance_slope(E: float, params: WellParams) -> float:
    """Exact d(delta)/dk at a transmission resonance energy E."""
    m, a, V = params.m, params.a, params.V
    return (
        a * ((E + V) / E) * ((E - m) / (E + V - m) + (E + m) / (E + V + m))
        - 2.0 * a
    )


def time_delay(params: WellParams, N: int = 1) -> TimeDelayReport:
    """Dwell time of a wavepacket at the N-th resonance below the gap.

    The resonance sits at E = -V + sqrt((N pi/2a)^2 + m^2), which lies in the
    lower continuum exactly when V exceeds the N-th disappearance depth; a
    missing resonance raises an error naming that depth.  The exact slope
    formula is cross-checked against a finite difference of the unwrapped
    phase; for N=1 the limiting closed form 2am/(sqrt(pi^2/4a^2+m^2)-m) is
    attached.
    """
    m, a, V = params.m, params.a, params.V
    if N < 1:
        raise ValueError("resonance index N is 1-based")
    RN = math.hypot(N * _PI / (2.0 * a), m)
    E = -V + RN
    if E >= -m:
        raise DiracWellError(
            f"resonance N={N} has not entered the lower continuum at V={V}; "
            f"it requires V > {RN + m}"
        )
    k = math.sqrt((E - m) * (E + m))
    exact = resonance_slope(E, params)
    fd = channel_phase_derivative(k, -1, EVEN, params) + channel_phase_derivative(
        k, -1, ODD, params
    )
    closed = 2.0 * a * m / (math.hypot(_PI / (2.0 * a), m) - m) if N == 1 else None
    v0 = k / abs(E)
    return TimeDelayReport(
        N=N,
        energy=E,
        k=k,
        v0=v0,
        d_delta_dk=exact,
        d_delta_dk_fd=fd,
        closed_form=closed,
        delta_t=exact / v0,
    )
