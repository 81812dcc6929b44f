"""Kinematics and piecewise-analytic spinor wavefunctions for the 1D Dirac well.

Conventions: hbar = c = 1, gamma^0 = sigma_3, gamma^1 = i*sigma_1, so the free
Hamiltonian is H = -sigma_2 p + sigma_3 m acting on 2-component spinors
(f, g).  The potential is -V on |x| <= a (V >= 0 attracts electrons).  The
component equations in a region of constant potential -U are

    g' = (E + U - m) f,      f' = -(E + U + m) g,

which every wavefunction built here satisfies segment by segment.  Spinors are
stored as sums of complex exponentials per segment, so overlaps and norms have
closed forms (exact up to floating point) and evaluation never touches a grid.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "DiracWellError",
    "MatchingError",
    "WellParams",
    "KinematicContext",
    "Segment",
    "PiecewiseSpinor",
    "kinematics",
    "channel_phase_parts",
    "channel_phase_mod_pi",
    "bound_matching_residual",
    "bound_wavefunction",
    "scattering_wavefunction",
    "travelling_wave",
    "overlap",
    "overlap_quad",
    "norm_squared",
    "parity_reflect",
]

EVEN = "even"
ODD = "odd"
PARITIES = (EVEN, ODD)

# Relative continuity tolerance promised for every constructed spinor.
CONTINUITY_TOL = 1e-10

# States closer to |E| = m than this (times m) are threshold-degenerate:
# their exterior tail decays too slowly to normalize meaningfully.
THRESHOLD_BAND = 1e-9


class DiracWellError(Exception):
    """Base class for all errors raised by this package."""


class MatchingError(DiracWellError):
    """Energy does not solve the wall-matching condition; carries the residual."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (relative matching residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class WellParams:
    """Square-well configuration: mass m, half-width a, depth V (all > 0 scales).

    The potential is -V on x in [-a, a] and 0 outside; V >= 0 means attractive
    for electrons.
    """

    m: float = 1.0
    a: float = 1.0
    V: float = 0.0

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ValueError(f"mass must be positive, got m={self.m}")
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError(f"half-width must be positive, got a={self.a}")
        if not (self.V >= 0 and math.isfinite(self.V)):
            raise ValueError(f"depth must be >= 0, got V={self.V}")


@dataclass(frozen=True)
class KinematicContext:
    """Derived kinematic quantities at energy E; invalid combinations are None.

    k     = sqrt(E^2 - m^2)   exterior wavevector, populated for |E| >= m
    kappa = sqrt(m^2 - E^2)   exterior decay constant, populated for |E| < m
    p     = sqrt((E+V)^2 - m^2) interior wavevector, when (E+V)^2 >= m^2
    q     = sqrt(m^2 - (E+V)^2) interior decay constant otherwise
    gamma = (k/p)(E+V+m)/(E+m)  mixing ratio, when k and p are both real
            and nonzero and E != -m
    """

    E: float
    eps: float
    k: Optional[float]
    kappa: Optional[float]
    p: Optional[float]
    q: Optional[float]
    gamma: Optional[float]

    @property
    def interior_oscillatory(self) -> bool:
        return self.p is not None


def kinematics(E: float, params: WellParams) -> KinematicContext:
    """All derived kinematic quantities at energy E, with validity flags.

    Never raises: invalid combinations (e.g. gamma at a threshold) come back
    as None so that sweeps can skip them gracefully.
    """
    m, V = params.m, params.V
    eps = abs(E)
    if eps >= m:
        k = math.sqrt((eps - m) * (eps + m))
        kappa = None
    else:
        k = None
        kappa = math.sqrt((m - eps) * (m + eps))
    w = (E + V - m) * (E + V + m)
    if w >= 0.0:
        p, q = math.sqrt(w), None
    else:
        p, q = None, math.sqrt(-w)
    gamma = None
    if k is not None and p is not None and p > 0.0 and k > 0.0 and E != -m:
        gamma = (k / p) * (E + V + m) / (E + m)
    return KinematicContext(E=E, eps=eps, k=k, kappa=kappa, p=p, q=q, gamma=gamma)


# ----------------------------------------------------------------------------
# Interior trig factors, analytically continued through p^2 = 0.
#
#   S = sin(pa)/p -> sinh(qa)/q,   C = cos(pa) -> cosh(qa)
#
# Both are entire functions of w = p^2 = (E+V)^2 - m^2, which keeps every
# matching expression finite when the interior turns evanescent.
# ----------------------------------------------------------------------------


def _interior_SC(w: float, a: float) -> tuple[float, float]:
    if w > 0.0:
        p = math.sqrt(w)
        return math.sin(p * a) / p, math.cos(p * a)
    if w < 0.0:
        q = math.sqrt(-w)
        return math.sinh(q * a) / q, math.cosh(q * a)
    return a, 1.0


def _threshold_pieces(t: float, sign: int, params: WellParams):
    """Exact kinematic factors at E = sign*(m+t), computed without cancellation.

    Returns (E, Em, Ep, evm, evp, k) where Em = E-m, Ep = E+m,
    evm = E+V-m, evp = E+V+m and k = sqrt(t(2m+t)).  Parametrizing by the
    distance-to-threshold t keeps k and E-m accurate down to t ~ 1e-15.
    """
    m, V = params.m, params.V
    if t < 0:
        raise ValueError(f"threshold offset must be >= 0, got t={t}")
    k = math.sqrt(t * (2.0 * m + t))
    if sign > 0:
        E = m + t
        return E, t, 2.0 * m + t, V + t, V + 2.0 * m + t, k
    E = -(m + t)
    return E, -(2.0 * m + t), -t, V - 2.0 * m - t, V - t, k


def channel_phase_parts(t: float, sign: int, channel: str, params: WellParams):
    """Numerator/denominator pair (N, D) with tan(k a + Delta_ch) = N/D.

    t is the distance of |E| from threshold (eps = m + t), sign picks the
    energy branch.  The pair is finite for every t >= 0 and every V >= 0,
    including evanescent interiors; the phase itself is recovered as
    atan2(N, D) modulo pi.  Also returns k.
    """
    a = params.a
    E, Em, Ep, evm, evp, k = _threshold_pieces(t, sign, params)
    S, C = _interior_SC(evm * evp, a)
    if channel == EVEN:
        return k * evm * S, Em * C, k
    if channel == ODD:
        return Em * evp * S, k * C, k
    raise ValueError(f"unknown parity channel {channel!r}")


def channel_phase_mod_pi(t: float, sign: int, channel: str, params: WellParams):
    """(k a + Delta_ch) reduced to (-pi/2, pi/2], plus k.  Branch-free."""
    N, D, k = channel_phase_parts(t, sign, channel, params)
    theta = math.atan2(N, D)
    if theta > 0.5 * math.pi:
        theta -= math.pi
    elif theta <= -0.5 * math.pi:
        theta += math.pi
    return theta, k


# ----------------------------------------------------------------------------
# Piecewise-exponential representation
# ----------------------------------------------------------------------------


def _phi(z: complex) -> complex:
    """(exp(z) - 1)/z, stable at z -> 0."""
    if abs(z) < 1e-2:
        # series through z^6; truncation error < 1e-18 at |z| = 1e-2
        return 1.0 + z * (
            0.5 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 + z * (1.0 / 720 + z / 5040))))
        )
    return (cmath.exp(z) - 1.0) / z


def _exp_integral(mu: complex, x0: float, x1: float) -> complex:
    """Integral of exp(mu*x) over [x0, x1]; x0 may be -inf and x1 may be +inf."""
    if x1 == math.inf:
        if mu.real >= 0:
            raise ValueError("divergent tail integral (Re mu >= 0 with x1 = inf)")
        return -cmath.exp(mu * x0) / mu
    if x0 == -math.inf:
        if mu.real <= 0:
            raise ValueError("divergent tail integral (Re mu <= 0 with x0 = -inf)")
        return cmath.exp(mu * x1) / mu
    dx = x1 - x0
    if mu == 0:
        return complex(dx)
    # anchor at the endpoint where the exponential is larger so the phi
    # argument has non-positive real part (no overflow on long panels)
    if (mu * dx).real > 0:
        return cmath.exp(mu * x1) * dx * _phi(-mu * dx)
    return cmath.exp(mu * x0) * dx * _phi(mu * dx)


@dataclass(frozen=True)
class Segment:
    """One analytic segment: spinor = sum of (up, lo) * exp(mu * x) terms."""

    x0: float
    x1: float
    terms: tuple  # of (up: complex, lo: complex, mu: complex)

    def value(self, x: float) -> np.ndarray:
        f = 0j
        g = 0j
        for up, lo, mu in self.terms:
            e = cmath.exp(mu * x)
            f += up * e
            g += lo * e
        return np.array([f, g])


@dataclass(frozen=True)
class PiecewiseSpinor:
    """A three-segment spinor wavefunction (x < -a, |x| <= a, x > a).

    norm_kind is one of 'unit' (bound state, integral over the line = 1),
    'box' (unit norm on [-L, L]), 'continuum' (raw standing/travelling
    amplitude), or 'threshold' (degenerate near-threshold state, left
    unnormalized on purpose).
    """

    segments: tuple
    energy: float
    params: WellParams
    parity: Optional[str] = None
    norm_kind: str = "continuum"
    k: Optional[float] = None
    phase: Optional[float] = None
    coefficients: dict = field(default_factory=dict)

    def __call__(self, x: float) -> np.ndarray:
        for seg in self.segments:
            if seg.x0 <= x <= seg.x1:
                return seg.value(x)
        raise ValueError(f"x={x} outside the spinor's support")

    @property
    def support(self) -> tuple[float, float]:
        return self.segments[0].x0, self.segments[-1].x1

    def breakpoints(self) -> list[float]:
        pts = [self.segments[0].x0]
        pts.extend(seg.x1 for seg in self.segments)
        return pts

    def continuity_residual(self) -> float:
        """Largest relative jump of either component across the wall joints."""
        worst = 0.0
        for left, right in zip(self.segments, self.segments[1:]):
            x = left.x1
            vl = left.value(x)
            vr = right.value(x)
            scale = max(abs(vl[0]), abs(vl[1]), abs(vr[0]), abs(vr[1]), 1e-300)
            worst = max(worst, abs(vl[0] - vr[0]) / scale, abs(vl[1] - vr[1]) / scale)
        return worst


def parity_reflect(u: PiecewiseSpinor, x: float) -> np.ndarray:
    """The parity transform sigma_3 psi(-x) evaluated at x."""
    v = u(-x)
    return np.array([v[0], -v[1]])


def _mirror_terms(terms: Iterable, parity: str) -> tuple:
    """Left-region terms induced by parity from the right region.

    even: psi(-x) = sigma_3 psi(x);  odd: psi(-x) = -sigma_3 psi(x).
    """
    out = []
    for up, lo, mu in terms:
        if parity == EVEN:
            out.append((up, -lo, -mu))
        else:
            out.append((-up, lo, -mu))
    return tuple(out)


def _trig_pair(amp_up: float, amp_lo: float, wavenum: float, phase: float = 0.0):
    """Terms for (amp_up * cos(wavenum*x + phase), amp_lo * sin(wavenum*x + phase))."""
    eip = cmath.exp(1j * phase)
    eim = cmath.exp(-1j * phase)
    return (
        (0.5 * amp_up * eip, -0.5j * amp_lo * eip, 1j * wavenum),
        (0.5 * amp_up * eim, 0.5j * amp_lo * eim, -1j * wavenum),
    )


def _hyper_pair(amp_cosh: float, amp_sinh: float, decay: float):
    """Terms for (amp_cosh * cosh(decay*x), amp_sinh * sinh(decay*x))."""
    return (
        (0.5 * amp_cosh, 0.5 * amp_sinh, decay),
        (0.5 * amp_cosh, -0.5 * amp_sinh, -decay),
    )


def _interior_terms(E: float, parity: str, params: WellParams) -> tuple:
    """Real interior basis spinor of the requested parity (unnormalized).

    Oscillatory:  even (p cos px, (E+V-m) sin px), odd (-p sin px, (E+V-m) cos px).
    Evanescent:   even (q cosh qx, (E+V-m) sinh qx), odd (q sinh qx, (E+V-m) cosh qx).
    """
    m, V = params.m, params.V
    evm = E + V - m
    w = evm * (E + V + m)
    if w >= 0.0:
        p = math.sqrt(w)
        if parity == EVEN:
            return _trig_pair(p, evm, p)
        # (-p sin px, evm cos px) == (p cos(px + pi/2), evm sin(px + pi/2)) shifted;
        # write it directly instead:
        return (
            (0.5j * p, 0.5 * evm, 1j * p),
            (-0.5j * p, 0.5 * evm, -1j * p),
        )
    q = math.sqrt(-w)
    if parity == EVEN:
        return _hyper_pair(q, evm, q)
    # odd evanescent: (q sinh qx, evm cosh qx)
    return (
        (0.5 * q, 0.5 * evm, q),
        (-0.5 * q, 0.5 * evm, -q),
    )


def _scaled(terms: Iterable, c: complex) -> tuple:
    return tuple((c * up, c * lo, mu) for up, lo, mu in terms)


def _seg_value(terms: Iterable, x: float) -> tuple[complex, complex]:
    f = 0j
    g = 0j
    for up, lo, mu in terms:
        e = cmath.exp(mu * x)
        f += up * e
        g += lo * e
    return f, g


def bound_matching_residual(E: float, parity: str, params: WellParams) -> float:
    """Continuous reformulation of the bound-state condition; zero at solutions.

    even:  sin(ap) sqrt((m+E)(E+V-m)) - cos(ap) sqrt((m-E)(E+V+m))
    odd:   sin(ap) sqrt((m-E)(E+V+m)) + cos(ap) sqrt((m+E)(E+V-m))

    Both are continuous across tan(ap) poles, which is what makes bracketed
    bisection on the branch grid reliable.
    """
    m, a, V = params.m, params.a, params.V
    g_even = math.sqrt(max((m + E) * (E + V - m), 0.0))
    g_odd = math.sqrt(max((m - E) * (E + V + m), 0.0))
    w = (E + V - m) * (E + V + m)
    S, C = _interior_SC(w, a)
    # sin(ap) = p*S stays finite (and correct) at p -> 0
    sin_ap = math.sqrt(max(w, 0.0)) * S
    if parity == EVEN:
        return sin_ap * g_even - C * g_odd
    return sin_ap * g_odd + C * g_even


def bound_wavefunction(
    state_energy: float,
    parity: str,
    params: WellParams,
    *,
    residual_tol: float = 1e-8,
) -> PiecewiseSpinor:
    """Unit-normalized bound spinor at an energy solving the matching condition.

    Raises MatchingError when state_energy is not a solution.  Energies within
    THRESHOLD_BAND*m of |E| = m come back with norm_kind='threshold' and are
    left unnormalized (the exterior tail is not integrable in practice).
    """
    m, a, V = params.m, params.a, params.V
    if parity not in PARITIES:
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if not (-m < state_energy < m):
        raise DiracWellError(f"bound energies live in (-m, m); got E={state_energy}")

    scale = math.sqrt((m + abs(state_energy) + V) * (2 * m + V)) + 1.0
    rel = abs(bound_matching_residual(state_energy, parity, params)) / scale
    if rel > residual_tol:
        raise MatchingError(
            f"E={state_energy} does not solve the {parity} bound condition", rel
        )

    E = state_energy
    kappa = math.sqrt((m - E) * (m + E))
    interior = _interior_terms(E, parity, params)
    # right exterior: s * (-kappa, E-m) * exp(-kappa x)
    f_in, g_in = _seg_value(interior, a)
    ext_up = -kappa * math.exp(-kappa * a)
    ext_lo = (E - m) * math.exp(-kappa * a)
    # scale the exterior onto the interior using the larger exterior component
    if abs(ext_up) >= abs(ext_lo):
        s = f_in / ext_up
    else:
        s = g_in / ext_lo
    right = ((s * -kappa, s * (E - m), complex(-kappa)),)

    threshold = (m - abs(E)) < THRESHOLD_BAND * m
    segs = (
        Segment(-math.inf, -a, _mirror_terms(right, parity)),
        Segment(-a, a, interior),
        Segment(a, math.inf, right),
    )
    psi = PiecewiseSpinor(
        segments=segs,
        energy=E,
        params=params,
        parity=parity,
        norm_kind="threshold" if threshold else "unit",
        coefficients={"s": s},
    )
    res = psi.continuity_residual()
    if res > CONTINUITY_TOL:
        raise MatchingError(f"continuity failed at E={E} ({parity})", res)
    if threshold:
        return psi
    n2 = norm_squared(psi)
    c = 1.0 / math.sqrt(n2)
    segs = tuple(Segment(s_.x0, s_.x1, _scaled(s_.terms, c)) for s_ in psi.segments)
    return PiecewiseSpinor(
        segments=segs,
        energy=E,
        params=params,
        parity=parity,
        norm_kind="unit",
        coefficients={"s": s * c},
    )


def scattering_wavefunction(
    k: float,
    energy_sign: int,
    parity: str,
    params: WellParams,
    norm_kind: str = "continuum",
    *,
    L: Optional[float] = None,
    phase: Optional[float] = None,
) -> PiecewiseSpinor:
    """Real standing-wave parity eigenstate at exterior wavevector k > 0.

    Exterior (x > a):
        even  (k cos(kx+D), (E-m) sin(kx+D))
        odd   (-k sin(kx+D), (E-m) cos(kx+D))
    with D the channel phase (computed mod pi here unless an unwrapped value
    is supplied), interior of matching parity, left region by parity.
    Negative-energy states use the same forms with E = -sqrt(k^2+m^2).

    norm_kind='box' requires L and normalizes to 1 on [-L, L]; 'continuum'
    leaves the exterior amplitude as written above.
    """
    if k <= 0:
        raise DiracWellError(f"scattering states need k > 0, got k={k}")
    if parity not in PARITIES:
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if energy_sign not in (+1, -1):
        raise ValueError("energy_sign must be +1 or -1")
    m, a, V = params.m, params.a, params.V
    eps = math.sqrt(k * k + m * m)
    E = energy_sign * eps

    if phase is None:
        theta, _ = channel_phase_mod_pi(eps - m, energy_sign, parity, params)
        delta = theta - k * a
    else:
        delta = phase

    if parity == EVEN:
        ext = _trig_pair(k, E - m, k, delta)
    else:
        # (-k sin(kx+D), (E-m) cos(kx+D))
        eip = cmath.exp(1j * delta)
        eim = cmath.exp(-1j * delta)
        ext = (
            (0.5j * k * eip, 0.5 * (E - m) * eip, 1j * k),
            (-0.5j * k * eim, 0.5 * (E - m) * eim, -1j * k),
        )

    interior = _interior_terms(E, parity, params)
    f_in, g_in = _seg_value(interior, a)
    f_ex, g_ex = _seg_value(ext, a)
    # match interior amplitude onto the exterior, using the larger interior value
    if abs(f_in) >= abs(g_in):
        c = f_ex / f_in
    else:
        c = g_ex / g_in
    interior = _scaled(interior, c)

    x_edge = L if L is not None else math.inf
    segs = (
        Segment(-x_edge, -a, _mirror_terms(ext, parity)),
        Segment(-a, a, interior),
        Segment(a, x_edge, ext),
    )
    psi = PiecewiseSpinor(
        segments=segs,
        energy=E,
        params=params,
        parity=parity,
        norm_kind=norm_kind,
        k=k,
        phase=delta,
        coefficients={"interior": c},
    )
    res = psi.continuity_residual()
    if res > CONTINUITY_TOL:
        raise MatchingError(
            f"phase {delta} is not consistent with matching at k={k}", res
        )
    if norm_kind == "box":
        if L is None:
            raise ValueError("norm_kind='box' requires the box half-length L")
        n2 = norm_squared(psi)
        cfac = 1.0 / math.sqrt(n2)
        segs = tuple(Segment(s_.x0, s_.x1, _scaled(s_.terms, cfac)) for s_ in segs)
        psi = PiecewiseSpinor(
            segments=segs,
            energy=E,
            params=params,
            parity=parity,
            norm_kind="box",
            k=k,
            phase=delta,
            coefficients={"interior": c * cfac},
        )
    return psi


def travelling_wave(k: float, energy_sign: int, params: WellParams):
    """Left-incident travelling solution; returns (spinor, coefficients).

    psi(x<-a) = N[(ik, E-m) e^{ikx} + B(-ik, E-m) e^{-ikx}]
    psi(|x|<a) = N[C(ip, E+V-m) e^{ipx} + D(-ip, E+V-m) e^{-ipx}]
    psi(x>a)  = N F (ik, E-m) e^{ikx}

    with N chosen so the incident flux density is 1/(2 pi) (delta(k-k')
    normalization of the incident branch).  coefficients carries B, C, D, F, N.
    Evanescent interiors are handled with p = i*q.
    """
    if k <= 0:
        raise DiracWellError(f"travelling states need k > 0, got k={k}")
    m, a, V = params.m, params.a, params.V
    eps = math.sqrt(k * k + m * m)
    E = energy_sign * eps
    w = (E + V - m) * (E + V + m)
    if abs(w) < 1e-12 * (m + V) ** 2:
        raise DiracWellError(
            "interior wavevector vanishes at this energy (degenerate matching); "
            "offset the energy slightly"
        )
    p = cmath.sqrt(complex(w))
    evm = E + V - m

    eka = cmath.exp(1j * k * a)
    epa = cmath.exp(1j * p * a)
    # unknowns (B, C, D, F)
    A_mat = np.array(
        [
            [-1j * k * eka, -1j * p / epa, 1j * p * epa, 0],
            [(E - m) * eka, -evm / epa, -evm * epa, 0],
            [0, 1j * p * epa, -1j * p / epa, -1j * k * eka],
            [0, evm * epa, evm / epa, -(E - m) * eka],
        ],
        dtype=complex,
    )
    rhs = np.array(
        [-1j * k / eka, -(E - m) / eka, 0, 0],
        dtype=complex,
    )
    B, C, D, F = np.linalg.solve(A_mat, rhs)

    N = 1.0 / math.sqrt(2.0 * math.pi * (k * k + (E - m) ** 2))
    left = (
        (N * 1j * k, N * (E - m), 1j * k),
        (N * B * -1j * k, N * B * (E - m), -1j * k),
    )
    mid = (
        (N * C * 1j * p, N * C * evm, 1j * p),
        (N * D * -1j * p, N * D * evm, -1j * p),
    )
    right = ((N * F * 1j * k, N * F * (E - m), 1j * k),)
    segs = (
        Segment(-math.inf, -a, left),
        Segment(-a, a, mid),
        Segment(a, math.inf, right),
    )
    psi = PiecewiseSpinor(
        segments=segs,
        energy=E,
        params=params,
        parity=None,
        norm_kind="continuum",
        k=k,
        coefficients={"B": B, "C": C, "D": D, "F": F, "N": N},
    )
    res = psi.continuity_residual()
    if res > CONTINUITY_TOL:
        raise MatchingError(f"travelling-wave matching failed at k={k}", res)
    return psi, psi.coefficients


# ----------------------------------------------------------------------------
# Closed-form overlaps and the quadrature cross-check
# ----------------------------------------------------------------------------


def _clip_breakpoints(u: PiecewiseSpinor, v: PiecewiseSpinor, x_lo, x_hi):
    lo_u, hi_u = u.support
    lo_v, hi_v = v.support
    lo = max(lo_u, lo_v) if x_lo is None else x_lo
    hi = min(hi_u, hi_v) if x_hi is None else x_hi
    pts = sorted(
        {lo, hi, *(x for x in u.breakpoints() + v.breakpoints() if lo < x < hi)}
    )
    return pts


def _segment_for(u: PiecewiseSpinor, x0: float, x1: float) -> Segment:
    xm = x0 + 0.5 * (x1 - x0) if math.isfinite(x0) and math.isfinite(x1) else (
        x1 - 1.0 if x0 == -math.inf else x0 + 1.0
    )
    for seg in u.segments:
        if seg.x0 <= xm <= seg.x1:
            return seg
    raise ValueError(f"no segment covers [{x0}, {x1}]")


def overlap(
    u: PiecewiseSpinor,
    v: PiecewiseSpinor,
    x_lo: Optional[float] = None,
    x_hi: Optional[float] = None,
) -> complex:
    """Closed-form integral of u(x)^dagger v(x) over the common support."""
    pts = _clip_breakpoints(u, v, x_lo, x_hi)
    total = 0j
    for x0, x1 in zip(pts, pts[1:]):
        su = _segment_for(u, x0, x1)
        sv = _segment_for(v, x0, x1)
        for up_u, lo_u, mu_u in su.terms:
            cu = up_u.conjugate()
            cl = lo_u.conjugate()
            mu_c = mu_u.conjugate()
            for up_v, lo_v, mu_v in sv.terms:
                coef = cu * up_v + cl * lo_v
                if coef != 0:
                    total += coef * _exp_integral(mu_c + mu_v, x0, x1)
    return total


def norm_squared(u: PiecewiseSpinor, x_lo=None, x_hi=None) -> float:
    val = overlap(u, u, x_lo, x_hi)
    if abs(val.imag) > 1e-9 * max(abs(val.real), 1.0):
        raise DiracWellError(f"norm came out non-real: {val}")
    return val.real


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def overlap_quad(
    u: PiecewiseSpinor,
    v: PiecewiseSpinor,
    x_lo: Optional[float] = None,
    x_hi: Optional[float] = None,
) -> complex:
    """Composite 16-point Gauss-Legendre quadrature of u^dagger v.

    Independent of the closed-form path (pointwise evaluation only); panel
    widths resolve the fastest exponential in either factor.  Infinite tails
    are truncated where the decaying envelope falls below 1e-18.
    """
    pts = _clip_breakpoints(u, v, x_lo, x_hi)
    total = 0j
    for x0, x1 in zip(pts, pts[1:]):
        su = _segment_for(u, x0, x1)
        sv = _segment_for(v, x0, x1)
        rate = max(
            (abs(mu) for _, _, mu in su.terms + sv.terms),
            default=0.0,
        )
        if x0 == -math.inf:
            decay = min((mu.real for _, _, mu in su.terms + sv.terms if mu.real > 0))
            x0 = x1 - 45.0 / decay
        if x1 == math.inf:
            decay = min((-mu.real for _, _, mu in su.terms + sv.terms if mu.real < 0))
            x1 = x0 + 45.0 / decay
        span = x1 - x0
        n_panels = max(1, int(math.ceil(span * max(rate, 1e-12) / 1.5)))
        edges = np.linspace(x0, x1, n_panels + 1)
        for e0, e1 in zip(edges, edges[1:]):
            half = 0.5 * (e1 - e0)
            mid = 0.5 * (e0 + e1)
            for node, wgt in zip(_GL_NODES, _GL_WEIGHTS):
                x = mid + half * node
                fu, gu = _seg_value(su.terms, x)
                fv, gv = _seg_value(sv.terms, x)
                total += wgt * half * (fu.conjugate() * fv + gu.conjugate() * gv)
    return total
