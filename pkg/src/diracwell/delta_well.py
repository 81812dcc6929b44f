"""Zero-range limit: closed forms for the contact well of strength lambda.

When the square well is squeezed (V -> infinity, a -> 0 at fixed lambda =
2Va) every observable collapses to elementary functions of lambda alone.
This module provides those closed forms; they double as an independent
oracle for the finite-well machinery at large V.

Energies are in units of the mass (m = 1); lambda is dimensionless.
Everything is periodic in lambda with period 2*pi up to branch integers, and
the spectrum cycles with period pi: at each crossing lambda = n*pi the single
bound level dives into the lower continuum while a fresh one of opposite
parity detaches from the upper edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EVEN, ODD, DiracWellError, WellParams

__all__ = [
    "DeltaBoundState",
    "DeltaPotential",
    "delta_bound_state",
    "delta_phase_shift",
    "delta_spectrum",
    "delta_vacuum_charge",
]

_PI = math.pi

# |lambda - n*pi| below this flags the degenerate crossing strengths
BOUNDARY_BAND = 1e-9


@dataclass(frozen=True)
class DeltaPotential:
    """Contact-well strength, reduced to the fundamental cycle."""

    lam: float
    lam_reduced: float  # lam mod pi, in [0, pi)
    n_crossed: int  # completed spectral cycles, floor(lam/pi)

    @classmethod
    def from_strength(cls, lam: float) -> "DeltaPotential":
        if lam < 0:
            raise DiracWellError(f"attractive contact well needs lambda >= 0, got {lam}")
        n = math.floor(lam / _PI)
        return cls(lam=lam, lam_reduced=lam - n * _PI, n_crossed=n)

    @classmethod
    def from_well(cls, params: WellParams) -> "DeltaPotential":
        """Strength of the contact well a squeezed square well tends to."""
        return cls.from_strength(2.0 * params.V * params.a)


def _split(lam: float) -> tuple:
    """lam = n*pi + frac with frac in (-pi/2, pi/2]."""
    n = round(lam / _PI)
    return n, lam - n * _PI


def delta_phase_shift(E: float, lam: float) -> float:
    """Unwrapped total phase shift of the contact well at energy E, |E| > 1.

    Continuous on each branch, tending to +lam / -lam at +/- infinite energy
    (matching the square-well anchoring with lam = 2Va).
    """
    if abs(E) <= 1.0:
        raise DiracWellError(f"scattering phase needs |E| > m = 1, got E={E}")
    if lam < 0:
        raise DiracWellError(f"attractive contact well needs lambda >= 0, got {lam}")
    n, frac = _split(lam)
    k = math.sqrt((E - 1.0) * (E + 1.0)) if E > 0 else math.sqrt((-E - 1.0) * (-E + 1.0))
    branch = n * _PI if E > 0 else -n * _PI
    return math.atan((E / k) * math.tan(frac)) + branch


@dataclass(frozen=True)
class DeltaBoundState:
    """The single bound level of the contact well."""

    energy: float
    parity: str
    lam: float
    at_boundary: bool  # lam within BOUNDARY_BAND of n*pi: level degenerate with a gap edge


def delta_bound_state(lam: float) -> DeltaBoundState:
    """Bound level E = cos(lam) * sign(sin(lam)), parity alternating per cycle.

    For lam in (0, pi) the level is even and slides from +1 down to -1; past
    each crossing n*pi it is replaced by an opposite-parity level restarting
    at +1.  At the crossings themselves the level is degenerate with the gap
    edges and `at_boundary` is set (energy reported as +1, the detaching
    side).
    """
    if lam < 0:
        raise DiracWellError(f"attractive contact well needs lambda >= 0, got {lam}")
    n_near = round(lam / _PI)
    if abs(lam - n_near * _PI) < BOUNDARY_BAND:
        return DeltaBoundState(
            energy=1.0,
            parity=EVEN if n_near % 2 == 0 else ODD,
            lam=lam,
            at_boundary=True,
        )
    n = math.floor(lam / _PI)
    energy = math.cos(lam) * math.copysign(1.0, math.sin(lam))
    return DeltaBoundState(
        energy=energy,
        parity=EVEN if n % 2 == 0 else ODD,
        lam=lam,
        at_boundary=False,
    )


# operation alias: the "spectrum" of the contact well is its one level
delta_spectrum = delta_bound_state


def delta_vacuum_charge(lam: float, zero_mode_convention: str = "electron") -> float:
    """Vacuum charge of the contact well: lam'/pi, minus 1 past the E=0 crossing.

    lam' = lam mod pi.  Exactly at lam' = pi/2 the level sits at E=0 and the
    convention decides the side: 'electron' keeps it filled (+1/2), 'positron'
    leaves it empty (-1/2).
    """
    if lam < 0:
        raise DiracWellError(f"attractive contact well needs lambda >= 0, got {lam}")
    if zero_mode_convention not in ("electron", "positron"):
        raise ValueError(f"unknown zero_mode_convention {zero_mode_convention!r}")
    lam_reduced = lam - math.floor(lam / _PI) * _PI
    if abs(lam_reduced - 0.5 * _PI) < BOUNDARY_BAND:
        return 0.5 if zero_mode_convention == "electron" else -0.5
    if lam_reduced < 0.5 * _PI:
        return lam_reduced / _PI
    return lam_reduced / _PI - 1.0


def _transfer_matrix(lam: float) -> np.ndarray:
    """Spinor transfer matrix across the contact point: exp(-i lam sigma_2).

    Real rotation [[cos, -sin], [sin, cos]] acting on (upper, lower); the
    closed-form phase shift and bound level both follow from matching plane
    waves through it, which the tests verify.
    """
    c, s = math.cos(lam), math.sin(lam)
    return np.array([[c, -s], [s, c]])
