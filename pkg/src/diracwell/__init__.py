"""One-dimensional Dirac square well: spectra, scattering, vacuum charge, emission.

Natural units hbar = c = 1 throughout; the electron charge is -1. The well has
depth -V (V >= 0 is attractive for electrons) on x in [-a, a].
"""

from .core import (
    DiracWellError,
    KinematicContext,
    MatchingError,
    PiecewiseSpinor,
    WellParams,
    bound_wavefunction,
    kinematics,
    scattering_wavefunction,
    travelling_wave,
)
from .spectrum import (
    BoundState,
    CriticalityReport,
    LevelCurve,
    LevelLostError,
    bound_states,
    critical_potentials,
    level_curve,
)
from .scattering import (
    AmbiguousThresholdError,
    PhaseShiftCurve,
    Resonance,
    TimeDelayReport,
    channel_integers,
    channel_phase,
    channel_phase_derivative,
    phase_shift,
    phase_shift_curve,
    resonance_slope,
    threshold_integers,
    threshold_phase,
    time_delay,
    transmission_resonances,
)
from .levinson import (
    BoxCount,
    ParityPhases,
    VacuumChargeReport,
    box_mode_count,
    levinson_check,
    parity_phases,
    vacuum_charge,
)
from .delta_well import (
    DeltaBoundState,
    DeltaPotential,
    delta_bound_state,
    delta_phase_shift,
    delta_spectrum,
    delta_vacuum_charge,
)
from .emission import (
    ChargeLedger,
    EmissionSpectrum,
    OverlapCoefficients,
    TransitionScenario,
    charge_ledger,
    emission_spectrum,
    escape_time_guard,
    first_supercritical_depth,
    overlap_coefficients,
    row_completeness,
)
from .acceptance import CheckResult, run_all

__version__ = "0.1.0"

__all__ = [
    "AmbiguousThresholdError",
    "BoundState",
    "BoxCount",
    "ChargeLedger",
    "CheckResult",
    "CriticalityReport",
    "DeltaBoundState",
    "DeltaPotential",
    "DiracWellError",
    "EmissionSpectrum",
    "KinematicContext",
    "LevelCurve",
    "LevelLostError",
    "MatchingError",
    "OverlapCoefficients",
    "ParityPhases",
    "PhaseShiftCurve",
    "PiecewiseSpinor",
    "Resonance",
    "TimeDelayReport",
    "TransitionScenario",
    "VacuumChargeReport",
    "WellParams",
    "bound_states",
    "bound_wavefunction",
    "box_mode_count",
    "channel_integers",
    "channel_phase",
    "channel_phase_derivative",
    "charge_ledger",
    "critical_potentials",
    "delta_bound_state",
    "delta_phase_shift",
    "delta_spectrum",
    "delta_vacuum_charge",
    "emission_spectrum",
    "escape_time_guard",
    "first_supercritical_depth",
    "kinematics",
    "level_curve",
    "levinson_check",
    "overlap_coefficients",
    "parity_phases",
    "phase_shift",
    "phase_shift_curve",
    "resonance_slope",
    "row_completeness",
    "run_all",
    "scattering_wavefunction",
    "threshold_integers",
    "threshold_phase",
    "time_delay",
    "transmission_resonances",
    "travelling_wave",
    "vacuum_charge",
]
