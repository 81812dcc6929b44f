"""Command-line surface: every computation as a reproducible sweep.

Design notes
------------
* Curves and spectra go to CSV (one header row, fixed column order, 17
  significant digits); structured reports go to JSON.  Both embed the full
  resolved configuration — the CSV comment block is itself a valid config
  file, so a run can be replayed from its own output.
* Options resolve as: built-in defaults < config file (``key = value`` lines,
  ``#`` comments) < command-line flags.
* Identical config + seed gives byte-identical output (no timestamps, fixed
  iteration order; sweep points go through a worker pool but the collector
  restores input order).
* Exit codes: 0 success, 1 numerical failure (the message names the library
  error type), 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import acceptance
from .core import DiracWellError, WellParams
from .delta_well import delta_bound_state, delta_phase_shift
from .emission import (
    TransitionScenario,
    _n_workers,
    charge_ledger,
    emission_spectrum,
    first_supercritical_depth,
    overlap_coefficients,
)
from .levinson import box_mode_count, levinson_check, vacuum_charge
from .scattering import phase_shift, phase_shift_curve, time_delay, transmission_resonances
from .spectrum import bound_states, critical_potentials


class UsageError(Exception):
    """Bad flag/config values; maps to exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved invocation: subcommand plus every option value."""

    subcommand: str
    options: dict

    def to_dict(self) -> dict:
        return {"subcommand": self.subcommand, **self.options}

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        sub = doc.pop("subcommand")
        return cls(subcommand=sub, options=doc)


# ----------------------------------------------------------------------------
# option tables: name -> default (None = required/optional-with-no-default)
# ----------------------------------------------------------------------------

_COMMON = {
    "m": 1.0,
    "a": 0.7,
    "format": None,  # resolved per subcommand below
    "output": None,
    "gnuplot": False,
    "seed": acceptance.DEFAULT_SEED,
}

_DEFAULTS = {
    "spectrum": {**_COMMON, "V": None, "v_min": 0.1, "v_max": 5.5, "n_points": 60},
    "critical": {**_COMMON},
    "phase": {**_COMMON, "V": 2.0, "eps_max": None, "n_points": 400},
    "resonances": {**_COMMON, "V": 6.0, "e_min": -5.0, "e_max": -1.1},
    "delay": {**_COMMON, "V": None, "N": 1},
    "levinson": {**_COMMON, "draws": 50, "tol": 1e-6},
    "charge": {
        **_COMMON,
        "v_min": 0.1,
        "v_max": 5.5,
        "n_points": 100,
        "zero_mode_convention": "electron",
    },
    "delta": {**_COMMON, "lam": 1.0, "V": 1.0e4, "n_points": 50, "tol": 1e-3},
    "emit": {
        **_COMMON,
        "band": 0.01,
        "L": 400.0,
        "occupation": "vacant",
        "eps_max": None,
        "v_sub": None,
        "v_super": None,
    },
    "box": {**_COMMON, "V": 2.0, "L": 500.0, "K": 50.0},
    "verify": {**_COMMON, "only": None},
}

# subcommands whose natural output is a table; the rest emit JSON reports
_CSV_DEFAULT = {"spectrum", "phase", "resonances", "levinson", "charge", "delta", "emit"}

_FLAG_HELP = {
    "m": "fermion mass (natural units)",
    "a": "well half-width",
    "V": "well depth",
    "format": "output format: csv or json",
    "output": "output file path (default: stdout)",
    "gnuplot": "also write a companion gnuplot script next to --output",
    "seed": "random seed for draw-based subcommands",
    "v_min": "sweep start depth",
    "v_max": "sweep end depth",
    "n_points": "number of grid points",
    "eps_max": "upper energy cutoff",
    "e_min": "energy window start",
    "e_max": "energy window end",
    "N": "resonance order",
    "draws": "number of random (V, a) draws",
    "tol": "tolerance for the subcommand's pass/fail column",
    "zero_mode_convention": "side a zero mode counts toward: electron or positron",
    "lam": "contact-potential strength",
    "band": "relative distance of both depths from the first transition",
    "L": "periodic box half-width",
    "K": "momentum cutoff for box counting",
    "occupation": "initial level occupation: vacant or filled",
    "v_sub": "explicit shallow depth (overrides --band)",
    "v_super": "explicit deep depth (overrides --band)",
    "only": "run only this named check (repeatable)",
}

_SUBCOMMAND_HELP = {
    "spectrum": "bound levels at one depth or over a depth sweep",
    "critical": "appearance/disappearance/zero-crossing depths",
    "phase": "unwrapped phase-shift curve on both branches",
    "resonances": "reflectionless energies in a window",
    "delay": "dwell time at a reflectionless energy",
    "levinson": "random-draw count verification report",
    "charge": "vacuum charge over a depth sweep",
    "delta": "contact-potential limit tables and comparison",
    "emit": "sudden-switch emission spectrum and charge ledger",
    "box": "periodic-box mode counting at finite cutoff",
    "verify": "run the named verification checks",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diracwell",
        description="Square-well Dirac phenomenology: spectra, phases, vacuum charge, emission.",
    )
    subs = parser.add_subparsers(dest="subcommand", required=True)
    for name, table in _DEFAULTS.items():
        sp = subs.add_parser(name, help=_SUBCOMMAND_HELP[name])
        sp.add_argument("--config", default=None, help="key = value config file; flags win")
        for key, default in table.items():
            flag = "--" + key.replace("_", "-")
            if key == "gnuplot":
                sp.add_argument(flag, action="store_true", default=None, help=_FLAG_HELP[key])
            elif key == "only":
                sp.add_argument(flag, action="append", default=None, help=_FLAG_HELP[key])
            elif key in ("n_points", "N", "draws", "seed"):
                sp.add_argument(flag, type=int, default=None, help=_FLAG_HELP[key])
            elif key in ("format", "output", "zero_mode_convention", "occupation"):
                sp.add_argument(flag, type=str, default=None, help=_FLAG_HELP[key])
            else:
                sp.add_argument(flag, type=float, default=None, help=_FLAG_HELP[key])
    return parser


# ----------------------------------------------------------------------------
# config resolution
# ----------------------------------------------------------------------------


def parse_config_file(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment; blank lines ok."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(key: str, raw, default):
    """Config-file strings to the option's type (inferred from its default)."""
    if not isinstance(raw, str):
        return raw
    try:
        if key in ("n_points", "N", "draws", "seed"):
            return int(raw)
        if key == "gnuplot":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if key == "only":
            return [s.strip() for s in raw.split(",") if s.strip()]
        if key in ("format", "output", "zero_mode_convention", "occupation"):
            return raw
        return float(raw)
    except ValueError:
        raise UsageError(f"bad value for {key!r}: {raw!r}")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    sub = args.subcommand
    table = _DEFAULTS[sub]
    resolved = dict(table)
    if getattr(args, "config", None):
        for key, raw in parse_config_file(args.config).items():
            if key == "subcommand":
                continue  # header blocks of previous outputs carry this line
            if key not in table:
                raise UsageError(f"unknown config key {key!r} for subcommand {sub!r}")
            resolved[key] = _coerce(key, raw, table[key])
    for key in table:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            resolved[key] = flag_value
    if resolved.get("format") is None:
        resolved["format"] = "csv" if sub in _CSV_DEFAULT else "json"
    if sub == "delay" and resolved["V"] is None:
        # just past the first transition, where the dwell time is the cleanest
        resolved["V"] = 1.001 * first_supercritical_depth(resolved["m"], resolved["a"])
    _validate(sub, resolved)
    return RunConfig(subcommand=sub, options=resolved)


def _require(cond: bool, message: str):
    if not cond:
        raise UsageError(message)


def _validate(sub: str, o: dict):
    _require(o["format"] in ("csv", "json"), f"format must be csv or json, got {o['format']!r}")
    _require(o["m"] > 0, "m must be positive")
    _require(o["a"] > 0, "a must be positive")
    if "n_points" in o:
        _require(o["n_points"] >= 2, "n-points must be at least 2")
    if "V" in o and o["V"] is not None:
        _require(o["V"] >= 0, "V must be nonnegative")
    if sub in ("spectrum", "charge"):
        _require(o["v_min"] > 0 if sub == "charge" else o["v_min"] >= 0, "v-min must be positive")
        _require(o["v_max"] > o["v_min"], "v-max must exceed v-min")
    if sub == "resonances":
        _require(o["e_max"] > o["e_min"], "e-max must exceed e-min")
    if sub == "delay":
        _require(o["N"] >= 1, "N must be a positive integer")
    if sub == "levinson":
        _require(o["draws"] >= 1, "draws must be positive")
    if sub == "delta":
        _require(o["lam"] > 0, "lam must be positive")
        _require(o["V"] > 0, "V must be positive")
    if sub == "emit":
        both = (o["v_sub"] is None) == (o["v_super"] is None)
        _require(both, "--v-sub and --v-super must be given together")
        _require(o["occupation"] in ("vacant", "filled"), "occupation must be vacant or filled")
        _require(o["band"] > 0, "band must be positive")
        _require(o["L"] > o["a"], "L must exceed the well half-width")
    if sub == "box":
        _require(o["L"] > o["a"], "L must exceed the well half-width")
        _require(o["K"] > 0, "K must be positive")
    if sub == "charge":
        _require(
            o["zero_mode_convention"] in ("electron", "positron"),
            "zero-mode-convention must be electron or positron",
        )
    if sub == "verify" and o["only"]:
        known = {name for name, _ in acceptance.ALL_CHECKS}
        for name in o["only"]:
            _require(name in known, f"unknown check {name!r}; known: {', '.join(sorted(known))}")


# ----------------------------------------------------------------------------
# output plumbing
# ----------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def config_block(config: RunConfig) -> list:
    lines = [f"subcommand = {config.subcommand}"]
    for key, value in config.options.items():
        if value is None:
            continue
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {_fmt(value)}")
    return lines


def write_csv(config: RunConfig, columns: list, rows: list, out) -> None:
    for line in config_block(config):
        out.write("# " + line + "\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def write_json(config: RunConfig, results, out) -> None:
    doc = {"config": config.to_dict(), "results": results}
    json.dump(doc, out, indent=2, default=_json_default)
    out.write("\n")


_GNUPLOT_COLUMNS = {
    "spectrum": [(1, 4, "energy")],
    "phase": [(1, 2, "delta_plus"), (1, 3, "delta_minus")],
    "resonances": [(3, 2, "energy")],
    "levinson": [(2, 3, "V")],
    "charge": [(1, 2, "Q0"), (1, 3, "Q0_subtracted")],
    "delta": [(1, 2, "contact_plus"), (1, 3, "well_plus")],
    "emit": [(1, 3, "N_k")],
}


def write_gnuplot_script(config: RunConfig, csv_path: str, path: str) -> None:
    pairs = _GNUPLOT_COLUMNS[config.subcommand]
    lines = [
        "# companion plot script; run: gnuplot " + path,
        "set datafile separator ','",
        "set datafile commentschars '#'",
        f"set title '{config.subcommand}'",
        "set key autotitle columnhead",
        "plot "
        + ", ".join(
            f"'{csv_path}' using {x}:{y} with linespoints title '{label}'"
            for x, y, label in pairs
        ),
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _pmap(func, items):
    """Order-preserving map over the worker pool (DIRACWELL_THREADS caps it)."""
    items = list(items)
    workers = _n_workers()
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))


# ----------------------------------------------------------------------------
# subcommand implementations: each returns (columns, rows) or a results dict
# ----------------------------------------------------------------------------


def _run_spectrum(o: dict):
    if o["V"] is not None:
        grid = [o["V"]]
    else:
        grid = np.linspace(o["v_min"], o["v_max"], o["n_points"]).tolist()
    per_depth = _pmap(lambda v: bound_states(WellParams(m=o["m"], a=o["a"], V=v)), grid)
    columns = ["V", "parity", "index", "energy", "at_gap_edge", "residual"]
    rows = []
    for states in per_depth:
        for s in states:
            rows.append([s.V, s.parity, s.index, s.energy, s.threshold, s.residual])
    return columns, rows


def _run_critical(o: dict):
    report = critical_potentials(WellParams(m=o["m"], a=o["a"], V=1.0))
    results = dataclasses.asdict(report)
    results["appearances"] = [dataclasses.asdict(d) for d in report.appearances]
    results["disappearances"] = [dataclasses.asdict(d) for d in report.disappearances]
    results["zero_crossings"] = [dataclasses.asdict(d) for d in report.zero_crossings]
    columns = ["V", "parity", "order", "kind"]
    rows = [[d.V, d.parity, d.order, d.kind] for d in report.all_depths()]
    return columns, rows, results


def _run_phase(o: dict):
    params = WellParams(m=o["m"], a=o["a"], V=o["V"])
    curve = phase_shift_curve(params, eps_max=o["eps_max"], n_points=o["n_points"])
    columns = ["eps", "delta_plus", "delta_minus"]
    rows = [[e, dp, dm] for e, dp, dm in curve.samples]
    results = {
        "threshold_plus": curve.threshold_plus,
        "threshold_minus": curve.threshold_minus,
        "n": curve.n,
        "n_prime": curve.n_prime,
        "asymptote_plus": curve.asymptote_plus,
        "asymptote_minus": curve.asymptote_minus,
        "samples": [list(s) for s in curve.samples],
    }
    return columns, rows, results


def _run_resonances(o: dict):
    params = WellParams(m=o["m"], a=o["a"], V=o["V"])
    found = transmission_resonances(params, (o["e_min"], o["e_max"]))
    columns = ["N", "energy", "k", "reflection"]
    rows = [[r.N, r.energy, r.k, r.reflection] for r in found]
    return columns, rows, {"resonances": [dataclasses.asdict(r) for r in found]}


def _run_delay(o: dict):
    report = time_delay(WellParams(m=o["m"], a=o["a"], V=o["V"]), N=o["N"])
    return dataclasses.asdict(report)


def _run_levinson(o: dict):
    rng = np.random.default_rng(o["seed"])
    draws = []
    for i in range(o["draws"]):
        a = float(rng.uniform(0.3, 1.5))
        v_1c = math.hypot(math.pi / (2.0 * a), o["m"]) + o["m"]
        draws.append((i, a, float(rng.uniform(0.05 * v_1c, 0.95 * v_1c))))

    def one(draw):
        i, a, v = draw
        params = WellParams(m=o["m"], a=a, V=v)
        n_even, n_odd, residuals = levinson_check(params)
        states = bound_states(params)
        direct_even = sum(1 for s in states if s.parity == "even")
        direct_odd = len(states) - direct_even
        ok = (n_even, n_odd) == (direct_even, direct_odd) and max(residuals.values()) < o["tol"]
        return [
            i,
            a,
            v,
            n_even,
            n_odd,
            direct_even,
            direct_odd,
            residuals["even"],
            residuals["odd"],
            residuals["total"],
            ok,
        ]

    rows = _pmap(one, draws)
    columns = [
        "draw",
        "a",
        "V",
        "n_even_phase",
        "n_odd_phase",
        "n_even_direct",
        "n_odd_direct",
        "residual_even",
        "residual_odd",
        "residual_total",
        "ok",
    ]
    return columns, rows


def _run_charge(o: dict):
    grid = np.linspace(o["v_min"], o["v_max"], o["n_points"]).tolist()

    def one(v):
        r = vacuum_charge(WellParams(m=o["m"], a=o["a"], V=v), o["zero_mode_convention"])
        return [
            v,
            r.Q0,
            r.Q0_subtracted,
            r.N_plus,
            r.N_minus,
            r.delta_plus_threshold,
            r.delta_minus_threshold,
        ]

    rows = _pmap(one, grid)
    columns = [
        "V",
        "Q0",
        "Q0_subtracted",
        "N_plus",
        "N_minus",
        "delta_plus_threshold",
        "delta_minus_threshold",
    ]
    return columns, rows


def _run_delta(o: dict):
    lam = o["lam"]
    params = WellParams(m=o["m"], a=lam / (2.0 * o["V"]), V=o["V"])
    ks = np.logspace(-2.0, 2.0, o["n_points"])

    def one(k):
        e = math.hypot(k, o["m"])
        return [
            e,
            delta_phase_shift(e, lam),
            phase_shift(e, params),
            delta_phase_shift(-e, lam),
            phase_shift(-e, params),
        ]

    rows = _pmap(one, ks.tolist())
    columns = ["eps", "contact_plus", "well_plus", "contact_minus", "well_minus"]
    worst = max(max(abs(r[1] - r[2]), abs(r[3] - r[4])) for r in rows)
    oracle = delta_bound_state(lam)
    states = bound_states(params)
    results = {
        "lam": lam,
        "squeezed_V": o["V"],
        "worst_phase_diff": worst,
        "phase_within_tol": worst < o["tol"],
        "contact_level": dataclasses.asdict(oracle),
        "well_levels": [dataclasses.asdict(s) for s in states],
        "table": rows,
    }
    return columns, rows, results


def _run_emit(o: dict):
    # scenario construction enforces the module preconditions; violations are
    # config mistakes, not numerical failures
    try:
        if o["v_sub"] is not None:
            scenario = TransitionScenario(
                m=o["m"],
                a=o["a"],
                V_sub=o["v_sub"],
                V_super=o["v_super"],
                initial_occupation=o["occupation"],
                L=o["L"],
                eps_max=o["eps_max"],
            )
        else:
            scenario = TransitionScenario.default(
                m=o["m"],
                a=o["a"],
                band=o["band"],
                initial_occupation=o["occupation"],
                L=o["L"],
                eps_max=o["eps_max"],
            )
    except DiracWellError as err:
        raise UsageError(str(err))
    coeffs = overlap_coefficients(scenario)
    spectrum = emission_spectrum(coeffs, scenario)
    ledger = charge_ledger(scenario, spectrum)
    columns = ["k", "dos", "N_k", "dN_dk"]
    dn = spectrum.dN_dk
    rows = [
        [spectrum.k[i], spectrum.dos[i], spectrum.N_k[i], dn[i]]
        for i in range(len(spectrum.k))
    ]
    results = {
        "scenario": dataclasses.asdict(scenario),
        "total": spectrum.total,
        "peak_k": spectrum.peak_k,
        "k_resonance": spectrum.k_resonance,
        "ledger": dataclasses.asdict(ledger),
        "stages": ledger.stages(),
        "spectrum": {
            "k": spectrum.k.tolist(),
            "dos": spectrum.dos.tolist(),
            "N_k": spectrum.N_k.tolist(),
        },
    }
    return columns, rows, results


def _run_box(o: dict):
    count = box_mode_count(WellParams(m=o["m"], a=o["a"], V=o["V"]), o["L"], o["K"])
    results = dataclasses.asdict(count)
    results["total"] = count.total
    return results


def _run_verify(o: dict) -> int:
    names = o["only"] if o["only"] else None
    results = acceptance.run_all(seed=o["seed"], stream=sys.stdout, names=names)
    if o["output"]:
        config = RunConfig("verify", o)
        columns = ["name", "passed", "seconds", "detail"]
        rows = [[r.name, r.passed, r.seconds, r.detail] for r in results]
        with open(o["output"], "w", encoding="utf-8", newline="") as fh:
            if o["format"] == "csv":
                write_csv(config, columns, rows, fh)
            else:
                write_json(config, [dataclasses.asdict(r) for r in results], fh)
    return 0 if all(r.passed for r in results) else 1


# ----------------------------------------------------------------------------
# dispatch
# ----------------------------------------------------------------------------


def _emit_output(config: RunConfig, columns, rows, results) -> None:
    o = config.options
    if o["output"]:
        with open(o["output"], "w", encoding="utf-8", newline="") as fh:
            if o["format"] == "csv":
                write_csv(config, columns, rows, fh)
            else:
                write_json(config, results, fh)
        if o["gnuplot"]:
            if o["format"] != "csv" or config.subcommand not in _GNUPLOT_COLUMNS:
                raise UsageError("--gnuplot needs --format csv and a plottable subcommand")
            write_gnuplot_script(config, o["output"], o["output"] + ".gp")
    else:
        if o["gnuplot"]:
            raise UsageError("--gnuplot needs --output")
        if o["format"] == "csv":
            write_csv(config, columns, rows, sys.stdout)
        else:
            write_json(config, results, sys.stdout)


def dispatch(config: RunConfig) -> int:
    sub, o = config.subcommand, config.options
    if sub == "verify":
        return _run_verify(o)

    if sub == "spectrum":
        columns, rows = _run_spectrum(o)
        results = {"states": [dict(zip(columns, row)) for row in rows]}
    elif sub == "critical":
        columns, rows, results = _run_critical(o)
    elif sub == "phase":
        columns, rows, results = _run_phase(o)
    elif sub == "resonances":
        columns, rows, results = _run_resonances(o)
    elif sub == "delay":
        results = _run_delay(o)
        columns = list(results)
        rows = [[results[c] for c in columns]]
    elif sub == "levinson":
        columns, rows = _run_levinson(o)
        results = {"draws": [dict(zip(columns, row)) for row in rows]}
    elif sub == "charge":
        columns, rows = _run_charge(o)
        results = {"sweep": [dict(zip(columns, row)) for row in rows]}
    elif sub == "delta":
        columns, rows, results = _run_delta(o)
    elif sub == "emit":
        columns, rows, results = _run_emit(o)
    elif sub == "box":
        results = _run_box(o)
        columns = ["channel", "count", "k_min"]
        rows = [[ch, results["counts"][ch], results["k_min"][ch]] for ch in results["counts"]]
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown subcommand {sub!r}")

    _emit_output(config, columns, rows, results)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    try:
        return dispatch(config)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except DiracWellError as err:
        print(f"error: {type(err).__module__}.{type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
