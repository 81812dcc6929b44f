"""Command-line interface: formats, config handling, exit codes, replay."""

import json

import pytest

from diracwell.cli import RunConfig, main

V_1C = 3.456727996652333
V_ODD1 = 1.456727996652333


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_critical_json(capsys):
    code, out, _ = _run(capsys, "critical")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["subcommand"] == "critical"
    assert doc["results"]["V_1c"] == pytest.approx(V_1C, rel=1e-12)
    assert doc["results"]["V_odd1"] == pytest.approx(V_ODD1, rel=1e-12)


def test_run_config_round_trip():
    cfg = RunConfig(subcommand="box", options={"m": 1.0, "a": 0.7, "V": 2.0})
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


def test_spectrum_csv_frozen_level(capsys):
    code, out, _ = _run(capsys, "spectrum", "--V", "1.0")
    assert code == 0
    rows = [line for line in out.splitlines() if line and not line.startswith("#")]
    header, data = rows[0], rows[1:]
    assert header.split(",")[:4] == ["V", "parity", "index", "energy"]
    assert len(data) == 1
    fields = data[0].split(",")
    assert fields[1] == "even"
    assert float(fields[3]) == pytest.approx(0.5653679802187657, rel=1e-12)


def test_phase_zero_depth_columns_vanish(capsys):
    code, out, _ = _run(capsys, "phase", "--V", "0", "--n-points", "7")
    assert code == 0
    rows = [line for line in out.splitlines() if line and not line.startswith("#")]
    for row in rows[1:]:
        _, d_plus, d_minus = row.split(",")
        assert float(d_plus) == 0.0 and float(d_minus) == 0.0


def test_charge_csv_frozen_value(capsys):
    code, out, _ = _run(capsys, "charge", "--v-min", "0.5", "--v-max", "1.0",
                        "--n-points", "2")
    assert code == 0
    rows = [line for line in out.splitlines() if line and not line.startswith("#")]
    q0 = {float(r.split(",")[0]): float(r.split(",")[1]) for r in rows[1:]}
    assert q0[0.5] == pytest.approx(0.22281692032865347, rel=1e-10)
    assert q0[1.0] == pytest.approx(0.44563384065730693, rel=1e-10)


def test_charge_at_exact_transition_exits_one(capsys):
    code, _, err = _run(capsys, "charge", "--v-min", str(V_ODD1), "--v-max",
                        str(V_ODD1 + 0.1), "--n-points", "2")
    assert code == 1
    assert "AmbiguousThresholdError" in err


def test_delta_json_within_tolerance(capsys):
    code, out, _ = _run(capsys, "delta", "--lam", "1.0", "--format", "json",
                        "--n-points", "12")
    assert code == 0
    doc = json.loads(out)
    assert doc["results"]["phase_within_tol"] is True
    assert doc["results"]["worst_phase_diff"] < 1e-3
    assert doc["results"]["contact_level"]["energy"] == pytest.approx(
        0.5403023058681398, rel=1e-9
    )


def test_output_is_byte_deterministic(capsys):
    _, first, _ = _run(capsys, "levinson", "--draws", "5")
    _, second, _ = _run(capsys, "levinson", "--draws", "5")
    assert first == second


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("V = 3.0\nn-points = 5\n# comment\n")
    code, out, _ = _run(capsys, "phase", "--config", str(cfg), "--V", "2.0")
    assert code == 0
    assert "V = 3" not in out
    assert "V = 2" in out
    rows = [line for line in out.splitlines() if line and not line.startswith("#")]
    assert len(rows) == 1 + 5  # header plus n-points rows from the file


def test_replayed_header_reproduces_output(tmp_path, capsys):
    code, out, _ = _run(capsys, "box", "--V", "2.0")
    assert code == 0
    replay = tmp_path / "replay.cfg"
    replay.write_text(
        "\n".join(line[2:] for line in out.splitlines() if line.startswith("# "))
    )
    code, again, _ = _run(capsys, "box", "--config", str(replay))
    assert code == 0
    assert again == out


def test_unknown_config_key_exits_two(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no_such_option = 1\n")
    code, _, err = _run(capsys, "phase", "--config", str(cfg))
    assert code == 2
    assert "no_such_option" in err


def test_unknown_format_exits_two(capsys):
    code, _, err = _run(capsys, "critical", "--format", "xml")
    assert code == 2
    assert "format" in err


def test_gnuplot_companion_script(tmp_path, capsys):
    target = tmp_path / "phase.csv"
    code, _, _ = _run(capsys, "phase", "--V", "2.0", "--n-points", "9",
                      "--output", str(target), "--gnuplot")
    assert code == 0
    assert target.exists()
    script = tmp_path / "phase.csv.gp"
    assert script.exists()
    text = script.read_text()
    assert "phase.csv" in text
    assert "plot" in text


def test_gnuplot_requires_output(capsys):
    code, _, err = _run(capsys, "phase", "--V", "2.0", "--gnuplot")
    assert code == 2
    assert "--output" in err


def test_emit_degenerate_csv(capsys):
    code, out, _ = _run(capsys, "emit", "--v-sub", "2.5", "--v-super", "2.5",
                        "--L", "60")
    assert code == 0
    rows = [line for line in out.splitlines() if line and not line.startswith("#")]
    assert rows[0].split(",") == ["k", "dos", "N_k", "dN_dk"]
    assert len(rows) > 100
    assert all(float(r.split(",")[2]) < 1e-25 for r in rows[1:])


def test_emit_rejects_mismatched_depth_pair(capsys):
    code, _, err = _run(capsys, "emit", "--v-sub", "2.5")
    assert code == 2
    assert "v-sub" in err or "v_sub" in err


def test_verify_single_check(capsys):
    code, out, _ = _run(capsys, "verify", "--only", "box-counting")
    assert code == 0
    assert out.startswith("PASS")
    assert "box-counting" in out


def test_float_formatting_round_trips(capsys):
    # %.17g keeps every bit: parsing the printed value recovers the double
    code, out, _ = _run(capsys, "charge", "--v-min", "0.5", "--v-max", "1.0",
                        "--n-points", "2")
    assert code == 0
    rows = [line for line in out.splitlines() if line and not line.startswith("#")]
    q0 = float(rows[1].split(",")[1])
    assert f"{q0:.17g}" == rows[1].split(",")[1]
