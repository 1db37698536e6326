import json

import pytest

from pspinlab import cli


def run_cli(args):
    return cli.main(args)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = json.loads(lines[0].lstrip("#").strip())
    cols = lines[1].split(",")
    rows = [dict(zip(cols, line.split(","))) for line in lines[2:] if line]
    return header, cols, rows


def test_phase_command(tmp_path):
    out = tmp_path / "phase.csv"
    assert run_cli(["phase", "--p-min", "3", "--p-max", "5",
                    "--out", str(out)]) == 0
    header, cols, rows = read_csv(out)
    assert header["command"] == "phase"
    assert header["seed"] == 0 and "version" in header
    assert cols == ["p", "beta_d", "beta_c", "argmin_q_c", "error"]
    assert len(rows) == 3
    assert float(rows[0]["beta_d"]) == pytest.approx(1.15470054, abs=1e-8)
    for row in rows:
        assert float(row["beta_d"]) < float(row["beta_c"])
        assert 1.0 < float(row["beta_d"]) < 2.0
        assert row["error"] == ""


def test_rerun_header_reproduces_body(tmp_path):
    out1 = tmp_path / "a.csv"
    assert run_cli(["simulate", "--n", "8", "--n-steps", "60",
                    "--record-every", "20", "--n-traj", "2", "--seed", "9",
                    "--out", str(out1)]) == 0
    cfg = tmp_path / "cfg.json"
    cfg.write_text(out1.read_text().splitlines()[0] + "\n")
    out2 = tmp_path / "b.csv"
    assert run_cli(["simulate", "--config", str(cfg),
                    "--out", str(out2)]) == 0
    body1 = out1.read_bytes().split(b"\r\n", 1)[1]
    body2 = out2.read_bytes().split(b"\r\n", 1)[1]
    assert body1 == body2


def test_full_csv_accepted_as_config(tmp_path):
    out1 = tmp_path / "a.csv"
    run_cli(["phase", "--p-max", "4", "--out", str(out1)])
    out2 = tmp_path / "b.csv"
    assert run_cli(["phase", "--config", str(out1),
                    "--out", str(out2)]) == 0
    assert out1.read_bytes().split(b"\r\n", 1)[1] \
        == out2.read_bytes().split(b"\r\n", 1)[1]


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "phase", "p_mn": 4}))
    assert run_cli(["phase", "--config", str(cfg)]) == 2


def test_config_for_wrong_command_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "phase"}))
    assert run_cli(["fp", "--config", str(cfg)]) == 2


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "phase", "p_min": 3, "p_max": 8}))
    out = tmp_path / "o.csv"
    assert run_cli(["phase", "--config", str(cfg), "--p-max", "4",
                    "--out", str(out)]) == 0
    header, _, rows = read_csv(out)
    assert header["p_max"] == 4
    assert len(rows) == 2


def test_fp_command_rows(tmp_path):
    out = tmp_path / "fp.csv"
    assert run_cli(["fp", "--p", "3", "--beta", "1.0", "--q-min", "0",
                    "--q-max", "0.6", "--n-q", "4", "--m", "128",
                    "--out", str(out)]) == 0
    _, _, rows = read_csv(out)
    assert float(rows[0]["value"]) == pytest.approx(0.5, abs=1e-5)
    for row in rows:
        assert float(row["value"]) <= float(row["rs_bound"]) + 1e-8


def test_fp_row_error_sets_exit_code(tmp_path):
    out = tmp_path / "fp.csv"
    assert run_cli(["fp", "--p", "3", "--q-min", "0.5", "--q-max", "1.0",
                    "--n-q", "3", "--m", "128", "--out", str(out)]) == 1
    _, _, rows = read_csv(out)
    assert rows[-1]["error"] != ""  # q = 1.0 is out of domain
    assert rows[0]["error"] == ""  # run continued despite the bad point


def test_parisi_command(tmp_path):
    out = tmp_path / "parisi.csv"
    assert run_cli(["parisi", "--p", "3", "--beta", "0.8", "--m", "64",
                    "--out", str(out)]) == 0
    _, cols, rows = read_csv(out)
    assert cols == ["t", "cdf", "value", "kkt_residual", "converged"]
    assert float(rows[0]["value"]) == pytest.approx(0.32, abs=1e-5)
    assert rows[0]["converged"] == "true"
    assert all(float(r["cdf"]) == pytest.approx(1.0, abs=1e-8) for r in rows)


def test_chaos_command(tmp_path):
    out = tmp_path / "chaos.csv"
    assert run_cli(["chaos", "--n", "6", "--epsilons", "0,1",
                    "--n-samples", "3", "--n-disorders", "2",
                    "--burn-in", "40", "--thin", "3",
                    "--out", str(out)]) == 0
    _, _, rows = read_csv(out)
    assert [float(r["epsilon"]) for r in rows] == [0.0, 1.0]
    for row in rows:
        assert 0.0 <= float(row["overlap_sq"]) <= 1.0
        assert float(row["w2"]) >= 0.0


def test_fp_rows_negative_near_one(tmp_path):
    out = tmp_path / "fp.csv"
    assert run_cli(["fp", "--p", "3", "--beta", "1.0", "--q-min", "0.995",
                    "--q-max", "0.999", "--n-q", "3", "--m", "128",
                    "--out", str(out)]) == 0
    _, _, rows = read_csv(out)
    assert all(float(r["value"]) < 0.0 for r in rows)


def test_shatter_scan_deep_rs_has_no_window(tmp_path):
    out = tmp_path / "scan.csv"
    # beta = 0.414 * beta_c(3) ~ 0.5, far inside the RS phase
    assert run_cli(["shatter-scan", "--p-list", "3", "--beta-fracs", "0.414",
                    "--n-q", "32", "--m", "128", "--out", str(out)]) == 0
    _, _, rows = read_csv(out)
    assert rows[0]["passes_fp"] == "false"
    assert rows[0]["n_points"] == "0"
    # p = 3 cannot host a half-band grid inside (0.99, 1): no window, no error
    assert rows[0]["hb_window"] == "false"
    assert rows[0]["error"] == ""


def test_threads_do_not_change_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(["phase", "--p-max", "6", "--out", str(a), "--threads", "1"])
    run_cli(["phase", "--p-max", "6", "--out", str(b), "--threads", "3"])
    assert a.read_bytes().split(b"\r\n", 1)[1] \
        == b.read_bytes().split(b"\r\n", 1)[1]


def test_warnings_do_not_change_exit_status(tmp_path, recwarn):
    out = tmp_path / "parisi.csv"
    # q_max below the minimizer support triggers a truncation warning,
    # which must not affect the exit status
    assert run_cli(["parisi", "--p", "3", "--beta", "1.5",
                    "--solver-q-max", "0.5", "--m", "64",
                    "--out", str(out)]) == 0
    assert any("q_max" in str(w.message) for w in recwarn.list)


def test_stdout_output(capsys):
    assert run_cli(["phase", "--p-max", "3"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("# {")
    assert "beta_d" in text
