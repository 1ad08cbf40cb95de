"""Command-line front-end: reports, exit codes and determinism."""
import csv
import io
import json
import subprocess
import sys

import pytest

from ltcoleman.cli import RunConfig, main, run

SMALL = {"M": 12, "n_max": 2}


def report(cmd, cfg, fmt="json"):
    code, text = run(cmd.split(), cfg, fmt=fmt)
    return code, (json.loads(text) if fmt == "json" else text)


def test_fg_build_multiplicative_law():
    code, d = report("fg build", SMALL)
    assert code == 0
    assert d["report"]["law"] == "X+Y+XY"
    assert all(d["report"]["checks"].values())
    assert {r["term"]: r["coefficient"] for r in d["table"]} == {"1,0": 1, "0,1": 1, "1,1": 1}


def test_fg_build_other_lift():
    code, d = report("fg build", {**SMALL, "lift": {"coeffs": [0, 3, 0, 1]}})
    assert code == 0 and d["report"]["law"] is None
    assert all(d["report"]["checks"].values())


def test_fg_torsion_rows():
    code, d = report("fg torsion", SMALL)
    assert code == 0
    # E_1 = X^2 + 3X + 3 for (1+X)^3 - 1
    assert d["table"][0]["E"] == "3 3 1"
    assert all(r["eisenstein"] and r["eta_root"] for r in d["table"])
    assert d["report"]["eta_bar_at_zero"] == {"exp": -1, "rep": [[3]]}


def test_tower_traces_first_row():
    code, d = report("tower traces", SMALL)
    assert code == 0
    row = d["table"][0]
    assert row["level"] == 1 and row["trace_pi"] == "-3" and row["trace_pi_prime"] == "0"
    assert row["closed_form_holds"]


def test_logpm_zero_pattern():
    code, d = report("logpm emit", {"M": 40, "n_max": 1})
    assert code == 0
    zeros = {(r["sign"], r["order_level"]) for r in d["table"] if r["verdict"] == "zero"}
    assert zeros == {("+", 2), ("-", 1)}


def test_parity_exit_zero_and_witnesses():
    code, d = report("coleman parity", {"n_max": 2})
    assert code == 0
    assert all(d["report"]["nonvanishing_witness"].values())
    for r in d["table"]:
        if r["expected_zero"]:
            assert r["verdict"] == "zero"


def test_gamma_table_agrees():
    code, d = report("coleman gamma", {"n_max": 1})
    assert code == 0
    assert [r["closed_form_agrees"] for r in d["table"] if r["k"] == 0] == [True, True]


def test_relative_verdicts():
    code, d = report("relative indep", {"relative": {"d": 2}})
    assert code == 0 and d["report"]["verdict"] == "basis"
    code, d = report("relative indep", {"relative": {"d": 2, "zeta0_order": 4}})
    assert code == 1
    assert any("Z_p-basis" in m for m in d["report"]["messages"])


def test_ambiguous_exit_code():
    code, d = report("tower spans", {"N": 3, "slack": 2, "n_max": 2, "trials": 1})
    assert code == 2 and d["report"]["status"] == "ambiguous"


def test_csv_format_carries_precision():
    code, text = report("tower traces", SMALL, fmt="csv")
    lines = text.splitlines()
    assert lines[0].startswith("# params: ") and '"check": 4' in lines[1]
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[2:]))))
    assert rows[0]["level"] == "1"


def test_deterministic_output(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_max": 2, "trials": 2}))
    outs = []
    for jobs in ("1", "2"):
        out = tmp_path / f"o{jobs}.json"
        assert main(["tower", "spans", "--config", str(cfg), "--out", str(out), "--jobs", jobs]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        RunConfig.from_dict({"p": 4})
    with pytest.raises(ValueError):
        RunConfig.from_dict({"lift": {"coeffs": [0, 9, 0, 1]}})


def test_entry_point_subprocess(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(SMALL))
    res = subprocess.run([sys.executable, "-m", "ltcoleman.cli", "tower", "traces", "--config", str(cfg)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["command"] == "tower traces"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"N": 0}))
    res = subprocess.run([sys.executable, "-m", "ltcoleman.cli", "fg", "build", "--config", str(bad)],
                         capture_output=True, text=True)
    assert res.returncode == 1 and "error" in res.stderr
