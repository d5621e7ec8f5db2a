import csv

import pytest

from twobarrier import cli, scenarios

SWEEP = """[scenario]
name = small
mode = times-vs-k
two_kappa0_d = 9.42477796076938
L_over_d = 0.5
k_min = 0.05
k_max = 3.0
n_points = 700
"""

LSWEEP = """[scenario]
name = lsweep
mode = times-vs-L
two_kappa0_d = 9.42477796076938
k_over_kappa0 = 0.97
L_max = 4
n_points = 81
"""


def _write(tmp_path, text, name="s.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_list_builtins(capsys):
    assert cli.main(["list-builtins"]) == 0
    out = capsys.readouterr().out.split()
    for i in range(1, 8):
        assert f"fig{i}" in out


def test_sweep_outputs(tmp_path, capsys):
    cfg = _write(tmp_path, SWEEP)
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = _rows(tmp_path / "o" / "small.csv")
    assert len(rows) == 700
    assert {r["flags"] for r in rows} <= {"ok", "near-resonance", "quadrature-warn", "ocs-invalid"}
    assert "tau_as/tau0" in rows[0] and "resonance_flag" in rows[0]
    meta = (tmp_path / "o" / "small.meta").read_text()
    for key in ("version", "resolved.V0", "resolved.tau_0", "resonances", "config.n_points"):
        assert f"{key} = " in meta
    plot = (tmp_path / "o" / "small.gp").read_text()
    assert "small.csv" in plot and "set datafile separator ','" in plot


def test_sweep_is_deterministic_across_threads(tmp_path):
    cfg = _write(tmp_path, SWEEP)
    cli.main(["run", cfg, "--out", str(tmp_path / "a"), "--threads", "1"])
    cli.main(["run", cfg, "--out", str(tmp_path / "b"), "--threads", "4"])
    a = (tmp_path / "a" / "small.csv").read_bytes()
    b = (tmp_path / "b" / "small.csv").read_bytes()
    assert a == b


def test_L_sweep(tmp_path):
    cfg = _write(tmp_path, LSWEEP)
    assert cli.main(["run", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "lsweep.csv")
    assert len(rows) == 81
    tr = [float(r["tau_tr_dwell"]) for r in rows]
    assert all(b > a for a, b in zip(tr, tr[1:]))


def test_invalid_config_lists_fields(tmp_path, capsys):
    cfg = _write(tmp_path, "[scenario]\nmode = times-vs-q\nd = -1\nbogus = 2\nk_min = x\n")
    assert cli.main(["run", cfg, "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    for field in ("mode:", "d:", "bogus:", "k_min:", "V0:"):
        assert field in err


def test_unknown_scenario(tmp_path, capsys):
    assert cli.main(["run", "fig99", "--out", str(tmp_path)]) == 2
    assert "neither a builtin" in capsys.readouterr().err


def test_builtins_are_valid():
    for sc in scenarios.BUILTINS.values():
        sc.validate()
        sys, notes = scenarios.resolve(sc)
        assert sys.D > 0 and "preset" in notes


def test_fig7_builtin_resolves_calibrated_mass():
    sys, notes = scenarios.resolve(scenarios.BUILTINS["fig7"])
    assert notes["mass_fraction"] == pytest.approx(0.04886, rel=1e-3)
    assert sys.b2 == pytest.approx(215.0)


def test_verify_fast_exit_status(capsys):
    code = cli.main(["verify", "--fast"])
    lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("[")]
    assert lines
    failed = any(ln.startswith("[FAIL]") for ln in lines)
    assert code == (1 if failed else 0)
    assert not any(" C2 " in ln for ln in lines)
