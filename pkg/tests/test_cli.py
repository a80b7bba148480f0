from __future__ import annotations

import json
import subprocess
import sys

import pytest

from ferrospot import __version__
from ferrospot.cli import EXIT_CONDITION, EXIT_NO_BIFURCATION, EXIT_USAGE, load_config, main


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and __version__ in out


def test_coeffs_csv(capsys):
    code, out, _ = run(capsys, "coeffs", "--D", "1", "--M0", "0.6")
    assert code == 0
    header, values = out.strip().splitlines()
    row = dict(zip(header.split(","), values.split(",")))
    assert float(row["c3"]) == pytest.approx(-25.025579884772155, rel=1e-12)
    assert float(row["kD"]) == pytest.approx(3.6315597305401368, rel=1e-13)


def test_json_output(capsys):
    code, out, _ = run(capsys, "--format", "json", "spectrum", "--D", "1", "--M0", "0.6", "--nmax", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"] == ["n", "lambda", "source", "branch"]
    assert len(doc["rows"]) == 3
    assert doc["meta"]["kD"] == pytest.approx(3.6315597305401368, rel=1e-13)


def test_locus_residuals(capsys):
    code, out, _ = run(capsys, "locus", "--kd", "0.5", "--kd", "3")
    assert code == 0
    lines = [l for l in out.splitlines() if l and not l.startswith("#")]
    assert len(lines) == 3
    for line in lines[1:]:
        f, df = map(float, line.split(",")[3:])
        assert abs(f) < 1e-10 and abs(df) < 1e-10


def test_deterministic_output(capsys):
    args = ("profile", "--pattern", "ringUp", "--eps", "1e-4", "--D", "1", "--M0", "0.6", "--npts", "300")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    assert "Rescaling" in first


def test_classify_parallel_matches_serial(capsys):
    base = ("classify", "--Dmin", "0.5", "--Dmax", "5", "--M0min", "0.3", "--M0max", "0.8", "--grid", "4x5")
    _, serial, _ = run(capsys, *base)
    _, parallel, _ = run(capsys, *base, "--workers", "4")
    assert serial == parallel
    assert "A+B-R+R-" in serial


def test_envelope_command(capsys):
    code, out, _ = run(capsys, "envelope", "--npts", "5")
    assert code == 0
    assert "# q0=2.17985812" in out


def test_exit_no_bifurcation(capsys):
    code, _, err = run(capsys, "coeffs", "--D", "1", "--M0", "0.2")
    assert code == EXIT_NO_BIFURCATION
    assert "no Hamiltonian-Hopf point" in err


def test_exit_condition(capsys):
    assert run(capsys, "profile", "--pattern", "ringUp", "--eps", "1e-4", "--D", "1", "--M0", "0.5")[0] \
        == EXIT_CONDITION
    assert run(capsys, "envelope", "--c3", "1")[0] == EXIT_CONDITION
    # spot B region ordering needs much smaller eps
    assert run(capsys, "profile", "--pattern", "spotBDown", "--eps", "1e-4", "--D", "1", "--M0", "0.6")[0] \
        == EXIT_CONDITION


@pytest.mark.parametrize("args", [
    ("coeffs", "--D", "1"),
    ("coeffs", "--D", "-1", "--M0", "0.5"),
    ("profile", "--pattern", "hexagon", "--eps", "1e-4", "--D", "1", "--M0", "0.6"),
    ("spectrum", "--D", "1", "--mu", "2", "--M0", "0.5"),
    ("classify", "--grid", "ax3"),
    ("nosuchcommand",),
])
def test_exit_usage(capsys, args):
    assert run(capsys, *args)[0] == EXIT_USAGE


def test_config_file(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"format": "json", "delta0": 0.3}))
    monkeypatch.setenv("FERROSPOT_CONFIG", str(cfg))
    assert load_config().delta0 == 0.3
    code, out, _ = run(capsys, "coeffs", "--D", "1", "--M0", "0.5")
    assert code == 0 and "c3" in json.loads(out)["columns"]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "coeffs", "--D", "1", "--M0", "0.5")[0] == EXIT_USAGE


def test_envelope_cache_env(tmp_path, capsys, monkeypatch):
    cache = tmp_path / "env.json"
    monkeypatch.setenv("FERROSPOT_ENVELOPE_CACHE", str(cache))
    code, first, _ = run(capsys, "envelope", "--npts", "4")
    assert code == 0 and cache.exists()
    _, second, _ = run(capsys, "envelope", "--npts", "4")
    assert first == second


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "ferrospot", "coeffs", "--D", "1", "--M0", "0.2"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_NO_BIFURCATION
