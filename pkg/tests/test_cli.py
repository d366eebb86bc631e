import json
import subprocess
import sys

import numpy as np

from dbarprod.cli import (EXIT_FAIL, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, RunConfig,
                          config_from_dict, convergence_table, convergence_verdict, main)

FAST = ["--spacing", "0.5", "--standoff", "0.1"]


def run(tmp_path, *argv):
    return main([*argv, "--output-dir", str(tmp_path)])


def test_solve_polyconj(tmp_path):
    assert run(tmp_path, "solve", "polyconj", *FAST) == EXIT_OK
    rows = np.loadtxt(tmp_path / "solve-polyconj.csv", delimiter=",", skiprows=1)
    z1 = rows[:, 0] + 1j * rows[:, 1]
    z2 = rows[:, 2] + 1j * rows[:, 3]
    u = rows[:, 4] + 1j * rows[:, 5]
    assert np.max(np.abs(u - np.conj(z1 * z2))) < 1e-3
    head = (tmp_path / "solve-polyconj.csv").read_text().splitlines()[0]
    assert head == "re z1,im z1,re z2,im z2,re u,im u"
    man = json.loads((tmp_path / "solve-polyconj.manifest.json").read_text())
    assert {"config_hash", "quadrature", "wall_time_s"} <= set(man)


def test_solve_02_and_params(tmp_path):
    assert run(tmp_path, "solve", "const02", *FAST) == EXIT_OK
    assert run(tmp_path, "solve", "holder-cone", "--param", "alpha=0.4", *FAST) == EXIT_OK
    assert run(tmp_path, "solve", "holder-cone", "--param", "beta=1", *FAST) == EXIT_USAGE


def test_unknown_form_is_usage_error(tmp_path, capsys):
    assert run(tmp_path, "solve", "nope") == EXIT_USAGE
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == EXIT_USAGE and "nope" in err["message"]
    assert json.loads((tmp_path / "error.json").read_text())["error"] == "UsageError"


def test_empty_grid_surfaced_verbatim(tmp_path, capsys):
    assert run(tmp_path, "solve", "polyconj", "--standoff", "1.5") == EXIT_NUMERIC
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "EmptyGridError"
    assert "no interior lattice point" in err["message"]


def test_standoff_rule_enforced(tmp_path):
    assert run(tmp_path, "solve", "polyconj", "--boundary-nodes", "32",
               "--standoff", "0.1") == EXIT_USAGE


def test_verify_threshold_breach(tmp_path):
    assert run(tmp_path, "verify", "pompeiu", *FAST) == EXIT_OK
    assert run(tmp_path, "verify", "pompeiu", "--threshold", "0", *FAST) == EXIT_FAIL
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["passed"] is False and len(rep["reports"]) == 3


def test_verify_unknown_identity(tmp_path):
    assert run(tmp_path, "verify", "bogus") == EXIT_USAGE


def test_holder_command(tmp_path, capsys):
    assert run(tmp_path, "holder", "polyconj", "--target", "f1", *FAST) == EXIT_OK
    out = json.loads((tmp_path / "holder-polyconj-f1.json").read_text())
    assert out["full"] > 0 and out["pair_count"] > 0


def test_kerzman_example(tmp_path):
    assert run(tmp_path, "example", "kerzman", "--plot") == EXIT_OK
    rep = json.loads((tmp_path / "example-kerzman.json").read_text())
    assert rep["verdicts"]["alpha_prime_increasing"]
    assert (tmp_path / "example-kerzman.gp").read_text().startswith("set logscale")
    assert len((tmp_path / "example-kerzman.csv").read_text().splitlines()) == 7


def test_kerzman_bad_exponent(tmp_path):
    assert run(tmp_path, "example", "kerzman", "--alpha-prime", "0.5") == EXIT_USAGE
    assert run(tmp_path, "example", "kerzman", "--alpha-prime", "0.3") == EXIT_USAGE


def test_tumanov_bad_epsilons(tmp_path):
    assert run(tmp_path, "example", "tumanov", "--epsilons", "0.01", "0.1") == EXIT_USAGE


def test_convergence_gate(tmp_path):
    assert run(tmp_path, "convergence") == EXIT_OK
    rows = convergence_table(RunConfig())
    assert convergence_verdict(rows)
    assert not convergence_verdict([(16, 1e-2), (32, 5e-3), (64, 1e-13)])


def test_config_files(tmp_path):
    toml = tmp_path / "run.toml"
    toml.write_text('spacing = 0.5\nstandoff = 0.15\n[quadrature]\nboundary_nodes = 256\n[thresholds]\npompeiu = 0.5\n')
    assert run(tmp_path, "verify", "pompeiu", "--config", str(toml)) == EXIT_OK
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"spacingg": 0.5}))
    assert run(tmp_path, "solve", "polyconj", "--config", str(bad)) == EXIT_USAGE
    assert run(tmp_path, "solve", "polyconj", "--config", str(tmp_path / "missing.toml")) == EXIT_USAGE


def test_config_hash_tracks_every_field():
    base = RunConfig()
    h = base.digest()
    assert RunConfig().digest() == h
    variants = [config_from_dict({"spacing": 0.3}), config_from_dict({"workers": 2}),
                config_from_dict({"quadrature": {"boundary_nodes": 1024}}),
                config_from_dict({"kerzman": {"z2": 0.4}}),
                config_from_dict({"slices": [{"kind": "disc"}, {"kind": "ellipse"}]})]
    assert len({v.digest() for v in variants} | {h}) == len(variants) + 1


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("DBARPROD_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["solve", "polyconj", *FAST]) == EXIT_OK
    assert (tmp_path / "env" / "solve-polyconj.csv").exists()


def test_csv_identical_across_workers(tmp_path):
    blobs = []
    for w in (1, 4, 8):
        d = tmp_path / f"w{w}"
        assert main(["solve", "gauss-bump", *FAST, "--workers", str(w),
                     "--output-dir", str(d)]) == EXIT_OK
        blobs.append((d / "solve-gauss-bump.csv").read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]


def test_console_entry_point(tmp_path):
    p = subprocess.run([sys.executable, "-m", "dbarprod.cli", "--version"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout.strip()
    p = subprocess.run([sys.executable, "-m", "dbarprod.cli", "solve"], capture_output=True,
                       text=True)
    assert p.returncode == EXIT_USAGE
