"""Command-line interface: outputs, exit codes, determinism, figures."""

import json

import pytest

from netclt.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_theory_table_values(capsys):
    code, out, _ = run_cli(
        capsys,
        "theory", "--model", "nsw", "--degree", "const:5",
        "--eps", "0.05", "--pI", "0.3", "--period", "const",
    )
    assert code == 0
    doc = json.loads(out)
    assert round(doc["rho"], 4) == 0.5384
    assert round(doc["sigma2"], 4) == 2.1187
    assert doc["variant"] == "nsw_epidemic"
    assert abs(doc["residual"]) < 1e-10
    assert set(doc) == {
        "regime", "z", "tau", "rho", "h", "R0", "pC", "pmaj", "sigma2", "variant", "residual",
    }


def test_theory_subcritical_exit_code(capsys):
    code, _, err = run_cli(
        capsys, "theory", "--model", "nsw", "--degree", "const:2", "--mode", "bond", "--pi", "0.3",
    )
    assert code == 1
    assert "subcritical" in err


def test_theory_giant(capsys):
    code, out, _ = run_cli(
        capsys, "theory", "--model", "mr", "--degree", "geom:0.166667", "--mode", "giant",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["rho"] > 0 and doc["sigma2"] > 0
    assert abs(doc["residual"]) < 1e-10


def test_theory_out_file(tmp_path, capsys):
    code, out, _ = run_cli(
        capsys,
        "theory", "--model", "nsw", "--degree", "poisson:5", "--mode", "site",
        "--pi", "0.3", "--out", str(tmp_path / "th"),
    )
    assert code == 0
    assert json.loads((tmp_path / "th.json").read_text()) == json.loads(out)


def test_percolate_site_mr(capsys):
    code, out, _ = run_cli(
        capsys,
        "percolate", "--model", "mr", "--degree", "geom:0.1667", "--kind", "site",
        "--pi", "0.5", "--n", "250", "--reps", "60", "--seed", "4",
    )
    assert code == 0
    doc = json.loads(out)
    assert 0 < doc["mean_frac_hat"] < 1
    assert doc["clt_mean"] == pytest.approx(0.5 * doc["rho"], abs=1e-12)


def test_theory_usage_errors(capsys):
    code, _, err = run_cli(capsys, "theory", "--model", "nsw", "--degree", "zipf:3", "--pI", "0.3")
    assert code == 2
    code, _, err = run_cli(
        capsys,
        "theory", "--model", "nsw", "--degree", "const:5",
        "--pI", "0.3", "--lambda", "0.9", "--period", "const:1",
    )
    assert code == 2 and "disagree" in err


def test_simulate_deterministic_files(tmp_path, capsys):
    args = [
        "simulate", "--model", "nsw", "--degree", "geom:0.1667", "--n", "200",
        "--eps", "0.05", "--pI", "0.3", "--period", "const",
        "--reps", "500", "--seed", "42",
    ]
    code, out1, _ = run_cli(capsys, *args, "--out", str(tmp_path / "a"))
    assert code == 0
    code, out2, _ = run_cli(capsys, *args, "--out", str(tmp_path / "b"))
    assert out1 == out2
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    doc = json.loads(out1)
    assert set(doc) == {
        "n", "reps", "seed", "rho_hat", "sigma2_hat",
        "major_frac", "rho_hat_major", "sigma2_hat_major",
    }
    header = (tmp_path / "a.csv").read_text().splitlines()[0]
    assert header == "rep,T,V,major"


def test_simulate_thread_count_invariance(tmp_path, capsys):
    base = [
        "simulate", "--model", "nsw", "--degree", "poisson:5", "--n", "150",
        "--eps", "0.05", "--pI", "0.3", "--period", "const", "--reps", "3000",
        "--seed", "7",
    ]
    _, out1, _ = run_cli(capsys, *base, "--threads", "1", "--out", str(tmp_path / "t1"))
    _, out4, _ = run_cli(capsys, *base, "--threads", "4", "--out", str(tmp_path / "t4"))
    assert out1 == out4
    assert (tmp_path / "t1.csv").read_bytes() == (tmp_path / "t4.csv").read_bytes()


def test_simulate_rejects_zero_reps(capsys):
    code, _, _ = run_cli(
        capsys,
        "simulate", "--model", "nsw", "--degree", "const:5", "--n", "100",
        "--eps", "0.05", "--pI", "0.3", "--reps", "0",
    )
    assert code == 2


def test_simulate_csv_format_stdout(capsys):
    code, out, _ = run_cli(
        capsys,
        "simulate", "--model", "mr", "--degree", "const:5", "--n", "80",
        "--a", "1", "--pI", "0.5", "--period", "const", "--reps", "4",
        "--seed", "1", "--format", "csv",
    )
    assert code == 0
    assert out.splitlines()[0] == "rep,T,V,major"
    assert len(out.splitlines()) == 5


def test_simulate_plot_written(tmp_path, capsys):
    code, _, _ = run_cli(
        capsys,
        "simulate", "--model", "nsw", "--degree", "geom:0.1667", "--n", "100",
        "--eps", "0.05", "--pI", "0.3", "--period", "zeroinf", "--reps", "300",
        "--seed", "2", "--out", str(tmp_path / "fig"), "--plot",
    )
    assert code == 0
    png = tmp_path / "fig.png"
    assert png.exists() and png.stat().st_size > 1000


def test_seed_env_fallback(tmp_path, capsys, monkeypatch):
    args = [
        "simulate", "--model", "nsw", "--degree", "const:5", "--n", "100",
        "--eps", "0.05", "--pI", "0.3", "--reps", "50",
    ]
    monkeypatch.setenv("NETCLT_SEED", "99")
    _, out_env, _ = run_cli(capsys, *args)
    monkeypatch.delenv("NETCLT_SEED")
    _, out_flag, _ = run_cli(capsys, *args, "--seed", "99")
    assert json.loads(out_env) == json.loads(out_flag)


def test_reproduce_table(tmp_path, capsys):
    code, out, _ = run_cli(
        capsys,
        "reproduce-table", "--degree", "const:5", "--n-list", "200",
        "--reps", "300", "--seed", "5", "--out", str(tmp_path / "tab"), "--plot",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "degree,n,rho_const,sigma2_const,rho_zeroinf,sigma2_zeroinf"
    assert len(lines) == 3  # n=200 row plus the asymptotic row
    inf_row = lines[-1].split(",")
    assert inf_row[1] == "inf"
    assert float(inf_row[2]) == pytest.approx(0.5384, abs=5e-4)
    assert float(inf_row[3]) == pytest.approx(2.1187, abs=5e-4)
    assert float(inf_row[5]) == pytest.approx(6.5200, abs=5e-4)
    assert (tmp_path / "tab.csv").exists()
    assert (tmp_path / "tab_const_5.png").exists()


def test_reproduce_table_power_row(capsys):
    code, out, _ = run_cli(
        capsys,
        "reproduce-table", "--degree", "power:1:13.796", "--n-list", "200",
        "--reps", "100", "--seed", "5",
    )
    assert code == 0
    inf_row = out.strip().splitlines()[-1].split(",")
    assert float(inf_row[2]) == pytest.approx(0.5000, abs=5e-4)
    assert float(inf_row[3]) == pytest.approx(0.4180, abs=5e-4)
    assert float(inf_row[5]) == pytest.approx(1.6372, abs=5e-4)


def test_percolate_bond_and_summary(tmp_path, capsys):
    code, out, _ = run_cli(
        capsys,
        "percolate", "--model", "nsw", "--degree", "poisson:5", "--kind", "bond",
        "--pi", "0.5", "--n", "300", "--reps", "150", "--seed", "11",
        "--out", str(tmp_path / "perc"), "--plot",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["sigma2"] > 0
    assert abs(doc["mean_frac_hat"] - doc["clt_mean"]) < 0.05
    csv = (tmp_path / "perc.csv").read_text().splitlines()
    assert csv[0] == "rep,C" and len(csv) == 151
    assert (tmp_path / "perc.png").exists()


def test_percolate_pi_one_is_giant(capsys):
    code, out, _ = run_cli(
        capsys,
        "percolate", "--model", "mr", "--degree", "const:5", "--kind", "bond",
        "--pi", "1.0", "--n", "400", "--reps", "40", "--seed", "3",
    )
    assert code == 0
    doc = json.loads(out)
    # constant degree 5 at full retention: graph is essentially connected
    assert doc["mean_frac_hat"] > 0.99
    assert "theory_error" in doc  # giant theory needs degree-1 mass


def test_verify_quick(capsys):
    code, out, err = run_cli(
        capsys, "verify", "--suite", "quadrature", "--points", "6",
    )
    assert code == 0
    reports = json.loads(out)
    assert len(reports) == 6
    assert all(r["ok"] for r in reports)
    assert "passed" in err


def test_verify_perturbation_hook(capsys):
    code, out, err = run_cli(
        capsys, "verify", "--suite", "quadrature", "--points", "3",
        "--perturb-sigma2", "1e-3",
    )
    assert code == 1
    assert "failed" in err


def test_verify_empty_grid(capsys):
    code, _, err = run_cli(capsys, "verify", "--suite", "quadrature", "--points", "0")
    assert code == 0
    assert "empty" in err
