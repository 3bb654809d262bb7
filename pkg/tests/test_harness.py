import csv
import math
import subprocess
import sys

import numpy as np
import pytest

from lisr import cli
from lisr.errors import SolverError
from lisr.harness import (
    CSV_HEADER,
    ExperimentConfig,
    emit_csv,
    emit_plot_script,
    format_float,
    read_csv,
    run_experiment,
)
from lisr.problems import synthetic_logistic, write_libsvm
from lisr.solvers import RunRecord


def rec(method="LISR-1", p=0, err=1.0, **kw):
    base = dict(grad_norm=0.5, wall_seconds=0.0, grad_calls=0, hess_calls=0, skipped_updates=0)
    base.update(kw)
    return RunRecord(method, p, err, **base)


# --- CSV ----------------------------------------------------------------------

def test_format_float():
    assert format_float(1.0) == "1"
    assert format_float(0.1) == "0.1"
    assert format_float(1e-10) == "1e-10"
    assert float(format_float(1 / 3)) == 1 / 3


def test_empty_csv_is_header_only(tmp_path):
    path = tmp_path / "e.csv"
    emit_csv([], path)
    assert path.read_text() == ",".join(CSV_HEADER) + "\n"
    assert read_csv(path) == []


def test_csv_round_trip(tmp_path):
    r = rec("IQN", 3, 1 / 7, grad_norm=2.5e-9, wall_seconds=0.125, grad_calls=30, hess_calls=0, skipped_updates=2)
    emit_csv([r], tmp_path / "r.csv")
    assert read_csv(tmp_path / "r.csv") == [r]


def test_csv_sorted_and_pass_zero_is_one(tmp_path):
    rows = [rec("LISR-k(5)", 1, 0.1), rec("IQN", 1, 0.3), rec("LISR-k(5)", 0), rec("IQN", 0)]
    path = tmp_path / "s.csv"
    emit_csv(rows, path)
    with open(path, newline="") as fh:
        parsed = list(csv.DictReader(fh))
    assert [(r["method"], r["pass"]) for r in parsed] == [("IQN", "0"), ("IQN", "1"),
                                                        ("LISR-k(5)", "0"), ("LISR-k(5)", "1")]
    assert all(r["normalized_error"] == "1" for r in parsed if r["pass"] == "0")


def test_csv_timing_column(tmp_path):
    r = rec(wall_seconds=0.25)
    emit_csv([r], tmp_path / "a.csv", timing=False)
    assert math.isnan(read_csv(tmp_path / "a.csv")[0].wall_seconds)
    emit_csv([r], tmp_path / "b.csv", timing=True)
    assert read_csv(tmp_path / "b.csv")[0].wall_seconds == 0.25


def test_read_csv_rejects_foreign_header(tmp_path):
    (tmp_path / "x.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(tmp_path / "x.csv")


# --- plot script ---------------------------------------------------------------

def test_plot_script_contents_and_stability(tmp_path):
    csv_path = str(tmp_path / "run.csv")
    emit_plot_script(csv_path, tmp_path / "a.py")
    emit_plot_script(csv_path, tmp_path / "b.py")
    text = (tmp_path / "a.py").read_text()
    assert (tmp_path / "b.py").read_bytes() == text.encode()
    assert repr(csv_path) in text
    assert 'set_yscale("log")' in text
    compile(text, "a.py", "exec")


def test_plot_script_renders_png(tmp_path):
    pytest.importorskip("matplotlib")
    emit_csv([rec(p=0), rec(p=1, err=1e-3), rec("IQN", 0), rec("IQN", 1, 0.5)], tmp_path / "run.csv")
    emit_plot_script(str(tmp_path / "run.csv"), tmp_path / "plot.py")
    subprocess.run([sys.executable, str(tmp_path / "plot.py")], check=True, timeout=120)
    assert (tmp_path / "run.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


# --- experiments ---------------------------------------------------------------

def small_quadratic(**kw):
    base = dict(problem="quadratic", n=12, d=8, xi=4.0, seed=3, k=3, max_passes=40)
    base.update(kw)
    return ExperimentConfig(**base)


def test_run_experiment_shared_start(tmp_path):
    res = run_experiment(small_quadratic(out=str(tmp_path / "q.csv")))
    assert set(res.records) == {"LISR-1", "LISR-k(3)", "IQN"}
    for recs in res.records.values():
        assert recs[0].normalized_error == 1.0
        assert all(r.grad_calls == r.pass_index * 12 for r in recs)
        assert all(a.grad_calls <= b.grad_calls and a.skipped_updates <= b.skipped_updates
                   for a, b in zip(recs, recs[1:]))
    assert len(read_csv(tmp_path / "q.csv")) == sum(len(r) for r in res.records.values())


def test_run_experiment_block_not_slower():
    res = run_experiment(small_quadratic(methods=("lisr1", "lisrk")))
    assert len(res.records["LISR-k(3)"]) <= len(res.records["LISR-1"])
    assert res.records["LISR-k(3)"][-1].normalized_error <= 1e-10


def test_run_experiment_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        run_experiment(small_quadratic(out=str(tmp_path / f"{name}.csv"), plot=str(tmp_path / f"{name}.py")))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_run_experiment_logistic_file(tmp_path):
    p = synthetic_logistic(40, 5, 2, 1e-2)
    data = tmp_path / "d.svm"
    data.write_text(write_libsvm(p.features, p.labels))
    res = run_experiment(ExperimentConfig(problem="logistic", data=str(data), lam=1e-2, k=2,
                                          scaling=False, max_passes=60, tol=1e-8))
    assert res.ok
    assert res.records["LISR-k(2)"][-1].normalized_error <= 1e-8


def test_random_start_is_seeded():
    a = run_experiment(small_quadratic(methods=("iqn",), x0="random", max_passes=2, tol=math.inf))
    b = run_experiment(small_quadratic(methods=("iqn",), x0="random", max_passes=2, tol=math.inf))
    assert [r.normalized_error for r in a.records["IQN"]] == [r.normalized_error for r in b.records["IQN"]]


@pytest.mark.parametrize("kw", [
    dict(k=8),
    dict(methods=("bfgs",)),
    dict(problem="cubic"),
    dict(problem="synthetic-logistic", lam=0.0),
    dict(problem="logistic"),
    dict(x0="ones"),
    dict(out="/nonexistent-dir/x.csv"),
    dict(plot="p.py"),
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        small_quadratic(**kw).validate()


def test_solver_failure_carries_method(monkeypatch):
    import lisr.harness as h

    def boom(oracle, cfg, **kw):
        raise SolverError(4, FloatingPointError("overflow"), cfg.label if cfg.method == "iqn" else None)

    monkeypatch.setattr(h, "run", boom)
    with pytest.raises(SolverError) as info:
        run_experiment(small_quadratic(methods=("lisr1",)))
    assert info.value.method == "LISR-1" and "LISR-1: iteration 4" in str(info.value)
    res = run_experiment(small_quadratic(), raise_errors=False)
    assert not res.ok and set(res.errors) == {"LISR-1", "LISR-k(3)", "IQN"}


# --- CLI ------------------------------------------------------------------------

def test_cli_quadratic_writes_outputs(tmp_path, capsys):
    out, plot = tmp_path / "c.csv", tmp_path / "c.py"
    code = cli.main(["quadratic", "--n", "10", "--d", "6", "--k", "2", "--out", str(out), "--plot", str(plot)])
    assert code == 0
    assert out.read_text().startswith(",".join(CSV_HEADER))
    assert repr(str(out)) in plot.read_text()
    assert "LISR-k(2)" in capsys.readouterr().out


def test_cli_logistic_synthetic(capsys):
    code = cli.main(["logistic", "--n", "30", "--d", "5", "--lambda", "1e-2", "--methods", "lisrk,iqn",
                     "--k", "2", "--scaling", "off", "--max-passes", "5"])
    assert code == 0
    assert "IQN" in capsys.readouterr().out


def test_cli_config_error_exit_code(capsys):
    assert cli.main(["quadratic", "--d", "4", "--k", "4"]) == 2
    assert "k must lie" in capsys.readouterr().err


def test_cli_missing_data_file(tmp_path, capsys):
    assert cli.main(["logistic", "--data", str(tmp_path / "missing.svm")]) == 2


def test_cli_solver_failure_exit_code(monkeypatch, capsys):
    import lisr.harness as h

    def boom(oracle, cfg, **kw):
        raise SolverError(0, np.linalg.LinAlgError("not SPD"), cfg.label)

    monkeypatch.setattr(h, "run", boom)
    assert cli.main(["quadratic", "--n", "4", "--d", "3", "--k", "1"]) == 1
    assert "FAILED" in capsys.readouterr().err


def test_cli_rejects_bad_flags():
    with pytest.raises(SystemExit):
        cli.main(["quadratic", "--methods", "newton"])
    with pytest.raises(SystemExit):
        cli.main(["quadratic", "--scaling", "maybe"])


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "lisr", "quadratic", "--n", "5", "--d", "4", "--k", "2",
                           "--max-passes", "3", "--out", str(out)], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
