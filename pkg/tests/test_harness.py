import csv
import json

import numpy as np
import pytest

from oracles import cumulative_error_curve
from ncsvm import cli
from ncsvm.baselines import GridSpec
from ncsvm.harness import (CURVE_HEADER, SUMMARY_HEADER, ExperimentConfig, bound_curve,
                           emit_report, load_report, parse_grid_file, run_experiment)

SMALL_GRID = GridSpec((0.5, 8.0), (0.05, 0.5))


@pytest.fixture(scope="module")
def synth_csv(tmp_path_factory):
    rng = np.random.default_rng(42)
    y = np.where(np.arange(120) % 3 == 0, -1, 1)
    X = rng.normal(size=(120, 3)) + 0.8 * y[:, None]
    path = tmp_path_factory.mktemp("data") / "synth.csv"
    with open(path, "w") as fh:
        for label, row in zip(y, X):
            fh.write(",".join(["+1" if label > 0 else "-1"] + [repr(float(v)) for v in row]) + "\n")
    return path


@pytest.fixture(scope="module")
def report(synth_csv):
    return run_experiment(ExperimentConfig(data_path=str(synth_csv), grid=SMALL_GRID,
                                           outer_folds=4, inner_cv_folds=3))


def test_bound_curve_examples():
    assert bound_curve([(1.0, 0), (2.0, 1)]).points == [(1.0, 0.0), (2.0, 0.5)]
    assert bound_curve([(1.0, 1), (1.0, 0)]).points == [(1.0, 0.5)]
    assert bound_curve([{"bound": 3.0, "error": 1}]).points == [(3.0, 1.0)]
    with pytest.raises(ValueError):
        bound_curve([])


def test_bound_curve_brute_force():
    rng = np.random.default_rng(0)
    records = [(float(rng.integers(0, 15)) / 4, int(rng.integers(0, 2))) for _ in range(100)]
    got = bound_curve(records).points
    ref = cumulative_error_curve(records)
    assert [b for b, _ in got] == [b for b, _ in ref]
    np.testing.assert_allclose([e for _, e in got], [e for _, e in ref], rtol=0, atol=1e-15)
    assert got[-1][1] == sum(e for _, e in records) / 100


def test_report_accounting(report):
    K = SMALL_GRID.K
    for f in report.folds:
        assert not f["skipped"]
        assert f["trained_models"] == {"nonconformity": K, "cv": 3 * K + 1, "linf": K}
        h = f["hashes"]
        assert h["nonconformity"] == h["cv"] == h["linf"]
    assert report.curve[-1][1] == report.pooled_error
    assert report.pooled_error == sum(r["error"] for r in report.records) / len(report.records)
    assert len(report.records) == report.n_samples == 120
    nc = report.strategies["nonconformity"]
    assert len(nc["fold_errors"]) == 4
    assert nc["std"] == pytest.approx(np.std(nc["fold_errors"], ddof=1))
    for r in report.records:
        assert r["prediction"] == -r["y_crit"] and r["bound"] >= r["epsilon_crit"]


def test_deterministic(synth_csv, report):
    again = run_experiment(ExperimentConfig(data_path=str(synth_csv), grid=SMALL_GRID,
                                            outer_folds=4, inner_cv_folds=3, jobs=2))

    def strip(r):
        d = r.to_dict()
        for s in d["strategies"].values():
            s.pop("wall_seconds")
        return d

    assert strip(again) == strip(report)


def test_single_model_nonconformity_only(synth_csv):
    rep = run_experiment(ExperimentConfig(data_path=str(synth_csv),
                                          grid=GridSpec((1.0,), (0.5,)),
                                          outer_folds=3, strategies=("nonconformity",)))
    assert list(rep.strategies) == ["nonconformity"]
    assert all(r["k_crit"] == 0 for r in rep.records)
    assert rep.strategies["nonconformity"]["trained_models"] == 3


def test_emit_and_reload(report, tmp_path):
    (json_path,) = emit_report(report, tmp_path, "json")
    assert load_report(json_path).to_dict() == json.loads(json.dumps(report.to_dict()))
    summary, curve = emit_report(report, tmp_path, "csv")
    rows = list(csv.reader(open(summary)))
    assert tuple(rows[0]) == SUMMARY_HEADER and len(rows) == 4
    assert float(rows[1][2]) == report.strategies[rows[1][1]]["mean_error"]
    rows = list(csv.reader(open(curve)))
    assert tuple(rows[0]) == CURVE_HEADER
    assert float(rows[-1][1]) == report.pooled_error
    with pytest.raises(ValueError):
        emit_report(report, tmp_path, "xml")


@pytest.mark.parametrize("kwargs", [{"strategies": ()}, {"strategies": ("lasso",)},
                                    {"delta": 0.0}, {"outer_folds": 1},
                                    {"linf_measure": "manhattan"}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(data_path="x.csv", **kwargs)


def test_parse_grid_file(tmp_path):
    p = tmp_path / "grid.txt"
    p.write_text("# small grid\nC = 2^-1, 4\ngamma = 0.5\n")
    g = parse_grid_file(p)
    assert g.C_values == (0.5, 4.0) and g.gamma_values == (0.5,)
    p.write_text("C = abc\n")
    with pytest.raises(ValueError, match=":1:"):
        parse_grid_file(p)
    p.write_text("sigma = 1\n")
    with pytest.raises(ValueError, match="unknown key"):
        parse_grid_file(p)


def test_cli_run(synth_csv, tmp_path, capsys):
    grid = tmp_path / "grid.txt"
    grid.write_text("C = 1\ngamma = 0.5\n")
    out = tmp_path / "out"
    code = cli.main(["run", "--data", str(synth_csv), "--out", str(out), "--grid", str(grid),
                     "--folds", "3", "--inner-folds", "3", "--strategies", "nonconformity,cv"])
    assert code == 0
    assert "nonconformity:" in capsys.readouterr().out
    assert {p.name for p in out.iterdir()} == {"report.json", "summary.csv", "curve.csv"}


def test_cli_errors(tmp_path, capsys):
    assert cli.main(["run", "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 1
    assert "ncsvm: error:" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        cli.main(["run", "--data", "x", "--out", "y", "--strategies", "bogus"])
    assert exc.value.code == 2
