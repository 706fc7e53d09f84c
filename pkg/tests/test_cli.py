import json

import pytest

from bondimpute import bundled_path
from bondimpute.cli import main
from bondimpute.data_io import read_dataset
from bondimpute.synth import GRID

HEADER = "auction_date,maturity_value,maturity_unit,coupon,price,yield\n"


def run(*argv):
    return main([str(a) for a in argv])


def test_synth_determinism_and_grid(tmp_path):
    assert run("synth", "--rows", 12, "--seed", 4, "--out", tmp_path / "a.csv") == 0
    assert run("synth", "--rows", 12, "--seed", 4, "--out", tmp_path / "b.csv") == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    d = read_dataset(tmp_path / "a.csv")
    assert [r.maturity for r in d.records] == list(GRID) and len(d.dates()) == 1
    assert run("synth", "--rows", 0, "--seed", 4, "--out", tmp_path / "c.csv") == 2


def test_curve_on_every_date(tmp_path, capsys):
    run("synth", "--rows", 60, "--seed", 8, "--out", tmp_path / "p.csv")
    for day in read_dataset(tmp_path / "p.csv").dates():
        assert run("curve", "--input", tmp_path / "p.csv", "--date", day, "--out", tmp_path / "c.csv") == 0
        err = float(capsys.readouterr().out.split("max repricing error:")[1])
        assert err <= 1e-10
    assert run("curve", "--input", tmp_path / "p.csv", "--date", "1999-01-01", "--out", tmp_path / "c.csv") == 2


def test_curve_flat_par(tmp_path):
    rows = "".join(f"2020-01-01,{n},years,10,100,10\n" for n in range(1, 6))
    (tmp_path / "par.csv").write_text(HEADER + rows)
    assert run("curve", "--input", tmp_path / "par.csv", "--out", tmp_path / "c.csv") == 0
    zs = [float(line.split(",")[2]) for line in (tmp_path / "c.csv").read_text().splitlines()[1:]]
    assert zs[0] == 10.0 and all(abs(z - 10.0) < 1e-10 for z in zs)


def test_curve_missing_node(tmp_path, capsys):
    rows = "2020-01-01,1,years,10,100,10\n2020-01-01,3,years,10,100,10\n"
    (tmp_path / "gap.csv").write_text(HEADER + rows)
    assert run("curve", "--input", tmp_path / "gap.csv", "--out", tmp_path / "c.csv") == 2
    err = capsys.readouterr().err
    assert "incomplete series" in err and "impute" in err


def test_mask_command(tmp_path, capsys):
    run("synth", "--rows", 20, "--seed", 1, "--out", tmp_path / "p.csv")
    args = ["--input", tmp_path / "p.csv", "--seed", 3, "--out-masked", tmp_path / "m.csv", "--out-plan", tmp_path / "plan.csv"]
    assert run("mask", "--rate", 0.35, *args) == 0
    assert "hidden cells: 21" in capsys.readouterr().out
    assert run("mask", "--rate", 1.2, *args) == 2
    assert "missing_rate" in capsys.readouterr().err
    args[1] = tmp_path / "m.csv"
    assert run("mask", "--rate", 0.35, *args) == 2
    assert "dataset not complete" in capsys.readouterr().err


def test_impute_command(tmp_path, capsys):
    (tmp_path / "g.csv").write_text(HEADER + "2020-01-01,2,years,5,99,5.1\n2020-01-08,2,years,NA,98,5.2\n")
    out = tmp_path / "o.csv"
    assert run("impute", "--input", tmp_path / "g.csv", "--method", "previous", "--out", out) == 0
    assert out.read_text().splitlines()[2].split(",")[3] == "5.0"
    diag = json.loads((tmp_path / "o.csv.diagnostics.json").read_text())
    assert diag["method"] == "previous" and diag["residual_missing"] == 0
    capsys.readouterr()
    assert run("impute", "--input", tmp_path / "g.csv", "--method", "knn", "--out", out) == 2
    assert "insufficient donors" in capsys.readouterr().err
    assert run("impute", "--input", tmp_path / "g.csv", "--method", "prevous", "--out", out) == 2
    assert "linear_regression" in capsys.readouterr().err


def test_io_errors_exit_1(tmp_path):
    assert run("curve", "--input", tmp_path / "absent.csv", "--out", tmp_path / "c.csv") == 1
    run("synth", "--rows", 12, "--seed", 1, "--out", tmp_path / "p.csv")
    assert run("curve", "--input", tmp_path / "p.csv", "--out", tmp_path / "no" / "dir" / "c.csv") == 1


def test_bad_input_exit_2(tmp_path):
    (tmp_path / "bad.csv").write_text("nonsense\n")
    assert run("curve", "--input", tmp_path / "bad.csv", "--out", tmp_path / "c.csv") == 2


def test_benchmark_config_errors(tmp_path):
    (tmp_path / "c.cfg").write_text("seed = 1\nrepetitions = 2\n")
    code = run("benchmark", "--input", "bundled:synthetic_panel", "--config", tmp_path / "c.cfg", "--out-dir", tmp_path / "o")
    assert code == 2


def test_benchmark_and_inspect(tmp_path, capsys):
    (tmp_path / "c.cfg").write_text("seed = 3\nrepetitions = 3\nmethods = previous, next\n")
    run("synth", "--rows", 120, "--seed", 2, "--out", tmp_path / "p.csv")
    assert run("benchmark", "--input", tmp_path / "p.csv", "--config", tmp_path / "c.cfg", "--out-dir", tmp_path / "o") == 0
    table = capsys.readouterr().out.splitlines()
    assert table[0].split() == ["Method", "Variable", "p-value", "Verdict"] and len(table) == 8
    assert run("report-inspect", "--dir", tmp_path / "o") == 0
    assert "price by median MAE" in capsys.readouterr().out
    assert run("inspect", "--dir", tmp_path / "missing") == 1


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["plot"])
    assert exc.value.code == 2


def test_bundled_data_exists():
    assert len(read_dataset(bundled_path("synthetic_panel"))) == 500
