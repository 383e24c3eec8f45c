import json
import subprocess
import sys

import numpy as np
import pytest

from pindex.cli import main
from pindex.dataio import dumps, ingest_csv, validate_report, write_dataset_csv
from pindex.dgp import generate_dataset, preset
from pindex.errors import DataError
from pindex.subset import select_best


def test_ingest_small_file(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("y,x1\n1,0\n2,1\n3,2")
    ds = ingest_csv(p, "y")
    assert ds.n == 3 and ds.p == 1
    np.testing.assert_array_equal(ds.y, [1, 2, 3])


def test_blank_trailing_line(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("y,x1\n1,0\n2,1\n3,2\n\n")
    assert ingest_csv(p, "y").n == 3


@pytest.mark.parametrize(
    "text, match",
    [
        ("", "empty"),
        ("y,x1\n1,0\n2\n", "line 3"),
        ("z,x1\n1,0\n", "not found"),
        ("y,x1\n1,a\n2,b\n", "line 2.*line 3"),
    ],
)
def test_ingest_errors(tmp_path, text, match):
    p = tmp_path / "d.csv"
    p.write_text(text)
    with pytest.raises(DataError, match=match):
        ingest_csv(p, "y")


def test_round_trip(tmp_path):
    dgp = preset("example3")
    ds = generate_dataset(dgp, 9)
    p = tmp_path / "ex3.csv"
    write_dataset_csv(ds, p)
    back = ingest_csv(p, "y")
    fam = dgp.family()
    a, b = select_best(ds, fam, "bic"), select_best(back, fam, "bic")
    assert a.model == b.model
    assert b.fit.rss == pytest.approx(a.fit.rss, rel=1e-12)


def run_cli(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, out


def test_pi_command_classifies(tmp_path):
    ds = generate_dataset(preset("example3"), 9)
    p = tmp_path / "ex3.csv"
    write_dataset_csv(ds, p)
    code, out = run_cli(["pi", "--data", str(p), "--response", "y", "--family", "subset"], tmp_path)
    assert code == 0
    report = json.loads(out.read_text())
    validate_report(report)
    pi = report["result"]["pi_report"]["pi"]
    expected = "practically_parametric" if pi >= 1.2 else "practically_nonparametric"
    assert report["result"]["classification"] == expected


def test_simulate_reports_are_byte_identical(tmp_path):
    args = ["simulate", "--preset", "example4", "--reps", "20", "--seed", "7"]
    _, a = run_cli(args, tmp_path, "a.json")
    _, b = run_cli(args + ["--threads", "4"], tmp_path, "b.json")
    assert a.read_bytes() == b.read_bytes()
    validate_report(json.loads(a.read_text()))


@pytest.mark.parametrize(
    "args",
    [
        ["fit", "--preset", "example3"],
        ["bootstrap", "--preset", "example3", "--reps", "5"],
        ["subsample", "--preset", "example3", "--sizes", "100,150", "--reps", "3"],
        ["coverage", "--preset", "example3", "--reps", "5"],
        ["risk", "--preset", "example3", "--reps", "5"],
    ],
)
def test_every_command_validates(args, tmp_path):
    code, out = run_cli(args, tmp_path)
    assert code == 0
    validate_report(json.loads(out.read_text()))


def test_csv_and_plot_outputs(tmp_path):
    rows, plot = tmp_path / "rows.csv", tmp_path / "plot.csv"
    code, _ = run_cli(["simulate", "--preset", "example3", "--reps", "4",
                       "--csv", str(rows), "--plot-data", str(plot)], tmp_path)
    assert code == 0
    assert len(rows.read_text().splitlines()) == 5
    assert plot.read_text().startswith("group,series,percentile,value")


def test_unknown_preset_fails_with_list(capsys):
    code = main(["simulate", "--preset", "nope", "--reps", "0"])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["category"] == "config"
    assert len(err["error"]["messages"]) == 2
    assert "example3" in err["error"]["messages"][0]


def test_missing_file_is_data_error(tmp_path, capsys):
    code = main(["fit", "--data", str(tmp_path / "none.csv"), "--response", "y"])
    assert code == 3


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "pindex.cli", "fit", "--preset", "cubic"],
        capture_output=True, text=True, check=True,
    )
    report = json.loads(proc.stdout)
    assert report["command"] == "fit"
    assert dumps(report) == proc.stdout
