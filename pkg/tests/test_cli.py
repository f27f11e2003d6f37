import csv
import io
import json

import pytest

from crnrob.cli import PlotData, RunConfig, UsageError, main, parse_grid, parse_x0, run
from crnrob.fixtures import load_fixture

BAD = "species: X\nX -> Y ; k\nX -> ; -1\n"


def call(**kw):
    out, err = io.StringIO(), io.StringIO()
    status = run(RunConfig(**kw), out, err)
    return status, out.getvalue(), err.getvalue()


def test_parse_builtin_round_trip():
    status, out, _ = call(command="parse", network="builtin:archetypal_mod")
    assert status == 0
    assert "species: X, Y" in out


def test_laws_text_and_json():
    status, out, _ = call(command="laws", network="builtin:archetypal_mod")
    assert status == 0 and "X + Y = 2" in out
    status, out, _ = call(command="laws", network="builtin:futile_cycle", format="json")
    payload = json.loads(out)
    assert payload["schema_version"] == 1
    assert len(payload["positive"]) == 3


def test_parse_errors_exit_2_with_positions(tmp_path):
    path = tmp_path / "bad.crn"
    path.write_text(BAD)
    status, out, err = call(command="parse", network=str(path), format="json")
    assert status == 2
    assert "bad.crn:2:" in err and "bad.crn:3:" in err
    payload = json.loads(out)
    assert payload["error"]["kind"] == "parse"
    assert len(payload["error"]["diagnostics"]) >= 2


@pytest.mark.parametrize(
    "kw",
    [
        dict(command="parse", network="missing.crn"),
        dict(command="parse", network="builtin:nope"),
        dict(command="steady", network="builtin:archetypal", x0="Z=1"),
        dict(command="steady", network="builtin:archetypal", x0="X=-1"),
        dict(command="sweep", network="builtin:archetypal"),
        dict(command="bogus", network="builtin:archetypal"),
    ],
)
def test_usage_errors_exit_2(kw):
    status, _, err = call(**kw)
    assert status == 2
    assert err.startswith("crnrob: error:")


def test_analysis_failure_exits_1():
    status, _, err = call(command="steady", network="builtin:futile_cycle", tolerances={"max_time": 1e-9, "final_tol": 1e-300})
    assert status == 1
    assert "did not converge" in err


def test_steady_csv():
    status, out, _ = call(command="steady", network="builtin:archetypal_mod", format="csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["species"] for r in rows] == ["X", "Y"]
    assert sum(float(r["value"]) for r in rows) == pytest.approx(2.0)


def test_certify_json():
    status, out, _ = call(command="certify", network="builtin:archetypal_mod", input="X", output="X", format="json", numeric=False)
    assert status == 0
    payload = json.loads(out)
    assert payload["q"] == "-x + 1"
    assert payload["classification"] == "aACR"
    assert payload["exact_limit"] == "1"


def test_sweep_writes_output_and_plot_atomically(tmp_path):
    out_path = tmp_path / "sweep.csv"
    plot_path = tmp_path / "plot.csv"
    status, stdout, _ = call(
        command="sweep", network="builtin:archetypal_mod", input="X", output="X",
        grid="1:1000:5", out_path=str(out_path), plot_path=str(plot_path),
    )
    assert status == 0 and stdout == ""
    rows = list(csv.DictReader(io.StringIO(out_path.read_text())))
    assert len(rows) == 5 and all(r["converged"] == "1" for r in rows)
    plot = plot_path.read_text().splitlines()
    assert "# kind=aACR" in plot and "# limit=1" in plot
    assert plot[plot.index("lambda,value") + 1].startswith("1.0,")
    assert not [p for p in tmp_path.iterdir() if p.name.endswith(".tmp")]


def test_table_with_instances_reports_diff(tmp_path):
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps([{"label": "base"}, {"label": "fast", "params": {"gamma": "3"}}]))
    status, out, _ = call(command="table", network="builtin:archetypal_mod", instances=str(inst), format="json", grid="1:1e6:40")
    assert status == 0
    payload = json.loads(out)
    assert [t["label"] for t in payload["tables"]] == ["base", "fast"]
    assert payload["diffs"] == [[]]
    # beta / alpha does not involve gamma, so the limit is unchanged
    assert payload["tables"][1]["cells"][0][0]["limit"] == "1"


def test_bad_instances_file(tmp_path):
    inst = tmp_path / "inst.json"
    inst.write_text("{not json")
    status, _, _ = call(command="table", network="builtin:archetypal_mod", instances=str(inst))
    assert status == 2
    inst.write_text(json.dumps([{"params": {"nope": 1}}]))
    status, _, _ = call(command="table", network="builtin:archetypal_mod", instances=str(inst))
    assert status == 2


def test_check_command():
    status, out, _ = call(command="check", network="builtin:envz_ompr")
    assert status == 0
    assert "check passed" in out and "conservative: yes" in out


def test_main_entry_point(capsys):
    assert main(["laws", "builtin:archetypal"]) == 0
    assert "X + Y" in capsys.readouterr().out
    assert main(["steady", "builtin:archetypal", "--rtol", "-1"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["laws"])
    assert exc.value.code == 2


def test_x0_and_grid_parsing():
    net = load_fixture("archetypal")
    assert parse_x0("all=2,Y=1/2", net) == (2, 0.5)
    with pytest.raises(UsageError):
        parse_x0("X", net)
    assert list(parse_grid("1:100:3", 1.0)) == pytest.approx([1, 10, 100])
    with pytest.raises(UsageError):
        parse_grid("5:1:3", 1.0)
    with pytest.raises(UsageError):
        parse_grid("1:2", 1.0)


def test_plot_data_validation():
    with pytest.raises(ValueError):
        PlotData((1.0, 2.0), (1.0,))
    with pytest.raises(ValueError):
        PlotData((2.0, 1.0), (1.0, 1.0))
    text = PlotData((1.0,), (0.5,), "ACR", "1/2", (3.0,)).to_csv()
    assert text.splitlines() == ["# kind=ACR", "# limit=1/2", "# threshold=3.0", "lambda,value", "1.0,0.5"]
