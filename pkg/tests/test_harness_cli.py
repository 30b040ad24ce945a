import csv
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from cliptrack.cli import main
from cliptrack.errors import ConfigError
from cliptrack.harness import TRACE_COLUMNS, ExperimentConfig, run_experiment

ALL_VECTOR = ["mwu", "fixed_share", "projection_update", "clipped_omd", "pcs", "ocs", "ocs_plus", "pcsp"]


def base_config(tmp_path, **over):
    d = {
        "environment": {"kind": "piecewise_stationary", "T": 150, "K": 4, "S_true": 3, "seed": 5, "noise": 0.1},
        "learners": ALL_VECTOR,
        "S": 3,
        "output_dir": str(tmp_path / "out"),
    }
    d.update(over)
    return d


def write_config(tmp_path, d, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return str(path)


def schema():
    return json.loads(resources.files("cliptrack").joinpath("schemas/report.schema.json").read_text())


def test_run_writes_traces_and_reports(tmp_path, capsys):
    cfg = write_config(tmp_path, base_config(tmp_path, repetitions=2, verify=True))
    assert main(["run", cfg]) == 0
    out = tmp_path / "out"
    assert (out / "trace-seed5.csv").exists() and (out / "trace-seed6.csv").exists()
    reports = json.loads((out / "reports.json").read_text())
    jsonschema.validate(reports, schema())
    assert len(reports) == 2 * len(ALL_VECTOR)
    assert all(r["pass"] for r in reports)
    text = (out / "trace-seed5.csv").read_text().splitlines()
    assert text[0].startswith("# cliptrack trace kind=piecewise_stationary")
    rows = list(csv.DictReader(text[1:]))
    assert tuple(rows[0]) == TRACE_COLUMNS
    assert len(rows) == 150 * len(ALL_VECTOR)
    assert "theorem" in capsys.readouterr().out


def test_trace_is_byte_identical(tmp_path):
    d = base_config(tmp_path)
    a = run_experiment(ExperimentConfig.from_dict(dict(d, output_dir=str(tmp_path / "a"))))
    b = run_experiment(ExperimentConfig.from_dict(dict(d, output_dir=str(tmp_path / "b"), workers=4)))
    assert a.all_passed and b.all_passed
    for name in ("trace-seed5.csv", "reports.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_json_format(tmp_path):
    cfg = write_config(tmp_path, base_config(tmp_path, learners=["ocs"], format="json"))
    assert main(["run", cfg, "--seed", "9"]) == 0
    body = json.loads((tmp_path / "out" / "trace-seed9.json").read_text())
    assert body["columns"] == list(TRACE_COLUMNS) and len(body["rows"]) == 150


def test_matrix_environment(tmp_path):
    d = base_config(tmp_path, learners=["pcsp"])
    d["environment"] = {"kind": "matrix_piecewise", "T": 60, "K": 3, "S_true": 2, "seed": 1, "noise": 0.2}
    assert main(["run", write_config(tmp_path, d)]) == 0
    reports = json.loads((tmp_path / "out" / "reports.json").read_text())
    assert reports[0]["theorem"] == "theorem5"


def test_compare_uses_reports(tmp_path, capsys):
    cfg = write_config(tmp_path, base_config(tmp_path, learners=["pcs", "ocs"]))
    assert main(["compare", cfg]) == 0
    first = capsys.readouterr().out
    assert main(["compare", cfg]) == 0
    assert capsys.readouterr().out == first
    assert main(["compare", cfg, "--rerun"]) == 0


@pytest.mark.parametrize("change", [
    {"S": 0},
    {"learners": ["nope"]},
    {"learners": [{"id": "mwu", "params": {"alpha": 0.1}}]},
    {"learners": [{"id": "pcs", "params": {"eta": 0.9}}]},
    {"extra": 1},
    {"environment": {"kind": "matrix_piecewise", "T": 10, "K": 2}, "learners": ["mwu"]},
])
def test_config_errors_exit_2(tmp_path, change):
    assert main(["run", write_config(tmp_path, base_config(tmp_path, **change))]) == 2


def test_unreadable_config(tmp_path):
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["run", str(bad)]) == 2


def test_usage_errors_exit_64():
    for argv in (["frobnicate"], ["run"], ["project", "0.5"], []):
        with pytest.raises(SystemExit) as exc:
            code = main(argv)
            raise SystemExit(code)
        assert exc.value.code == 64


def test_project(capsys):
    assert main(["project", "0.9", "0.08", "0.02", "--floor", "0.05"]) == 0
    assert capsys.readouterr().out.strip() == "(0.872449, 0.077551, 0.05)"
    assert main(["project", "0.5", "0.5", "--floor", "0.9"]) == 64


def test_direct_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"environment": {"kind": "drifting", "T": 5, "K": 2}, "learners": []})


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "cliptrack.cli", "--backend"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() in ("cython", "python")
