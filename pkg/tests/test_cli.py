from __future__ import annotations

import json

from eigenevent.cli import main


def _simulate(tmp_path, name, **overrides):
    out = tmp_path / name
    argv = [
        "simulate",
        "--out",
        str(out),
        "--datasets",
        overrides.get("datasets", "2"),
        "--days",
        overrides.get("days", "220"),
        "--seed",
        overrides.get("seed", "7"),
        "--base-rate",
        "4.0",
    ]
    assert main(argv) == 0
    return out


def _dir_bytes(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_simulate_is_deterministic_across_reruns(tmp_path):
    first = _simulate(tmp_path, "a")
    second = _simulate(tmp_path, "b")
    assert _dir_bytes(first) == _dir_bytes(second)
    names = {p.name for p in first.iterdir()}
    assert names == {
        "ds000.windows.csv",
        "ds000.env.csv",
        "ds001.windows.csv",
        "ds001.env.csv",
        "truth.csv",
        "sim_config.json",
    }


def test_detect_writes_one_row_per_day(tmp_path):
    data = _simulate(tmp_path, "data", datasets="1")
    out_csv = tmp_path / "detections.csv"
    code = main(
        [
            "detect",
            "--input",
            str(data / "ds000.windows.csv"),
            "--output",
            str(out_csv),
        ]
    )
    assert code == 0
    lines = out_csv.read_text().strip().splitlines()
    assert len(lines) == 1 + 220
    assert out_csv.with_suffix(".png").exists()


def test_evaluate_writes_231_amoc_rows_and_plot(tmp_path):
    data = _simulate(tmp_path, "data", days="260")
    out = tmp_path / "eval"
    code = main(
        [
            "evaluate",
            "--data-dir",
            str(data),
            "--out",
            str(out),
            "--train-days",
            "130",
            "--eval-days",
            "130",
        ]
    )
    assert code == 0
    lines = (out / "amoc.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 231
    summary = json.loads((out / "summary.json").read_text())
    assert summary["thresholds"]["count"] == 231
    assert summary["runtime_seconds"] is None
    assert (out / "amoc.png").exists()


def test_evaluate_workers_and_reruns_are_byte_identical(tmp_path):
    data = _simulate(tmp_path, "data", days="240", datasets="3")
    outputs = []
    for name, workers in (("e1", "1"), ("e2", "2"), ("e3", "1")):
        out = tmp_path / name
        code = main(
            [
                "evaluate",
                "--data-dir",
                str(data),
                "--out",
                str(out),
                "--train-days",
                "120",
                "--eval-days",
                "120",
                "--thresholds",
                "0.02:0.25:0.005",
                "--workers",
                workers,
            ]
        )
        assert code == 0
        outputs.append(_dir_bytes(out))
    assert outputs[0] == outputs[1] == outputs[2]


def test_compare_baselines_outputs_per_mode(tmp_path):
    data = _simulate(tmp_path, "data", days="240", datasets="1")
    out = tmp_path / "cmp"
    code = main(
        [
            "compare-baselines",
            "--data-dir",
            str(data),
            "--out",
            str(out),
            "--train-days",
            "120",
            "--eval-days",
            "120",
            "--thresholds",
            "0.02:0.25:0.01",
        ]
    )
    assert code == 0
    comparison = json.loads((out / "comparison.json").read_text())
    assert set(comparison) == {"dynamic", "fixed-history", "env-match-only"}
    for mode in comparison:
        assert (out / f"amoc_{mode}.csv").exists()
    assert (out / "comparison.png").exists()


def test_dump_config_prints_and_exits(tmp_path, capsys):
    code = main(["simulate", "--out", str(tmp_path / "x"), "--dump-config"])
    assert code == 0
    resolved = json.loads(capsys.readouterr().out)
    assert resolved["datasets"] == 20
    assert not (tmp_path / "x").exists()


def test_missing_data_dir_is_config_error(tmp_path):
    code = main(["evaluate", "--data-dir", str(tmp_path / "nope"), "--out", str(tmp_path / "o")])
    assert code == 2


def test_bad_threshold_spec_is_config_error(tmp_path):
    data = _simulate(tmp_path, "data", datasets="1")
    code = main(
        ["evaluate", "--data-dir", str(data), "--out", str(tmp_path / "o"), "--thresholds", "nope"]
    )
    assert code == 2


def test_malformed_dataset_is_data_error(tmp_path):
    data = _simulate(tmp_path, "data", datasets="1")
    victim = data / "ds000.windows.csv"
    lines = victim.read_text().splitlines()
    fields = lines[1].split(",")
    fields[3] = "1.5"
    lines[1] = ",".join(fields)
    victim.write_text("\n".join(lines) + "\n")
    code = main(["evaluate", "--data-dir", str(data), "--out", str(tmp_path / "o")])
    assert code == 1


def test_detect_records_input_requires_env(tmp_path):
    records = tmp_path / "r.csv"
    records.write_text("region,day,age,gender,action,symptom,drug\nSW,1,senior,female,purchase,nausea,nyquil\n")
    code = main(["detect", "--input", str(records), "--output", str(tmp_path / "o.csv")])
    assert code == 2
