"""CLI: config parsing, file emission, exit codes, reproducibility."""

import json

import pytest

from dualsim.cli import RunSpec, cmd_compare, cmd_run, list_scenarios, main, parse_config
from dualsim.errors import ConfigError


def read(path):
    return path.read_text(encoding="utf-8")


class TestParseConfig:
    def test_minimal_logistic_fills_defaults(self):
        spec = parse_config('{"model": "logistic", "c": 5, "paradigm": "both"}')
        assert spec.c == 5.0
        assert spec.t0 == 1.0
        assert spec.reps == 50
        assert spec.alpha == 0.05
        assert spec.dt == 0.001
        assert spec.grid == 1.0
        assert spec.t_end == 100.0
        assert spec.method == "exact"
        assert spec.policy == "live"
        assert spec.fix == "none"

    def test_kuznetsov_fix_run(self):
        spec = parse_config('{"model": "kuznetsov", "scenario": 4, "fix": "tumour"}')
        assert spec.scenario == 4
        assert spec.fix == "tumour"
        assert spec.t0 == 100.0 and spec.e0 == 10.0  # documented arbitrary defaults

    def test_frozen_with_kuznetsov_rejected(self):
        with pytest.raises(ConfigError, match="frozen"):
            parse_config('{"model": "kuznetsov", "scenario": 1, "policy": "frozen"}')

    @pytest.mark.parametrize("doc,msg", [
        ('{"c": 5}', "model"),
        ('{"model": "hybrid", "c": 5}', "model"),
        ('{"model": "logistic"}', "c or a and b"),
        ('{"model": "logistic", "c": 5, "a": 1, "b": 0.2}', "not both"),
        ('{"model": "logistic", "a": 1}', "together"),
        ('{"model": "logistic", "c": 5, "scenario": 1}', "scenario"),
        ('{"model": "logistic", "c": 5, "e0": 1}', "e0"),
        ('{"model": "kuznetsov"}', "scenario"),
        ('{"model": "kuznetsov", "scenario": 9}', "scenario"),
        ('{"model": "kuznetsov", "scenario": 1, "c": 5}', "one-equation"),
        ('{"model": "logistic", "c": 5, "reps": 0}', "reps"),
        ('{"model": "logistic", "c": 5, "alpha": 1.0}', "alpha"),
        ('{"model": "logistic", "c": 5, "dt": -1}', "dt"),
        ('{"model": "logistic", "c": 5, "grid": 1000}', "grid"),
        ('{"model": "logistic", "c": 0.5}', "c"),
        ('{"model": "logistic", "a": 1, "b": 2}', "b < a"),
        ('{"model": "logistic", "c": 5, "paradigm": "abs", "t0": 1.5}', "integer"),
        ('{"model": "logistic", "c": 5, "policy": "frozen", "method": "tau"}', "exact"),
        ('{"model": "logistic", "c": 5, "volume": 3}', "unknown"),
        ('[1, 2]', "object"),
        ('{"model": "logistic", "c": 5', "JSON"),
    ])
    def test_validation_errors(self, doc, msg):
        with pytest.raises(ConfigError, match=msg):
            parse_config(doc)

    def test_accepts_manifest_documents(self, tmp_path):
        spec = RunSpec(model="logistic", c=5.0, paradigm="sds", t_end=2.0, out=str(tmp_path))
        cmd_run(spec)
        reparsed = parse_config(read(tmp_path / "manifest.json"))
        assert reparsed == spec


class TestCmdRun:
    def test_sds_only_outputs(self, tmp_path):
        spec = parse_config(json.dumps({
            "model": "logistic", "c": 5, "paradigm": "sds", "t_end": 5.0, "out": str(tmp_path),
        }))
        paths = cmd_run(spec)
        names = sorted(p.name for p in paths)
        assert names == ["manifest.json", "sds.csv"]
        csv = read(tmp_path / "sds.csv").splitlines()
        assert csv[0] == "time,tumour"
        assert csv[1].startswith("0.000000,1.0")
        manifest = json.loads(read(tmp_path / "manifest.json"))
        assert manifest["run_spec"]["model"] == "logistic"
        assert manifest["replicate_seeds"] == []

    def test_kuznetsov_sds_header(self, tmp_path):
        spec = parse_config(json.dumps({
            "model": "kuznetsov", "scenario": 1, "paradigm": "sds", "t_end": 2.0,
            "out": str(tmp_path),
        }))
        cmd_run(spec)
        assert read(tmp_path / "sds.csv").splitlines()[0] == "time,tumour,effector"

    def test_abs_ensemble_blocks(self, tmp_path):
        spec = parse_config(json.dumps({
            "model": "logistic", "c": 5, "paradigm": "abs", "t_end": 3.0, "reps": 4,
            "seed": 9, "out": str(tmp_path),
        }))
        cmd_run(spec)
        lines = read(tmp_path / "abs_ensemble.csv").splitlines()
        assert lines[0] == "replicate,time,tumour"
        replicates = {line.split(",")[0] for line in lines[1:]}
        assert replicates == {"0", "1", "2", "3"}
        manifest = json.loads(read(tmp_path / "manifest.json"))
        assert manifest["replicate_seeds"] == [9, 10, 11, 12]

    def test_plot_flag_writes_svg(self, tmp_path):
        spec = parse_config(json.dumps({
            "model": "kuznetsov", "scenario": 1, "paradigm": "sds", "t_end": 5.0,
            "plot": True, "out": str(tmp_path),
        }))
        cmd_run(spec)
        svg = read(tmp_path / "plot.svg")
        assert svg.startswith("<svg")
        assert "stroke-dasharray" in svg  # effector curve is dotted

    def test_both_paradigms(self, tmp_path):
        spec = parse_config(json.dumps({
            "model": "logistic", "c": 5, "paradigm": "both", "t_end": 2.0, "reps": 2,
            "out": str(tmp_path),
        }))
        paths = cmd_run(spec)
        assert sorted(p.name for p in paths) == ["abs_ensemble.csv", "manifest.json", "sds.csv"]


class TestCmdCompare:
    def test_outputs_and_report_schema(self, tmp_path):
        spec = parse_config(json.dumps({
            "model": "kuznetsov", "scenario": 1, "t_end": 20.0, "reps": 5,
            "out": str(tmp_path),
        }))
        paths = cmd_compare(spec)
        assert sorted(p.name for p in paths) == [
            "comparison.csv", "comparison.svg", "manifest.json", "report.json",
        ]
        report = json.loads(read(tmp_path / "report.json"))
        for pop in ("tumour", "effector"):
            w = report["populations"][pop]["wilcoxon"]
            assert set(w) == {"U", "p", "h"}
            assert w["h"] in (0, 1)
        header = read(tmp_path / "comparison.csv").splitlines()[0]
        assert header == ("time,sds_tumour,abs_mean_tumour,abs_var_tumour,"
                          "sds_effector,abs_mean_effector,abs_var_effector")

    def test_compare_requires_both(self):
        spec = parse_config('{"model": "logistic", "c": 5, "paradigm": "sds"}')
        with pytest.raises(ConfigError, match="both"):
            cmd_compare(spec)

    def test_one_equation_compare(self, tmp_path):
        spec = parse_config(json.dumps({
            "model": "logistic", "c": 5, "t_end": 10.0, "reps": 6, "out": str(tmp_path),
        }))
        cmd_compare(spec)
        report = json.loads(read(tmp_path / "report.json"))
        assert list(report["populations"]) == ["tumour"]
        header = read(tmp_path / "comparison.csv").splitlines()[0]
        assert header == "time,sds_tumour,abs_mean_tumour,abs_var_tumour"


class TestReproducibility:
    def test_rerun_from_manifest_is_byte_identical(self, tmp_path):
        out = tmp_path / "run"
        spec = parse_config(json.dumps({
            "model": "kuznetsov", "scenario": 4, "t_end": 15.0, "reps": 4, "seed": 3,
            "out": str(out),
        }))
        paths = cmd_compare(spec)
        before = {p.name: p.read_bytes() for p in paths}
        respec = parse_config(read(out / "manifest.json"))
        cmd_compare(respec)
        after = {p.name: p.read_bytes() for p in paths}
        assert before == after

    def test_run_twice_same_spec(self, tmp_path):
        spec = parse_config(json.dumps({
            "model": "logistic", "c": 1.25, "paradigm": "both", "t_end": 5.0, "reps": 3,
            "policy": "frozen", "out": str(tmp_path), "plot": True,
        }))
        first = {p.name: p.read_bytes() for p in cmd_run(spec)}
        second = {p.name: p.read_bytes() for p in cmd_run(spec)}
        assert first == second


class TestMainExitCodes:
    def test_success(self, tmp_path, capsys):
        rc = main(["run", "--model", "logistic", "--c", "5", "--paradigm", "sds",
                   "--t-end", "2", "--out", str(tmp_path)])
        assert rc == 0
        assert "sds.csv" in capsys.readouterr().out

    def test_config_error_is_2(self, tmp_path, capsys):
        rc = main(["run", "--model", "kuznetsov", "--scenario", "1", "--policy", "frozen",
                   "--out", str(tmp_path)])
        assert rc == 2
        assert "configuration error" in capsys.readouterr().err
        assert list(tmp_path.iterdir()) == []  # nothing written

    def test_engine_error_is_3_and_cites_the_cap(self, tmp_path, capsys):
        rc = main(["run", "--model", "gompertz", "--a", "1.636", "--b", "0.002",
                   "--paradigm", "abs", "--method", "tau", "--dt", "0.001",
                   "--reps", "1", "--out", str(tmp_path)])
        assert rc == 3
        err = capsys.readouterr().err
        assert "cap" in err
        assert list(tmp_path.iterdir()) == []

    def test_io_error_is_4(self, tmp_path, capsys):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        rc = main(["run", "--model", "logistic", "--c", "5", "--paradigm", "sds",
                   "--t-end", "2", "--out", str(blocker)])
        assert rc == 4
        assert "i/o error" in capsys.readouterr().err

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"model": "logistic", "c": 5, "paradigm": "sds", "t_end": 2.0}')
        out = tmp_path / "out"
        rc = main(["run", "--config", str(cfg), "--c", "2.5", "--out", str(out)])
        assert rc == 0
        manifest = json.loads(read(out / "manifest.json"))
        assert manifest["run_spec"]["c"] == 2.5

    def test_list_scenarios(self, capsys):
        assert main(["list-scenarios"]) == 0
        out = capsys.readouterr().out
        assert "0.3743" in out and "0.1908" in out
        assert "a=1.636" in out

    def test_missing_config_file(self, tmp_path, capsys):
        rc = main(["run", "--config", str(tmp_path / "nope.json")])
        assert rc == 2


class TestListScenarios:
    def test_table_mentions_no_treatment(self):
        text = list_scenarios()
        assert "no treatment" in text
        assert text.count("\n") >= 5
