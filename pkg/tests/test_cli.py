import json
import math

import numpy as np
import pytest

from srastream.cli import read_run_jsonl, run_main
from srastream.metrics import alarm_eval, roc_auc, segment_mse
from srastream.streams import read_stream_csv


def make_stream(tmp_path, name="stream.csv", extra=()):
    out = tmp_path / name
    rc = run_main([
        "simulate", "--benchmark", "--T", "400", "--seed", "3",
        "--out", str(out), *extra,
    ])
    assert rc == 0
    return out


class TestSimulate:
    def test_deterministic_bytes(self, tmp_path):
        a = make_stream(tmp_path, "a.csv")
        b = make_stream(tmp_path, "b.csv")
        assert a.read_bytes() == b.read_bytes()

    def test_sidecar_config(self, tmp_path):
        p = make_stream(tmp_path)
        cfg = json.loads((tmp_path / "stream.csv.config.json").read_text())
        assert cfg["T"] == 400
        assert cfg["seed"] == 3
        assert cfg["change_points"] == [201]

    def test_alpha_one_no_outliers(self, tmp_path):
        p = make_stream(tmp_path, extra=("--alpha", "1.0"))
        _, is_outlier, _, _ = read_stream_csv(p)
        assert not is_outlier.any()

    def test_flag_overrides_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("alpha: 0.5\nseed: 3\nT: 400\n")
        p = tmp_path / "s.csv"
        rc = run_main([
            "simulate", "--config", str(cfg), "--alpha", "1.0",
            "--out", str(p),
        ])
        assert rc == 0
        _, is_outlier, _, _ = read_stream_csv(p)
        assert not is_outlier.any()

    def test_seed_envvar(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SRASTREAM_SEED", "3")
        p = tmp_path / "env.csv"
        rc = run_main(["simulate", "--benchmark", "--T", "400",
                       "--out", str(p)])
        assert rc == 0
        assert p.read_bytes() == make_stream(tmp_path).read_bytes()

    def test_multi_change_kind(self, tmp_path):
        p = tmp_path / "m.csv"
        rc = run_main(["simulate", "--multi-change", "--T", "500",
                       "--seed", "0", "--out", str(p)])
        assert rc == 0
        cfg = json.loads((tmp_path / "m.csv.config.json").read_text())
        assert len(cfg["change_points"]) == 4


class TestRun:
    def test_resolved_rho_in_header(self, tmp_path):
        stream = make_stream(tmp_path)
        out = tmp_path / "run.jsonl"
        rc = run_main([
            "run", "--input", str(stream), "--algorithm", "sra",
            "--gamma", "3", "--beta", "0.1", "--M", "5", "--out", str(out),
        ])
        assert rc == 0
        config, scores, means, trunc = read_run_jsonl(out)
        assert config["rho"] == pytest.approx(0.011628, abs=1e-6)
        assert len(scores) == 400
        assert means.shape == (400, 2, 1)

    def test_sra_inf_gamma_matches_sem(self, tmp_path):
        stream = make_stream(tmp_path)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        rc1 = run_main(["run", "--input", str(stream), "--algorithm", "sra",
                        "--gamma", "inf", "--rho", "0.02", "--out", str(a)])
        rc2 = run_main(["run", "--input", str(stream), "--algorithm", "sem",
                        "--r", "0.02", "--out", str(b)])
        assert rc1 == rc2 == 0
        # identical records apart from the config header
        ra = a.read_text().splitlines()[1:]
        rb = b.read_text().splitlines()[1:]
        assert ra == rb

    def test_empty_input_header_only(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("t,y1,is_outlier,segment_id,true_mu_1,true_mu_2\n")
        out = tmp_path / "run.jsonl"
        rc = run_main(["run", "--input", str(p), "--algorithm", "sem",
                       "--r", "0.02", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 and "config" in json.loads(lines[0])

    def test_missing_input_is_data_error(self, tmp_path):
        rc = run_main(["run", "--input", str(tmp_path / "nope.csv"),
                       "--algorithm", "sem", "--r", "0.02",
                       "--out", str(tmp_path / "o.jsonl")])
        assert rc == 2

    def test_malformed_input_is_data_error(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("t,y1,is_outlier,segment_id,true_mu_1\n1,oops,0,0,0.5\n")
        rc = run_main(["run", "--input", str(p), "--algorithm", "sem",
                       "--r", "0.02", "--out", str(tmp_path / "o.jsonl")])
        assert rc == 2

    def test_missing_required_flag_is_usage_error(self, tmp_path):
        stream = make_stream(tmp_path)
        rc = run_main(["run", "--input", str(stream), "--algorithm", "sra",
                       "--out", str(tmp_path / "o.jsonl")])  # no gamma
        assert rc == 1

    def test_unknown_command_is_usage_error(self):
        assert run_main(["frobnicate"]) == 1


class TestEval:
    @pytest.fixture()
    def run_output(self, tmp_path):
        stream = make_stream(tmp_path)
        out = tmp_path / "run.jsonl"
        rc = run_main(["run", "--input", str(stream), "--algorithm", "sra",
                       "--gamma", "3", "--beta", "0.1", "--M", "5",
                       "--out", str(out)])
        assert rc == 0
        return stream, out

    def test_report_matches_in_process_metrics(self, tmp_path, run_output):
        stream, run_path = run_output
        report_path = tmp_path / "report.json"
        rc = run_main(["eval", "--scores", str(run_path),
                       "--stream", str(stream), "--tau", "50",
                       "--eval-start", "50", "--eval-end", "150",
                       "--out", str(report_path)])
        assert rc == 0
        report = json.loads(report_path.read_text())

        _, scores, est_means, _ = read_run_jsonl(run_path)
        y, is_outlier, seg, true_mu = read_stream_csv(stream)
        true_means = true_mu.reshape(400, 2, 1)
        mse = segment_mse(est_means, true_means, 50, 201, 400,
                          eval_window=(50, 150))
        alarm = alarm_eval(scores, [201], 100, 20, 400)
        assert report["mse"] == pytest.approx(mse.as_dict())
        assert report["alarm"]["auc"] == pytest.approx(alarm.auc)
        assert report["roc_auc"] == pytest.approx(roc_auc(scores, is_outlier))
        assert report["config"]["change_points"] == [201]

    def test_emits_curve_csv_and_figures(self, tmp_path, run_output):
        stream, run_path = run_output
        report_path = tmp_path / "rep.json"
        rc = run_main(["eval", "--scores", str(run_path),
                       "--stream", str(stream), "--tau", "50",
                       "--out", str(report_path)])
        assert rc == 0
        curve = (tmp_path / "rep_curve.csv").read_text().splitlines()
        assert curve[0] == "false_alarm_rate,benefit_recall"
        assert len(curve) > 2
        for name in ("rep_scores.png", "rep_alarm_curve.png",
                     "rep_roc.png", "rep_mean_tracking.png"):
            assert (tmp_path / name).stat().st_size > 0

    def test_no_figures_flag(self, tmp_path, run_output):
        stream, run_path = run_output
        report_path = tmp_path / "quiet.json"
        rc = run_main(["eval", "--scores", str(run_path),
                       "--stream", str(stream), "--no-figures",
                       "--out", str(report_path)])
        assert rc == 0
        assert not (tmp_path / "quiet_scores.png").exists()

    def test_length_mismatch_is_data_error(self, tmp_path, run_output):
        stream, run_path = run_output
        other = make_stream(tmp_path, "other.csv", extra=())
        short = tmp_path / "short.csv"
        lines = stream.read_text().splitlines()
        short.write_text("\n".join(lines[:200]) + "\n")
        rc = run_main(["eval", "--scores", str(run_path),
                       "--stream", str(short),
                       "--out", str(tmp_path / "r.json")])
        assert rc == 2


class TestTune:
    def test_single_cell_grid(self, tmp_path):
        out = tmp_path / "tune.json"
        rc = run_main(["tune", "--algorithm", "sem", "--r-grid", "0.02,0.5",
                       "--repeats", "2", "--T", "300", "--eval-start", "50",
                       "--eval-end", "120", "--seed", "0", "--out", str(out)])
        assert rc == 0
        result = json.loads(out.read_text())
        assert len(result["grid"]) == 2
        assert result["best"]["params"]["r"] in (0.02, 0.5)
        vals = [row["mean_s_eval"] for row in result["grid"]
                if not row["failed"]]
        assert result["best"]["mean_s_eval"] == min(vals)


class TestBounds:
    def test_table_and_consistency(self, tmp_path):
        out = tmp_path / "bounds.csv"
        rc = run_main(["bounds", "--gamma-grid", "1,2,3,5",
                       "--consistency-beta", "0.1", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("gamma,tail,bound")
        tails = [float(l.split(",")[1]) for l in lines[1:]]
        assert tails == sorted(tails, reverse=True)
        side = json.loads((tmp_path / "bounds.csv.config.json").read_text())
        assert side["gamma_grid"] == [1.0, 2.0, 3.0, 5.0]
        cons = json.loads(
            (tmp_path / "bounds.csv.consistency.json").read_text()
        )
        rep = cons["step_size_consistency"]
        assert rep["relative_difference"] < 1e-4

    def test_stdout_when_no_out(self, capsys):
        rc = run_main(["bounds", "--gamma-grid", "3"])
        assert rc == 0
        captured = capsys.readouterr()
        assert captured.out.startswith("gamma,tail,bound")
