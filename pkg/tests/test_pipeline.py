import os

import pytest

from gdpf.harness.cli import main
from gdpf.harness.io import RunConfig, load_config, read_estimates_csv
from gdpf.harness.pipeline import run_pipeline


def write_config(path, body):
    path.write_text(body)
    return str(path)


CROSSING_CFG = (
    "[scenario]\n"
    "preset = crossing3\n"
    "[run]\n"
    "seed = 7\n"
    "trackers = gdpf-bbox\n"
)


class TestRunPipeline:
    def test_writes_schema_and_artifacts(self, tmp_path):
        cfg = load_config(write_config(tmp_path / "run.ini", CROSSING_CFG))
        cfg = RunConfig(**{**cfg.__dict__, "out_dir": str(tmp_path / "out")})
        results = run_pipeline(cfg)
        assert set(results) == {"gdpf-bbox"}
        est = tmp_path / "out" / "tracked_objects.csv"
        assert est.exists()
        assert est.read_text().splitlines()[0] == "frame,id,x,y"
        assert (tmp_path / "out" / "summary.txt").exists()
        assert (tmp_path / "out" / "scenario" / "truth.csv").exists()
        rows = read_estimates_csv(str(est))
        assert set(rows) == set(range(100))

    def test_both_trackers_two_summary_rows(self, tmp_path):
        body = CROSSING_CFG.replace("trackers = gdpf-bbox", "trackers = gdpf-bbox,nn")
        cfg = load_config(write_config(tmp_path / "run.ini", body))
        cfg = RunConfig(**{**cfg.__dict__, "out_dir": str(tmp_path / "out")})
        results = run_pipeline(cfg)
        assert set(results) == {"gdpf-bbox", "nn"}
        summary = (tmp_path / "out" / "summary.txt").read_text()
        assert summary.count("rmse:") == 2
        assert (tmp_path / "out" / "gdpf-bbox_tracked_objects.csv").exists()
        assert (tmp_path / "out" / "nn_tracked_objects.csv").exists()

    def test_missing_scenario_dir_names_path(self, tmp_path):
        cfg = load_config(write_config(tmp_path / "run.ini", "[run]\nseed = 1\n"))
        cfg = RunConfig(**{**cfg.__dict__, "scenario_dir": str(tmp_path / "absent")})
        with pytest.raises(FileNotFoundError, match="absent"):
            run_pipeline(cfg)

    def test_mode_mismatch_is_explained(self, tmp_path):
        body = CROSSING_CFG.replace("trackers = gdpf-bbox", "trackers = gdpf-grid")
        cfg = load_config(write_config(tmp_path / "run.ini", body))
        with pytest.raises(ValueError, match="grid"):
            run_pipeline(cfg)

    def test_grid_tracker_end_to_end(self, tmp_path):
        body = (
            "[scenario]\n"
            "preset = crossing3\n"
            "mode = grid\n"
            "cell_size = 0.5\n"
            "[filter]\n"
            "meas_noise_cov = 0.5\n"
            "[run]\n"
            "seed = 7\n"
            "trackers = gdpf-grid\n"
        )
        cfg = load_config(write_config(tmp_path / "run.ini", body))
        cfg = RunConfig(**{**cfg.__dict__, "out_dir": str(tmp_path / "out")})
        results = run_pipeline(cfg)
        r = results["gdpf-grid"]
        # grid quantization costs accuracy but tracking must stay locked on
        assert r.rmse < 1.0
        assert r.id_switches <= 2
        assert (tmp_path / "out" / "tracked_objects.csv").exists()

    def test_byte_identical_reruns(self, tmp_path):
        outs = []
        for name in ("o1", "o2"):
            cfg = load_config(write_config(tmp_path / f"{name}.ini", CROSSING_CFG))
            cfg = RunConfig(**{**cfg.__dict__, "out_dir": str(tmp_path / name)})
            run_pipeline(cfg)
            outs.append((tmp_path / name / "tracked_objects.csv").read_bytes())
        assert outs[0] == outs[1]


class TestCli:
    def test_simulate_track_eval_chain(self, tmp_path):
        spec = write_config(tmp_path / "spec.ini", "[scenario]\npreset = crossing3\n")
        scen_dir = str(tmp_path / "scenario")
        assert main(["simulate", "--spec", spec, "--seed", "7", "--out", scen_dir]) == 0
        assert os.path.exists(os.path.join(scen_dir, "measurements.csv"))

        out_dir = str(tmp_path / "run")
        rc = main(["track", "--scenario", scen_dir, "--tracker", "gdpf-bbox", "--out", out_dir])
        assert rc == 0
        est = os.path.join(out_dir, "tracked_objects.csv")
        assert os.path.exists(est)
        assert os.path.exists(os.path.join(out_dir, "run_summary.txt"))

        eval_csv = str(tmp_path / "eval.csv")
        rc = main([
            "eval",
            "--truth", os.path.join(scen_dir, "truth.csv"),
            "--estimates", est,
            "--gt-id", "0",
            "--out", eval_csv,
        ])
        assert rc == 0
        assert os.path.exists(eval_csv)
        assert os.path.exists(eval_csv + ".summary.txt")
        body = open(eval_csv + ".summary.txt").read()
        assert "rmse:" in body and "id_switches:" in body

    def test_track_with_config(self, tmp_path):
        spec = write_config(tmp_path / "spec.ini", "[scenario]\npreset = crossing3\n")
        scen_dir = str(tmp_path / "scenario")
        main(["simulate", "--spec", spec, "--seed", "7", "--out", scen_dir])
        cfg = write_config(tmp_path / "run.ini", "[filter]\nalpha = 0.5\n")
        rc = main([
            "track", "--scenario", scen_dir, "--tracker", "gdpf-bbox",
            "--config", cfg, "--out", str(tmp_path / "out"),
        ])
        assert rc == 0

    def test_nn_tracker_via_cli(self, tmp_path):
        spec = write_config(tmp_path / "spec.ini", "[scenario]\npreset = crossing3\n")
        scen_dir = str(tmp_path / "scenario")
        main(["simulate", "--spec", spec, "--seed", "7", "--out", scen_dir])
        rc = main(["track", "--scenario", scen_dir, "--tracker", "nn",
                   "--out", str(tmp_path / "out")])
        assert rc == 0

    def test_missing_scenario_nonzero_exit(self, tmp_path, capsys):
        rc = main(["track", "--scenario", str(tmp_path / "gone"), "--tracker", "nn",
                   "--out", str(tmp_path / "out")])
        assert rc != 0
        assert "gone" in capsys.readouterr().err

    def test_missing_spec_nonzero_exit(self, tmp_path, capsys):
        rc = main(["simulate", "--spec", str(tmp_path / "nope.ini"), "--seed", "1",
                   "--out", str(tmp_path / "s")])
        assert rc != 0
        assert "error:" in capsys.readouterr().err

    def test_bench_smoke(self, capsys):
        rc = main(["bench", "--objects", "10", "--frames", "5"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "mean_frame_time_ms" in out

    def test_run_subcommand(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "run.ini",
            CROSSING_CFG + f"out = {tmp_path / 'out'}\n",
        )
        assert main(["run", "--config", cfg]) == 0
        assert "gdpf-bbox.rmse:" in capsys.readouterr().out
        assert (tmp_path / "out" / "tracked_objects.csv").exists()


class TestShippedConfigs:
    def test_crossing3_config_parses_and_runs(self, tmp_path):
        cfg = load_config(os.path.join(os.path.dirname(__file__), "..", "configs", "crossing3.ini"))
        assert cfg.trackers == ("gdpf-bbox", "nn")
        cfg = RunConfig(**{**cfg.__dict__, "out_dir": str(tmp_path / "out")})
        results = run_pipeline(cfg)
        assert results["gdpf-bbox"].rmse < 0.6

    def test_grid_config_parses(self):
        cfg = load_config(os.path.join(os.path.dirname(__file__), "..", "configs", "crossing3-grid.ini"))
        assert cfg.trackers == ("gdpf-grid",)
        assert cfg.scenario.mode == "grid"
        assert cfg.hyper.meas_noise_cov[0, 0] == 0.5


class TestCliDeterminism:
    def test_two_runs_byte_identical(self, tmp_path):
        spec = write_config(tmp_path / "spec.ini", "[scenario]\npreset = crossing3\n")
        blobs = []
        for name in ("a", "b"):
            scen = str(tmp_path / f"scen_{name}")
            out = str(tmp_path / f"out_{name}")
            assert main(["simulate", "--spec", spec, "--seed", "7", "--out", scen]) == 0
            assert main(["track", "--scenario", scen, "--tracker", "gdpf-bbox",
                         "--out", out]) == 0
            blobs.append(open(os.path.join(out, "tracked_objects.csv"), "rb").read())
        assert blobs[0] == blobs[1]
