import numpy as np
import pytest

from lmbp.cli import main, run_experiment
from lmbp.config import ConfigError, build_run_config, load_run_config, parse_config_text

TINY = """
# tiny smoke scenario
scenario.style = ts1
scenario.object_count = 1
scenario.appear_min = 1
scenario.appear_max = 3
scenario.disappear_after = 10
scenario.total_steps = 10
clutter.mean_count = 2
birth.particles = 128
filter.track_particles = 64
filter.phd_particles = 128
run.seed = 3
"""


_cfg_counter = iter(range(10_000))


def write_config(tmp_path, text, **overrides):
    lines = [text]
    for key, value in overrides.items():
        lines.append(f"{key} = {value}")
    path = tmp_path / f"run{next(_cfg_counter)}.cfg"
    path.write_text("\n".join(lines))
    return path


class TestConfigParsing:
    def test_parse_values_and_comments(self):
        out = parse_config_text("a.b = 1  # trailing\n\n# full comment\nc.d = x\n")
        assert out == {"a.b": "1", "c.d": "x"}

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config_text("no equals sign here")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("a.b = 1\na.b = 2\n")

    def test_unknown_field_named(self):
        with pytest.raises(ConfigError, match="scenario.objects"):
            build_run_config({"scenario.objects": "3"})

    def test_bad_value_names_field(self):
        with pytest.raises(ConfigError, match="run.mc_runs"):
            build_run_config({"run.mc_runs": "many"})

    def test_bad_model_value_names_section(self):
        with pytest.raises(ConfigError, match="sensor"):
            build_run_config({"sensor.pd_max": "1.5"})

    def test_defaults_match_headline_experiment(self):
        config = build_run_config({})
        assert config.thresholds.gamma_tr == 1e-2
        assert config.thresholds.gamma_c == 1e-10
        assert config.thresholds.gamma_leg == 1e-2
        assert config.thresholds.gamma_d == 0.5
        assert config.settings.track_particles == 1000
        assert config.settings.phd_particles == 5000
        assert config.birth.particle_budget == 5000
        assert config.settings.bp_iterations == 20
        assert config.ospa.cutoff == 20.0 and config.ospa.order == 2.0
        assert config.scenario.clutter.mean_count == 100.0
        assert config.scenario.sensor.pd_max == 0.7
        np.testing.assert_allclose(config.scenario.sensor.position, [0.0, -50.0])


class TestRunExperiment:
    def test_outputs_and_row_counts(self, tmp_path):
        path = write_config(tmp_path, TINY, **{"run.out_dir": tmp_path / "out"})
        config = load_run_config(path)
        summary = run_experiment(config, quiet=True)
        mospa = (tmp_path / "out" / "mospa.csv").read_text().strip().splitlines()
        assert mospa[0] == "k,mospa"
        assert len(mospa) == 1 + 10
        assert (tmp_path / "out" / "estimates_r000.csv").exists()
        assert (tmp_path / "out" / "truth_r000.csv").exists()
        assert summary.mospa.shape == (10,)
        assert summary.mean_step_seconds > 0

    def test_thresholds_echoed_in_summary(self, tmp_path):
        path = write_config(tmp_path, TINY, **{"run.out_dir": tmp_path / "out"})
        run_experiment(load_run_config(path), quiet=True)
        summary = (tmp_path / "out" / "summary.txt").read_text()
        assert "thresholds.gamma_tr = 0.01" in summary
        assert "thresholds.gamma_c = 1e-10" in summary
        assert "thresholds.gamma_leg = 0.01" in summary
        assert "thresholds.gamma_d = 0.5" in summary
        assert "mean_step_seconds" in summary and "mean_track_count" in summary

    def test_byte_identical_reruns(self, tmp_path):
        path_a = write_config(tmp_path, TINY, **{"run.out_dir": tmp_path / "a",
                                                 "run.mc_runs": 2})
        path_b = write_config(tmp_path, TINY, **{"run.out_dir": tmp_path / "b",
                                                 "run.mc_runs": 2})
        run_experiment(load_run_config(path_a), quiet=True)
        run_experiment(load_run_config(path_b), quiet=True)
        for name in ("mospa.csv", "estimates_r000.csv", "estimates_r001.csv",
                     "truth_r000.csv", "truth_r001.csv"):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes()


class TestFailureCleanup:
    def test_partial_outputs_removed(self, tmp_path, monkeypatch):
        import lmbp.cli as cli_mod

        calls = {"n": 0}
        real = cli_mod.execute_run

        def flaky(config, master):
            calls["n"] += 1
            if calls["n"] == 2:
                raise RuntimeError("forced failure")
            return real(config, master)

        monkeypatch.setattr(cli_mod, "execute_run", flaky)
        path = write_config(tmp_path, TINY, **{"run.out_dir": tmp_path / "out",
                                               "run.mc_runs": 2})
        with pytest.raises(RuntimeError):
            run_experiment(load_run_config(path), quiet=True)
        assert list((tmp_path / "out").glob("*.csv")) == []

    def test_main_reports_failure(self, tmp_path, monkeypatch, capsys):
        import lmbp.cli as cli_mod

        def boom(config, master):
            raise RuntimeError("forced failure")

        monkeypatch.setattr(cli_mod, "execute_run", boom)
        path = write_config(tmp_path, TINY, **{"run.out_dir": tmp_path / "out"})
        assert main(["run", str(path), "--quiet"]) == 1
        assert "forced failure" in capsys.readouterr().err


class TestMain:
    def test_run_subcommand(self, tmp_path, capsys):
        path = write_config(tmp_path, TINY, **{"run.out_dir": tmp_path / "out"})
        assert main(["run", str(path), "--quiet"]) == 0
        assert (tmp_path / "out" / "mospa.csv").exists()

    def test_flag_overrides(self, tmp_path):
        path = write_config(tmp_path, TINY)
        out = tmp_path / "flagged"
        assert main(["run", str(path), "--out", str(out), "--runs", "2",
                     "--seed", "9", "--marginals", "exact", "--quiet"]) == 0
        assert (out / "estimates_r001.csv").exists()
        summary = (out / "summary.txt").read_text()
        assert "run.seed = 9" in summary
        assert "filter.marginals = exact" in summary

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("nonsense.key = 1\n")
        assert main(["run", str(path), "--quiet"]) == 2
        assert "nonsense.key" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "absent.cfg")]) == 2
