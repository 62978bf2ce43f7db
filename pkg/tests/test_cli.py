import pytest

from decsim.cli import EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK, main


def _short(*extra):
    return ["--set", "scenario.duration=0.3"] + list(extra)


class TestRun:
    def test_creates_outputs(self, tmp_path):
        rc = main(["run", "--out", str(tmp_path)] + _short())
        assert rc == EXIT_OK
        assert (tmp_path / "trajectory_distributed.csv").exists()
        assert (tmp_path / "metrics_distributed.txt").exists()

    def test_mode_flag_selects_filenames(self, tmp_path):
        rc = main(["run", "--mode", "original", "--out", str(tmp_path)] + _short())
        assert rc == EXIT_OK
        assert (tmp_path / "trajectory_original.csv").exists()

    def test_config_file_loaded(self, tmp_path):
        cfg = tmp_path / "scenario.cfg"
        cfg.write_text("scenario.duration = 0.2\nscenario.mode = original\n")
        rc = main(["run", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == EXIT_OK
        text = (tmp_path / "trajectory_original.csv").read_text()
        assert "# scenario.duration = 0.2" in text
        # 0.2 s at 100 Hz -> 20 samples
        assert sum(1 for line in text.splitlines() if not line.startswith("#")) == 21

    def test_negative_dt_is_config_error(self, tmp_path, capsys):
        rc = main(["run", "--dt", "-0.001", "--out", str(tmp_path)])
        assert rc == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_unknown_key_is_config_error(self, tmp_path):
        rc = main(["run", "--set", "scenario.bogus=1", "--out", str(tmp_path)])
        assert rc == EXIT_CONFIG

    def test_divergence_exit_code(self, tmp_path, capsys):
        # huge initial displacement with tiny gains cannot be stabilized
        rc = main([
            "run", "--q0", "1.2,-1.2,1.2", "--out", str(tmp_path),
            "--set", "ankle.Kp=0.001", "--set", "knee.Kp=0.001",
            "--set", "hip.Kp=0.001", "--set", "ankle.Kd=0",
            "--set", "knee.Kd=0", "--set", "hip.Kd=0",
        ])
        assert rc == EXIT_DIVERGED
        assert "divergence" in capsys.readouterr().err


class TestCompare:
    def test_writes_all_outputs(self, tmp_path, capsys):
        rc = main(["compare", "--out", str(tmp_path)] + _short())
        assert rc == EXIT_OK
        for name in (
            "trajectory_original.csv",
            "trajectory_distributed.csv",
            "metrics_original.txt",
            "metrics_distributed.txt",
            "compare_metrics.txt",
        ):
            assert (tmp_path / name).exists(), name
        out = capsys.readouterr().out
        assert "Original" in out and "Distributed" in out

    def test_repeat_runs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["compare", "--out", str(a)] + _short()) == EXIT_OK
        assert main(["compare", "--out", str(b)] + _short()) == EXIT_OK
        for name in (
            "trajectory_original.csv",
            "trajectory_distributed.csv",
            "compare_metrics.txt",
        ):
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestValidateConfig:
    def test_echoes_effective_config(self, capsys):
        rc = main(["validate-config"])
        assert rc == EXIT_OK
        out = capsys.readouterr().out
        assert "ankle.Kp = 465.98" in out
        assert "scenario.mode = distributed" in out

    def test_flag_overrides_win_over_set(self, capsys):
        rc = main(["validate-config", "--set", "scenario.T_e=0.3", "--te", "0.2"])
        assert rc == EXIT_OK
        assert "scenario.T_e = 0.2" in capsys.readouterr().out

    def test_te_override_doubles_round_count(self, tmp_path):
        from decsim.config import load_scenario
        from decsim.harness import simulate

        base = load_scenario(None, ["scenario.duration=1.0"])
        halved = load_scenario(None, ["scenario.duration=1.0", "scenario.T_e=0.025"])
        n_base = len(simulate(base).rounds)
        n_halved = len(simulate(halved).rounds)
        assert n_halved == pytest.approx(2 * n_base, abs=1)

    def test_bad_q0_flag(self, capsys):
        with pytest.raises(SystemExit):
            main(["run", "--q0"])
        rc = main(["validate-config", "--q0", "1,2"])
        assert rc == EXIT_CONFIG
