"""Tests for the stagebench CLI surface and exit codes."""

from stagebench.cli import main


def write(path, text):
    path.write_text(text)
    return str(path)


class TestCheckGains:
    def test_500_30_pair_reported_unsatisfied(self, capsys):
        rc = main(["check-gains", "--rho", "0.2", "--h1", "500", "--h2", "30"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "h1_min      = 0.82" in out
        assert "h2_required = 100.24" in out
        assert "satisfied   = false" in out

    def test_matched_pair_satisfied(self, capsys):
        rc = main(["check-gains", "--rho", "0.2", "--h1", "500", "--h2", "100.24"])
        assert rc == 0
        assert "satisfied   = true" in capsys.readouterr().out

    def test_invalid_rho_is_config_error(self, capsys):
        rc = main(["check-gains", "--rho", "-1", "--h1", "5", "--h2", "1"])
        assert rc == 1
        assert "config error" in capsys.readouterr().err


class TestDumpConfig:
    def test_dump_shows_resolved_values(self, tmp_path, capsys):
        spec = write(tmp_path / "s.ini", "[plant]\ndelta_a = 0.07\n")
        rc = main(["run", spec, "--dump-config"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "[plant]" in out and "delta_a = 0.07" in out
        assert "[fosta]" in out

    def test_seed_override_appears_in_dump(self, tmp_path, capsys):
        rc = main(["run", "--seed", "9", "--dump-config"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "seeds = 9" in out


class TestRun:
    def test_small_run_writes_artifacts(self, tmp_path, capsys):
        spec = write(tmp_path / "s.ini",
                     "[profile]\ncycles = 1\n"
                     "[bench]\ncontrollers = fosta\nseeds = 1\n")
        rc = main(["run", spec, "--out", str(tmp_path / "out")])
        out = capsys.readouterr().out
        assert rc == 0
        assert (tmp_path / "out" / "summary.csv").exists()
        assert "FOSTA" in out

    def test_missing_spec_file_is_exit_1(self, capsys):
        rc = main(["run", "/nonexistent/spec.ini"])
        assert rc == 1

    def test_bad_value_is_exit_1(self, tmp_path, capsys):
        spec = write(tmp_path / "s.ini", "[sim]\nh_ctrl = banana\n")
        rc = main(["run", spec, "--out", str(tmp_path / "out")])
        assert rc == 1

    def test_faulted_run_is_exit_2(self, tmp_path, capsys):
        spec = write(tmp_path / "s.ini",
                     "[profile]\ncycles = 1\n"
                     "[sim]\nu_max = inf\n"
                     "[pid]\nkp = 1e308\nki = 0\nkd = 0\n"
                     "[bench]\ncontrollers = pid\nseeds = 1\n")
        rc = main(["run", spec, "--out", str(tmp_path / "out")])
        assert rc == 2

    def test_set_override(self, tmp_path, capsys):
        rc = main(["run", "--set", "plant.delta_a=0.33", "--dump-config"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "delta_a = 0.33" in out


class TestTune:
    def test_tiny_grid(self, tmp_path, capsys):
        spec = write(tmp_path / "s.ini", "[profile]\ncycles = 1\n")
        grid = write(tmp_path / "g.ini", "[grid]\nk_s = 2 50\n")
        rc = main(["tune", "smc", grid, "--spec", spec,
                   "--out", str(tmp_path / "tout")])
        out = capsys.readouterr().out
        assert rc == 0
        assert "k_s = 2" in out
        assert (tmp_path / "tout" / "tune_smc.csv").exists()

    def test_grid_without_section_is_exit_1(self, tmp_path, capsys):
        grid = write(tmp_path / "g.ini", "[plant]\ndelta_a = 0\n")
        rc = main(["tune", "pid", grid])
        assert rc == 1
