import pytest

from twolayer_pcdg.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main, read_config_file
from twolayer_pcdg.errors import ConfigError


def test_list_cases(capsys):
    assert main(["list-cases"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in ("still_wb_1d", "moving_wb_1d", "accuracy", "dam_break_2d_flat"):
        assert name in out


def test_run_writes_outputs(tmp_path, capsys):
    code = main(["run", "--case", "accuracy", "--nx", "20", "--k", "1", "--tend", "0.005",
                 "--ref", "initial", "--out", str(tmp_path)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "errors against reference 'initial'" in out
    assert (tmp_path / "accuracy_still_meta.json").exists()
    assert (tmp_path / "accuracy_still_final.npz").exists()


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# smoke run\ncase = accuracy\nnx = 20\nk = 1\ntend = 0.5\n")
    assert main(["run", "--config", str(cfg), "--tend", "0.002", "--ref", "none"]) == EXIT_OK
    assert "t_end=0.002" in capsys.readouterr().out


def test_config_errors_exit_3(tmp_path, capsys):
    assert main(["run", "--case", "no_such_case"]) == EXIT_CONFIG
    assert main(["run", "--case", "still_wb_2d", "--scheme", "moving"]) == EXIT_CONFIG
    assert main(["run", "--nx", "10"]) == EXIT_CONFIG
    assert main(["convergence", "--case", "accuracy"]) == EXIT_CONFIG
    bad = tmp_path / "bad.cfg"
    bad.write_text("case = accuracy\nbogus = 1\n")
    assert main(["run", "--config", str(bad)]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_solver_failure_exit_2(capsys):
    # a huge CFL number drives depths negative within a few steps
    code = main(["run", "--case", "riemann_1", "--nx", "50", "--cfl", "5", "--tend", "0.05",
                 "--ref", "none"])
    assert code == EXIT_SOLVER
    assert "solver failure" in capsys.readouterr().err


def test_convergence_command(tmp_path, capsys):
    code = main(["convergence", "--case", "accuracy", "--meshes", "10,20", "--k", "1",
                 "--tend", "0.005", "--ref", "self:40", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / "accuracy_convergence.csv").exists()
    assert "order" in capsys.readouterr().out


def test_read_config_file_errors(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("nx 10\n")
    with pytest.raises(ConfigError):
        read_config_file(p)
    p.write_text("nx = ten\n")
    with pytest.raises(ConfigError):
        read_config_file(p)
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.cfg")
