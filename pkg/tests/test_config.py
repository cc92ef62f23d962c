import pytest

from fracblowup.config import Settings, load_run_file, merge_params, settings
from fracblowup.errors import ConfigError
from fracblowup.schemas.run import Command, RunConfig


def test_settings_is_a_singleton():
    assert Settings() is settings


def test_reload_reads_environment(clean_settings):
    clean_settings.setenv("FRACBLOWUP_THREADS", "3")
    clean_settings.setenv("FRACBLOWUP_TAIL_CUTOFF", "1e6")
    settings.reload()
    assert settings.threads == 3
    assert settings.tail_cutoff == 1e6


@pytest.mark.parametrize("name, value", [("FRACBLOWUP_THREADS", "many"), ("FRACBLOWUP_TAIL_CUTOFF", "5")])
def test_reload_rejects_bad_values(clean_settings, name, value):
    clean_settings.setenv(name, value)
    with pytest.raises(ConfigError):
        settings.reload()


def test_run_file_sections_are_flattened(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('s = 0.5\n\n[model]\nfamily = "power"\np = 2.5\n\n[solve]\nk = 4.0\nmesh_n = 64\n')
    assert load_run_file(str(path)) == {"s": 0.5, "family": "power", "p": 2.5, "k": 4.0, "mesh_n": 64}


def test_missing_run_file():
    with pytest.raises(ConfigError):
        load_run_file("/nonexistent/run.toml")


def test_malformed_run_file(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("s = = 0.5\n")
    with pytest.raises(ConfigError):
        load_run_file(str(path))


def test_no_run_file_gives_empty_params():
    assert load_run_file(None) == {}


def test_flags_win_over_file_values():
    merged = merge_params({"s": 0.5, "p": 2.5}, {"p": 3.0, "k": None})
    assert merged == {"s": 0.5, "p": 3.0}


def test_hashed_view_excludes_output_dir():
    first = RunConfig(command=Command.SOLVE, params={"s": 0.5}, output_dir="a")
    second = RunConfig(command=Command.SOLVE, params={"s": 0.5}, output_dir="b")
    assert first.hashed_view() == second.hashed_view()
