from pathlib import Path

import pytest

from twostage.configuration import (
    DEFAULT_CONFIG_PATH,
    TwoStageSettings,
    _read_config,
    _write_config,
    apply_key_path,
    parse_typed_value,
)


def write_config(path: Path, content: str) -> Path:
    path.write_text(content, encoding="utf-8")
    return path


def test_default_configuration_loads() -> None:
    settings = TwoStageSettings.load(DEFAULT_CONFIG_PATH)
    assert settings == TwoStageSettings()
    assert settings.seed == 42
    assert settings.oracle_budget == 10_000_000


def test_load_configuration_and_normalization(tmp_path: Path) -> None:
    cfg_path = write_config(
        tmp_path / "config.yaml",
        """
seed: 7
reps: 250
log_level: debug
log_file: "  "
        """.strip(),
    )
    settings = TwoStageSettings.load(cfg_path)
    assert settings.seed == 7
    assert settings.reps == 250
    assert settings.log_level == "DEBUG"
    assert settings.log_file is None
    assert settings.workers == 1


def test_empty_file_falls_back_to_defaults(tmp_path: Path) -> None:
    assert TwoStageSettings.load(write_config(tmp_path / "config.yaml", "")) == TwoStageSettings()


@pytest.mark.parametrize(
    "content", ["reps: 0\n", "log_level: LOUD\n", "seed: -1\n", "agreement_tolerance: 0\n"]
)
def test_invalid_values_raise(tmp_path: Path, content: str) -> None:
    with pytest.raises(ValueError):
        TwoStageSettings.load(write_config(tmp_path / "config.yaml", content))


def test_json_and_toml_configurations(tmp_path: Path) -> None:
    json_path = write_config(tmp_path / "config.json", '{"reps": 12}')
    assert TwoStageSettings.load(json_path).reps == 12
    toml_path = write_config(tmp_path / "config.toml", "workers = 3\n")
    assert TwoStageSettings.load(toml_path).workers == 3


def test_save_round_trips_through_yaml(tmp_path: Path) -> None:
    settings = TwoStageSettings(reps=99, log_file="runs/twostage.log")
    target = tmp_path / "saved.yaml"
    settings.save(target)
    assert TwoStageSettings.load(target) == settings


def test_apply_key_path_updates() -> None:
    updated = apply_key_path(TwoStageSettings(), ["refine_window"], 4)
    assert updated.refine_window == 4


def test_apply_key_path_rejects_unknown_and_nested_keys() -> None:
    settings = TwoStageSettings()
    with pytest.raises(ValueError):
        apply_key_path(settings, [], 3)
    with pytest.raises(ValueError, match="Unknown setting"):
        apply_key_path(settings, ["colour"], "blue")
    with pytest.raises(ValueError, match="Unknown setting"):
        apply_key_path(settings, ["reps", "inner"], 3)
    with pytest.raises(ValueError):
        apply_key_path(settings, ["workers"], 0)


def test_parse_typed_value() -> None:
    assert parse_typed_value("true", "bool") is True
    assert parse_typed_value("3.14", "float") == pytest.approx(3.14)
    assert parse_typed_value("42", "int") == 42
    assert parse_typed_value('{"a": 1}', "json") == {"a": 1}
    assert parse_typed_value("anything", "null") is None
    with pytest.raises(ValueError):
        parse_typed_value("maybe", "bool")


def test_parse_typed_value_rejects_unknown_type() -> None:
    with pytest.raises(ValueError, match="Unsupported value type"):
        parse_typed_value("hello", "uuid")


def test_load_missing_configuration_file(tmp_path: Path) -> None:
    with pytest.raises(FileNotFoundError):
        TwoStageSettings.load(tmp_path / "missing.yaml")


def test_read_config_unsupported_format(tmp_path: Path) -> None:
    cfg_path = write_config(tmp_path / "config.ini", "[section]\nvalue=1\n")
    with pytest.raises(ValueError, match="Unsupported configuration format"):
        _read_config(cfg_path)


@pytest.mark.parametrize("name", ["config.ini", "config.toml"])
def test_write_config_unsupported_format(tmp_path: Path, name: str) -> None:
    with pytest.raises(ValueError, match="Unsupported configuration format"):
        _write_config(tmp_path / name, {"a": 1})
