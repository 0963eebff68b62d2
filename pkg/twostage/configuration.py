from __future__ import annotations

import json
import logging
from collections.abc import Iterable, MutableMapping
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

DEFAULT_CONFIG_PATH = Path(__file__).with_name("config.yaml")


class TwoStageSettings(BaseModel):
    """Validated defaults for simulations, sweeps and logging."""

    seed: int = Field(42, ge=0, lt=2**64)
    reps: int = Field(1000, ge=1)
    oracle_budget: int = Field(10_000_000, ge=1)
    refine_window: int = Field(2, ge=0)
    workers: int = Field(1, ge=1)
    agreement_tolerance: float = Field(0.03, gt=0.0)
    log_level: str = "INFO"
    log_file: str | None = None
    log_max_bytes: int = Field(1_048_576, ge=0)
    log_backup_count: int = Field(5, ge=0)

    @field_validator("log_level", mode="before")
    @classmethod
    def _normalize_level(cls, value: Any) -> str:
        level = str(value).strip().upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"unknown log level: {value}")
        return level

    @field_validator("log_file", mode="before")
    @classmethod
    def _blank_is_none(cls, value: Any) -> str | None:
        if value is None or not str(value).strip():
            return None
        return str(value).strip()

    @classmethod
    def load(cls, path: str | Path = DEFAULT_CONFIG_PATH) -> TwoStageSettings:
        payload = _read_config(path)
        try:
            return cls.model_validate(payload)
        except ValidationError as exc:
            raise ValueError(str(exc)) from exc

    def save(self, path: str | Path) -> None:
        _write_config(path, self.model_dump(mode="json"))


def _read_config(path: str | Path) -> dict[str, Any]:
    path_obj = Path(path)
    if not path_obj.exists():
        raise FileNotFoundError(f"Configuration file not found: {path_obj}")
    suffix = path_obj.suffix.lower()
    text = path_obj.read_text(encoding="utf-8")
    if suffix in {".yaml", ".yml", ""}:
        return yaml.safe_load(text) or {}
    if suffix == ".json":
        return json.loads(text)
    if suffix == ".toml":
        import tomllib

        return tomllib.loads(text)
    raise ValueError(f"Unsupported configuration format: {suffix}")


def _write_config(path: str | Path, payload: dict[str, Any]) -> None:
    path_obj = Path(path)
    suffix = path_obj.suffix.lower()
    if suffix in {".yaml", ".yml", ""}:
        serialized = yaml.safe_dump(payload, allow_unicode=True, sort_keys=True)
    elif suffix == ".json":
        serialized = json.dumps(payload, ensure_ascii=False, indent=2)
    else:
        # tomllib only reads
        raise ValueError(f"Unsupported configuration format for writing: {suffix}")
    path_obj.write_text(serialized, encoding="utf-8")


def apply_key_path(
    settings: TwoStageSettings,
    key_path: Iterable[str],
    value: Any,
) -> TwoStageSettings:
    """Set one field by dotted path and re-validate.

    Settings are flat, so a path with more than one segment is rejected.
    """

    data: MutableMapping[str, Any] = settings.model_dump(mode="json")
    segments: tuple[str, ...] = tuple(key_path)
    if not segments:
        raise ValueError("Key path cannot be empty")
    if len(segments) > 1 or segments[0] not in data:
        raise ValueError(f"Unknown setting: {'.'.join(segments)}")
    data[segments[0]] = value
    try:
        return TwoStageSettings.model_validate(data)
    except ValidationError as exc:
        raise ValueError(str(exc)) from exc


def parse_typed_value(raw: str, value_type: str) -> Any:
    if value_type == "str":
        return raw
    if value_type == "int":
        return int(raw)
    if value_type == "float":
        return float(raw)
    if value_type == "bool":
        lowered = raw.strip().lower()
        if lowered in {"1", "true", "yes", "y", "on"}:
            return True
        if lowered in {"0", "false", "no", "n", "off"}:
            return False
        raise ValueError(f"Cannot parse boolean value from '{raw}'")
    if value_type == "json":
        return json.loads(raw)
    if value_type == "null":
        return None
    raise ValueError(f"Unsupported value type: {value_type}")
