import json
import math
from pathlib import Path
from typing import Any, Sequence

import jax
import numpy as np

from transwave import constants
from transwave.config import SystemConfig
from transwave.core.jax.pytrees import TreeClass
from transwave.errors import MissingKey, ParseError, UnknownKey

CONFIG_KEYS: tuple[str, ...] = ("L0", "L", "a1", "a2", "d1", "d2", "c1", "c2", "alpha", "beta")
_BREAKPOINT_KEYS = ("alpha", "beta")


def _export_json(obj: Any) -> Any:
    if obj is None or isinstance(obj, bool | int | str):
        return obj
    if isinstance(obj, float):
        # json has no inf/nan, keep them readable
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, complex):
        return [_export_json(obj.real), _export_json(obj.imag)]
    if isinstance(obj, jax.Array | np.ndarray | np.generic):
        arr = np.asarray(obj)
        if np.iscomplexobj(arr):
            return _export_json(np.stack([arr.real, arr.imag], axis=-1).tolist())
        return _export_json(arr.tolist())
    if isinstance(obj, TreeClass):
        return {name: _export_json(value) for name, value in obj.to_dict().items()}
    if isinstance(obj, dict):
        for k in obj:
            if not isinstance(k, str):
                raise NotImplementedError(f"Only string keys can be exported, got {k!r}")
        return {k: _export_json(v) for k, v in obj.items()}
    if isinstance(obj, Sequence):
        return [_export_json(v) for v in obj]
    raise NotImplementedError(f"Cannot export object of type {type(obj).__name__}")


def export_json(obj: Any) -> Any:
    """Converts tree classes, arrays and containers into plain JSON-compatible values.

    Args:
        obj (Any): The object to serialize.

    Returns:
        Any: dicts, lists, numbers, strings or None
    """
    return _export_json(obj)


def export_json_str(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, 4-space indent) of ``obj``."""
    return json.dumps(export_json(obj), sort_keys=True, indent=4)


def config_to_dict(cfg: SystemConfig) -> dict[str, Any]:
    """The SystemConfig fields of ``cfg`` (extra fields of a validated config are left out)."""
    result: dict[str, Any] = {}
    for key in CONFIG_KEYS:
        value = getattr(cfg, key)
        result[key] = [float(v) for v in value] if key in _BREAKPOINT_KEYS else float(value)
    return result


def canonical_config_json(cfg: SystemConfig) -> str:
    """One-line JSON of the configuration with sorted keys, used in output headers."""
    return json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))


def _is_number(value: Any) -> bool:
    return isinstance(value, int | float) and not isinstance(value, bool)


def config_from_dict(data: Any) -> SystemConfig:
    """Builds a SystemConfig from a flat mapping whose keys are exactly the config field names.

    Raises:
        ParseError: the mapping is not a JSON object or holds a value of the wrong type.
        UnknownKey: the mapping has keys that are not config fields.
        MissingKey: config fields are missing; the message lists all of them.
    """
    if not isinstance(data, dict):
        raise ParseError(f"Configuration must be a JSON object, got {type(data).__name__}")
    unknown = [k for k in data if k not in CONFIG_KEYS]
    if unknown:
        raise UnknownKey(f"Unknown configuration keys: {', '.join(sorted(unknown))}")
    missing = [k for k in CONFIG_KEYS if k not in data]
    if missing:
        raise MissingKey(f"Missing configuration keys: {', '.join(missing)}")

    values: dict[str, Any] = {}
    for key in CONFIG_KEYS:
        value = data[key]
        if key in _BREAKPOINT_KEYS:
            if not isinstance(value, list) or len(value) != 4 or not all(_is_number(v) for v in value):
                raise ParseError(f"Key '{key}' must be a list of 4 numbers, got {value!r}")
            values[key] = tuple(float(v) for v in value)
        else:
            if not _is_number(value):
                raise ParseError(f"Key '{key}' must be a number, got {value!r}")
            values[key] = float(value)
    return SystemConfig(**values)


def parse_config(path: str | Path) -> SystemConfig:
    """Reads a JSON configuration file.

    Args:
        path (str | Path): Path of the JSON document.

    Returns:
        SystemConfig: the (not yet validated) configuration.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ParseError(f"Cannot read configuration file {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e}") from e
    return config_from_dict(data)


def write_config(path: str | Path, cfg: SystemConfig) -> Path:
    """Writes ``cfg`` as a JSON document readable by :func:`parse_config`."""
    path = Path(path)
    path.write_text(json.dumps(config_to_dict(cfg), sort_keys=True, indent=4) + "\n")
    return path


def header_lines(cfg: SystemConfig, settings: dict[str, Any] | None = None) -> list[str]:
    """Comment header recording the resolved configuration, numerical settings and version."""
    lines = [
        f"# transwave {constants.VERSION}",
        f"# config: {canonical_config_json(cfg)}",
    ]
    if settings:
        lines.append(f"# settings: {json.dumps(export_json(settings), sort_keys=True, separators=(',', ':'))}")
    return lines


def write_report(path: str | Path, report: dict[str, Any], cfg: SystemConfig, settings: dict | None = None) -> Path:
    """Writes a JSON report preceded by the ``#`` header.

    The header makes the file a commented JSON document; :func:`read_report` strips it again.
    """
    path = Path(path)
    body = export_json_str(report)
    path.write_text("\n".join(header_lines(cfg, settings)) + "\n" + body + "\n")
    return path


def read_report(path: str | Path) -> Any:
    lines = Path(path).read_text().splitlines()
    return json.loads("\n".join(line for line in lines if not line.startswith("#")))
