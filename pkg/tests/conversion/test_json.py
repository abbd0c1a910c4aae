import json

import jax.numpy as jnp
import pytest

from transwave.config import SystemConfig, default_config
from transwave.conversion.json import (
    CONFIG_KEYS,
    canonical_config_json,
    config_from_dict,
    config_to_dict,
    export_json,
    export_json_str,
    header_lines,
    parse_config,
    read_report,
    write_config,
    write_report,
)
from transwave.core.linalg import LineFit
from transwave.errors import MissingKey, ParseError, UnknownKey


def test_export_json_values():
    data = export_json(
        {
            "array": jnp.array([1.0, 2.0]),
            "complex": jnp.array([1 + 2j]),
            "scalar": 1 + 1j,
            "inf": float("inf"),
            "tuple": (1, "a", None),
        }
    )
    assert data["array"] == [1.0, 2.0]
    assert data["complex"] == [[1.0, 2.0]]
    assert data["scalar"] == [1.0, 1.0]
    assert data["inf"] == "inf"
    assert data["tuple"] == [1, "a", None]


def test_export_tree_class():
    fit = LineFit(slope=1.0, intercept=0.0, r_squared=1.0, num_points=3)
    assert export_json(fit) == {"slope": 1.0, "intercept": 0.0, "r_squared": 1.0, "num_points": 3}


def test_export_rejects_unknown_objects():
    with pytest.raises(NotImplementedError):
        export_json(object())
    with pytest.raises(NotImplementedError):
        export_json({1: "a"})


def test_export_json_str_is_sorted():
    text = export_json_str({"b": 1, "a": 2})
    assert text.index('"a"') < text.index('"b"')


def test_config_dict_round_trip():
    cfg = default_config(a2=2.0)
    data = config_to_dict(cfg)
    assert sorted(data) == sorted(CONFIG_KEYS)
    assert data["alpha"] == [0.1, 0.2, 0.3, 0.4]
    assert config_to_dict(config_from_dict(data)) == data


def test_config_from_dict_errors():
    data = config_to_dict(default_config())
    with pytest.raises(UnknownKey):
        config_from_dict({**data, "gamma": 1.0})
    missing = {k: v for k, v in data.items() if k not in ("a1", "beta")}
    with pytest.raises(MissingKey) as info:
        config_from_dict(missing)
    assert "a1" in str(info.value) and "beta" in str(info.value)
    with pytest.raises(ParseError):
        config_from_dict({**data, "alpha": [0.1, 0.2, 0.3]})
    with pytest.raises(ParseError):
        config_from_dict({**data, "c1": "half"})
    with pytest.raises(ParseError):
        config_from_dict({**data, "d2": True})
    with pytest.raises(ParseError):
        config_from_dict([1, 2])


def test_parse_config_file(tmp_path):
    cfg = default_config(a2=3.0)
    path = write_config(tmp_path / "cfg.json", cfg)
    parsed = parse_config(path)
    assert isinstance(parsed, SystemConfig)
    assert parsed.a2 == 3.0
    assert parsed.beta == cfg.beta


def test_parse_config_invalid_files(tmp_path):
    with pytest.raises(ParseError):
        parse_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ParseError):
        parse_config(broken)


def test_header_lines():
    lines = header_lines(default_config(), {"h": 0.02})
    assert lines[0].startswith("# transwave ")
    assert lines[1] == f"# config: {canonical_config_json(default_config())}"
    assert json.loads(lines[2].removeprefix("# settings: ")) == {"h": 0.02}
    assert len(header_lines(default_config())) == 2


def test_report_round_trip(tmp_path):
    path = write_report(tmp_path / "report.json", {"exponent": 1.5, "values": jnp.arange(3)}, default_config())
    assert path.read_text().startswith("# transwave")
    assert read_report(path) == {"exponent": 1.5, "values": [0, 1, 2]}


def test_reports_are_deterministic(tmp_path):
    report = {"b": 0.1, "a": [1.0, 2.0]}
    first = write_report(tmp_path / "one.json", report, default_config(), {"h": 0.1}).read_bytes()
    second = write_report(tmp_path / "two.json", report, default_config(), {"h": 0.1}).read_bytes()
    assert first == second
