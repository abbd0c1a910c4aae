import csv

import pytest
from loguru import logger

from transwave.utils.logger import Logger, init_working_directory


def test_init_working_directory(tmp_path):
    path = init_working_directory("study", wd_name="run", root=tmp_path)
    assert path.is_dir()
    assert path.name == "run"
    assert path.parent.name == "study"
    assert path.parent.parent.parent == tmp_path / "outputs"


def test_logger_writes_log_and_metrics(tmp_path):
    log = Logger(tmp_path / "out", experiment_name="test")
    logger.info("hello from the test")
    log.write({"C0": 0.1, "regime": "a2_equal_1", "ignored": [1, 2]}, do_print=False)
    log.write({"C0": 0.2, "regime": "a2_not_1"})
    log.close()

    assert log.path("x.csv") == tmp_path / "out" / "x.csv"
    assert "hello from the test" in (tmp_path / "out" / "logs.log").read_text()
    with open(tmp_path / "out" / "metrics.csv") as f:
        rows = list(csv.DictReader(f))
    assert rows == [{"C0": "0.1", "regime": "a2_equal_1"}, {"C0": "0.2", "regime": "a2_not_1"}]


def test_logger_handles_braces_and_markup(tmp_path):
    log = Logger(tmp_path / "out")
    logger.error("Configuration contains non-finite values: {'L0': nan} [bold]")
    log.close()

    assert "{'L0': nan} [bold]" in (tmp_path / "out" / "logs.log").read_text()


def test_logger_timestamped_directory(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    log = Logger(experiment_name="stamped")
    log.close()
    assert (tmp_path / "outputs").is_dir()
    assert log.cwd.parent.name == "stamped"


def test_metrics_header_precedes_rows(tmp_path):
    log = Logger(tmp_path / "out")
    log.write_header(["# transwave 0.1.0", "config: {}"])
    log.write({"C0": 0.1}, do_print=False)
    with pytest.raises(RuntimeError):
        log.write_header(["# late"])
    log.close()

    lines = (tmp_path / "out" / "metrics.csv").read_text().splitlines()
    assert lines[:2] == ["# transwave 0.1.0", "# config: {}"]
    rows = list(csv.DictReader(line for line in lines if not line.startswith("#")))
    assert rows == [{"C0": "0.1"}]
