"""Tests for correlation IDs, run-log destinations and the unified logger."""

import logging
from datetime import datetime, timedelta

import pytest

from worstclass_boost.config import AppConfig
from worstclass_boost.log_system import (
    CorrelationContext,
    UnifiedLogger,
    clear_correlation_id,
    generate_correlation_id,
    get_correlation_id,
    set_correlation_id,
)
from worstclass_boost.log_system.destinations.base import DestinationConfig, LogEntry
from worstclass_boost.log_system.destinations.factory import CompositeDestination, LogDestinationFactory
from worstclass_boost.log_system.destinations.jsonl import JsonlDestination
from worstclass_boost.log_system.destinations.sqlite import SQLiteDestination


def make_entry(correlation_id="run_1", **fields):
    defaults = dict(
        correlation_id=correlation_id,
        timestamp=datetime(2024, 5, 1, 12, 0, 0),
        level="INFO",
        log_type="run",
        message="cell finished",
    )
    defaults.update(fields)
    return LogEntry(**defaults)


@pytest.fixture(params=["sqlite", "jsonl"])
def destination(request, tmp_path):
    if request.param == "sqlite":
        dest = SQLiteDestination(AppConfig(), path=tmp_path / "logs.db")
    else:
        dest = JsonlDestination(AppConfig(), path=tmp_path / "logs.jsonl")
    yield dest
    dest.close()


@pytest.fixture
def captured(tmp_path):
    """Unified logger writing to a JSON-lines file."""
    dest = JsonlDestination(AppConfig(), path=tmp_path / "captured.jsonl")
    UnifiedLogger.initialize(dest, level="DEBUG")
    yield dest
    UnifiedLogger.close()
    clear_correlation_id()


class TestCorrelation:
    def test_generate_uses_prefix(self):
        cid = generate_correlation_id("cmd")
        assert cid.startswith("cmd_")
        assert len(cid) == len("cmd_") + 12
        assert generate_correlation_id() != generate_correlation_id()

    def test_set_get_clear(self):
        assert set_correlation_id("run_abc") == "run_abc"
        assert get_correlation_id() == "run_abc"
        clear_correlation_id()
        assert get_correlation_id() is None

    def test_context_restores_enclosing_id(self):
        clear_correlation_id()
        with CorrelationContext(prefix="cmd") as outer:
            with CorrelationContext("run_inner") as inner:
                assert inner == "run_inner"
                assert get_correlation_id() == "run_inner"
            assert get_correlation_id() == outer
        assert get_correlation_id() is None


class TestDestinations:
    def test_write_and_filter(self, destination):
        destination.write(make_entry("run_1", method="worstclass_boost", seed=0, theta=0.5,
                                     input_args={"seed": 0}))
        destination.write(make_entry("run_2", log_type="round", round=3, level="DEBUG"))
        destination.write(make_entry("run_1", status="success", duration_ms=12.5))

        run_1 = destination.query(correlation_id="run_1")
        assert [e.status for e in run_1] == ["success", None]
        assert run_1[1].method == "worstclass_boost"
        assert run_1[1].theta == 0.5
        assert run_1[1].input_args == {"seed": 0}

        rounds = destination.query(log_type="round")
        assert len(rounds) == 1
        assert rounds[0].round == 3
        assert destination.query(level="DEBUG")[0].correlation_id == "run_2"
        assert len(destination.query(limit=2)) == 2

    def test_extra_data_round_trip(self, destination):
        destination.write(make_entry(extra_data={"error_code": "config_error"}))
        assert destination.query()[0].extra_data == {"error_code": "config_error"}

    def test_sqlite_time_window(self, tmp_path):
        dest = SQLiteDestination(AppConfig(), path=tmp_path / "window.db")
        base = datetime(2024, 5, 1, 12, 0, 0)
        for minutes in (0, 10, 20):
            dest.write(make_entry(timestamp=base + timedelta(minutes=minutes), message=f"m{minutes}"))
        window = dest.query(start_time=base + timedelta(minutes=5), end_time=base + timedelta(minutes=15))
        assert [e.message for e in window] == ["m10"]
        dest.close()

    def test_sqlite_defaults_to_configured_path(self):
        config = AppConfig()
        with SQLiteDestination(config) as dest:
            dest.write(make_entry())
        assert config.run_log_db_path.exists()


class TestFactory:
    def test_registered_types(self):
        assert {"sqlite", "jsonl"} <= set(LogDestinationFactory.get_available_types())

    def test_unknown_type(self):
        with pytest.raises(ValueError, match="available: sqlite, jsonl"):
            LogDestinationFactory.create("kafka", AppConfig())

    def test_defaults_to_sqlite(self):
        assert isinstance(LogDestinationFactory.create_from_config([], AppConfig()), SQLiteDestination)
        disabled = [DestinationConfig(type="jsonl", enabled=False)]
        assert isinstance(LogDestinationFactory.create_from_config(disabled, AppConfig()), SQLiteDestination)

    def test_several_destinations_fan_out(self, tmp_path):
        configs = [
            DestinationConfig(type="sqlite", settings={"path": str(tmp_path / "a.db")}),
            DestinationConfig(type="jsonl", settings={"path": str(tmp_path / "a.jsonl")}),
        ]
        dest = LogDestinationFactory.create_from_config(configs, AppConfig())
        assert isinstance(dest, CompositeDestination)
        dest.write(make_entry())
        assert len(dest.query()) == 1
        assert len(dest.destinations[1].query()) == 1
        dest.close()


class TestUnifiedLogger:
    def test_fields_promoted_to_columns(self, captured):
        with CorrelationContext("run_test"):
            logger = UnifiedLogger.get_logger("tests")
            logger.info("round done", log_type="round", method="worstclass_boost", round=4, seed=2,
                        custom="kept")
        UnifiedLogger.flush()
        entry = captured.query(correlation_id="run_test")[0]
        assert entry.log_type == "round"
        assert entry.round == 4
        assert entry.seed == 2
        assert entry.extra_data["custom"] == "kept"
        assert entry.extra_data["logger_name"] == "tests"

    def test_unbound_entries_are_internal(self, captured):
        clear_correlation_id()
        UnifiedLogger.get_logger().debug("housekeeping")
        UnifiedLogger.flush()
        entry = captured.query()[0]
        assert entry.log_type == "internal"
        assert entry.correlation_id == "init"
        assert entry.level == "DEBUG"

    def test_standard_logging_is_intercepted(self, captured):
        logging.getLogger("third_party").warning("from stdlib")
        UnifiedLogger.flush()
        assert any(e.message == "from stdlib" for e in captured.query())

    def test_initialize_from_config(self, tmp_path):
        config = AppConfig(logging_destinations={"destinations": [
            {"type": "jsonl", "enabled": True, "settings": {"path": str(tmp_path / "cfg.jsonl")}}
        ]})
        UnifiedLogger.initialize_from_config(config, console=False)
        try:
            assert isinstance(UnifiedLogger.get_destination(), JsonlDestination)
            UnifiedLogger.get_logger().info("configured")
            UnifiedLogger.flush()
            assert (tmp_path / "cfg.jsonl").exists()
        finally:
            UnifiedLogger.close()
        assert UnifiedLogger.get_destination() is None
