"""Configuration management for worstclass_boost

This module provides platform-aware configuration management using platformdirs
so the configuration file, the run-log database and default experiment output
land in the appropriate per-user locations on every operating system.

Environment overrides (used by the test-suite to isolate state):
    WCBOOST_CONFIG_DIR, WCBOOST_DATA_DIR, WCBOOST_LOG_DIR, LOG_LEVEL
"""

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import platformdirs
import yaml

APP_NAME = "worstclass_boost"


def _dir_from_env(var: str, fallback: str) -> Path:
    value = os.environ.get(var)
    return Path(value) if value else Path(fallback)


@dataclass
class AppConfig:
    """Configuration for the library, the experiment harness and logging."""

    name: str = APP_NAME

    # Logging configuration
    log_level: str = "INFO"
    console_logging: bool = True
    logging_destinations: Dict[str, Any] = None

    # Experiment defaults
    tree_max_depth: int = 6
    epsilon: float = 0.0005
    patience: Optional[int] = 100
    max_workers: int = 4

    # Platform-aware paths
    config_dir: Path = None
    data_dir: Path = None
    log_dir: Path = None

    # File paths (computed from directories)
    config_file_path: Path = None
    log_file_path: Path = None
    run_log_db_path: Path = None
    experiments_dir: Path = None
    database_name: str = "run_logs.db"

    def __post_init__(self):
        """Initialize platform-aware paths after dataclass creation."""
        if self.config_dir is None:
            self.config_dir = _dir_from_env("WCBOOST_CONFIG_DIR", platformdirs.user_config_dir(APP_NAME))
        if self.data_dir is None:
            self.data_dir = _dir_from_env("WCBOOST_DATA_DIR", platformdirs.user_data_dir(APP_NAME))
        if self.log_dir is None:
            self.log_dir = _dir_from_env("WCBOOST_LOG_DIR", platformdirs.user_log_dir(APP_NAME))
        if os.environ.get("LOG_LEVEL"):
            self.log_level = os.environ["LOG_LEVEL"].upper()

        for directory in (self.config_dir, self.data_dir, self.log_dir):
            directory.mkdir(parents=True, exist_ok=True)

        self.config_file_path = self.config_dir / "config.yaml"
        self.log_file_path = self.log_dir / f"{APP_NAME}.jsonl"
        self.run_log_db_path = self.data_dir / self.database_name
        self.experiments_dir = self.data_dir / "experiments"

        if self.logging_destinations is None:
            self.logging_destinations = {
                "destinations": [
                    {"type": "sqlite", "enabled": True, "settings": {}},
                ]
            }

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to the nested layout used on disk."""
        return {
            "app": {
                "name": self.name,
                "max_workers": self.max_workers,
            },
            "logging": {
                "level": self.log_level,
                "console": self.console_logging,
                "database_name": self.database_name,
                "destinations": (self.logging_destinations or {}).get("destinations", []),
            },
            "experiments": {
                "tree_max_depth": self.tree_max_depth,
                "epsilon": self.epsilon,
                "patience": self.patience,
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AppConfig":
        """Create configuration from the nested on-disk layout."""
        app = data.get("app", {}) or {}
        logging_config = data.get("logging", {}) or {}
        experiments = data.get("experiments", {}) or {}
        defaults = cls.__dataclass_fields__
        return cls(
            name=app.get("name", APP_NAME),
            max_workers=int(app.get("max_workers", defaults["max_workers"].default)),
            log_level=str(logging_config.get("level", "INFO")).upper(),
            console_logging=bool(logging_config.get("console", True)),
            database_name=logging_config.get("database_name", "run_logs.db"),
            logging_destinations={"destinations": logging_config.get("destinations", [])},
            tree_max_depth=int(experiments.get("tree_max_depth", 6)),
            epsilon=float(experiments.get("epsilon", 0.0005)),
            patience=experiments.get("patience", 100),
        )

    def save(self) -> None:
        """Save configuration to ``config.yaml``."""
        try:
            with open(self.config_file_path, "w") as f:
                yaml.safe_dump(self.to_dict(), f, default_flow_style=False, sort_keys=False)
        except OSError as e:
            print(f"Warning: Could not save configuration: {e}")

    @classmethod
    def load(cls) -> "AppConfig":
        """Load configuration from file, creating the default file if missing."""
        config = cls()

        if config.config_file_path.exists():
            try:
                with open(config.config_file_path, "r") as f:
                    data = yaml.safe_load(f)
                if data:
                    loaded = cls.from_dict(data)
                    loaded.config_dir = config.config_dir
                    loaded.data_dir = config.data_dir
                    loaded.log_dir = config.log_dir
                    loaded.config_file_path = config.config_file_path
                    loaded.log_file_path = config.log_file_path
                    loaded.run_log_db_path = config.data_dir / loaded.database_name
                    loaded.experiments_dir = config.experiments_dir
                    return loaded
            except (OSError, yaml.YAMLError) as e:
                print(f"Warning: Could not load configuration: {e}")

        config.save()
        return config

    def __str__(self) -> str:
        return f"AppConfig(name='{self.name}', log_level='{self.log_level}', data_dir='{self.data_dir}')"


# Global configuration instance
_config: Optional[AppConfig] = None


def get_config() -> AppConfig:
    """Get the global configuration instance, loading it if necessary."""
    global _config
    if _config is None:
        _config = AppConfig.load()
    return _config


def reload_config() -> AppConfig:
    """Reload configuration from file."""
    global _config
    _config = AppConfig.load()
    return _config


def get_platform_info() -> Dict[str, str]:
    """Get platform-specific directory information."""
    return {
        "config_dir": str(platformdirs.user_config_dir(APP_NAME)),
        "data_dir": str(platformdirs.user_data_dir(APP_NAME)),
        "log_dir": str(platformdirs.user_log_dir(APP_NAME)),
        "cache_dir": str(platformdirs.user_cache_dir(APP_NAME)),
    }
