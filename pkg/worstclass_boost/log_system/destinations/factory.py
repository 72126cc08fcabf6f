"""
Factory for creating log destinations.

Destinations register under a type name; configuration selects them. When
several are enabled, a ``CompositeDestination`` fans entries out to all of them.
"""

from typing import Dict, List, Type

from .base import DestinationConfig, LogDestination, LogEntry
from .jsonl import JsonlDestination
from .sqlite import SQLiteDestination


class CompositeDestination(LogDestination):
    """Writes every entry to each child destination; queries the first."""

    def __init__(self, destinations: List[LogDestination]):
        self.destinations = destinations

    def write(self, entry: LogEntry) -> None:
        for destination in self.destinations:
            destination.write(entry)

    def query(self, **filters) -> List[LogEntry]:
        return self.destinations[0].query(**filters)

    def close(self) -> None:
        for destination in self.destinations:
            destination.close()


class LogDestinationFactory:
    """Factory for creating log destinations based on configuration."""

    _registry: Dict[str, Type[LogDestination]] = {}

    @classmethod
    def register(cls, name: str, destination_class: Type[LogDestination]) -> None:
        cls._registry[name] = destination_class

    @classmethod
    def create(cls, destination_type: str, config, **settings) -> LogDestination:
        """Create a destination instance.

        Raises:
            ValueError: If the destination type is not registered
        """
        if destination_type not in cls._registry:
            raise ValueError(
                f"Unknown destination type: {destination_type} (available: {', '.join(cls.get_available_types())})"
            )
        return cls._registry[destination_type](config, **settings)

    @classmethod
    def create_from_config(cls, destinations_config: List[DestinationConfig], app_config) -> LogDestination:
        """Create the destination described by configuration (SQLite if none enabled)."""
        enabled = [d for d in destinations_config if d.enabled]
        if not enabled:
            return SQLiteDestination(app_config)
        created = [cls.create(d.type, app_config, **(d.settings or {})) for d in enabled]
        return created[0] if len(created) == 1 else CompositeDestination(created)

    @classmethod
    def get_available_types(cls) -> List[str]:
        return list(cls._registry.keys())


LogDestinationFactory.register("sqlite", SQLiteDestination)
LogDestinationFactory.register("jsonl", JsonlDestination)
