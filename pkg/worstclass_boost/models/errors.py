"""Exception hierarchy for worstclass_boost.

Every error carries a stable ``code`` and serializes to a dictionary so the CLI
can emit machine-readable failures.
"""

from typing import Any, Dict, Optional


class BoostingError(Exception):
    """Base class for all library errors."""

    code: str = "boosting_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        """Convert the error to a JSON-serializable dictionary."""
        payload: Dict[str, Any] = {"code": self.code, "message": self.message}
        payload.update({k: v for k, v in self.details.items() if v is not None})
        return payload


class ConfigError(BoostingError, ValueError):
    """Invalid parameter or configuration value."""

    code = "config_error"


class ContractViolation(BoostingError, ValueError):
    """An input violates the contract of an operation (e.g. non-binary feedback)."""

    code = "contract_violation"


class EmptyClass(BoostingError):
    """A class partition S_k has no instances.

    ``label`` is the 1-based class label.
    """

    code = "empty_class"

    def __init__(self, label: int):
        super().__init__(f"EmptyClass({label})", label=label)
        self.label = label


class NoWeakHypothesis(BoostingError):
    """Boosting finished without accepting a single weak hypothesis."""

    code = "no_weak_hypothesis"


class ParseError(BoostingError):
    """A dataset file row could not be parsed."""

    code = "parse_error"

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f"{message} (line {line})", line=line)
        self.line = line


class LabelError(BoostingError):
    """A label lies outside 1..K."""

    code = "label_error"

    def __init__(self, label: Any, num_classes: int, line: Optional[int] = None):
        where = "" if line is None else f" (line {line})"
        super().__init__(
            f"label {label} outside 1..{num_classes}{where}",
            label=label,
            num_classes=num_classes,
            line=line,
        )
        self.label = label
        self.line = line


class DimensionError(BoostingError):
    """Feature dimension does not match what an operation requires."""

    code = "dimension_error"
