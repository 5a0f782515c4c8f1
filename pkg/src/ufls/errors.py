"""Exception types raised across the simulator."""


class ScenarioError(ValueError):
    """Base class for problems with a scenario file."""


class ScenarioSyntaxError(ScenarioError):
    """Scenario text could not be parsed as YAML."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class ScenarioValidationError(ScenarioError):
    """Scenario parsed but violates one or more constraints.

    All problems found in one pass are kept in ``errors`` in a stable order.
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        listing = "\n".join(f"  - {e}" for e in self.errors)
        super().__init__(f"{len(self.errors)} validation error(s):\n{listing}")


class ProfileError(ValueError):
    """Load profile data is malformed."""


class TopologyError(ValueError):
    """Unknown switch ids or incompatible topologies."""


class UndefinedMetricError(ValueError):
    """An unbalance metric has no defined value for the given input."""


class SimulationError(RuntimeError):
    """A run produced non-finite or out-of-envelope values."""
