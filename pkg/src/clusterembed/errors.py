"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Input violates a documented precondition (shape, finiteness, range)."""


class DegenerateRowError(ValueError):
    """A vector with (near-)zero norm reached an operation that must divide by it."""


class PathologicalBatchError(ValueError):
    """Batch labels admit only trivial clusterings (all same, or no class with >= 2 members)."""


class InstanceTooLargeError(ValueError):
    """Exhaustive enumeration was requested on an instance above the safety cap."""


class CsvParseError(ValueError):
    """Malformed dataset file; message names the offending line."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")
