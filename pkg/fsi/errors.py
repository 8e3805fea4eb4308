class FsiError(Exception):
    """Base class for every error raised by the fsi package"""

    def __init__(self, message="Something went wrong in the fsi index."):
        self.message = message
        super().__init__(self.message)


class FsiParseError(FsiError, ValueError):
    """Raise when an input file has a malformed line"""

    def __init__(self, message="Malformed input line.", line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FsiValidationError(FsiError, ValueError):
    """Raise when well-formed input breaks a precondition"""

    def __init__(self, message="Input failed validation."):
        super().__init__(message)


class FsiSetIdError(FsiError, IndexError):
    """Raise when a set id is not in the collection"""

    def __init__(self, message="Set id is out of range."):
        super().__init__(message)


class FsiRangeError(FsiError, IndexError):
    """Raise when an interval falls outside the indexed array"""

    def __init__(self, message="Interval is out of bounds."):
        super().__init__(message)


class FsiOverlapError(FsiError, ValueError):
    """Raise when a common colors query gets overlapping intervals"""

    def __init__(
            self,
            message="Common colors queries need two non-overlapping intervals."
    ):
        super().__init__(message)


class FsiCapacityError(FsiError, MemoryError):
    """Raise when a precomputed structure would not fit its memory budget"""

    def __init__(self, message="Memory budget exceeded.", required_bytes=None):
        self.required_bytes = required_bytes
        super().__init__(message)


class FsiFormatError(FsiError, ValueError):
    """Raise when a persisted index cannot be decoded"""

    def __init__(self, message="Not a valid FSI1 index container."):
        super().__init__(message)


class FsiConsistencyError(FsiError, AssertionError):
    """Raise when an internal invariant does not hold"""

    def __init__(self, message="Internal invariant violated."):
        super().__init__(message)
