"""Exception types shared across the package.

Every error raised on bad user input derives from GdbaError so callers
(and the CLI) can catch one base class.
"""


class GdbaError(Exception):
    """Base class for all errors raised by this package."""


# --- dataset loading / validation ---

class MissingLabelColumn(GdbaError):
    def __init__(self, column: str, available: list[str]):
        self.column = column
        super().__init__(
            f"label column {column!r} not found (available: {', '.join(available)})"
        )


class NonNumericCell(GdbaError):
    def __init__(self, row: int, col: str, value: str):
        self.row = row
        self.col = col
        super().__init__(f"cell at row {row}, column {col!r} is not numeric: {value!r}")


class NonFiniteValue(GdbaError):
    def __init__(self, row: int, col: str, value: str):
        self.row = row
        self.col = col
        super().__init__(f"cell at row {row}, column {col!r} is not finite: {value!r}")


class RaggedRow(GdbaError):
    def __init__(self, row: int, expected: int, got: int):
        self.row = row
        super().__init__(f"row {row} has {got} cells, expected {expected}")


class InvalidLabel(GdbaError):
    def __init__(self, row: int, value: str):
        self.row = row
        super().__init__(f"label at row {row} must be 0 or 1, got {value!r}")


class EmptyDataset(GdbaError):
    """Raised when an operation requires more samples than were provided."""


# --- kernel ---

class DimensionMismatch(GdbaError):
    """Feature vectors of unequal dimension were combined."""


class DenseCapExceeded(GdbaError):
    def __init__(self, n: int, cap: int):
        self.n = n
        self.cap = cap
        super().__init__(
            f"explicit {n}x{n} kernel matrix exceeds the dense cap of {cap}; "
            f"use the blocked degree path instead"
        )


# --- oracles ---

class NoConvergence(GdbaError):
    """Jacobi eigensolver failed to reach the off-diagonal target."""


class ZeroVector(GdbaError):
    """A nonzero vector was required."""


class IndexOutOfRange(GdbaError, IndexError):
    """Sample index outside the dataset."""


# --- baselines ---

class KTooLarge(GdbaError):
    def __init__(self, k: int, limit: int, what: str = "k"):
        self.k = k
        super().__init__(f"{what}={k} too large for dataset (must be <= {limit})")


# --- evaluation ---

class SingleClass(GdbaError):
    """Evaluation needs at least one anomaly and one normal sample."""


class InvalidGrid(GdbaError):
    """Malformed sigma grid specification."""
