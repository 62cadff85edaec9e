"""Shared exception types."""


class CapacityError(RuntimeError):
    """A requested computation exceeds a configured size cap.

    Carries enough context (requested size, cap) for the caller to decide
    whether to raise the cap or skip the cell.
    """

    def __init__(self, message: str, *, requested: int | None = None, cap: int | None = None):
        super().__init__(message)
        self.requested = requested
        self.cap = cap


class TableGapError(LookupError):
    """A persistency scan needed threshold entries that the table lacks."""

    def __init__(self, missing: list[int], message: str | None = None):
        self.missing = sorted(missing)
        super().__init__(message or f"missing p_crit entries for party counts {self.missing}")
