"""Exception types for numerical failure modes.

Contract violations (bad shapes, unknown parameters, invalid options) raise
plain ``ValueError``; the classes below mark failures that arise from the
data or the arithmetic itself, so callers can map them to a distinct exit
status.
"""


class NumericalError(Exception):
    """Base class for runtime numerical failures."""


class BlowUpError(NumericalError):
    """A simulated state became non-finite.

    ``index`` is the index of the last recorded sample before the blow-up.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"non-finite state encountered at sample index {index}")


class DegenerateBandwidthError(NumericalError):
    """Bandwidth selection found a zero distance quantile (coincident points)."""


class IsolatedPointError(NumericalError):
    """A kernel matrix row has no entry above the zero threshold.

    ``row`` identifies the offending point; enlarging the bandwidth usually
    resolves it.
    """

    def __init__(self, row, message=None):
        self.row = row
        super().__init__(message or f"row {row} has no kernel value above the zero threshold")


class SolverError(NumericalError):
    """The least-squares solve produced a non-finite solution."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
