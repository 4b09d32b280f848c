"""Exception hierarchy shared across the package."""


class QuadGridError(Exception):
    """Base class for all quadgrid errors."""


class DomainSpecError(QuadGridError):
    """Invalid domain definition (unknown name, corner mismatch, bad sizes)."""


class GridFormatError(QuadGridError):
    """Malformed native grid file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateFrameError(QuadGridError):
    """A corner frame with non-positive Jacobian determinant was passed to a
    barrier quantity (condition number, Winslow, Modified Liao)."""


class FoldedGridError(DegenerateFrameError):
    """A barrier functional was evaluated on a grid containing folded corners."""

    def __init__(self, message, node=None):
        if node is not None:
            message = f"{message} (node i={node[0]}, j={node[1]})"
        super().__init__(message)
        self.node = node


class UntangleError(QuadGridError):
    """The untangling pre-pass hit the sweep limit with folds remaining."""

    def __init__(self, remaining_folds, sweeps):
        super().__init__(
            f"untangling failed: {remaining_folds} folded corners remain "
            f"after {sweeps} sweeps"
        )
        self.remaining_folds = remaining_folds
        self.sweeps = sweeps
