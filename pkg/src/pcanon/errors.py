"""Exception hierarchy shared by the pipeline stages."""


class PcanonError(Exception):
    """Base class; ``stage`` names the pipeline step that failed, if known."""

    stage = None

    def __init__(self, message, stage=None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage


class MatrixFormatError(PcanonError, ValueError):
    """Malformed or inconsistent serialized matrix."""


class SingularMatrixError(PcanonError, ZeroDivisionError):
    """A basis or system matrix that must be invertible is singular.

    Inside the pivoting engine this means the input lacks the P-property.
    """


class PPropertyError(PcanonError):
    """The input was found to lack the P-property."""


class PivotCapExceeded(PcanonError):
    """The block-pivot simplex ran past its pivot cap.

    Valid inputs (P-property plus the MDP-equivalence conditions) always terminate
    well inside the default cap, so this is reported as a suspected failure of
    those conditions.
    """


class CertificateError(PcanonError):
    """An emitted certificate failed its own substitution check."""
