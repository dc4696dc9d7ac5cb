"""
Error types raised by exoci.

Every error carries a machine-readable `code` and the process `exit_code` the
command line returns when it escapes a command.

Classes:
    ExociError: base class.
    UnbalancedPanel, ParseError, DuplicateCell: panel ingestion.
    DegenerateDesign, ZeroResidualVariance, NoFiniteSolution: estimation.
    NonFiniteKnot, NegativeEvenKnot: spline pairs.
    QuadratureFailure, OptimizerFailure: interval optimization.
    GridFormatError, GridMismatch: grid files.
    ManifestError: run manifests.
"""


class ExociError(Exception):
    code = "EXOCI_ERROR"
    exit_code = 1

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class UnbalancedPanel(ExociError):
    code = "UNBALANCED_PANEL"
    exit_code = 10


class ParseError(ExociError):
    code = "PARSE_ERROR"
    exit_code = 11


class DuplicateCell(ExociError):
    code = "DUPLICATE_CELL"
    exit_code = 12


class DegenerateDesign(ExociError):
    code = "DEGENERATE_DESIGN"
    exit_code = 20


class ZeroResidualVariance(ExociError):
    code = "ZERO_RESIDUAL_VARIANCE"
    exit_code = 21


class NoFiniteSolution(ExociError):
    code = "NO_FINITE_SOLUTION"
    exit_code = 22


class NonFiniteKnot(ExociError):
    code = "NON_FINITE_KNOT"
    exit_code = 30


class NegativeEvenKnot(ExociError):
    code = "NEGATIVE_EVEN_KNOT"
    exit_code = 31


class QuadratureFailure(ExociError):
    code = "QUADRATURE_FAILURE"
    exit_code = 40


class OptimizerFailure(ExociError):
    code = "OPTIMIZER_FAILURE"
    exit_code = 41

    def __init__(self, message: str = "", rho: float | None = None):
        super().__init__(message)
        self.rho = rho


class GridFormatError(ExociError):
    code = "GRID_FORMAT_ERROR"
    exit_code = 50


class GridMismatch(ExociError):
    code = "GRID_MISMATCH"
    exit_code = 51


class ManifestError(ExociError):
    code = "MANIFEST_ERROR"
    exit_code = 60
