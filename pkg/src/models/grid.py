"""
Types of the precomputed interval grid and of the intervals built from it.

Classes:
    GridEntry: One rho node of the grid with its optimized pair.
    FunctionGrid: The 11-entry grid of a design.
    CIResult: An interval [lower, upper] with the quantities that produced it.
"""

from dataclasses import dataclass
from models.knot_pair import KnotFunctionPair
from models.optimizer import OptimizedPair


@dataclass(frozen=True)
class GridEntry:
    """
    Attributes:
        rho (float): Node in rho coordinates; rho(0) for clamped entries.
        delta (float): delta_of_rho(r, rho, T), or inf at rho = 0.
        phi_star (float): Objective weight selected for this node.
        result (OptimizedPair): Pair and diagnostics.
    """

    rho: float
    delta: float
    phi_star: float
    result: OptimizedPair

    @property
    def pair(self) -> KnotFunctionPair:
        return self.result.pair


@dataclass(frozen=True)
class FunctionGrid:
    """
    Attributes:
        N, T (int): Design shape.
        ssw, ssb, r (float): Design fingerprint.
        alpha (float): 1 - alpha is the nominal coverage.
        d (float): Support half-width of every pair.
        entries (tuple[GridEntry, ...]): Ordered by decreasing rho, from 0.
    """

    N: int
    T: int
    ssw: float
    ssb: float
    r: float
    alpha: float
    d: float
    entries: tuple

    def fingerprint(self) -> dict:
        return {"N": self.N, "T": self.T, "ssw": self.ssw, "ssb": self.ssb, "r": self.r}

    @property
    def rhos(self) -> tuple:
        return tuple(e.rho for e in self.entries)

    @property
    def min_cp(self) -> float:
        return min(e.result.min_cp for e in self.entries)

    @property
    def unbalanced(self) -> tuple:
        """Entries whose phi* missed gain = loss."""

        return tuple(e for e in self.entries if not e.result.balanced)


@dataclass(frozen=True)
class CIResult:
    """
    Attributes:
        lower, upper (float): Interval endpoints.
        center_shift (float): f_o(h), in standard-error units.
        half_width (float): f_e(h), in standard-error units.
        h_used (float): Hausman statistic at (sigma_used, delta_used).
        sigma_used (float): sigma_eps used.
        delta_used (float): delta used.
        reverted (bool): |h| >= d; the interval is then the fixed effects interval.
    """

    lower: float
    upper: float
    center_shift: float
    half_width: float
    h_used: float
    sigma_used: float
    delta_used: float
    reverted: bool

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def as_row(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "center_shift": self.center_shift,
            "half_width": self.half_width,
            "h": self.h_used,
            "sigma_eps": self.sigma_used,
            "delta": self.delta_used,
            "reverted": str(self.reverted).lower(),
        }
