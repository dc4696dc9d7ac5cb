"""
Types of the known-variance interval optimization.

Classes:
    KGContext: Correlation, level, support and quadrature of one optimization problem.
    OptimizedPair: An optimized (f_o, f_e) pair with its coverage and length diagnostics.
"""

from dataclasses import dataclass
import numpy as np
from models.knot_pair import KnotFunctionPair
from utils.consts import (
    DEFAULT_ALPHA,
    DEFAULT_D,
    GAIN_LOSS_TOL,
    PSI_CONSTRAINT_MAX,
    PSI_CONSTRAINT_STEP,
    PSI_VERIFY_MARGIN,
    QUAD_POINTS,
)


def default_psi_grid(d: float = DEFAULT_D) -> tuple:
    """0, 0.05, ..., 8 followed by a 0.5-step tail reaching d + 4."""

    head = np.round(np.arange(0.0, PSI_CONSTRAINT_MAX + 1e-9, PSI_CONSTRAINT_STEP), 10)
    tail = np.arange(PSI_CONSTRAINT_MAX + 0.5, d + PSI_VERIFY_MARGIN + 1e-9, 0.5)
    return tuple(float(v) for v in np.concatenate([head, tail]))


@dataclass(frozen=True)
class KGContext:
    """
    Attributes:
        rho (float): Correlation of the pivot and psi_hat, in (-1, 0].
        alpha (float): 1 - alpha is the coverage target.
        d (float): Support half-width of the pair.
        quad_points (int): Gauss-Legendre points per knot cell (12 cells over [-d, d]).
        psi_constraint_grid (tuple[float, ...]): Nonnegative psi values where CP >= 1 - alpha is imposed.
    """

    rho: float
    alpha: float = DEFAULT_ALPHA
    d: float = DEFAULT_D
    quad_points: int = QUAD_POINTS
    psi_constraint_grid: tuple = ()

    def __post_init__(self):
        if not -1.0 < self.rho <= 0.0:
            raise ValueError(f"rho must lie in (-1, 0], got {self.rho}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.psi_constraint_grid:
            object.__setattr__(self, "psi_constraint_grid", default_psi_grid(self.d))
        grid = self.psi_constraint_grid
        if grid[0] != 0.0 or max(grid) < self.d + PSI_VERIFY_MARGIN:
            raise ValueError("psi grid must start at 0 and reach d + 4")

    def with_rho(self, rho: float) -> "KGContext":
        return KGContext(rho, self.alpha, self.d, self.quad_points, self.psi_constraint_grid)


@dataclass(frozen=True)
class OptimizedPair:
    """
    Attributes:
        pair (KnotFunctionPair): The pair.
        phi (float): Weight of the integrated SEL in the objective.
        gain (float): 1 - SEL(0)^2.
        loss (float): max SEL^2 - 1.
        min_cp (float): Minimum CP on the verification grid.
        max_sel (float): Maximum SEL on the verification grid.
        sel_at_zero (float): SEL(0).
        converged (bool): Solver reported success.
        constraint_violation (float): max(0, 1 - alpha - min_cp).
        objective (float): Objective value at phi.
        rounds (int): Cutting-plane rounds used.
    """

    pair: KnotFunctionPair
    phi: float
    gain: float
    loss: float
    min_cp: float
    max_sel: float
    sel_at_zero: float
    converged: bool
    constraint_violation: float
    objective: float = 0.0
    rounds: int = 0

    @property
    def gain_loss_gap(self) -> float:
        return self.gain - self.loss

    @property
    def balanced(self) -> bool:
        """gain = loss within GAIN_LOSS_TOL, or the standard pair at phi = 1."""

        return self.phi >= 1.0 or abs(self.gain_loss_gap) <= GAIN_LOSS_TOL
