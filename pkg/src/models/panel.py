"""
Panel data model types.

Classes:
    PanelData: Balanced N x T panel of covariate and (optional) response values.
    DesignSummary: Per-design constants SSW, SSB, r(x) and the group means.
    FitResult: GLS estimates, variance components and the Hausman statistic.
    ModelParams: Parameters of the correlated random effects model.

All instances are immutable once built; arrays are stored read-only.
"""

import math
from dataclasses import dataclass, field
import numpy as np


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class PanelData:
    """
    Balanced panel.
    Attributes:
        unit_ids (tuple[str, ...]): N unit labels, sorted.
        times (tuple[str, ...]): T time labels, sorted.
        x (np.ndarray): N x T covariate values.
        y (np.ndarray | None): N x T response values, absent for design-only work.
    """

    unit_ids: tuple
    times: tuple
    x: np.ndarray
    y: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x))
        if self.y is not None:
            object.__setattr__(self, "y", _frozen(self.y))

    @property
    def n_units(self) -> int:
        return self.x.shape[0]

    @property
    def n_times(self) -> int:
        return self.x.shape[1]

    def with_response(self, y: np.ndarray) -> "PanelData":
        return PanelData(self.unit_ids, self.times, self.x, y)


@dataclass(frozen=True)
class DesignSummary:
    """
    Conditional-on-x constants of a design.
    Attributes:
        N (int): Number of units.
        T (int): Number of time points.
        ssw (float): Within sum of squares of x.
        ssb (float): Between sum of squares of the group means.
        r (float): ssb / ssw.
        xbar_i (np.ndarray): Group means.
        xbar (float): Grand mean.
    """

    N: int
    T: int
    ssw: float
    ssb: float
    r: float
    xbar_i: np.ndarray = field(repr=False)
    xbar: float

    def fingerprint(self) -> dict:
        return {"N": self.N, "T": self.T, "ssw": self.ssw, "ssb": self.ssb, "r": self.r}


@dataclass(frozen=True)
class FitResult:
    a_hat: float
    bw_hat: float
    bb_hat: float
    sigma_eps2_hat: float
    sigma_eta2_hat: float
    delta_hat: float
    h_hat: float

    @property
    def sigma_eps_hat(self) -> float:
        return math.sqrt(self.sigma_eps2_hat)


@dataclass(frozen=True)
class ModelParams:
    """
    Parameters of y_it = a + b x_it + xi xbar_i + eta_i + eps_it.
    Attributes:
        a (float): Intercept.
        b (float): Slope, the parameter of interest.
        xi (float): Non-exogeneity parameter.
        sigma_eps (float): Standard deviation of eps_it.
        delta (float): sigma_eta^2 / sigma_eps^2.
        n_units (int): N, needed to relate xi and gamma.
    """

    a: float
    b: float
    xi: float
    sigma_eps: float
    delta: float
    n_units: int

    @property
    def gamma(self) -> float:
        return self.xi * math.sqrt(self.n_units) / self.sigma_eps

    @property
    def sigma_eta(self) -> float:
        return self.sigma_eps * math.sqrt(self.delta)

    @property
    def b_within(self) -> float:
        return self.b

    @property
    def b_between(self) -> float:
        return self.b + self.xi

    @classmethod
    def from_gamma(
        cls,
        gamma: float,
        delta: float,
        n_units: int,
        a: float = 0.0,
        b: float = 0.0,
        sigma_eps: float = 1.0,
    ) -> "ModelParams":
        return cls(a, b, gamma * sigma_eps / math.sqrt(n_units), sigma_eps, delta, n_units)
