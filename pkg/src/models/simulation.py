"""
Types of the Monte Carlo studies.

Classes:
    NoiseKind: Distribution of the standardized eta and eps draws.
    EstimateKind: What a SimEstimate estimates.
    SimConfig: One simulation point (design, grid, gamma, delta, M, seed).
    SimulatedRun: Statistics of one simulated panel.
    SimEstimate: A Monte Carlo estimate with its standard error.
    ConfCoefResult: Outcome of the confidence-coefficient search.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable
import numpy as np
from models.grid import FunctionGrid
from models.panel import PanelData

# sampler(rng, shape) -> standardized i.i.d. draws (mean 0, variance 1)
Sampler = Callable[[np.random.Generator, tuple], np.ndarray]


class NoiseKind(Enum):
    NORMAL = "normal"
    EXTERNAL = "external-hook"


class EstimateKind(Enum):
    COVERAGE = "coverage"
    SEL = "sel"
    CONF_COEFF = "conf_coeff"


@dataclass(frozen=True)
class SimConfig:
    """
    Attributes:
        design (PanelData): Covariate design; a response, if any, is ignored.
        grid (FunctionGrid): Grid built on the design.
        gamma (float): Scaled non-exogeneity xi sqrt(N) / sigma_eps.
        delta (float): Variance ratio, >= 0.
        M (int): Replications.
        master_seed (int): 64-bit master seed.
        noise (NoiseKind): Noise distribution.
        sampler (Sampler | None): Draw function for NoiseKind.EXTERNAL.
        threads (int): Worker threads; results do not depend on it.
    """

    design: PanelData
    grid: FunctionGrid
    gamma: float
    delta: float
    M: int
    master_seed: int
    noise: NoiseKind = NoiseKind.NORMAL
    sampler: Sampler | None = field(default=None, compare=False)
    threads: int = 1

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if not self.delta >= 0 or math.isinf(self.delta):
            raise ValueError("delta must be finite and nonnegative")
        if self.noise is NoiseKind.EXTERNAL and self.sampler is None:
            raise ValueError("external-hook noise needs a sampler")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    def at(self, gamma: float, delta: float, M: int, master_seed: int) -> "SimConfig":
        return SimConfig(
            self.design, self.grid, gamma, delta, M, master_seed,
            self.noise, self.sampler, self.threads,
        )


@dataclass(frozen=True)
class SimulatedRun:
    """
    Attributes:
        h_hat (float): Hausman statistic at (sigma_eps_hat, delta_hat).
        g_hat (float): (bw_hat - b) / sqrt(sigma_eps_hat^2 / SSW).
        sigma_ratio (float): sigma_eps_hat / sigma_eps.
        delta_hat (float): Estimated variance ratio.
    """

    h_hat: float
    g_hat: float
    sigma_ratio: float
    delta_hat: float


@dataclass(frozen=True)
class SimEstimate:
    value: float
    std_error: float
    M: int
    seed: int
    kind: EstimateKind
    gamma: float = math.nan
    delta: float = math.nan
    redraws: int = 0

    def as_row(self) -> dict:
        return {
            "gamma": self.gamma,
            "delta": self.delta,
            "estimate": self.value,
            "std_error": self.std_error,
            "M": self.M,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ConfCoefResult:
    """
    Attributes:
        c_min (SimEstimate): Final estimate at the minimizing point.
        gamma_star (float): Minimizing gamma.
        delta_star (float): Minimizing delta.
        per_delta (tuple[SimEstimate, ...]): Stage-two minimum over gamma for each delta.
    """

    c_min: SimEstimate
    gamma_star: float
    delta_star: float
    per_delta: tuple
