import math
import numpy as np
import pytest
from core.interval_engine import grid_nodes
from core.kg_optimizer import assess_pair
from core.panel_core import design_summary
from core.spline_funcs import make_pair, standard_pair, z_value
from models.grid import FunctionGrid, GridEntry
from models.optimizer import KGContext
from models.panel import PanelData
from seed.seed_panel import seed_panel


def _labels(prefix: str, n: int) -> tuple:
    return tuple(f"{prefix}{i}" for i in range(n))


@pytest.fixture
def make_design():
    """Random design x of shape (N, T) with within and between variation."""

    def factory(N: int = 40, T: int = 4, seed: int = 3) -> PanelData:
        rng = np.random.default_rng(seed)
        x = rng.normal(0.0, 1.0, (N, 1)) + rng.normal(0.0, 0.7, (N, T))
        return PanelData(_labels("u", N), _labels("t", T), x)

    return factory


@pytest.fixture
def design_with_ratio():
    """Design whose r = SSB / SSW equals the requested value."""

    def factory(r: float, N: int = 20, T: int = 4) -> PanelData:
        within = np.arange(T) - (T - 1) / 2.0
        means = np.arange(N, dtype=float)
        ssb = float(((means - means.mean()) ** 2).sum())
        spread = within[None, :] * (1.0 + 0.1 * (np.arange(N) % 3))[:, None]
        ssw = float((spread**2).sum())
        x = means[:, None] + spread * math.sqrt(ssb / (r * ssw))
        return PanelData(_labels("u", N), _labels("t", T), x)

    return factory


@pytest.fixture
def make_panel():
    """Panel with a response simulated from the model."""

    def factory(N=60, T=4, gamma=0.0, delta=2.0, a=0.5, b=1.5, sigma_eps=1.0, seed=11) -> PanelData:
        rows = seed_panel(N, T, gamma, delta, a, b, sigma_eps, seed)
        x = np.array([r["x"] for r in rows]).reshape(N, T)
        y = np.array([r["y"] for r in rows]).reshape(N, T)
        units = tuple(rows[i * T]["unit"] for i in range(N))
        times = tuple(rows[t]["time"] for t in range(T))
        return PanelData(units, times, x, y)

    return factory


def _grid(ds, pair_at, alpha, d):
    entries = []
    for rho, delta in grid_nodes(ds):
        pair = pair_at(rho)
        phi = 1.0 if rho == 0.0 else 0.5
        entries.append(GridEntry(rho, delta, phi, assess_pair(KGContext(rho, alpha, d), pair, phi)))
    return FunctionGrid(ds.N, ds.T, ds.ssw, ds.ssb, ds.r, alpha, d, tuple(entries))


@pytest.fixture
def standard_grid():
    """Grid whose every entry is the standard pair."""

    def factory(design: PanelData, alpha: float = 0.05, d: float = 6.0) -> FunctionGrid:
        ds = design_summary(design)
        return _grid(ds, lambda rho: standard_pair(alpha, d), alpha, d)

    return factory


def toy_pair(rho: float, alpha: float = 0.05, d: float = 6.0):
    """Non-standard pair whose distance from the standard one grows with |rho|."""

    if rho == 0.0:
        return standard_pair(alpha, d)
    z = z_value(alpha)
    odd = -0.3 * abs(rho) * np.array([1.0, 1.2, 0.9, 0.5, 0.2])
    even = z - 0.4 * abs(rho) * np.array([1.0, 0.9, 0.7, 0.4, 0.2, 0.05])
    return make_pair(odd, even, alpha, d)


@pytest.fixture
def toy_grid():
    """Grid of hand-made pairs, not optimized."""

    def factory(design: PanelData, alpha: float = 0.05, d: float = 6.0) -> FunctionGrid:
        ds = design_summary(design)
        return _grid(ds, lambda rho: toy_pair(rho, alpha, d), alpha, d)

    return factory
