"""
Panel data model, within/between GLS estimators, variance components,
the Hausman statistic and the rho(delta) mapping.

The GLS estimators of the reparameterized model
    y_it = a + b_W (x_it - xbar_i) + b_B xbar_i + eta_i + eps_it
are computed through their closed forms: the within column is orthogonal to
the other two under every C(delta)^{-1}, and for a balanced panel the GLS fit
of (a, b_B) is the equally weighted regression of the unit means. None of the
three estimates depends on delta.

The private helpers accept responses of shape (..., N, T) so a block of Monte
Carlo replications goes through exactly the arithmetic used for one panel.
"""

import math
from typing import IO
import numpy as np
import pandas as pd
from scipy.stats import norm
from models.panel import DesignSummary, FitResult, ModelParams, PanelData
from utils.errors import (
    DegenerateDesign,
    DuplicateCell,
    NoFiniteSolution,
    ParseError,
    UnbalancedPanel,
    ZeroResidualVariance,
)
from utils.logger import get_logger

logger = get_logger("panel_core")

# Relative size below which a sum of squares counts as zero.
ZERO_SS = 1e-24


def _label_key(label: str):
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


def load_panel(
    source: str | IO[str],
    unit: str = "unit",
    time: str = "time",
    x: str = "x",
    y: str | None = "y",
) -> PanelData:
    """
    Reads a long-format panel (one row per unit and time point).
    Args:
        source (str | IO): Path or text stream of comma-separated values with a header row.
        unit, time, x (str): Column names of the identifiers and the covariate.
        y (str | None): Response column; the panel is design-only when it is None
        or absent from the header.
    Returns:
        PanelData: Balanced panel sorted by (unit, time).
    Raises:
        ParseError: Missing column, empty cell or non-numeric value.
        DuplicateCell: A (unit, time) pair occurs twice.
        UnbalancedPanel: Some unit lacks a time point.
        DegenerateDesign: Fewer than 2 units or 2 time points.
    """

    try:
        frame = pd.read_csv(source, dtype=str, keep_default_na=False, encoding="utf-8")
    except (ValueError, pd.errors.ParserError) as exc:
        raise ParseError(f"unreadable panel: {exc}") from exc

    frame.columns = [c.strip() for c in frame.columns]
    for column in (unit, time, x):
        if column not in frame.columns:
            raise ParseError(f"missing column '{column}'")
    value_columns = [x] + ([y] if y is not None and y in frame.columns else [])

    frame[unit] = frame[unit].str.strip()
    frame[time] = frame[time].str.strip()
    for column in value_columns:
        cells = frame[column].str.strip()
        if (cells == "").any():
            row = int(np.flatnonzero(cells == "")[0]) + 2
            raise ParseError(f"empty '{column}' cell on line {row}")
        try:
            frame[column] = pd.to_numeric(cells, errors="raise")
        except (ValueError, TypeError) as exc:
            raise ParseError(f"non-numeric '{column}' value: {exc}") from exc

    duplicated = frame.duplicated(subset=[unit, time], keep=False)
    if duplicated.any():
        first = frame.loc[duplicated].iloc[0]
        raise DuplicateCell(f"repeated cell unit={first[unit]} time={first[time]}")

    unit_ids = tuple(sorted(frame[unit].unique(), key=_label_key))
    times = tuple(sorted(frame[time].unique(), key=_label_key))
    if len(frame) != len(unit_ids) * len(times):
        counts = frame.groupby(unit)[time].count()
        short = counts[counts < len(times)].index[0]
        raise UnbalancedPanel(
            f"unit {short} has {counts[short]} of {len(times)} time points"
        )
    if len(unit_ids) < 2 or len(times) < 2:
        raise DegenerateDesign(f"need N >= 2 and T >= 2, got N={len(unit_ids)}, T={len(times)}")

    def matrix(column: str) -> np.ndarray:
        wide = frame.pivot(index=unit, columns=time, values=column)
        return wide.loc[list(unit_ids), list(times)].to_numpy(dtype=float)

    has_y = len(value_columns) == 2
    panel = PanelData(unit_ids, times, matrix(x), matrix(y) if has_y else None)
    logger.info("loaded panel N=%d T=%d (response %s)", panel.n_units, panel.n_times, has_y)
    return panel


def design_summary(p: PanelData) -> DesignSummary:
    """
    Computes SSW, SSB, r(x) and the group means of a design.
    Raises:
        DegenerateDesign: Within or between variation of x is zero.
    """

    x = p.x
    N, T = x.shape
    xbar_i = x.mean(axis=1)
    xbar = float(xbar_i.mean())
    ssw = float(((x - xbar_i[:, None]) ** 2).sum())
    ssb = float(((xbar_i - xbar) ** 2).sum())
    sst = float(((x - xbar) ** 2).sum())
    if sst == 0.0 or ssw <= ZERO_SS * sst:
        raise DegenerateDesign("SSW = 0: x is constant within every unit")
    if ssb <= ZERO_SS * sst:
        raise DegenerateDesign("SSB = 0: all unit means of x are equal")
    xbar_i.setflags(write=False)
    return DesignSummary(N, T, ssw, ssb, ssb / ssw, xbar_i, xbar)


def _gls(ds: DesignSummary, x: np.ndarray, y: np.ndarray):
    xw = x - ds.xbar_i[:, None]
    ybar_i = y.mean(axis=-1)
    yw = y - ybar_i[..., None]
    bw = (xw * yw).sum(axis=(-2, -1)) / ds.ssw
    ybar = ybar_i.mean(axis=-1)
    bb = ((ds.xbar_i - ds.xbar) * (ybar_i - ybar[..., None])).sum(axis=-1) / ds.ssb
    a = ybar - bb * ds.xbar
    return a, bw, bb, xw, yw, ybar_i


def variance_components_batch(ds: DesignSummary, x: np.ndarray, y: np.ndarray):
    """
    GLS estimates and variance components for responses of shape (..., N, T).
    Returns:
        tuple: (a, bw, bb, s2, seta2, delta, zero) where `zero` flags vanishing
        within residuals and delta is truncated at 0.
    """

    a, bw, bb, xw, yw, ybar_i = _gls(ds, x, y)
    resid = yw - bw[..., None, None] * xw
    dof = ds.N * (ds.T - 1)
    s2 = (resid**2).sum(axis=(-2, -1)) / dof
    scale = (yw**2).sum(axis=(-2, -1)) / dof
    zero = (s2 == 0.0) | (s2 <= ZERO_SS * scale)
    rt = ybar_i - (a[..., None] + bb[..., None] * ds.xbar_i)
    seta2 = (rt**2).mean(axis=-1) - s2 / ds.T
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(zero, 0.0, np.maximum(0.0, seta2 / s2))
    return a, bw, bb, s2, seta2, delta, zero


def hausman_batch(ds: DesignSummary, bw, bb, sigma2, delta):
    """Standardized bw - bb, elementwise over batches."""

    var_w = sigma2 / ds.ssw
    var_b = sigma2 * (delta + 1.0 / ds.T) / ds.ssb
    return (bw - bb) / np.sqrt(var_w + var_b)


def _require_response(p: PanelData):
    if p.y is None:
        raise ParseError("the panel has no response column")


def fit_gls(p: PanelData, delta: float = 0.0) -> tuple[float, float, float]:
    """
    GLS estimates of (a, b_W, b_B) under the reparameterized model.
    Args:
        p (PanelData): Panel with a response.
        delta (float): Variance ratio; accepted for the GLS contract, the
        balanced-panel estimates do not depend on it.
    Returns:
        tuple: (a_hat, bw_hat, bb_hat).
    """

    if delta < 0:
        raise ValueError("delta must be nonnegative")
    _require_response(p)
    ds = design_summary(p)
    a, bw, bb, *_ = _gls(ds, p.x, p.y)
    return float(a), float(bw), float(bb)


def hausman_stat(p: PanelData, sigma_eps: float, delta: float) -> float:
    """
    h(sigma_eps, delta) = (bw_hat - bb_hat) / sqrt(Var(bw_hat|x) + Var(bb_hat|x)).
    """

    _require_response(p)
    ds = design_summary(p)
    _, bw, bb, *_ = _gls(ds, p.x, p.y)
    return float(hausman_batch(ds, bw, bb, sigma_eps**2, delta))


def estimate_variance_components(p: PanelData) -> FitResult:
    """
    Estimates sigma_eps^2, sigma_eta^2 and delta, truncating delta_hat at 0.
    Returns:
        FitResult: Estimates, with h_hat = hausman_stat(p, sigma_eps_hat, delta_hat).
    Raises:
        DegenerateDesign: Design has no within or between variation.
        ZeroResidualVariance: The within residuals vanish.
    """

    _require_response(p)
    ds = design_summary(p)
    a, bw, bb, s2, seta2, delta, zero = variance_components_batch(ds, p.x, p.y)
    if bool(zero):
        raise ZeroResidualVariance("within residuals are identically zero")
    if seta2 < 0:
        logger.warning("sigma_eta^2 estimate %.6g < 0, delta_hat truncated to 0", seta2)
    s2 = float(s2)
    delta = float(delta)
    return FitResult(
        a_hat=float(a),
        bw_hat=float(bw),
        bb_hat=float(bb),
        sigma_eps2_hat=s2,
        sigma_eta2_hat=float(seta2),
        delta_hat=delta,
        h_hat=hausman_stat(p, math.sqrt(s2), delta),
    )


def rho_of_delta(r: float, delta: float, T: int) -> float:
    """rho(delta) = -sqrt(r / (r + delta + 1/T)); 0 in the delta = inf limit."""

    if r <= 0 or T < 2:
        raise ValueError("rho_of_delta needs r > 0 and T >= 2")
    if math.isinf(delta):
        return 0.0
    return -math.sqrt(r / (r + delta + 1.0 / T))


def delta_of_rho(r: float, rho: float, T: int) -> float:
    """
    Inverts rho_of_delta: delta = r (rho^-2 - 1) - 1/T, clamped below at 0.
    Raises:
        NoFiniteSolution: rho = 0 corresponds to delta = inf.
    """

    if rho == 0.0:
        raise NoFiniteSolution("rho = 0 has no finite delta")
    if not -1.0 < rho < 0.0:
        raise ValueError(f"rho must lie in (-1, 0), got {rho}")
    return max(0.0, r * (rho**-2 - 1.0) - 1.0 / T)


def fixed_effects_interval(p: PanelData, sigma_eps: float, c: float) -> tuple[float, float]:
    """
    L(sigma_eps, c) = [bw_hat -/+ z_{(c+1)/2} sqrt(sigma_eps^2 / SSW)].
    """

    _require_response(p)
    ds = design_summary(p)
    _, bw, _, *_ = _gls(ds, p.x, p.y)
    half = float(norm.ppf((c + 1.0) / 2.0)) * math.sqrt(sigma_eps**2 / ds.ssw)
    return float(bw) - half, float(bw) + half


def psi_of_gamma(ds: DesignSummary, gamma, delta: float):
    """Maps gamma to the noncentrality psi of the standardized Hausman statistic."""

    return gamma / np.sqrt((ds.N / ds.ssw) * ((ds.r + delta + 1.0 / ds.T) / ds.r))


def gamma_of_psi(ds: DesignSummary, psi, delta: float):
    return psi * np.sqrt((ds.N / ds.ssw) * ((ds.r + delta + 1.0 / ds.T) / ds.r))


def synthesize_response(
    ds: DesignSummary,
    x: np.ndarray,
    params: ModelParams,
    eta_std: np.ndarray,
    eps_std: np.ndarray,
) -> np.ndarray:
    """
    Builds y under the correlated random effects model from standardized noise.
    Args:
        ds (DesignSummary): Summary of the design x.
        x (np.ndarray): N x T covariate values.
        params (ModelParams): Model parameters.
        eta_std (np.ndarray): Standardized unit effects, shape (..., N).
        eps_std (np.ndarray): Standardized errors, shape (..., N, T).
    Returns:
        np.ndarray: Responses of shape (..., N, T).
    """

    unit_part = params.xi * ds.xbar_i + params.sigma_eta * eta_std
    return params.a + params.b * x + unit_part[..., None] + params.sigma_eps * eps_std
