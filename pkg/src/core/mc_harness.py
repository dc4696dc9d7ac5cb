"""
Monte Carlo engines for the plug-in interval.

Panels are simulated in the canonical parameterization a = 0, b = 0,
sigma_eps = 1, sigma_eta = sqrt(delta), xi = gamma / sqrt(N): the plug-in
interval's coverage and scaled length depend on the parameters only through
(gamma, delta).

Replication k of a study draws from its own counter-based stream
(seed, purpose, k, attempt), and replications are processed in fixed blocks of
BLOCK_SIZE, so estimates are identical for every thread count. Coverage is
accumulated as an integer count, lengths with math.fsum.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import IO
import numpy as np
from scipy.stats import norm
from core.interval_engine import check_design, interpolate_knots, interpolate_pair
from core.panel_core import (
    design_summary,
    hausman_batch,
    synthesize_response,
    variance_components_batch,
)
from core.spline_funcs import eval_even, eval_many, eval_odd, expand_knots
from models.panel import DesignSummary, ModelParams, PanelData
from models.simulation import (
    ConfCoefResult,
    EstimateKind,
    NoiseKind,
    SimConfig,
    SimEstimate,
    SimulatedRun,
)
from utils.consts import BLOCK_SIZE
from utils.csv_io import write_table
from utils.errors import ZeroResidualVariance
from utils.logger import get_logger
from utils.rng import derive_seed, replication_stream

logger = get_logger("mc_harness")

STAGE_TWO_KEEP = 3


def _draw(rng: np.random.Generator, N: int, T: int, noise: NoiseKind, sampler):
    if noise is NoiseKind.EXTERNAL:
        return np.asarray(sampler(rng, (N,)), float), np.asarray(sampler(rng, (N, T)), float)
    return rng.standard_normal(N), rng.standard_normal((N, T))


def _statistics(ds: DesignSummary, x, params: ModelParams, eta, eps):
    y = synthesize_response(ds, x, params, eta, eps)
    _, bw, bb, s2, _, delta_hat, zero = variance_components_batch(ds, x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = hausman_batch(ds, bw, bb, s2, delta_hat)
        g = (bw - params.b) / np.sqrt(s2 / ds.ssw)
    return (h, g, np.sqrt(s2) / params.sigma_eps, delta_hat, bw, bb), zero


def simulate_run(
    design: PanelData,
    gamma: float,
    delta: float,
    rng: np.random.Generator,
    params: ModelParams | None = None,
    noise: NoiseKind = NoiseKind.NORMAL,
    sampler=None,
) -> SimulatedRun:
    """
    Simulates one panel on the design and returns its plug-in statistics.
    Args:
        design (PanelData): Covariate design.
        gamma, delta (float): Simulation point.
        rng (Generator): Source of the N unit effects, then the N x T errors.
        params (ModelParams | None): Full parameters at (gamma, delta); the
        canonical ones when None.
    Returns:
        SimulatedRun: (h_hat, g_hat, sigma_eps_hat / sigma_eps, delta_hat).
    Raises:
        ZeroResidualVariance: The within residuals vanish.
    """

    ds = design_summary(design)
    if params is None:
        params = ModelParams.from_gamma(gamma, delta, ds.N)
    elif not (math.isclose(params.gamma, gamma) and math.isclose(params.delta, delta)):
        raise ValueError("params do not match (gamma, delta)")
    eta, eps = _draw(rng, ds.N, ds.T, noise, sampler)
    (h, g, ratio, delta_hat, _, _), zero = _statistics(ds, design.x, params, eta, eps)
    if bool(zero):
        raise ZeroResidualVariance("simulated within residuals vanish")
    return SimulatedRun(float(h), float(g), float(ratio), float(delta_hat))


def _simulate_block(
    cfg: SimConfig, ds: DesignSummary, seed: int, purpose: str, start: int, stop: int
):
    """
    Replications start..stop-1 with probability-zero redraws.
    Returns:
        tuple: ([h, g, sigma ratio, delta_hat, bw, bb] arrays, redraw count).
    """

    params = ModelParams.from_gamma(cfg.gamma, cfg.delta, ds.N)
    size = stop - start
    eta = np.empty((size, ds.N))
    eps = np.empty((size, ds.N, ds.T))
    attempts = np.zeros(size, dtype=int)
    pending = np.arange(size)
    out = None
    while pending.size:
        for k in pending:
            rng = replication_stream(seed, start + k, purpose, attempts[k])
            eta[k], eps[k] = _draw(rng, ds.N, ds.T, cfg.noise, cfg.sampler)
        stats, zero = _statistics(ds, cfg.design.x, params, eta[pending], eps[pending])
        if out is None:
            out = [np.array(s) for s in stats]
        else:
            for target, values in zip(out, stats):
                target[pending] = values
        pending = pending[zero]
        attempts[pending] += 1
    redraws = int(attempts.sum())
    if redraws:
        logger.warning("%d replications redrawn (zero residual variance)", redraws)
    return out, redraws


def _blocks(M: int) -> list[tuple[int, int]]:
    return [(s, min(s + BLOCK_SIZE, M)) for s in range(0, M, BLOCK_SIZE)]


def _map_blocks(cfg: SimConfig, work):
    blocks = _blocks(cfg.M)
    if cfg.threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(lambda b: work(*b), blocks))
    return [work(*b) for b in blocks]


def _prepare(cfg: SimConfig) -> DesignSummary:
    ds = design_summary(cfg.design)
    check_design(cfg.grid, ds)
    return ds


def _plugin_pairs(cfg: SimConfig, h, delta_hat):
    odd, even = interpolate_knots(cfg.grid, delta_hat)
    z = cfg.grid.entries[0].pair.z
    full_odd, full_even = expand_knots(odd, even, z)
    return eval_many(h, full_odd, full_even, cfg.grid.d, z)


def _coverage(cfg: SimConfig, purpose: str, known: bool) -> SimEstimate:
    ds = _prepare(cfg)
    if known:
        pair = interpolate_pair(cfg.grid, cfg.delta)

    def work(start, stop):
        (h, g, _, delta_hat, bw, bb), redraws = _simulate_block(
            cfg, ds, cfg.master_seed, purpose, start, stop
        )
        if known:
            h = hausman_batch(ds, bw, bb, 1.0, cfg.delta)
            g = bw * math.sqrt(ds.ssw)
            fo, fe = eval_odd(pair, h), eval_even(pair, h)
        else:
            fo, fe = _plugin_pairs(cfg, h, delta_hat)
        covered = (-fo - fe <= g) & (g <= -fo + fe)
        return int(np.count_nonzero(covered)), redraws

    results = _map_blocks(cfg, work)
    count = sum(c for c, _ in results)
    redraws = sum(r for _, r in results)
    p = count / cfg.M
    return SimEstimate(
        value=p,
        std_error=math.sqrt(p * (1.0 - p) / cfg.M),
        M=cfg.M,
        seed=cfg.master_seed,
        kind=EstimateKind.COVERAGE,
        gamma=cfg.gamma,
        delta=cfg.delta,
        redraws=redraws,
    )


def estimate_cp(cfg: SimConfig) -> SimEstimate:
    """
    Coverage probability of the plug-in interval at (gamma, delta).
    Returns:
        SimEstimate: Proportion of covering replications, std_error sqrt(p(1-p)/M).
    """

    return _coverage(cfg, "cp", known=False)


def estimate_known_cp(cfg: SimConfig) -> SimEstimate:
    """Coverage probability of CI(sigma_eps, delta) with both parameters known."""

    return _coverage(cfg, "known-cp", known=True)


def _order_key(est: SimEstimate):
    return (est.value, abs(est.gamma), est.delta, est.gamma)


def estimate_confidence_coefficient(
    design: PanelData,
    grid,
    gamma_grid,
    delta_grid,
    M1: int,
    M2: int,
    M3: int,
    master_seed: int,
    threads: int = 1,
    noise: NoiseKind = NoiseKind.NORMAL,
    sampler=None,
) -> ConfCoefResult:
    """
    Three-stage search for the minimum coverage over a (gamma, delta) grid.
    - Stage 1: M1 replications at every point.
    - Stage 2: for each delta, the three smallest stage-1 estimates again with
    M2; the smallest is that delta's minimum.
    - Stage 3: the overall stage-2 minimizer with M3 replications.
    Stages 1 and 2 use common random numbers across points; ties go to the
    smaller |gamma|, then the smaller delta.
    Returns:
        ConfCoefResult: c_min, its (gamma, delta) and the per-delta minima.
    """

    gammas, deltas = list(gamma_grid), list(delta_grid)
    if not gammas or not deltas:
        raise ValueError("gamma and delta grids must be non-empty")
    if not M1 < M2 < M3:
        raise ValueError("need M1 < M2 < M3")
    seed1 = derive_seed(master_seed, "stage-1")
    seed2 = derive_seed(master_seed, "stage-2")
    base = SimConfig(design, grid, gammas[0], deltas[0], M1, seed1, noise, sampler, threads)

    per_delta = []
    for delta in deltas:
        stage1 = [estimate_cp(base.at(g, delta, M1, seed1)) for g in gammas]
        keep = sorted(stage1, key=_order_key)[:STAGE_TWO_KEEP]
        stage2 = [estimate_cp(base.at(e.gamma, delta, M2, seed2)) for e in keep]
        best = min(stage2, key=_order_key)
        logger.info(
            "delta=%g: stage-2 minimum %.6f at gamma=%g", delta, best.value, best.gamma
        )
        per_delta.append(best)

    star = min(per_delta, key=_order_key)
    final = estimate_cp(base.at(star.gamma, star.delta, M3, master_seed))
    logger.info(
        "c_min=%.6f (se %.2g) at gamma=%g delta=%g",
        final.value, final.std_error, star.gamma, star.delta,
    )
    c_min = SimEstimate(
        value=final.value,
        std_error=final.std_error,
        M=final.M,
        seed=final.seed,
        kind=EstimateKind.CONF_COEFF,
        gamma=star.gamma,
        delta=star.delta,
        redraws=final.redraws,
    )
    return ConfCoefResult(c_min, star.gamma, star.delta, tuple(per_delta))


def estimate_sel(cfg: SimConfig, c_min: float) -> SimEstimate:
    """
    Scaled expected length of the plug-in interval.
    Args:
        cfg (SimConfig): Simulation point.
        c_min (float): Confidence coefficient of the interval, in (0, 1).
    Returns:
        SimEstimate: NUM / (z_{(c_min+1)/2} TERM), where NUM averages
        (sigma_eps_hat / sigma_eps) f_e(h_hat) and TERM averages
        sigma_eps_hat / sigma_eps over an independent set of replications.
        The standard error is by the delta method.
    """

    if not 0.0 < c_min < 1.0:
        raise ValueError("c_min must lie in (0, 1)")
    ds = _prepare(cfg)

    def numerator(start, stop):
        (h, _, ratio, delta_hat, _, _), redraws = _simulate_block(
            cfg, ds, cfg.master_seed, "sel-num", start, stop
        )
        _, fe = _plugin_pairs(cfg, h, delta_hat)
        return ratio * fe, redraws

    def term(start, stop):
        (_, _, ratio, _, _, _), redraws = _simulate_block(
            cfg, ds, cfg.master_seed, "sel-term", start, stop
        )
        return ratio, redraws

    num_parts = _map_blocks(cfg, numerator)
    term_parts = _map_blocks(cfg, term)
    num_values = np.concatenate([v for v, _ in num_parts])
    term_values = np.concatenate([v for v, _ in term_parts])
    redraws = sum(r for _, r in num_parts) + sum(r for _, r in term_parts)

    M = cfg.M
    num = math.fsum(num_values) / M
    den = math.fsum(term_values) / M
    z = float(norm.ppf((c_min + 1.0) / 2.0))
    sel = num / (z * den)
    if M > 1:
        var_num = math.fsum((num_values - num) ** 2) / (M - 1)
        var_den = math.fsum((term_values - den) ** 2) / (M - 1)
        std_error = abs(sel) * math.sqrt(var_num / (M * num**2) + var_den / (M * den**2))
    else:
        std_error = 0.0
    return SimEstimate(
        value=sel,
        std_error=std_error,
        M=M,
        seed=cfg.master_seed,
        kind=EstimateKind.SEL,
        gamma=cfg.gamma,
        delta=cfg.delta,
        redraws=redraws,
    )


def write_results_csv(estimates, target: str | IO[str] | None = None):
    """Writes (gamma, delta, estimate, std_error, M, seed) rows."""

    write_table([e.as_row() for e in estimates], target)
