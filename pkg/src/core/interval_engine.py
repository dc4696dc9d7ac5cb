"""
Grid of optimized pairs and the intervals built from it.

- `build_grid` optimizes one pair per rho node of RHO_GRID for a design; the
node rho = 0 (delta = inf) holds the standard pair.
- `interpolate_pair` and `interpolate_knots` interpolate the 11 knot values
linearly in rho = rho_of_delta(r, delta, T) between bracketing nodes, clamping
at the most negative node.
- `known_ci` and `plugin_ci` assemble
    [bw_hat + se f_o(h) - se f_e(h), bw_hat + se f_o(h) + se f_e(h)],
se = sqrt(sigma_eps^2 / SSW), reverting to the fixed effects interval when |h| >= d.
- `save_grid` / `load_grid` read and write the `exoci-grid v1` text format.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from typing import IO
import numpy as np
from core.kg_optimizer import assess_pair, select_phi
from core.panel_core import (
    delta_of_rho,
    design_summary,
    estimate_variance_components,
    fit_gls,
    fixed_effects_interval,
    hausman_stat,
    rho_of_delta,
)
from core.spline_funcs import (
    N_ODD,
    eval_even,
    eval_odd,
    make_pair,
    pair_vector,
    standard_pair,
    z_value,
)
from models.grid import CIResult, FunctionGrid, GridEntry
from models.knot_pair import KnotFunctionPair
from models.optimizer import KGContext
from models.panel import DesignSummary, PanelData
from utils.consts import CSV_DIGITS, DEFAULT_ALPHA, DEFAULT_D, GRID_HEADER, RHO_GRID
from utils.errors import ExociError, GridFormatError, GridMismatch
from utils.logger import get_logger

logger = get_logger("interval_engine")

FINGERPRINT_RTOL = 1e-9


def grid_nodes(ds: DesignSummary) -> list[tuple[float, float]]:
    """
    (rho, delta) of every grid entry; nodes needing delta < 0 are clamped to
    delta = 0 and take rho(0).
    """

    nodes = [(0.0, math.inf)]
    for rho in RHO_GRID[1:]:
        delta = delta_of_rho(ds.r, rho, ds.T)
        if delta == 0.0:
            rho = rho_of_delta(ds.r, 0.0, ds.T)
        nodes.append((rho, delta))
    return nodes


def _solve(ctx: KGContext):
    return select_phi(ctx)


def build_grid(
    ds: DesignSummary,
    alpha: float = DEFAULT_ALPHA,
    d: float = DEFAULT_D,
    threads: int = 1,
) -> FunctionGrid:
    """
    Optimizes the pairs of a design's grid.
    Args:
        ds (DesignSummary): Non-degenerate design.
        alpha (float): 1 - alpha is the nominal coverage.
        d (float): Support half-width of the pairs.
        threads (int): Worker processes; entries are optimized independently.
    Returns:
        FunctionGrid: 11 entries ordered from rho = 0 down to rho = -0.97.
    Raises:
        OptimizerFailure: Carries the rho of the failing entry.
    """

    nodes = grid_nodes(ds)
    distinct = sorted({rho for rho, _ in nodes[1:]}, reverse=True)
    contexts = [KGContext(rho, alpha, d) for rho in distinct]
    logger.info(
        "building grid N=%d T=%d r=%.6g: %d distinct rho values", ds.N, ds.T, ds.r, len(distinct)
    )

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            solved = list(pool.map(_solve, contexts))
    else:
        solved = [_solve(ctx) for ctx in contexts]
    by_rho = dict(zip(distinct, solved))

    standard = assess_pair(KGContext(0.0, alpha, d), standard_pair(alpha, d), 1.0)
    entries = [GridEntry(0.0, math.inf, 1.0, standard)]
    for rho, delta in nodes[1:]:
        result = by_rho[rho]
        if result.constraint_violation > 0:
            logger.warning("rho=%.4f: min CP %.6f below nominal", rho, result.min_cp)
        logger.info(
            "entry rho=%.4f delta=%.6g phi*=%.4f min CP=%.6f SEL(0)=%.6f",
            rho, delta, result.phi, result.min_cp, result.sel_at_zero,
        )
        entries.append(GridEntry(rho, delta, result.phi, result))

    return FunctionGrid(ds.N, ds.T, ds.ssw, ds.ssb, ds.r, alpha, d, tuple(entries))


def check_design(grid: FunctionGrid, ds: DesignSummary):
    """
    Raises:
        GridMismatch: The grid was built for another design.
    """

    if grid.N != ds.N or grid.T != ds.T:
        raise GridMismatch(f"grid is for N={grid.N}, T={grid.T}; design has N={ds.N}, T={ds.T}")
    for name in ("ssw", "ssb"):
        ours, theirs = getattr(grid, name), getattr(ds, name)
        if abs(ours - theirs) > FINGERPRINT_RTOL * abs(theirs):
            raise GridMismatch(f"grid {name}={ours:.17g} differs from design {name}={theirs:.17g}")


def _rho_of(grid: FunctionGrid, deltas: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(
            np.isinf(deltas), 0.0, -np.sqrt(grid.r / (grid.r + deltas + 1.0 / grid.T))
        )


def interpolate_knots(grid: FunctionGrid, deltas) -> tuple[np.ndarray, np.ndarray]:
    """
    Knot values interpolated at many delta values.
    Args:
        grid (FunctionGrid): The grid.
        deltas (array): Values of delta >= 0, inf allowed.
    Returns:
        tuple: (M, 5) odd and (M, 6) even knot arrays. A delta equal to a grid
        entry's delta gets that entry's knots exactly.
    """

    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    if (deltas < 0).any() or np.isnan(deltas).any():
        raise ValueError("delta must be nonnegative")
    rhos = np.array(grid.rhos)
    knots = np.array([pair_vector(e.pair) for e in grid.entries])

    # np.interp wants increasing abscissae and clamps outside them.
    target = _rho_of(grid, deltas)
    xp, fp = rhos[::-1], knots[::-1]
    values = np.column_stack([np.interp(target, xp, fp[:, k]) for k in range(fp.shape[1])])

    node_deltas = np.array([e.delta for e in grid.entries])
    hit = deltas[:, None] == node_deltas[None, :]
    rows = hit.any(axis=1)
    values[rows] = knots[hit.argmax(axis=1)[rows]]
    return values[:, :N_ODD], values[:, N_ODD:]


def interpolate_pair(grid: FunctionGrid, delta: float) -> KnotFunctionPair:
    """Pair at delta; a grid node's own pair is returned unchanged."""

    for entry in grid.entries:
        if entry.delta == delta:
            return entry.pair
    odd, even = interpolate_knots(grid, [delta])
    return make_pair(odd[0], even[0], grid.alpha, grid.d)


def known_ci(p: PanelData, sigma_eps: float, delta: float, grid: FunctionGrid) -> CIResult:
    """
    Interval CI(sigma_eps, delta) for known variance parameters.
    Args:
        p (PanelData): Panel with a response.
        sigma_eps (float): Error standard deviation.
        delta (float): Variance ratio.
        grid (FunctionGrid): Grid built on p's design.
    Returns:
        CIResult: The interval; `reverted` when |h| >= d.
    """

    ds = design_summary(p)
    check_design(grid, ds)
    h = hausman_stat(p, sigma_eps, delta)
    if abs(h) >= grid.d:
        lower, upper = fixed_effects_interval(p, sigma_eps, 1.0 - grid.alpha)
        return CIResult(lower, upper, 0.0, z_value(grid.alpha), h, sigma_eps, delta, True)

    pair = interpolate_pair(grid, delta)
    shift = eval_odd(pair, h)
    half = eval_even(pair, h)
    se = math.sqrt(sigma_eps**2 / ds.ssw)
    _, bw, _ = fit_gls(p)
    center = bw + se * shift
    return CIResult(center - se * half, center + se * half, shift, half, h, sigma_eps, delta, False)


def plugin_ci(p: PanelData, grid: FunctionGrid) -> CIResult:
    """CI(sigma_eps_hat, delta_hat): known_ci at the estimated variance parameters."""

    fit = estimate_variance_components(p)
    return known_ci(p, fit.sigma_eps_hat, fit.delta_hat, grid)


def _real(value: float) -> str:
    return f"{value:.{CSV_DIGITS}g}"


def save_grid(grid: FunctionGrid, target: str | IO[str]):
    """Writes a grid in the `exoci-grid v1` text format."""

    lines = [
        "# optimized interval pairs, one block per rho node",
        GRID_HEADER,
        f"alpha {_real(grid.alpha)}",
        f"d {_real(grid.d)}",
        f"N {grid.N}",
        f"T {grid.T}",
        f"ssw {_real(grid.ssw)}",
        f"ssb {_real(grid.ssb)}",
    ]
    for entry in grid.entries:
        if not entry.result.balanced:
            lines.append(f"# gain - loss = {entry.result.gain_loss_gap:.3g} at this node")
        lines.append(" ".join(_real(v) for v in (entry.rho, entry.delta, entry.phi_star)))
        lines.append("odd: " + " ".join(_real(v) for v in entry.pair.odd_knots))
        lines.append("even: " + " ".join(_real(v) for v in entry.pair.even_knots))
    text = "\n".join(lines) + "\n"
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        target.write(text)
    logger.info("grid written (%d entries)", len(grid.entries))


def _numbers(fields: list[str], count: int, where: str) -> list[float]:
    if len(fields) != count:
        raise GridFormatError(f"{where}: expected {count} values, got {len(fields)}")
    try:
        return [float(v) for v in fields]
    except ValueError as exc:
        raise GridFormatError(f"{where}: {exc}") from exc


def load_grid(source: str | IO[str]) -> FunctionGrid:
    """
    Reads a grid file and recomputes the diagnostics of every pair.
    Raises:
        GridFormatError: Malformed file or invalid pair.
    """

    if isinstance(source, str):
        with open(source, encoding="utf-8") as handle:
            text = handle.read()
    else:
        text = source.read()
    lines = [
        line.strip() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines or lines[0] != GRID_HEADER:
        raise GridFormatError(f"missing '{GRID_HEADER}' header")

    header = {}
    for i, key in enumerate(("alpha", "d", "N", "T", "ssw", "ssb"), start=1):
        fields = lines[i].split() if i < len(lines) else []
        if len(fields) != 2 or fields[0] != key:
            raise GridFormatError(f"expected '{key} <value>' on line {i + 1}")
        header[key] = _numbers(fields[1:], 1, key)[0]

    alpha, d = header["alpha"], header["d"]
    N, T = int(header["N"]), int(header["T"])
    ssw, ssb = header["ssw"], header["ssb"]
    body = lines[7:]
    if len(body) % 3 or not body:
        raise GridFormatError("entries must be blocks of three lines")
    if len(body) // 3 != len(RHO_GRID):
        raise GridFormatError(f"expected {len(RHO_GRID)} entries, got {len(body) // 3}")

    entries = []
    for k in range(0, len(body), 3):
        rho, delta, phi = _numbers(body[k].split(), 3, f"entry {k // 3 + 1}")
        odd_line, even_line = body[k + 1].split(), body[k + 2].split()
        if odd_line[:1] != ["odd:"] or even_line[:1] != ["even:"]:
            raise GridFormatError(f"entry {k // 3 + 1}: expected 'odd:' and 'even:' lines")
        odd = _numbers(odd_line[1:], 5, "odd")
        even = _numbers(even_line[1:], 6, "even")
        try:
            ctx = KGContext(rho, alpha, d)
            pair = make_pair(odd, even, alpha, d)
            entries.append(GridEntry(rho, delta, phi, assess_pair(ctx, pair, phi)))
        except (ValueError, ExociError) as exc:
            raise GridFormatError(f"entry {k // 3 + 1}: {exc}") from exc

    if entries[0].rho != 0.0 or not math.isinf(entries[0].delta):
        raise GridFormatError("first entry must be rho = 0, delta = inf")
    if any(b.rho > a.rho for a, b in zip(entries, entries[1:])):
        raise GridFormatError("rho must not increase along the entries")
    return FunctionGrid(N, T, ssw, ssb, ssb / ssw, alpha, d, tuple(entries))

