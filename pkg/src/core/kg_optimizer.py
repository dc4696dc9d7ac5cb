"""
Known-variance interval optimization.

For a pair (f_o, f_e) and correlation rho of (pivot, psi_hat):

    CP(psi)  = 1 - alpha + int_{-d}^{d} (k(w) - k_dag(w)) phi(w - psi) dw
    SEL(psi) = 1 + (1/z) int_{-d}^{d} (f_e(w) - z) phi(w - psi) dw
    objective(phi) = (2/z) int_0^d (f_e(w) - z) ((1 - phi) phi_pdf(w) + phi) dw

with k(w) = P(f_o(w) - f_e(w) <= G <= f_o(w) + f_e(w) | psi_hat = w) for the
standardized pivot G, and k_dag the same probability for the standard pair.
Integrals use a composite Gauss-Legendre rule with one subinterval per knot
cell, on which the spline is a single cubic.

`optimize_pair` minimizes the objective over the 11 free knots subject to
CP >= 1 - alpha on a psi grid and f_e >= 0, refining the psi grid by cutting
planes. `select_phi` picks phi where the gain 1 - SEL(0)^2 equals the loss
max SEL^2 - 1.
"""

from functools import lru_cache
import numpy as np
from scipy.optimize import approx_fprime, minimize
from scipy.special import ndtr
from core.spline_funcs import (
    cardinal_basis,
    eval_even,
    eval_odd,
    expand_knots,
    knot_positions,
    make_pair,
    min_even_value,
    pair_vector,
    standard_pair,
    z_value,
)
from models.knot_pair import KnotFunctionPair
from models.optimizer import KGContext, OptimizedPair
from utils.consts import (
    CP_CUT_TOL,
    CP_SLACK,
    EVEN_ENFORCE_STEP,
    EVEN_TOL,
    EVEN_VERIFY_STEP,
    FD_STEP,
    GAIN_LOSS_TOL,
    MAX_BISECTIONS,
    MAX_CUT_ROUNDS,
    MIN_GAIN,
    PHI_SCAN,
    PSI_VERIFY_MARGIN,
    PSI_VERIFY_STEP,
    RHO_DEGENERATE,
    SLSQP_FTOL,
    SLSQP_MAXITER,
)
from utils.errors import OptimizerFailure, QuadratureFailure
from utils.logger import get_logger
from utils.quadrature import composite_gauss_legendre

logger = get_logger("kg_optimizer")

SQRT_2PI = np.sqrt(2.0 * np.pi)


def _pdf(u):
    return np.exp(-0.5 * u * u) / SQRT_2PI


@lru_cache(maxsize=16)
def _quadrature(d: float, points: int):
    nodes, weights = composite_gauss_legendre(knot_positions(d), points)
    basis = cardinal_basis(np.abs(nodes), d)
    return nodes, weights, basis


def verification_grid(d: float) -> np.ndarray:
    return np.round(np.arange(0.0, d + PSI_VERIFY_MARGIN + 1e-9, PSI_VERIFY_STEP), 10)


def _node_values(ctx: KGContext, pair: KnotFunctionPair):
    nodes, weights, _ = _quadrature(ctx.d, ctx.quad_points)
    return nodes, weights, eval_odd(pair, nodes), eval_even(pair, nodes)


def _cp(ctx: KGContext, nodes, weights, fo, fe, z, psi) -> np.ndarray:
    psi = np.abs(np.atleast_1d(np.asarray(psi, dtype=float)))
    s = np.sqrt(1.0 - ctx.rho**2)
    wm = nodes[None, :] - psi[:, None]
    shift = ctx.rho * wm
    k = ndtr((fo + fe - shift) / s) - ndtr((fo - fe - shift) / s)
    k_dag = ndtr((z - shift) / s) - ndtr((-z - shift) / s)
    cp = 1.0 - ctx.alpha + ((k - k_dag) * _pdf(wm)) @ weights
    if not np.isfinite(cp).all():
        raise QuadratureFailure("non-finite coverage integrand")
    return cp


def _sel(nodes, weights, fe, z, psi) -> np.ndarray:
    psi = np.abs(np.atleast_1d(np.asarray(psi, dtype=float)))
    wm = nodes[None, :] - psi[:, None]
    sel = 1.0 + (((fe - z) * _pdf(wm)) @ weights) / z
    if not np.isfinite(sel).all():
        raise QuadratureFailure("non-finite length integrand")
    return sel


def _objective(nodes, weights, fe, z, phi: float) -> float:
    right = nodes > 0
    w = nodes[right]
    value = 2.0 / z * np.sum(weights[right] * (fe[right] - z) * ((1.0 - phi) * _pdf(w) + phi))
    if not np.isfinite(value):
        raise QuadratureFailure("non-finite objective integrand")
    return float(value)


def _scalar_or_array(values: np.ndarray, psi):
    return float(values[0]) if np.ndim(psi) == 0 else values


def coverage_probability(ctx: KGContext, pair: KnotFunctionPair, psi):
    """
    Coverage probability CP(psi) of the interval defined by the pair.
    Args:
        ctx (KGContext): Correlation, level and quadrature.
        pair (KnotFunctionPair): Interval-shape pair.
        psi (float | array): Noncentrality; CP is even, |psi| is used.
    Returns:
        float | np.ndarray: CP at each psi.
    """

    nodes, weights, fo, fe = _node_values(ctx, pair)
    return _scalar_or_array(_cp(ctx, nodes, weights, fo, fe, pair.z, psi), psi)


def scaled_expected_length(ctx: KGContext, pair: KnotFunctionPair, psi):
    """Expected length relative to the fixed effects interval, SEL(psi)."""

    nodes, weights, _, fe = _node_values(ctx, pair)
    return _scalar_or_array(_sel(nodes, weights, fe, pair.z, psi), psi)


def objective(ctx: KGContext, pair: KnotFunctionPair, phi: float) -> float:
    """(1 - phi)(SEL(0) - 1) + phi * int (SEL(psi) - 1) dpsi, in closed quadrature form."""

    nodes, weights, _, fe = _node_values(ctx, pair)
    return _objective(nodes, weights, fe, pair.z, phi)


def assess_pair(
    ctx: KGContext,
    pair: KnotFunctionPair,
    phi: float,
    converged: bool = True,
    rounds: int = 0,
) -> OptimizedPair:
    """
    Coverage and length diagnostics of a pair on the 0.01-step psi grid.
    Returns:
        OptimizedPair: With min CP, max SEL, SEL(0), gain and loss filled in.
    """

    nodes, weights, fo, fe = _node_values(ctx, pair)
    grid = verification_grid(ctx.d)
    cp = _cp(ctx, nodes, weights, fo, fe, pair.z, grid)
    sel = _sel(nodes, weights, fe, pair.z, grid)
    min_cp = float(cp.min())
    max_sel = float(sel.max())
    sel0 = float(sel[0])
    return OptimizedPair(
        pair=pair,
        phi=float(phi),
        gain=1.0 - sel0**2,
        loss=max_sel**2 - 1.0,
        min_cp=min_cp,
        max_sel=max_sel,
        sel_at_zero=sel0,
        converged=bool(converged),
        constraint_violation=max(0.0, 1.0 - ctx.alpha - min_cp),
        objective=_objective(nodes, weights, fe, pair.z, phi),
        rounds=rounds,
    )


class _Problem:
    """Decision-vector view of the optimization at fixed (ctx, phi)."""

    def __init__(self, ctx: KGContext, phi: float):
        self.ctx = ctx
        self.phi = phi
        self.z = z_value(ctx.alpha)
        self.nodes, self.weights, basis = _quadrature(ctx.d, ctx.quad_points)
        self.sign = np.sign(self.nodes)[:, None]
        self.basis = basis
        self.even_points = np.arange(0.0, ctx.d, EVEN_ENFORCE_STEP)
        self.even_basis = cardinal_basis(self.even_points, ctx.d)
        self.check_points = np.arange(0.0, ctx.d, EVEN_VERIFY_STEP)
        self.check_basis = cardinal_basis(self.check_points, ctx.d)

    def values(self, v: np.ndarray):
        full_odd, full_even = expand_knots(v[:5], v[5:], self.z)
        fo = (self.sign * self.basis) @ full_odd
        fe = self.basis @ full_even
        return fo, fe

    def objective(self, v):
        _, fe = self.values(v)
        return _objective(self.nodes, self.weights, fe, self.z, self.phi)

    def coverage_slack(self, v, psi):
        fo, fe = self.values(v)
        return _cp(self.ctx, self.nodes, self.weights, fo, fe, self.z, psi) - (
            1.0 - self.ctx.alpha
        )

    def even_values(self, v):
        _, full_even = expand_knots(v[:5], v[5:], self.z)
        return self.even_basis @ full_even

    def even_cuts(self, v) -> np.ndarray:
        """Points of the fine check grid where f_e < 0 and not yet enforced."""

        _, full_even = expand_knots(v[:5], v[5:], self.z)
        negative = self.check_points[self.check_basis @ full_even < -EVEN_TOL]
        return negative[~np.isin(negative, self.even_points)]

    def enforce_even(self, points: np.ndarray):
        self.even_points = np.sort(np.concatenate([self.even_points, points]))
        self.even_basis = cardinal_basis(self.even_points, self.ctx.d)

    def solve(self, v0: np.ndarray, psi: np.ndarray):
        constraints = [
            {
                "type": "ineq",
                "fun": lambda v: self.coverage_slack(v, psi),
                "jac": lambda v: approx_fprime(v, lambda u: self.coverage_slack(u, psi), FD_STEP),
            },
            {
                "type": "ineq",
                "fun": self.even_values,
                "jac": lambda v: approx_fprime(v, self.even_values, FD_STEP),
            },
        ]
        return minimize(
            self.objective,
            v0,
            jac=lambda v: approx_fprime(v, self.objective, FD_STEP),
            method="SLSQP",
            constraints=constraints,
            options={"maxiter": SLSQP_MAXITER, "ftol": SLSQP_FTOL},
        )


def _new_cuts(cp_slack: np.ndarray, grid: np.ndarray, known: np.ndarray) -> np.ndarray:
    violated = cp_slack < -CP_CUT_TOL
    left = np.concatenate([[np.inf], cp_slack[:-1]])
    right = np.concatenate([cp_slack[1:], [np.inf]])
    local_min = violated & (cp_slack <= left) & (cp_slack <= right)
    cuts = grid[local_min]
    return cuts[~np.isin(cuts, known)]


def optimize_pair(ctx: KGContext, phi: float) -> OptimizedPair:
    """
    Minimizes the objective at phi subject to the coverage constraint.
    Args:
        ctx (KGContext): Problem definition.
        phi (float): Objective weight in [0, 1].
    Returns:
        OptimizedPair: Solution, verified on the 0.01-step psi grid; objective <= 0.
    Raises:
        OptimizerFailure: Coverage still violated by more than the slack, or
        f_e negative on the 0.01-step check grid, after the last cutting-plane round.
    """

    if not 0.0 <= phi <= 1.0:
        raise ValueError("phi must lie in [0, 1]")
    start = standard_pair(ctx.alpha, ctx.d)
    if phi >= 1.0 or ctx.rho >= RHO_DEGENERATE:
        return assess_pair(ctx, start, phi)

    problem = _Problem(ctx, phi)
    psi = np.array(ctx.psi_constraint_grid, dtype=float)
    grid = verification_grid(ctx.d)
    v = pair_vector(start)
    converged = False
    rounds = 0
    for rounds in range(1, MAX_CUT_ROUNDS + 1):
        result = problem.solve(v, psi)
        v = np.array(result.x)
        v[5:] = np.maximum(v[5:], 0.0)
        converged = bool(result.success)
        slack = problem.coverage_slack(v, grid)
        cuts = _new_cuts(slack, grid, psi)
        even_cuts = problem.even_cuts(v)
        logger.debug(
            "rho=%.4f phi=%.3f round %d: objective %.6f, min CP slack %.3g, %d + %d new cuts (%s)",
            ctx.rho, phi, rounds, result.fun, slack.min(), cuts.size, even_cuts.size, result.message,
        )
        if even_cuts.size:
            problem.enforce_even(even_cuts)
        elif slack.min() >= -CP_CUT_TOL or cuts.size == 0:
            break
        psi = np.sort(np.concatenate([psi, cuts]))

    pair = make_pair(v[:5], v[5:], ctx.alpha, ctx.d)
    lowest = min_even_value(pair)
    if lowest < -EVEN_TOL:
        raise OptimizerFailure(
            f"f_e dips to {lowest:.3g} at rho={ctx.rho}, phi={phi}", rho=ctx.rho
        )
    solution = assess_pair(ctx, pair, phi, converged, rounds)
    if solution.constraint_violation > CP_SLACK:
        raise OptimizerFailure(
            f"coverage violated by {solution.constraint_violation:.3g} at rho={ctx.rho}, phi={phi}",
            rho=ctx.rho,
        )
    if solution.objective > 0.0:
        logger.warning("rho=%.4f phi=%.3f: no improvement on the standard pair", ctx.rho, phi)
        return assess_pair(ctx, start, phi, converged, rounds)
    return solution


def phi_scan(ctx: KGContext, phis=PHI_SCAN) -> list[OptimizedPair]:
    """Optimized pairs along a phi grid: the gain/loss trade-off curve."""

    return [optimize_pair(ctx, phi) for phi in phis]


def _balance(result: OptimizedPair) -> float:
    return result.gain - result.loss


def select_phi(ctx: KGContext) -> OptimizedPair:
    """
    Finds phi* where gain = loss by a bracketing scan and bisection.
    Returns:
        OptimizedPair: The pair at phi*; the standard pair with phi = 1 when no
        scanned phi achieves a gain of at least 1e-3. Without a sign change of
        gain - loss, or when bisection runs out, the closest phi is returned
        and its `balanced` flag is False.
    """

    if ctx.rho >= RHO_DEGENERATE:
        return assess_pair(ctx, standard_pair(ctx.alpha, ctx.d), 1.0)

    scan = phi_scan(ctx)
    useful = [r for r in scan if r.gain >= MIN_GAIN]
    if not useful:
        logger.info("rho=%.4f: gain below %.0e for every phi, standard pair kept", ctx.rho, MIN_GAIN)
        return assess_pair(ctx, standard_pair(ctx.alpha, ctx.d), 1.0)

    best = min(useful, key=lambda r: abs(_balance(r)))
    if abs(_balance(best)) <= GAIN_LOSS_TOL:
        return best

    bracket = next(
        (
            (lo, hi)
            for lo, hi in zip(useful, useful[1:])
            if _balance(lo) * _balance(hi) < 0
        ),
        None,
    )
    if bracket is None:
        logger.warning(
            "rho=%.4f: gain - loss keeps one sign over the scan, using phi=%.2f (gap %.3g)",
            ctx.rho, best.phi, _balance(best),
        )
        return best

    lo, hi = bracket
    for _ in range(MAX_BISECTIONS):
        mid = optimize_pair(ctx, 0.5 * (lo.phi + hi.phi))
        if abs(_balance(mid)) < abs(_balance(best)):
            best = mid
        if abs(_balance(mid)) <= GAIN_LOSS_TOL:
            break
        if _balance(lo) * _balance(mid) < 0:
            hi = mid
        else:
            lo = mid
    if not best.balanced:
        logger.warning("rho=%.4f: bisection stopped with gain - loss = %.3g", ctx.rho, _balance(best))
    logger.info(
        "rho=%.4f: phi*=%.4f gain=%.4f loss=%.4f", ctx.rho, best.phi, best.gain, best.loss
    )
    return best
