"""
Known-variance curve commands.

Commands:
    curves cp --grid <file> --delta <delta> --psi-range <start:stop:step>:
        Coverage probability CP(psi) of the known-variance interval, with the
        matching gamma for the grid's design.

    curves sel --grid <file> --delta <delta> --psi-range <start:stop:step>:
        Scaled expected length SEL(psi) and its square.

    curves pair --grid <file> --delta <delta>:
        The interpolated pair f_o(x), f_e(x) over [0, d + 1].
"""

import click
import numpy as np
from core.interval_engine import interpolate_pair, load_grid
from core.kg_optimizer import coverage_probability, scaled_expected_length
from core.panel_core import gamma_of_psi, rho_of_delta
from core.spline_funcs import eval_even, eval_odd
from commands.common import emit, out_option, parse_values
from models.optimizer import KGContext

grid_option = click.option(
    "--grid", "grid_path", required=True, type=click.Path(exists=True, dir_okay=False)
)
delta_option = click.option("--delta", type=float, required=True, help="Variance ratio.")
psi_option = click.option("--psi-range", default="0:10:0.1", show_default=True)


@click.group("curves")
def curves():
    """CP, SEL and pair curves at a known (sigma_eps, delta)."""


def _setup(grid_path: str, delta: float):
    grid = load_grid(grid_path)
    pair = interpolate_pair(grid, delta)
    ctx = KGContext(rho_of_delta(grid.r, delta, grid.T), grid.alpha, grid.d)
    return grid, pair, ctx


@curves.command("cp")
@grid_option
@delta_option
@psi_option
@out_option
@click.pass_context
def cp(ctx, grid_path, delta, psi_range, out):
    """Coverage probability against psi and gamma."""

    grid, pair, kg = _setup(grid_path, delta)
    psi = np.array(parse_values(psi_range))
    values = np.atleast_1d(coverage_probability(kg, pair, psi))
    gamma = gamma_of_psi(grid, psi, delta)
    rows = [
        {"psi": s, "gamma": g, "delta": delta, "cp": v}
        for s, g, v in zip(psi, gamma, values)
    ]
    emit(ctx, rows, out, inputs=(grid_path,), alpha=grid.alpha)


@curves.command("sel")
@grid_option
@delta_option
@psi_option
@out_option
@click.pass_context
def sel(ctx, grid_path, delta, psi_range, out):
    """Scaled expected length against psi and gamma."""

    grid, pair, kg = _setup(grid_path, delta)
    psi = np.array(parse_values(psi_range))
    values = np.atleast_1d(scaled_expected_length(kg, pair, psi))
    gamma = gamma_of_psi(grid, psi, delta)
    rows = [
        {"psi": s, "gamma": g, "delta": delta, "sel": v, "sel_squared": v * v}
        for s, g, v in zip(psi, gamma, values)
    ]
    emit(ctx, rows, out, inputs=(grid_path,), alpha=grid.alpha)


@curves.command("pair")
@grid_option
@delta_option
@click.option("--step", type=float, default=0.05, show_default=True)
@out_option
@click.pass_context
def pair(ctx, grid_path, delta, step, out):
    """f_o and f_e of the interpolated pair."""

    grid, pair_, _ = _setup(grid_path, delta)
    x = np.array(parse_values(f"0:{grid.d + 1}:{step}"))
    rows = [
        {"x": v, "f_o": o, "f_e": e}
        for v, o, e in zip(x, eval_odd(pair_, x), eval_even(pair_, x))
    ]
    emit(ctx, rows, out, inputs=(grid_path,), alpha=grid.alpha)
