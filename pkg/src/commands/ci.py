"""
Interval command.

Commands:
    ci <panel.csv> --grid <grid file>:
        Prints the plug-in interval CI(sigma_eps_hat, delta_hat) of the slope,
        or CI(sigma_eps, delta) when both --sigma-eps and --delta are given.
        The row carries the endpoints, f_o(h), f_e(h), h, the variance
        parameters used and the `reverted` flag (|h| >= d).
"""

import click
from core.interval_engine import known_ci, load_grid, plugin_ci
from core.panel_core import load_panel
from commands.common import emit, out_option, panel_options


@click.command("ci")
@click.argument("panel", type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", "grid_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sigma-eps", type=float, default=None, help="Known error standard deviation.")
@click.option("--delta", type=float, default=None, help="Known variance ratio.")
@panel_options
@out_option
@click.pass_context
def ci(ctx, panel, grid_path, sigma_eps, delta, unit, time, x, y, out):
    """Confidence interval for the slope from PANEL."""

    if (sigma_eps is None) != (delta is None):
        raise click.UsageError("--sigma-eps and --delta go together")
    p = load_panel(panel, unit=unit, time=time, x=x, y=y)
    grid = load_grid(grid_path)
    if sigma_eps is None:
        result = plugin_ci(p, grid)
    else:
        result = known_ci(p, sigma_eps, delta, grid)
    emit(ctx, [result.as_row()], out, inputs=(panel, grid_path), alpha=grid.alpha)
