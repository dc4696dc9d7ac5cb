"""
Estimation command.

Commands:
    fit <panel.csv>:
        Fits the correlated random effects model to a long-format panel.
        - Reads and validates the panel.
        - Computes the within and between GLS estimates and the variance components.
        - Prints one CSV row: design shape, a_hat, bw_hat, bb_hat, sigma_eps2_hat,
        sigma_eta2_hat, delta_hat and the Hausman statistic h_hat.
"""

import click
from core.panel_core import design_summary, estimate_variance_components, load_panel
from commands.common import emit, out_option, panel_options


@click.command("fit")
@click.argument("panel", type=click.Path(exists=True, dir_okay=False))
@panel_options
@out_option
@click.pass_context
def fit(ctx, panel, unit, time, x, y, out):
    """Estimate b_W, b_B, a, sigma_eps^2, delta and h from PANEL."""

    p = load_panel(panel, unit=unit, time=time, x=x, y=y)
    ds = design_summary(p)
    result = estimate_variance_components(p)
    row = {
        "N": ds.N,
        "T": ds.T,
        "ssw": ds.ssw,
        "ssb": ds.ssb,
        "r": ds.r,
        "a_hat": result.a_hat,
        "bw_hat": result.bw_hat,
        "bb_hat": result.bb_hat,
        "sigma_eps2_hat": result.sigma_eps2_hat,
        "sigma_eta2_hat": result.sigma_eta2_hat,
        "delta_hat": result.delta_hat,
        "h_hat": result.h_hat,
    }
    emit(ctx, [row], out, inputs=(panel,))
