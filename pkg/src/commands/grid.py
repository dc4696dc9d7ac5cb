"""
Grid commands.

Commands:
    grid build <panel.csv> --out <grid file>:
        Optimizes the interval pairs of the panel's design at the 11 rho nodes
        and writes the grid file (response column not needed).

    grid phi-scan --rho <rho>:
        Prints the gain/loss trade-off of the optimized pair along the phi scan
        at one correlation.
"""

import click
from core.interval_engine import build_grid, save_grid
from core.kg_optimizer import phi_scan
from core.panel_core import design_summary, load_panel
from commands.common import emit, out_option, panel_options, root_setting, threads_option
from models.manifest import RunManifest, manifest_path
from models.optimizer import KGContext
from utils.consts import DEFAULT_ALPHA, DEFAULT_D


@click.group("grid")
def grid():
    """Build interval grids and inspect the optimization."""


@grid.command("build")
@click.argument("panel", type=click.Path(exists=True, dir_okay=False))
@panel_options
@click.option("--alpha", type=float, default=DEFAULT_ALPHA, show_default=True)
@click.option("--d", "support", type=float, default=DEFAULT_D, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
@threads_option
@click.pass_context
def build(ctx, panel, unit, time, x, y, alpha, support, out, threads):
    """Optimize the grid of PANEL's design and write it to --out."""

    p = load_panel(panel, unit=unit, time=time, x=x, y=y)
    threads = root_setting(ctx, "threads", threads)
    result = build_grid(design_summary(p), alpha=alpha, d=support, threads=threads)
    save_grid(result, out)
    RunManifest(
        command="grid build",
        argv=tuple(ctx.find_root().obj.get("argv", ())),
        inputs=(panel,),
        outputs=(out,),
        alpha=alpha,
        threads=threads,
    ).save(manifest_path(out))
    click.echo(f"grid written to {out}: min CP {result.min_cp:.6f}", err=True)
    for entry in result.unbalanced:
        click.echo(
            f"warning: rho={entry.rho:g} gain - loss = {entry.result.gain_loss_gap:.3g} (not balanced)",
            err=True,
        )


@grid.command("phi-scan")
@click.option("--rho", type=float, required=True, help="Correlation in (-1, 0].")
@click.option("--alpha", type=float, default=DEFAULT_ALPHA, show_default=True)
@click.option("--d", "support", type=float, default=DEFAULT_D, show_default=True)
@out_option
@click.pass_context
def scan(ctx, rho, alpha, support, out):
    """Print phi, SEL(0), max SEL, gain, loss and min CP along the phi scan."""

    ctx_kg = KGContext(rho, alpha, support)
    rows = [
        {
            "phi": r.phi,
            "objective": r.objective,
            "sel_at_zero": r.sel_at_zero,
            "max_sel": r.max_sel,
            "gain": r.gain,
            "loss": r.loss,
            "min_cp": r.min_cp,
            "converged": str(r.converged).lower(),
        }
        for r in phi_scan(ctx_kg)
    ]
    emit(ctx, rows, out, alpha=alpha)
