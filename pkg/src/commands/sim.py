"""
Simulation commands.

Commands:
    sim cp <design.csv> --grid <file>:
        Monte Carlo coverage of the plug-in interval at every (gamma, delta) of
        the search grids, M replications each.

    sim sel <design.csv> --grid <file> --c-min <c>:
        Monte Carlo scaled expected length at every (gamma, delta).

    sim confcoef <design.csv> --grid <file>:
        Three-stage confidence-coefficient search; prints the per-delta minima
        followed by the final estimate at M3.

All tables have the columns gamma, delta, estimate, std_error, M, seed.
--seed and --threads default to the global options of the same name.
"""

import click
from core.interval_engine import load_grid
from core.mc_harness import (
    estimate_confidence_coefficient,
    estimate_cp,
    estimate_known_cp,
    estimate_sel,
)
from core.panel_core import load_panel
from commands.common import (
    emit,
    out_option,
    panel_options,
    parse_values,
    root_setting,
    seed_option,
    threads_option,
)
from models.simulation import SimConfig
from utils.consts import DELTA_GRID, GAMMA_GRID, M1, M2, M3


def _join(values) -> str:
    return ",".join(f"{v:g}" for v in values)


def sim_options(command):
    for option in reversed(
        (
            click.argument("design", type=click.Path(exists=True, dir_okay=False)),
            click.option(
                "--grid", "grid_path", required=True, type=click.Path(exists=True, dir_okay=False)
            ),
            click.option("--gamma-grid", default=_join(GAMMA_GRID), show_default=True),
            click.option("--delta-grid", default=_join(DELTA_GRID), show_default=True),
        )
    ):
        command = option(command)
    return seed_option(threads_option(out_option(panel_options(command))))


@click.group("sim")
def sim():
    """Monte Carlo studies of the plug-in interval."""


def _configs(design, grid_path, gamma_grid, delta_grid, M, unit, time, x, seed, threads):
    p = load_panel(design, unit=unit, time=time, x=x, y=None)
    grid = load_grid(grid_path)
    base = SimConfig(p, grid, 0.0, 0.0, M, seed, threads=threads)
    return grid, [
        base.at(g, d, M, seed)
        for d in parse_values(delta_grid)
        for g in parse_values(gamma_grid)
    ]


@sim.command("cp")
@sim_options
@click.option("--M", "M", type=int, default=M1, show_default=True)
@click.option("--known", is_flag=True, help="Known (sigma_eps, delta) instead of plug-in.")
@click.pass_context
def cp(ctx, design, grid_path, gamma_grid, delta_grid, unit, time, x, y, out, threads, seed, M, known):
    """Coverage probability over the (gamma, delta) grid."""

    seed, threads = root_setting(ctx, "seed", seed), root_setting(ctx, "threads", threads)
    grid, configs = _configs(
        design, grid_path, gamma_grid, delta_grid, M, unit, time, x, seed, threads
    )
    run = estimate_known_cp if known else estimate_cp
    rows = [run(cfg).as_row() for cfg in configs]
    emit(ctx, rows, out, (design, grid_path), grid.alpha, seed, threads)


@sim.command("sel")
@sim_options
@click.option("--M", "M", type=int, default=M1, show_default=True)
@click.option("--c-min", type=float, default=None, help="Confidence coefficient; 1 - alpha by default.")
@click.pass_context
def sel(ctx, design, grid_path, gamma_grid, delta_grid, unit, time, x, y, out, threads, seed, M, c_min):
    """Scaled expected length over the (gamma, delta) grid."""

    seed, threads = root_setting(ctx, "seed", seed), root_setting(ctx, "threads", threads)
    grid, configs = _configs(
        design, grid_path, gamma_grid, delta_grid, M, unit, time, x, seed, threads
    )
    level = 1.0 - grid.alpha if c_min is None else c_min
    rows = [estimate_sel(cfg, level).as_row() for cfg in configs]
    emit(ctx, rows, out, (design, grid_path), grid.alpha, seed, threads)


@sim.command("confcoef")
@sim_options
@click.option("--M1", "m1", type=int, default=M1, show_default=True)
@click.option("--M2", "m2", type=int, default=M2, show_default=True)
@click.option("--M3", "m3", type=int, default=M3, show_default=True)
@click.pass_context
def confcoef(ctx, design, grid_path, gamma_grid, delta_grid, unit, time, x, y, out, threads, seed, m1, m2, m3):
    """Confidence coefficient by the three-stage search."""

    if not m1 < m2 < m3:
        raise click.BadParameter("need M1 < M2 < M3")
    seed, threads = root_setting(ctx, "seed", seed), root_setting(ctx, "threads", threads)
    p = load_panel(design, unit=unit, time=time, x=x, y=None)
    grid = load_grid(grid_path)
    result = estimate_confidence_coefficient(
        p,
        grid,
        parse_values(gamma_grid),
        parse_values(delta_grid),
        m1,
        m2,
        m3,
        seed,
        threads=threads,
    )
    rows = [e.as_row() for e in result.per_delta] + [result.c_min.as_row()]
    emit(ctx, rows, out, (design, grid_path), grid.alpha, seed, threads)
    click.echo(
        f"c_min={result.c_min.value:.6f} se={result.c_min.std_error:.2g} "
        f"gamma*={result.gamma_star:g} delta*={result.delta_star:g}",
        err=True,
    )
