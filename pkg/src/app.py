"""
exoci command line entry point.

- Defines the root click group `cli` with the global options --log-level,
--threads and --seed (flags override EXOCI_LOG_LEVEL, EXOCI_THREADS and
EXOCI_SEED, which override the built-in defaults).
- Registers the command groups:
    - `fit`: model estimates for a panel.
    - `grid build`, `grid phi-scan`: interval grids.
    - `ci`: plug-in or known-variance interval.
    - `curves cp|sel|pair`: known-variance curves.
    - `sim cp|sel|confcoef`: Monte Carlo studies.
    - `replay`: re-run a recorded manifest.
- `run(argv)` maps every exoci error to `error=<CODE> <message>` on stderr and
its exit code; usage errors exit with 2.

Usage:
    Run `PYTHONPATH=src python src/app.py --help` from the root folder.
"""

import sys
import click
from commands.ci import ci
from commands.curves import curves
from commands.fit import fit
from commands.grid import grid
from commands.replay import replay
from commands.sim import sim
from utils.consts import EXOCI_LOG_LEVEL, EXOCI_SEED, EXOCI_THREADS, SITE_DATA
from utils.errors import ExociError
from utils.logger import configure_logging


@click.group(name=SITE_DATA["NAME"])
@click.version_option(SITE_DATA["VERSION"], prog_name=SITE_DATA["NAME"])
@click.option(
    "--log-level",
    envvar="EXOCI_LOG_LEVEL",
    default=EXOCI_LOG_LEVEL,
    show_default=True,
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
)
@click.option("--threads", envvar="EXOCI_THREADS", type=click.IntRange(min=1), default=EXOCI_THREADS, show_default=True)
@click.option("--seed", envvar="EXOCI_SEED", type=int, default=EXOCI_SEED, show_default=True)
@click.pass_context
def cli(ctx, log_level, threads, seed):
    """Confidence intervals for the panel slope using uncertain exogeneity information."""

    configure_logging(log_level)
    ctx.ensure_object(dict)
    ctx.obj.setdefault("argv", [])
    ctx.obj["threads"] = threads
    ctx.obj["seed"] = seed


cli.add_command(fit)
cli.add_command(grid)
cli.add_command(ci)
cli.add_command(curves)
cli.add_command(sim)
cli.add_command(replay)


def run(argv: list[str] | None = None) -> int:
    """
    Runs the command line.
    Args:
        argv (list[str] | None): Arguments without the program name; sys.argv when None.
    Returns:
        int: 0 on success, 2 on usage errors, the error's exit code otherwise.
    """

    args = list(sys.argv[1:] if argv is None else argv)
    try:
        cli.main(args=args, prog_name=SITE_DATA["NAME"], standalone_mode=False, obj={"argv": args})
    except ExociError as exc:
        click.echo(f"error={exc.code} {exc.message}", err=True)
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except ValueError as exc:
        click.echo(f"error=INVALID_ARGUMENT {exc}", err=True)
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
