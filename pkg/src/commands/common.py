"""
Helpers shared by the command groups.

- `panel_options`: column-name options of the panel readers.
- `parse_values`: "start:stop:step" ranges or comma-separated lists.
- `emit`: writes a CSV table to --out or stdout, plus the run manifest.
"""

import click
import numpy as np
from models.manifest import RunManifest, manifest_path
from utils.csv_io import write_table
from utils.logger import get_logger

logger = get_logger("commands")


def panel_options(command):
    """Adds --unit, --time, --x and --y column options."""

    for name, default in (("y", "y"), ("x", "x"), ("time", "time"), ("unit", "unit")):
        command = click.option(
            f"--{name}-col",
            name,
            default=default,
            show_default=True,
            help=f"Name of the {name} column.",
        )(command)
    return command


def out_option(command):
    return click.option(
        "--out",
        type=click.Path(dir_okay=False, writable=True),
        default=None,
        help="Output CSV path; stdout when omitted.",
    )(command)


def seed_option(command):
    return click.option(
        "--seed", type=int, default=None, help="Master seed; the global --seed when omitted."
    )(command)


def threads_option(command):
    return click.option(
        "--threads",
        type=click.IntRange(min=1),
        default=None,
        help="Worker count; the global --threads when omitted.",
    )(command)


def root_setting(ctx: click.Context, key: str, value):
    """A subcommand value, or the root group's when the flag was not given."""

    if value is not None:
        return value
    return (ctx.find_root().obj or {}).get(key, 1 if key == "threads" else None)


def parse_values(text: str) -> tuple[float, ...]:
    """
    Parses "a,b,c" or "start:stop:step" (stop included).
    Raises:
        click.BadParameter: Malformed text.
    """

    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError("need step > 0 and stop >= start")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return tuple(float(v) for v in np.round(start + step * np.arange(count), 12))
        values = tuple(float(v) for v in text.split(",") if v.strip())
        if not values:
            raise ValueError("empty list")
        return values
    except ValueError as exc:
        raise click.BadParameter(f"'{text}': {exc}") from exc


def emit(
    ctx: click.Context,
    rows: list[dict],
    out: str | None,
    inputs: tuple = (),
    alpha: float | None = None,
    seed: int | None = None,
    threads: int | None = None,
):
    """
    Writes rows as CSV; with --out also writes `<out>.manifest`.
    Args:
        ctx (click.Context): Current context; its root object holds argv and threads.
        rows (list[dict]): Table rows.
        out (str | None): Output path.
        inputs (tuple): Input paths to record.
        threads (int | None): Worker count used; the root value when None.
    """

    write_table(rows, out)
    if out is None:
        return
    root = ctx.find_root().obj or {}
    manifest = RunManifest(
        command=ctx.command_path.partition(" ")[2] or ctx.command_path,
        argv=tuple(root.get("argv", ())),
        inputs=tuple(inputs),
        outputs=(out,),
        alpha=alpha,
        seed=seed,
        threads=threads if threads is not None else root.get("threads", 1),
    )
    manifest.save(manifest_path(out))
    logger.info("wrote %s and its manifest", out)
