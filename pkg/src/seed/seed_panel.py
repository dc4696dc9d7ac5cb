"""
This script writes a synthetic long-format panel for development or testing purposes.

- Names the units after Faker city-pair markets ("Springfield-Lake Mary").
- Draws a covariate with both within and between variation.
- Simulates the response from the correlated random effects model
y_it = a + b x_it + xi xbar_i + eta_i + eps_it at the chosen (gamma, delta).
- Writes unit, time, x and y columns as CSV.

Usage:
    Run `PYTHONPATH=src python src/seed/seed_panel.py --out panel.csv` from the root folder.
"""

import click
import numpy as np
from faker import Faker
from core.panel_core import design_summary, synthesize_response
from models.panel import ModelParams, PanelData
from utils.csv_io import write_table
from utils.rng import replication_stream


def market_names(n_units: int, seed: int) -> list[str]:
    """Distinct "origin-destination" labels."""

    fake = Faker()
    fake.seed_instance(seed)
    names: set[str] = set()
    labels = []
    while len(labels) < n_units:
        label = f"{fake.city()}-{fake.city()}"
        if label not in names:
            names.add(label)
            labels.append(label)
    return labels


def seed_panel(
    n_units: int = 200,
    n_times: int = 4,
    gamma: float = 0.0,
    delta: float = 1.0,
    a: float = 0.0,
    b: float = 1.0,
    sigma_eps: float = 1.0,
    seed: int = 1,
) -> list[dict]:
    """
    Simulates a balanced panel.
    Returns:
        list[dict]: Rows with unit, time, x and y, sorted by unit then time.
    """

    rng = replication_stream(seed, 0, "run")
    x = rng.normal(0.0, 1.0, (n_units, 1)) + rng.normal(0.0, 0.5, (n_units, n_times))
    units = market_names(n_units, seed)
    times = [str(2000 + t) for t in range(n_times)]
    design = PanelData(tuple(units), tuple(times), x)
    params = ModelParams.from_gamma(gamma, delta, n_units, a=a, b=b, sigma_eps=sigma_eps)
    y = synthesize_response(
        design_summary(design), x, params, rng.standard_normal(n_units), rng.standard_normal((n_units, n_times))
    )
    return [
        {"unit": units[i], "time": times[t], "x": float(x[i, t]), "y": float(y[i, t])}
        for i in range(n_units)
        for t in range(n_times)
    ]


@click.command()
@click.option("--units", "n_units", type=int, default=200, show_default=True)
@click.option("--times", "n_times", type=int, default=4, show_default=True)
@click.option("--gamma", type=float, default=0.0, show_default=True)
@click.option("--delta", type=float, default=1.0, show_default=True)
@click.option("--a", type=float, default=0.0, show_default=True)
@click.option("--b", type=float, default=1.0, show_default=True)
@click.option("--sigma-eps", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
def main(n_units, n_times, gamma, delta, a, b, sigma_eps, seed, out):
    rows = seed_panel(n_units, n_times, gamma, delta, a, b, sigma_eps, seed)
    write_table(rows, out)
    if out:
        click.echo(f"Seeded {n_units} units x {n_times} periods to {out}.", err=True)


if __name__ == "__main__":
    main()
