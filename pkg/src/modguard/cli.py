"""Operator CLI: batch runs, simulation, reporting, fixture generation.

Exit codes: 0 success, 1 validation/data errors, 2 configuration errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import metrics as metrics_mod
from .fixtures import FixtureConfig, write_fixtures
from .pipeline import PipelineConfig, SimulationConfig, run_epoch, run_simulation, weekly_metrics
from .store import DataStore

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_CONFIG_ERROR = 2


def _load_config(path: str) -> PipelineConfig:
    p = Path(path)
    if not p.exists():
        click.echo(f"config file not found: {p}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    try:
        return PipelineConfig.from_file(p)
    except (ValueError, KeyError, TypeError) as exc:
        click.echo(f"invalid config {p}: {exc}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)


@click.group()
def main() -> None:
    """Content moderation pipeline for TV search logs."""


@main.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=False))
@click.option("--config", "config_path", required=True, type=click.Path(exists=False))
@click.option("--data-dir", required=True, type=click.Path())
def run(log_path: str, config_path: str, data_dir: str) -> None:
    """Run one offline epoch over a day's query log."""
    config = _load_config(config_path)
    if not Path(log_path).exists():
        click.echo(f"log file not found: {log_path}", err=True)
        sys.exit(EXIT_DATA_ERROR)
    try:
        summary = run_epoch(log_path, config, data_dir)
    except Exception as exc:  # noqa: BLE001
        click.echo(f"epoch failed: {exc}", err=True)
        sys.exit(EXIT_DATA_ERROR)
    click.echo(json.dumps(summary.to_dict(), sort_keys=True))


@main.command()
@click.option("--weeks", default=8, type=int)
@click.option("--seed", default=7, type=int)
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--queries-per-epoch", default=20, type=int)
def simulate(weeks: int, seed: int, data_dir: str, queries_per_epoch: int) -> None:
    """Run a seeded synthetic multi-week evaluation."""
    sim = SimulationConfig(seed=seed, queries_per_epoch=queries_per_epoch)
    try:
        weekly = run_simulation(weeks, sim, data_dir)
    except Exception as exc:  # noqa: BLE001
        click.echo(f"simulation failed: {exc}", err=True)
        sys.exit(EXIT_DATA_ERROR)
    click.echo(metrics_mod.to_csv(weekly), nl=False)


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=False))
@click.option("--format", "fmt", default="json", type=click.Choice(["csv", "json"]))
@click.option("--week-length", default=7, type=int)
def report(data_dir: str, fmt: str, week_length: int) -> None:
    """Weekly metrics and trend over an existing data directory."""
    if not Path(data_dir).exists():
        click.echo(f"data dir not found: {data_dir}", err=True)
        sys.exit(EXIT_DATA_ERROR)
    store = DataStore(data_dir)
    weekly = weekly_metrics(store, week_length=week_length)
    if not weekly:
        click.echo("no epochs found", err=True)
        sys.exit(EXIT_DATA_ERROR)
    trend = metrics_mod.trend(weekly)
    if fmt == "csv":
        click.echo(metrics_mod.to_csv(weekly), nl=False)
        click.echo(f"# cumulative_tp={trend.cumulative_tp}")
    else:
        click.echo(
            json.dumps(
                {"weekly": [m.to_dict() for m in weekly], "trend": trend.to_dict()},
                sort_keys=True,
                indent=2,
            )
        )


@main.command("gen-fixtures")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=7, type=int)
@click.option("--epochs", default=7, type=int)
@click.option("--queries-per-epoch", default=20, type=int)
def gen_fixtures(out_dir: str, seed: int, epochs: int, queries_per_epoch: int) -> None:
    """Emit seeded synthetic logs, lexicons, and planted ground truth."""
    cfg = FixtureConfig(seed=seed, epochs=epochs, queries_per_epoch=queries_per_epoch)
    path = write_fixtures(cfg, out_dir)
    click.echo(json.dumps({"out": str(path), "epochs": epochs, "seed": seed}, sort_keys=True))


if __name__ == "__main__":
    main()
