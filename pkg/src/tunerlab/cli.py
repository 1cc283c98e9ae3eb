"""Command-line entry points: batch runs, parameter sweeps, prediction
traces, and the live WebSocket service.
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
from dataclasses import replace
from pathlib import Path

import click

from . import control, predictor, scenarios
from .scenarios import Scenario, ScenarioError, TransferTimeout

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
SWEEP_PARAMS = {"alpha": "alpha_q512", "beta": "beta_q1024"}


def _setup_logging() -> None:
    level_name = os.environ.get("TUNERLAB_LOG", "error").lower()
    if level_name not in LOG_LEVELS:
        raise click.ClickException(
            f"TUNERLAB_LOG must be one of {', '.join(LOG_LEVELS)}, got {level_name!r}"
        )
    logging.basicConfig(level=LOG_LEVELS[level_name])


def _load_scenario(path: str) -> Scenario:
    try:
        return scenarios.load_scenario(path)
    except (OSError, ValueError, KeyError) as e:
        raise click.ClickException(f"cannot load scenario {path}: {e}")


@click.group()
def main() -> None:
    """Tunable-CUBIC experiment toolkit."""
    _setup_logging()


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--duration", type=float, default=None, help="Override duration (s).")
def run(scenario_path: str, out_dir: str, seed, duration) -> None:
    """Execute one scenario; write telemetry.csv and summary.json."""
    scenario = _load_scenario(scenario_path)
    if seed is not None:
        scenario = replace(scenario, seed=seed)
    if duration is not None:
        scenario = replace(scenario, duration_s=duration)
    try:
        result = scenarios.run_scenario(scenario)
    except (ScenarioError, TransferTimeout) as e:
        raise click.ClickException(str(e))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "telemetry.csv").write_text(result.csv())
    (out / "summary.json").write_text(
        json.dumps(result.summary_dict(), indent=2) + "\n"
    )
    click.echo(f"wrote {out / 'telemetry.csv'} and {out / 'summary.json'}")


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--param", required=True, type=click.Choice(sorted(SWEEP_PARAMS)))
@click.option("--values", required=True, help="Comma-separated integer knob values.")
@click.option("--seeds", type=int, default=20, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def sweep(scenario_path: str, param: str, values: str, seeds: int, out_dir: str) -> None:
    """Transfer-time sweep over one knob; writes sweep.csv."""
    scenario = _load_scenario(scenario_path)
    spec = scenario.flows[0]
    if spec.bytes_goal is None:
        raise click.ClickException(
            "sweep needs a byte-limited first flow (set bytes_goal)"
        )
    try:
        knob_values = [int(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise click.ClickException(f"--values must be integers, got {values!r}")
    if not knob_values:
        raise click.ClickException("--values is empty")
    field = SWEEP_PARAMS[param]
    seed_list = list(range(1, seeds + 1))
    rows = []
    for value in knob_values:
        try:
            tuned = replace(spec, **{field: value})
            times = scenarios.transfer_time(
                scenario.link,
                tuned.cubic_params(),
                tuned.route_params(),
                spec.bytes_goal,
                seed_list,
            )
        except (ScenarioError, ValueError, TransferTimeout) as e:
            raise click.ClickException(f"{param}={value}: {e}")
        rows.extend(
            f"{value},{seed},{t:.6f}" for seed, t in zip(seed_list, times)
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    path.write_text("\n".join([f"{field},seed,transfer_s"] + rows) + "\n")
    click.echo(f"wrote {path}")


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def predict(scenario_path: str, out_dir: str) -> None:
    """Write the closed-form window trace for the scenario's first flow."""
    scenario = _load_scenario(scenario_path)
    spec = scenario.flows[0]
    model = predictor.PredictorModel(
        cubic_params=spec.cubic_params(),
        link=scenario.link,
        duration_s=scenario.duration_s,
        initcwnd=spec.initcwnd,
    )
    trace = predictor.predict_trace(model)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "predicted.csv"
    path.write_text(predictor.trace_to_csv(trace))
    for note in trace.diagnostics:
        click.echo(f"note: {note}", err=True)
    click.echo(f"wrote {path}")


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--listen", default="127.0.0.1:8765", show_default=True)
@click.option(
    "--pace",
    type=click.Choice(["realtime", "fast"]),
    default="realtime",
    show_default=True,
)
def serve(scenario_path: str, listen: str, pace: str) -> None:
    """Run the scenario live, streaming telemetry over WebSocket."""
    scenario = _load_scenario(scenario_path)
    host, _, port_str = listen.rpartition(":")
    try:
        port = int(port_str)
    except ValueError:
        raise click.ClickException(f"--listen must be host:port, got {listen!r}")
    if not host:
        host = "127.0.0.1"
    try:
        asyncio.run(control.serve(scenario, host=host, port=port, pace=pace))
    except OSError as e:
        raise click.ClickException(f"cannot listen on {listen}: {e}")
    except control.ControlError as e:
        raise click.ClickException(str(e))


if __name__ == "__main__":
    main()
