import json
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, NoReturn, cast

import click
import pandas as pd
from eodhp_utils.runner import log_component_version, setup_logging
from pydantic import ValidationError

from soliton_vqe.entanglement import concurrence_matrix, magnetization_texture
from soliton_vqe.models import ExperimentConfig, ExperimentMode
from soliton_vqe.runner.experiments import (
    Profile,
    RunManifest,
    concurrence_frame,
    load_manifest,
    reference_suite,
    run_experiment,
    texture_frame,
)
from soliton_vqe.runner.plots import MissingPlotInput, emit_svg_plots
from soliton_vqe.statevector import StateVector

EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3
EXIT_PARTIAL_FAILURE = 4

# (flag, JSON path, type); flag names mirror the config document
OVERRIDES: list[tuple[str, str, Any]] = [
    ("--chain.n_qubits", "chain.n_qubits", int),
    ("--chain.dmi", "chain.dmi", float),
    ("--chain.field", "chain.field", float),
    ("--chain.boundary", "chain.boundary", click.Choice(["open", "periodic"])),
    ("--ansatz.layers", "ansatz.layers", str),
    ("--ansatz.topology", "ansatz.topology", click.Choice(["ring", "linear"])),
    ("--ansatz.warm_start", "ansatz.warm_start", bool),
    ("--optimizer.max_iterations", "optimizer.max_iterations", int),
    ("--optimizer.gradient_mode", "optimizer.gradient_mode", click.Choice(["central_difference", "adjoint_analytic"])),
    ("--optimizer.convergence_grad_tol", "optimizer.convergence_grad_tol", float),
    ("--optimizer.restarts", "optimizer.restarts", int),
    ("--outputs.directory", "outputs.directory", str),
    ("--outputs.svg", "outputs.svg", bool),
    ("--outputs.states", "outputs.states", bool),
    ("--seed", "seed", int),
]


def _param_name(path: str) -> str:
    return "override_" + path.replace(".", "__")


def parse_layers(text: str) -> list[int]:
    """'1-6' or '1,2,4' or '9'."""
    text = text.strip()
    if "-" in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part.strip()]


def apply_overrides(data: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    for path, value in overrides.items():
        if value is None:
            continue
        if path == "ansatz.layers":
            value = parse_layers(value)
            data.setdefault("ansatz", {}).pop("n_layers", None)
        node = data
        *parents, leaf = path.split(".")
        for key in parents:
            node = node.setdefault(key, {})
        node[leaf] = value
    return data


def load_config(config_path: str | None, overrides: dict[str, Any], mode: ExperimentMode | None) -> ExperimentConfig:
    data: dict[str, Any] = {}
    if config_path is not None:
        with open(config_path) as f:
            data = json.load(f)
    data = apply_overrides(data, overrides)
    if mode is not None:
        data["mode"] = mode
    return ExperimentConfig.model_validate(data)


def experiment_options(func: Callable[..., Any]) -> Callable[..., Any]:
    for flag, path, kind in reversed(OVERRIDES):
        if kind is bool:
            func = click.option(f"{flag}/--no-{flag[2:]}", _param_name(path), default=None)(func)
        else:
            func = click.option(flag, _param_name(path), type=kind, default=None)(func)
    func = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))(func)
    return func


def _collect(kwargs: dict[str, Any]) -> dict[str, Any]:
    return {path: kwargs.pop(_param_name(path)) for _, path, _ in OVERRIDES}


def _fail(message: str, code: int) -> NoReturn:
    logging.error(message)
    sys.exit(code)


def _exit_for(manifests: list[RunManifest]) -> None:
    if any(m.failures for m in manifests):
        sys.exit(EXIT_PARTIAL_FAILURE)


def _run(config_path: str | None, kwargs: dict[str, Any], mode: ExperimentMode | None) -> None:
    try:
        cfg = load_config(config_path, _collect(kwargs), mode)
    except (ValidationError, ValueError, OSError) as e:
        _fail(f"invalid configuration: {e}", EXIT_CONFIG_ERROR)

    try:
        manifest = run_experiment(cfg)
    except ArithmeticError as e:
        logging.exception("numerical failure")
        _fail(f"numerical failure: {e}", EXIT_NUMERICAL_FAILURE)
    except ValueError as e:
        # sizes past the solver limits and unresolvable ground spaces
        _fail(f"unsupported configuration: {e}", EXIT_CONFIG_ERROR)

    click.echo(manifest.output_dir() / "manifest.json")
    _exit_for([manifest])


@click.group()
@click.option("-v", "--verbose", count=True)
def cli(verbose: int) -> None:
    setup_logging(verbosity=verbose)
    log_component_version("soliton-vqe")


@cli.command()
@click.option("--fidelity", is_flag=True, default=False, help="Maximize the overlap with the exact ground space.")
@experiment_options
def vqe(fidelity: bool, config_path: str | None, **kwargs: Any) -> None:
    """Layer sweep of the variational eigensolver against the exact oracle."""
    _run(config_path, kwargs, "fidelity_max" if fidelity else "vqe_energy")


@cli.command()
@experiment_options
def exact(config_path: str | None, **kwargs: Any) -> None:
    """Exact lowest eigenpairs, concurrence and texture of the ground state."""
    _run(config_path, kwargs, "exact_only")


@cli.command()
@experiment_options
def soliton(config_path: str | None, **kwargs: Any) -> None:
    """Continuum soliton-lattice solution and its analytic texture."""
    _run(config_path, kwargs, "soliton_only")


def _load_state(state_path: str) -> StateVector:
    try:
        return StateVector.load(state_path)
    except (ValueError, OSError) as e:
        _fail(f"cannot read statevector dump {state_path}: {e}", EXIT_CONFIG_ERROR)


@cli.command()
@click.option("--state", "state_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path(dir_okay=False))
def concurrence(state_path: str, output_path: str) -> None:
    """Concurrence matrix of a dumped statevector, as CSV or JSON depending on the output suffix."""
    matrix = concurrence_matrix(_load_state(state_path))
    if output_path.endswith(".json"):
        Path(output_path).write_text(json.dumps(matrix.values.tolist()))
    else:
        concurrence_frame(matrix.values).to_csv(output_path, index=False, header=False)


@cli.command()
@click.option("--state", "state_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path(dir_okay=False))
def texture(state_path: str, output_path: str) -> None:
    """Per-site magnetization of a dumped statevector as CSV."""
    frame: pd.DataFrame = texture_frame(magnetization_texture(_load_state(state_path)))
    frame.to_csv(output_path, index=False)


@cli.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
def plot(manifest_path: str) -> None:
    """Renders SVG plots for the CSVs of a finished run."""
    try:
        manifest = load_manifest(manifest_path)
    except (ValidationError, ValueError) as e:
        _fail(f"invalid manifest: {e}", EXIT_CONFIG_ERROR)

    try:
        paths = emit_svg_plots(manifest, base_dir=Path(manifest_path).parent)
    except MissingPlotInput as e:
        _fail(str(e), EXIT_CONFIG_ERROR)
    for path in paths:
        click.echo(path)


@cli.command("reproduce-paper")
@click.option("--profile", type=click.Choice(["full", "ci"]), default="full")
@click.option("--output-dir", default="results", type=click.Path(file_okay=False))
def reference_suite_command(profile: str, output_dir: str) -> None:
    """Runs the whole reference suite: analytics, exact oracle, layer sweeps and parameter studies."""
    try:
        manifests = reference_suite(cast(Profile, profile), output_dir)
    except ArithmeticError as e:
        logging.exception("numerical failure")
        _fail(f"numerical failure: {e}", EXIT_NUMERICAL_FAILURE)
    except ValueError as e:
        _fail(f"unsupported configuration: {e}", EXIT_CONFIG_ERROR)

    for name, manifest in manifests.items():
        click.echo(f"{name}: {manifest.status} ({manifest.output_dir()})")
    _exit_for(list(manifests.values()))


cli.add_command(reference_suite_command, "reference-suite")


if __name__ == "__main__":
    cli()
