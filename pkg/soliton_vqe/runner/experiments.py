import logging
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Annotated, Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from soliton_vqe.entanglement import (
    ConcurrenceMatrix,
    TextureRow,
    concurrence_matrix,
    magnetization_texture,
    relative_concurrence,
)
from soliton_vqe.exact_solver import Spectrum, SpectrumSummary, ground_space_projector, lowest_eigenpairs
from soliton_vqe.models import ExperimentConfig, OptimizerConfig
from soliton_vqe.pauli_model import Hamiltonian, build_chain_hamiltonian
from soliton_vqe.runner.plots import emit_svg_plots
from soliton_vqe.soliton import (
    NoSolitonLattice,
    SolitonReport,
    analytic_texture,
    soliton_solution,
    solve_kappa,
)
from soliton_vqe.statevector import StateVector
from soliton_vqe.vqe import FidelityObjective, ObjectiveKind, VqeResult, layer_sweep

SWEEP_COLUMNS = ["layers", "mean", "std", "best", "delta", "fidelity", "fidelity_mean", "fidelity_std"]
TEXTURE_COLUMNS = ["site", "mx", "my", "mz"]
TRACE_COLUMNS = ["restart", "iteration", "objective"]

Profile = Literal["full", "ci"]


def tool_version() -> str:
    try:
        return version("soliton-vqe")
    except PackageNotFoundError:
        return "0.0.0"


class RunManifest(BaseModel):
    """
    Index of everything one experiment wrote. File paths are relative to the output directory.
    Only `timings` varies between reruns of the same config.
    """

    config: ExperimentConfig
    tool_version: str
    files: dict[str, str] = {}
    timings: Annotated[dict[str, float], Field(description="Wall-clock seconds per step")] = {}
    seeds: list[int] = []
    spectrum: SpectrumSummary | None = None
    soliton: SolitonReport | NoSolitonLattice | None = None
    failures: list[str] = []

    @property
    def status(self) -> Literal["ok", "partial"]:
        return "partial" if self.failures else "ok"

    def output_dir(self) -> Path:
        return Path(self.config.outputs.directory)


class _Writer:
    """Serializes every output file of one run and records it in the manifest."""

    def __init__(self, manifest: RunManifest, directory: Path) -> None:
        self.manifest = manifest
        self.directory = directory
        self.options = manifest.config.outputs
        directory.mkdir(parents=True, exist_ok=True)

    def _record(self, key: str, name: str) -> Path:
        self.manifest.files[key] = name
        return self.directory / name

    def csv(self, key: str, name: str, frame: pd.DataFrame, header: bool = True) -> None:
        if self.options.csv:
            frame.to_csv(self._record(key, name), index=False, header=header)

    def json(self, key: str, name: str, model: BaseModel) -> None:
        if self.options.json_files:
            self._record(key, name).write_text(model.model_dump_json(indent=2))

    def state(self, key: str, name: str, psi: StateVector) -> None:
        if self.options.states:
            psi.save(self._record(key, name))


def texture_frame(rows: list[TextureRow]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=TEXTURE_COLUMNS)


def concurrence_frame(values: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame(values)


class ConcurrenceReport(BaseModel):
    """JSON form of the concurrence maps. Undefined ratios are null."""

    vqe: list[list[float]] | None = None
    exact: list[list[float]]
    ratio: list[list[float | None]] | None = None


def _nullable(values: np.ndarray) -> list[list[float | None]]:
    return [[None if np.isnan(v) else float(v) for v in row] for row in values]


def _timed(manifest: RunManifest, step: str, started: float) -> None:
    manifest.timings[step] = time.perf_counter() - started


def _write_soliton(cfg: ExperimentConfig, manifest: RunManifest, writer: _Writer) -> None:
    started = time.perf_counter()
    params = cfg.chain.to_continuum_params()
    if params.m <= 0:
        logging.info("zero field, skipping the soliton lattice solution")
        return

    outcome = solve_kappa(params)
    if isinstance(outcome, NoSolitonLattice):
        manifest.soliton = outcome
        writer.json("soliton", "soliton.json", outcome)
    else:
        solution = soliton_solution(params)
        manifest.soliton = solution.report()
        writer.json("soliton", "soliton.json", manifest.soliton)
        texture = analytic_texture(solution, cfg.chain.n_qubits)
        writer.csv("texture_analytic", "texture_analytic.csv", texture_frame(texture))
    _timed(manifest, "soliton", started)


def _write_exact(
    cfg: ExperimentConfig, h: Hamiltonian, manifest: RunManifest, writer: _Writer
) -> tuple[Spectrum, ConcurrenceMatrix]:
    started = time.perf_counter()
    spectrum = lowest_eigenpairs(h, m=2, seed=cfg.seed)
    manifest.spectrum = spectrum.summary()
    writer.json("spectrum", "spectrum.json", manifest.spectrum)

    ground = spectrum.ground_state
    exact_concurrence = concurrence_matrix(ground)
    writer.csv("concurrence_exact", "concurrence_exact.csv", concurrence_frame(exact_concurrence.values), header=False)
    writer.json(
        "concurrence_exact_json",
        "concurrence_exact.json",
        ConcurrenceReport(exact=exact_concurrence.values.tolist()),
    )
    writer.csv("texture_exact", "texture_exact.csv", texture_frame(magnetization_texture(ground)))
    writer.state("ground_state", "ground_state.bin", ground)
    _timed(manifest, "exact", started)
    return spectrum, exact_concurrence


def _sweep_row(n_layers: int, result: VqeResult) -> dict[str, float | int | None]:
    return {
        "layers": n_layers,
        "mean": result.mean_energy,
        "std": result.std_energy,
        "best": result.best_energy,
        "delta": result.delta,
        "fidelity": result.fidelity,
        "fidelity_mean": result.mean_fidelity,
        "fidelity_std": result.std_fidelity,
    }


def _write_layer(
    cfg: ExperimentConfig, result: VqeResult, exact_concurrence: ConcurrenceMatrix, writer: _Writer
) -> None:
    n_layers = result.n_layers
    psi = result.best_state(cfg.ansatz.spec(cfg.chain.n_qubits, n_layers))

    writer.json(f"vqe_L{n_layers}", f"vqe_L{n_layers}.json", result)
    trace = [(r.restart, it, value) for r in result.per_restart for it, value in r.trace]
    writer.csv(f"trace_L{n_layers}", f"trace_L{n_layers}.csv", pd.DataFrame(trace, columns=TRACE_COLUMNS))

    vqe_concurrence = concurrence_matrix(psi)
    ratio = relative_concurrence(vqe_concurrence, exact_concurrence)
    writer.csv(
        f"concurrence_vqe_L{n_layers}",
        f"concurrence_vqe_L{n_layers}.csv",
        concurrence_frame(vqe_concurrence.values),
        header=False,
    )
    writer.csv(
        f"concurrence_ratio_L{n_layers}", f"concurrence_ratio_L{n_layers}.csv", concurrence_frame(ratio), header=False
    )
    writer.json(
        f"concurrence_L{n_layers}",
        f"concurrence_L{n_layers}.json",
        ConcurrenceReport(
            vqe=vqe_concurrence.values.tolist(), exact=exact_concurrence.values.tolist(), ratio=_nullable(ratio)
        ),
    )
    writer.csv(f"texture_vqe_L{n_layers}", f"texture_vqe_L{n_layers}.csv", texture_frame(magnetization_texture(psi)))
    writer.state(f"state_L{n_layers}", f"state_L{n_layers}.bin", psi)


def _run_sweep(
    cfg: ExperimentConfig,
    h: Hamiltonian,
    spectrum: Spectrum,
    exact_concurrence: ConcurrenceMatrix,
    manifest: RunManifest,
    writer: _Writer,
) -> None:
    optimizer: OptimizerConfig = cfg.effective_optimizer()
    manifest.seeds = [optimizer.base_seed + r for r in range(optimizer.restarts)]

    objective: ObjectiveKind | Hamiltonian = h
    if cfg.mode == "fidelity_max":
        objective = FidelityObjective(tuple(ground_space_projector(spectrum)))

    started = time.perf_counter()
    entries = layer_sweep(
        objective,
        cfg.chain.n_qubits,
        cfg.ansatz.layers,
        optimizer,
        oracle=spectrum,
        topology=cfg.ansatz.topology,
        hamiltonian=h,
        warm_start=cfg.ansatz.warm_start,
    )
    _timed(manifest, "vqe", started)

    rows = []
    for entry in entries:
        if entry.result is None:
            manifest.failures.append(f"layers={entry.n_layers}: {entry.error}")
            continue
        manifest.timings[f"vqe_L{entry.n_layers}"] = entry.result.wall_time
        _write_layer(cfg, entry.result, exact_concurrence, writer)
        rows.append(_sweep_row(entry.n_layers, entry.result))

    writer.csv("sweep", "sweep.csv", pd.DataFrame(rows, columns=SWEEP_COLUMNS))


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """
    Runs one experiment and writes its outputs. The exact oracle is solved once, then the configured mode
    runs for every layer count. A failing layer is recorded in the manifest and the rest still run.
    The manifest itself is written last.
    """
    started = time.perf_counter()
    manifest = RunManifest(config=cfg, tool_version=tool_version())
    directory = manifest.output_dir()
    writer = _Writer(manifest, directory)
    logging.info("running %s experiment into %s", cfg.mode, directory)

    _write_soliton(cfg, manifest, writer)
    if cfg.mode != "soliton_only":
        h = build_chain_hamiltonian(cfg.chain.to_chain_params())
        spectrum, exact_concurrence = _write_exact(cfg, h, manifest, writer)
        if cfg.mode in ("vqe_energy", "fidelity_max"):
            _run_sweep(cfg, h, spectrum, exact_concurrence, manifest, writer)

    if cfg.outputs.svg:
        for path in emit_svg_plots(manifest):
            manifest.files[f"plot_{path.stem}"] = path.name

    _timed(manifest, "total", started)
    (directory / "manifest.json").write_text(manifest.model_dump_json(indent=2, by_alias=True))
    if manifest.failures:
        logging.warning("experiment finished with %d failed layer runs", len(manifest.failures))
    return manifest


def load_manifest(path: Path | str) -> RunManifest:
    return RunManifest.model_validate_json(Path(path).read_text())


def reference_configs(profile: Profile = "full", root: Path | str = "results") -> dict[str, ExperimentConfig]:
    """
    The reference suite: soliton analytics, the exact oracle of the ferromagnet, the single-layer trivial
    regimes, the soliton layer sweep, the nine-layer energy and fidelity runs and the eight-layer
    parameter studies. The ci profile keeps every experiment but cuts restarts and the iteration cap.
    """
    root = Path(root)
    optimizer = OptimizerConfig(gradient_mode="adjoint_analytic")
    if profile == "ci":
        optimizer = optimizer.model_copy(update={"restarts": 2, "max_iterations": 5_000})

    def config(name: str, dmi: float, field: float, layers: list[int], mode: str) -> ExperimentConfig:
        return ExperimentConfig.model_validate(
            {
                "chain": {"n_qubits": 10, "dmi": dmi, "field": field},
                "ansatz": {"layers": layers},
                "optimizer": optimizer.model_dump(),
                "mode": mode,
                "outputs": {"directory": str(root / name), "svg": True},
            }
        )

    return {
        "soliton": config("soliton", 0.63, 3.36e-3, [1], "soliton_only"),
        "ferromagnet_exact": config("ferromagnet_exact", 0.0, 0.0, [1], "exact_only"),
        "ferromagnet": config("ferromagnet", 0.0, 0.0, [1], "vqe_energy"),
        "field_only": config("field_only", 0.0, 1.0, [1], "vqe_energy"),
        "soliton_sweep": config("soliton_sweep", 0.63, 3.36e-3, [1, 2, 3, 4, 5, 6], "vqe_energy"),
        "soliton_nine_layers": config("soliton_nine_layers", 0.63, 3.36e-3, [9], "vqe_energy"),
        "soliton_fidelity_max": config("soliton_fidelity_max", 0.63, 3.36e-3, [9], "fidelity_max"),
        "dmi_only": config("dmi_only", 1.0, 0.0, [8], "vqe_energy"),
        "strong_dmi_field": config("strong_dmi_field", 5.0, 5.0, [8], "vqe_energy"),
    }


def reference_suite(profile: Profile = "full", root: Path | str = "results") -> dict[str, RunManifest]:
    manifests = {}
    for name, cfg in reference_configs(profile, root).items():
        logging.info("reference suite: %s", name)
        manifests[name] = run_experiment(cfg)
    return manifests
