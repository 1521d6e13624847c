from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from soliton_vqe.models import ExperimentConfig, OutputConfig
from soliton_vqe.runner.experiments import SWEEP_COLUMNS, RunManifest, concurrence_frame
from soliton_vqe.runner.plots import MissingPlotInput, emit_svg_plots


def _manifest(directory: Path, files: dict[str, str]) -> RunManifest:
    config = ExperimentConfig(outputs=OutputConfig(directory=str(directory)))
    return RunManifest(config=config, tool_version="0.0.0", files=files)


def _write_inputs(directory: Path) -> dict[str, str]:
    pd.DataFrame(
        [[1, -2.0, 0.1, -2.2, 0.4, 0.8, 0.7, 0.05], [2, -2.2, 0.05, -2.25, 0.1, 0.97, 0.95, 0.01]],
        columns=SWEEP_COLUMNS,
    ).to_csv(directory / "sweep.csv", index=False)
    ratio = np.array([[np.nan, 0.9, np.nan], [0.9, np.nan, 1.1], [np.nan, 1.1, np.nan]])
    concurrence_frame(ratio).to_csv(directory / "concurrence_ratio_L1.csv", index=False, header=False)
    phi = np.linspace(0, 2 * np.pi, 6, endpoint=False)
    pd.DataFrame({"site": range(6), "mx": np.cos(phi), "my": np.sin(phi), "mz": 0.0}).to_csv(
        directory / "texture_analytic.csv", index=False
    )
    pd.DataFrame({"restart": [0], "iteration": [0], "objective": [1.0]}).to_csv(
        directory / "trace_L1.csv", index=False
    )
    return {
        "sweep": "sweep.csv",
        "concurrence_ratio_L1": "concurrence_ratio_L1.csv",
        "texture_analytic": "texture_analytic.csv",
        "trace_L1": "trace_L1.csv",
        "spectrum": "spectrum.json",
    }


def test_every_plottable_csv_gets_an_svg(tmp_path: Path) -> None:
    ############# Setup
    manifest = _manifest(tmp_path, _write_inputs(tmp_path))

    ############# Test
    written = emit_svg_plots(manifest)

    ############# Behaviour check
    assert sorted(p.name for p in written) == [
        "concurrence_ratio_L1.svg",
        "sweep.svg",
        "texture_analytic.svg",
    ]
    assert not (tmp_path / "trace_L1.svg").exists()


def test_svg_output_is_deterministic(tmp_path: Path) -> None:
    ############# Setup
    manifest = _manifest(tmp_path, _write_inputs(tmp_path))

    ############# Test
    first = {p.name: p.read_bytes() for p in emit_svg_plots(manifest)}
    second = {p.name: p.read_bytes() for p in emit_svg_plots(manifest)}

    ############# Behaviour check
    assert first == second
    assert all(b"<dc:date>" not in content for content in first.values())


def test_base_dir_overrides_the_configured_directory(tmp_path: Path) -> None:
    ############# Setup
    files = _write_inputs(tmp_path)
    manifest = _manifest(tmp_path / "moved-away", files)

    ############# Test
    written = emit_svg_plots(manifest, base_dir=tmp_path)

    ############# Behaviour check
    assert all(p.parent == tmp_path for p in written)


def test_fully_undefined_ratio_map_still_renders(tmp_path: Path) -> None:
    ############# Setup
    concurrence_frame(np.full((3, 3), np.nan)).to_csv(tmp_path / "concurrence_ratio_L2.csv", index=False, header=False)
    manifest = _manifest(tmp_path, {"concurrence_ratio_L2": "concurrence_ratio_L2.csv"})

    ############# Test
    written = emit_svg_plots(manifest)

    ############# Behaviour check
    assert [p.name for p in written] == ["concurrence_ratio_L2.svg"]


def test_listed_but_missing_csv_is_reported(tmp_path: Path) -> None:
    ############# Setup
    manifest = _manifest(tmp_path, {"texture_exact": "texture_exact.csv"})

    ############# Behaviour check
    with pytest.raises(MissingPlotInput):
        emit_svg_plots(manifest)
