import logging
from pathlib import Path
from typing import TYPE_CHECKING

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

if TYPE_CHECKING:
    from soliton_vqe.runner.experiments import RunManifest

# fixed element ids, so the same data always renders to the same bytes
plt.rcParams["svg.hashsalt"] = "soliton-vqe"


class MissingPlotInput(FileNotFoundError):
    pass


def _save(fig: plt.Figure, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_sweep(csv_path: Path, out_path: Path) -> Path:
    """Energy and overlap against the number of layers, with the spread over restarts as error bars."""
    sweep = pd.read_csv(csv_path)
    fig, (energy_ax, overlap_ax) = plt.subplots(1, 2, figsize=(9, 3.5))

    energy_ax.errorbar(sweep["layers"], sweep["mean"], yerr=sweep["std"], marker="o", capsize=3, label="mean")
    energy_ax.plot(sweep["layers"], sweep["best"], marker="s", linestyle="--", label="best")
    energy_ax.set_xlabel("layers")
    energy_ax.set_ylabel("energy")
    energy_ax.legend()

    overlap_ax.errorbar(
        sweep["layers"], sweep["fidelity_mean"], yerr=sweep["fidelity_std"], marker="o", capsize=3, label="mean"
    )
    overlap_ax.plot(sweep["layers"], sweep["fidelity"], marker="s", linestyle="--", label="best run")
    overlap_ax.set_xlabel("layers")
    overlap_ax.set_ylabel("overlap with exact ground space")
    overlap_ax.set_ylim(0, 1.05)
    overlap_ax.legend()

    fig.tight_layout()
    return _save(fig, out_path)


def plot_concurrence(csv_path: Path, out_path: Path) -> Path:
    values = pd.read_csv(csv_path, header=None).to_numpy(dtype=float)
    fig, ax = plt.subplots(figsize=(4.5, 4))
    finite = values[np.isfinite(values)]
    # a ratio map can be entirely undefined, so the colour range is never taken from the data alone
    vmax = max(1.0, float(finite.max())) if finite.size else 1.0
    image = ax.imshow(np.ma.masked_invalid(values), cmap="viridis", origin="upper", vmin=0.0, vmax=vmax)
    fig.colorbar(image, ax=ax, label="concurrence" if "ratio" not in csv_path.stem else "VQE / exact")
    ax.set_xlabel("qubit j")
    ax.set_ylabel("qubit i")
    fig.tight_layout()
    return _save(fig, out_path)


def plot_texture(csv_path: Path, out_path: Path) -> Path:
    """Per-site moments as arrows in the xy plane."""
    texture = pd.read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(8, 2.5))
    ax.quiver(
        texture["site"],
        np.zeros(len(texture)),
        texture["mx"],
        texture["my"],
        angles="uv",
        pivot="middle",
        scale=len(texture) / 1.5,
        scale_units="width",
    )
    ax.set_xlim(-1, len(texture))
    ax.set_ylim(-1, 1)
    ax.set_yticks([])
    ax.set_xlabel("site")
    fig.tight_layout()
    return _save(fig, out_path)


def emit_svg_plots(manifest: "RunManifest", base_dir: Path | None = None) -> list[Path]:
    """Renders every sweep, concurrence and texture CSV listed in the manifest to an SVG next to it."""
    directory = base_dir if base_dir is not None else manifest.output_dir()
    written = []
    for key, name in sorted(manifest.files.items()):
        if not name.endswith(".csv") or key.startswith("trace"):
            continue
        csv_path = directory / name
        if not csv_path.exists():
            raise MissingPlotInput(f"{csv_path} is listed in the manifest but missing")

        out_path = csv_path.with_suffix(".svg")
        if key == "sweep":
            written.append(plot_sweep(csv_path, out_path))
        elif key.startswith("concurrence"):
            written.append(plot_concurrence(csv_path, out_path))
        elif key.startswith("texture"):
            written.append(plot_texture(csv_path, out_path))

    logging.info("wrote %d plots into %s", len(written), directory)
    return written
