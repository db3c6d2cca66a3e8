"""Static figures of a diagnostics CSV, rendered with the Agg backend."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .observables import CSV_HEADER  # noqa: E402

__all__ = ["read_diagnostics", "plot_diagnostics"]


def read_diagnostics(path: str | Path) -> dict[str, np.ndarray]:
    """Load a diagnostics CSV into one float array per column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}: {header}")
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _positive(values: np.ndarray) -> np.ndarray:
    # log axes cannot show exact zeros; clip them to the smallest normal float
    return np.maximum(np.abs(values), np.finfo(float).tiny)


def plot_diagnostics(csv_path: str | Path, out_dir: str | Path | None = None) -> list[Path]:
    """Render energy, constraint and norm histories as PNG files.

    Parameters
    ----------
    csv_path : path
        Diagnostics CSV written by a run.
    out_dir : path, optional
        Destination directory; defaults to the CSV's directory.

    Returns
    -------
    list of Path
        ``<stem>_energy.png``, ``<stem>_constraints.png`` and ``<stem>_norms.png``.
    """
    csv_path = Path(csv_path)
    out = Path(out_dir) if out_dir is not None else csv_path.parent
    d = read_diagnostics(csv_path)
    t = d["t"]
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    e0 = d["energy"][0] if len(t) else 1.0
    drift = (d["energy"] - e0) / (abs(e0) if e0 != 0 else 1.0)
    ax.plot(t, drift, marker=".")
    ax.set_xlabel("t")
    ax.set_ylabel("(E(t) - E(0)) / E(0)")
    ax.set_title("relative energy drift")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    paths.append(out / f"{csv_path.stem}_energy.png")
    fig.savefig(paths[-1], dpi=100)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, label in (
        ("lorenz_res", "Lorenz residual"),
        ("gauss_res", "Gauss residual"),
        ("divB_res", "div B"),
        ("charge", "|charge|"),
    ):
        ax.semilogy(t, _positive(d[name]), marker=".", label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("L2 norm")
    ax.set_title("constraint residuals")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    paths.append(out / f"{csv_path.stem}_constraints.png")
    fig.savefig(paths[-1], dpi=100)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    for name in ("phi_l2", "phi_h1", "A_norm", "max_field"):
        ax.plot(t, d[name], marker=".", label=name)
    ax.set_xlabel("t")
    ax.set_title("field norms")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    paths.append(out / f"{csv_path.stem}_norms.png")
    fig.savefig(paths[-1], dpi=100)
    plt.close(fig)
    return paths
