"""Deterministic CSV outputs.

Every file starts with the ``#`` header of :func:`transwave.conversion.json.header_lines`, followed by a
column header and one row per sample. Floats use the shortest round-trip representation, so identical
inputs give byte-identical files.
"""

import csv
from pathlib import Path
from typing import Any, Iterable, Sequence

import jax
import numpy as np

from transwave.config import SystemConfig
from transwave.conversion.json import header_lines
from transwave.core.misc import format_float
from transwave.evolution.simulate import EnergyTrace
from transwave.fem.mesh import Mesh
from transwave.spectrum.eigen import SpectrumResult
from transwave.spectrum.resolvent import ResolventSamples


def _cell(value: Any) -> str:
    if isinstance(value, bool | np.bool_):
        return "1" if value else "0"
    if isinstance(value, int | np.integer):
        return str(int(value))
    return format_float(float(value))


def write_rows(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    cfg: SystemConfig,
    settings: dict | None = None,
) -> Path:
    """Writes a headed CSV file.

    Args:
        path (str | Path): Output file.
        columns (Sequence[str]): Column names.
        rows (Iterable[Sequence[Any]]): Row values (floats, ints or bools).
        cfg (SystemConfig): Configuration recorded in the header.
        settings (dict | None, optional): Numerical settings recorded in the header.

    Returns:
        Path: the written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        for line in header_lines(cfg, settings):
            f.write(line + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_spectrum_csv(path: str | Path, result: SpectrumResult, cfg: SystemConfig, settings: dict | None = None) -> Path:
    values = np.asarray(result.eigenvalues)
    return write_rows(path, ("re", "im"), zip(values.real, values.imag), cfg, settings)


def write_resolvent_csv(
    path: str | Path, samples: ResolventSamples, cfg: SystemConfig, settings: dict | None = None
) -> Path:
    rows = zip(np.asarray(samples.lambdas), np.asarray(samples.norms), np.asarray(samples.is_envelope))
    return write_rows(path, ("lambda", "norm", "is_envelope"), rows, cfg, settings)


def write_envelope_csv(
    path: str | Path, samples: ResolventSamples, cfg: SystemConfig, settings: dict | None = None
) -> Path:
    """Refined resolvent peaks with their near-singular flag and whether they entered the growth fit."""
    rows = zip(
        np.asarray(samples.envelope_lambdas),
        np.asarray(samples.envelope_norms),
        np.asarray(samples.envelope_near_singular),
        np.asarray(samples.envelope_in_fit),
    )
    return write_rows(path, ("lambda", "norm", "near_singular", "in_fit"), rows, cfg, settings)


def write_trace_csv(path: str | Path, trace: EnergyTrace, cfg: SystemConfig, settings: dict | None = None) -> Path:
    rows = zip(np.asarray(trace.times), np.asarray(trace.energies), np.asarray(trace.balance_residuals))
    return write_rows(path, ("t", "E", "balance_residual"), rows, cfg, settings)


def write_snapshots(
    directory: str | Path, trace: EnergyTrace, mesh: Mesh, cfg: SystemConfig, settings: dict | None = None
) -> list[Path]:
    """One CSV per recorded state with the nodal values of both chains, clamped ends included."""
    if trace.states is None:
        raise ValueError("Trace holds no states, simulate with keep_states=True")
    directory = Path(directory)
    nodes = np.asarray(mesh.nodes)
    n = mesh.n
    paths = []
    for idx, (t, state) in enumerate(zip(np.asarray(trace.times), np.asarray(trace.states))):
        blocks = [np.concatenate([[0.0], state[k * n : (k + 1) * n], [0.0]]) for k in range(4)]
        rows = zip(nodes, *blocks)
        snapshot_settings = {**(settings or {}), "t": float(t)}
        paths.append(
            write_rows(
                directory / f"snapshot_{idx:05d}.csv",
                ("x", "p_w", "p_s", "q_w", "q_s"),
                rows,
                cfg,
                snapshot_settings,
            )
        )
    return paths


def write_triplets(path: str | Path, matrix: jax.Array, cfg: SystemConfig, settings: dict | None = None) -> Path:
    """Writes the nonzero entries of a matrix as ``row col value`` lines (0-based interior DOF indices)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dense = np.asarray(matrix)
    rows, cols = np.nonzero(dense)
    with open(path, "w") as f:
        for line in header_lines(cfg, settings):
            f.write(line + "\n")
        f.write(f"# shape: {dense.shape[0]} {dense.shape[1]}\n")
        for r, c in zip(rows, cols):
            f.write(f"{r} {c} {format_float(dense[r, c])}\n")
    return path
