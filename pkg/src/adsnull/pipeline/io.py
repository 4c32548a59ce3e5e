"""Delimited exports with JSON sidecars.

Every CSV carries a header row; floats are written with 17 significant
digits (lossless double round-trip, diff-friendly).  Each CSV gets a JSON
sidecar of the same stem recording the column names, the resolved
configuration and its hash, and any tolerance outcomes of the producing
run.  Nothing time-dependent is written, so identical configurations
produce bit-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..curves import NullCurve, SGrid

FLOAT_FMT = "%.17g"


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def write_csv(path, header, columns, int_columns=()):
    """Write named columns; ``int_columns`` lists header names written as %d."""
    path = Path(path)
    arrays = [np.asarray(c) for c in columns]
    n = len(arrays[0])
    if any(len(a) != n for a in arrays):
        raise ValueError("column lengths differ")
    fmt = ",".join("%d" if name in int_columns else FLOAT_FMT for name in header)
    data = np.column_stack([a.astype(float) for a in arrays])
    np.savetxt(path, data, fmt=fmt, delimiter=",",
               header=",".join(header), comments="")
    return path


def write_sidecar(csv_path, header, config: dict, outcomes: dict | None = None,
                  extra: dict | None = None):
    csv_path = Path(csv_path)
    payload = {
        "csv": csv_path.name,
        "columns": list(header),
        "config": config,
        "config_hash": config_hash(config),
        "outcomes": outcomes or {},
    }
    if extra:
        payload.update(extra)
    side = csv_path.with_suffix(".json")
    side.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return side


CURVE_HEADER = ["s", "g11", "g12", "g21", "g22", "kappa"]
FRAMES_HEADER = ["s", "fp11", "fp12", "fp21", "fp22",
                 "fm11", "fm12", "fm21", "fm22"]
TORUS_HEADER = ["s", "x", "y", "z"]
FIELD_HEADER = ["s", "t", "value", "pole_flag"]
FRAME_FIELD_HEADER = ["s", "t", "fp11", "fp12", "fp21", "fp22",
                      "fm11", "fm12", "fm21", "fm22"]
GAMMA_FIELD_HEADER = ["s", "t", "g11", "g12", "g21", "g22"]
TTRANSFORM_HEADER = ["s", "g11", "g12", "g21", "g22", "kappa_tilde", "f",
                     "pole_flag"]


def _mat_cols(m):
    return [m[..., 0, 0].ravel(), m[..., 0, 1].ravel(),
            m[..., 1, 0].ravel(), m[..., 1, 1].ravel()]


def write_curve(path, curve: NullCurve, config, outcomes=None):
    s = curve.grid.points()
    write_csv(path, CURVE_HEADER, [s, *_mat_cols(curve.gamma), curve.kappa])
    return write_sidecar(path, CURVE_HEADER, config, outcomes,
                         extra={"grid": grid_dict(curve.grid)})


def write_frames(path, curve: NullCurve, config, outcomes=None):
    s = curve.grid.points()
    write_csv(path, FRAMES_HEADER,
              [s, *_mat_cols(curve.fplus), *_mat_cols(curve.fminus)])
    return write_sidecar(path, FRAMES_HEADER, config, outcomes,
                         extra={"grid": grid_dict(curve.grid)})


def write_torus(path, s, coords, config, outcomes=None):
    write_csv(path, TORUS_HEADER,
              [s, coords[..., 0].ravel(), coords[..., 1].ravel(),
               coords[..., 2].ravel()])
    return write_sidecar(path, TORUS_HEADER, config, outcomes)


def write_field(path, stgrid, values, poles, config, outcomes=None):
    s, t = np.broadcast_arrays(*stgrid.mesh())
    vals = np.nan_to_num(np.asarray(values), nan=0.0)
    write_csv(path, FIELD_HEADER,
              [s.ravel(), t.ravel(), vals.ravel(),
               np.asarray(poles, dtype=int).ravel()],
              int_columns=("pole_flag",))
    return write_sidecar(path, FIELD_HEADER, config, outcomes,
                         extra={"stgrid": stgrid_dict(stgrid),
                                "notes": "samples with pole_flag = 1 carry "
                                         "value 0"})


def write_frame_field(path, stgrid, fplus, fminus, config, outcomes=None):
    s, t = np.broadcast_arrays(*stgrid.mesh())
    write_csv(path, FRAME_FIELD_HEADER,
              [s.ravel(), t.ravel(), *_mat_cols(fplus), *_mat_cols(fminus)])
    return write_sidecar(path, FRAME_FIELD_HEADER, config, outcomes,
                         extra={"stgrid": stgrid_dict(stgrid)})


def write_gamma_field(path, stgrid, gamma, config, outcomes=None):
    s, t = np.broadcast_arrays(*stgrid.mesh())
    write_csv(path, GAMMA_FIELD_HEADER,
              [s.ravel(), t.ravel(), *_mat_cols(gamma)])
    return write_sidecar(path, GAMMA_FIELD_HEADER, config, outcomes,
                         extra={"stgrid": stgrid_dict(stgrid)})


def write_ttransform(path, result, f, poles, config, outcomes=None):
    s = result.curve.grid.points()
    vals = np.nan_to_num(np.asarray(f), nan=0.0)
    write_csv(path, TTRANSFORM_HEADER,
              [s, *_mat_cols(result.curve.gamma), result.kappa_tilde, vals,
               np.asarray(poles, dtype=int)],
              int_columns=("pole_flag",))
    return write_sidecar(path, TTRANSFORM_HEADER, config, outcomes,
                         extra={"grid": grid_dict(result.curve.grid)})


def grid_dict(grid: SGrid) -> dict:
    return {"s0": grid.s0, "h": grid.h, "n": grid.n}


def stgrid_dict(stgrid) -> dict:
    return {"s0": stgrid.sgrid.s0, "h": stgrid.sgrid.h, "n": stgrid.sgrid.n,
            "t0": stgrid.t0, "ht": stgrid.ht, "nt": stgrid.nt}


def read_table(path):
    """CSV back to (header list, float 2-d array)."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: column count does not match the header")
    return header, data


def grid_from_samples(s, tol: float = 1e-9) -> SGrid:
    s = np.asarray(s, dtype=float)
    if len(s) < 4:
        raise ValueError("need at least 4 samples")
    h = (s[-1] - s[0]) / (len(s) - 1)
    if h <= 0 or np.abs(np.diff(s) - h).max() > tol * max(h, 1.0):
        raise ValueError("sample column is not a uniform increasing grid")
    return SGrid(float(s[0]), float(h), len(s))


def read_curve(curve_path, frames_path) -> NullCurve:
    """Reassemble a NullCurve from its curve and frames CSV exports."""
    ch, cdata = read_table(curve_path)
    fh, fdata = read_table(frames_path)
    if ch != CURVE_HEADER or fh != FRAMES_HEADER:
        raise ValueError("unexpected CSV schema")
    if cdata.shape[0] != fdata.shape[0]:
        raise ValueError("curve and frames files have different lengths")
    grid = grid_from_samples(cdata[:, 0])
    n = grid.n
    gamma = cdata[:, 1:5].reshape(n, 2, 2)
    kappa = cdata[:, 5]
    fplus = fdata[:, 1:5].reshape(n, 2, 2)
    fminus = fdata[:, 5:9].reshape(n, 2, 2)
    return NullCurve(grid, gamma, fplus, fminus, kappa)


def read_frames(frames_path):
    """Frames CSV to (grid, fplus, fminus)."""
    fh, fdata = read_table(frames_path)
    if fh != FRAMES_HEADER:
        raise ValueError("unexpected frames CSV schema")
    grid = grid_from_samples(fdata[:, 0])
    fplus = fdata[:, 1:5].reshape(grid.n, 2, 2)
    fminus = fdata[:, 5:9].reshape(grid.n, 2, 2)
    return grid, fplus, fminus


def write_report(path, payload: dict):
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path
