"""Field persistence: a JSON metadata document plus a companion CSV of node values."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from ..errors import IntegrityError, ParameterError
from .field import SpectralField
from .grids import grid_from_descriptor

FORMAT = "pdnls-field/1"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_csv(path, columns: dict, header_comment: str | None = None):
    """RFC-4180 CSV with 17 significant digits for floats."""
    names = list(columns)
    cols = [np.asarray(columns[n]).ravel() for n in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def save_field(u: SpectralField, path, extra: dict | None = None) -> dict:
    """Write ``<path>.json`` and ``<path>.csv``; returns the metadata document."""
    path = Path(path)
    json_path, csv_path = path.with_suffix(".json"), path.with_suffix(".csv")
    cols = dict(u.grid.node_table())
    vals = np.asarray(u.values).ravel()
    cols["re"] = vals.real
    cols["im"] = np.imag(vals) if np.iscomplexobj(vals) else np.zeros_like(vals)
    write_csv(csv_path, cols)
    meta = {
        "format": FORMAT,
        "grid": u.grid.descriptor(),
        "shape": list(np.atleast_1d(u.grid.shape)),
        "eps": u.eps,
        "meta": u.meta,
        "csv": csv_path.name,
        "csv_sha256": sha256_file(csv_path),
    }
    if extra:
        meta.update(extra)
    json_path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    return meta


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def load_field(path) -> SpectralField:
    """Load and validate a persisted field.

    Raises ``IntegrityError`` when the CSV hash differs from the recorded one
    and ``ParameterError`` when nodes or values violate the grid invariants.
    """
    json_path = Path(path).with_suffix(".json")
    meta = json.loads(json_path.read_text())
    if meta.get("format") != FORMAT:
        raise ParameterError(f"unknown field format {meta.get('format')!r}")
    csv_path = json_path.parent / meta["csv"]
    if sha256_file(csv_path) != meta["csv_sha256"]:
        raise IntegrityError(f"{csv_path.name}: content hash mismatch")
    grid = grid_from_descriptor(meta["grid"])
    data = np.genfromtxt(csv_path, delimiter=",", names=True)
    table = grid.node_table()
    for name, nodes in table.items():
        if not np.allclose(data[name], nodes, rtol=1e-13, atol=1e-15):
            raise ParameterError(f"node column {name!r} does not match the rebuilt grid")
    vals = data["re"] + 1j * data["im"] if grid.is_complex else data["re"]
    if not np.all(np.isfinite(vals)):
        raise ParameterError("non-finite field values")
    if np.any(np.asarray(grid.measure) <= 0):
        raise ParameterError("non-positive quadrature weights")
    shape = tuple(meta["shape"])
    return SpectralField(grid, np.reshape(vals, shape), meta.get("eps"), meta.get("meta", {}))
