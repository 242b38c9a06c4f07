"""JSON matrix/architecture files, CSV tables and run manifests."""
from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .architectures import LayeredArchitecture, MZIMesh
from .linalg import unitarity_error


class SchemaError(ValueError):
    """Malformed input file; ``pointer`` is a JSON pointer to the bad field."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


LOAD_UNITARY_TOL = 1e-8


# ---------------------------------------------------------------------------
# atomic writes


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(obj, path) -> Path:
    return atomic_write_text(path, dump_json(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# matrices


def matrix_to_json(u) -> dict:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    # Python floats serialize with repr, which round-trips exactly
    return {
        "n": int(u.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in u],
    }


def _number(x, pointer):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(pointer, f"expected a number, got {type(x).__name__}")
    return float(x)


def matrix_from_json(obj, allow_nonunitary: bool = False) -> np.ndarray:
    if not isinstance(obj, dict):
        raise SchemaError("", "expected an object with 'n' and 'entries'")
    for key in ("n", "entries"):
        if key not in obj:
            raise SchemaError(f"/{key}", "missing")
    n = obj["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SchemaError("/n", "expected a positive integer")
    rows = obj["entries"]
    if not isinstance(rows, list) or len(rows) != n:
        raise SchemaError("/entries", f"expected {n} rows")
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"/entries/{i}", f"expected {n} entries")
        for j, z in enumerate(row):
            p = f"/entries/{i}/{j}"
            if not isinstance(z, list) or len(z) != 2:
                raise SchemaError(p, "expected [re, im]")
            out[i, j] = complex(_number(z[0], p + "/0"), _number(z[1], p + "/1"))
    if not np.all(np.isfinite(out)):
        raise SchemaError("/entries", "non-finite entry")
    if not allow_nonunitary:
        err = unitarity_error(out)
        if err > LOAD_UNITARY_TOL:
            raise SchemaError("/entries", f"matrix is not unitary (||U^dag U - I|| = {err:.3e})")
    return out


def save_matrix(u, path) -> Path:
    return write_json(matrix_to_json(u), path)


def load_matrix(path, allow_nonunitary: bool = False) -> np.ndarray:
    return matrix_from_json(read_json(path), allow_nonunitary)


# ---------------------------------------------------------------------------
# architectures


def architecture_to_json(arch) -> dict:
    if isinstance(arch, MZIMesh):
        return {"kind": "mesh", "n": arch.n, "bias_rad": [float(b) for b in arch.bias]}
    return {
        "kind": "layered",
        "n": arch.n,
        "variant": arch.variant,
        "mixing": [matrix_to_json(v) for v in arch.mixing],
        "masks": [[bool(b) for b in m] for m in arch.masks],
    }


def architecture_from_json(obj):
    if not isinstance(obj, dict) or "n" not in obj:
        raise SchemaError("/n", "missing")
    if obj.get("kind") == "mesh" or "bias_rad" in obj:
        return MZIMesh(int(obj["n"]), np.asarray(obj.get("bias_rad"), dtype=float) if "bias_rad" in obj else None)
    for key in ("mixing", "masks"):
        if key not in obj:
            raise SchemaError(f"/{key}", "missing")
    mixing = tuple(matrix_from_json(v) for v in obj["mixing"])
    masks = tuple(np.asarray(m, dtype=bool) for m in obj["masks"])
    return LayeredArchitecture(int(obj["n"]), mixing, masks, obj.get("variant", "a"))


def save_architecture(arch, path) -> Path:
    return write_json(architecture_to_json(arch), path)


def load_architecture(path):
    return architecture_from_json(read_json(path))


# ---------------------------------------------------------------------------
# CSV tables


def _flt(x) -> str:
    return f"{float(x):.16e}"


def _int(x) -> str:
    return str(int(x))


def _bool(x) -> str:
    return "true" if x else "false"


# schema name -> ordered (column, record attribute, formatter)
CSV_SCHEMAS = {
    "histogram": [
        ("target_index", "target_index", _int),
        ("n", "n", _int),
        ("phase_layers", "phase_layers", _int),
        ("infidelity", "infidelity", _flt),
        ("converged", "converged", _bool),
    ],
    "robustness": [
        ("alpha", "parameter", _flt),
        ("mean_infid", "mean_infidelity", _flt),
        ("best10", "best10_mean", _flt),
        ("worst10", "worst10_mean", _flt),
        ("mean_block_dissim", "mean_block_dissimilarity", _flt),
        ("samples", "samples", _int),
    ],
    "precision": [
        ("bits", "bits", _flt),
        ("mean_fid", "mean_fid", _flt),
        ("min_fid", "min_fid", _flt),
        ("max_fid", "max_fid", _flt),
        ("samples", "samples", _int),
    ],
    "bench": [
        ("n", "n", _int),
        ("arch", "arch", str),
        ("target_index", "target_index", _int),
        ("runtime_s", "runtime_s", _flt),
        ("threshold_met", "threshold_met", _bool),
    ],
}

_SORT_KEYS = {
    "histogram": lambda r: (r.phase_layers, r.target_index),
    "robustness": lambda r: r.parameter,
    "precision": lambda r: r.bits,
    "bench": lambda r: (r.n, r.arch, r.target_index),
}


def csv_text(records, schema: str) -> str:
    if schema not in CSV_SCHEMAS:
        raise ValueError(f"unknown CSV schema {schema!r}")
    cols = CSV_SCHEMAS[schema]
    lines = [",".join(c for c, _, _ in cols)]
    for r in sorted(records, key=_SORT_KEYS[schema]):
        lines.append(",".join(fmt(getattr(r, attr)) for _, attr, fmt in cols))
    return "\n".join(lines) + "\n"


def write_csv(records, schema: str, path) -> Path:
    return atomic_write_text(path, csv_text(records, schema))


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# manifests


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    config: dict
    version: str
    started: str
    finished: str = ""
    outputs: dict = field(default_factory=dict)

    def record(self, path) -> None:
        path = Path(path)
        self.outputs[path.name] = sha256_file(path)

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "outputs": dict(sorted(self.outputs.items())),
        }

    def write(self, path) -> Path:
        return write_json(self.to_json(), path)
