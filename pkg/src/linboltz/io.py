"""Model files, binary matrix dumps and CSV profiles.

Model file (JSON)::

    {"kind": "polyatomic", "m": 1.0, "I": [0, 1], "phi": [1, 1],
     "cross_section": {"variant": "PolyHardSphere", "C": 1.0}}
    {"kind": "mixture", "m": [1, 2], "n": [1, 1],
     "cross_section": {"variant": "MixHardSphere", "C": 1.0}}

``cross_section`` is optional and defaults to the hard-sphere law with ``C = 1``.

Matrix file: ``b"PKLO"``, u32 version, u32 rows, then ``rows * rows``
little-endian float64 values in row-major order. A JSON sidecar named
``<file>.json`` carries the grid, model and quadrature metadata.
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .cross_sections import CrossSectionModel, MixHardSphere, PolyHardSphere
from .gas_models import MixtureSpec, PolyatomicGas

MAGIC = b"PKLO"
VERSION = 1
_HEADER = struct.Struct("<4sII")


class FormatError(ValueError):
    """Corrupt or incompatible file."""


# ---------------------------------------------------------------------------
# models


def model_from_dict(d: dict):
    """Build ``(gas_or_mixture, cross_section)`` from a model dictionary."""
    kind = d.get("kind")
    try:
        if kind == "polyatomic":
            spec = PolyatomicGas(float(d["m"]), tuple(d["I"]), tuple(d["phi"]))
            default = PolyHardSphere(1.0)
        elif kind == "mixture":
            spec = MixtureSpec(tuple(d["m"]), tuple(d["n"]))
            default = MixHardSphere(1.0)
        else:
            raise FormatError(f"model kind must be 'polyatomic' or 'mixture', got {kind!r}")
    except KeyError as exc:
        raise FormatError(f"model is missing field {exc}") from None
    cs = d.get("cross_section")
    model = CrossSectionModel.from_dict(cs) if cs is not None else default
    if model.is_poly != (kind == "polyatomic"):
        raise FormatError(f"cross section {model.variant} does not fit a {kind} model")
    return spec, model


def model_to_dict(spec, model: CrossSectionModel) -> dict:
    if isinstance(spec, PolyatomicGas):
        d = {"kind": "polyatomic", "m": spec.m, "I": list(spec.I), "phi": list(spec.phi)}
    else:
        d = {"kind": "mixture", "m": list(spec.masses), "n": list(spec.densities)}
    d["cross_section"] = model.to_dict()
    return d


def load_model(path):
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(d)


def model_hash(spec, model) -> str:
    """SHA-256 of the canonical JSON form of a model."""
    blob = json.dumps(model_to_dict(spec, model), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# matrix dumps


def sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".json")


def write_matrix(path, A, metadata: dict | None = None) -> None:
    A = np.ascontiguousarray(A, dtype="<f8")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    p = Path(path)
    with open(p, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, A.shape[0]))
        fh.write(A.tobytes(order="C"))
    if metadata is not None:
        sidecar_path(p).write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")


def read_matrix(path) -> np.ndarray:
    p = Path(path)
    data = p.read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{p}: file too short for a header")
    magic, version, rows = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{p}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{p}: unsupported version {version}")
    body = data[_HEADER.size:]
    if len(body) != 8 * rows * rows:
        raise FormatError(f"{p}: expected {rows}x{rows} values, found {len(body) // 8}")
    return np.frombuffer(body, dtype="<f8").reshape(rows, rows).astype(float)


def read_sidecar(path) -> dict:
    sc = sidecar_path(path)
    if not sc.exists():
        return {}
    return json.loads(sc.read_text())


# ---------------------------------------------------------------------------
# CSV


NU_COLUMNS = ("xi_norm", "nu", "nu_over_1plus")


def write_nu_csv(path, xi_norm, nu) -> None:
    xi_norm = np.asarray(xi_norm, float)
    nu = np.asarray(nu, float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(NU_COLUMNS)
        for x, v in zip(xi_norm, nu):
            w.writerow([repr(float(x)), repr(float(v)), repr(float(v / (1.0 + x)))])


def read_nu_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != NU_COLUMNS:
        raise FormatError(f"{path}: unexpected header")
    arr = np.array([[float(v) for v in r] for r in rows[1:]])
    return arr[:, 0], arr[:, 1]


def write_eigen_csv(path, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("index", "eigenvalue"))
        for k, v in enumerate(values):
            w.writerow([k, repr(float(v))])
