"""Serialization of meshes, density matrices and correlation records."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any

import numpy as np
from jsonschema import Draft202012Validator

from .errors import IoError, ParseError
from .geometry import LevelSetMesh
from .spin import IrreducibleParts, PairObservables, ShapeClass, validate_density

SCHEMA_VERSION = "1.0"
POSITIVE_RGB = (204, 41, 41)
NEGATIVE_RGB = (41, 82, 204)
BASIS = "uu,ud,du,dd"


def sign_suffix(sign: int) -> str:
    return "_pos" if sign > 0 else "_neg"


def _check_faces(mesh: LevelSetMesh) -> None:
    f = mesh.triangles
    if len(f) and (f.min() < 0 or f.max() >= len(mesh.vertices)):
        raise IoError("mesh has a face index outside the vertex list")


def _write_bytes(path, data: bytes) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _read_bytes(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


# ---------------------------------------------------------------------- OBJ


def obj_bytes(mesh: LevelSetMesh) -> bytes:
    _check_faces(mesh)
    lines = [f"# level {mesh.level!r} sign {'+' if mesh.sign > 0 else '-'}", "o cmv"]
    lines += [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles.tolist()]
    return ("\n".join(lines) + "\n").encode("ascii")


def write_obj(mesh: LevelSetMesh, path) -> None:
    _write_bytes(path, obj_bytes(mesh))


def read_obj(path) -> tuple[np.ndarray, np.ndarray]:
    verts, faces = [], []
    try:
        for line in _read_bytes(path).decode("ascii").splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    except (ValueError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed OBJ file {path}: {exc}") from exc
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)


# ---------------------------------------------------------------------- PLY

_VERTEX_DTYPE = np.dtype(
    [("x", "<f8"), ("y", "<f8"), ("z", "<f8"), ("red", "u1"), ("green", "u1"), ("blue", "u1")]
)
_FACE_DTYPE = np.dtype([("n", "u1"), ("idx", "<i4", (3,))])


def ply_bytes(mesh: LevelSetMesh) -> bytes:
    _check_faces(mesh)
    header = "\n".join(
        [
            "ply",
            "format binary_little_endian 1.0",
            f"comment level {mesh.level!r} sign {'+' if mesh.sign > 0 else '-'}",
            f"element vertex {len(mesh.vertices)}",
            "property double x",
            "property double y",
            "property double z",
            "property uchar red",
            "property uchar green",
            "property uchar blue",
            f"element face {len(mesh.triangles)}",
            "property list uchar int vertex_indices",
            "end_header",
        ]
    ) + "\n"
    v = np.zeros(len(mesh.vertices), dtype=_VERTEX_DTYPE)
    for k, name in enumerate("xyz"):
        v[name] = mesh.vertices[:, k]
    rgb = POSITIVE_RGB if mesh.sign > 0 else NEGATIVE_RGB
    v["red"], v["green"], v["blue"] = rgb
    f = np.zeros(len(mesh.triangles), dtype=_FACE_DTYPE)
    f["n"] = 3
    f["idx"] = mesh.triangles
    return header.encode("ascii") + v.tobytes() + f.tobytes()


def write_ply(mesh: LevelSetMesh, path) -> None:
    _write_bytes(path, ply_bytes(mesh))


def read_ply(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse a PLY written by :func:`write_ply`; returns vertices, faces and colours."""
    data = _read_bytes(path)
    marker = b"end_header\n"
    end = data.find(marker)
    if not data.startswith(b"ply\n") or end < 0:
        raise ParseError(f"{path} is not a PLY file")
    header = data[:end].decode("ascii").splitlines()
    if "format binary_little_endian 1.0" not in header:
        raise ParseError("only binary little-endian PLY is supported")
    counts = {}
    for line in header:
        parts = line.split()
        if parts[:1] == ["element"]:
            counts[parts[1]] = int(parts[2])
    body = data[end + len(marker):]
    nv, nf = counts.get("vertex", 0), counts.get("face", 0)
    need = nv * _VERTEX_DTYPE.itemsize + nf * _FACE_DTYPE.itemsize
    if len(body) != need:
        raise ParseError(f"PLY body has {len(body)} bytes, expected {need}")
    v = np.frombuffer(body, dtype=_VERTEX_DTYPE, count=nv)
    f = np.frombuffer(body, dtype=_FACE_DTYPE, count=nf, offset=nv * _VERTEX_DTYPE.itemsize)
    if nf and np.any(f["n"] != 3):
        raise ParseError("only triangular faces are supported")
    verts = np.stack([v["x"], v["y"], v["z"]], axis=-1).astype(float)
    colours = np.stack([v["red"], v["green"], v["blue"]], axis=-1)
    return verts, f["idx"].astype(np.int64).reshape(-1, 3), colours


def write_mesh(mesh: LevelSetMesh, fmt: str, path) -> None:
    if fmt == "obj":
        write_obj(mesh, path)
    elif fmt == "ply":
        write_ply(mesh, path)
    else:
        raise IoError(f"unknown mesh format {fmt!r}")


def mesh_filename(frame: int, pair: tuple[int, int], sign: int, fmt: str) -> str:
    return f"frame_{frame:04d}_pair_{pair[0]}-{pair[1]}{sign_suffix(sign)}.{fmt}"


# ------------------------------------------------------------------ density


def dump_density(rho, path) -> None:
    rho = np.asarray(rho, dtype=complex)
    doc = {"basis": BASIS, "rho": [[[z.real, z.imag] for z in row] for row in rho.tolist()]}
    _write_bytes(path, (json.dumps(doc, indent=2) + "\n").encode("utf-8"))


def load_density(path) -> np.ndarray:
    """Read ``{"basis": "uu,ud,du,dd", "rho": [[[re, im], ...], ...]}`` and validate it."""
    raw = _read_bytes(path)
    try:
        doc = json.loads(raw.decode("utf-8"))
        if doc.get("basis", BASIS) != BASIS:
            raise ValueError(f"unsupported basis {doc.get('basis')!r}")
        rows = doc["rho"]
        rho = np.array([[complex(float(re), float(im)) for re, im in row] for row in rows])
        if rho.shape != (4, 4):
            raise ValueError(f"rho must be 4x4, got {rho.shape}")
    except (ValueError, TypeError, KeyError, AttributeError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed density file {path}: {exc}") from exc
    return validate_density(rho)


# ------------------------------------------------------------------ records

_MATRIX = {"type": "array", "minItems": 3, "maxItems": 3,
           "items": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}}}
_VECTOR = {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}}

RECORD_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "metadata", "frames"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "metadata": {"type": "object", "required": ["model"]},
        "frames": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["time", "pairs"],
                "properties": {
                    "time": {"type": "number"},
                    "pairs": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["pair", "separation", "b_i", "b_j", "c_raw", "c_connected", "shape", "irreducible"],
                            "properties": {
                                "pair": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "integer"}},
                                "separation": {"type": "integer", "minimum": 0},
                                "b_i": _VECTOR,
                                "b_j": _VECTOR,
                                "c_raw": _MATRIX,
                                "c_connected": _MATRIX,
                                "shape": {
                                    "type": "object",
                                    "required": ["label", "eigenvalues", "principal_axes"],
                                    "properties": {
                                        "label": {"enum": ["Zero", "Dumbbell", "Disk", "Clover", "Ellipsoid", "WheelAndAxle"]},
                                        "eigenvalues": _VECTOR,
                                        "principal_axes": _MATRIX,
                                    },
                                },
                                "irreducible": {
                                    "type": "object",
                                    "required": ["c0", "c1", "c2", "a_lm"],
                                },
                                "meshes": {"type": "array", "items": {"type": "string"}},
                            },
                        },
                    },
                },
            },
        },
    },
}


def _clean(x):
    """Plain JSON types with negative zero folded to zero."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) + 0.0
    return x


def pair_entry(pair, obs: PairObservables, shape: ShapeClass, parts: IrreducibleParts, meshes=()) -> dict:
    return _clean(
        {
            "pair": list(pair),
            "separation": obs.separation,
            "b_i": obs.b_i,
            "b_j": obs.b_j,
            "c_raw": obs.c_raw,
            "c_connected": obs.c_connected,
            "shape": {
                "label": shape.label.value,
                "eigenvalues": shape.eigenvalues,
                "principal_axes": shape.principal_axes,
                "axis_eigenvalues": shape.axis_eigenvalues,
                "rank": shape.rank,
            },
            "irreducible": {
                "c0": parts.c0,
                "c1": parts.c1,
                "c2": parts.c2,
                "a_lm": {f"{l},{m}": v for (l, m), v in parts.a_lm.items()},
            },
            "meshes": list(meshes),
        }
    )


def make_record(metadata: dict, frames: list[dict]) -> dict:
    return _clean({"schema_version": SCHEMA_VERSION, "metadata": metadata, "frames": frames})


def validate_record(record: dict) -> None:
    errors = sorted(Draft202012Validator(RECORD_SCHEMA).iter_errors(record), key=lambda e: list(e.path))
    if errors:
        raise ParseError(f"record fails schema validation: {errors[0].message}")


def record_bytes(record: dict) -> bytes:
    validate_record(record)
    return (json.dumps(record, indent=2, sort_keys=True, allow_nan=False) + "\n").encode("utf-8")


def write_record(record: dict, path) -> None:
    _write_bytes(path, record_bytes(record))


def read_record(path) -> dict:
    try:
        record = json.loads(_read_bytes(path).decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed record {path}: {exc}") from exc
    validate_record(record)
    return record


def ensure_dir(path) -> Path:
    p = Path(path)
    try:
        os.makedirs(p, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {p}: {exc}") from exc
    return p


__all__ = [
    "NEGATIVE_RGB",
    "POSITIVE_RGB",
    "RECORD_SCHEMA",
    "SCHEMA_VERSION",
    "dump_density",
    "load_density",
    "make_record",
    "mesh_filename",
    "pair_entry",
    "read_obj",
    "read_ply",
    "read_record",
    "record_bytes",
    "validate_record",
    "write_mesh",
    "write_obj",
    "write_ply",
    "write_record",
]
