"""Deterministic artifact I/O: CSV for sampled data, JSON for reports and
specs, 8-bit PGM rasters for phase-space magnitude maps, and a SHA-256
manifest over an output directory.

All writers emit byte-identical output for identical input: floats are
rendered with repr (shortest round-trip form), JSON keys are sorted, and
newlines are always LF.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .fio import FioSpec
from .grids import GridFunction, GridSpec
from .phases import phase_from_dict, phase_to_dict
from .symbols import ShubinSymbol
from .symplectic import SymplecticMatrix


def _fmt(v) -> str:
    return repr(float(v))


# -- grid functions ---------------------------------------------------------


def grid_function_to_csv(f: GridFunction, path: str) -> None:
    """Header line d,n,R then one row index,re,im per sample."""
    lines = [f"{f.spec.d},{f.spec.n},{_fmt(f.spec.R)}"]
    vals = np.asarray(f.values, dtype=complex).reshape(-1)
    for i, v in enumerate(vals):
        lines.append(f"{i},{_fmt(v.real)},{_fmt(v.imag)}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def grid_function_from_csv(path: str) -> GridFunction:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        d, n, R = int(header[0]), int(header[1]), float(header[2])
        spec = GridSpec(d, n, R)
        vals = np.zeros(n**d, dtype=complex)
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            idx, re, im = line.split(",")
            vals[int(idx)] = float(re) + 1j * float(im)
    return GridFunction(spec, vals)


# -- phase space fields -----------------------------------------------------


def field_to_csv(field, path: str) -> None:
    """Coordinate columns (one per axis, position axes first) then re,im.

    Accepts a PhaseSpaceField (axes x, xi) or a Field4D (generic axes
    tuple); rows iterate over the grid in C order.
    """
    axes = getattr(field, "axes", None)
    if axes is None:
        axes = (field.x, field.xi)
    k = len(axes)
    names = [f"x{i}" for i in range(k // 2)] + [f"xi{i}" for i in range(k - k // 2)]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = [m.reshape(-1) for m in mesh]
    vals = np.asarray(field.values, dtype=complex).reshape(-1)
    lines = [",".join(names + ["re", "im"])]
    for row in range(vals.size):
        parts = [_fmt(c[row]) for c in coords]
        parts.append(_fmt(vals[row].real))
        parts.append(_fmt(vals[row].imag))
        lines.append(",".join(parts))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def field_to_pgm(values: np.ndarray, path: str,
                 log_min: float = -8.0, log_max: float = 0.0,
                 comment: str = "") -> None:
    """8-bit PGM of log10(|values| / peak) on a fixed color scale.

    The magnitude is normalized by its peak, mapped through log10, clipped
    to [log_min, log_max] and linearly scaled to 0..255 (255 = peak).  The
    first axis renders as rows top to bottom.  An optional single-line
    comment (for the run configuration) goes into the PGM header.
    """
    mag = np.abs(np.asarray(values))
    if mag.ndim != 2:
        raise ValueError("PGM export needs a 2-d array")
    peak = mag.max()
    if peak <= 0 or not np.isfinite(peak):
        levels = np.zeros(mag.shape, dtype=np.uint8)
    else:
        with np.errstate(divide="ignore"):
            logs = np.log10(np.where(mag > 0, mag / peak, 0.0))
        logs = np.clip(logs, log_min, log_max)
        levels = np.rint(255.0 * (logs - log_min) / (log_max - log_min))
        levels = levels.astype(np.uint8)
    rows, cols = levels.shape
    note = f"# {comment}\n" if comment else ""
    header = f"P5\n{note}{cols} {rows}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(levels.tobytes())


def pgm_levels(path: str) -> np.ndarray:
    """Read back a P5 PGM written by field_to_pgm as a uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    lines = data.split(b"\n")
    if lines[0] != b"P5":
        raise ValueError("not a binary PGM file")
    header = [ln for ln in lines[1:] if not ln.startswith(b"#")]
    cols, rows = map(int, header[0].split())
    offset = data.index(b"255\n") + 4
    raw = data[offset : offset + rows * cols]
    return np.frombuffer(raw, dtype=np.uint8).reshape(rows, cols)


def append_config_comment(path: str, config: dict) -> None:
    """Append the run configuration to a CSV artifact as a '#' comment line;
    readers skip comment lines."""
    line = "# config " + json.dumps(_jsonable(config), sort_keys=True)
    with open(path, "a", newline="\n") as fh:
        fh.write(line + "\n")


# -- JSON -------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if not np.isfinite(v):
            return repr(v)
        return v
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def json_dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(obj, path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(json_dumps(obj))


def read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


# -- operator specs ---------------------------------------------------------


def symplectic_to_list(chi: SymplecticMatrix) -> list:
    return chi.entries.tolist()


def symplectic_from_list(entries) -> SymplecticMatrix:
    M = np.asarray(entries, dtype=float)
    return SymplecticMatrix(M.shape[0] // 2, M)


def fio_spec_to_dict(spec: FioSpec) -> dict:
    """JSON form of an operator spec.

    Only symbols given as ShubinSymbol instances serialize; callables (for
    example symbols recovered from sampled kernels) are rejected.
    """
    out = {"form": spec.form, "order": spec.order, "rho": spec.rho}
    if spec.form == "oscillatory":
        out["phase"] = phase_to_dict(spec.phase)
        if not isinstance(spec.amplitude, ShubinSymbol):
            raise ValueError("amplitude must be a ShubinSymbol to serialize")
        out["amplitude"] = spec.amplitude.to_dict()
    else:
        if not isinstance(spec.b, ShubinSymbol):
            raise ValueError("symbol b must be a ShubinSymbol to serialize")
        out["b"] = spec.b.to_dict()
        out["chi"] = symplectic_to_list(spec.chi)
    return out


def fio_spec_from_dict(data: dict) -> FioSpec:
    form = data["form"]
    order = float(data["order"])
    rho = float(data["rho"])
    if form == "oscillatory":
        return FioSpec(
            form, order, rho,
            phase=phase_from_dict(data["phase"]),
            amplitude=ShubinSymbol.from_dict(data["amplitude"]),
        )
    return FioSpec(
        form, order, rho,
        b=ShubinSymbol.from_dict(data["b"]),
        chi=symplectic_from_list(data["chi"]),
    )


# -- manifest ---------------------------------------------------------------


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(directory: str) -> dict:
    """List every file under the directory (except manifest.json itself)
    with its SHA-256, write manifest.json there, and return the mapping."""
    entries = {}
    for root, _dirs, files in os.walk(directory):
        for name in files:
            full = os.path.join(root, name)
            rel = os.path.relpath(full, directory)
            if rel == "manifest.json":
                continue
            entries[rel.replace(os.sep, "/")] = sha256_file(full)
    manifest = {"files": dict(sorted(entries.items()))}
    write_json(manifest, os.path.join(directory, "manifest.json"))
    return manifest
