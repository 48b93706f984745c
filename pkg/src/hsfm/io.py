"""Binary containers and JSON documents.

Binary formats (HSF-G group functions, HSF-F spectral functions, HSF-K
kernels) are one line of JSON header, a newline, then little-endian float64
(re, im) pairs.  Symbols (HSF-S) and problems (HSF-P) are plain JSON.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .fan import FanGrid, Symbol, power_symbol, table_symbol
from .hgroup import GroupFunction, GroupGrid
from .multiplier import Kernel
from .sft import SpectralFunction

VERSION = 1
_DTYPE = np.dtype("<c16")


class FormatError(ValueError):
    """Malformed or inconsistent input file."""


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _write_binary(path, header: dict, values: np.ndarray):
    data = np.ascontiguousarray(values, dtype=_DTYPE).tobytes()
    with open(path, "wb") as fh:
        fh.write(_dumps(header).encode("utf-8"))
        fh.write(b"\n")
        fh.write(data)


def _read_binary(path, fmt: str) -> tuple[dict, bytes]:
    raw = Path(path).read_bytes()
    cut = raw.find(b"\n")
    if cut < 0:
        raise FormatError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:cut].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: header is not valid JSON ({exc})") from None
    if not isinstance(header, dict) or header.get("format") != fmt:
        raise FormatError(f"{path}: expected format {fmt!r}, found {header.get('format')!r}")
    if header.get("version") != VERSION:
        raise FormatError(f"{path}: unsupported version {header.get('version')!r}")
    return header, raw[cut + 1:]


def _payload(path, payload: bytes, count: int) -> np.ndarray:
    expected = count * _DTYPE.itemsize
    if len(payload) != expected:
        raise FormatError(f"{path}: payload has {len(payload)} bytes, expected {expected}")
    vals = np.frombuffer(payload, dtype=_DTYPE).astype(complex)
    if not np.all(np.isfinite(vals)):
        raise FormatError(f"{path}: payload contains non-finite values")
    return vals


def _grid_from(header, path) -> GroupGrid:
    try:
        return GroupGrid(int(header["n"]), float(header["Lz"]), int(header["Nz"]),
                         float(header["Lt"]), int(header["Nt"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad grid description ({exc})") from None


def _fan_from(header, path) -> FanGrid:
    try:
        return FanGrid(int(header["n"]), int(header["Kmax"]), float(header["Lt"]), int(header["Nt"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad fan description ({exc})") from None


def grid_header(grid: GroupGrid) -> dict:
    return {"n": grid.n, "Lz": grid.Lz, "Nz": grid.Nz, "Lt": grid.Lt, "Nt": grid.Nt}


# -- HSF-G --------------------------------------------------------------------

def write_group(path, f: GroupFunction, extra: dict | None = None):
    header = {"format": "hsf-g", "version": VERSION, "order": "x1,y1,...,t", **grid_header(f.grid)}
    if extra:
        header.update(extra)
    _write_binary(path, header, f.values)


def read_group(path) -> tuple[GroupFunction, dict]:
    header, payload = _read_binary(path, "hsf-g")
    grid = _grid_from(header, path)
    vals = _payload(path, payload, grid.size)
    return GroupFunction(grid, vals.reshape(grid.shape)), header


# -- HSF-F --------------------------------------------------------------------

def write_spectral(path, F: SpectralFunction, extra: dict | None = None):
    header = {"format": "hsf-f", "version": VERSION, "normalization": "c_nk",
              "Kmax": F.fan.Kmax, **grid_header(F.grid)}
    if extra:
        header.update(extra)
    _write_binary(path, header, F.values)


def read_spectral(path) -> tuple[SpectralFunction, dict]:
    header, payload = _read_binary(path, "hsf-f")
    if header.get("normalization") != "c_nk":
        raise FormatError(f"{path}: normalization must be 'c_nk'")
    grid = _grid_from(header, path)
    fan = _fan_from(header, path)
    vals = _payload(path, payload, int(np.prod(fan.shape)) * grid.n_spatial)
    return SpectralFunction(fan, grid, vals.reshape(fan.shape + (grid.n_spatial,))), header


# -- HSF-K --------------------------------------------------------------------

def write_kernel(path, K: Kernel, extra: dict | None = None):
    header = {"format": "hsf-k", "version": VERSION, "Kmax": K.fan.Kmax, "dlambda": K.fan.dlambda,
              "order": "k,lambda,z", "symbol": symbol_to_dict(K.symbol, K.fan), **grid_header(K.grid)}
    if extra:
        header.update(extra)
    _write_binary(path, header, K.coefficients)


def read_kernel_coefficients(path) -> tuple[np.ndarray, dict]:
    header, payload = _read_binary(path, "hsf-k")
    grid = _grid_from(header, path)
    fan = _fan_from(header, path)
    vals = _payload(path, payload, int(np.prod(fan.shape)) * grid.n_spatial)
    return vals.reshape(fan.shape + (grid.n_spatial,)), header


# -- HSF-S --------------------------------------------------------------------

def symbol_to_dict(m: Symbol, fan: FanGrid) -> dict:
    out = {"format": "hsf-s", "version": VERSION, "n": fan.n, "Kmax": fan.Kmax, "Lt": fan.Lt, "Nt": fan.Nt}
    if m.family == "power":
        out.update(kind="power", beta=m.beta, gamma=m.gamma)
    else:
        vals = np.asarray(m.on(fan))
        out.update(kind="table", values=np.real(vals).ravel().tolist())
        if np.iscomplexobj(vals) and np.any(vals.imag):
            out["values_imag"] = np.imag(vals).ravel().tolist()
    return out


def symbol_from_dict(doc: dict, fan: FanGrid | None = None) -> tuple[Symbol, FanGrid]:
    if not isinstance(doc, dict) or doc.get("format") != "hsf-s":
        raise FormatError("symbol document must have format 'hsf-s'")
    sfan = _fan_from(doc, "symbol")
    if fan is not None and (fan.n, fan.Lt, fan.Nt) != (sfan.n, sfan.Lt, sfan.Nt):
        raise FormatError(f"symbol fan {sfan!r} does not match {fan!r}")
    fan = fan or sfan
    kind = doc.get("kind")
    if kind == "power":
        try:
            return power_symbol(float(doc.get("beta", 0.0)), float(doc["gamma"]), sfan.n), fan
        except (KeyError, ValueError) as exc:
            raise FormatError(f"bad power symbol ({exc})") from None
    if kind == "table":
        vals = np.asarray(doc.get("values", []), dtype=float)
        if "values_imag" in doc:
            vals = vals + 1j * np.asarray(doc["values_imag"], dtype=float)
        if vals.size != np.prod(sfan.shape):
            raise FormatError(f"symbol table has {vals.size} values, expected {np.prod(sfan.shape)}")
        if sfan != fan:
            raise FormatError("tabulated symbol Kmax does not match the session fan")
        try:
            return table_symbol(vals.reshape(sfan.shape), sfan), sfan
        except ValueError as exc:
            raise FormatError(str(exc)) from None
    raise FormatError(f"unknown symbol kind {kind!r}")


def parse_symbol_spec(spec: str, fan: FanGrid) -> Symbol:
    """Symbol from a command-line spec: ``power:beta=B,gamma=G``, ``const:c=C`` or a file path."""
    from .fan import constant_symbol
    if spec.startswith("power") or spec.startswith("const"):
        name, _, rest = spec.partition(":")
        kw = {}
        for part in filter(None, rest.split(",")):
            key, eq, val = part.partition("=")
            if not eq:
                raise FormatError(f"bad symbol parameter {part!r}")
            try:
                kw[key.strip()] = float(val)
            except ValueError:
                raise FormatError(f"bad symbol parameter {part!r}") from None
        try:
            if name == "power":
                return power_symbol(kw.get("beta", 0.0), kw["gamma"], fan.n)
            if name == "const":
                return constant_symbol(kw.get("c", 1.0), fan)
        except (KeyError, ValueError) as exc:
            raise FormatError(f"bad symbol spec {spec!r} ({exc})") from None
    if os.path.exists(spec):
        return symbol_from_dict(read_json(spec), fan)[0]
    raise FormatError(f"cannot parse symbol spec {spec!r}")


# -- JSON ---------------------------------------------------------------------

def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True))
        fh.write("\n")


def write_trajectory(directory, traj, extra: dict | None = None):
    """One HSF-G file per time node plus ``manifest.json``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = []
    for j, u in enumerate(traj.states):
        name = f"state_{j:04d}.hsfg"
        write_group(d / name, u, {"tau": float(traj.timegrid.nodes[j])})
        files.append(name)
    manifest = {"format": "hsf-trajectory", "version": VERSION, "T": traj.timegrid.T,
                "Ntau": traj.timegrid.Ntau, "iterations": traj.iterations,
                "increments": traj.increments, "residual": traj.residual, "states": files}
    if extra:
        manifest.update(extra)
    write_json(d / "manifest.json", manifest)
