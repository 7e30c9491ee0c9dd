"""Versioned JSON formats: sweep configs, states, channels, drive specs.

Every document carries a top-level `"schema": 1`; unknown fields are
rejected. Validation failures raise SchemaError with a JSON-pointer-style
path to the offending field, which the CLI surfaces verbatim.

Complex matrices are encoded entrywise as [re, im] pairs; Python's JSON
writer emits shortest round-trip float literals, so a dump/load cycle is
exact.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .channel import QubitChannel
from .densmat import DensityMatrix
from .errors import SchemaError
from .experiments import SweepConfig
from .jcdrive import (
    DriveDistribution,
    binomial_drive,
    custom_drive,
    fock_drive,
    poisson_drive,
)

SCHEMA_VERSION = 1

_SWEEP_KEYS = {
    "schema", "mode", "drive", "nbar_grid", "fano_grid", "tau_grid",
    "concat_grid", "seed", "output", "mc_samples", "jobs",
    "split_convention", "binomial_mode",
}
_DRIVE_KEYS = {"kind", "nbar", "fano", "N", "coeffs"}
_STATE_KEYS = {"schema", "type", "matrix"}
_CHANNEL_KEYS = {"schema", "type", "images"}
_IMAGE_NAMES = ("E00", "E01", "E10", "E11")


def _fail(path: str, message: str):
    raise SchemaError(path, message)


def _check_object(data, allowed: set, path: str) -> dict:
    if not isinstance(data, dict):
        _fail(path, f"expected an object, got {type(data).__name__}")
    for key in data:
        if key not in allowed:
            _fail(f"{path}/{key}", "unknown field")
    return data


def _check_schema(data: dict, path: str = ""):
    if "schema" not in data:
        _fail(f"{path}/schema", "missing required field")
    if data["schema"] != SCHEMA_VERSION:
        _fail(f"{path}/schema", f"expected {SCHEMA_VERSION}, got {data['schema']!r}")


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        _fail(path, "expected a finite number")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {type(value).__name__}")
    return value


def _string(value, path: str) -> str:
    if not isinstance(value, str):
        _fail(path, f"expected a string, got {type(value).__name__}")
    return value


def _number_list(value, path: str) -> list:
    if not isinstance(value, list) or not value:
        _fail(path, "expected a non-empty array of numbers")
    return [_number(v, f"{path}/{i}") for i, v in enumerate(value)]


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"invalid JSON in {path}: {exc}") from exc


def _atomic_dump(payload: dict, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".eigenfid-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# complex matrices

def encode_matrix(m) -> list:
    a = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def decode_matrix(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        _fail(path, "expected a non-empty array of rows")
    rows = []
    width = None
    for i, row in enumerate(value):
        if not isinstance(row, list):
            _fail(f"{path}/{i}", "expected an array of [re, im] entries")
        if width is None:
            width = len(row)
        elif len(row) != width:
            _fail(f"{path}/{i}", f"expected {width} entries, got {len(row)}")
        entries = []
        for j, cell in enumerate(row):
            if (not isinstance(cell, list)) or len(cell) != 2:
                _fail(f"{path}/{i}/{j}", "expected an [re, im] pair")
            re = _number(cell[0], f"{path}/{i}/{j}/0")
            im = _number(cell[1], f"{path}/{i}/{j}/1")
            entries.append(complex(re, im))
        rows.append(entries)
    return np.array(rows, dtype=complex)


# ---------------------------------------------------------------------------
# sweep configs

def sweep_config_from_dict(data: dict, expected_mode: str | None = None) -> SweepConfig:
    _check_object(data, _SWEEP_KEYS, "")
    _check_schema(data)

    mode = data.get("mode", expected_mode)
    if mode is None:
        _fail("/mode", "missing required field")
    mode = _string(mode, "/mode")
    if expected_mode is not None and mode != expected_mode:
        _fail("/mode", f"config says {mode!r} but the subcommand is {expected_mode!r}")

    if "drive" not in data:
        _fail("/drive", "missing required field")
    drive = _check_object(data["drive"], _DRIVE_KEYS, "/drive")
    if "kind" not in drive:
        _fail("/drive/kind", "missing required field")
    kind = _string(drive["kind"], "/drive/kind")
    if kind not in ("poisson", "binomial"):
        _fail("/drive/kind", f"sweeps need 'poisson' or 'binomial', got {kind!r}")

    if "nbar_grid" in data:
        nbar_grid = _number_list(data["nbar_grid"], "/nbar_grid")
    elif "nbar" in drive:
        nbar_grid = [_number(drive["nbar"], "/drive/nbar")]
    else:
        _fail("/nbar_grid", "missing: provide nbar_grid or drive.nbar")
    for i, v in enumerate(nbar_grid):
        if v <= 0:
            _fail(f"/nbar_grid/{i}", f"mean photon number must be positive, got {v}")

    fano_grid: list = []
    if kind == "binomial":
        if "fano_grid" in data:
            fano_grid = _number_list(data["fano_grid"], "/fano_grid")
        elif "fano" in drive:
            fano_grid = [_number(drive["fano"], "/drive/fano")]
        else:
            _fail("/fano_grid", "missing: binomial drives need fano_grid or drive.fano")
        for i, v in enumerate(fano_grid):
            if not 0 < v <= 1:
                _fail(f"/fano_grid/{i}", f"Fano factor must lie in (0, 1], got {v}")
    elif "fano_grid" in data:
        fano_grid = _number_list(data["fano_grid"], "/fano_grid")

    if "tau_grid" in data:
        tau_grid = _number_list(data["tau_grid"], "/tau_grid")
    elif mode == "split":
        tau_grid = [math.pi / 2]
    else:
        _fail("/tau_grid", "missing required field")
    for i, v in enumerate(tau_grid):
        if v < 0:
            _fail(f"/tau_grid/{i}", f"reduced time must be nonnegative, got {v}")

    concat_grid: list = []
    if "concat_grid" in data:
        raw = data["concat_grid"]
        if not isinstance(raw, list) or not raw:
            _fail("/concat_grid", "expected a non-empty array of integers")
        concat_grid = [_integer(v, f"/concat_grid/{i}") for i, v in enumerate(raw)]
        for i, v in enumerate(concat_grid):
            if v < 1:
                _fail(f"/concat_grid/{i}", f"concatenation count must be positive, got {v}")
    elif mode in ("concat", "split"):
        _fail("/concat_grid", f"missing: mode {mode!r} needs concatenation counts")

    kwargs = dict(
        mode=mode,
        drive_kind=kind,
        nbar_grid=tuple(nbar_grid),
        fano_grid=tuple(fano_grid),
        tau_grid=tuple(tau_grid),
        concat_grid=tuple(concat_grid),
    )
    if "seed" in data:
        kwargs["seed"] = _integer(data["seed"], "/seed")
    if "output" in data:
        kwargs["output"] = _string(data["output"], "/output")
    if "mc_samples" in data:
        kwargs["mc_samples"] = _integer(data["mc_samples"], "/mc_samples")
    if "jobs" in data:
        kwargs["jobs"] = _integer(data["jobs"], "/jobs")
    if "split_convention" in data:
        value = _string(data["split_convention"], "/split_convention")
        if value not in ("physical", "per_pulse"):
            _fail("/split_convention", f"expected 'physical' or 'per_pulse', got {value!r}")
        kwargs["split_convention"] = value
    if "binomial_mode" in data:
        value = _string(data["binomial_mode"], "/binomial_mode")
        if value not in ("moment_matched", "paper_literal"):
            _fail("/binomial_mode",
                  f"expected 'moment_matched' or 'paper_literal', got {value!r}")
        kwargs["binomial_mode"] = value
    return SweepConfig(**kwargs)


def load_sweep_config(path: str, expected_mode: str | None = None) -> SweepConfig:
    return sweep_config_from_dict(_load_json(path), expected_mode=expected_mode)


# ---------------------------------------------------------------------------
# drives

def drive_from_spec(spec: dict, binomial_mode: str = "moment_matched",
                    path: str = "/drive") -> DriveDistribution:
    spec = _check_object(spec, _DRIVE_KEYS, path)
    if "kind" not in spec:
        _fail(f"{path}/kind", "missing required field")
    kind = _string(spec["kind"], f"{path}/kind")
    if kind == "poisson":
        if "nbar" not in spec:
            _fail(f"{path}/nbar", "missing: poisson drives need a mean")
        return poisson_drive(_number(spec["nbar"], f"{path}/nbar"))
    if kind == "binomial":
        for key in ("nbar", "fano"):
            if key not in spec:
                _fail(f"{path}/{key}", "missing: binomial drives need nbar and fano")
        nbar = _number(spec["nbar"], f"{path}/nbar")
        fano = _number(spec["fano"], f"{path}/fano")
        return binomial_drive(nbar, fano * nbar, mode=binomial_mode)
    if kind == "fock":
        if "N" not in spec:
            _fail(f"{path}/N", "missing: fock drives need a photon number")
        return fock_drive(_integer(spec["N"], f"{path}/N"))
    if kind == "custom":
        if "coeffs" not in spec:
            _fail(f"{path}/coeffs", "missing: custom drives need coefficients")
        raw = spec["coeffs"]
        if not isinstance(raw, list) or not raw:
            _fail(f"{path}/coeffs", "expected a non-empty array of [re, im] pairs")
        coeffs = []
        for i, cell in enumerate(raw):
            if (not isinstance(cell, list)) or len(cell) != 2:
                _fail(f"{path}/coeffs/{i}", "expected an [re, im] pair")
            coeffs.append(complex(_number(cell[0], f"{path}/coeffs/{i}/0"),
                                  _number(cell[1], f"{path}/coeffs/{i}/1")))
        return custom_drive(np.array(coeffs))
    _fail(f"{path}/kind", f"unknown drive kind {kind!r}")


# ---------------------------------------------------------------------------
# states and channels

def state_to_dict(rho: DensityMatrix) -> dict:
    return {"schema": SCHEMA_VERSION, "type": "state",
            "matrix": encode_matrix(rho.matrix)}


def channel_to_dict(channel: QubitChannel) -> dict:
    return {"schema": SCHEMA_VERSION, "type": "channel",
            "images": {name: encode_matrix(getattr(channel, name))
                       for name in _IMAGE_NAMES}}


def state_from_dict(data: dict) -> DensityMatrix:
    _check_object(data, _STATE_KEYS, "")
    _check_schema(data)
    if "matrix" not in data:
        _fail("/matrix", "missing required field")
    m = decode_matrix(data["matrix"], "/matrix")
    if m.shape[0] != m.shape[1]:
        _fail("/matrix", f"expected a square matrix, got shape {m.shape}")
    return DensityMatrix(m)


def channel_from_dict(data: dict) -> QubitChannel:
    _check_object(data, _CHANNEL_KEYS, "")
    _check_schema(data)
    if "images" not in data:
        _fail("/images", "missing required field")
    images = _check_object(data["images"], set(_IMAGE_NAMES), "/images")
    decoded = {}
    for name in _IMAGE_NAMES:
        if name not in images:
            _fail(f"/images/{name}", "missing required field")
        m = decode_matrix(images[name], f"/images/{name}")
        if m.shape != (2, 2):
            _fail(f"/images/{name}", f"expected a 2x2 matrix, got shape {m.shape}")
        decoded[name] = m
    return QubitChannel(decoded["E00"], decoded["E01"], decoded["E10"], decoded["E11"])


def object_from_dict(data: dict):
    if not isinstance(data, dict):
        _fail("/", f"expected an object, got {type(data).__name__}")
    kind = data.get("type")
    if kind == "state":
        return state_from_dict(data)
    if kind == "channel":
        return channel_from_dict(data)
    _fail("/type", f"expected 'state' or 'channel', got {kind!r}")


def load_object(path: str):
    """Read a state or channel document; returns DensityMatrix or QubitChannel."""
    return object_from_dict(_load_json(path))


def dump_object(obj, path: str) -> None:
    """Write a state or channel document atomically."""
    if isinstance(obj, DensityMatrix):
        _atomic_dump(state_to_dict(obj), path)
    elif isinstance(obj, QubitChannel):
        _atomic_dump(channel_to_dict(obj), path)
    else:
        raise SchemaError("/", f"cannot serialize {type(obj).__name__}")
