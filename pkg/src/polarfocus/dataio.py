"""File formats: binary matrix payloads with JSON sidecars, CSV profiles,
16-bit PGM magnitude export.

One container serves all matrix kinds (phase-history, spectrum, image,
surface) with a `kind` discriminator so tools compose through file paths.
Payloads are little-endian, row-major, complex64 for complex kinds and
float32 for surfaces.  The sidecar `<path>.json` carries shape, dtype,
axis descriptors, provenance, and kind-specific extras (grid parameters,
geometry samples, taper records).  Coverage masks, when present, live in
`<path>.mask` as uint8.  Every write is atomic (temp file + rename), so
re-running a command with identical inputs yields byte-identical outputs.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from . import __version__ as TOOL_VERSION
from .geometry import FlightGeometry, RadarParams
from .grids import CartesianGrid, CartesianSpectrum, ComplexImage, PhaseErrorSurface
from .simulate import PhaseHistory

FORMAT_VERSION = 1
KINDS = ("phase-history", "spectrum", "image", "surface")
_DTYPES = {"phase-history": "<c8", "spectrum": "<c8", "image": "<c8", "surface": "<f4"}


class DatasetError(Exception):
    """Raised on malformed, truncated, or mismatched dataset files."""


def _atomic_write(path: str, payload: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_dataset(
    path: str,
    kind: str,
    data: np.ndarray,
    axes: list[dict],
    extras: dict | None = None,
    mask: np.ndarray | None = None,
    config_hash: str = "",
) -> None:
    """Write one matrix with its sidecar header; see module docstring."""
    if kind not in KINDS:
        raise DatasetError(f"unknown dataset kind {kind!r}")
    if data.ndim != 2:
        raise DatasetError("dataset payload must be a 2-D matrix")
    if len(axes) != 2:
        raise DatasetError("exactly two axis descriptors required")
    stored = np.ascontiguousarray(data.astype(_DTYPES[kind]))
    header = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "rows": int(data.shape[0]),
        "cols": int(data.shape[1]),
        "dtype": str(np.dtype(_DTYPES[kind]).name),
        "axes": axes,
        "provenance": {"config_hash": config_hash, "tool_version": TOOL_VERSION},
        "extras": extras or {},
        "has_mask": mask is not None,
    }
    _atomic_write(path, stored.tobytes())
    if mask is not None:
        _atomic_write(path + ".mask", np.ascontiguousarray(mask, dtype=np.uint8).tobytes())
    _atomic_write(path + ".json", (json.dumps(header, indent=1) + "\n").encode())


def read_dataset(path: str) -> tuple[dict, np.ndarray, np.ndarray | None]:
    """Read (header, matrix, mask-or-None); validates sizes and versions."""
    sidecar = path + ".json"
    if not os.path.exists(sidecar):
        raise DatasetError(f"missing sidecar {sidecar}")
    with open(sidecar, "r", encoding="utf-8") as fh:
        header = json.load(fh)
    if header.get("format_version") != FORMAT_VERSION:
        raise DatasetError(
            f"format version {header.get('format_version')} not supported "
            f"(expected {FORMAT_VERSION})"
        )
    kind = header.get("kind")
    if kind not in KINDS:
        raise DatasetError(f"unknown dataset kind {kind!r}")
    rows, cols = int(header["rows"]), int(header["cols"])
    dtype = np.dtype(_DTYPES[kind])
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) != rows * cols * dtype.itemsize:
        raise DatasetError(
            f"payload size {len(raw)} B does not match {rows}x{cols} {dtype.name}"
        )
    data = np.frombuffer(raw, dtype=dtype).reshape(rows, cols)
    mask = None
    if header.get("has_mask"):
        with open(path + ".mask", "rb") as fh:
            mraw = fh.read()
        if len(mraw) != rows * cols:
            raise DatasetError("mask payload size mismatch")
        mask = np.frombuffer(mraw, dtype=np.uint8).reshape(rows, cols).astype(bool)
    return header, data.copy(), mask


def _grid_extras(grid: CartesianGrid) -> dict:
    extras = {
        "y0": grid.y0,
        "omega": grid.omega,
        "center_frequency": grid.center_frequency,
        "sin_phi_ref": grid.sin_phi_ref,
    }
    if grid.theta_map is not None:
        t, tan_theta = grid.theta_map
        extras["theta_map_t"] = t.tolist()
        extras["theta_map_tan"] = tan_theta.tolist()
    return extras


def _grid_axes(grid: CartesianGrid) -> list[dict]:
    return [
        {"name": "X", "unit": "rad/m", "start": float(grid.x[0]), "step": grid.dx},
        {"name": "Y", "unit": "rad/m", "start": float(grid.y[0]), "step": grid.dy},
    ]


def _grid_from_header(header: dict) -> CartesianGrid:
    ax, ay = header["axes"]
    rows, cols = header["rows"], header["cols"]
    e = header["extras"]
    theta_map = None
    if "theta_map_t" in e:
        theta_map = (np.array(e["theta_map_t"]), np.array(e["theta_map_tan"]))
    return CartesianGrid(
        x=ax["start"] + ax["step"] * np.arange(rows),
        y=ay["start"] + ay["step"] * np.arange(cols),
        y0=e["y0"],
        omega=e["omega"],
        center_frequency=e["center_frequency"],
        sin_phi_ref=e["sin_phi_ref"],
        theta_map=theta_map,
    )


def save_phase_history(path: str, ph: PhaseHistory, config_hash: str = "") -> None:
    radar, geom = ph.radar, ph.geometry
    axes = [
        {
            "name": "slow_time", "unit": "s",
            "start": float(geom.slow_time[0]),
            "step": float(geom.slow_time[1] - geom.slow_time[0]),
        },
        {
            "name": "range_frequency", "unit": "Hz",
            "start": float(radar.range_freq_axis[0]),
            "step": float(radar.range_freq_axis[1] - radar.range_freq_axis[0]),
        },
    ]
    extras = {
        "radar": {
            "center_frequency": radar.center_frequency,
            "bandwidth": radar.bandwidth,
            "range_freq_samples": radar.range_freq_samples,
            "pulse_count": radar.pulse_count,
            "propagation_speed": radar.propagation_speed,
        },
        "geometry": {
            "apc_position": geom.apc_position.tolist(),
            "squint_angle": geom.squint_angle,
            "reference_incident": geom.reference_incident,
            "velocity": geom.velocity,
        },
    }
    write_dataset(path, "phase-history", ph.data, axes, extras, config_hash=config_hash)


def load_phase_history(path: str) -> PhaseHistory:
    header, data, _ = read_dataset(path)
    if header["kind"] != "phase-history":
        raise DatasetError(f"expected phase-history, found {header['kind']!r}")
    e = header["extras"]
    radar = RadarParams(**e["radar"])
    g = e["geometry"]
    apc = np.array(g["apc_position"])
    ax = header["axes"][0]
    t = ax["start"] + ax["step"] * np.arange(header["rows"])
    from .geometry import angles_from_positions

    theta, phi, r_c = angles_from_positions(apc)
    geom = FlightGeometry(
        slow_time=t,
        apc_position=apc,
        scene_center_range=r_c,
        azimuth_angle=theta,
        incident_angle=phi,
        squint_angle=g["squint_angle"],
        reference_incident=g["reference_incident"],
        velocity=g["velocity"],
    )
    return PhaseHistory(data=data.astype(np.complex128), radar=radar, geometry=geom)


def save_spectrum(path: str, spec: CartesianSpectrum, config_hash: str = "") -> None:
    write_dataset(
        path, "spectrum", spec.data, _grid_axes(spec.grid),
        _grid_extras(spec.grid), mask=spec.mask, config_hash=config_hash,
    )


def load_spectrum(path: str) -> CartesianSpectrum:
    header, data, mask = read_dataset(path)
    if header["kind"] != "spectrum":
        raise DatasetError(f"expected spectrum, found {header['kind']!r}")
    grid = _grid_from_header(header)
    return CartesianSpectrum(data=data.astype(np.complex128), grid=grid, mask=mask)


def save_image(path: str, img: ComplexImage, config_hash: str = "") -> None:
    axes = [
        {"name": "azimuth", "unit": "m", "start": float(img.azimuth_axis[0]),
         "step": img.azimuth_spacing},
        {"name": "range", "unit": "m", "start": float(img.range_axis[0]),
         "step": img.range_spacing},
    ]
    extras = _grid_extras(img.grid)
    extras["grid_axes"] = _grid_axes(img.grid)
    extras["grid_shape"] = [img.grid.x.size, img.grid.y.size]
    extras["taper"] = img.taper
    write_dataset(path, "image", img.data, axes, extras,
                  mask=img.source_mask, config_hash=config_hash)


def load_image(path: str) -> ComplexImage:
    header, data, mask = read_dataset(path)
    if header["kind"] != "image":
        raise DatasetError(f"expected image, found {header['kind']!r}")
    e = header["extras"]
    gx, gy = e["grid_axes"]
    rows, cols = e["grid_shape"]
    grid_header = {
        "axes": [gx, gy], "rows": rows, "cols": cols,
        "extras": {k: e[k] for k in
                   ("y0", "omega", "center_frequency", "sin_phi_ref",
                    "theta_map_t", "theta_map_tan") if k in e},
    }
    grid = _grid_from_header(grid_header)
    return ComplexImage(
        data=data.astype(np.complex128),
        azimuth_spacing=header["axes"][0]["step"],
        range_spacing=header["axes"][1]["step"],
        grid=grid,
        taper=e.get("taper"),
        source_mask=mask,
    )


def save_surface(path: str, surface: PhaseErrorSurface, config_hash: str = "") -> None:
    write_dataset(
        path, "surface", surface.values, _grid_axes(surface.grid),
        _grid_extras(surface.grid), mask=surface.mask, config_hash=config_hash,
    )


def load_surface(path: str) -> PhaseErrorSurface:
    header, data, mask = read_dataset(path)
    if header["kind"] != "surface":
        raise DatasetError(f"expected surface, found {header['kind']!r}")
    grid = _grid_from_header(header)
    values = data.astype(np.float64)
    if mask is not None:
        values = np.where(mask, values, 0.0)
    return PhaseErrorSurface(values=values, grid=grid, mask=mask)


def save_profile_csv(path: str, x: np.ndarray, values: np.ndarray, name: str = "value") -> None:
    lines = [f"x,{name}"]
    lines += [f"{xv!r},{vv!r}" for xv, vv in zip(x.tolist(), values.tolist())]
    _atomic_write(path, ("\n".join(lines) + "\n").encode())


def load_profile_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    arr = np.loadtxt(path, delimiter=",", skiprows=1)
    return arr[:, 0], arr[:, 1]


def export_magnitude(img, path: str, dynamic_range_db: float = 40.0) -> None:
    """Write |image| in dB, clipped to the dynamic range, as 16-bit PGM.

    The peak maps to full scale (65535); pixels at or below
    peak - dynamic_range_db map to zero.  An all-zero image exports as all
    zeros.
    """
    if dynamic_range_db <= 0:
        raise ValueError("dynamic range must be positive")
    mag = np.abs(img.data if isinstance(img, ComplexImage) else np.asarray(img))
    peak = mag.max()
    if peak == 0:
        levels = np.zeros(mag.shape, dtype=np.uint16)
    else:
        with np.errstate(divide="ignore"):
            db = 20 * np.log10(mag / peak)
        db = np.clip(db, -dynamic_range_db, 0.0)
        levels = np.round((db + dynamic_range_db) / dynamic_range_db * 65535).astype(np.uint16)
    header = f"P5\n{mag.shape[1]} {mag.shape[0]}\n65535\n".encode()
    _atomic_write(path, header + levels.astype(">u2").tobytes())


def read_pgm16(path: str) -> np.ndarray:
    """Read a binary 16-bit PGM written by export_magnitude."""
    with open(path, "rb") as fh:
        raw = fh.read()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise DatasetError("not a binary PGM file")
    width, height = (int(v) for v in parts[1].split())
    maxval = int(parts[2])
    if maxval != 65535:
        raise DatasetError("expected 16-bit PGM")
    data = np.frombuffer(parts[3], dtype=">u2", count=width * height)
    return data.reshape(height, width).astype(np.uint16)
