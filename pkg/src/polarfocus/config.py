"""JSON run-configuration: schema defaults, builders, and hashing.

A single config file drives the CLI chain (simulate -> pfa -> autofocus ->
metrics).  Every key has a default; unknown keys are rejected so typos
fail loudly.  The config hash recorded in dataset provenance is the
SHA-256 of the canonicalized JSON with the effective seed folded in.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .estimators import EstimatorConfig, PgaConfig, RcmConfig
from .geometry import FlightGeometry, RadarParams, make_linear_geometry
from .pipeline import PipelineConfig
from .simulate import RangeErrorProfile, TargetScene, make_error_profile

DEFAULTS = {
    "seed": 0,
    "radar": {
        "center_frequency": 1.0e10,
        "bandwidth": 6.0e8,
        "range_freq_samples": 1024,
        "pulse_count": 4095,
        "propagation_speed": 299792458.0,
    },
    "geometry": {
        "velocity": 120.0,
        "altitude": 0.0,
        "slant_range": 8000.0,
        "squint_deg": 3.0,
        "aperture_length": 450.0,
    },
    "scene": {
        "targets": [],          # explicit [x_m, y_m, amplitude] triples
        "grid": None,           # or {"nx","ny","spacing_x","spacing_y","skew","amplitude"}
    },
    "error": {
        "kind": None,           # quadratic | sinusoid | random-walk | tabulated | None
        "params": {},
        "components": [],       # optional list of {kind, params}, summed with the above
    },
    "noise": {
        "image_peak_snr_db": None,
    },
    "grid": {
        "nx": 1024,
        "ny": 1024,
        "margin": 0.02,
        "taps": 8,
        "oversample": 16,
    },
    "pipeline": {
        "coarse_rcm_stage": True,
        "fine_ape_stage": True,
        "outer_iterations": 1,
        "coarse_factor": 4,
        "taper": None,
        "prior2d_fit_degree": 12,
        "pga": {
            "max_iterations": 10,
            "initial_window": 64,
            "window_shrink": 0.7,
            "window_floor": 8,
            "snr_floor_db": 12.0,
            "target_bins": 12,
            "convergence_rms": 0.05,
        },
        "rcm": {
            "reference": "running-mean",
            "upsample": 8,
            "smoothing_degree": 8,
            "sharpness_floor": 3.0,
        },
    },
}


class ConfigError(ValueError):
    """Malformed or unknown configuration content."""


def _merge(defaults, override, path=""):
    if not isinstance(override, dict):
        raise ConfigError(f"expected a table at {path or 'top level'}")
    merged = {}
    for key, dval in defaults.items():
        if key in override:
            oval = override[key]
            if isinstance(dval, dict) and dval and not key == "params":
                merged[key] = _merge(dval, oval, f"{path}{key}.")
            else:
                merged[key] = oval
        else:
            merged[key] = dval
    unknown = set(override) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config keys at {path or 'top level'}: {sorted(unknown)}")
    return merged


def load_config(path: str, seed_override: int | None = None) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON config {path}: {exc}") from exc
    cfg = _merge(DEFAULTS, raw)
    if seed_override is not None:
        cfg["seed"] = int(seed_override)
    return cfg


def hash_config(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def build_radar(cfg: dict) -> RadarParams:
    return RadarParams(**cfg["radar"])


def build_geometry(cfg: dict, radar: RadarParams) -> FlightGeometry:
    g = cfg["geometry"]
    return make_linear_geometry(
        radar,
        velocity=g["velocity"],
        altitude=g["altitude"],
        scene_center_slant_range=g["slant_range"],
        squint=np.deg2rad(g["squint_deg"]),
        aperture_length=g["aperture_length"],
    )


def build_scene(cfg: dict) -> TargetScene:
    s = cfg["scene"]
    triples = [tuple(t) for t in s["targets"]]
    if s["grid"] is not None:
        g = s["grid"]
        amp = g.get("amplitude", 1.0)
        skew = g.get("skew", 0.0)
        for i in range(g["nx"]):
            for j in range(g["ny"]):
                x = (i - (g["nx"] - 1) / 2) * g["spacing_x"]
                y = (j - (g["ny"] - 1) / 2) * g["spacing_y"] + i * skew
                triples.append((x, y, amp))
    if not triples:
        raise ConfigError("scene defines no targets")
    return TargetScene.from_tuples(triples)


def build_error(cfg: dict, slow_time: np.ndarray) -> RangeErrorProfile | None:
    e = cfg["error"]
    parts = []
    if e["kind"] is not None:
        parts.append({"kind": e["kind"], "params": e["params"]})
    parts.extend(e["components"])
    if not parts:
        return None
    profiles = []
    for part in parts:
        params = dict(part["params"])
        if part["kind"] == "random-walk":
            params.setdefault("seed", cfg["seed"])
        profiles.append(make_error_profile(part["kind"], params, slow_time))
    if len(profiles) == 1:
        return profiles[0]
    total = np.sum([p.values for p in profiles], axis=0)
    return make_error_profile("tabulated", {"values": total}, slow_time)


def build_pipeline_config(cfg: dict) -> PipelineConfig:
    p = cfg["pipeline"]
    est = EstimatorConfig(pga=PgaConfig(**p["pga"]), rcm=RcmConfig(**p["rcm"]))
    return PipelineConfig(
        coarse_rcm_stage=p["coarse_rcm_stage"],
        fine_ape_stage=p["fine_ape_stage"],
        estimators=est,
        outer_iterations=p["outer_iterations"],
        coarse_factor=p["coarse_factor"],
        taper=p["taper"],
        prior2d_fit_degree=p["prior2d_fit_degree"],
    )
