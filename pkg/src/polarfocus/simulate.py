"""Point-target phase-history synthesis and controlled error injection.

The simulator produces data directly in the range-frequency domain, i.e.
after matched filtering and scene-center motion compensation.  Each matrix
element is the coherent sum over targets of

    A * exp{ j (4 pi / c) (f_c + f_r) [ sin(phi) (x sin(theta) + y cos(theta)) + r_e(t) ] }

so superposition over targets holds exactly and |S| is independent of the
injected range error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import FlightGeometry, RadarParams
from .grids import CartesianGrid, CartesianSpectrum, PhaseErrorSurface, grids_compatible

ERROR_KINDS = ("quadratic", "sinusoid", "random-walk", "tabulated")


@dataclass(frozen=True)
class TargetScene:
    """Point targets: ground positions (m) and complex reflectivities."""

    x: np.ndarray
    y: np.ndarray
    reflectivity: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        a = np.atleast_1d(np.asarray(self.reflectivity, dtype=complex))
        if not (x.shape == y.shape == a.shape):
            raise ValueError("scene arrays must share one shape")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.all(np.isfinite(a))):
            raise ValueError("scene values must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "reflectivity", a)

    @classmethod
    def from_tuples(cls, targets) -> "TargetScene":
        xs, ys, amps = zip(*targets)
        return cls(np.array(xs, float), np.array(ys, float), np.array(amps, complex))

    def __len__(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class RangeErrorProfile:
    """Range error r_e(t) in meters, sampled on a slow-time axis."""

    values: np.ndarray
    slow_time: np.ndarray
    kind: str = "tabulated"

    def __post_init__(self):
        if self.values.shape != self.slow_time.shape:
            raise ValueError("error profile must match the slow-time axis")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("error profile must be finite")


def make_error_profile(kind: str, params: dict, slow_time_axis: np.ndarray) -> RangeErrorProfile:
    """Build a deterministic range-error profile of the requested kind.

    kinds and their params:
      quadratic:   {"coefficient": kappa2}            -> kappa2 * t**2
      sinusoid:    {"amplitude": A, "cycles": k,
                    "phase": p (optional, rad)}       -> A cos(2 pi k t / T + p);
                   the default phase puts a crest on the center sample so the
                   sampled maximum equals A exactly.
      random-walk: {"step_std": s, "seed": int}       -> cumsum of N(0, s^2)
      tabulated:   {"values": array}
    """
    t = np.asarray(slow_time_axis, dtype=float)
    if kind == "quadratic":
        kappa2 = float(params["coefficient"])
        values = kappa2 * t**2
    elif kind == "sinusoid":
        amp = float(params["amplitude"])
        if amp < 0:
            raise ValueError("sinusoid amplitude must be >= 0")
        cycles = float(params["cycles"])
        phase = float(params.get("phase", 0.0))
        span = t[-1] - t[0]
        values = amp * np.cos(2 * np.pi * cycles * (t - t[t.size // 2]) / span + phase)
    elif kind == "random-walk":
        rng = np.random.default_rng(int(params["seed"]))
        steps = rng.normal(0.0, float(params["step_std"]), t.size)
        values = np.cumsum(steps)
    elif kind == "tabulated":
        values = np.asarray(params["values"], dtype=float)
        if values.shape != t.shape:
            raise ValueError("tabulated profile length must match the slow-time axis")
    else:
        raise ValueError(f"unknown error profile kind {kind!r}; expected one of {ERROR_KINDS}")
    return RangeErrorProfile(values=np.asarray(values, float), slow_time=t, kind=kind)


@dataclass(frozen=True)
class PhaseHistory:
    """Complex phase-history matrix [pulses x range frequencies]."""

    data: np.ndarray
    radar: RadarParams
    geometry: FlightGeometry

    def __post_init__(self):
        expected = (self.geometry.slow_time.size, self.radar.range_freq_samples)
        if self.data.shape != expected:
            raise ValueError(f"phase history shape {self.data.shape} != {expected}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("phase history contains non-finite samples")


def phase_history_phase(
    geometry: FlightGeometry,
    radar: RadarParams,
    x_p: float,
    y_p: float,
    r_e: np.ndarray | None = None,
) -> np.ndarray:
    """Phase matrix (rad) for one target; the building block of the sum."""
    theta = geometry.azimuth_angle
    phi = geometry.incident_angle
    r_b = np.sin(phi) * (x_p * np.sin(theta) + y_p * np.cos(theta))
    r = r_b if r_e is None else r_b + r_e
    fcfr = radar.center_frequency + radar.range_freq_axis
    return (4 * np.pi / radar.propagation_speed) * np.outer(r, fcfr)


def synth_phase_history(
    scene: TargetScene,
    geometry: FlightGeometry,
    radar: RadarParams,
    err: RangeErrorProfile | None = None,
) -> PhaseHistory:
    """Coherent sum of point-target returns with an optional range error."""
    if err is not None and err.slow_time.shape != geometry.slow_time.shape:
        raise ValueError("error profile must be sampled on the geometry's slow-time axis")
    if err is not None and not np.allclose(err.slow_time, geometry.slow_time):
        raise ValueError("error profile slow-time axis differs from the geometry's")
    r_e = None if err is None else err.values
    data = np.zeros((geometry.slow_time.size, radar.range_freq_samples), dtype=np.complex128)
    for xp, yp, amp in zip(scene.x, scene.y, scene.reflectivity):
        data += amp * np.exp(1j * phase_history_phase(geometry, radar, xp, yp, r_e))
    return PhaseHistory(data=data, radar=radar, geometry=geometry)


def inject_spectrum_error(spec: CartesianSpectrum, surface: PhaseErrorSurface) -> CartesianSpectrum:
    """Multiply a spectrum by exp(+j Phi_e); magnitudes are preserved."""
    if not grids_compatible(spec.grid, surface.grid):
        raise ValueError("surface grid does not match spectrum grid")
    data = spec.data * np.exp(1j * surface.values)
    return CartesianSpectrum(data=data, grid=spec.grid, mask=spec.mask.copy())


def ideal_point_spectrum(scene: TargetScene, grid: CartesianGrid) -> CartesianSpectrum:
    """Spectrum a perfect polar format would produce: sum of exp{j(xX + yY)}.

    Bypasses the resampling chain; used to drive estimator and pipeline
    tests without interpolation noise.
    """
    data = np.zeros(grid.shape, dtype=np.complex128)
    X = grid.x[:, None]
    Y = grid.y[None, :]
    for xp, yp, amp in zip(scene.x, scene.y, scene.reflectivity):
        data += amp * np.exp(1j * (xp * X + yp * Y))
    return CartesianSpectrum(data=data, grid=grid)


def add_noise(spec: CartesianSpectrum, image_peak_snr_db: float, seed: int) -> CartesianSpectrum:
    """Add complex white noise scaled to an image-domain peak SNR.

    The SNR is defined against the brightest pixel of the untapered image
    formed from the clean spectrum, accounting for the coherent gain of the
    2-D transform.
    """
    n_total = spec.data.size
    peak_img = np.abs(np.fft.fft2(spec.data)).max() / n_total
    # Image-domain noise std per complex sample after a unitary-normalized sum:
    # sigma_img = sigma_spec / sqrt(n_total).
    sigma_img = peak_img / 10 ** (image_peak_snr_db / 20)
    sigma_spec = sigma_img * np.sqrt(n_total)
    rng = np.random.default_rng(seed)
    noise = sigma_spec / np.sqrt(2) * (
        rng.standard_normal(spec.data.shape) + 1j * rng.standard_normal(spec.data.shape)
    )
    return CartesianSpectrum(data=spec.data + noise, grid=spec.grid, mask=spec.mask.copy())
