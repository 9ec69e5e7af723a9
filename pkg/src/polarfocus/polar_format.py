"""Polar reformatting of squint-mode phase history and 2-D image formation.

The reformatting follows the two-pass decomposition:

  1. range pass (per pulse): frequency scaling by
     delta_r = sin(phi_ref) / (sin(phi) cos(theta)) with offset
     f_c (delta_r - 1), which turns the basic imaging term into
     x tan(theta) + y;
  2. azimuth pass (per range-frequency column): the composition of the
     tan(theta) linearization t -> theta_a(t) and the keystone scaling
     t -> f_c t / (f_c + f_r).  Per output cell the two maps collapse to a
     single request tan(theta) = X / Y, which is the polar-raster view of
     the same operation.

Both passes are 1-D windowed-sinc interpolations on FFT-oversampled data.
Requests outside the recorded support are zero-filled and excluded from the
coverage mask; grids produced by design_grid stay inside the support by
construction, so their masks are fully true.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.ndimage import minimum_filter1d

from .geometry import FlightGeometry, RadarParams
from .grids import CartesianGrid, CartesianSpectrum, ComplexImage
from .resample import resample_columns, resample_rows
from .simulate import PhaseHistory

TAPERS = (None, "hann", "hamming")


def _taper_window(name: str | None, n: int) -> np.ndarray:
    if name is None:
        return np.ones(n)
    if name == "hann":
        return np.hanning(n)
    if name == "hamming":
        return np.hamming(n)
    raise ValueError(f"unknown taper {name!r}; expected one of {TAPERS}")


def _range_scaling(geometry: FlightGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Per-pulse frequency scaling delta_r and offset f-independent part."""
    sin_phi_ref = geometry.sin_phi_ref
    delta_r = sin_phi_ref / (np.sin(geometry.incident_angle) * np.cos(geometry.azimuth_angle))
    return delta_r, delta_r - 1.0


def design_grid(
    ph: PhaseHistory,
    nx: int = 1024,
    ny: int = 1024,
    margin: float = 0.02,
    taps: int = 8,
) -> CartesianGrid:
    """Choose a Cartesian grid inscribed in the recorded polar annulus.

    Axis spans are shrunk so that every output cell of both resampling
    passes stays inside the recorded band and aperture with a kernel guard,
    which keeps the coverage mask fully true.
    """
    radar, geom = ph.radar, ph.geometry
    c = radar.propagation_speed
    sin_phi_ref = geom.sin_phi_ref
    y0 = 4 * np.pi * sin_phi_ref / c * radar.center_frequency

    f_in = radar.range_freq_axis
    df = f_in[1] - f_in[0]
    guard_f = taps * df
    delta_r, off = _range_scaling(geom)
    f_lo = np.max((f_in[0] + guard_f - radar.center_frequency * off) / delta_r)
    f_hi = np.min((f_in[-1] - guard_f - radar.center_frequency * off) / delta_r)
    if f_hi <= 0 or f_lo >= 0:
        raise ValueError("usable range-frequency band does not bracket f_c")
    y_half = (1 - margin) * (4 * np.pi * sin_phi_ref / c) * min(-f_lo, f_hi)
    dy = 2 * y_half / ny
    y = y0 + (np.arange(ny) - ny // 2) * dy

    t = geom.slow_time
    dt = t[1] - t[0]
    tan_theta = np.tan(geom.azimuth_angle)
    if np.any(np.diff(tan_theta) <= 0):
        raise ValueError("azimuth angle must be strictly increasing over the aperture")
    guard_t = taps * dt
    tan_lo = np.interp(t[0] + guard_t, t, tan_theta)
    tan_hi = np.interp(t[-1] - guard_t, t, tan_theta)
    if not (tan_lo < 0 < tan_hi):
        raise ValueError("aperture must bracket theta = 0")
    x_half = (1 - margin) * y.min() / y0 * y0 * min(-tan_lo, tan_hi)
    dx = 2 * x_half / nx
    x = (np.arange(nx) - nx // 2) * dx

    omega = tan_theta[-1] / t[-1]
    return CartesianGrid(
        x=x,
        y=y,
        y0=y0,
        omega=float(omega),
        center_frequency=radar.center_frequency,
        sin_phi_ref=sin_phi_ref,
        theta_map=(t.copy(), tan_theta),
    )


@dataclass(frozen=True)
class RangeResampledHistory:
    """Phase history after the range pass: pulses x grid-Y samples."""

    data: np.ndarray
    mask: np.ndarray
    grid: CartesianGrid
    radar: RadarParams
    geometry: FlightGeometry


def range_resample(
    ph: PhaseHistory,
    grid: CartesianGrid | None = None,
    nx: int = 1024,
    ny: int = 1024,
    taps: int = 8,
    oversample: int = 16,
    margin: float = 0.02,
) -> RangeResampledHistory:
    """Range-frequency scaling pass onto the grid's Y axis.

    Per pulse, the output sample representing range frequency f is the
    recorded pulse interpolated at delta_r * f + f_c (delta_r - 1).
    """
    if grid is None:
        grid = design_grid(ph, nx=nx, ny=ny, margin=margin, taps=taps)
    radar, geom = ph.radar, ph.geometry
    c = radar.propagation_speed
    f_target = grid.y * c / (4 * np.pi * grid.sin_phi_ref) - radar.center_frequency
    f_in = radar.range_freq_axis
    df = f_in[1] - f_in[0]
    delta_r, off = _range_scaling(geom)
    f_src = delta_r[:, None] * f_target[None, :] + radar.center_frequency * off[:, None]
    positions = (f_src - f_in[0]) / df
    data, valid = resample_rows(ph.data, positions, taps=taps, oversample=oversample)
    return RangeResampledHistory(data=data, mask=valid, grid=grid, radar=radar, geometry=geom)


def azimuth_resample(
    rr: RangeResampledHistory,
    taps: int = 8,
    oversample: int = 16,
) -> CartesianSpectrum:
    """Combined tan(theta) linearization + keystone pass onto the X axis.

    Column by column (fixed Y), the output at X is the range-resampled data
    evaluated at the slow time where tan(theta(t)) = X / Y.
    """
    grid = rr.grid
    t = rr.geometry.slow_time
    dt = t[1] - t[0]
    tan_theta = np.tan(rr.geometry.azimuth_angle)
    if np.any(np.diff(tan_theta) <= 0):
        raise ValueError("azimuth angle must be strictly increasing over the aperture")
    t_of_tan = PchipInterpolator(tan_theta, t, extrapolate=False)

    tan_req = grid.x[:, None] / grid.y[None, :]
    t_req = t_of_tan(tan_req)  # NaN outside aperture
    positions = (t_req - t[0]) / dt

    data, valid = resample_columns(rr.data, positions, taps=taps, oversample=oversample)

    # A cell is covered only if the pulses under its kernel footprint were
    # themselves fully covered by the range pass.
    eroded = minimum_filter1d(rr.mask.astype(np.uint8), size=taps + 1, axis=0)
    idx = np.clip(np.round(np.nan_to_num(positions)).astype(int), 0, t.size - 1)
    mask = valid & (eroded[idx, np.arange(grid.y.size)[None, :]] > 0)
    data = np.where(mask, data, 0.0)
    return CartesianSpectrum(data=data, grid=grid, mask=mask)


def polar_format(
    ph: PhaseHistory,
    grid: CartesianGrid | None = None,
    nx: int = 1024,
    ny: int = 1024,
    taps: int = 8,
    oversample: int = 16,
    margin: float = 0.02,
) -> CartesianSpectrum:
    """Full polar reformat: range pass then azimuth pass."""
    rr = range_resample(ph, grid=grid, nx=nx, ny=ny, taps=taps, oversample=oversample, margin=margin)
    return azimuth_resample(rr, taps=taps, oversample=oversample)


def coverage_crop(spec: CartesianSpectrum) -> CartesianSpectrum:
    """Restrict to the largest centered X band whose rows are fully covered.

    Metrics are defined inside full-coverage regions; this trims the
    keystone corners (and any cells later stages could not process) while
    keeping X = 0 on the center sample.
    """
    ok = spec.mask.all(axis=1)
    if ok.all():
        return spec
    nx = spec.grid.x.size
    ic = nx // 2
    k = 0
    while ic - k - 1 >= 0 and ic + k < nx and ok[ic - k - 1] and ok[ic + k]:
        k += 1
    if k < 2:
        raise ValueError("no centered fully-covered X band")
    sl = slice(ic - k, ic + k)
    g = spec.grid
    sub = CartesianGrid(
        x=g.x[sl].copy(), y=g.y.copy(), y0=g.y0, omega=g.omega,
        center_frequency=g.center_frequency, sin_phi_ref=g.sin_phi_ref,
        theta_map=g.theta_map,
    )
    return CartesianSpectrum(data=spec.data[sl, :], grid=sub, mask=spec.mask[sl, :])


def _centered_fft2(a: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(a)))


def _centered_ifft2(a: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(a)))


def form_image(spec: CartesianSpectrum, taper: str | None = None) -> ComplexImage:
    """2-D Fourier image with an optional separable taper.

    Image pixel (k, l) sits at x = (k - nx/2) * 2 pi / (nx dX) meters in
    azimuth and the analogous y in range, so a spectrum phase x0 X + y0 Y
    peaks at the pixel nearest (x0, y0).
    """
    grid = spec.grid
    wx = _taper_window(taper, grid.x.size)
    wy = _taper_window(taper, grid.y.size)
    data = _centered_fft2(spec.data * wx[:, None] * wy[None, :])
    return ComplexImage(
        data=data,
        azimuth_spacing=grid.azimuth_pixel_spacing,
        range_spacing=grid.range_pixel_spacing,
        grid=grid,
        taper=taper,
        source_mask=spec.mask.copy(),
    )


def unform_image(img: ComplexImage) -> CartesianSpectrum:
    """Exact inverse of form_image; taper divided out on its support.

    Cells where the recorded taper is zero cannot be recovered; they are
    zeroed and dropped from the returned coverage mask.
    """
    grid = img.grid
    wx = _taper_window(img.taper, grid.x.size)
    wy = _taper_window(img.taper, grid.y.size)
    w = wx[:, None] * wy[None, :]
    spec = _centered_ifft2(img.data)
    support = w != 0
    spec = np.where(support, spec / np.where(support, w, 1.0), 0.0)
    mask = support if img.source_mask is None else (img.source_mask & support)
    spec = np.where(mask, spec, 0.0)
    return CartesianSpectrum(data=spec, grid=grid, mask=mask)


@dataclass(frozen=True)
class RangeCompressedData:
    """Spectrum transformed along Y only: azimuth spatial frequency x range pixels."""

    data: np.ndarray
    x: np.ndarray             # rad/m, the grid X axis
    range_spacing: float      # m/pixel
    grid: CartesianGrid
    row_valid: np.ndarray     # X rows with full Y coverage


def range_compress(spec: CartesianSpectrum) -> RangeCompressedData:
    """Range-compressed view used by migration estimation (Y-axis DFT only)."""
    data = np.fft.fftshift(
        np.fft.fft(np.fft.ifftshift(spec.data, axes=1), axis=1), axes=1
    )
    return RangeCompressedData(
        data=data,
        x=spec.grid.x.copy(),
        range_spacing=spec.grid.range_pixel_spacing,
        grid=spec.grid,
        row_valid=spec.mask.all(axis=1),
    )
