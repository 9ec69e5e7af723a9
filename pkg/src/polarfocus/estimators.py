"""1-D error estimators: phase gradient autofocus for the azimuth phase
error and range-profile alignment for the residual range migration, plus
the coarse-range preprocessing that keeps PGA valid when the migration
exceeds a fine range cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .error_structure import APEProfile, RCMProfile
from .grids import CartesianGrid, CartesianSpectrum, ComplexImage
from .polar_format import RangeCompressedData, form_image
from .resample import fourier_shift


@dataclass(frozen=True)
class PgaConfig:
    max_iterations: int = 10
    initial_window: int = 64        # px, lower bound on the first window
    window_shrink: float = 0.7      # per-iteration multiplier
    window_floor: int = 8           # px
    snr_floor_db: float = 12.0      # bin admission threshold
    target_bins: int = 12
    convergence_rms: float = 0.05   # rad, stop when the update drops below

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 < self.window_shrink < 1:
            raise ValueError("window_shrink must lie in (0, 1)")


@dataclass(frozen=True)
class RcmConfig:
    reference: str = "running-mean"  # or "first"
    upsample: int = 8
    smoothing_degree: int = 8        # polynomial degree; 0 disables smoothing
    sharpness_floor: float = 3.0     # correlation peak / rms admission ratio

    def __post_init__(self):
        if self.upsample < 4:
            raise ValueError("upsample must be >= 4")
        if self.reference not in ("running-mean", "first"):
            raise ValueError("reference must be 'running-mean' or 'first'")


@dataclass(frozen=True)
class EstimatorConfig:
    pga: PgaConfig = field(default_factory=PgaConfig)
    rcm: RcmConfig = field(default_factory=RcmConfig)


@dataclass(frozen=True)
class EstimateDiagnostics:
    rms_updates: tuple = ()         # rad per PGA iteration
    selected_bins: tuple = ()
    peak_sharpness: tuple = ()      # per-profile correlation sharpness
    converged: bool = True
    low_confidence: bool = False


def coarse_range_preprocess(spec: CartesianSpectrum, factor: int) -> ComplexImage:
    """Form an image from the central 1/factor of the Y band.

    Range resolution coarsens by `factor` while azimuth is untouched, so a
    residual migration of several fine cells stays within one coarse cell
    and conventional PGA applies.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    ny = spec.grid.y.size
    if ny % factor != 0:
        raise ValueError(f"factor {factor} does not divide the Y sample count {ny}")
    keep = ny // factor
    if keep < 32:
        raise ValueError(f"factor {factor} leaves {keep} Y samples (< 32)")
    if factor == 1:
        return form_image(spec)
    iy0 = ny // 2
    lo = iy0 - keep // 2
    sl = slice(lo, lo + keep)
    grid = spec.grid
    sub = CartesianGrid(
        x=grid.x.copy(),
        y=grid.y[sl].copy(),
        y0=grid.y0,
        omega=grid.omega,
        center_frequency=grid.center_frequency,
        sin_phi_ref=grid.sin_phi_ref,
        theta_map=grid.theta_map,
    )
    return form_image(CartesianSpectrum(data=spec.data[:, sl], grid=sub, mask=spec.mask[:, sl]))


def _cdft_axis0(a: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.fft(np.fft.ifftshift(a, axes=0), axis=0), axes=0)


def _icdft_axis0(a: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(a, axes=0), axis=0), axes=0)


def _select_bins(mag: np.ndarray, cfg: PgaConfig) -> tuple[np.ndarray, bool]:
    """Pick range bins with a dominant scatterer above the SNR floor.

    When fewer than target_bins qualify (e.g. heavy defocus smears every
    peak), the shortfall is filled with the highest-energy bins and the
    result is flagged low-confidence; the estimate is then best-effort
    rather than empty.
    """
    n_az, n_rg = mag.shape
    peaks = mag.max(axis=0)
    peak_idx = mag.argmax(axis=0)
    snr = np.full(n_rg, -np.inf)
    for b in range(n_rg):
        if peaks[b] == 0:
            continue
        lo = max(0, peak_idx[b] - 16)
        hi = min(n_az, peak_idx[b] + 17)
        rest = np.concatenate([mag[:lo, b], mag[hi:, b]])
        rms = np.sqrt(np.mean(rest**2)) if rest.size else 0.0
        snr[b] = 20 * np.log10(peaks[b] / rms) if rms > 0 else np.inf
    qualified = np.flatnonzero(snr >= cfg.snr_floor_db)
    order = qualified[np.argsort(peaks[qualified])[::-1]][: cfg.target_bins]
    low_confidence = order.size < cfg.target_bins
    if low_confidence:
        energy = (mag**2).sum(axis=0)
        energy[order] = -1.0  # already chosen
        extra = np.argsort(energy)[::-1][: cfg.target_bins - order.size]
        extra = extra[energy[extra] > 0]
        order = np.concatenate([order, extra])
    return order, low_confidence


def _ten_db_width(energy: np.ndarray) -> int:
    """Contiguous width (px) of the region around the center above -10 dB."""
    n = energy.size
    center = n // 2
    ipk = center - 8 + int(np.argmax(energy[center - 8:center + 8])) if n > 16 else center
    thresh = energy[ipk] / 10.0
    lo = ipk
    while lo > 0 and energy[lo - 1] >= thresh:
        lo -= 1
    hi = ipk
    while hi < n - 1 and energy[hi + 1] >= thresh:
        hi += 1
    return hi - lo + 1


def estimate_ape_pga(
    img: ComplexImage, cfg: PgaConfig | EstimatorConfig | None = None
) -> tuple[APEProfile, EstimateDiagnostics]:
    """Phase gradient autofocus on a complex image.

    Classic loop per iteration: circularly shift the brightest pixel of
    each selected range bin to the azimuth center, window, transform to the
    azimuth spatial-frequency domain, estimate the phase gradient as the
    argument of the magnitude-weighted sum of conjugate-lagged products
    across bins, integrate, remove the affine component, and apply the
    correction.  Stops when the rms update falls below the configured
    threshold.  Returns the accumulated error estimate on the grid's X
    axis; too few qualifying bins lowers confidence but is not an error.
    """
    if cfg is None:
        cfg = PgaConfig()
    elif isinstance(cfg, EstimatorConfig):
        cfg = cfg.pga
    data = img.data.copy()
    n_az = data.shape[0]
    x_axis = img.grid.x
    if img.source_mask is not None and img.source_mask.any():
        row_valid = img.source_mask.all(axis=1)
    else:
        row_valid = np.ones(n_az, dtype=bool)
    # gradient lags touching partially-covered X rows are unreliable
    lag_valid = row_valid[1:] & row_valid[:-1]
    bins, low_confidence = _select_bins(np.abs(data), cfg)
    if bins.size == 0:
        zero = APEProfile(values=np.zeros(n_az), x=x_axis.copy())
        return zero, EstimateDiagnostics(
            rms_updates=(), selected_bins=(), converged=False, low_confidence=True
        )

    total = np.zeros(n_az)
    rms_updates = []
    window = None
    converged = False
    for it in range(cfg.max_iterations):
        cols = data[:, bins]
        shifts = n_az // 2 - np.abs(cols).argmax(axis=0)
        rolled = np.empty_like(cols)
        for k in range(cols.shape[1]):
            rolled[:, k] = np.roll(cols[:, k], shifts[k])
        if window is None:
            energy = np.sum(np.abs(rolled) ** 2, axis=1)
            window = max(cfg.initial_window, _ten_db_width(energy))
            window = min(window, n_az)
        width = max(cfg.window_floor, int(round(window * cfg.window_shrink**it)))
        width = min(width, n_az)
        w = np.zeros(n_az)
        lo = n_az // 2 - width // 2
        w[lo:lo + width] = 1.0
        g = _icdft_axis0(rolled * w[:, None])
        num = np.sum(g[1:, :] * np.conj(g[:-1, :]), axis=1)
        grad = np.zeros(n_az)
        grad[1:] = np.where(lag_valid, np.angle(num), 0.0)
        phi = np.cumsum(grad)
        slope, intercept = np.polyfit(x_axis, phi, 1)
        phi -= intercept + slope * x_axis
        spec = _icdft_axis0(data)
        spec *= np.exp(-1j * phi)[:, None]
        data = _cdft_axis0(spec)
        total += phi
        rms = float(np.sqrt(np.mean(phi**2)))
        rms_updates.append(rms)
        if rms < cfg.convergence_rms:
            converged = True
            break
    profile = APEProfile(values=total, x=x_axis.copy())
    diag = EstimateDiagnostics(
        rms_updates=tuple(rms_updates),
        selected_bins=tuple(int(b) for b in bins),
        converged=converged,
        low_confidence=low_confidence,
    )
    return profile, diag


def _correlation_shift(ref: np.ndarray, prof: np.ndarray, upsample: int) -> tuple[float, float]:
    """Sub-cell displacement of prof relative to ref and peak sharpness.

    Positive shift means prof's features sit at higher range index than the
    reference's.  Uses an FFT cross-correlation evaluated on an upsampled
    lag grid with parabolic peak refinement.
    """
    n = ref.size
    m = n * upsample
    fr = np.fft.fft(ref)
    fp = np.fft.fft(prof)
    cross = np.conj(fr) * fp
    dense = np.zeros(m, dtype=np.complex128)
    half = (n + 1) // 2
    dense[:half] = cross[:half]
    dense[m - (n - half):] = cross[half:]
    corr = np.fft.ifft(dense).real * upsample
    ipk = int(np.argmax(corr))
    y0, y1, y2 = corr[ipk - 1], corr[ipk], corr[(ipk + 1) % m]
    denom = y0 - 2 * y1 + y2
    frac = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    lag = (ipk + frac) / upsample
    if lag > n / 2:
        lag -= n
    rms = np.sqrt(np.mean(corr**2))
    sharpness = float(corr[ipk] / rms) if rms > 0 else np.inf
    return float(lag), sharpness


def estimate_rcm(
    rc: RangeCompressedData, cfg: RcmConfig | EstimatorConfig | None = None
) -> tuple[RCMProfile, EstimateDiagnostics]:
    """Residual range migration from magnitude range-profile alignment.

    Every azimuth position's magnitude profile is correlated against the
    reference (running mean of previously aligned profiles by default), the
    correlation peak is located to sub-cell precision, the accumulated
    shifts are smoothed with the configured polynomial, and the constant
    and linear components are removed (they cannot defocus the image).
    Rows without full Y coverage are excluded from the fits (their
    apodized profiles bias the correlation) but still receive smoothed
    values.  Values are returned in meters on the grid's X axis.
    """
    if cfg is None:
        cfg = RcmConfig()
    elif isinstance(cfg, EstimatorConfig):
        cfg = cfg.rcm
    mags = np.abs(rc.data)
    n_prof = mags.shape[0]
    if n_prof < 2:
        raise ValueError("need at least two range profiles")
    if np.all(mags.sum(axis=1) == 0):
        raise ValueError("degenerate (all-zero) range profiles")
    valid = rc.row_valid if rc.row_valid is not None else np.ones(n_prof, dtype=bool)
    if valid.sum() < 2:
        valid = np.ones(n_prof, dtype=bool)

    first = int(np.flatnonzero(valid)[0])
    shifts = np.zeros(n_prof)
    sharpness = np.zeros(n_prof)
    ref = mags[first].astype(float)
    ref_sum = ref.copy()
    count = 1
    sharpness[first] = np.inf
    for i in range(n_prof):
        if i == first:
            continue
        d, s = _correlation_shift(ref, mags[i], cfg.upsample)
        shifts[i] = d
        sharpness[i] = s
        if cfg.reference == "running-mean" and valid[i]:
            aligned = np.real(fourier_shift(mags[i], -d))
            ref_sum += aligned
            count += 1
            ref = ref_sum / count

    if cfg.smoothing_degree > 0:
        fit = np.polynomial.Polynomial.fit(rc.x[valid], shifts[valid], cfg.smoothing_degree)
        smooth = fit(rc.x)
    else:
        smooth = shifts
    slope, intercept = np.polyfit(rc.x[valid], smooth[valid], 1)
    smooth = smooth - (intercept + slope * rc.x)
    values = smooth * rc.range_spacing

    finite_sharp = sharpness[np.isfinite(sharpness)]
    frac_poor = float(np.mean(finite_sharp < cfg.sharpness_floor)) if finite_sharp.size else 1.0
    diag = EstimateDiagnostics(
        peak_sharpness=tuple(float(s) for s in sharpness),
        converged=True,
        low_confidence=frac_poor > 0.20,
    )
    return RCMProfile(values=values, x=rc.x.copy()), diag
