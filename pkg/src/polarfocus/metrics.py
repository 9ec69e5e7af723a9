"""Focus-quality metrics: entropy, contrast, impulse response width, PSLR.

All metrics are invariant to a global complex phase and to positive
scaling of the image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import ComplexImage
from .resample import fft_oversample


def _magnitude(img) -> np.ndarray:
    data = img.data if isinstance(img, ComplexImage) else np.asarray(img)
    return np.abs(data)


def image_entropy(img) -> float:
    """Shannon entropy (nats) of the normalized intensity distribution."""
    p = _magnitude(img).ravel() ** 2
    total = p.sum()
    if total == 0:
        raise ValueError("entropy undefined for an all-zero image")
    p = p / total
    nz = p > 0
    return float(-np.sum(p[nz] * np.log(p[nz])))


def image_contrast(img) -> float:
    """Ratio of intensity standard deviation to mean intensity."""
    inten = _magnitude(img).ravel() ** 2
    mean = inten.mean()
    if mean == 0:
        raise ValueError("contrast undefined for an all-zero image")
    return float(inten.std() / mean)


@dataclass(frozen=True)
class PointResponse:
    """Impulse-response measurements of one isolated point target."""

    irw_azimuth: float    # m, -3 dB width
    irw_range: float      # m
    pslr_azimuth: float   # dB, first sidelobe relative to peak
    pslr_range: float     # dB
    peak_azimuth: float   # m, sub-pixel peak position
    peak_range: float     # m


def _cut_metrics(cut: np.ndarray, spacing: float) -> tuple[float, float, float]:
    """(-3 dB width, PSLR dB, sub-sample peak position) of one response cut."""
    power = np.abs(cut) ** 2
    ipk = int(np.argmax(power))
    if ipk == 0 or ipk == power.size - 1:
        raise ValueError("response peak lies on the cut boundary")
    # parabolic sub-sample peak refinement
    y0, y1, y2 = power[ipk - 1], power[ipk], power[ipk + 1]
    denom = y0 - 2 * y1 + y2
    frac = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    peak_pos = (ipk + frac) * spacing
    half = power[ipk] / 2  # -3 dB in power

    def crossing(direction: int) -> float:
        i = ipk
        while 0 < i < power.size - 1:
            j = i + direction
            if power[j] <= half:
                # linear interpolation between i and j
                t = (power[i] - half) / (power[i] - power[j])
                return (i + direction * t) * spacing
            i = j
        raise ValueError("no -3 dB crossing found; peak not isolated")

    width = crossing(+1) - crossing(-1)

    # first local minimum outward, then the first sidelobe peak beyond it
    def sidelobe(direction: int) -> float:
        i = ipk
        while 0 < i + direction < power.size - 1 and power[i + direction] <= power[i]:
            i += direction
        lobe = 0.0
        j = i
        while 0 < j + direction < power.size - 1 and power[j + direction] >= power[j]:
            j += direction
            lobe = max(lobe, power[j])
        return lobe

    lobe = max(sidelobe(+1), sidelobe(-1))
    if lobe == 0:
        raise ValueError("no sidelobe found around the peak")
    pslr = 10 * np.log10(lobe / power[ipk])
    return float(width), float(pslr), float(peak_pos)


def point_response_metrics(
    img: ComplexImage,
    neighborhood: tuple[int, int] | None = None,
    half_size: int = 16,
    upsample: int = 16,
) -> PointResponse:
    """Measure IRW and PSLR of an isolated point response.

    A (2*half_size)^2 neighborhood around the peak (the global peak when
    `neighborhood` is None, else the given pixel) is FFT-upsampled in 2-D
    and principal cuts are taken through the refined peak.
    """
    mag = np.abs(img.data)
    if neighborhood is None:
        pk = np.unravel_index(int(np.argmax(mag)), mag.shape)
    else:
        r = half_size
        i0 = np.clip(neighborhood[0], r, mag.shape[0] - r - 1)
        j0 = np.clip(neighborhood[1], r, mag.shape[1] - r - 1)
        local = mag[i0 - r:i0 + r, j0 - r:j0 + r]
        lp = np.unravel_index(int(np.argmax(local)), local.shape)
        pk = (i0 - r + lp[0], j0 - r + lp[1])
    i, j = pk
    r = half_size
    if not (r <= i < mag.shape[0] - r and r <= j < mag.shape[1] - r):
        raise ValueError("peak too close to the image border for the requested neighborhood")
    patch = img.data[i - r:i + r, j - r:j + r]
    dense = fft_oversample(fft_oversample(patch, upsample, axis=0), upsample, axis=1)
    dpk = np.unravel_index(int(np.argmax(np.abs(dense))), dense.shape)
    az_cut = dense[:, dpk[1]]
    rg_cut = dense[dpk[0], :]
    dsa = img.azimuth_spacing / upsample
    dsr = img.range_spacing / upsample
    irw_a, pslr_a, pos_a = _cut_metrics(az_cut, dsa)
    irw_r, pslr_r, pos_r = _cut_metrics(rg_cut, dsr)
    az0 = img.azimuth_axis[i - r]
    rg0 = img.range_axis[j - r]
    return PointResponse(
        irw_azimuth=irw_a,
        irw_range=irw_r,
        pslr_azimuth=pslr_a,
        pslr_range=pslr_r,
        peak_azimuth=az0 + pos_a,
        peak_range=rg0 + pos_r,
    )


@dataclass(frozen=True)
class FocusMetrics:
    """Bundle of scalar focus scores for one image."""

    entropy: float            # nats
    contrast: float
    irw_azimuth: float | None = None
    irw_range: float | None = None
    pslr_azimuth: float | None = None
    pslr_range: float | None = None
    residual_rcm_cells: float | None = None

    def to_text(self) -> str:
        lines = [
            f"entropy_nats      {self.entropy:.6f}",
            f"contrast          {self.contrast:.6f}",
        ]
        if self.irw_azimuth is not None:
            lines.append(f"irw_azimuth_m     {self.irw_azimuth:.6f}")
            lines.append(f"irw_range_m       {self.irw_range:.6f}")
            lines.append(f"pslr_azimuth_db   {self.pslr_azimuth:.3f}")
            lines.append(f"pslr_range_db     {self.pslr_range:.3f}")
        if self.residual_rcm_cells is not None:
            lines.append(f"residual_rcm_cells {self.residual_rcm_cells:.4f}")
        return "\n".join(lines) + "\n"


def registered_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Magnitude-image correlation after integer circular registration."""
    fa = np.fft.fft2(np.abs(a))
    fb = np.fft.fft2(np.abs(b))
    xc = np.fft.ifft2(fa * np.conj(fb))
    shift = np.unravel_index(int(np.argmax(np.abs(xc))), xc.shape)
    bb = np.roll(np.abs(b), shift, axis=(0, 1))
    aa = np.abs(a)
    num = float(np.sum(aa * bb))
    den = float(np.sqrt(np.sum(aa**2) * np.sum(bb**2)))
    return num / den if den else 0.0
