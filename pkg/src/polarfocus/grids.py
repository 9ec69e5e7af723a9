"""Spatial-frequency grids and the matrix containers defined on them.

The Cartesian grid carries an azimuth spatial frequency axis X (rad/m,
zero-centered) and a range spatial frequency axis Y (rad/m) offset by
Y0 = (4 pi sin(phi_ref) / c) * f_c.  Y0 always falls on the sample at index
len(y)//2 so that the Y0 row of any surface is sampled exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CartesianGrid:
    """Uniform (X, Y) spatial-frequency grid plus its resampling records."""

    x: np.ndarray           # rad/m, uniform, zero-centered
    y: np.ndarray           # rad/m, uniform, centered on y0
    y0: float               # rad/m
    omega: float            # rad/(m s): azimuth scaling constant of the keystone map
    center_frequency: float # Hz
    sin_phi_ref: float
    # RCM-linearization record: (slow_time, tan_theta) samples, or None for
    # synthetic grids built without a collection geometry.
    theta_map: tuple[np.ndarray, np.ndarray] | None = field(default=None)

    def __post_init__(self):
        for axis, name in ((self.x, "x"), (self.y, "y")):
            d = np.diff(axis)
            if axis.size < 2 or not np.allclose(d, d[0], rtol=1e-9):
                raise ValueError(f"{name} axis must be uniform with >= 2 samples")
        if np.any(self.y <= 0):
            raise ValueError("Y axis must stay positive (Y0 >> Y span)")
        if not np.isclose(self.y[len(self.y) // 2], self.y0, rtol=0, atol=1e-6 * abs(self.y0)):
            raise ValueError("y0 must coincide with the center Y sample")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dy(self) -> float:
        return float(self.y[1] - self.y[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x.size, self.y.size)

    @property
    def azimuth_pixel_spacing(self) -> float:
        """Image-domain azimuth pixel size: 2 pi / (X axis span)."""
        return 2 * np.pi / (self.x.size * self.dx)

    @property
    def range_pixel_spacing(self) -> float:
        return 2 * np.pi / (self.y.size * self.dy)


def grids_compatible(a: CartesianGrid, b: CartesianGrid) -> bool:
    return (
        a.x.size == b.x.size
        and a.y.size == b.y.size
        and np.allclose(a.x, b.x, rtol=1e-12, atol=0)
        and np.allclose(a.y, b.y, rtol=1e-12, atol=0)
        and np.isclose(a.y0, b.y0, rtol=1e-12)
    )


def make_centered_grid(
    nx: int,
    ny: int,
    dx: float,
    dy: float,
    y0: float,
    omega: float = 1.0,
    center_frequency: float = 0.0,
    sin_phi_ref: float = 1.0,
) -> CartesianGrid:
    """Synthetic grid helper: X zero-centered, Y centered on y0."""
    x = (np.arange(nx) - nx // 2) * dx
    y = y0 + (np.arange(ny) - ny // 2) * dy
    return CartesianGrid(
        x=x, y=y, y0=y0, omega=omega,
        center_frequency=center_frequency, sin_phi_ref=sin_phi_ref,
    )


@dataclass(frozen=True)
class CartesianSpectrum:
    """Complex samples on a CartesianGrid: rows index X, columns index Y.

    mask marks full-coverage cells; zero-filled cells (outside the recorded
    polar annulus or an interpolation guard) are False.
    """

    data: np.ndarray
    grid: CartesianGrid
    mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.data.shape != self.grid.shape:
            raise ValueError("spectrum shape does not match grid")
        if self.mask is None:
            object.__setattr__(self, "mask", np.ones(self.data.shape, dtype=bool))
        elif self.mask.shape != self.data.shape:
            raise ValueError("mask shape does not match data")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("spectrum contains non-finite samples")


@dataclass(frozen=True)
class ComplexImage:
    """Complex image (azimuth x range pixels) with its formation record."""

    data: np.ndarray
    azimuth_spacing: float   # m/pixel
    range_spacing: float     # m/pixel
    grid: CartesianGrid
    taper: str | None = None
    source_mask: np.ndarray | None = None

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ValueError("image must be 2-D")

    @property
    def azimuth_axis(self) -> np.ndarray:
        n = self.data.shape[0]
        return (np.arange(n) - n // 2) * self.azimuth_spacing

    @property
    def range_axis(self) -> np.ndarray:
        n = self.data.shape[1]
        return (np.arange(n) - n // 2) * self.range_spacing


@dataclass(frozen=True)
class PhaseErrorSurface:
    """Real phase-error samples (rad) on a CartesianGrid, zero outside mask."""

    values: np.ndarray
    grid: CartesianGrid
    mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError("surface shape does not match grid")
        if self.mask is None:
            object.__setattr__(self, "mask", np.ones(self.values.shape, dtype=bool))
        elif self.mask.shape != self.values.shape:
            raise ValueError("mask shape does not match values")
        if not np.all(np.isfinite(self.values[self.mask])):
            raise ValueError("surface contains non-finite values inside mask")
        if np.any(self.values[~self.mask] != 0):
            raise ValueError("surface must be zero outside its mask")
