"""Radar parameters and spotlight collection geometry.

Coordinates: the scene center is the origin, z is up, and the ground-plane
Y axis points along the ground projection of the aperture-center line of
sight.  The azimuth angle theta is measured in the ground plane from +Y
(so theta(0) = 0 by construction), and the incident angle phi is measured
from the vertical.  The antenna phase center therefore sits at

    (x, y, z) = r_c * (sin(phi) sin(theta), sin(phi) cos(theta), cos(phi)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import speed_of_light


@dataclass(frozen=True)
class RadarParams:
    """Waveform constants and the recorded range-frequency axis."""

    center_frequency: float        # Hz
    bandwidth: float               # Hz
    range_freq_samples: int
    pulse_count: int
    propagation_speed: float = speed_of_light

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.center_frequency <= self.bandwidth / 2:
            raise ValueError("center frequency must exceed half the bandwidth")
        if self.range_freq_samples < 2 or self.pulse_count < 2:
            raise ValueError("need at least two samples per axis")

    @property
    def wavelength(self) -> float:
        return self.propagation_speed / self.center_frequency

    @property
    def range_freq_axis(self) -> np.ndarray:
        """Uniform axis spanning [-B/2, +B/2], centered at zero."""
        return np.linspace(-self.bandwidth / 2, self.bandwidth / 2, self.range_freq_samples)


@dataclass(frozen=True)
class FlightGeometry:
    """Sampled antenna-phase-center track with derived viewing angles."""

    slow_time: np.ndarray          # s, uniform
    apc_position: np.ndarray       # (n, 3) m
    scene_center_range: np.ndarray # m
    azimuth_angle: np.ndarray      # rad, theta(t)
    incident_angle: np.ndarray     # rad, phi(t)
    squint_angle: float            # rad
    reference_incident: float      # rad, phi at t = 0
    velocity: float = field(default=0.0)

    def __post_init__(self):
        n = self.slow_time.shape[0]
        if self.apc_position.shape != (n, 3):
            raise ValueError("apc_position must be (n, 3)")
        if np.any(self.scene_center_range <= 0):
            raise ValueError("scene-center range must stay positive")
        th, ph, rc = angles_from_positions(self.apc_position)
        for stored, recomputed, name in (
            (self.azimuth_angle, th, "azimuth"),
            (self.incident_angle, ph, "incident"),
            (self.scene_center_range, rc, "range"),
        ):
            if not np.allclose(stored, recomputed, rtol=1e-12, atol=1e-12):
                raise ValueError(f"stored {name} samples inconsistent with positions")

    @property
    def sin_phi_ref(self) -> float:
        return float(np.sin(self.reference_incident))


def angles_from_positions(apc: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Recover (theta, phi, r_c) from APC positions."""
    x, y, z = apc[:, 0], apc[:, 1], apc[:, 2]
    ground = np.hypot(x, y)
    r_c = np.sqrt(ground**2 + z**2)
    theta = np.arctan2(x, y)
    phi = np.arctan2(ground, z)
    return theta, phi, r_c


def make_linear_geometry(
    radar: RadarParams,
    velocity: float,
    altitude: float,
    scene_center_slant_range: float,
    squint: float,
    aperture_length: float,
    pulse_count: int | None = None,
) -> FlightGeometry:
    """Constant-velocity straight-line collection.

    The platform flies a level straight path; at the aperture center (t = 0)
    the slant range to the scene center equals scene_center_slant_range and
    the ground-projected line of sight defines +Y.  The squint angle is the
    ground-plane angle between that line of sight and broadside, so squint=0
    puts t = 0 at the point of closest approach.  An odd pulse_count samples
    t = 0 exactly.
    """
    if velocity <= 0 or aperture_length <= 0 or scene_center_slant_range <= 0:
        raise ValueError("velocity, aperture length and slant range must be positive")
    if altitude < 0:
        raise ValueError("altitude cannot be negative")
    if altitude >= scene_center_slant_range:
        raise ValueError("geometry degenerate: slant range must exceed altitude")
    if abs(squint) >= np.pi / 2:
        raise ValueError("squint must lie in (-pi/2, pi/2)")
    n = radar.pulse_count if pulse_count is None else pulse_count
    if n < 2:
        raise ValueError("need at least two pulses")

    ground0 = np.sqrt(scene_center_slant_range**2 - altitude**2)
    duration = aperture_length / velocity
    t = np.linspace(-duration / 2, duration / 2, n)
    heading = np.array([np.cos(squint), -np.sin(squint), 0.0])
    apc = np.array([0.0, ground0, altitude]) + velocity * t[:, None] * heading[None, :]
    if np.any(apc[:, 1] <= 0):
        raise ValueError("aperture subtends too much azimuth for this squint")
    theta, phi, r_c = angles_from_positions(apc)
    if np.any(np.abs(theta) >= np.pi / 2):
        raise ValueError("aperture subtends >= 180 degrees of azimuth")
    phi_ref = float(np.arctan2(ground0, altitude))
    return FlightGeometry(
        slow_time=t,
        apc_position=apc,
        scene_center_range=r_c,
        azimuth_angle=theta,
        incident_angle=phi,
        squint_angle=float(squint),
        reference_incident=phi_ref,
        velocity=float(velocity),
    )
