"""Analytic structure of the post-reformatting 2-D phase error.

After polar reformatting, a range error r_e(t) leaves a residual phase
error of the form Phi_e(X, Y) = Y * xi(X / Y) for a single 1-D function xi.
Everything in this module follows from that structure:

  * its Taylor expansion in (Y - Y0) gives the azimuth phase error phi0(X),
    the residual range migration phi1(X) (meters) and the range-defocus
    coefficient phi2(X);
  * the full surface can be rebuilt from phi0 alone
    (Phi_e = (Y/Y0) phi0((Y0/Y) X)) or from phi1 alone
    (Phi_e = -X Y int phi1((Y0/Y) X) / X^2 dX up to a linear-in-X term);
  * span limits on phi0 / phi1 / phi2 decide whether no autofocus, 1-D,
    2-D, or accurate 2-D autofocus is required.

Affine pieces of phi0 and the constant of phi1 map to planes in (X, Y),
i.e. pure image shifts, so mapping outputs are defined up to a plane and
are detrended accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

from .grids import CartesianGrid, PhaseErrorSurface


class StructureMismatchError(ValueError):
    """Surface is not of the Y * xi(X/Y) form within tolerance."""

    def __init__(self, residual_rms: float, tolerance: float):
        self.residual_rms = residual_rms
        self.tolerance = tolerance
        super().__init__(
            f"Taylor reconstruction residual {residual_rms:.3g} rad rms exceeds "
            f"{tolerance:.3g} rad: surface lacks the polar-format error structure"
        )


@dataclass(frozen=True)
class APEProfile:
    """Azimuth phase error phi0(X) in radians on the grid's X axis."""

    values: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.x.shape:
            raise ValueError("profile and axis shapes differ")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile must be finite")


@dataclass(frozen=True)
class RCMProfile:
    """Residual range migration phi1(X) in meters on the grid's X axis."""

    values: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.x.shape:
            raise ValueError("profile and axis shapes differ")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile must be finite")


@dataclass(frozen=True)
class TaylorCoeffs:
    """Order 0..2 coefficients of the (Y - Y0) expansion, sampled on X."""

    phi0: np.ndarray          # rad
    phi1: np.ndarray          # m
    phi2: np.ndarray          # rad / (rad/m)^2
    x: np.ndarray
    residual_rms: float       # rad, three-term reconstruction residual


def _check_axis(profile_x: np.ndarray, grid: CartesianGrid) -> None:
    if profile_x.shape != grid.x.shape or not np.allclose(profile_x, grid.x, rtol=1e-12, atol=0):
        raise ValueError("profile is not sampled on the grid's X axis")


def _derivative4(values: np.ndarray, h: float) -> np.ndarray:
    """First derivative on a uniform grid, fourth-order in the interior."""
    d = np.gradient(values, h, edge_order=2)
    d[2:-2] = (-values[4:] + 8 * values[3:-1] - 8 * values[1:-3] + values[:-4]) / (12 * h)
    return d


def remove_plane(
    values: np.ndarray, grid: CartesianGrid, mask: np.ndarray | None = None
) -> tuple[np.ndarray, tuple[float, float, float]]:
    """Subtract the least-squares plane c0 + c1 X + c2 Y over valid cells."""
    X = np.broadcast_to(grid.x[:, None], values.shape)
    Y = np.broadcast_to(grid.y[None, :], values.shape)
    if mask is None:
        mask = np.ones(values.shape, dtype=bool)
    basis = np.column_stack([np.ones(mask.sum()), X[mask], Y[mask]])
    coeffs, *_ = np.linalg.lstsq(basis, values[mask], rcond=None)
    plane = coeffs[0] + coeffs[1] * X + coeffs[2] * Y
    return values - plane, (float(coeffs[0]), float(coeffs[1]), float(coeffs[2]))


def ape_to_surface(profile: APEProfile, grid: CartesianGrid) -> PhaseErrorSurface:
    """Full 2-D phase error implied by an azimuth phase error:

        Phi_e(X, Y) = (Y / Y0) * phi0((Y0 / Y) X).

    The affine part of phi0 is mapped analytically (it is exactly the plane
    (a0/Y0) Y + a1 X); the remainder is evaluated row-scaled by monotone
    cubic interpolation.  Cells whose scaled abscissa leaves the sampled
    support are masked out, never extrapolated.
    """
    _check_axis(profile.x, grid)
    x, y, y0 = grid.x, grid.y, grid.y0
    a1, a0 = np.polyfit(x, profile.values, 1)
    psi = profile.values - (a0 + a1 * x)
    interp = PchipInterpolator(x, psi, extrapolate=False)
    scaled = x[:, None] * (y0 / y)[None, :]
    vals = interp(scaled)
    mask = np.isfinite(vals)
    surface = (y / y0)[None, :] * np.nan_to_num(vals)
    surface += (a0 / y0) * y[None, :] + a1 * x[:, None]
    surface = np.where(mask, surface, 0.0)
    return PhaseErrorSurface(values=surface, grid=grid, mask=mask)


def rcm_to_surface(profile: RCMProfile, grid: CartesianGrid) -> PhaseErrorSurface:
    """Full 2-D phase error implied by a residual range migration:

        Phi_e(X, Y) = -X Y int phi1((Y0/Y) X) / X^2 dX   (+ plane).

    Substituting u = (Y0/Y) X reduces every row to one antiderivative
    J(u) = int phi1(u)/u^2 du computed once on the X sampling by cumulative
    quadrature, with Phi_e = -Y0 X J((Y0/Y) X).  The value and tangent of
    phi1 at X = 0 are removed beforehand: the value maps to the plane b*Y
    and the tangent is zero for any structure-consistent profile, so this
    only tames the 1/X^2 singularity without changing the reconstructed
    surface.  The center tangent comes from a fourth-order difference
    stencil: its error is amplified by a Y0 X ln|X| lever arm, so the
    common second-order gradient is not accurate enough here.  The output
    is detrended of its best-fit plane, which fixes the free linear-in-X
    constant.
    """
    _check_axis(profile.x, grid)
    x, y, y0 = grid.x, grid.y, grid.y0
    v = profile.values
    ic = x.size // 2
    h = grid.dx
    d0 = v[ic]
    d1 = (-v[ic + 2] + 8 * v[ic + 1] - 8 * v[ic - 1] + v[ic - 2]) / (12 * h)
    psi = v - d0 - d1 * x
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = psi / x**2
    # limit of psi / X^2 at the center sample
    integrand[ic] = (psi[ic + 1] + psi[ic - 1]) / (2 * h**2)
    J = cumulative_simpson(integrand, x=x, initial=0.0)
    J -= J[ic]
    interp = PchipInterpolator(x, J, extrapolate=False)
    scaled = x[:, None] * (y0 / y)[None, :]
    Jv = interp(scaled)
    mask = np.isfinite(Jv)
    raw = -y0 * x[:, None] * np.nan_to_num(Jv)
    detrended, _ = remove_plane(raw, grid, mask)
    return PhaseErrorSurface(values=np.where(mask, detrended, 0.0), grid=grid, mask=mask)


def taylor_decompose(
    surface: PhaseErrorSurface,
    grid: CartesianGrid | None = None,
    max_residual: float = 0.25,
) -> TaylorCoeffs:
    """Recover (phi0, phi1, phi2) from a surface of the Y * xi(X/Y) form.

    xi is read off the Y = Y0 row (phi0 = Y0 xi(X/Y0) is sampled exactly
    there), its derivatives come from central finite differences on the X
    sampling, and

        phi1 = xi(u) - u xi'(u),   phi2 = X^2 xi''(u) / (2 Y0^3),  u = X/Y0.

    Raises StructureMismatchError when the three-term reconstruction
    misses the input by more than max_residual rad rms over the band.
    """
    if grid is None:
        grid = surface.grid
    x, y, y0 = grid.x, grid.y, grid.y0
    iy0 = y.size // 2
    if not np.all(surface.mask[:, iy0]):
        raise ValueError("Y0 row is not fully covered; cannot read xi")
    phi0 = surface.values[:, iy0].copy()
    u = x / y0
    xi = phi0 / y0
    xi_p = _derivative4(xi, float(u[1] - u[0]))
    xi_pp = _derivative4(xi_p, float(u[1] - u[0]))
    phi1 = xi - u * xi_p
    phi2 = x**2 * xi_pp / (2 * y0**3)

    dy = (y - y0)[None, :]
    recon = phi0[:, None] + phi1[:, None] * dy + phi2[:, None] * dy**2
    resid = (recon - surface.values)[surface.mask]
    rms = float(np.sqrt(np.mean(resid**2))) if resid.size else 0.0
    if rms > max_residual:
        raise StructureMismatchError(rms, max_residual)
    return TaylorCoeffs(phi0=phi0, phi1=phi1, phi2=phi2, x=x.copy(), residual_rms=rms)


def quadratic_family(a: float, grid: CartesianGrid) -> tuple[APEProfile, RCMProfile, np.ndarray]:
    """Closed-form coefficient triple for a quadratic APE phi0 = a X^2:

        phi1 = -a X^2 / Y0,   phi2 = +a X^2 / Y0^2.
    """
    x, y0 = grid.x, grid.y0
    phi0 = APEProfile(values=a * x**2, x=x.copy())
    phi1 = RCMProfile(values=-a * x**2 / y0, x=x.copy())
    phi2 = a * x**2 / y0**2
    return phi0, phi1, phi2


REGIONS = ("none", "1-D", "2-D", "accurate-2-D")


@dataclass(frozen=True)
class LimitReport:
    """Quadratic-coefficient thresholds of the three autofocus limits."""

    a_ape: float
    a_rcm: float
    a_defocus: float
    rho_x: float
    rho_y: float
    y0: float
    region: str | None = field(default=None)

    def classify(self, a: float) -> str:
        """Region of the (resolution, a) plane, by the worst violated limit."""
        if a > self.a_defocus:
            return "accurate-2-D"
        if a > self.a_rcm:
            return "2-D"
        if a > self.a_ape:
            return "1-D"
        return "none"


def necessity_limits(
    rho_x: float, rho_y: float, y0: float, coeff: float | None = None
) -> LimitReport:
    """Thresholds on the quadratic coefficient a for phi0 = a X^2:

        APE limit            a <= rho_x^2 / (4 pi)
        residual RCM limit   a <= Y0 rho_x^2 rho_y / (2 pi^2)
        range defocus limit  a <= Y0^2 rho_x^2 rho_y^2 / (4 pi^3)

    using max|X| = pi/rho_x and max|Y - Y0| = pi/rho_y.  When coeff is
    given the report's region field is filled in.
    """
    if rho_x <= 0 or rho_y <= 0 or y0 <= 0:
        raise ValueError("resolutions and Y0 must be positive")
    a_ape = rho_x**2 / (4 * np.pi)
    a_rcm = y0 * rho_x**2 * rho_y / (2 * np.pi**2)
    a_defocus = y0**2 * rho_x**2 * rho_y**2 / (4 * np.pi**3)
    report = LimitReport(
        a_ape=a_ape, a_rcm=a_rcm, a_defocus=a_defocus,
        rho_x=rho_x, rho_y=rho_y, y0=y0,
    )
    if coeff is not None:
        report = LimitReport(
            a_ape=a_ape, a_rcm=a_rcm, a_defocus=a_defocus,
            rho_x=rho_x, rho_y=rho_y, y0=y0, region=report.classify(coeff),
        )
    return report


def ape_boundary_resolution(a: float) -> float:
    """Resolution at which the APE limit crosses coefficient a."""
    return float(np.sqrt(4 * np.pi * a))


def rcm_boundary_resolution(a: float, y0: float) -> float:
    """Equal-resolution boundary of the residual-RCM limit: rho^3 = 2 pi^2 a / Y0."""
    return float((2 * np.pi**2 * a / y0) ** (1 / 3))


def defocus_boundary_resolution(a: float, y0: float) -> float:
    """Equal-resolution boundary of the range-defocus limit: rho^4 = 4 pi^3 a / Y0^2."""
    return float((4 * np.pi**3 * a / y0**2) ** (1 / 4))


@dataclass(frozen=True)
class ProfileClassification:
    """Span-based classification of measured (phi0, phi1, phi2) profiles."""

    ape_span: float       # rad
    rcm_span: float       # m
    defocus_span: float   # rad
    rho_y: float
    region: str


def classify_error_profiles(
    phi0: np.ndarray,
    phi1: np.ndarray,
    phi2: np.ndarray,
    rho_y: float,
    delta_y_max: float,
) -> ProfileClassification:
    """Apply the three span limits directly to sampled profiles.

    Violations: span(phi0) > pi/4, span(phi1) > rho_y / 2, and
    span over the band of phi2 (Y - Y0)^2 > pi/4 with |Y - Y0| <= delta_y_max.
    """
    ape_span = float(np.ptp(phi0))
    rcm_span = float(np.ptp(phi1))
    m = phi2 * delta_y_max**2
    defocus_span = float(max(m.max(), 0.0) - min(m.min(), 0.0))
    if defocus_span > np.pi / 4:
        region = "accurate-2-D"
    elif rcm_span > rho_y / 2:
        region = "2-D"
    elif ape_span > np.pi / 4:
        region = "1-D"
    else:
        region = "none"
    return ProfileClassification(
        ape_span=ape_span, rcm_span=rcm_span, defocus_span=defocus_span,
        rho_y=rho_y, region=region,
    )


def surface_from_ratio_profile(xi, grid: CartesianGrid) -> PhaseErrorSurface:
    """Build Phi_e = Y * xi(X / Y) from a callable xi (exact evaluation)."""
    X = grid.x[:, None]
    Y = grid.y[None, :]
    values = Y * xi(X / Y)
    return PhaseErrorSurface(values=values, grid=grid)


def surface_from_radial_profile(mu, grid: CartesianGrid) -> PhaseErrorSurface:
    """Build Phi_e = sqrt(X^2 + Y^2) * mu(X / Y) from a callable mu.

    Equivalent to surface_from_ratio_profile with
    xi(u) = sqrt(1 + u^2) * mu(u).
    """
    X = grid.x[:, None]
    Y = grid.y[None, :]
    values = np.sqrt(X**2 + Y**2) * mu(X / Y)
    return PhaseErrorSurface(values=values, grid=grid)
