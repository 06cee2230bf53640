"""Cartesian frame recovery from two estimated axis directions.

A transmitted frame is described by zxz Euler angles (phi, theta, psi).
The receiver sees two noisy directions, one for the z axis and one for
the x axis, and has to invert the (overdetermined) four-equation system
relating polar angles to matrix columns.  Two decoders are provided: the
naive closed-form inversion, which ignores one equation and can fail
outright, and a geometric best fit that first locks the y axis and then
splits the orthogonality defect evenly between z and x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Direction

ORTHO_TOL = 1e-10
DEGENERATE_CROSS_TOL = 1e-8
GIMBAL_SIN_TOL = 1e-9


def _wrap_pi(a: float) -> float:
    # reduce to [-pi, pi)
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class EulerAngles:
    """zxz Euler triple; the axis columns below define the convention.

    theta lies in [0, pi]; phi and psi are stored wrapped to [-pi, pi).
    """

    phi: float
    theta: float
    psi: float
    convention: str = "zxz-column"

    def __post_init__(self):
        for a in (self.phi, self.theta, self.psi):
            if not math.isfinite(a):
                raise ValueError("Euler angles must be finite")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if self.convention != "zxz-column":
            raise ValueError("only the zxz-column convention is supported")
        object.__setattr__(self, "phi", _wrap_pi(self.phi))
        object.__setattr__(self, "psi", _wrap_pi(self.psi))


@dataclass(frozen=True)
class Frame:
    """Right-handed orthonormal triad (z_axis, x_axis, y_axis)."""

    z_axis: np.ndarray
    x_axis: np.ndarray
    y_axis: np.ndarray

    def __post_init__(self):
        axes = []
        for name in ("z_axis", "x_axis", "y_axis"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            n = float(np.linalg.norm(v))
            if abs(n - 1.0) > ORTHO_TOL:
                raise ValueError(f"{name} must be unit length, |v| = {n}")
            object.__setattr__(self, name, v)
            axes.append(v)
        z, x, y = axes
        for a, b, pair in ((z, x, "z.x"), (z, y, "z.y"), (x, y, "x.y")):
            d = abs(float(np.dot(a, b)))
            if d > ORTHO_TOL:
                raise ValueError(f"axes not orthogonal: |{pair}| = {d}")
        hand = float(np.dot(np.cross(x, y), z))
        if abs(hand - 1.0) > ORTHO_TOL:
            raise ValueError(f"frame must be right-handed, x.y,z triple = {hand}")

    def axes_matrix(self) -> np.ndarray:
        """Columns (x, y, z) as an orthogonal matrix."""
        return np.column_stack([self.x_axis, self.y_axis, self.z_axis])


@dataclass(frozen=True)
class AxisPairEstimate:
    """Measured z and x directions; not required to be perpendicular."""

    z_dir: Direction
    x_dir: Direction


def euler_to_axes(euler: EulerAngles) -> tuple[Frame, AxisPairEstimate]:
    """Forward map: Euler angles -> frame axes plus their polar angles.

    The z axis is the column (sin(psi)sin(theta), cos(psi)sin(theta),
    cos(theta)); the x axis is the matching column of the zxz matrix;
    y completes the right-handed triad.
    """
    sphi, cphi = math.sin(euler.phi), math.cos(euler.phi)
    sth, cth = math.sin(euler.theta), math.cos(euler.theta)
    spsi, cpsi = math.sin(euler.psi), math.cos(euler.psi)
    z = np.array([spsi * sth, cpsi * sth, cth])
    x = np.array(
        [
            cpsi * cphi - spsi * cth * sphi,
            -spsi * cphi - cpsi * cth * sphi,
            sth * sphi,
        ]
    )
    y = np.cross(z, x)
    y = y / np.linalg.norm(y)
    frame = Frame(z_axis=z, x_axis=x / np.linalg.norm(x), y_axis=y)
    pair = AxisPairEstimate(
        z_dir=Direction.from_vector(z), x_dir=Direction.from_vector(x)
    )
    return frame, pair


def axes_to_euler(frame: Frame) -> EulerAngles:
    """Extract zxz Euler angles from an orthonormal frame.

    Inverse of euler_to_axes away from the gimbal-locked poles; at
    sin(theta) ~ 0 the azimuths degenerate to their sum (theta = 0) or
    difference (theta = pi), so phi is set to 0 and psi carries the
    whole in-plane rotation.
    """
    z = np.asarray(frame.z_axis, dtype=float)
    x = np.asarray(frame.x_axis, dtype=float)
    y = np.asarray(frame.y_axis, dtype=float)
    cth = min(1.0, max(-1.0, float(z[2])))
    theta = math.acos(cth)
    if math.sin(theta) < GIMBAL_SIN_TOL:
        # x = (cos(psi +/- phi), -sin(psi +/- phi), 0); fold into psi
        return EulerAngles(phi=0.0, theta=theta, psi=math.atan2(-x[1], x[0]))
    psi = math.atan2(z[0], z[1])
    # third-row identities: x_z = sin(theta)sin(phi), y_z = -sin(theta)cos(phi)
    phi = math.atan2(x[2], -y[2])
    return EulerAngles(phi=phi, theta=theta, psi=psi)


@dataclass(frozen=True)
class NaiveEstimate:
    """Outcome of the closed-form inversion.

    angles is None exactly when failed is True, which happens when the
    measured directions imply |sin(phi)| > 1 and the arcsine has no
    real solution.
    """

    angles: EulerAngles | None
    failed: bool
    sin_phi: float


def naive_euler_estimate(est: AxisPairEstimate) -> NaiveEstimate:
    """Closed-form inversion using three of the four equations.

    theta = theta_z and psi = pi/2 - phi_z come from the z column alone;
    phi = asin(cos(theta_x)/sin(theta_z)) uses only the last row of the
    x column.  The ignored first-row equation resolves the asin quadrant.
    Noisy inputs can push |sin(phi)| above 1; that is reported as a
    failure rather than clamped.
    """
    theta = est.z_dir.theta
    sth = math.sin(theta)
    if sth < GIMBAL_SIN_TOL:
        raise ValueError("z estimate at a pole: naive inversion is degenerate")
    psi = _wrap_pi(0.5 * math.pi - est.z_dir.phi)
    s = math.cos(est.x_dir.theta) / sth
    if abs(s) > 1.0:
        return NaiveEstimate(angles=None, failed=True, sin_phi=s)
    phi0 = math.asin(s)
    x_first = math.sin(est.x_dir.theta) * math.cos(est.x_dir.phi)
    best = None
    for phi in (phi0, _wrap_pi(math.pi - phi0)):
        pred = math.cos(psi) * math.cos(phi) - math.sin(psi) * math.cos(theta) * math.sin(phi)
        r = abs(pred - x_first)
        if best is None or r < best[0]:
            best = (r, phi)
    return NaiveEstimate(
        angles=EulerAngles(phi=best[1], theta=theta, psi=psi),
        failed=False,
        sin_phi=s,
    )


def best_fit_frame(est: AxisPairEstimate) -> tuple[Frame, EulerAngles]:
    """Geometric best fit: exact y axis, then symmetrized z and x.

    y is taken along z_est x x_est, fixing the zx plane.  Within that
    plane the two estimates are rotated toward each other by equal
    amounts until exactly perpendicular (both axes carry the same spin
    budget, so neither is trusted more).
    """
    u = est.z_dir.unit_vector
    v = est.x_dir.unit_vector
    cross = np.cross(u, v)
    cn = float(np.linalg.norm(cross))
    if cn < DEGENERATE_CROSS_TOL:
        raise ValueError("z and x estimates are (anti)parallel; no plane is defined")
    y = cross / cn
    b = u + v
    b = b / np.linalg.norm(b)
    t = u - v
    t = t / np.linalg.norm(t)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    z_fit = (b + t) * inv_sqrt2
    x_fit = (b - t) * inv_sqrt2
    frame = Frame(z_axis=z_fit, x_axis=x_fit, y_axis=y)
    return frame, axes_to_euler(frame)


def frame_infidelity(true: Frame, est: Frame) -> float:
    """Sum over the three axes of sin^2(chi_i / 2) = (1 - r_i . r_hat_i)/2."""
    total = 0.0
    for name in ("x_axis", "y_axis", "z_axis"):
        c = float(np.dot(getattr(true, name), getattr(est, name)))
        total += 0.5 * (1.0 - min(1.0, max(-1.0, c)))
    return total
