"""Helical-symmetry primitives: rotations, screw motions, the swirl field.

The geometry is controlled by a single positive constant ``kappa``: the screw
motion advances ``kappa`` length units along the x3-axis per radian of
rotation, so every field of interest is periodic in x3 with period
``2 *pi * kappa``.  All operations here are total, pure and cheap; they accept
plain sequences or numpy arrays with shape ``(..., 3)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HelixParams",
    "rotation_matrix",
    "rotate",
    "screw",
    "xi",
    "swirl",
    "helicality_residual",
    "project_to_slice",
    "reduce_angle",
]


@dataclass(frozen=True)
class HelixParams:
    """Pitch parameter of the screw group, with the derived axial period."""

    kappa: float

    def __post_init__(self):
        if not (self.kappa > 0.0 and np.isfinite(self.kappa)):
            raise ValueError(f"kappa must be a positive finite real, got {self.kappa!r}")

    @property
    def period(self) -> float:
        # derived, never stored: period == 2*pi*kappa exactly
        return 2.0 * np.pi * self.kappa

    @property
    def half_period(self) -> float:
        return np.pi * self.kappa


def rotation_matrix(theta: float) -> np.ndarray:
    """Matrix of the rotation about the x3-axis by angle ``theta``.

    Rows are (cos t, sin t, 0), (-sin t, cos t, 0), (0, 0, 1); positive theta
    turns clockwise in the usual orientation of the (x1, x2) plane.
    """
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def rotate(theta: float, v) -> np.ndarray:
    """Apply the x3-axis rotation by ``theta`` to vectors of shape (..., 3)."""
    v = np.asarray(v, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty_like(v)
    out[..., 0] = c * v[..., 0] + s * v[..., 1]
    out[..., 1] = -s * v[..., 0] + c * v[..., 1]
    out[..., 2] = v[..., 2]
    return out


def screw(theta, x, h: HelixParams) -> np.ndarray:
    """Screw motion: rotation by ``theta`` plus axial translation ``kappa*theta``.

    ``theta`` may be a scalar or an array broadcastable against ``x[..., 0]``.
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty(np.broadcast(theta, x[..., 0]).shape + (3,))
    out[..., 0] = c * x[..., 0] + s * x[..., 1]
    out[..., 1] = -s * x[..., 0] + c * x[..., 1]
    out[..., 2] = x[..., 2] + h.kappa * theta
    return out


def xi(x, h: HelixParams) -> np.ndarray:
    """Generator field (x2, -x1, kappa) of the screw group.

    Its x3 component is the constant kappa; the degenerate axis point gives
    (0, 0, kappa).
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[..., 0] = x[..., 1]
    out[..., 1] = -x[..., 0]
    out[..., 2] = h.kappa
    return out


def swirl(u_val, x, h: HelixParams):
    """Helical swirl: the scalar u . xi(x)."""
    u_val = np.asarray(u_val, dtype=float)
    x = np.asarray(x, dtype=float)
    return (
        u_val[..., 0] * x[..., 1]
        - u_val[..., 1] * x[..., 0]
        + u_val[..., 2] * h.kappa
    )


def helicality_residual(field, x, theta: float, h: HelixParams) -> np.ndarray:
    """Residual field(S_theta x) - R_theta field(x); zero for a helical field.

    ``field`` is any callable mapping a point (3,) to a vector (3,); sampler
    failures propagate.
    """
    x = np.asarray(x, dtype=float)
    ahead = np.asarray(field(screw(theta, x, h)), dtype=float)
    here = np.asarray(field(x), dtype=float)
    return ahead - rotate(theta, here)


def project_to_slice(x, h: HelixParams):
    """Map a point to its helix intersection with the slice x3 = 0.

    Returns ``(z, theta)`` with ``theta = x3 / kappa`` unreduced (winding
    preserved; apply :func:`reduce_angle` for a canonical representative) and
    ``z`` the planar part of ``screw(-theta, x)``, so that
    ``screw(theta, (z, 0)) == x`` up to roundoff.
    """
    x = np.asarray(x, dtype=float)
    theta = x[..., 2] / h.kappa
    c, s = np.cos(theta), np.sin(theta)
    z = np.empty(x.shape[:-1] + (2,))
    z[..., 0] = c * x[..., 0] - s * x[..., 1]
    z[..., 1] = s * x[..., 0] + c * x[..., 1]
    return z, theta


def reduce_angle(theta):
    """Reduce an angle to the representative in (-pi, pi]."""
    theta = np.asarray(theta, dtype=float)
    return theta - 2.0 * np.pi * np.ceil(theta / (2.0 * np.pi) - 0.5)
