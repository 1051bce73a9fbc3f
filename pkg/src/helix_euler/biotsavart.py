"""Velocity recovery from helical scalar vorticity.

A slice particle ``(z_j, gamma_j)`` stands for the helical filament through
``(z_j, 0)`` carrying circulation ``gamma_j``.  Velocity is the filament sum

    u(x) = sum_j gamma_j * integral_{-pi..pi} K(x - S_theta(z_j,0)) x xi(S_theta(z_j,0)) dtheta

with ``K`` the velocity kernel; the integral is a periodic trapezoid rule
whose node count is chosen per (target, filament) pair from the distance to
the filament (far pairs are smooth and need few nodes, close approaches are
resolved by doubling up to a cap).  The per-target particle reduction uses
``math.fsum``, which is exactly rounded, so results do not depend on
summation order or thread count.

Also here: the closed-form steady radially symmetric background, the operator
that decomposes unbalanced vorticity into a balanced part plus that
background, a slow 3D-quadrature oracle for cross-checking the filament sum,
and a far-field decay-exponent fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import HelixParams
from .kernel import KernelConfig, velocity_kernel

__all__ = [
    "UnbalancedVorticityError",
    "FilamentSingularityError",
    "NormalizationError",
    "QuadratureNonconvergenceError",
    "VorticityParticles",
    "RadialProfile",
    "SteadyBackground",
    "VelocityEvalConfig",
    "background_velocity",
    "velocity_filament",
    "velocity_oracle_3d",
    "profile_ring_particles",
    "xi_operator",
    "decay_exponent",
]

BALANCE_RTOL = 1e-12


class UnbalancedVorticityError(ValueError):
    """Plain filament recovery requires zero total circulation."""


class FilamentSingularityError(ValueError):
    """Unregularized evaluation requested on a filament."""


class NormalizationError(ValueError):
    """Background profile does not absorb the net circulation."""


class QuadratureNonconvergenceError(RuntimeError):
    """Successive oracle refinements disagree beyond the requested tolerance."""


# ---------------------------------------------------------------------------
# Particle state
# ---------------------------------------------------------------------------

@dataclass
class VorticityParticles:
    """Slice-plane particle set {(z_j, gamma_j, a_j)} for helical vorticity."""

    z: np.ndarray          # (N, 2) slice positions
    gamma: np.ndarray      # (N,) circulations, constant in time
    area: np.ndarray       # (N,) quadrature areas, held fixed
    h: HelixParams
    grid_shape: tuple | None = None   # set by grid-based initializers
    grid_index: np.ndarray | None = None

    def __post_init__(self):
        self.z = np.atleast_2d(np.asarray(self.z, dtype=float))
        self.gamma = np.asarray(self.gamma, dtype=float).ravel()
        self.area = np.asarray(self.area, dtype=float).ravel()
        if self.z.shape != (self.gamma.size, 2):
            raise ValueError("positions must have shape (N, 2)")
        if self.area.shape != self.gamma.shape:
            raise ValueError("areas must match circulations")
        if not np.all(np.isfinite(self.z)) or not np.all(np.isfinite(self.gamma)):
            raise ValueError("particle state must be finite")
        if np.any(self.area <= 0.0):
            raise ValueError("particle areas must be positive")

    def __len__(self):
        return self.gamma.size

    @property
    def total_circulation(self) -> float:
        return math.fsum(self.gamma.tolist())

    @property
    def abs_circulation(self) -> float:
        return math.fsum(np.abs(self.gamma).tolist())

    def with_positions(self, z: np.ndarray) -> "VorticityParticles":
        return VorticityParticles(
            z=np.array(z, dtype=float), gamma=self.gamma, area=self.area,
            h=self.h, grid_shape=self.grid_shape, grid_index=self.grid_index,
        )

    def is_balanced(self, rtol: float = BALANCE_RTOL) -> bool:
        scale = self.abs_circulation
        return abs(self.total_circulation) <= rtol * scale if scale else True


def merge_particles(a: VorticityParticles, b: VorticityParticles) -> VorticityParticles:
    if a.h != b.h:
        raise ValueError("cannot merge particle sets with different helix parameters")
    return VorticityParticles(
        z=np.vstack([a.z, b.z]),
        gamma=np.concatenate([a.gamma, b.gamma]),
        area=np.concatenate([a.area, b.area]),
        h=a.h,
    )


# ---------------------------------------------------------------------------
# Radial profile and steady background
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _gl_panel(a, b):
    """Gauss-Legendre nodes/weights on [a, b] (64-point, fixed)."""
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * _GL_NODES, half * _GL_WEIGHTS


@dataclass(frozen=True)
class RadialProfile:
    """Smooth compactly supported radial bump amplitude * exp(1 - 1/(1-s^2)).

    ``s`` maps [r_inner, r_outer] onto [-1, 1]; the profile peaks at the
    midpoint with value ``amplitude`` and vanishes to all orders at both ends.
    """

    r_inner: float
    r_outer: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.r_inner < self.r_outer):
            raise ValueError("need 0 < r_inner < r_outer")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        s = (2.0 * r - (self.r_inner + self.r_outer)) / (self.r_outer - self.r_inner)
        out = np.zeros_like(r)
        inside = np.abs(s) < 1.0
        si = s[inside]
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - si * si))
        return out if out.ndim else float(out)

    def weighted_integral(self) -> float:
        """integral_0^inf phi(r) r dr by a fixed 64-point rule per half-panel."""
        mid = 0.5 * (self.r_inner + self.r_outer)
        total = 0.0
        for a, b in ((self.r_inner, mid), (mid, self.r_outer)):
            x, w = _gl_panel(a, b)
            total += float(np.sum(w * self(x) * x))
        return total

    def cumulative_weighted(self, r):
        """integral_0^r phi(s) s ds, vectorized over r.

        Uses the same two half-support panels as :meth:`weighted_integral`,
        so the saturated value matches it bitwise.
        """
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        mid_support = 0.5 * (self.r_inner + self.r_outer)
        for a, b_full in ((self.r_inner, mid_support), (mid_support, self.r_outer)):
            top = np.clip(r, a, b_full)
            live = top > a
            if np.any(live):
                b = top[live]
                mid, half = 0.5 * (a + b), 0.5 * (b - a)
                x = mid[:, None] + half[:, None] * _GL_NODES
                out[live] += (half[:, None] * _GL_WEIGHTS * self(x) * x).sum(axis=1)
        return out if out.ndim else float(out)

    def scaled_to_mass(self, mass_2d: float) -> "RadialProfile":
        """Rescale amplitude so 2*pi*integral phi r dr equals ``mass_2d``."""
        base = RadialProfile(self.r_inner, self.r_outer, 1.0)
        denom = 2.0 * np.pi * base.weighted_integral()
        return RadialProfile(self.r_inner, self.r_outer, mass_2d / denom)


@dataclass(frozen=True)
class SteadyBackground:
    """Closed-form steady, radially symmetric, swirl-free helical velocity."""

    profile: RadialProfile
    h: HelixParams

    @property
    def beta(self) -> float:
        """Asymptotic axial speed (1/kappa) |integral phi r dr|."""
        return abs(self.profile.weighted_integral()) / self.h.kappa


def background_velocity(x, bg: SteadyBackground):
    """u_bar(x) = (x_perp / |x~|^2, 1/kappa) * integral_0^{|x~|} phi r dr.

    The axis limit is zero; outside the profile support the planar part is the
    point-vortex field of the total profile mass.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    r = np.hypot(pts[..., 0], pts[..., 1])
    q = bg.profile.cumulative_weighted(r)
    out = np.zeros_like(pts)
    live = r > 0.0
    r2 = np.where(live, r * r, 1.0)
    out[..., 0] = np.where(live, -pts[..., 1] * q / r2, 0.0)
    out[..., 1] = np.where(live, pts[..., 0] * q / r2, 0.0)
    out[..., 2] = q / bg.h.kappa
    return out[0] if single else out


# ---------------------------------------------------------------------------
# Filament quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VelocityEvalConfig:
    """Quadrature settings for filament velocity evaluation."""

    kernel_cfg: KernelConfig
    theta_quadrature_points: int = 64
    blob_epsilon: float = 0.0
    theta_max_points: int = 1024
    strip_constant: float = 19.0   # nodes >= strip_constant / analyticity width
    coarsen_far: bool = True       # allow fewer than base nodes for far pairs

    def __post_init__(self):
        if self.theta_quadrature_points < 8:
            raise ValueError("theta_quadrature_points must be >= 8")
        if self.blob_epsilon < 0.0:
            raise ValueError("blob_epsilon must be nonnegative")

    @property
    def h(self) -> HelixParams:
        return self.kernel_cfg.h


def _theta_nodes(n: int) -> np.ndarray:
    # midpoint-offset uniform grid on (-pi, pi]; spectrally accurate and
    # symmetric about 0 without placing a node at the closest approach
    return -np.pi + (np.arange(n) + 0.5) * (2.0 * np.pi / n)


def _helix_points(z: np.ndarray, theta: np.ndarray, kappa: float):
    """Positions S_theta(z, 0) for all particles x theta nodes: (N, n, 3)."""
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty((z.shape[0], theta.size, 3))
    out[:, :, 0] = z[:, 0, None] * c + z[:, 1, None] * s
    out[:, :, 1] = -z[:, 0, None] * s + z[:, 1, None] * c
    out[:, :, 2] = kappa * theta
    return out


def _min_filament_distance(targets: np.ndarray, z: np.ndarray, h: HelixParams,
                           probe_n: int = 32):
    """Distance from each target to each source helix: (T, N) estimate.

    Coarse probe over ``probe_n`` nodes plus one parabolic refinement of the
    discrete minimum; accurate to a few percent, which is all the node-count
    tiering needs.
    """
    kappa = h.kappa
    theta = _theta_nodes(probe_n)
    rt2 = (targets[:, 0] ** 2 + targets[:, 1] ** 2)[:, None]
    rz2 = (z[:, 0] ** 2 + z[:, 1] ** 2)[None, :]
    # |x - S_theta(z,0)|^2 = rt^2 + rz^2 - 2 x~ . R~_theta z + (x3 - kappa theta)^2
    cosd = np.cos(theta)
    sind = np.sin(theta)
    # x~ . R~_theta z = (x1 z1 + x2 z2) cos th + (x1 z2 - x2 z1) sin th
    a = targets[:, 0, None] * z[None, :, 0] + targets[:, 1, None] * z[None, :, 1]
    b = targets[:, 0, None] * z[None, :, 1] - targets[:, 1, None] * z[None, :, 0]
    d2 = (
        rt2[:, :, None]
        + rz2[:, :, None]
        - 2.0 * (a[:, :, None] * cosd + b[:, :, None] * sind)
        + (targets[:, 2, None, None] - kappa * theta) ** 2
    )
    k = np.argmin(d2, axis=2)
    tt, ss = np.indices(k.shape)
    g0 = d2[tt, ss, k]
    gp = d2[tt, ss, np.minimum(k + 1, probe_n - 1)]
    gm = d2[tt, ss, np.maximum(k - 1, 0)]
    denom = gp - 2.0 * g0 + gm
    # refine only where the quadratic model is trustworthy: interior minimum
    # with the vertex inside the node interval (the distance function is not
    # periodic in theta, so boundary minima keep the discrete value)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(
            (k > 0) & (k < probe_n - 1)
            & (denom > 0.0) & (np.abs(gm - gp) <= denom),
            0.125 * (gm - gp) ** 2 / np.where(denom > 0.0, denom, 1.0),
            0.0,
        )
    dmin2 = np.maximum(g0 - corr, 0.0)
    return np.sqrt(dmin2)


def _pair_node_counts(targets: np.ndarray, w: VorticityParticles,
                      cfg: VelocityEvalConfig, eps: float):
    """Per-pair trapezoid node count from the integrand's analyticity width."""
    d = _min_filament_distance(targets, w.z, cfg.h)
    speed = np.sqrt(w.z[:, 0] ** 2 + w.z[:, 1] ** 2 + cfg.h.kappa**2)[None, :]
    sigma = np.sqrt(d * d + eps * eps) / speed
    base = cfg.theta_quadrature_points
    lo = 8 if cfg.coarsen_far else base
    with np.errstate(divide="ignore"):
        want = cfg.strip_constant / sigma
    want = np.clip(want, lo, cfg.theta_max_points)
    n = 2 ** np.ceil(np.log2(want)).astype(int)
    return np.minimum(np.maximum(n, lo), cfg.theta_max_points), d


_NODE_CHUNK = 1 << 20


def _filament_sum(targets: np.ndarray, w: VorticityParticles,
                  cfg: VelocityEvalConfig, eps: float) -> np.ndarray:
    """Fused tiered evaluation of the filament quadrature at (T, 3) targets.

    Inlines the image-sum kernel (it must agree with
    ``velocity_kernel(..., representation="images")``; a test asserts this)
    and contracts kernel, cross product and quadrature weight in one pass.
    """
    from .kernel import _image_count, _images_planar_axial, reduce_period

    T, N = targets.shape[0], len(w)
    if N == 0:
        return np.zeros((T, 3))
    counts, _ = _pair_node_counts(targets, w, cfg, eps)
    contrib = np.zeros((T, N, 3))
    kcfg = cfg.kernel_cfg
    kappa = cfg.h.kappa
    P = cfg.h.period
    f = -1.0 / (4.0 * np.pi)
    for n in np.unique(counts):
        ti, sj = np.nonzero(counts == n)
        theta = _theta_nodes(int(n))
        weight = 2.0 * np.pi / n
        pair_chunk = max(1, _NODE_CHUNK // int(n))
        for lo in range(0, ti.size, pair_chunk):
            tis = ti[lo : lo + pair_chunk]
            sjs = sj[lo : lo + pair_chunk]
            nodes = _helix_points(w.z[sjs], theta, kappa)     # (P, n, 3)
            w1 = targets[tis, 0, None] - nodes[:, :, 0]
            w2 = targets[tis, 1, None] - nodes[:, :, 1]
            w3 = reduce_period(targets[tis, 2, None] - nodes[:, :, 2], cfg.h)
            rho2 = w1 * w1 + w2 * w2 + eps * eps
            M = min(max(6, _image_count(np.sqrt(rho2), kcfg) - 2),
                    kcfg.image_truncation)
            planar, axial = _images_planar_axial(w3, rho2, P, M)
            xi1 = nodes[:, :, 1]
            xi2 = -nodes[:, :, 0]
            g = w.gamma[sjs] * (weight * f)
            contrib[tis, sjs, 0] = g * (w2 * planar * kappa - axial * xi2).sum(axis=1)
            contrib[tis, sjs, 1] = g * (axial * xi1 - w1 * planar * kappa).sum(axis=1)
            contrib[tis, sjs, 2] = g * (planar * (w1 * xi2 - w2 * xi1)).sum(axis=1)
    out = np.empty((T, 3))
    for t in range(T):
        for c in range(3):
            out[t, c] = math.fsum(contrib[t, :, c].tolist())
    return out


def velocity_filament(x, w: VorticityParticles, cfg: VelocityEvalConfig,
                      require_balanced: bool = True) -> np.ndarray:
    """Velocity induced by the particle filaments at point(s) ``x``.

    ``x`` is a single point (3,) or a batch (T, 3).  Raises
    :class:`UnbalancedVorticityError` when the net circulation is nonzero
    (the plain recovery needs balanced data; the decomposition operator
    handles the rest) and :class:`FilamentSingularityError` for an
    unregularized evaluation on a filament.
    """
    if require_balanced and not w.is_balanced():
        raise UnbalancedVorticityError(
            f"net circulation {w.total_circulation:.3e} exceeds "
            f"{BALANCE_RTOL:.0e} x {w.abs_circulation:.3e}"
        )
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    targets = np.atleast_2d(x)
    eps = cfg.blob_epsilon
    live = w.gamma != 0.0   # zero-circulation filaments induce nothing
    if not np.all(live):
        w = VorticityParticles(z=w.z[live], gamma=w.gamma[live],
                               area=w.area[live], h=w.h)
    if eps == 0.0 and len(w):
        # a point lies on filament j exactly when its slice projection is z_j
        th = targets[:, 2] / cfg.h.kappa
        c, s = np.cos(th), np.sin(th)
        z1 = c * targets[:, 0] - s * targets[:, 1]
        z2 = s * targets[:, 0] + c * targets[:, 1]
        d2 = (z1[:, None] - w.z[None, :, 0]) ** 2 + (z2[:, None] - w.z[None, :, 1]) ** 2
        scale = 1.0 + np.abs(targets).max()
        if np.any(d2 < (1e-9 * scale) ** 2):
            raise FilamentSingularityError(
                "evaluation point lies on a filament and blob_epsilon == 0"
            )
    out = _filament_sum(targets, w, cfg, eps)
    return out[0] if single else out


# ---------------------------------------------------------------------------
# 3D quadrature oracle
# ---------------------------------------------------------------------------

def _oracle_level(x, omega_sampler, patches, cfg: VelocityEvalConfig,
                  nz, nr, nphi):
    """One tensor-product quadrature level of the slab velocity integral.

    The axial direction is integrated on a periodic midpoint grid and the
    planar integral runs, per circular patch, on a polar Gauss-Legendre x
    uniform-angle grid in the helically co-rotating frame, so a compact
    feature is stationary across the axial slices.  The rho jacobian absorbs
    the integrable kernel singularities.
    """
    kappa = cfg.h.kappa
    x = np.asarray(x, dtype=float)
    y3 = -np.pi * kappa + (np.arange(nz) + 0.5) * (2.0 * np.pi * kappa / nz)
    wz = 2.0 * np.pi * kappa / nz
    cz, sz = np.cos(y3 / kappa), np.sin(y3 / kappa)
    total = np.zeros(3)
    mass = 0.0
    absmass = 0.0
    for centre, rad in patches:
        gn, gw = np.polynomial.legendre.leggauss(nr)
        rho = rad * 0.5 * (gn + 1.0)
        wrho = rad * 0.5 * gw
        phis = (np.arange(nphi) + 0.5) * (2.0 * np.pi / nphi)
        wphi = 2.0 * np.pi / nphi
        w1 = centre[0] + rho[:, None] * np.cos(phis)    # co-rotating frame
        w2 = centre[1] + rho[:, None] * np.sin(phis)
        pts = np.empty((nr, nphi, nz, 3))
        pts[..., 0] = w1[:, :, None] * cz + w2[:, :, None] * sz
        pts[..., 1] = -w1[:, :, None] * sz + w2[:, :, None] * cz
        pts[..., 2] = y3[None, None, :]
        flat = pts.reshape(-1, 3)
        om = np.asarray(omega_sampler(flat), dtype=float)
        wts = np.broadcast_to(
            (wrho * rho)[:, None, None] * wphi * wz, (nr, nphi, nz)
        ).reshape(-1)
        mass += float(np.sum(om * wts))
        absmass += float(np.sum(np.abs(om) * wts))
        live = om != 0.0
        if not np.any(live):
            continue
        wvec = x[None, :] - flat[live]
        kv = velocity_kernel(wvec, cfg.kernel_cfg, eps=0.0)
        xi1 = flat[live, 1]
        xi2 = -flat[live, 0]
        f = om[live] * wts[live] / kappa
        total += np.array([
            np.sum(f * (kv[:, 1] * kappa - kv[:, 2] * xi2)),
            np.sum(f * (kv[:, 2] * xi1 - kv[:, 0] * kappa)),
            np.sum(f * (kv[:, 0] * xi2 - kv[:, 1] * xi1)),
        ])
    return total, mass, absmass


def velocity_oracle_3d(x, omega_sampler, support_radius: float,
                       cfg: VelocityEvalConfig, patches=None, rtol: float = 5e-4,
                       base_level=(48, 16, 32)):
    """Direct slab quadrature of the velocity integral; returns (u, err_est).

    ``omega_sampler`` maps (n, 3) points to scalar helical vorticity with
    compact planar support inside ``support_radius``.  ``patches`` optionally
    lists circular (center, radius) patches covering the slice support so the
    quadrature can concentrate there; the default is the single disc of
    ``support_radius`` about the origin.  Two refinement levels provide the
    error estimate; disagreement beyond ``rtol`` relative to the field
    magnitude raises :class:`QuadratureNonconvergenceError`, and unbalanced
    sampler data raise :class:`UnbalancedVorticityError`.
    """
    x = np.asarray(x, dtype=float)
    if patches is None:
        patches = [((0.0, 0.0), support_radius)]
    nz, nr, nphi = base_level
    u1, _, _ = _oracle_level(x, omega_sampler, patches, cfg, nz, nr, nphi)
    u2, mass, absmass = _oracle_level(x, omega_sampler, patches, cfg,
                                      2 * nz, 2 * nr, 2 * nphi)
    if absmass > 0.0 and abs(mass) > 1e-6 * absmass:
        raise UnbalancedVorticityError(
            f"sampler mass {mass:.3e} is not balanced (scale {absmass:.3e})"
        )
    err = float(np.linalg.norm(u2 - u1))
    if err > rtol * (float(np.linalg.norm(u2)) + 1e-30):
        raise QuadratureNonconvergenceError(
            f"oracle refinements disagree by {err:.3e}"
        )
    return u2, err


# ---------------------------------------------------------------------------
# Decomposition operator for unbalanced vorticity
# ---------------------------------------------------------------------------

def profile_ring_particles(profile: RadialProfile, h: HelixParams,
                           n_r: int = 24, n_phi: int = 64,
                           sign: float = 1.0) -> VorticityParticles:
    """Polar-grid particle discretization of the radial profile."""
    gn, gw = np.polynomial.legendre.leggauss(n_r)
    mid = 0.5 * (profile.r_inner + profile.r_outer)
    half = 0.5 * (profile.r_outer - profile.r_inner)
    rho = mid + half * gn
    wr = half * gw
    phi = (np.arange(n_phi) + 0.5) * (2.0 * np.pi / n_phi)
    wphi = 2.0 * np.pi / n_phi
    zz = np.empty((n_r * n_phi, 2))
    zz[:, 0] = (rho[:, None] * np.cos(phi)).ravel()
    zz[:, 1] = (rho[:, None] * np.sin(phi)).ravel()
    areas = (wr * rho)[:, None] * wphi * np.ones(n_phi)
    gam = sign * profile(rho)[:, None] * (wr * rho)[:, None] * wphi * np.ones(n_phi)
    return VorticityParticles(z=zz, gamma=gam.ravel(), area=areas.ravel(), h=h)


def xi_operator(x, w: VorticityParticles, bg: SteadyBackground,
                cfg: VelocityEvalConfig, n_r: int = 24, n_phi: int = 64) -> np.ndarray:
    """Velocity of the balanced part (particles minus the radial profile)
    plus the closed-form background.

    The profile's mass must match the particle circulation (within a loose
    sanity tolerance, else :class:`NormalizationError`); the ring
    discretization is then rescaled so the combined set is balanced exactly,
    absorbing the ring-quadrature error into the admissible profile freedom.
    """
    rings = profile_ring_particles(bg.profile, w.h, n_r=n_r, n_phi=n_phi, sign=-1.0)
    circ_w = w.total_circulation
    circ_r = rings.total_circulation
    scale = w.abs_circulation + rings.abs_circulation
    if scale and abs(circ_w + circ_r) > 1e-3 * scale:
        raise NormalizationError(
            f"profile absorbs {-circ_r:.6e} but the particles carry {circ_w:.6e}; "
            "scale the profile to the particle circulation first"
        )
    if circ_r != 0.0:
        rings = VorticityParticles(z=rings.z, gamma=rings.gamma * (-circ_w / circ_r),
                                   area=rings.area, h=rings.h)
    combined = merge_particles(w, rings)
    u = velocity_filament(x, combined, cfg)
    return u + background_velocity(x, bg)


def decay_exponent(w: VorticityParticles, cfg: VelocityEvalConfig,
                   span=(4.0, 32.0), n_radii: int = 12, n_angles: int = 4) -> float:
    """Least-squares slope of log |u| against log |x~| in the far field.

    Probes cover ``span`` times the support radius; balanced compactly
    supported data decay like the -2 power.
    """
    if not w.is_balanced():
        raise UnbalancedVorticityError("decay fit requires balanced vorticity")
    support = float(np.max(np.hypot(w.z[:, 0], w.z[:, 1])))
    radii = np.geomspace(span[0] * support, span[1] * support, n_radii)
    angles = (np.arange(n_angles) + 0.3) * (2.0 * np.pi / n_angles)
    targets = np.empty((n_radii * n_angles, 3))
    targets[:, 0] = (radii[:, None] * np.cos(angles)).ravel()
    targets[:, 1] = (radii[:, None] * np.sin(angles)).ravel()
    targets[:, 2] = 0.0
    u = velocity_filament(targets, w, cfg)
    mag = np.linalg.norm(u, axis=1).reshape(n_radii, n_angles)
    logmean = np.log(mag).mean(axis=1)
    slope = np.polyfit(np.log(radii), logmean, 1)[0]
    return float(slope)
