import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from helix_euler.biotsavart import VelocityEvalConfig, VorticityParticles
from helix_euler.geometry import HelixParams
from helix_euler.kernel import KernelConfig
from helix_euler.transport import MollifierSpec, SliceField, mollify_initial


@pytest.fixture(scope="session")
def h1():
    return HelixParams(1.0)


@pytest.fixture(scope="session")
def kcfg(h1):
    return KernelConfig(h=h1)


@pytest.fixture(scope="session")
def ecfg(kcfg):
    return VelocityEvalConfig(kernel_cfg=kcfg)


def seeded_points(rng, n, h, r_min, r_max):
    """Log-radius seeded sample in the fundamental slab (SplitMix64 stream)."""
    pts = np.empty((n, 3))
    for i in range(n):
        r = r_min * (r_max / r_min) ** rng.next_float()
        phi = 2.0 * np.pi * rng.next_float()
        pts[i] = (r * np.cos(phi), r * np.sin(phi),
                  h.period * (rng.next_float() - 0.5))
    return pts


def two_bump_particles(h, d=0.7, core=0.06, cells_across=24):
    """Balanced pair of narrow smooth bumps at (+-d, 0), finely sampled."""
    def bump(z, c, amp):
        s2 = ((z[:, 0] - c[0]) ** 2 + (z[:, 1] - c[1]) ** 2) / core**2
        out = np.zeros(z.shape[0])
        m = s2 < 1.0
        out[m] = amp * np.exp(-1.0 / (1.0 - s2[m]))
        return out

    hg = 2.0 * core / cells_across
    half = int(np.ceil(core / hg)) + 1
    ax = np.arange(-half, half + 1) * hg
    gx, gy = np.meshgrid(ax, ax, indexing="ij")
    cells = np.column_stack([gx.ravel(), gy.ravel()])
    zs, gs = [], []
    for c, amp in (((d, 0.0), 1.0), ((-d, 0.0), -1.0)):
        z = cells + np.array(c)
        val = bump(z, c, amp)
        keep = val != 0.0
        zs.append(z[keep])
        gs.append(val[keep] * hg**2)
    z = np.vstack(zs)
    g = np.concatenate(gs)
    parts = VorticityParticles(z=z, gamma=g, area=np.full(g.size, hg**2), h=h)
    meta = {"d": d, "core": core, "bump": bump}
    return parts, meta


def asym_dipole_particles(h, resolution, moll_n=8):
    """Asymmetric balanced dipole from mollified indicator discs.

    The negative side is rescaled so the net circulation is exactly zero;
    grid metadata is kept for the quartet-area diagnostic.
    """
    c1, r1 = (0.5, 0.0), 0.22
    c2, r2 = (-0.35, 0.15), 0.27

    def field(z):
        d1 = np.hypot(z[..., 0] - c1[0], z[..., 1] - c1[1])
        d2 = np.hypot(z[..., 0] - c2[0], z[..., 1] - c2[1])
        return (d1 <= r1).astype(float) - 0.72 * (d2 <= r2).astype(float)

    sf = SliceField(field, support_radius=0.65)
    parts = mollify_initial(sf, MollifierSpec(moll_n), resolution, h)
    g = parts.gamma.copy()
    pos = g > 0
    sp = math.fsum(g[pos].tolist())
    sn = math.fsum((-g[~pos]).tolist())
    g[~pos] *= sp / sn
    return VorticityParticles(z=parts.z, gamma=g, area=parts.area, h=h,
                              grid_shape=parts.grid_shape,
                              grid_index=parts.grid_index)


def steady_rings_state(h, n_rings=3, n_angles=32):
    """Balanced radially symmetric two-annulus configuration on a polar grid."""
    from helix_euler.biotsavart import RadialProfile, merge_particles
    from helix_euler.scenarios import _annulus_particles
    from helix_euler.transport import TrajectoryState

    inner = RadialProfile(0.6, 1.0, 1.0)
    outer = RadialProfile(1.3, 1.8, 1.0)
    pin = _annulus_particles(inner, h, n_rings, n_angles)
    pout_unit = _annulus_particles(outer, h, max(2, n_rings // 2), n_angles)
    scale = -pin.total_circulation / pout_unit.total_circulation
    pout = VorticityParticles(z=pout_unit.z, gamma=scale * pout_unit.gamma,
                              area=pout_unit.area, h=h)
    return TrajectoryState(0.0, merge_particles(pin, pout), None)
