"""Acceptance suite: one test per criterion, each printing a PASS line with
its measured numbers.  Expensive trajectory runs are shared session fixtures.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import asym_dipole_particles, seeded_points, steady_rings_state, two_bump_particles
from helix_euler.bessel import k0, k1
from helix_euler.biotsavart import (
    RadialProfile,
    SteadyBackground,
    VelocityEvalConfig,
    VorticityParticles,
    background_velocity,
    decay_exponent,
    profile_ring_particles,
    velocity_filament,
    velocity_oracle_3d,
    xi_operator,
)
from helix_euler.geometry import HelixParams, rotate, screw, swirl, xi
from helix_euler.io_utils import SplitMix64
from helix_euler.kernel import KernelConfig, green_images, green_series, kernel_bound_ratio
from helix_euler.transport import (
    SimulationConfig,
    TrajectoryState,
    area_distortion,
    conservation_report,
    run,
)
from helix_euler.weakform import CutoffPair, make_test_function, splitting_report, weak_residual
from oracles import fd_curl, fd_divergence, k0_oracle, k1_oracle


def _report(num, name, detail):
    print(f"\nACCEPTANCE {num:02d} {name}: PASS — {detail}")


# ---------------------------------------------------------------------------
# Shared expensive runs
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def dipole_runs(h1, kcfg):
    """Coarse and refined (2x particles, dt/2) runs of the asymmetric dipole."""
    out = {}
    for label, res_scale, dt in (("coarse", 1.0, 0.05), ("fine", np.sqrt(0.5), 0.025)):
        resolution = 0.085 * res_scale
        parts = asym_dipole_particles(h1, resolution, moll_n=8)
        ecfg = VelocityEvalConfig(kernel_cfg=kcfg, blob_epsilon=1.5 * resolution,
                                  strip_constant=14.0, theta_max_points=256)
        cfg = SimulationConfig(dt=dt, t_end=0.3, eval_cfg=ecfg)
        final, report, snaps = run(TrajectoryState(0.0, parts, None), cfg)
        out[label] = {"final": final, "report": report, "snapshots": snaps,
                      "ecfg": ecfg, "particles": parts}
    return out


@pytest.fixture(scope="session")
def steady_run(h1, kcfg):
    state = steady_rings_state(h1, n_rings=3, n_angles=32)
    ecfg = VelocityEvalConfig(kernel_cfg=kcfg, blob_epsilon=0.15)
    cfg = SimulationConfig(dt=0.01, t_end=1.0, eval_cfg=ecfg)
    final, report, snaps = run(state, cfg)
    return state, final, report, snaps, ecfg


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

def test_criterion_01_bessel_certification():
    t0 = time.perf_counter()
    grid = np.geomspace(1e-3, 30.0, 1000)
    rel0 = np.max(np.abs(k0(grid) - k0_oracle(grid)) / k0_oracle(grid))
    rel1 = np.max(np.abs(k1(grid) - k1_oracle(grid)) / k1_oracle(grid))
    gn, gw = np.polynomial.legendre.leggauss(120)
    i0 = i1 = 0.0
    for a, b in ((1e-9, 2.0), (2.0, 12.0), (12.0, 80.0)):
        x = 0.5 * (a + b) + 0.5 * (b - a) * gn
        w = 0.5 * (b - a) * gw
        i0 += np.sum(w * x * k0(x))
        i1 += np.sum(w * x * k1(x))
    elapsed = time.perf_counter() - t0
    assert rel0 <= 1e-10 and rel1 <= 1e-10
    assert abs(i0 - 1.0) <= 1e-8
    assert abs(i1 - np.pi / 2) <= 1e-8
    assert elapsed < 10.0
    _report(1, "bessel certification",
            f"max rel err k0={rel0:.2e} k1={rel1:.2e}; "
            f"weighted integrals off by {abs(i0-1):.1e}, {abs(i1-np.pi/2):.1e}; "
            f"{elapsed:.1f}s")


def test_criterion_02_schlomilch_consistency(h1, kcfg):
    t0 = time.perf_counter()
    rng = SplitMix64(7)
    pts = seeded_points(rng, 1000, h1, 0.05, 10.0)
    gs = green_series(pts, kcfg)
    gi = green_images(pts, kcfg)
    worst = float(np.max(np.abs(gs - gi)))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-8
    assert elapsed < 30.0
    _report(2, "image-sum consistency",
            f"max |G_series - G_images|={worst:.2e} at 1000 seeded points; "
            f"gamma constant resolved as exp(Euler-Mascheroni)="
            f"{kcfg.euler_gamma:.15f}; {elapsed:.1f}s")


def test_criterion_03_kernel_bound(h1, kcfg):
    t0 = time.perf_counter()
    rng = SplitMix64(13)
    n = 100_000
    fl = rng.floats(3 * n)
    r = 1e-3 * (20.0 / 1e-3) ** fl[0::3]
    phi = 2 * np.pi * fl[1::3]
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi),
                           h1.period * (fl[2::3] - 0.5)])
    ratio = kernel_bound_ratio(pts, kcfg)
    assert np.all(np.isfinite(ratio))
    sup4 = float(ratio[:10_000].max())
    sup5 = float(ratio.max())
    stability = abs(sup5 - sup4) / sup5
    elapsed = time.perf_counter() - t0
    assert stability <= 0.05
    assert elapsed < 120.0
    _report(3, "kernel bound",
            f"ratio finite at 1e5 points; sup(1e4)={sup4:.6f} sup(1e5)={sup5:.6f} "
            f"stability {100*stability:.2f}%; {elapsed:.1f}s")


def test_criterion_04_cross_oracle(h1, kcfg):
    t0 = time.perf_counter()
    parts, meta = two_bump_particles(h1)
    cfg = VelocityEvalConfig(kernel_cfg=kcfg)
    d, core, bump = meta["d"], meta["core"], meta["bump"]

    def sampler(y):
        y = np.atleast_2d(y)
        th = y[:, 2] / h1.kappa
        c_, s_ = np.cos(th), np.sin(th)
        z0 = np.column_stack([c_ * y[:, 0] - s_ * y[:, 1],
                              s_ * y[:, 0] + c_ * y[:, 1]])
        return bump(z0, (d, 0), 1.0) + bump(z0, (-d, 0), -1.0)

    patches = [((d, 0.0), core), ((-d, 0.0), core)]
    rng = SplitMix64(3)
    probes = []
    while len(probes) < 20:
        p = seeded_points(rng, 1, h1, 0.6, 2.2)[0]
        # keep clear of the helical tubes: the distance test lives on the slice
        th = p[2] / h1.kappa
        z1 = np.cos(th) * p[0] - np.sin(th) * p[1]
        z2 = np.sin(th) * p[0] + np.cos(th) * p[1]
        if min(np.hypot(z1 - d, z2), np.hypot(z1 + d, z2)) > 0.45:
            probes.append(p)
    probes = np.array(probes)
    ufil = velocity_filament(probes, parts, cfg)
    worst = 0.0
    for i, p in enumerate(probes):
        u3d, _ = velocity_oracle_3d(p, sampler, d + core, cfg, patches=patches)
        worst = max(worst, np.linalg.norm(ufil[i] - u3d) / np.linalg.norm(u3d))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-4
    assert elapsed < 300.0
    _report(4, "filament vs 3D-quadrature oracle",
            f"worst rel diff {worst:.2e} at 20 probes; {elapsed:.1f}s")


def test_criterion_05_field_structure(h1, kcfg, dipole_runs):
    cfg = VelocityEvalConfig(kernel_cfg=kcfg)
    parts, _ = two_bump_particles(h1, cells_across=16)
    coarse = dipole_runs["coarse"]

    bg = SteadyBackground(RadialProfile(1.1, 1.7).scaled_to_mass(1.0), h1)
    patch = VorticityParticles(z=[[0.25, 0.0], [-0.2, 0.15]], gamma=[0.6, 0.4],
                               area=[0.1, 0.1], h=h1)

    fields = {
        "dipole": lambda pts: velocity_filament(np.atleast_2d(pts), parts, cfg),
        "dipole-run": lambda pts: velocity_filament(
            np.atleast_2d(pts), coarse["final"].particles, coarse["ecfg"]),
        "decomposition": lambda pts: xi_operator(np.atleast_2d(pts), patch, bg, cfg),
        "background": lambda pts: background_velocity(np.atleast_2d(pts), bg),
    }
    rng = SplitMix64(21)
    worst_swirl = worst_div = worst_heli = 0.0
    for name, field in fields.items():
        probes = seeded_points(rng, 25, h1, 1.0, 1.9)
        u = field(probes)
        umag = np.linalg.norm(u, axis=1)
        ximag = np.sqrt(probes[:, 0] ** 2 + probes[:, 1] ** 2 + h1.kappa**2)
        floor = 1e-10
        sw = np.max(np.abs(swirl(u, probes, h1)) / (umag * ximag + floor))
        worst_swirl = max(worst_swirl, sw)
        for p, uu in zip(probes[:6], u[:6]):
            div, jnorm = fd_divergence(lambda q: field(q)[0], p, h=2e-4)
            worst_div = max(worst_div, abs(div) / (jnorm + 1e-12))
        # helicality at 25 random (x, theta) per field (100 total over fields)
        thetas = np.array([2 * np.pi * (SplitMix64(100 + i).next_float() - 0.5)
                           for i in range(len(probes))])
        # quadrature tolerance: doubled-node evaluation at a probe subset
        fine_cfg = VelocityEvalConfig(kernel_cfg=kcfg, strip_constant=24.0,
                                      theta_max_points=2048)
        if name in ("dipole", "dipole-run"):
            src = parts if name == "dipole" else coarse["final"].particles
            base_cfg = cfg if name == "dipole" else coarse["ecfg"]
            u_fine = velocity_filament(probes[:8], src, fine_cfg)
            u_base = velocity_filament(probes[:8], src, base_cfg)
            qtol = float(np.max(np.linalg.norm(u_fine - u_base, axis=1)
                                / np.linalg.norm(u_fine, axis=1)))
        else:
            qtol = 1e-7
        for i, (p, th) in enumerate(zip(probes, thetas)):
            ahead = field(screw(th, p, h1))[0]
            res = np.linalg.norm(ahead - rotate(th, u[i])) / (umag[i] + floor)
            worst_heli = max(worst_heli, res / max(qtol, 1e-12))
    assert worst_swirl <= 1e-6
    assert worst_div <= 1e-5
    assert worst_heli <= 10.0
    _report(5, "field structure",
            f"swirl<= {worst_swirl:.2e} (bar 1e-6); FD div rel <= {worst_div:.2e} "
            f"(bar 1e-5); helicality <= {worst_heli:.2f}x quadrature tolerance "
            f"(bar 10x) over 100 (x, theta) samples")


def test_criterion_06_far_field_decay():
    h = HelixParams(100.0)
    cfg = VelocityEvalConfig(kernel_cfg=KernelConfig(h=h))
    two = VorticityParticles(z=[[0.7, 0.0], [-0.7, 0.0]], gamma=[1.0, -1.0],
                             area=[1.0, 1.0], h=h)
    expo = decay_exponent(two, cfg)
    assert -2.2 <= expo <= -1.8
    _report(6, "far-field decay",
            f"fitted exponent {expo:.4f} in [-2.2, -1.8] "
            f"(probes 4R..32R, pitch kappa=100 keeps the power-law window)")


def test_criterion_07_decomposition_operator(h1, kcfg):
    cfg = VelocityEvalConfig(kernel_cfg=kcfg)
    patch = VorticityParticles(
        z=[[0.25, 0.0], [-0.25, 0.1], [0.0, -0.2]],
        gamma=[0.4, 0.3, 0.3], area=[0.1, 0.1, 0.1], h=h1)
    mass = patch.total_circulation
    prof_a = RadialProfile(1.0, 1.6).scaled_to_mass(mass)
    prof_b = RadialProfile(1.4, 2.6).scaled_to_mass(mass)
    rng = SplitMix64(47)
    probes = seeded_points(rng, 20, h1, 3.6, 5.5)
    ua = xi_operator(probes, patch, SteadyBackground(prof_a, h1), cfg)
    ub = xi_operator(probes, patch, SteadyBackground(prof_b, h1), cfg)
    profile_gap = float(np.max(np.abs(ua - ub)))
    assert profile_gap <= 1e-6

    # curl consistency against the represented vorticity (blob density along
    # each filament plus the closed-form background curl)
    eps = 0.12
    cfg_blob = VelocityEvalConfig(kernel_cfg=kcfg, blob_epsilon=eps,
                                  strip_constant=24.0, theta_max_points=2048)
    bg = SteadyBackground(prof_a, h1)
    rings = profile_ring_particles(bg.profile, h1, sign=-1.0)
    rscale = -patch.total_circulation / rings.total_circulation
    rings = VorticityParticles(z=rings.z, gamma=rings.gamma * rscale,
                               area=rings.area, h=h1)
    from helix_euler.biotsavart import merge_particles

    allparts = merge_particles(patch, rings)

    def velocity(x):
        u = velocity_filament(np.atleast_2d(x), allparts, cfg_blob)
        return u + background_velocity(np.atleast_2d(x), bg)

    P = h1.period

    def represented_vorticity(x):
        tot = np.zeros(3)
        nt = 1024
        th = -np.pi + (np.arange(nt) + 0.5) * (2 * np.pi / nt)
        for zj, gj in zip(allparts.z, allparts.gamma):
            nodes = np.column_stack([
                zj[0] * np.cos(th) + zj[1] * np.sin(th),
                -zj[0] * np.sin(th) + zj[1] * np.cos(th),
                h1.kappa * th,
            ])
            wv = x[None, :] - nodes
            dens = np.zeros(nt)
            for m in range(-2, 3):
                b = wv[:, 2] - m * P
                dens += (wv[:, 0] ** 2 + wv[:, 1] ** 2 + b * b + eps**2) ** -2.5
            dens *= 3 * eps**2 / (4 * np.pi)
            xin = np.column_stack([nodes[:, 1], -nodes[:, 0],
                                   np.full(nt, h1.kappa)])
            tot += gj * (2 * np.pi / nt) * (dens[:, None] * xin).sum(axis=0)
        r = np.hypot(x[0], x[1])
        tot += bg.profile(r) * xi(x, h1) / h1.kappa
        return tot

    rng2 = SplitMix64(91)
    cpoints = []
    while len(cpoints) < 8:
        p = seeded_points(rng2, 1, h1, 0.05, 0.45)[0]
        cpoints.append(p)
    num, den = 0.0, 0.0
    entries = []
    for p in cpoints:
        c = fd_curl(lambda q: velocity(q)[0], p, h=2e-3)
        e = represented_vorticity(p)
        num += float(np.dot(c, e))
        den += float(np.dot(e, e))
        entries.append((c, e))
    c_fit = num / den
    scale = max(np.linalg.norm(e) for _, e in entries)
    resid = max(np.linalg.norm(c - c_fit * e) for c, e in entries) / scale
    assert resid <= 1e-3
    assert abs(c_fit - 1.0) <= 1e-3
    _report(7, "decomposition operator",
            f"profile independence {profile_gap:.2e} at 20 probes (bar 1e-6); "
            f"curl reproduces the represented vorticity with measured "
            f"normalization constant {c_fit:.6f} (residual {resid:.2e}, bar 1e-3)")


def test_criterion_08_steady_radial_solution(h1, kcfg, steady_run):
    state0, final, report, snaps, ecfg = steady_run
    r0 = np.hypot(state0.particles.z[:, 0], state0.particles.z[:, 1])
    r1 = np.hypot(final.particles.z[:, 0], final.particles.z[:, 1])
    drift = float(np.max(np.abs(r1 - r0)))
    assert drift <= 1e-6

    prof = RadialProfile(0.2, 0.5, 1.0)
    bg = SteadyBackground(profile=prof, h=h1)
    tracer = VorticityParticles(z=[[1.2, 0.0]], gamma=[0.0], area=[1.0], h=h1)
    cfg = SimulationConfig(dt=0.01, t_end=1.0,
                           eval_cfg=VelocityEvalConfig(kernel_cfg=kcfg))
    tfinal, _, _ = run(TrajectoryState(0.0, tracer, bg), cfg)
    tdrift = abs(np.hypot(*tfinal.particles.z[0]) - 1.2)
    assert tdrift <= 1e-10
    _report(8, "steady radial solution",
            f"100 RK4 steps at dt=0.01: max radius drift {drift:.2e} (bar 1e-6); "
            f"passive tracer drift {tdrift:.2e} (bar 1e-10)")


def test_criterion_09_conservation(dipole_runs):
    msgs = []
    for label in ("coarse", "fine"):
        snaps = dipole_runs[label]["snapshots"]
        rep = conservation_report(snaps)
        assert rep["circulation_bitwise_constant"]
        assert rep["gammas_bitwise_constant"]
        assert rep["linf_bitwise_constant"]
        # discrete L^p with fixed areas is a function of the constant gammas
        # and areas only, hence bitwise constant as well
        p = 4.0
        lp = [math.fsum(((np.abs(s.particles.gamma) / s.particles.area) ** p
                         * s.particles.area).tolist()) for s in snaps]
        assert all(v == lp[0] for v in lp)
        msgs.append(f"{label}: circulation/Linf/Lp bitwise constant over "
                    f"{len(snaps)} snapshots")
    dist = {}
    for label in ("coarse", "fine"):
        d = dipole_runs[label]
        dist[label] = area_distortion(d["final"], d["particles"], reduce="mean")
    assert dist["fine"] < dist["coarse"]
    _report(9, "conservation",
            "; ".join(msgs) + f"; slice-area distortion {dist['coarse']:.2e} -> "
            f"{dist['fine']:.2e} under refinement")


def test_criterion_10_weak_residual(h1, dipole_runs):
    psi = make_test_function("radial-bump", kappa=1.0, support_radius=2.0,
                             t_end=0.3)
    res = {}
    for label in ("coarse", "fine"):
        d = dipole_runs[label]
        res[label] = weak_residual(d["snapshots"], psi, d["ecfg"])
    ratio = res["fine"] / res["coarse"]
    assert ratio <= 0.6

    d = dipole_runs["coarse"]
    state = d["snapshots"][len(d["snapshots"]) // 2]
    R0 = 2.2 * max(psi.support_radius, h1.period) + 1.0
    p_meta = 2.0                       # scenario metadata; s = p'/2 = 1
    s_exp = 0.5 * p_meta / (p_meta - 1.0)
    expected = 2.0 ** (-(2.0 - s_exp) / s_exp)
    rep1 = splitting_report(state, psi, CutoffPair(0.4, R0), d["ecfg"])
    rep2 = splitting_report(state, psi, CutoffPair(0.2, R0), d["ecfg"])
    scale = abs(rep1["total"]) + rep1["near_abs"] + 1e-30
    assert rep1["partition_residual"] <= 1e-13 * scale
    assert rep2["partition_residual"] <= 1e-13 * scale
    meas = rep2["near_abs"] / rep1["near_abs"]
    assert abs(meas - expected) <= 0.3 * expected
    _report(10, "weak residual",
            f"residual {res['coarse']:.3e} -> {res['fine']:.3e} under "
            f"(2x particles, dt/2): ratio {ratio:.3f} (bar 0.6); partition sums "
            f"to total within {rep1['partition_residual']:.1e}; near-part "
            f"delta-halving ratio {meas:.3f} vs 2^-(2-s)/s = {expected:.3f} "
            f"(p={p_meta}, within 30%)")


def _run_cli(outdir, args, threads):
    env = dict(os.environ)
    env.pop("HELIX_EULER_OUT", None)
    cmd = [sys.executable, "-m", "helix_euler.cli", "--out", str(outdir),
           "--threads", str(threads)] + args
    proc = subprocess.run(cmd, capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    tree = {}
    for root, _, files in os.walk(outdir):
        for f in files:
            p = os.path.join(root, f)
            rel = os.path.relpath(p, outdir)
            with open(p, "rb") as fh:
                tree[rel] = fh.read()
    return tree


def test_criterion_11_determinism(tmp_path):
    import json

    sim_scn = {"schema_version": 1, "kappa": 1.0, "kind": "simulate",
               "simulate": {"preset": "radial-steady", "n_rings": 2,
                            "n_angles": 12, "dt": 0.02, "t_end": 0.06,
                            "blob_epsilon": 0.3}}
    simfile = tmp_path / "sim.json"
    simfile.write_text(json.dumps(sim_scn))
    sim_out = tmp_path / "sim_ref"
    _run_cli(sim_out, ["--config", str(simfile), "simulate"], threads=1)
    wf_scn = {"schema_version": 1, "kappa": 1.0, "kind": "weakform-check",
              "weakform-check": {"snapshot_dir": str(sim_out), "t_end": 0.06,
                                 "support_radius": 2.4, "delta": 0.3}}
    wffile = tmp_path / "wf.json"
    wffile.write_text(json.dumps(wf_scn))
    decay_scn = {"schema_version": 1, "kappa": 100.0, "kind": "decay-study",
                 "decay-study": {"separation": 1.4}}
    dfile = tmp_path / "decay.json"
    dfile.write_text(json.dumps(decay_scn))
    vp_scn = {"schema_version": 1, "kappa": 1.0, "kind": "velocity-probe",
              "velocity-probe": {"preset": "radial-steady", "probes": 4,
                                 "blob_epsilon": 0.25}}
    vfile = tmp_path / "vp.json"
    vfile.write_text(json.dumps(vp_scn))

    commands = {
        "kernel-table": ["kernel-table"],
        "kernel-verify": ["--seed", "11", "kernel-verify", "--points", "200"],
        "velocity-probe": ["--config", str(vfile), "velocity-probe"],
        "decay-study": ["--config", str(dfile), "decay-study"],
        "simulate": ["--config", str(simfile), "simulate"],
        "weakform-check": ["--config", str(wffile), "weakform-check"],
    }
    checked = 0
    for name, args in commands.items():
        trees = []
        for tag, threads in (("a", 1), ("b", 1), ("t8", 8)):
            outdir = tmp_path / f"{name}_{tag}"
            trees.append(_run_cli(outdir, args, threads))
        assert trees[0].keys() == trees[1].keys() == trees[2].keys()
        for rel in trees[0]:
            assert trees[0][rel] == trees[1][rel], f"{name}:{rel} differs across runs"
            assert trees[0][rel] == trees[2][rel], f"{name}:{rel} differs across threads"
            checked += 1
    _report(11, "determinism",
            f"all 6 commands byte-identical across repeated runs and "
            f"--threads 1 vs 8 ({checked} artifact comparisons, figures included)")
