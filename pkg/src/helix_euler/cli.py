"""Command-line front end.

Six subcommands: ``kernel-table``, ``kernel-verify``, ``velocity-probe``,
``decay-study``, ``simulate`` and ``weakform-check``.  Every command reads an
optional scenario file (--config), writes its artifacts into the output
directory (--out, overridden by the HELIX_EULER_OUT environment variable) and
is byte-deterministic: identical inputs produce identical bytes, independent
of --threads (which is accepted for interface stability; evaluation uses
exactly rounded reductions, so parallelism could never change values).

Exit codes: 0 success, 2 validation error (machine-readable JSON on stderr),
3 I/O error, 4 numerical failure (a verification exceeded its tolerance).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import plots
from .biotsavart import (
    VelocityEvalConfig,
    VorticityParticles,
    decay_exponent,
    velocity_filament,
)
from .geometry import HelixParams, rotate, screw, swirl
from .io_utils import SplitMix64, emit_csv, emit_json, read_csv
from .kernel import KernelConfig, biot_savart_kernel, green_images, green_series, kernel_bound_ratio
from .scenarios import (
    Scenario,
    ScenarioError,
    build_eval_config,
    build_initial_state,
    build_simulation_config,
    load_scenario,
)
from .transport import SimulationConfig, TrajectoryState, conservation_report, run
from .weakform import (
    CutoffPair,
    make_test_function,
    splitting_report,
    weak_residual,
    weak_residual_velocity_form,
    velocity_l2_truncated,
)

__all__ = ["main"]


class NumericalFailure(RuntimeError):
    pass


def _out_dir(args) -> str:
    out = os.environ.get("HELIX_EULER_OUT", args.out)
    os.makedirs(out, exist_ok=True)
    return out


def _scenario(args, kind: str) -> Scenario:
    if args.config:
        scn = load_scenario(args.config)
        if scn.kind != kind:
            raise ScenarioError("wrong_kind",
                                f"scenario kind {scn.kind!r} does not match command {kind!r}",
                                "kind")
        return scn
    return Scenario(kappa=args.kappa, kind=kind, block={})


def _seeded_points(rng: SplitMix64, n: int, h: HelixParams,
                   r_min: float, r_max: float) -> np.ndarray:
    pts = np.empty((n, 3))
    for i in range(n):
        r = r_min * (r_max / r_min) ** rng.next_float()
        phi = 2.0 * np.pi * rng.next_float()
        pts[i, 0] = r * np.cos(phi)
        pts[i, 1] = r * np.sin(phi)
        pts[i, 2] = h.period * (rng.next_float() - 0.5)
    return pts


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_kernel_table(args):
    scn = _scenario(args, "kernel-table")
    b = scn.block
    h = scn.h
    cfg = KernelConfig(h=h)
    n_r = b.get("n_r", 48)
    n_x3 = b.get("n_x3", 5)
    radii = np.geomspace(b.get("r_min", 0.05 * h.kappa), b.get("r_max", 10.0 * h.kappa), n_r)
    x3s = np.linspace(-0.8, 0.8, n_x3) * h.half_period
    rows = []
    fig_r, fig_gs, fig_gi, fig_k = [], [], [], []
    for x3 in x3s:
        pts = np.column_stack([radii, np.zeros(n_r), np.full(n_r, x3)])
        gs = green_series(pts, cfg)
        gi = green_images(pts, cfg)
        kv = biot_savart_kernel(pts, cfg)
        ratio = kernel_bound_ratio(pts, cfg)
        for i in range(n_r):
            rows.append((pts[i, 0], pts[i, 1], pts[i, 2], gs[i], gi[i],
                         kv.value[i, 0], kv.value[i, 1], kv.value[i, 2],
                         ratio[i], kv.representation_used[i]))
        if x3 == x3s[0]:
            fig_r, fig_gs, fig_gi = radii, gs, gi
            fig_k = np.linalg.norm(kv.value, axis=1)
    out = _out_dir(args)
    emit_csv(os.path.join(out, "kernel_table.csv"),
             ["x1", "x2", "x3", "G_series", "G_images", "K1", "K2", "K3",
              "bound_ratio", "repr"], rows)
    if not args.no_plot:
        plots.kernel_table_figure(fig_r, fig_gs, fig_gi, fig_k,
                                  os.path.join(out, "kernel_table.png"))
    return 0


def _cmd_kernel_verify(args):
    scn = _scenario(args, "kernel-verify")
    b = scn.block
    h = scn.h
    cfg = KernelConfig(h=h)
    n = args.points if args.points else b.get("points", 1000)
    rng = SplitMix64(args.seed)
    pts = _seeded_points(rng, n, h, b.get("r_min", 0.05 * h.kappa),
                         b.get("r_max", 10.0 * h.kappa))
    gs = green_series(pts, cfg)
    gi = green_images(pts, cfg)
    gdiff = np.abs(gs - gi)
    r = np.hypot(pts[:, 0], pts[:, 1])
    from .kernel import _kernel_components

    w3 = pts[:, 2]
    rad_s, ax_s = _kernel_components(r, w3, cfg, np.ones(n, bool))
    rad_i, ax_i = _kernel_components(r, w3, cfg, np.zeros(n, bool))
    mag = np.hypot(rad_s, ax_s)
    kdiff = np.hypot(rad_s - rad_i, ax_s - ax_i) / mag
    report = {
        "points": n,
        "seed": args.seed,
        "kappa": h.kappa,
        "euler_gamma_exp": cfg.euler_gamma,
        "max_series_vs_images": float(gdiff.max()),
        "max_kernel_rel_diff": float(kdiff.max()),
        "tolerance_green": 1e-8,
        "tolerance_kernel": 1e-7,
    }
    out = _out_dir(args)
    emit_json(os.path.join(out, "kernel_verify.json"), report)
    if not args.no_plot:
        plots.kernel_verify_figure(r, gdiff, kdiff,
                                   os.path.join(out, "kernel_verify.png"))
    if report["max_series_vs_images"] > 1e-8 or report["max_kernel_rel_diff"] > 1e-7:
        raise NumericalFailure("kernel representations disagree beyond tolerance")
    return 0


def _probe_field(state: TrajectoryState, ecfg: VelocityEvalConfig):
    from .transport import _field_velocity

    def field(pts):
        return _field_velocity(np.atleast_2d(pts), state, ecfg)

    return field


def _cmd_velocity_probe(args):
    scn = _scenario(args, "velocity-probe")
    b = scn.block
    h = scn.h
    state = build_initial_state(scn)
    ecfg = build_eval_config(scn)
    field = _probe_field(state, ecfg)
    rng = SplitMix64(args.seed)
    n = b.get("probes", 12)
    rad = b.get("probe_radius", 2.0)
    pts = _seeded_points(rng, n, h, 0.3 * rad, rad)
    u = field(pts)
    sw = swirl(u, pts, h)
    theta = 0.7
    ahead = field(screw(theta, pts, h))
    heli = np.linalg.norm(ahead - rotate(theta, u), axis=1)
    fd = 1e-4
    rows = []
    for i, p in enumerate(pts):
        grad = np.zeros((3, 3))
        for a in range(3):
            e = np.zeros(3)
            e[a] = fd
            grad[:, a] = (field(p + e)[0] - field(p - e)[0]) / (2 * fd)
        rows.append((p[0], p[1], p[2], u[i, 0], u[i, 1], u[i, 2],
                     sw[i], float(np.trace(grad)), heli[i]))
    out = _out_dir(args)
    emit_csv(os.path.join(out, "velocity_probe.csv"),
             ["x1", "x2", "x3", "u1", "u2", "u3", "swirl", "div_fd",
              "helicality_residual_norm"], rows)
    return 0


def _cmd_decay_study(args):
    scn = _scenario(args, "decay-study")
    b = scn.block
    h = scn.h
    ecfg = build_eval_config(scn)
    sep = b.get("separation", 1.4)
    circ = b.get("circulation", 1.0)
    parts = VorticityParticles(
        z=[[0.5 * sep, 0.0], [-0.5 * sep, 0.0]],
        gamma=[circ, -circ], area=[1.0, 1.0], h=h,
    )
    span = (b.get("span_lo", 4.0), b.get("span_hi", 32.0))
    n_radii = b.get("n_radii", 12)
    n_angles = b.get("n_angles", 4)
    expo = decay_exponent(parts, ecfg, span=span, n_radii=n_radii, n_angles=n_angles)
    support = 0.5 * sep
    radii = np.geomspace(span[0] * support, span[1] * support, n_radii)
    angles = (np.arange(n_angles) + 0.3) * (2.0 * np.pi / n_angles)
    targets = np.empty((n_radii * n_angles, 3))
    targets[:, 0] = (radii[:, None] * np.cos(angles)).ravel()
    targets[:, 1] = (radii[:, None] * np.sin(angles)).ravel()
    targets[:, 2] = 0.0
    u = velocity_filament(targets, parts, ecfg)
    umag = np.linalg.norm(u, axis=1).reshape(n_radii, n_angles)
    mean_u = np.exp(np.log(umag).mean(axis=1))
    intercept = float(np.polyfit(np.log(radii), np.log(mean_u), 1)[1])
    out = _out_dir(args)
    emit_csv(os.path.join(out, "decay_study.csv"), ["radius", "mean_abs_u"],
             list(zip(radii, mean_u)))
    emit_json(os.path.join(out, "decay_study.json"), {
        "kappa": h.kappa,
        "separation": sep,
        "exponent": expo,
        "intercept": intercept,
        "probe_radii": list(radii),
    })
    if not args.no_plot:
        plots.decay_figure(radii, mean_u, expo, intercept,
                           os.path.join(out, "decay_study.png"))
    return 0


def _cmd_simulate(args):
    scn = _scenario(args, "simulate")
    state = build_initial_state(scn)
    cfg = build_simulation_config(scn)
    final, report, snapshots = run(state, cfg)
    out = _out_dir(args)
    snapdir = os.path.join(out, "snapshots")
    os.makedirs(snapdir, exist_ok=True)
    times = []
    for i, s in enumerate(snapshots):
        p = s.particles
        rows = [(j, p.z[j, 0], p.z[j, 1], p.gamma[j], p.area[j])
                for j in range(len(p))]
        emit_csv(os.path.join(snapdir, f"snap_{i:05d}.csv"),
                 ["j", "z1", "z2", "gamma", "area"], rows)
        times.append(s.t)
    manifest = {
        "schema_version": 1,
        "kappa": scn.kappa,
        "kind": "simulate",
        "preset": scn.block.get("preset", "dipole"),
        "dt": cfg.dt,
        "t_end": cfg.t_end,
        "blob_epsilon": cfg.eval_cfg.blob_epsilon,
        "n_theta": cfg.eval_cfg.theta_quadrature_points,
        "strip_constant": cfg.eval_cfg.strip_constant,
        "theta_max": cfg.eval_cfg.theta_max_points,
        "snapshot_times": times,
        "balanced": state.particles.is_balanced(),
        "has_background": state.background is not None,
        "profile": None if state.background is None else {
            "r_inner": state.background.profile.r_inner,
            "r_outer": state.background.profile.r_outer,
            "amplitude": state.background.profile.amplitude,
        },
    }
    emit_json(os.path.join(out, "manifest.json"), manifest)
    diag = report.to_dict()
    diag["conservation"] = conservation_report(snapshots)
    emit_json(os.path.join(out, "diagnostics.json"), diag)
    if not args.no_plot:
        plots.simulate_figure(report, os.path.join(out, "simulate.png"))
    return 0


def _load_snapshots(snapshot_dir: str, manifest: dict):
    h = HelixParams(manifest["kappa"])
    snapdir = os.path.join(snapshot_dir, "snapshots")
    states = []
    for i, t in enumerate(manifest["snapshot_times"]):
        header, rows = read_csv(os.path.join(snapdir, f"snap_{i:05d}.csv"))
        z = np.array([[float(r[1]), float(r[2])] for r in rows])
        gam = np.array([float(r[3]) for r in rows])
        area = np.array([float(r[4]) for r in rows])
        states.append(TrajectoryState(float(t), VorticityParticles(z, gam, area, h)))
    return states


def _cmd_weakform_check(args):
    scn = _scenario(args, "weakform-check")
    b = scn.block
    snapshot_dir = b.get("snapshot_dir", args.out)
    try:
        import json

        with open(os.path.join(snapshot_dir, "manifest.json")) as f:
            manifest = json.load(f)
    except FileNotFoundError as exc:
        raise ScenarioError("missing_manifest",
                            f"no simulation manifest under {snapshot_dir!r}") from exc
    states = _load_snapshots(snapshot_dir, manifest)
    h = HelixParams(manifest["kappa"])
    ecfg = VelocityEvalConfig(
        kernel_cfg=KernelConfig(h=h),
        theta_quadrature_points=manifest.get("n_theta", 64),
        blob_epsilon=manifest.get("blob_epsilon", 0.0),
        theta_max_points=manifest.get("theta_max", 1024),
        strip_constant=manifest.get("strip_constant", 19.0),
    )
    psi = make_test_function(b.get("test_function", "radial-bump"), h.kappa,
                             support_radius=b.get("support_radius", 2.0),
                             t_end=b.get("t_end", manifest["t_end"]))
    if manifest.get("balanced", True):
        residual = weak_residual(states, psi, ecfg)
        form = "pair-kernel"
    else:
        from .biotsavart import SteadyBackground, RadialProfile, profile_ring_particles
        from .transport import _field_velocity

        prof = manifest["profile"]
        bg = SteadyBackground(RadialProfile(prof["r_inner"], prof["r_outer"],
                                            prof["amplitude"]), h)
        rings = profile_ring_particles(bg.profile, h, sign=-1.0)

        def velocity_fn(t, pts):
            idx = int(np.argmin([abs(s.t - t) for s in states]))
            st = TrajectoryState(t, states[idx].particles, bg, rings)
            return _field_velocity(np.atleast_2d(pts), st, ecfg)

        residual = weak_residual_velocity_form(states, psi, velocity_fn, ecfg)
        form = "velocity"
    delta = b.get("delta", 0.1)
    cut_r = b.get("cutoff_R", 2.2 * max(psi.support_radius, h.period) + 1.0)
    mid = states[len(states) // 2]
    parts = splitting_report(mid, psi, CutoffPair(delta, cut_r), ecfg)
    parts_half = splitting_report(mid, psi, CutoffPair(0.5 * delta, cut_r), ecfg)
    p_meta = b.get("p", 4.0)
    s_exp = 0.5 * p_meta / (p_meta - 1.0)          # s = p'/2
    report = {
        "residual": residual,
        "form": form,
        "p": p_meta,
        "delta_scaling_exponent": (2.0 - s_exp) / s_exp,
        "parts": {"near": parts["near"], "bulk": parts["bulk"], "far": parts["far"]},
        "refinement_table": [
            {"delta": parts["delta"], "near": parts["near"],
             "total": parts["total"], "partition_residual": parts["partition_residual"]},
            {"delta": parts_half["delta"], "near": parts_half["near"],
             "total": parts_half["total"], "partition_residual": parts_half["partition_residual"]},
        ],
        "velocity_l2_truncated": velocity_l2_truncated(mid, ecfg,
                                                       2.0 * psi.support_radius),
    }
    out = _out_dir(args)
    emit_json(os.path.join(out, "weakform_check.json"), report)
    if not args.no_plot:
        plots.weakform_figure(parts, os.path.join(out, "weakform_check.png"))
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser():
    ap = argparse.ArgumentParser(prog="helix-euler",
                                 description="helical vortex computations")
    ap.add_argument("--config", default=None, help="scenario JSON file")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int, default=0, help="probe-point seed")
    ap.add_argument("--threads", type=int, default=1,
                    help="accepted for interface stability; never affects values")
    ap.add_argument("--kappa", type=float, default=1.0,
                    help="helix pitch when no scenario file is given")
    ap.add_argument("--no-plot", action="store_true", help="skip figure output")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("kernel-table")
    kv = sub.add_parser("kernel-verify")
    kv.add_argument("--points", type=int, default=None)
    sub.add_parser("velocity-probe")
    sub.add_parser("decay-study")
    sub.add_parser("simulate")
    sub.add_parser("weakform-check")
    return ap


_COMMANDS = {
    "kernel-table": _cmd_kernel_table,
    "kernel-verify": _cmd_kernel_verify,
    "velocity-probe": _cmd_velocity_probe,
    "decay-study": _cmd_decay_study,
    "simulate": _cmd_simulate,
    "weakform-check": _cmd_weakform_check,
}


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ScenarioError as exc:
        emit_json_stderr(exc.to_dict())
        return 2
    except (ValueError,) as exc:
        emit_json_stderr({"code": "invalid_value", "message": str(exc), "path": ""})
        return 2
    except OSError as exc:
        emit_json_stderr({"code": "io_error", "message": str(exc), "path": ""})
        return 3
    except NumericalFailure as exc:
        emit_json_stderr({"code": "numerical_failure", "message": str(exc), "path": ""})
        return 4


def emit_json_stderr(obj):
    import json

    sys.stderr.write(json.dumps(obj, sort_keys=True) + "\n")


if __name__ == "__main__":
    sys.exit(main())
