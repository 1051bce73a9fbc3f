"""Scenario files: schema validation and named initial-vorticity presets.

A scenario is a JSON document with ``schema_version``, ``kappa``, ``kind``
and one block named after the kind.  Unknown keys anywhere are rejected, all
physical parameters are range-checked, and every violated invariant maps to a
distinct machine-readable error code (the CLI forwards these as exit 2).

Presets build initial particle states:

* ``dipole``        -- two mollified discs of opposite sign (balanced),
* ``disc-patch``    -- one mollified disc (unbalanced; paired with a radial
                       profile background via the decomposition operator),
* ``ring``          -- smooth annular bump (unbalanced; same pairing),
* ``radial-steady`` -- two balanced annular bumps on a polar grid (a steady
                       configuration of the slice dynamics).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .biotsavart import (
    RadialProfile,
    SteadyBackground,
    VelocityEvalConfig,
    VorticityParticles,
    profile_ring_particles,
)
from .geometry import HelixParams
from .kernel import KernelConfig
from .transport import MollifierSpec, SliceField, SimulationConfig, TrajectoryState, mollify_initial

__all__ = ["ScenarioError", "Scenario", "load_scenario", "validate_scenario",
           "build_initial_state", "build_eval_config", "KINDS"]

SCHEMA_VERSION = 1
KINDS = ("kernel-table", "kernel-verify", "velocity-probe", "decay-study",
         "simulate", "weakform-check")
PRESETS = ("dipole", "disc-patch", "ring", "radial-steady")


class ScenarioError(ValueError):
    def __init__(self, code: str, message: str, path: str = ""):
        super().__init__(message)
        self.code = code
        self.path = path

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self), "path": self.path}


def _require(cond, code, message, path=""):
    if not cond:
        raise ScenarioError(code, message, path)


_COMMON_KEYS = {"schema_version", "kappa", "kind"}

_BLOCK_KEYS = {
    "kernel-table": {"r_min", "r_max", "n_r", "n_x3", "seed"},
    "kernel-verify": {"points", "seed", "r_min", "r_max"},
    "velocity-probe": {"preset", "amplitude", "radius", "separation", "center",
                       "mollifier_n", "resolution", "blob_epsilon", "n_theta",
                       "strip_constant", "theta_max", "probes", "seed",
                       "probe_radius", "profile"},
    "decay-study": {"separation", "circulation", "span_lo", "span_hi",
                    "n_radii", "n_angles", "n_theta", "strip_constant",
                    "theta_max"},
    "simulate": {"preset", "amplitude", "radius", "separation", "center",
                 "r_inner", "r_outer", "amplitude_outer", "n_rings", "n_angles",
                 "mollifier_n", "resolution", "dt", "t_end", "blob_epsilon",
                 "n_theta", "strip_constant", "theta_max", "diagnostics_every",
                 "p_norm", "integrator", "profile", "structure_probes"},
    "weakform-check": {"snapshot_dir", "test_function", "support_radius",
                       "t_end", "delta", "cutoff_R", "n_theta",
                       "strip_constant", "theta_max", "blob_epsilon", "p"},
}

_PROFILE_KEYS = {"r_inner", "r_outer"}


@dataclass
class Scenario:
    kappa: float
    kind: str
    block: dict = field(default_factory=dict)

    @property
    def h(self) -> HelixParams:
        return HelixParams(self.kappa)


def validate_scenario(doc: dict) -> Scenario:
    _require(isinstance(doc, dict), "invalid_document", "scenario must be a JSON object")
    _require("schema_version" in doc, "missing_schema_version", "schema_version is required")
    _require(doc["schema_version"] == SCHEMA_VERSION, "invalid_schema_version",
             f"schema_version must be {SCHEMA_VERSION}", "schema_version")
    _require("kappa" in doc, "missing_kappa", "kappa is required")
    kappa = doc["kappa"]
    _require(isinstance(kappa, (int, float)) and kappa > 0 and np.isfinite(kappa),
             "invalid_kappa", f"kappa must be a positive real, got {kappa!r}", "kappa")
    _require("kind" in doc, "missing_kind", "kind is required")
    kind = doc["kind"]
    _require(kind in KINDS, "invalid_kind", f"kind must be one of {KINDS}", "kind")
    for key in doc:
        _require(key in _COMMON_KEYS or key == kind, "unknown_key",
                 f"unknown top-level key {key!r}", key)
    block = doc.get(kind, {})
    _require(isinstance(block, dict), "invalid_block", f"{kind} block must be an object", kind)
    allowed = _BLOCK_KEYS[kind]
    for key in block:
        _require(key in allowed, "unknown_key",
                 f"unknown key {key!r} in {kind} block", f"{kind}.{key}")
    if "profile" in block:
        prof = block["profile"]
        _require(isinstance(prof, dict), "invalid_profile", "profile must be an object",
                 f"{kind}.profile")
        for key in prof:
            _require(key in _PROFILE_KEYS, "unknown_key",
                     f"unknown key {key!r} in profile", f"{kind}.profile.{key}")
        _require(0.0 < prof.get("r_inner", 0.0) < prof.get("r_outer", 0.0),
                 "invalid_profile", "need 0 < r_inner < r_outer", f"{kind}.profile")
    _check_positive(block, kind, ("radius", "separation", "resolution", "dt",
                                  "t_end", "support_radius", "delta", "cutoff_R",
                                  "amplitude", "r_inner", "r_outer", "r_min",
                                  "r_max", "probe_radius", "span_lo", "span_hi",
                                  "circulation", "strip_constant"))
    _check_positive_int(block, kind, ("points", "n_r", "n_x3", "n_theta",
                                      "theta_max", "mollifier_n", "probes",
                                      "diagnostics_every", "n_radii", "n_angles",
                                      "n_rings", "structure_probes"))
    if "blob_epsilon" in block:
        _require(block["blob_epsilon"] >= 0.0, "invalid_blob_epsilon",
                 "blob_epsilon must be nonnegative", f"{kind}.blob_epsilon")
    if "preset" in block:
        _require(block["preset"] in PRESETS, "invalid_preset",
                 f"preset must be one of {PRESETS}", f"{kind}.preset")
    if "dt" in block and "t_end" in block:
        _require(block["dt"] < block["t_end"], "invalid_dt",
                 "dt must be smaller than t_end", f"{kind}.dt")
    if "n_theta" in block:
        _require(block["n_theta"] >= 8, "invalid_n_theta",
                 "n_theta must be >= 8", f"{kind}.n_theta")
    return Scenario(kappa=float(kappa), kind=kind, block=block)


def _check_positive(block, kind, keys):
    for key in keys:
        if key in block:
            v = block[key]
            _require(isinstance(v, (int, float)) and v > 0 and np.isfinite(v),
                     f"invalid_{key}", f"{key} must be a positive real",
                     f"{kind}.{key}")


def _check_positive_int(block, kind, keys):
    for key in keys:
        if key in block:
            v = block[key]
            _require(isinstance(v, int) and v >= 1, f"invalid_{key}",
                     f"{key} must be a positive integer", f"{kind}.{key}")


def load_scenario(path) -> Scenario:
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ScenarioError("invalid_json", f"scenario is not valid JSON: {exc}")
    return validate_scenario(doc)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_eval_config(scn: Scenario) -> VelocityEvalConfig:
    b = scn.block
    return VelocityEvalConfig(
        kernel_cfg=KernelConfig(h=scn.h),
        theta_quadrature_points=b.get("n_theta", 64),
        blob_epsilon=b.get("blob_epsilon", 0.0),
        theta_max_points=b.get("theta_max", 1024),
        strip_constant=b.get("strip_constant", 19.0),
    )


def _disc_field(center, radius, amplitude):
    cx, cy = center

    def values(z):
        return np.where(np.hypot(z[..., 0] - cx, z[..., 1] - cy) <= radius,
                        amplitude, 0.0)

    span = float(np.hypot(cx, cy) + radius)
    return SliceField(values, support_radius=span)


def _dipole_field(separation, radius, amplitude):
    d = 0.5 * separation

    def values(z):
        plus = np.hypot(z[..., 0] - d, z[..., 1]) <= radius
        minus = np.hypot(z[..., 0] + d, z[..., 1]) <= radius
        return amplitude * (plus.astype(float) - minus.astype(float))

    return SliceField(values, support_radius=d + radius)


def _annulus_particles(profile: RadialProfile, h: HelixParams,
                       n_rings: int, n_angles: int, sign=1.0) -> VorticityParticles:
    """Midpoint polar-grid discretization (exact discrete ring symmetry)."""
    edges = np.linspace(profile.r_inner, profile.r_outer, n_rings + 1)
    rho = 0.5 * (edges[:-1] + edges[1:])
    drho = edges[1] - edges[0]
    phi = (np.arange(n_angles) + 0.5) * (2.0 * np.pi / n_angles)
    wphi = 2.0 * np.pi / n_angles
    z = np.empty((n_rings * n_angles, 2))
    z[:, 0] = (rho[:, None] * np.cos(phi)).ravel()
    z[:, 1] = (rho[:, None] * np.sin(phi)).ravel()
    area = np.repeat(rho * drho * wphi, n_angles)
    gam = sign * np.repeat(profile(rho) * rho * drho * wphi, n_angles)
    return VorticityParticles(z=z, gamma=gam, area=area, h=h)


def build_initial_state(scn: Scenario) -> TrajectoryState:
    """Initial particles (plus decomposition background when unbalanced)."""
    b = scn.block
    h = scn.h
    preset = b.get("preset", "radial-steady")
    amp = b.get("amplitude", 1.0)
    if preset == "dipole":
        field_ = _dipole_field(b.get("separation", 1.0), b.get("radius", 0.22), amp)
        parts = mollify_initial(field_, MollifierSpec(b.get("mollifier_n", 8)),
                                b.get("resolution", 0.06), h)
        return TrajectoryState(0.0, parts, None)
    if preset == "radial-steady":
        r1 = b.get("r_inner", 0.6)
        r2 = b.get("r_outer", 1.0)
        inner = RadialProfile(r1, r2, amp)
        outer = RadialProfile(1.3 * r2, 1.8 * r2, 1.0)
        n_rings = b.get("n_rings", 3)
        n_angles = b.get("n_angles", 24)
        pin = _annulus_particles(inner, h, n_rings, n_angles)
        pout_unit = _annulus_particles(outer, h, max(2, n_rings // 2), n_angles)
        scale = -pin.total_circulation / pout_unit.total_circulation
        pout = VorticityParticles(z=pout_unit.z, gamma=scale * pout_unit.gamma,
                                  area=pout_unit.area, h=h)
        from .biotsavart import merge_particles

        return TrajectoryState(0.0, merge_particles(pin, pout), None)
    # unbalanced presets: pair with the profile background
    if preset == "disc-patch":
        field_ = _disc_field(tuple(b.get("center", (0.0, 0.0))),
                             b.get("radius", 0.4), amp)
    else:  # ring
        rp = RadialProfile(b.get("r_inner", 0.5), b.get("r_outer", 0.9), amp)
        field_ = SliceField(lambda z: rp(np.hypot(z[..., 0], z[..., 1])),
                            support_radius=rp.r_outer)
    parts = mollify_initial(field_, MollifierSpec(b.get("mollifier_n", 8)),
                            b.get("resolution", 0.06), h)
    prof_spec = b.get("profile", {})
    span = field_.support_radius
    profile = RadialProfile(
        prof_spec.get("r_inner", 1.6 * span),
        prof_spec.get("r_outer", 2.4 * span),
    ).scaled_to_mass(parts.total_circulation)
    bg = SteadyBackground(profile=profile, h=h)
    rings = profile_ring_particles(profile, h, sign=-1.0)
    return TrajectoryState(0.0, parts, bg, static_particles=rings)


def build_simulation_config(scn: Scenario) -> SimulationConfig:
    b = scn.block
    return SimulationConfig(
        dt=b.get("dt", 0.02),
        t_end=b.get("t_end", 0.1),
        eval_cfg=build_eval_config(scn),
        integrator=b.get("integrator", "rk4"),
        diagnostics_every=b.get("diagnostics_every", 1),
        p_norm=b.get("p_norm", 4.0),
        structure_probes=b.get("structure_probes", 0),
    )
