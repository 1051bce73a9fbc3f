"""Figure rendering for the report-producing commands.

Each report command writes a PNG next to its delimited output.  Rendering is
deterministic: the Agg backend, fixed figure geometry, and stripped metadata
make repeated runs byte-identical, so figures participate in the determinism
checks like every other artifact.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_figure",
    "kernel_table_figure",
    "kernel_verify_figure",
    "decay_figure",
    "simulate_figure",
    "weakform_figure",
]

_FIGSIZE = (6.4, 4.0)
_DPI = 110


def save_figure(fig, path):
    fig.savefig(path, dpi=_DPI, metadata={"Software": None})
    plt.close(fig)


def kernel_table_figure(radii, g_series, g_images, kmag, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    ax1.semilogx(radii, g_series, label="series")
    ax1.semilogx(radii, g_images, "--", label="images")
    ax1.set_xlabel("planar radius")
    ax1.set_ylabel("G")
    ax1.legend()
    ax2.loglog(radii, kmag)
    ax2.set_xlabel("planar radius")
    ax2.set_ylabel("|K|")
    fig.tight_layout()
    save_figure(fig, path)


def kernel_verify_figure(radii, gdiff, kdiff, path):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.loglog(radii, np.maximum(gdiff, 1e-18), ".", ms=3, label="|G_series - G_images|")
    ax.loglog(radii, np.maximum(kdiff, 1e-18), ".", ms=3, label="kernel rel diff")
    ax.set_xlabel("planar radius")
    ax.set_ylabel("representation disagreement")
    ax.legend()
    fig.tight_layout()
    save_figure(fig, path)


def decay_figure(radii, umag, exponent, intercept, path):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.loglog(radii, umag, "o", ms=4, label="|u|")
    fit = np.exp(intercept) * radii**exponent
    ax.loglog(radii, fit, "--", label=f"fit slope {exponent:.3f}")
    ax.set_xlabel("planar radius")
    ax.set_ylabel("|u|")
    ax.legend()
    fig.tight_layout()
    save_figure(fig, path)


def simulate_figure(report, path):
    d = report.to_dict() if hasattr(report, "to_dict") else report
    t = d["times"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    ax1.plot(t, d["support_radius"], label="support radius")
    ax1.set_xlabel("t")
    ax1.legend()
    ax2.plot(t, d["l1"], label="L1")
    ax2.plot(t, d["l2"], label="L2")
    ax2.plot(t, d["linf"], label="Linf")
    ax2.set_xlabel("t")
    ax2.legend()
    fig.tight_layout()
    save_figure(fig, path)


def weakform_figure(parts: dict, path):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    names = ["near", "bulk", "far", "total"]
    vals = [parts[k] for k in names]
    ax.bar(names, vals)
    ax.set_ylabel("pair-term contribution")
    fig.tight_layout()
    save_figure(fig, path)
