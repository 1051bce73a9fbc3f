"""Slow independent oracles used only by the test suite.

The modified-Bessel oracle integrates the exponential-cosh representation by
a doubling trapezoid rule; the integrand is even and entire in the
integration variable, so the rule converges geometrically and the doubling
loop certifies its own accuracy.  The production code never imports this
module.
"""

import numpy as np


def _cosh_integral(t, weight_cosh: bool, s_max: float = 16.0,
                   rtol: float = 1e-14, n0: int = 64, n_max: int = 1 << 15):
    """integral_0^inf exp(-t cosh s) [cosh s] ds for a vector of t > 0."""
    t = np.atleast_1d(np.asarray(t, dtype=float))

    def level(n):
        s = np.linspace(0.0, s_max, n + 1)
        ch = np.cosh(s)
        with np.errstate(under="ignore"):
            f = np.exp(-np.outer(t, ch))
        if weight_cosh:
            f = f * ch
        return np.trapezoid(f, s, axis=1)

    prev = level(n0)
    n = 2 * n0
    while n <= n_max:
        cur = level(n)
        if np.all(np.abs(cur - prev) <= rtol * np.abs(cur)):
            return cur
        prev = cur
        n *= 2
    raise RuntimeError("Bessel oracle did not converge")


def k0_oracle(t):
    """K0 by direct quadrature of its integral representation."""
    out = _cosh_integral(t, weight_cosh=False)
    return out if np.ndim(t) else float(out[0])


def k1_oracle(t):
    """K1 by direct quadrature of its integral representation."""
    out = _cosh_integral(t, weight_cosh=True)
    return out if np.ndim(t) else float(out[0])


def fd_jacobian(field, x, h=1e-4):
    """Central-difference Jacobian of a 3-vector field at a point."""
    x = np.asarray(x, dtype=float)
    jac = np.empty((3, 3))
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        jac[:, a] = (np.asarray(field(x + e)).reshape(3)
                     - np.asarray(field(x - e)).reshape(3)) / (2.0 * h)
    return jac


def fd_curl(field, x, h=1e-4):
    j = fd_jacobian(field, x, h)
    return np.array([j[2, 1] - j[1, 2], j[0, 2] - j[2, 0], j[1, 0] - j[0, 1]])


def fd_divergence(field, x, h=1e-4):
    j = fd_jacobian(field, x, h)
    return float(np.trace(j)), float(np.linalg.norm(j))
