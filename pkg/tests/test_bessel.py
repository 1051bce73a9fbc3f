import numpy as np
import pytest

from helix_euler.bessel import BesselAccuracy, k0, k0e, k1, k1e
from oracles import k0_oracle, k1_oracle


def test_frozen_values():
    # oracle-derived reference values
    assert abs(k0(1.0) - 0.42102443824070834) < 1e-15
    assert abs(k1(1.0) - 0.6019072301972346) < 1e-15


def test_against_oracle_log_grid():
    t = np.geomspace(1e-3, 30.0, 120)
    np.testing.assert_allclose(k0(t), k0_oracle(t), rtol=1e-12)
    np.testing.assert_allclose(k1(t), k1_oracle(t), rtol=1e-12)


def test_monotone_decreasing_and_ordering():
    t = np.geomspace(1e-4, 600.0, 400)
    v0 = k0e(t)
    v1 = k1e(t)
    assert np.all(v0 > 0) and np.all(v1 > 0)
    assert np.all(np.diff(k0(np.geomspace(1e-4, 500, 300))) < 0)
    assert np.all(v1 > v0)  # K1 > K0 throughout


def test_derivative_identity():
    # K0' = -K1 via central differences
    for t in (0.3, 1.0, 2.5, 7.0):
        h = 1e-5
        fd = -(k0(t + h) - k0(t - h)) / (2 * h)
        assert abs(fd - k1(t)) < 1e-8 * k1(t) + 1e-12


def test_weighted_integral_identities():
    # integral t K0 = 1 and integral t K1 = pi/2, composite Gauss panels
    gn, gw = np.polynomial.legendre.leggauss(120)
    total0 = total1 = 0.0
    for a, b in ((1e-9, 2.0), (2.0, 12.0), (12.0, 80.0)):
        x = 0.5 * (a + b) + 0.5 * (b - a) * gn
        w = 0.5 * (b - a) * gw
        total0 += np.sum(w * x * k0(x))
        total1 += np.sum(w * x * k1(x))
    assert abs(total0 - 1.0) < 1e-8
    assert abs(total1 - np.pi / 2) < 1e-8


def test_asymptotic_regime():
    # scaled K0 tends to 1 with leading correction -1/(8t)
    for t in (50.0, 100.0):
        scaled = k0(t) * np.exp(t) * np.sqrt(2 * t / np.pi)
        assert abs(scaled - 1.0) < 1.0 / (7.5 * t)
        assert abs(scaled - (1.0 - 1.0 / (8 * t))) < 1.0 / t**2


def test_scaled_variants():
    t = np.geomspace(0.1, 600.0, 50)
    with np.errstate(under="ignore"):
        np.testing.assert_allclose(k0e(t) * np.exp(-t), k0(t), rtol=1e-13)
    # scaled forms stay finite far beyond the underflow point
    assert np.isfinite(k0e(5000.0)) and k0e(5000.0) > 0
    assert np.isfinite(k1e(5000.0))


def test_domain_errors_and_underflow():
    with pytest.raises(ValueError):
        k0(0.0)
    with pytest.raises(ValueError):
        k1(-1.0)
    with pytest.raises(ValueError):
        k0(np.array([1.0, -2.0]))
    assert k0(800.0) == 0.0  # documented underflow to zero


def test_accuracy_config():
    acc = BesselAccuracy()
    assert acc.max_relative_error == 1e-12
    with pytest.raises(ValueError):
        BesselAccuracy(max_relative_error=0.0)
    with pytest.raises(ValueError):
        BesselAccuracy(domain=(0.0, 1.0))
