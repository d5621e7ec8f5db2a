import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twobarrier.core import (
    HBAR_EV_PS,
    M_E_EV_PS2_NM2,
    calibrate_mass_fraction,
    cosh_k,
    get_preset,
    make_system,
    sinh_minus_k,
    sinhc_k,
    system_from_dimensionless,
    xcosh_minus_sinh_k,
)


def test_geometry(gapped_system):
    s = gapped_system
    assert s.b1 == pytest.approx(s.a1 + s.d)
    assert s.a2 == pytest.approx(s.b1 + s.L)
    assert s.b2 == pytest.approx(s.a1 + s.D)
    assert s.xc == pytest.approx(0.5 * (s.a1 + s.b2))
    x = np.array([s.a1 - 1, s.a1 + 0.1, s.b1 + 0.1, s.a2 + 0.1, s.b2 + 1])
    assert list(s.potential(x)) == [0, s.V0, 0, s.V0, 0]


@pytest.mark.parametrize("kw", [dict(V0=1, d=0, L=0, a1=1, m=0), dict(V0=1, d=0, L=0, a1=1),
                                dict(V0=1, d=1, L=-0.1, a1=1), dict(V0=1, d=1, L=0, a1=0)])
def test_invalid_geometry_rejected(kw):
    with pytest.raises(ValueError):
        make_system(**kw)


def test_dimensionless_construction():
    s = system_from_dimensionless(3 * np.pi, 0.5, d=2.0)
    assert 2 * abs(s.kappa0) * s.d == pytest.approx(3 * np.pi)
    assert s.L == pytest.approx(1.0)
    assert s.tau0() == pytest.approx(2 * s.m * s.d / (s.hbar * abs(s.kappa0)))


def test_energy_wavenumber_roundtrip(gapped_system):
    k = np.array([0.3, 1.0, 4.0])
    assert np.allclose(gapped_system.wavenumber(gapped_system.energy(k)), k, rtol=1e-14)


def test_mass_calibration():
    mf = calibrate_mass_fraction(0.025, 15.0, 0.05)
    pr = get_preset("effective-mass", mf)
    k = math.sqrt(2 * pr.mass * 0.05) / pr.hbar
    assert pr.mass * 15.0 / (pr.hbar * k) == pytest.approx(0.025, rel=1e-12)
    assert pr.mass == pytest.approx(mf * M_E_EV_PS2_NM2)
    assert HBAR_EV_PS == pytest.approx(6.582119569e-4, rel=1e-9)


def test_unknown_preset():
    with pytest.raises(ValueError):
        get_preset("atomic")
    with pytest.raises(ValueError):
        get_preset("effective-mass")


def _direct(kappa, x):
    kx = kappa * x
    return (np.cosh(kx), np.sinh(kx) / kappa, (np.sinh(kx) - kx) / kappa**3,
            (kx * np.cosh(kx) - np.sinh(kx)) / kappa**3)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.1, 3.0), st.booleans())
def test_regular_helpers_match_direct_forms(mag, x, imaginary):
    kappa = complex(0, mag) if imaginary else complex(mag, 0)
    got = (cosh_k(kappa, x), sinhc_k(kappa, x), sinh_minus_k(kappa, x), xcosh_minus_sinh_k(kappa, x))
    for g, e in zip(got, _direct(kappa, x)):
        assert abs(g - e) <= 1e-9 * max(1.0, abs(e))


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-12, 1e-4), st.floats(0.1, 3.0))
def test_regular_helpers_continuous_at_zero(eps, x):
    limits = (1.0, x, x**3 / 6, x**3 / 3)
    for kappa in (complex(eps, 0), complex(0, eps)):
        got = (cosh_k(kappa, x), sinhc_k(kappa, x), sinh_minus_k(kappa, x), xcosh_minus_sinh_k(kappa, x))
        for g, lim in zip(got, limits):
            assert abs(g - lim) <= 1e-6 * abs(lim)
