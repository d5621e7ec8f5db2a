import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twobarrier.core import make_system
from twobarrier.scattering import scatter
from twobarrier.waves import decompose, joining_point_residual, plane_to_standing, standing_to_plane

systems = st.builds(make_system, V0=st.floats(0.2, 5.0), d=st.floats(0.2, 2.0), L=st.floats(0.0, 3.0),
                    a1=st.just(2.0))


def _pair(sys, k):
    return decompose(scatter(sys, np.array([k])))


@settings(max_examples=40, deadline=None)
@given(systems, st.floats(0.05, 3.0))
def test_subprocesses_add_up(sys, kr):
    pair = _pair(sys, kr * abs(sys.kappa0))
    x = np.linspace(sys.a1 - 2, sys.b2 + 2, 301)
    tot = pair.total(x)
    assert np.allclose(pair.transmitted(x) + pair.reflected(x), tot, atol=1e-9 * np.abs(tot).max())
    assert abs(pair.A_tr_in[0] + pair.A_ref_in[0] - 1) < 1e-12
    assert abs(abs(pair.A_tr_in[0]) ** 2 + abs(pair.A_ref_in[0]) ** 2 - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(systems, st.floats(0.05, 3.0))
def test_reflected_wave_vanishes_at_join(sys, kr):
    assert joining_point_residual(sys, [kr * abs(sys.kappa0)]) < 1e-10


def test_reflected_wave_is_zero_right_of_join(gapped_system):
    pair = _pair(gapped_system, 1.1)
    x = np.linspace(gapped_system.xc, gapped_system.b2 + 5, 100)
    assert np.max(np.abs(pair.reflected(x, side=1))) == 0.0


def test_total_flux_is_uniform(gapped_system):
    pair = _pair(gapped_system, 0.9)
    x = np.linspace(gapped_system.a1 - 3, gapped_system.b2 + 3, 500)
    flux = pair.total.flux(x)
    assert np.ptp(flux) < 1e-10 * np.abs(flux).max()


def test_transmitted_flux_continuous_at_join(gapped_system):
    tr = _pair(gapped_system, 0.9).transmitted
    xc = np.array([gapped_system.xc])
    assert tr.flux(xc, -1)[0] == pytest.approx(tr.flux(xc, 1)[0], rel=1e-10)
    # psi itself is continuous, the derivative may jump
    assert abs(tr(xc, -1)[0] - tr(xc, 1)[0]) < 1e-12


def test_waves_continuous_at_region_edges(gapped_system):
    pair = _pair(gapped_system, 1.7)
    for x0 in (gapped_system.a1, gapped_system.b1, gapped_system.a2, gapped_system.b2):
        x = np.array([x0])
        for w in (pair.total, pair.reflected):
            assert abs(w(x, -1)[0] - w(x, 1)[0]) < 1e-10
            assert abs(w.derivative(x, -1)[0] - w.derivative(x, 1)[0]) < 1e-9


def test_standing_plane_roundtrip():
    a, b = 0.3 - 1.1j, 2.0 + 0.4j
    A, B = standing_to_plane(a, b, 4.2, 1.3)
    a2, b2 = plane_to_standing(A, B, 4.2, 1.3)
    assert a2 == pytest.approx(a) and b2 == pytest.approx(b)
