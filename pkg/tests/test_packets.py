import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twobarrier import acceptance
from twobarrier.core import make_system
from twobarrier.packets import (
    PacketSpec,
    build_x_grid,
    five_point_derivative,
    gauss_legendre_panels,
    refine_crossing,
    run_packet,
    stage_masks,
    linear_fit,
)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 5), st.integers(1, 6))
def test_gauss_legendre_panels_exact_for_polynomials(lo, width, panels):
    x, w = gauss_legendre_panels(lo, lo + width, panels, 8)
    hi = lo + width
    assert np.sum(w * x**5) == pytest.approx((hi**6 - lo**6) / 6, rel=1e-10, abs=1e-10)


def test_x_grid_does_not_straddle_edges(gapped_system):
    g = build_x_grid(gapped_system, -20, 30, 0.7, inner_width=0.1)
    s = gapped_system
    for edge in (s.a1, s.b1, s.xc, s.a2, s.b2):
        assert edge in g.breaks
    assert np.sum(g.w) == pytest.approx(50.0, rel=1e-13)


def test_packet_spec_amplitude_normalised():
    spec = PacketSpec(l0=4.0, kbar=2.0)
    k = np.linspace(0, 5, 20001)
    assert np.trapezoid(spec.amplitude(k) ** 2, k) == pytest.approx(1.0, rel=1e-8)
    assert spec.tail_mass < 1e-30


def test_refine_crossing():
    t = refine_crossing(lambda tt: 2.0 * np.asarray(tt), 0.0, 3.0, 1.0, 1e-10)
    assert t == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(ValueError):
        refine_crossing(lambda tt: np.asarray(tt), 0.0, 1.0, 5.0, 1e-6)


def test_five_point_derivative():
    t = np.linspace(0, 2, 201)
    d = five_point_derivative(np.sin(t), t[1] - t[0])
    assert np.max(np.abs(d - np.cos(t))[2:-2]) < 1e-8
    assert np.max(np.abs(d - np.cos(t))) < 1e-3


@pytest.fixture(scope="module")
def free_run():
    sys = make_system(0.0, 1.0, 0.0, 50.0)
    spec = PacketSpec(l0=5.0, kbar=2.0)
    return sys, spec, run_packet(sys, spec)


def test_free_packet_moves_classically(free_run):
    sys, spec, tr = free_run
    v = sys.hbar * spec.kbar / sys.m
    assert np.max(np.abs(tr.x_tr - v * tr.t)) < 1e-8
    assert np.max(np.abs(tr.norm_T - 1)) < 1e-10
    assert np.max(np.abs(tr.rwp_x - tr.x_tr)) < 1e-8
    assert tr.T_as == pytest.approx(1.0, abs=1e-12)
    assert tr.tau_tr_loc == pytest.approx(sys.tau_free(spec.kbar), rel=0.02)


@pytest.fixture(scope="module")
def semi():
    return acceptance.semitransparent_run()


def test_semitransparent_conservation(semi):
    sys, spec, tr = semi
    assert np.ptp(tr.norm_R) < 1e-9
    assert abs(tr.norm_T[-1] - tr.norm_T[0]) < 1e-9
    assert tr.T_as + tr.R_as == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(tr.norm_tot - 1)) < 1e-8
    assert abs(tr.kspace.interference.real) < 1e-12


def test_semitransparent_times(semi):
    sys, spec, tr = semi
    assert tr.ocs_valid and tr.quad_converged
    assert tr.t_tr_entry < tr.t_tr_exit
    assert tr.tau_tr_loc == pytest.approx(tr.t_tr_exit - tr.t_tr_entry)
    assert 0 < tr.tau_tr_as < tr.tau_tr_loc
    assert np.all(np.diff(tr.x_tr) > 0)


def test_semitransparent_stage_fits(semi):
    sys, spec, tr = semi
    early, late = stage_masks(tr, sys, spec)
    v = tr.kspace.kbar_tr * sys.hbar / sys.m
    slope, intercept = linear_fit(tr.t, tr.x_tr, late)
    assert slope == pytest.approx(v, rel=5e-3)
    # the transmitted packet leaves shifted by D - <J'>_tr
    assert intercept == pytest.approx(sys.D - tr.kspace.Jp_tr, abs=1e-6 * sys.D)
    slope0, intercept0 = linear_fit(tr.t, tr.x_tr, early)
    assert -intercept0 / slope0 == pytest.approx(tr.t_dep, rel=2e-2)
