import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twobarrier.core import make_system
from twobarrier.scattering import (
    amplitudes_from_QP,
    barrier_qp,
    find_resonances,
    scatter,
    transfer_matrix_single,
    transfer_matrix_two,
    transparency_points,
    unit_transmission_points,
)

systems = st.builds(make_system, V0=st.floats(0.2, 5.0), d=st.floats(0.2, 3.0), L=st.floats(0.0, 4.0),
                    a1=st.just(2.0))


@settings(max_examples=60, deadline=None)
@given(systems, st.floats(0.01, 3.0))
def test_unitarity(sys, kr):
    sc = scatter(sys, np.array([kr * abs(sys.kappa0)]))
    assert abs(sc.two.T_two[0] + sc.two.R_two[0] - 1) < 1e-13
    assert abs(sc.one.T[0] + sc.one.R[0] - 1) < 1e-13
    assert abs(abs(sc.two.a_out[0]) ** 2 + abs(sc.two.b_out[0]) ** 2 - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(systems, st.floats(0.01, 3.0))
def test_qp_form_matches_parameter_form(sys, kr):
    two = scatter(sys, np.array([kr * abs(sys.kappa0)])).two
    a, b = amplitudes_from_QP(two)
    assert abs(a[0] - two.a_out[0]) < 1e-10
    assert abs(b[0] - two.b_out[0]) < 1e-10


def test_transfer_matrices_unimodular(gapped_system):
    k = np.linspace(0.05, 3, 200) * abs(gapped_system.kappa0)
    sc = scatter(gapped_system, k)
    m1 = transfer_matrix_single(gapped_system, k, sc.one, 1)
    m2 = transfer_matrix_single(gapped_system, k, sc.one, 2)
    mt = transfer_matrix_two(gapped_system, k, sc.two)
    for m in (m1, m2, mt):
        assert np.allclose(m.det, 1.0, atol=1e-9)
    # the pair equals the product of the single barriers
    prod = m1 @ m2
    assert np.allclose(np.abs(prod.q) ** -2, sc.two.T_two, rtol=1e-9)


def test_single_barrier_qp_consistent(gapped_system):
    sc = scatter(gapped_system, np.array([0.7, 1.3, 2.9]))
    q, p = barrier_qp(sc.one)
    assert np.allclose(np.abs(q) ** 2 - np.abs(p) ** 2, 1.0, atol=1e-12)
    assert np.allclose(1 / np.abs(q) ** 2, sc.one.T)


def test_opaque_barrier_is_finite():
    sys = make_system(1.0, 150.0, 0.7, 200.0)
    sc = scatter(sys, np.array([0.2, 0.7, 0.95, 1.4]))
    for arr in (sc.two.T_two, sc.two.R_two, sc.two.Jtwo_prime, sc.two.lambda_prime):
        assert np.all(np.isfinite(arr))
    assert np.all(sc.two.T_two[:3] < 1e-40)
    assert np.all(sc.two.R_two[:3] == 1.0)


def test_threshold_is_continuous(gapped_system):
    k0 = abs(gapped_system.kappa0)
    k = k0 * (1 + np.array([-1e-7, -1e-12, 0.0, 1e-12, 1e-7]))
    two = scatter(gapped_system, k).two
    for arr in (two.T_two, two.Jtwo_prime, two.lambda_prime):
        assert np.ptp(arr) < 1e-5 * np.max(np.abs(arr))


def test_resonances_give_unit_transmission(gapped_system):
    k0 = abs(gapped_system.kappa0)
    roots = find_resonances(gapped_system, (0.0, 3 * k0))
    assert len(roots) > 3
    sc = scatter(gapped_system, np.array(roots))
    assert np.max(np.abs(sc.two.T_two - 1)) < 1e-10
    assert np.max(np.abs(np.cos(sc.two.chi))) < 1e-10


def test_transparency_points(fig1_system):
    pts = transparency_points(fig1_system, 3 * abs(fig1_system.kappa0))
    sc = scatter(fig1_system, np.array(pts))
    assert np.max(sc.one.R) < 1e-20
    assert np.max(np.abs(sc.two.T_two - 1)) < 1e-12


def test_fig1_unit_transmission_points(fig1_system):
    k0 = abs(fig1_system.kappa0)
    pts = np.array(unit_transmission_points(fig1_system, (0.0, 3 * k0))) / k0
    expected = [1.054, 1.2019, 1.414, 1.667, 1.944, 2.236, 2.539, 2.848]
    assert pts == pytest.approx(expected, abs=1e-3)


def test_invalid_k(gapped_system):
    with pytest.raises(ValueError):
        scatter(gapped_system, np.array([-1.0]))
