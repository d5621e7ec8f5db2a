import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twobarrier.core import make_system, system_from_dimensionless
from twobarrier.scattering import scatter, unit_transmission_points
from twobarrier.times import (
    dwell_times,
    midpoint_lengths,
    resonance_lengths,
    single_barrier_times,
    time_scales,
    times_profile,
    times_vs_L,
)

systems = st.builds(make_system, V0=st.floats(0.2, 5.0), d=st.floats(0.2, 2.0), L=st.floats(0.0, 3.0),
                    a1=st.just(2.0))


@settings(max_examples=60, deadline=None)
@given(systems, st.floats(0.02, 3.0))
def test_transmission_dwell_splits_in_half(sys, kr):
    dw = dwell_times(scatter(sys, np.array([kr * abs(sys.kappa0)])))
    assert dw.tau_tr_left[0] == pytest.approx(0.5 * dw.tau_tr_dwell[0], rel=1e-12)


def test_buttiker_equals_transmission_dwell_at_resonance(gapped_system):
    k0 = abs(gapped_system.kappa0)
    pts = unit_transmission_points(gapped_system, (0.0, 3 * k0))
    ts = time_scales(gapped_system, np.array(pts))
    assert np.allclose(ts.tau_dwell, ts.tau_tr_dwell, rtol=1e-9)


@settings(max_examples=60, deadline=None)
@given(systems, st.floats(0.02, 3.0))
def test_asymptotic_time_is_phase_minus_departure(sys, kr):
    ts = time_scales(sys, np.array([kr * abs(sys.kappa0)]))
    assert ts.tau_as[0] == pytest.approx(ts.tau_ph[0] - ts.tau_dep[0], rel=1e-12, abs=1e-14)
    assert ts.x_start[0] == pytest.approx(-ts.tau_dep[0] * ts.k[0] / (sys.m / sys.hbar), rel=1e-12, abs=1e-14)


def test_all_times_positive(fig1_system):
    ts = time_scales(fig1_system, np.linspace(0.01, 3, 3000) * abs(fig1_system.kappa0))
    for name in ("tau_tr_dwell", "tau_ref_dwell", "tau_dwell", "tau_ph", "tau_as"):
        assert np.all(getattr(ts, name) > 0), name


def test_no_gap_term_without_gap(fig1_system):
    ts = time_scales(fig1_system, np.array([0.5, 2.0, 7.0]))
    assert np.all(ts.tau_tr_gap == 0) and np.all(ts.tau_ref_gap == 0)


@pytest.mark.parametrize("L_over_d", [0.0, 0.5])
def test_departure_time_alternates_at_resonances(L_over_d):
    sys = system_from_dimensionless(3 * np.pi, L_over_d)
    k0 = abs(sys.kappa0)
    pts = unit_transmission_points(sys, (0.0, 3 * k0))
    dep = time_scales(sys, np.array(pts)).tau_dep
    signs = np.sign(dep)
    assert list(signs) == [1 if i % 2 == 0 else -1 for i in range(len(pts))]


def test_low_energy_ordering(fig1_system):
    ts = time_scales(fig1_system, np.array([0.02]) * abs(fig1_system.kappa0))
    assert ts.tau_tr_dwell[0] > 10 * ts.tau_as[0]
    assert ts.tau_as[0] > 10 * ts.tau_ref_dwell[0]
    assert ts.tau_as[0] == pytest.approx(ts.tau_ph[0], rel=0.05)
    assert ts.tau_ref_dwell[0] == pytest.approx(ts.tau_dwell[0], rel=0.05)


def test_single_barrier_forms_at_zero_gap(fig1_system):
    k = np.linspace(0.05, 3, 400) * abs(fig1_system.kappa0)
    ts = time_scales(fig1_system, k)
    tau_as, x_start = single_barrier_times(fig1_system, scatter(fig1_system, k).kin)
    assert np.allclose(tau_as, ts.tau_as, rtol=1e-10)
    assert np.allclose(x_start, ts.x_start, rtol=1e-10, atol=1e-10 * fig1_system.D)


def test_fig5_transmission_dwell_monotone_in_L(fig1_system):
    k = 0.97 * abs(fig1_system.kappa0)
    prof = times_vs_L(fig1_system, k, np.linspace(0, 10, 1001) * fig1_system.d)
    assert np.all(np.diff(prof.column("tau_tr_dwell")) > 0)


def test_fig3_transmission_dwell_grows_with_L(fig1_system):
    k = 1.5 * abs(fig1_system.kappa0)
    prof = times_vs_L(fig1_system, k, np.linspace(0, 10, 1001) * fig1_system.d)
    tr = prof.column("tau_tr_dwell")
    assert tr[-1] > tr[0]
    assert np.all(np.diff(tr) > 0)


def test_asymptotic_time_saturates_at_gap_midpoints():
    sys = make_system(1.0, 15.0, 0.0, 80.0)
    mids = midpoint_lengths(sys, 1.0, 60.0)
    tau_as = [time_scales(sys.with_(L=L), np.array([1.0])).tau_as[0] for L in mids[1:]]
    assert np.ptp(tau_as) < 0.02 * np.mean(tau_as)


def test_resonance_lengths_are_resonant(fig1_system):
    k = 0.97 * abs(fig1_system.kappa0)
    for L in resonance_lengths(fig1_system, k, 10.0):
        two = scatter(fig1_system.with_(L=L), np.array([k])).two
        assert two.T_two[0] == pytest.approx(1.0, abs=1e-10)


def test_profile_flags(fig1_system):
    k0 = abs(fig1_system.kappa0)
    pts = unit_transmission_points(fig1_system, (0.0, 3 * k0))
    grid = np.sort(np.concatenate([np.linspace(0.1, 3, 50) * k0, pts[:1]]))
    prof = times_profile(fig1_system, grid)
    assert len(prof.flags) == grid.size
    assert "near-resonance" in prof.flags and "ok" in prof.flags
    with pytest.raises(ValueError):
        times_profile(fig1_system, grid[::-1])
