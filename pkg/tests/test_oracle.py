import numpy as np
import pytest

from twobarrier import acceptance
from twobarrier.core import make_system
from twobarrier.oracle import OracleError, integrate_density, numeric_derivative, solve_stationary
from twobarrier.scattering import scatter
from twobarrier.times import dwell_times
from twobarrier.waves import decompose


@pytest.mark.parametrize("kr", [0.3, 0.999, 1.0, 1.001, 2.2])
def test_ode_matches_closed_form(gapped_system, kr):
    k = kr * abs(gapped_system.kappa0)
    sol = solve_stationary(gapped_system, k)
    two = scatter(gapped_system, np.array([k])).two
    assert abs(sol.a_out - two.a_out[0]) < 1e-8 * abs(two.a_out[0])
    assert abs(sol.b_out - two.b_out[0]) < 1e-8
    assert sol.flux_spread < 1e-8


def test_ode_survives_opaque_barrier():
    sys = make_system(1.0, 40.0, 1.3, 50.0)
    sol = solve_stationary(sys, 0.8)
    two = scatter(sys, np.array([0.8])).two
    assert abs(sol.a_out / two.a_out[0] - 1) < 1e-7


def test_ode_wave_matches_piecewise_wave(gapped_system):
    sol = solve_stationary(gapped_system, 1.1)
    total = decompose(scatter(gapped_system, np.array([1.1]))).total
    ref = total(sol.x)[0]
    assert np.max(np.abs(sol.psi - ref)) < 1e-8 * np.abs(ref).max()


def test_density_quadrature_matches_dwell(gapped_system):
    s = gapped_system
    k = 0.6 * abs(s.kappa0)
    sc = scatter(s, np.array([k]))
    pair, dw = decompose(sc), dwell_times(sc)
    scale = s.m / (s.hbar * k)
    tr = scale * integrate_density(pair.transmitted, (s.a1, s.b1)) / sc.two.T_two[0]
    assert tr == pytest.approx(dw.tau_tr_1[0], rel=1e-9)


def test_numeric_derivative():
    d = numeric_derivative(np.sin, 0.7)
    assert d.value == pytest.approx(np.cos(0.7), rel=1e-10)
    assert not d.noisy


def test_oracle_rejects_bad_input(gapped_system):
    with pytest.raises(ValueError):
        solve_stationary(gapped_system, -1.0)
    with pytest.raises(ValueError):
        integrate_density(decompose(scatter(gapped_system, np.array([1.0]))).total, (3.0, 1.0))
    assert issubclass(OracleError, RuntimeError)


def test_derivative_check_catches_sign_fault(monkeypatch):
    """Flipping the sign of T' must make the derivative check fail."""
    good = acceptance.check_derivatives(draws=2, k_per=3)
    assert all(r.passed for r in good)
    real = acceptance.one_barrier

    def broken(sys, kin):
        ob = real(sys, kin)
        return type(ob)(**{**ob.__dict__, "Tprime": -ob.Tprime})

    monkeypatch.setattr(acceptance, "one_barrier", broken)
    bad = acceptance.check_derivatives(draws=2, k_per=3)
    assert not all(r.passed for r in bad)
