"""Brute-force checks that share no algebra with the closed forms.

* :func:`solve_stationary` integrates the Schrodinger equation backward from the
  transmitted side with an adaptive Runge-Kutta scheme.
* :func:`integrate_density` runs adaptive quadrature over a wave's density.
* :func:`numeric_derivative` is a 5-point central difference with Richardson
  step halving.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp

from .core import BarrierSystem
from .waves import PiecewiseWave


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class OdeSolution:
    x: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    a_out: complex
    b_out: complex
    flux_spread: float


def solve_stationary(sys: BarrierSystem, k: float, rtol=1e-12, samples=32) -> OdeSolution:
    """Stationary state with unit incident wave, by backward integration from b2.

    The state is started as exp(ik(x - D)) at b2 and rescaled at every region
    boundary, with the log of the accumulated scale kept separately; this keeps
    e^(kappa x) growth finite up to kappa*d of a few hundred.
    """
    k = float(k)
    if not k > 0:
        raise ValueError("k must be > 0")
    q = 2 * sys.m / sys.hbar**2
    E = sys.energy(k)
    regions = [(sys.a2, sys.b2, sys.V0), (sys.b1, sys.a2, 0.0), (sys.a1, sys.b1, sys.V0)]
    y = np.array([np.exp(1j * k * sys.a1), 1j * k * np.exp(1j * k * sys.a1)])
    log_scale = 0.0
    xs, ps, dps = [], [], []
    for lo, hi, V in regions:
        if hi <= lo:
            continue
        c = q * (V - E)

        def rhs(_x, u, c=c):
            return np.array([u[1], c * u[0]])

        span = hi - lo
        sol = solve_ivp(rhs, (hi, lo), y, method="DOP853", rtol=rtol, atol=1e-14 * np.abs(y).max(),
                        dense_output=True, max_step=span / 4)
        if not sol.success:
            raise OracleError(f"integration failed on [{lo}, {hi}]: {sol.message}")
        xx = np.linspace(hi, lo, samples)
        u = sol.sol(xx)
        xs.append(xx)
        ps.append(u[0] * math.exp(log_scale))
        dps.append(u[1] * math.exp(log_scale))
        y = sol.y[:, -1]
        s = float(np.abs(y).max())
        y = y / s
        log_scale += math.log(s)

    psi, dpsi = y
    e = np.exp(1j * k * sys.a1)
    A = 0.5 * (psi + dpsi / (1j * k)) / e
    B = 0.5 * (psi - dpsi / (1j * k)) * e
    # scale-free ratios: a_out = 1/A, b_out e^{2ik a1} = B/A
    a_out = complex(math.exp(-log_scale) / A)
    b_out = complex(B / A / (e * e))
    x = np.concatenate(xs)
    P = np.concatenate(ps) * math.exp(-log_scale) / A
    dP = np.concatenate(dps) * math.exp(-log_scale) / A
    flux = np.imag(np.conj(P) * dP)
    spread = float(np.ptp(flux) / np.abs(flux).max()) if np.abs(flux).max() > 0 else 0.0
    return OdeSolution(x, P, dP, a_out, b_out, spread)


def integrate_density(wave: PiecewiseWave, interval, rel_tol=1e-12) -> float:
    """Integral of |psi|^2 for a single-k wave over ``interval``."""
    lo, hi = map(float, interval)
    if hi < lo:
        raise ValueError("interval must be ordered")
    if hi == lo:
        return 0.0
    cuts = sorted(b for b in wave.boundaries if lo < b < hi)
    probe = np.linspace(lo, hi, 257)
    peak = float(np.max(np.abs(wave(probe)) ** 2))
    if peak == 0.0:
        return 0.0
    tol = rel_tol * (hi - lo) * peak
    total = 0.0
    edges = [lo, *cuts, hi]
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)

        # evaluate each piece strictly inside its own region
        def f(x, a=a, b=b, mid=mid):
            side = 1 if x <= mid else -1
            return float(np.abs(wave(np.array([x]), side)).ravel()[0] ** 2)

        with warnings.catch_warnings():
            warnings.simplefilter("error", IntegrationWarning)
            try:
                val, err = quad(f, a, b, epsabs=tol * (b - a) / (hi - lo), epsrel=1e-13, limit=400)
            except IntegrationWarning as exc:
                raise OracleError(f"density quadrature did not converge on [{a}, {b}]: {exc}") from exc
        total += val
    return total


@dataclass(frozen=True)
class Derivative:
    value: float
    error: float
    noisy: bool


def _central5(f, x, h):
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def numeric_derivative(f, x, h=None, max_halvings=10) -> Derivative:
    """First derivative by 5-point differences, Richardson-extrapolated over step halving.

    All halvings are evaluated and the estimate with the smallest successive
    residual is kept.  ``noisy`` is set when that residual never drops below
    1e-8 of the value, which means round-off took over before convergence.
    """
    x = float(x)
    h = 0.05 * max(abs(x), 1e-3) if h is None else float(h)
    prev = _central5(f, x, h)
    last = None
    best, best_err = prev, np.inf
    for _ in range(max_halvings):
        h *= 0.5
        cur = _central5(f, x, h)
        # the 5-point error is O(h^4)
        extrap = cur + (cur - prev) / 15.0
        if last is not None:
            err = abs(extrap - last)
            if err < best_err:
                best, best_err = extrap, err
        last, prev = extrap, cur
    noisy = bool(best_err > 1e-8 * max(abs(best), 1e-300))
    return Derivative(float(best), float(best_err), noisy)
