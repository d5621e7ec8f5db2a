"""Stationary time scales: subprocess dwell times, Buttiker dwell time, phase,
asymptotic and departure times, plus the closed forms for a single barrier.

Every expression is written with the kappa-regular helpers from
:mod:`twobarrier.core`; ``S(x) = sinh(kappa x)/kappa``,
``W(x) = (sinh(kappa x) - kappa x)/kappa^3`` and
``V(x) = (kappa x cosh(kappa x) - sinh(kappa x))/kappa^3``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .core import (
    BarrierSystem,
    Kinematics,
    real_part,
    sinh_minus_k,
    sinhc_k,
    xcosh_minus_sinh_k,
)
from .scattering import Scattering, find_resonances, scatter


@dataclass(frozen=True)
class DwellParts:
    tau_tr_1: np.ndarray
    tau_tr_gap: np.ndarray
    tau_tr_2: np.ndarray
    tau_ref_1: np.ndarray
    tau_ref_gap: np.ndarray
    P_abs2: np.ndarray

    @property
    def tau_tr_dwell(self):
        return self.tau_tr_1 + self.tau_tr_gap + self.tau_tr_2

    @property
    def tau_ref_dwell(self):
        return self.tau_ref_1 + self.tau_ref_gap

    @property
    def tau_tr_left(self):
        """Transmission dwell time over [a1, x_c]; equals tau_tr_dwell/2."""
        return self.tau_tr_1 + 0.5 * self.tau_tr_gap


@dataclass(frozen=True)
class ButtikerParts:
    tau_tot_1: np.ndarray
    tau_tot_gap: np.ndarray
    tau_tot_2: np.ndarray

    @property
    def tau_dwell(self):
        return self.tau_tot_1 + self.tau_tot_gap + self.tau_tot_2


@dataclass(frozen=True)
class TimeScales:
    k: np.ndarray
    T_two: np.ndarray
    R_two: np.ndarray
    tau_tr_dwell: np.ndarray
    tau_tr_1: np.ndarray
    tau_tr_gap: np.ndarray
    tau_tr_2: np.ndarray
    tau_ref_dwell: np.ndarray
    tau_ref_1: np.ndarray
    tau_ref_gap: np.ndarray
    tau_dwell: np.ndarray
    tau_tot_1: np.ndarray
    tau_tot_gap: np.ndarray
    tau_tot_2: np.ndarray
    tau_ph: np.ndarray
    tau_as: np.ndarray
    tau_dep: np.ndarray
    x_start: np.ndarray
    tau_free: np.ndarray
    tau_0: float
    near_resonance: np.ndarray


def _S(kin, x):
    return real_part(sinhc_k(kin.kappa, x))


def _W(kin, x):
    return real_part(sinh_minus_k(kin.kappa, x))


def _V(kin, x):
    return real_part(xcosh_minus_sinh_k(kin.kappa, x))


def dwell_times(sc: Scattering) -> DwellParts:
    sys, kin, one, two = sc.sys, sc.kin, sc.one, sc.two
    k, d, L, m, hb = kin.k, sys.d, sys.L, sys.m, sys.hbar
    T, R, J, s = one.T, one.R, one.J, one.s
    S, S2, W2 = _S(kin, d), _S(kin, 2 * d), _W(kin, 2 * d)
    eta_sqrtR = s * np.sqrt(T)  # eta*sqrt(R)

    tau_bar = m / (4 * hb * k) * (2 * d + S2 + k * k * W2)
    tau_gap = m / (hb * k * k) * (
        k * L * (1 + R) / T + 4 * s * np.sin(0.5 * k * L) * np.sin(J + 0.5 * k * L) / np.sqrt(T)
    )
    P2 = (1 + R - 2 * eta_sqrtR * np.sin(J + k * L)) / T
    cL, sL = np.cos(k * L), np.sin(k * L)
    TP = two.T_two * P2
    tau_ref_1 = m * TP / (2 * hb * k) * (
        (1 - cL) * (2 * d + S2) + k * k * (1 + cL) * W2 + 4 * k * sL * S * S
    )
    tau_ref_gap = m * TP / (hb * k * k) * (k * L - sL)
    return DwellParts(tau_bar, tau_gap, tau_bar, tau_ref_1, tau_ref_gap, P2)


def buttiker_dwell(sc: Scattering) -> ButtikerParts:
    sys, kin, one, two = sc.sys, sc.kin, sc.one, sc.two
    k, d, L, m, hb = kin.k, sys.d, sys.L, sys.m, sys.hbar
    T, R, J, s = one.T, one.R, one.J, one.s
    S, S2, W2 = _S(kin, d), _S(kin, 2 * d), _W(kin, 2 * d)
    Rt = two.R_two
    # sqrt(R_two) sin(J_two - F_two) and sqrt(R_two) cos(J_two - F_two)
    rs, rc = two.b_out.real, -two.b_out.imag
    tau_1 = m / (4 * hb * k) * (
        (1 + Rt) * (2 * d + S2 + k * k * W2) + 2 * rs * (2 * d + S2 - k * k * W2) - 8 * k * rc * S * S
    )
    tau_gap = m * two.T_two / (hb * k * k) * (
        k * L * (1 + R) / T + 2 * s * np.sin(J + k * L) * np.sin(k * L) / np.sqrt(T)
    )
    tau_bar = m / (4 * hb * k) * (2 * d + S2 + k * k * W2)
    return ButtikerParts(tau_1, tau_gap, tau_bar * two.T_two)


def group_times(sc: Scattering):
    """(tau_ph, tau_as, tau_dep, x_start) for a monochromatic state."""
    pref = sc.sys.m / (sc.sys.hbar * sc.k)
    tau_ph = pref * sc.two.Jtwo_prime
    tau_dep = pref * sc.two.lambda_prime
    return tau_ph, tau_ph - tau_dep, tau_dep, -sc.two.lambda_prime


def single_barrier_times(sys: BarrierSystem, kin: Kinematics, width=None):
    """(tau_as, x_start) for one rectangular barrier of width ``width`` (default D).

    Only meaningful when L = 0, where the pair merges into one barrier of width D.
    """
    D = sys.D if width is None else width
    k, k0sq = kin.k, sys.kappa0_sq
    SD, SD2 = _S(kin, D), _S(kin, D / 2)
    den = 4 * k * k + k0sq**2 * SD * SD
    N1 = k * k + k0sq * kin.kappa_sq * SD2 * SD2
    tau_as = 4 * sys.m * N1 * (k * k * _W(kin, D) + SD) / (sys.hbar * k * den)
    x_start = -2 * k0sq * (SD + k * k * _V(kin, D)) / den
    return tau_as, x_start


def time_scales(sys: BarrierSystem, k) -> TimeScales:
    sc = scatter(sys, k)
    dw = dwell_times(sc)
    bt = buttiker_dwell(sc)
    tau_ph, tau_as, tau_dep, x_start = group_times(sc)
    return TimeScales(
        k=sc.k, T_two=sc.two.T_two, R_two=sc.two.R_two,
        tau_tr_dwell=dw.tau_tr_dwell, tau_tr_1=dw.tau_tr_1, tau_tr_gap=dw.tau_tr_gap,
        tau_tr_2=dw.tau_tr_2, tau_ref_dwell=dw.tau_ref_dwell, tau_ref_1=dw.tau_ref_1,
        tau_ref_gap=dw.tau_ref_gap, tau_dwell=bt.tau_dwell, tau_tot_1=bt.tau_tot_1,
        tau_tot_gap=bt.tau_tot_gap, tau_tot_2=bt.tau_tot_2, tau_ph=tau_ph, tau_as=tau_as,
        tau_dep=tau_dep, x_start=x_start, tau_free=sys.tau_free(sc.k), tau_0=sys.tau0(),
        near_resonance=sc.two.near_resonance,
    )


@dataclass(frozen=True)
class Profile:
    sweep: str
    values: np.ndarray
    times: TimeScales
    flags: list
    resonances: list

    def column(self, name):
        return np.asarray(getattr(self.times, name))


def _row_flags(ts: TimeScales):
    flags = []
    for i in range(np.size(ts.k)):
        vals = [np.ravel(getattr(ts, f.name))[i] for f in fields(ts) if f.name.startswith("tau_") and f.name != "tau_0"]
        if not np.all(np.isfinite(vals)):
            flags.append("nan")
        elif np.ravel(ts.near_resonance)[i]:
            flags.append("near-resonance")
        else:
            flags.append("ok")
    return flags


def times_profile(sys: BarrierSystem, k_grid) -> Profile:
    k_grid = np.asarray(k_grid, dtype=float)
    if k_grid.ndim != 1 or np.any(k_grid <= 0) or np.any(np.diff(k_grid) <= 0):
        raise ValueError("k_grid must be strictly increasing and positive")
    ts = time_scales(sys, k_grid)
    roots = find_resonances(sys, (0.0, float(k_grid[-1])))
    return Profile("k", k_grid, ts, _row_flags(ts), roots)


def _stack(rows):
    out = {}
    for f in fields(TimeScales):
        vals = [getattr(r, f.name) for r in rows]
        out[f.name] = vals[0] if f.name == "tau_0" else np.array([np.ravel(v)[0] for v in vals])
    return TimeScales(**out)


def times_vs_L(sys: BarrierSystem, k: float, L_grid) -> Profile:
    """Time scales at fixed k as the inter-barrier distance varies."""
    L_grid = np.asarray(L_grid, dtype=float)
    rows = [time_scales(sys.with_(L=float(L)), np.array([k])) for L in L_grid]
    ts = _stack(rows)
    roots = [L for L in resonance_lengths(sys, k, L_grid[-1]) if L >= L_grid[0]]
    return Profile("L", L_grid, ts, _row_flags(ts), roots)


def resonance_lengths(sys: BarrierSystem, k: float, L_max: float):
    """Gap widths L in [0, L_max] at which k is a resonance (chi = pi/2 + n pi)."""
    J = float(np.ravel(scatter(sys, k).one.J)[0])
    n0 = int(np.ceil((J - np.pi / 2) / np.pi))
    out = []
    n = n0
    while True:
        L = (np.pi / 2 + n * np.pi - J) / k
        if L > L_max:
            break
        if L >= 0:
            out.append(L)
        n += 1
    return out


def midpoint_lengths(sys: BarrierSystem, k: float, L_max: float):
    """Gap widths halfway (in chi) between resonances, where |cos chi| = 1."""
    J = float(np.ravel(scatter(sys, k).one.J)[0])
    out = []
    n = int(np.ceil(J / np.pi))
    while True:
        L = (n * np.pi - J) / k
        if L > L_max:
            break
        if L >= 0:
            out.append(L)
        n += 1
    return out

