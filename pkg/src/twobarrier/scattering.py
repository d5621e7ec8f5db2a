"""Single-barrier parameters, transfer matrices and the two-barrier composition.

Everything is vectorised over the wavenumber.  The derivative formulas are
written through the entire functions of kappa^2 from :mod:`twobarrier.core`,
so they stay finite at E = V0 and at single-barrier transparency points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import (
    BarrierSystem,
    Kinematics,
    cosh_k,
    kinematics,
    real_part,
    sinh_minus_k,
    sinhc_k,
    xcosh_minus_sinh_k,
)

# below this R_two a point is reported as near-resonance
RESONANCE_GUARD = 1e-12


@dataclass(frozen=True)
class OneBarrierParams:
    T: np.ndarray
    R: np.ndarray
    J: np.ndarray
    F: np.ndarray
    eta: np.ndarray
    Tprime: np.ndarray
    Jprime: np.ndarray
    # theta_plus*sinh(kappa*d); T = 1/(1+s^2), R = s^2/(1+s^2)
    s: np.ndarray


@dataclass(frozen=True)
class TransferMatrix:
    """[[q, p], [conj(p), conj(q)]] mapping right-side plane-wave amplitudes to the left."""

    q: np.ndarray
    p: np.ndarray

    @property
    def det(self):
        return np.abs(self.q) ** 2 - np.abs(self.p) ** 2

    def as_array(self):
        q, p = np.broadcast_arrays(self.q, self.p)
        return np.moveaxis(np.array([[q, p], [np.conj(p), np.conj(q)]]), (0, 1), (-2, -1))

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        q = self.q * other.q + self.p * np.conj(other.p)
        p = self.q * other.p + self.p * np.conj(other.q)
        return TransferMatrix(q, p)

    def inverse(self) -> "TransferMatrix":
        # unimodular, so the inverse is the adjugate
        return TransferMatrix(np.conj(self.q), -self.p)

    def apply(self, right):
        """(A_left, B_left) for right-side amplitudes (A_right, B_right)."""
        A, B = right
        return self.q * A + self.p * B, np.conj(self.p) * A + np.conj(self.q) * B


@dataclass(frozen=True)
class TwoBarrierParams:
    T_two: np.ndarray
    R_two: np.ndarray
    J_two: np.ndarray
    F_two: np.ndarray
    eta_two: np.ndarray
    chi: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    a_out: np.ndarray
    b_out: np.ndarray
    lam: np.ndarray
    Jtwo_prime: np.ndarray
    lambda_prime: np.ndarray
    near_resonance: np.ndarray


def one_barrier(sys: BarrierSystem, kin: Kinematics) -> OneBarrierParams:
    k, kappa, d = kin.k, kin.kappa, sys.d
    kappa_sq = kin.kappa_sq
    k0sq = sys.kappa0_sq
    C = real_part(cosh_k(kappa, d), "cosh(kappa d)")
    S = real_part(sinhc_k(kappa, d), "sinh(kappa d)/kappa")
    S2 = real_part(sinhc_k(kappa, 2 * d), "sinh(2 kappa d)/kappa")
    W2 = real_part(sinh_minus_k(kappa, 2 * d), "W(2d)")
    V = real_part(xcosh_minus_sinh_k(kappa, d), "V(d)")

    s = k0sq * S / (2 * k)
    T = 1.0 / (1.0 + s * s)
    R = s * s / (1.0 + s * s)
    # theta_minus*tanh(kappa d) = y/C
    y = (k * k - kappa_sq) * S / (2 * k)
    with np.errstate(divide="ignore"):
        J = np.arctan(y / C) + np.where(C < 0, np.pi, 0.0)
    eta = np.where(s > 0, 1.0, -1.0)
    F = np.where(eta > 0, 0.0, np.pi)

    Jprime = T / (4 * k * k) * (k**4 * W2 + 2 * k * k * (S2 + d) + kappa_sq * S2)
    Tprime = k0sq**2 * T * T * S / (2 * k**3) * (k * k * V + S)
    return OneBarrierParams(T, R, J, F, eta, Tprime, Jprime, s)


def barrier_qp(one: OneBarrierParams):
    """Position-independent pair q = exp(-iJ)/sqrt(T), p = eta*sqrt(R/T)."""
    q = np.exp(-1j * one.J) / np.sqrt(one.T)
    p = one.eta * np.sqrt(one.R / one.T)
    return q, p


def transfer_matrix_single(sys: BarrierSystem, k, one: OneBarrierParams, n: int) -> TransferMatrix:
    if n == 1:
        a, b = sys.a1, sys.b1
    elif n == 2:
        a, b = sys.a2, sys.b2
    else:
        raise ValueError(f"barrier index must be 1 or 2, got {n}")
    k = np.asarray(k, dtype=float)
    q, p = barrier_qp(one)
    return TransferMatrix(q * np.exp(1j * k * (b - a)), 1j * p * np.exp(-1j * k * (b + a)))


def transfer_matrix_two(sys: BarrierSystem, k, two: TwoBarrierParams) -> TransferMatrix:
    """Closed-form Y_two built from (T_two, J_two, F_two)."""
    k = np.asarray(k, dtype=float)
    q = np.exp(1j * (k * sys.D - two.J_two)) / np.sqrt(two.T_two)
    p = 1j * np.sqrt(two.R_two / two.T_two) * np.exp(1j * (two.F_two - k * (sys.b2 + sys.a1)))
    return TransferMatrix(q, p)


def two_barrier(sys: BarrierSystem, kin: Kinematics, one: OneBarrierParams) -> TwoBarrierParams:
    k, L = kin.k, sys.L
    T, R, J, s = one.T, one.R, one.J, one.s
    chi = J + k * L
    c, sn = np.cos(chi), np.sin(chi)

    # 4 R cos^2(chi) / T^2 with R/T^2 = s^2 (1 + s^2)
    with np.errstate(over="ignore"):
        G = 4.0 * s * s * (1.0 + s * s) * c * c
    T_two = 1.0 / (1.0 + G)
    # G overflows for kappa*d beyond ~170
    with np.errstate(divide="ignore", invalid="ignore"):
        R_two = np.where(G > 1.0, 1.0 / (1.0 + 1.0 / G), G / (1.0 + G))

    F0 = np.where(c >= 0, 0.0, np.pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        J_two = J + np.arctan(T / (1.0 + R) * np.tan(chi)) + F0
    F_two = np.mod(one.F + F0, 2 * np.pi)
    eta_two = np.where(np.isclose(F_two, 0.0), 1.0, -1.0)

    a_out = np.sqrt(T_two) * np.exp(1j * J_two)
    b_out = -1j * np.sqrt(R_two) * np.exp(1j * (J_two - F_two))

    q, p = barrier_qp(one)
    half = np.exp(0.5j * k * L)
    Q = np.conj(q) * half + 1j * p / half
    P = 1j * np.conj(q) * half + p / half

    lam = eta_two * np.arctan2(np.sqrt(T_two), np.sqrt(R_two))

    Jp = one.Jprime
    ratio = 1.0 / (T * T + 4.0 * R * c * c)  # T_two / T^2
    Jtwo_prime = Jp + ratio * (T * (1 + R) * (Jp + L) + one.Tprime * np.sin(2 * chi))

    # eta*T'/sqrt(R) = kappa0^2 T^(3/2) (k^2 V + S)/k^2, regular where R -> 0
    kappa = kin.kappa
    S = real_part(sinhc_k(kappa, sys.d))
    V = real_part(xcosh_minus_sinh_k(kappa, sys.d))
    eta_Tp_over_sqrtR = sys.kappa0_sq * T**1.5 * (k * k * V + S) / (k * k)
    eta_sqrtR = s * np.sqrt(T)
    lambda_prime = ratio * (
        eta_Tp_over_sqrtR * (1 + R) * c + 2.0 * eta_sqrtR * T * (Jp + L) * sn
    )
    return TwoBarrierParams(
        T_two, R_two, J_two, F_two, eta_two, chi, Q, P, a_out, b_out, lam,
        Jtwo_prime, lambda_prime, R_two < RESONANCE_GUARD,
    )


def amplitudes_from_QP(two: TwoBarrierParams):
    """a_out, b_out from the Q/P form; must equal the parameter form."""
    rq = two.Q / np.conj(two.Q)
    rp = two.P / np.conj(two.P)
    return 0.5 * (rq - rp), -0.5 * (rq + rp)


@dataclass(frozen=True)
class Scattering:
    """Bundle of everything the stationary problem produces for a k (grid)."""

    sys: BarrierSystem
    kin: Kinematics
    one: OneBarrierParams
    two: TwoBarrierParams

    @property
    def k(self):
        return self.kin.k


def scatter(sys: BarrierSystem, k) -> Scattering:
    kin = kinematics(sys, k)
    one = one_barrier(sys, kin)
    return Scattering(sys, kin, one, two_barrier(sys, kin, one))


def continuous_phase(J_two):
    """J_two along a monotone k sweep with the 2*pi branch jumps removed."""
    return np.unwrap(np.asarray(J_two))


def _cos_chi(sys, k):
    kin = kinematics(sys, k)
    one = one_barrier(sys, kin)
    return np.cos(one.J + kin.k * sys.L)


def find_resonances(sys: BarrierSystem, k_range, n_scan: int = 4000, max_step=0.5):
    """Roots of cos(J(k) + kL) in ``k_range`` = (k_lo, k_hi], ascending.

    The scan is refined until chi changes by less than ``max_step`` between
    neighbouring points, so no pair of roots (spaced by pi in chi) can hide
    inside one step.  Entry i of the result is resonance number i + 1.
    """
    k_lo, k_hi = map(float, k_range)
    if not 0 <= k_lo < k_hi:
        raise ValueError(f"bad k range {k_range}")
    k_lo = max(k_lo, 1e-9 * k_hi)
    n = n_scan
    while True:
        ks = np.linspace(k_lo, k_hi, n)
        kin = kinematics(sys, ks)
        one = one_barrier(sys, kin)
        chi = np.unwrap(one.J) + ks * sys.L
        if np.max(np.abs(np.diff(chi))) < max_step or n > 2_000_000:
            break
        n *= 2
    c = np.cos(chi)
    roots = []
    for i in np.nonzero(np.sign(c[:-1]) * np.sign(c[1:]) < 0)[0]:
        r = brentq(lambda kk: float(_cos_chi(sys, kk)), ks[i], ks[i + 1],
                   xtol=1e-15 * ks[i + 1], rtol=1e-15, maxiter=200)
        roots.append(r)
    # an exact zero on a scan node
    for i in np.nonzero(c == 0)[0]:
        roots.append(float(ks[i]))
    return sorted(roots)


def transparency_points(sys: BarrierSystem, k_hi: float):
    """Wavenumbers in (0, k_hi] where one barrier is transparent (R = 0).

    There sinh(kappa d) = 0, i.e. |kappa| d = n pi, so k_n^2 = kappa0^2 + (n pi/d)^2.
    """
    out = []
    n = 1
    while True:
        k2 = sys.kappa0_sq + (n * np.pi / sys.d) ** 2
        if k2 > k_hi * k_hi:
            return out
        if k2 > 0:
            out.append(float(np.sqrt(k2)))
        n += 1


def unit_transmission_points(sys: BarrierSystem, k_range, rel_merge=1e-9):
    """All k in the range with T_two = 1: roots of cos(chi) and single-barrier
    transparency points, merged and sorted.  Entry i is resonance number i + 1."""
    lo, hi = map(float, k_range)
    pts = find_resonances(sys, (lo, hi)) + [k for k in transparency_points(sys, hi) if k > lo]
    pts.sort()
    merged = []
    for k in pts:
        if merged and abs(k - merged[-1]) <= rel_merge * k:
            continue
        merged.append(k)
    return merged
