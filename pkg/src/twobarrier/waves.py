"""Piecewise-analytic stationary wave functions and the transmission/reflection split.

A :class:`PiecewiseWave` is a list of regions.  Each region holds two complex
coefficients in one of four bases, measured from its own origin ``o``:

``plane``      c1 exp(ik(x-o)) + c2 exp(-ik(x-o))
``sinh-cosh``  c1 sinh(kappa(x-o))/kappa + c2 cosh(kappa(x-o))
``sin-cos``    c1 sin(k(x-o)) + c2 cos(k(x-o))
``zero``       identically zero

The hyperbolic basis is divided by kappa so it stays finite at E = V0 and
turns into sin/cos automatically when kappa is imaginary.  Coefficients are
arrays over the wavenumber grid, so one wave object describes a whole
k-grid at once and evaluates to an array of shape ``k.shape + x.shape``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .core import BarrierSystem, cosh_k, sinhc_k
from .scattering import Scattering

KINDS = ("plane", "sinh-cosh", "sin-cos", "zero")


@dataclass(frozen=True)
class Region:
    start: float
    end: float
    kind: str
    c1: np.ndarray
    c2: np.ndarray
    origin: float = 0.0

    def contains(self, x, side=0):
        if side > 0:
            return (x >= self.start) & (x < self.end)
        return (x > self.start) & (x <= self.end)


def _basis(kind, k, kappa, u, deriv=False):
    """(f1, f2) basis functions or their x-derivatives on broadcast (k, u)."""
    if kind == "plane":
        e = np.exp(1j * k * u)
        if deriv:
            return 1j * k * e, -1j * k / e
        return e, 1 / e
    if kind == "sinh-cosh":
        S = sinhc_k(kappa, u)
        C = cosh_k(kappa, u)
        if deriv:
            return C, kappa**2 * S
        return S, C
    if kind == "sin-cos":
        s, c = np.sin(k * u), np.cos(k * u)
        if deriv:
            return k * c, -k * s
        return s, c
    raise ValueError(kind)


def _shift(kind, k, kappa, c1, c2, delta):
    """Coefficients about origin o + delta for the same function (basis about o)."""
    if kind == "plane":
        return c1 * np.exp(1j * k * delta), c2 * np.exp(-1j * k * delta)
    if kind == "sin-cos":
        s, c = np.sin(k * delta), np.cos(k * delta)
        return c1 * c - c2 * s, c2 * c + c1 * s
    if kind == "sinh-cosh":
        S, C = sinhc_k(kappa, delta), cosh_k(kappa, delta)
        return c1 * C + c2 * kappa**2 * S, c2 * C + c1 * S
    if kind == "zero":
        return c1, c2
    raise ValueError(kind)


@dataclass(frozen=True)
class PiecewiseWave:
    k: np.ndarray
    kappa: np.ndarray
    regions: tuple
    hbar: float = 1.0
    m: float = 1.0

    @property
    def boundaries(self):
        return [r.end for r in self.regions[:-1]]

    def _eval(self, x, side, deriv):
        x = np.asarray(x, dtype=float)
        k = np.asarray(self.k, dtype=float)[..., None]
        kappa = np.asarray(self.kappa)[..., None]
        out = np.zeros(np.shape(self.k) + x.shape, dtype=complex)
        flat_x = x.reshape(-1)
        flat_out = out.reshape(np.shape(self.k) + (flat_x.size,))
        taken = np.zeros(flat_x.shape, dtype=bool)
        for i, r in enumerate(self.regions):
            if side > 0:
                mask = r.contains(flat_x, +1)
                if i == len(self.regions) - 1:
                    mask |= flat_x >= r.start
            else:
                mask = r.contains(flat_x, -1)
                if i == 0:
                    mask |= flat_x <= r.end
            mask &= ~taken
            taken |= mask
            if r.kind == "zero" or not mask.any():
                continue
            u = flat_x[mask] - r.origin
            f1, f2 = _basis(r.kind, k, kappa, u, deriv)
            c1 = np.asarray(r.c1)[..., None]
            c2 = np.asarray(r.c2)[..., None]
            flat_out[..., mask] = c1 * f1 + c2 * f2
        return out

    def __call__(self, x, side=0):
        """psi(x); ``side`` picks the left (-1) or right (+1) limit at a boundary."""
        return self._eval(x, side, False)

    def derivative(self, x, side=0):
        return self._eval(x, side, True)

    def density(self, x):
        return np.abs(self(x)) ** 2

    def flux(self, x, side=0):
        """Probability current (hbar/m) Im(conj(psi) psi')."""
        psi = self(x, side)
        return self.hbar / self.m * np.imag(np.conj(psi) * self.derivative(x, side))

    def max_amplitude(self, x):
        return np.max(np.abs(self(x)))

    def region_at(self, x, side=0) -> Region:
        for i, r in enumerate(self.regions):
            if (side > 0 and (r.start <= x < r.end or (i == len(self.regions) - 1 and x >= r.start))) or (
                side <= 0 and (r.start < x <= r.end or (i == 0 and x <= r.end))
            ):
                return r
        raise ValueError(x)

    def select(self, index):
        """The wave for one k of a grid."""
        regs = tuple(
            replace(r, c1=np.asarray(r.c1)[index], c2=np.asarray(r.c2)[index]) for r in self.regions
        )
        return PiecewiseWave(np.asarray(self.k)[index], np.asarray(self.kappa)[index], regs, self.hbar, self.m)

    def _refined(self, cuts):
        """Same function with regions split at the extra points ``cuts``."""
        out = []
        for r in self.regions:
            inner = sorted(c for c in cuts if r.start < c < r.end)
            edges = [r.start, *inner, r.end]
            for a, b in zip(edges[:-1], edges[1:]):
                out.append(replace(r, start=a, end=b))
        return out

    def _combine(self, other: "PiecewiseWave", sign: float) -> "PiecewiseWave":
        cuts = set(self.boundaries) | set(other.boundaries)
        mine, theirs = self._refined(cuts), other._refined(cuts)
        regions = []
        for r1, r2 in zip(mine, theirs):
            if r2.kind == "zero":
                regions.append(r1)
                continue
            if r1.kind == "zero":
                regions.append(replace(r2, c1=sign * r2.c1, c2=sign * r2.c2))
                continue
            if r1.kind != r2.kind:
                raise ValueError(f"cannot combine {r1.kind} with {r2.kind} on [{r1.start}, {r1.end}]")
            c1, c2 = _shift(r2.kind, self.k, self.kappa, r2.c1, r2.c2, r1.origin - r2.origin)
            regions.append(replace(r1, c1=r1.c1 + sign * c1, c2=r1.c2 + sign * c2))
        return PiecewiseWave(self.k, self.kappa, tuple(regions), self.hbar, self.m)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __add__(self, other):
        return self._combine(other, 1.0)


def standing_to_plane(a, b, xc, k):
    """(A, B) of A e^{ikx} + B e^{-ikx} equal to a sin(k(x-xc)) + b cos(k(x-xc))."""
    e = np.exp(1j * k * xc)
    return (b - 1j * a) / 2 / e, (b + 1j * a) / 2 * e


def plane_to_standing(A, B, xc, k):
    e = np.exp(1j * k * xc)
    return 1j * (A * e - B / e), A * e + B / e


def _nonempty(regions):
    return tuple(r for r in regions if r.end > r.start)


def total_wave(sc: Scattering) -> PiecewiseWave:
    sys, k, kappa, two = sc.sys, sc.k, sc.kin.kappa, sc.two
    a_out, b_out = two.a_out, two.b_out
    e = np.exp(1j * k * sys.a1)
    a_gap = -a_out * np.conj(two.P) * e
    b_gap = a_out * np.conj(two.Q) * e
    regions = (
        Region(-np.inf, sys.a1, "plane", np.ones_like(e), b_out * e * e, 0.0),
        Region(sys.a1, sys.b1, "sinh-cosh", 1j * (1 - b_out) * k * e, (1 + b_out) * e, sys.a1),
        Region(sys.b1, sys.a2, "sin-cos", a_gap, b_gap, sys.xc),
        Region(sys.a2, sys.b2, "sinh-cosh", 1j * a_out * k * e, a_out * e, sys.b2),
        Region(sys.b2, np.inf, "plane", a_out * np.exp(-1j * k * sys.D), np.zeros_like(e), 0.0),
    )
    return PiecewiseWave(k, kappa, _nonempty(regions), sys.hbar, sys.m)


def reflection_amplitude_in(sc: Scattering):
    """A_ref^in = sqrt(R_two) exp(i lambda)."""
    return np.sqrt(sc.two.R_two) * np.exp(1j * sc.two.lam)


def reflected_wave(sc: Scattering) -> PiecewiseWave:
    sys, k, kappa, two = sc.sys, sc.k, sc.kin.kappa, sc.two
    e = np.exp(1j * k * sys.a1)
    A_in = reflection_amplitude_in(sc)
    a_gap = -2.0 * two.P * two.b_out * np.conj(two.a_out) * e
    half = 0.5 * k * sys.L
    zero = np.zeros_like(e)
    regions = (
        Region(-np.inf, sys.a1, "plane", A_in, two.b_out * e * e, 0.0),
        Region(sys.a1, sys.b1, "sinh-cosh", k * a_gap * np.cos(half), -a_gap * np.sin(half), sys.b1),
        Region(sys.b1, sys.xc, "sin-cos", a_gap, zero, sys.xc),
        Region(sys.xc, np.inf, "zero", zero, zero, 0.0),
    )
    return PiecewiseWave(k, kappa, _nonempty(regions), sys.hbar, sys.m)


@dataclass(frozen=True)
class SubprocessPair:
    total: PiecewiseWave
    transmitted: PiecewiseWave
    reflected: PiecewiseWave
    A_tr_in: np.ndarray
    A_ref_in: np.ndarray
    x_join: float
    near_resonance: np.ndarray


def decompose(sc: Scattering) -> SubprocessPair:
    total = total_wave(sc)
    ref = reflected_wave(sc)
    tr = total - ref
    A_ref = reflection_amplitude_in(sc)
    # the incoming-wave coefficient of psi_tr; b_out cancels identically
    first = tr.regions[0]
    tr = PiecewiseWave(
        tr.k, tr.kappa,
        (replace(first, c1=1.0 - A_ref, c2=np.zeros_like(first.c2)), *tr.regions[1:]),
        tr.hbar, tr.m,
    )
    return SubprocessPair(total, tr, ref, 1.0 - A_ref, A_ref, sc.sys.xc, sc.two.near_resonance)


def joining_point_residual(sys: BarrierSystem, k_grid) -> float:
    """max |psi_ref(x_c, k)| over ``k_grid``; zero if x_c is a k-independent node."""
    from .scattering import scatter

    ref = reflected_wave(scatter(sys, np.asarray(k_grid, dtype=float)))
    return float(np.max(np.abs(ref(np.array([sys.xc]), side=-1))))


def write_wave_csv(path, wave: PiecewiseWave, x):
    """Columns: x, Re psi, Im psi, |psi|^2, flux (single-k wave)."""
    x = np.asarray(x, dtype=float)
    psi = wave(x)
    flux = wave.flux(x)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "re_psi", "im_psi", "abs2", "flux"])
        for row in zip(x, psi.real, psi.imag, np.abs(psi) ** 2, flux):
            w.writerow([f"{v:.17g}" for v in row])
