"""Geometry, unit presets and the complex-kappa kinematics shared by every module.

All formulas are written with explicit ``m`` and ``hbar`` so the same code runs in
natural units (m = hbar = 1) and in the nm / eV / ps system used for electrons.
Functions accept scalars or numpy arrays of wavenumbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import constants as _C

# hbar in eV*ps, electron mass in eV*ps^2/nm^2
HBAR_EV_PS = _C.hbar / _C.e * 1e12
M_E_EV_PS2_NM2 = _C.m_e * 1e-18 / 1e-24 / _C.e
# hbar^2 / 2 m_e in eV*nm^2 (0.0380998...)
HBAR2_2ME_EV_NM2 = HBAR_EV_PS**2 / (2.0 * M_E_EV_PS2_NM2)

# relative width of the |E - V0| band where kappa counts as zero
NEAR_THRESHOLD_EPS = 1e-10
# |kappa*x| below which sinh/cosh are replaced by their Taylor series
_SERIES_CUTOFF = 2e-3


@dataclass(frozen=True)
class UnitPreset:
    """A consistent (length, energy, time) unit system.

    ``time_scale_s`` is the number of SI seconds in one internal time unit.
    """

    name: str
    hbar: float
    mass: float
    time_scale_s: float
    length_unit: str = "nm"
    energy_unit: str = "eV"
    time_unit: str = "ps"
    mass_fraction: float | None = None

    def to_seconds(self, t):
        return np.asarray(t) * self.time_scale_s

    def from_seconds(self, t_s):
        return np.asarray(t_s) / self.time_scale_s


def natural_preset() -> UnitPreset:
    # lengths read as nm with the free electron mass as mass unit
    tscale = _C.m_e * (1e-9) ** 2 / _C.hbar
    return UnitPreset("natural", 1.0, 1.0, tscale, "l", "hbar^2/(m l^2)", "m l^2/hbar")


def electron_preset() -> UnitPreset:
    return UnitPreset("electron", HBAR_EV_PS, M_E_EV_PS2_NM2, 1e-12, mass_fraction=1.0)


def effective_mass_preset(mass_fraction: float) -> UnitPreset:
    if mass_fraction <= 0:
        raise ValueError(f"mass fraction must be positive, got {mass_fraction}")
    return UnitPreset(
        "effective-mass",
        HBAR_EV_PS,
        mass_fraction * M_E_EV_PS2_NM2,
        1e-12,
        mass_fraction=mass_fraction,
    )


UNIT_PRESETS = ("natural", "electron", "effective-mass")


def get_preset(name: str, mass_fraction: float | None = None) -> UnitPreset:
    if name == "natural":
        return natural_preset()
    if name == "electron":
        return electron_preset()
    if name == "effective-mass":
        if mass_fraction is None:
            raise ValueError("effective-mass preset needs a mass fraction")
        return effective_mass_preset(mass_fraction)
    raise ValueError(f"unknown unit preset {name!r}; expected one of {UNIT_PRESETS}")


def calibrate_mass_fraction(tau_free: float, width: float, energy: float) -> float:
    """Mass (in units of m_e) for which m*D/(hbar*k) equals ``tau_free``.

    Inputs are in ps, nm and eV.  From hbar*k = sqrt(2 m E) one gets
    m = 2 E (tau_free / D)^2.
    """
    m = 2.0 * energy * (tau_free / width) ** 2
    return m / M_E_EV_PS2_NM2


@dataclass(frozen=True)
class BarrierSystem:
    V0: float
    d: float
    L: float
    a1: float
    m: float = 1.0
    hbar: float = 1.0
    b1: float = field(init=False)
    a2: float = field(init=False)
    b2: float = field(init=False)
    D: float = field(init=False)
    xc: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "b1", self.a1 + self.d)
        object.__setattr__(self, "a2", self.b1 + self.L)
        object.__setattr__(self, "b2", self.a2 + self.d)
        object.__setattr__(self, "D", 2.0 * self.d + self.L)
        # a1 + d + L/2, so xc - b1 is exactly L/2
        object.__setattr__(self, "xc", self.b1 + 0.5 * self.L)

    @property
    def kappa0(self) -> complex:
        """sqrt(2 m V0)/hbar; purely imaginary when V0 < 0."""
        return np.sqrt(complex(2.0 * self.m * self.V0)) / self.hbar

    @property
    def kappa0_sq(self) -> float:
        return 2.0 * self.m * self.V0 / self.hbar**2

    def energy(self, k):
        return (self.hbar * np.asarray(k, dtype=float)) ** 2 / (2.0 * self.m)

    def wavenumber(self, E):
        return np.sqrt(2.0 * self.m * np.asarray(E, dtype=float)) / self.hbar

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        inside = ((x >= self.a1) & (x <= self.b1)) | ((x >= self.a2) & (x <= self.b2))
        return np.where(inside, self.V0, 0.0)

    def tau_free(self, k):
        return self.m * self.D / (self.hbar * np.asarray(k, dtype=float))

    def tau0(self) -> float:
        return 2.0 * self.m * self.d / (self.hbar * abs(self.kappa0))

    def with_(self, **changes) -> "BarrierSystem":
        params = dict(V0=self.V0, d=self.d, L=self.L, a1=self.a1, m=self.m, hbar=self.hbar)
        params.update(changes)
        return make_system(**params)


def make_system(V0, d, L, a1, m=1.0, hbar=1.0) -> BarrierSystem:
    errors = []
    if not d > 0:
        errors.append(f"d must be > 0 (got {d})")
    if not L >= 0:
        errors.append(f"L must be >= 0 (got {L})")
    if not a1 > 0:
        errors.append(f"a1 must be > 0 (got {a1})")
    if not m > 0:
        errors.append(f"m must be > 0 (got {m})")
    if not hbar > 0:
        errors.append(f"hbar must be > 0 (got {hbar})")
    if errors:
        raise ValueError("; ".join(errors))
    return BarrierSystem(float(V0), float(d), float(L), float(a1), float(m), float(hbar))


def system_from_dimensionless(two_kappa0_d, L_over_d=0.0, d=1.0, a1=None, m=1.0, hbar=1.0):
    """System with given 2*kappa0*d and L/d, V0 > 0, for the dimensionless figures."""
    kappa0 = two_kappa0_d / (2.0 * d)
    V0 = (hbar * kappa0) ** 2 / (2.0 * m)
    if a1 is None:
        a1 = 10.0 * d
    return make_system(V0, d, L_over_d * d, a1, m, hbar)


@dataclass(frozen=True)
class Kinematics:
    k: np.ndarray
    E: np.ndarray
    kappa: np.ndarray
    kappa0: complex
    theta_plus: np.ndarray
    theta_minus: np.ndarray
    near_threshold: np.ndarray

    @property
    def kappa_sq(self):
        # k^2 + kappa^2 = kappa0^2 holds exactly in this form
        return (self.kappa0**2).real - self.k**2


def kinematics(sys: BarrierSystem, k) -> Kinematics:
    k = np.asarray(k, dtype=float)
    if np.any(~(k > 0)):
        raise ValueError("wavenumber k must be > 0")
    E = sys.energy(k)
    kappa_sq = sys.kappa0_sq - k**2
    kappa = np.sqrt(kappa_sq.astype(complex))
    near = np.abs(kappa_sq) <= NEAR_THRESHOLD_EPS * abs(sys.kappa0_sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        tp = 0.5 * (k / kappa + kappa / k)
        tm = 0.5 * (k / kappa - kappa / k)
    return Kinematics(k, E, kappa, sys.kappa0, tp, tm, near)


# Entire functions of kappa^2.  They stay finite at kappa = 0 and cover real
# (E < V0) and imaginary (E > V0) kappa with the same code.

def cosh_k(kappa, x):
    """cosh(kappa*x)."""
    kappa, x = np.broadcast_arrays(np.asarray(kappa, complex), np.asarray(x, float))
    z = kappa * x
    small = np.abs(z) < _SERIES_CUTOFF
    z2 = z * z
    return np.where(small, 1 + z2 / 2 * (1 + z2 / 12 * (1 + z2 / 30)), np.cosh(z))


def sinhc_k(kappa, x):
    """sinh(kappa*x)/kappa, equal to x at kappa = 0."""
    kappa, x = np.broadcast_arrays(np.asarray(kappa, complex), np.asarray(x, float))
    z = kappa * x
    small = np.abs(z) < _SERIES_CUTOFF
    z2 = z * z
    series = x * (1 + z2 / 6 * (1 + z2 / 20 * (1 + z2 / 42)))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.sinh(z) / kappa
    return np.where(small, series, direct)


def sinh_minus_k(kappa, x):
    """(sinh(kappa*x) - kappa*x)/kappa^3, equal to x^3/6 at kappa = 0."""
    kappa, x = np.broadcast_arrays(np.asarray(kappa, complex), np.asarray(x, float))
    z = kappa * x
    small = np.abs(z) < 0.1
    z2 = z * z
    series = x**3 / 6 * (1 + z2 / 20 * (1 + z2 / 42 * (1 + z2 / 72 * (1 + z2 / 110))))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (np.sinh(z) - z) / kappa**3
    return np.where(small, series, direct)


def xcosh_minus_sinh_k(kappa, x):
    """(kappa*x*cosh(kappa*x) - sinh(kappa*x))/kappa^3, equal to x^3/3 at kappa = 0."""
    kappa, x = np.broadcast_arrays(np.asarray(kappa, complex), np.asarray(x, float))
    z = kappa * x
    small = np.abs(z) < 0.1
    z2 = z * z
    # sum_n z^(2n+1) (1/(2n)! - 1/(2n+1)!) / kappa^3
    series = x**3 * (1 / 3 + z2 / 30 + z2**2 / 840 + z2**3 / 45360 + z2**4 / 3991680)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (z * np.cosh(z) - np.sinh(z)) / kappa**3
    return np.where(small, series, direct)


def real_part(z, what="value", rtol=1e-9):
    """Real part of a quantity that is real by construction.

    An imaginary residue above ``rtol`` points at a formula bug, so it raises.
    """
    z = np.asarray(z)
    if np.iscomplexobj(z):
        bad = np.abs(z.imag) > rtol * np.maximum(np.abs(z.real), 1e-300) + 1e-300
        bad &= np.isfinite(z)
        if np.any(bad):
            worst = np.max(np.abs(z.imag[bad]) / np.maximum(np.abs(z.real[bad]), 1e-300))
            raise ArithmeticError(f"{what}: imaginary residue {worst:.3e} exceeds {rtol}")
        return z.real
    return z
