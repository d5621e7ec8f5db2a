"""Gaussian wave packets built from the stationary subprocess waves.

A packet is the k-integral

    psi(x, t) = (2 pi)^(-1/2) sum_j w_j A(k_j) psi(x, k_j) exp(-i E(k_j) t / hbar)

over composite Gauss-Legendre nodes.  Fields are never stored on the full
(t, x) grid: norms, centroids and edge values are accumulated chunk by chunk
from a matrix product of time coefficients with the stationary basis.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import BarrierSystem
from .scattering import scatter
from .waves import decompose

log = logging.getLogger(__name__)

# basis matrices larger than this many complex numbers are rebuilt per pass
_CACHE_LIMIT = 40_000_000
_X_CHUNK = 4096
_T_BATCH = 128


class QuadratureWarning(UserWarning):
    pass


class ContainmentError(RuntimeError):
    pass


def gauss_legendre_panels(lo, hi, panels, order):
    """Nodes and weights of a composite Gauss-Legendre rule on [lo, hi]."""
    g, gw = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * g[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    return x, w


@dataclass(frozen=True)
class PacketSpec:
    """Gaussian spectrum A(k) = (2 l0^2/pi)^(1/4) exp(-l0^2 (k - kbar)^2)."""

    l0: float
    kbar: float
    n_sigma: float = 6.0
    panels: int = 8
    order: int = 16
    tol: float = 1e-7
    max_panels: int = 1024

    def __post_init__(self):
        if not self.l0 > 0 or not self.kbar > 0:
            raise ValueError(f"l0 and kbar must be positive (got {self.l0}, {self.kbar})")

    def amplitude(self, k):
        k = np.asarray(k, dtype=float)
        return (2 * self.l0**2 / np.pi) ** 0.25 * np.exp(-self.l0**2 * (k - self.kbar) ** 2)

    @property
    def half_width(self):
        # A^2 falls to exp(-n_sigma^2) at the ends
        return self.n_sigma / (math.sqrt(2.0) * self.l0)

    @property
    def k_interval(self):
        return max(0.0, self.kbar - self.half_width), self.kbar + self.half_width

    @property
    def tail_mass(self):
        """Probability carried by k <= 0, which is dropped."""
        return 0.5 * math.erfc(math.sqrt(2.0) * self.l0 * self.kbar)

    def nodes(self, panels=None):
        lo, hi = self.k_interval
        return gauss_legendre_panels(lo, hi, panels or self.panels, self.order)

    def width(self, t, m, hbar):
        """Position spread of the free packet, sigma(t) = l0 sqrt(1 + (hbar t/(2 m l0^2))^2)."""
        return self.l0 * np.sqrt(1.0 + (hbar * np.asarray(t) / (2 * m * self.l0**2)) ** 2)


def packet_from_energy(sys: BarrierSystem, l0, energy, **kw) -> PacketSpec:
    return PacketSpec(l0=l0, kbar=float(sys.wavenumber(energy)), **kw)


@dataclass(frozen=True)
class XGrid:
    """Composite Gauss-Legendre grid whose panels never straddle a region boundary."""

    x: np.ndarray
    w: np.ndarray
    breaks: tuple

    @property
    def lo(self):
        return self.breaks[0]

    @property
    def hi(self):
        return self.breaks[-1]


def build_x_grid(sys: BarrierSystem, x_lo, x_hi, panel_width, order=8, inner_width=None) -> XGrid:
    """Panels of at most ``panel_width`` outside [a1, b2] and ``inner_width`` inside."""
    inner_width = panel_width if inner_width is None else inner_width
    inner = [p for p in (sys.a1, sys.b1, sys.xc, sys.a2, sys.b2) if x_lo < p < x_hi]
    breaks = sorted(set([x_lo, *inner, x_hi]))
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        width = inner_width if sys.a1 <= a and b <= sys.b2 else panel_width
        n = max(1, int(math.ceil((b - a) / width)))
        x, w = gauss_legendre_panels(a, b, n, order)
        xs.append(x)
        ws.append(w)
    return XGrid(np.concatenate(xs), np.concatenate(ws), tuple(breaks))


def centroid_and_norm(field, grid: XGrid, edge_tol=1e-10):
    """(xbar, norm) of one field sampled on ``grid``.

    Raises if the density at either grid end exceeds ``edge_tol`` of its maximum.
    """
    rho = np.abs(np.asarray(field)) ** 2
    peak = rho.max()
    edge = max(rho[0], rho[-1]) / peak if peak > 0 else 0.0
    if edge > edge_tol:
        raise ContainmentError(f"density at grid edge is {edge:.3e} of its maximum")
    norm = float(np.dot(grid.w, rho))
    return float(np.dot(grid.w, grid.x * rho) / norm), norm


@dataclass
class Moments:
    """Per-time norms, first moments and containment data for tr, ref and tot."""

    t: np.ndarray
    norm: dict
    first: dict
    edge: dict
    peak: dict
    overlap: np.ndarray

    def centroid(self, which):
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.first[which] / self.norm[which]


WHICH = ("tr", "ref", "tot")


class PacketField:
    """A Gaussian packet over the subprocess waves at fixed quadrature nodes."""

    def __init__(self, sys: BarrierSystem, spec: PacketSpec, k, w):
        self.sys, self.spec = sys, spec
        self.k = np.asarray(k, dtype=float)
        self.w = np.asarray(w, dtype=float)
        A = spec.amplitude(self.k)
        # renormalise over k > 0 so the packet carries unit probability
        self.mass = float(np.sum(self.w * A * A))
        self.A = A / math.sqrt(self.mass)
        self.sc = scatter(sys, self.k)
        self.pair = decompose(self.sc)
        self.E = sys.energy(self.k)
        self.coef0 = self.w * self.A / math.sqrt(2 * math.pi)
        self._cache = {}

    @property
    def waves(self):
        return {"tr": self.pair.transmitted, "ref": self.pair.reflected, "tot": self.pair.total}

    def coefficients(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.coef0[None, :] * np.exp(-1j * self.E[None, :] * t[:, None] / self.sys.hbar)

    def basis(self, which, x):
        return self.waves[which](np.asarray(x, dtype=float))

    def field(self, which, x, t):
        """Complex field of shape (len(t), len(x))."""
        return self.coefficients(t) @ self.basis(which, x)

    def one_sided(self, which, x0, side, t):
        """psi and dpsi/dx at ``x0`` from the given side, for every t."""
        wave = self.waves[which]
        x = np.array([x0])
        c = self.coefficients(t)
        return c @ wave(x, side)[:, 0], c @ wave.derivative(x, side)[:, 0]

    def flux(self, which, x0, side, t):
        psi, dpsi = self.one_sided(which, x0, side, t)
        return self.sys.hbar / self.sys.m * np.imag(np.conj(psi) * dpsi)

    def _chunks(self, grid: XGrid, which):
        nx = grid.x.size
        cacheable = self.k.size * nx * len(self.waves) <= _CACHE_LIMIT
        for s in range(0, nx, _X_CHUNK):
            sl = slice(s, min(s + _X_CHUNK, nx))
            mats = {}
            for wh in which:
                key = (id(grid), wh, s)
                if key in self._cache:
                    mats[wh] = self._cache[key]
                    continue
                mats[wh] = self.basis(wh, grid.x[sl])
                if cacheable:
                    self._cache[key] = mats[wh]
            yield sl, mats

    def moments(self, t, grid: XGrid, which=("tr", "ref")) -> Moments:
        """Accumulate norms and centroids over ``grid`` at every time in ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        nt = t.size
        names = list(which) + (["tot"] if {"tr", "ref"} <= set(which) else [])
        norm = {n: np.zeros(nt) for n in names}
        first = {n: np.zeros(nt) for n in names}
        peak = {n: np.zeros(nt) for n in names}
        edge = {n: np.zeros(nt) for n in names}
        overlap = np.zeros(nt)
        last = grid.x.size - 1
        for sl, mats in self._chunks(grid, tuple(which)):
            xw, ww = grid.x[sl], grid.w[sl]
            for b in range(0, nt, _T_BATCH):
                tb = slice(b, min(b + _T_BATCH, nt))
                c = self.coefficients(t[tb])
                fields = {wh: c @ mats[wh] for wh in which}
                if "tot" in names and "tot" not in which:
                    fields["tot"] = fields["tr"] + fields["ref"]
                for n in names:
                    amp = np.abs(fields[n])
                    rho = amp * amp
                    norm[n][tb] += rho @ ww
                    first[n][tb] += rho @ (ww * xw)
                    peak[n][tb] = np.maximum(peak[n][tb], amp.max(axis=1))
                    if sl.start == 0:
                        edge[n][tb] = np.maximum(edge[n][tb], amp[:, 0])
                    if sl.stop - 1 == last:
                        edge[n][tb] = np.maximum(edge[n][tb], amp[:, -1])
                if "tr" in which and "ref" in which:
                    overlap[tb] += (np.abs(fields["tr"]) * np.abs(fields["ref"])) @ ww
        return Moments(t, norm, first, edge, peak, overlap)


def converge_nodes(sys: BarrierSystem, spec: PacketSpec, x_probe, t_probe):
    """Double the panel count until the fields change by < spec.tol (relative sup norm).

    Returns (k, w, residual, converged).
    """
    panels = spec.panels
    prev = None
    residual = np.inf
    while True:
        k, w = spec.nodes(panels)
        pf = PacketField(sys, spec, k, w)
        cur = {wh: pf.field(wh, x_probe, t_probe) for wh in ("tr", "ref")}
        if prev is not None:
            residual = 0.0
            for wh in cur:
                scale = np.abs(cur[wh]).max()
                if scale > 0:
                    residual = max(residual, np.abs(cur[wh] - prev[wh]).max() / scale)
            if residual < spec.tol:
                # keep the coarser rule: the finer one certified it
                return prev_kw[0], prev_kw[1], residual, True
        if 2 * panels > spec.max_panels:
            warnings.warn(f"k quadrature not converged: residual {residual:.3e}", QuadratureWarning)
            return k, w, residual, False
        prev, prev_kw = cur, (k, w)
        panels *= 2


@dataclass(frozen=True)
class KSpaceTimes:
    """Spectrum-weighted averages and the asymptotic group times they give."""

    T_as: float
    R_as: float
    kbar_tr: float
    kbar_ref: float
    Jp_tr: float
    Jp_ref: float
    lp_tr: float
    lp_ref: float
    tau_tr_as: float
    tau_ref_as: float
    t_dep: float
    t_arr: float
    interference: complex
    tail_mass: float


def kspace_times(pf: PacketField) -> KSpaceTimes:
    sys, two = pf.sys, pf.sc.two
    A2 = pf.w * pf.A**2
    wt, wr = A2 * two.T_two, A2 * two.R_two
    T_as, R_as = float(wt.sum()), float(wr.sum())

    def avg(weights, total, f):
        return float(np.dot(weights, f) / total) if total > 0 else float("nan")

    k_tr, k_ref = avg(wt, T_as, pf.k), avg(wr, R_as, pf.k)
    Jt, Jr = avg(wt, T_as, two.Jtwo_prime), avg(wr, R_as, two.Jtwo_prime)
    lt, lr = avg(wt, T_as, two.lambda_prime), avg(wr, R_as, two.lambda_prime)
    v_tr = sys.hbar * k_tr / sys.m
    v_ref = sys.hbar * k_ref / sys.m
    A_tr, A_ref = pf.pair.A_tr_in, pf.pair.A_ref_in
    return KSpaceTimes(
        T_as=T_as, R_as=R_as, kbar_tr=k_tr, kbar_ref=k_ref,
        Jp_tr=Jt, Jp_ref=Jr, lp_tr=lt, lp_ref=lr,
        tau_tr_as=(Jt - lt) / v_tr, tau_ref_as=(Jr - lr) / v_ref if R_as > 0 else float("nan"),
        t_dep=lt / v_tr, t_arr=(sys.a1 + Jt) / v_tr,
        interference=complex(np.sum(A2 * np.conj(A_tr) * A_ref)),
        tail_mass=pf.spec.tail_mass,
    )


def rwp_position(kt: KSpaceTimes, sys: BarrierSystem, t):
    """Free reference packet that shares the transmitted packet's incident stage."""
    return sys.hbar * kt.kbar_tr / sys.m * np.asarray(t) - kt.lp_tr


def five_point_derivative(y, h):
    """dy/dt on a uniform grid: 4th-order centred inside, 2nd order at the two ends."""
    y = np.asarray(y, dtype=float)
    d = np.gradient(y, h, edge_order=2)
    if y.size >= 5:
        d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    return d


def _crossings(t, y, target):
    """Indices i with y - target changing sign on [t_i, t_i+1]."""
    above = np.asarray(y) >= target
    return [int(i) for i in np.nonzero(above[:-1] != above[1:])[0]]


def refine_crossing(xbar_of, t_lo, t_hi, target, tol, n_inner=16):
    """Bracketed multisection for xbar_of(t) = target; xbar_of takes an array of times.

    Each pass evaluates the bracket at n_inner + 2 points in one batch and keeps the
    first sub-interval with a sign change, then a final linear interpolation.
    """
    while True:
        ts = np.linspace(t_lo, t_hi, n_inner + 2)
        ys = np.asarray(xbar_of(ts)) - target
        hit = np.nonzero(ys == 0)[0]
        if hit.size:
            return float(ts[hit[0]])
        change = np.nonzero((ys[:-1] >= 0) != (ys[1:] >= 0))[0]
        if change.size == 0:
            # a crossing sitting on a bracket end can round to either side
            end = int(np.argmin(np.abs(ys[[0, -1]]))) * (ys.size - 1)
            if abs(ys[end]) <= 1e-12 * max(abs(target), 1.0):
                return float(ts[end])
            raise ValueError(f"no crossing of {target} in [{t_lo}, {t_hi}]")
        i = change[0]
        t_lo, t_hi = ts[i], ts[i + 1]
        if t_hi - t_lo <= tol:
            return float(t_lo - ys[i] * (t_hi - t_lo) / (ys[i + 1] - ys[i]))


@dataclass
class Trajectory:
    t: np.ndarray
    x_tr: np.ndarray
    x_ref: np.ndarray
    x_tot: np.ndarray
    norm_T: np.ndarray
    norm_R: np.ndarray
    norm_tot: np.ndarray
    flux_xc_minus: np.ndarray
    flux_xc_plus: np.ndarray
    dT_dt: np.ndarray
    rwp_x: np.ndarray
    overlap: np.ndarray
    kspace: KSpaceTimes
    tau_tr_loc: float
    tau_ref_loc: float
    t_tr_entry: float
    t_tr_exit: float
    ocs_valid: bool
    final_overlap: float
    quad_residual: float
    quad_converged: bool
    n_nodes: int
    grid: XGrid
    warnings: list = field(default_factory=list)

    @property
    def tau_tr_as(self):
        return self.kspace.tau_tr_as

    @property
    def tau_ref_as(self):
        return self.kspace.tau_ref_as

    @property
    def T_as(self):
        return self.kspace.T_as

    @property
    def R_as(self):
        return self.kspace.R_as

    @property
    def t_dep(self):
        return self.kspace.t_dep


def default_window(sys: BarrierSystem, spec: PacketSpec):
    """(t_max, dt): long enough for both subprocess packets to leave the structure."""
    v = sys.hbar * spec.kbar / sys.m
    tau_free = sys.tau_free(spec.kbar)
    t_max = 2.5 * (sys.b2 + 8 * spec.l0) / v
    return float(t_max), float(tau_free / 50)


def default_grid(sys: BarrierSystem, spec: PacketSpec, t_max, n_sigma=8.0):
    v_hi = sys.hbar * (spec.kbar + 3.0 / spec.l0) / sys.m
    sig = float(spec.width(t_max, sys.m, sys.hbar))
    x_lo = min(-n_sigma * spec.l0, 2 * sys.a1 - v_hi * t_max) - n_sigma * sig
    x_hi = max(sys.b2, v_hi * t_max) + n_sigma * sig
    k_hi = spec.k_interval[1]
    # GL-8 panels resolve about 1.5 radians of phase or e-folding each
    outer = min(1.5 / k_hi, spec.l0 / 2)
    inner = min(1.5 / k_hi, 1.5 / max(abs(sys.kappa0), 1e-300), sys.d / 2)
    return build_x_grid(sys, x_lo, x_hi, outer, inner_width=inner)


def run_packet(sys: BarrierSystem, spec: PacketSpec, t_max=None, dt=None, grid=None,
               edge_tol=1e-10, ocs_tol=1e-4) -> Trajectory:
    notes = []
    if sys.a1 < 5 * spec.l0:
        notes.append(f"a1 = {sys.a1} is less than 5 l0")
    if spec.tail_mass > 1e-12:
        notes.append(f"k <= 0 tail mass {spec.tail_mass:.2e} dropped and renormalised")
    t0_max, t0_dt = default_window(sys, spec)
    t_max = t0_max if t_max is None else t_max
    dt = t0_dt if dt is None else dt
    if grid is None:
        grid = default_grid(sys, spec, t_max)
    t = np.arange(0.0, t_max + 0.5 * dt, dt)

    probe = grid.x[::4]
    k, w, residual, ok = converge_nodes(sys, spec, probe, np.array([0.0, 0.5 * t_max, t_max]))
    if not ok:
        notes.append(f"quadrature-warn: residual {residual:.2e}")
    pf = PacketField(sys, spec, k, w)
    log.info("packet run: %d k nodes, %d x nodes, %d times", k.size, grid.x.size, t.size)

    mo = pf.moments(t, grid)
    # a cut at k = 0 leaves an algebraic density tail the grid cannot outrun
    tol_edge = edge_tol if spec.tail_mass <= 1e-12 else max(edge_tol, 1e-8)
    for n in ("tr", "ref", "tot"):
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(mo.peak[n] > 0, (mo.edge[n] / mo.peak[n]) ** 2, 0.0)
        if ratio.max() > tol_edge:
            raise ContainmentError(
                f"{n} density reaches {ratio.max():.3e} of its maximum at the grid edge "
                f"[{grid.lo:.4g}, {grid.hi:.4g}]"
            )
        if ratio.max() > edge_tol:
            notes.append(f"{n} edge density {ratio.max():.1e} (k <= 0 cut)")

    kt = kspace_times(pf)
    x_tr, x_ref, x_tot = mo.centroid("tr"), mo.centroid("ref"), mo.centroid("tot")
    f_minus = pf.flux("tr", sys.xc, -1, t)
    f_plus = pf.flux("tr", sys.xc, +1, t)
    dT = five_point_derivative(mo.norm["tr"], dt)

    def xbar_tr(ts):
        m = pf.moments(ts, grid, which=("tr",))
        return m.centroid("tr")

    def xbar_ref(ts):
        m = pf.moments(ts, grid, which=("ref",))
        return m.centroid("ref")

    tol = 1e-4 * sys.tau_free(spec.kbar)
    entry = _crossings(t, x_tr, sys.a1)
    exit_ = _crossings(t, x_tr, sys.b2)
    if len(entry) > 1 or len(exit_) > 1:
        notes.append(f"multiple crossings: {len(entry)} at a1, {len(exit_)} at b2")
    t_entry = t_exit = float("nan")
    if entry and exit_:
        t_entry = refine_crossing(xbar_tr, t[entry[0]], t[entry[0] + 1], sys.a1, tol)
        t_exit = refine_crossing(xbar_tr, t[exit_[-1]], t[exit_[-1] + 1], sys.b2, tol)
    else:
        notes.append("transmitted centroid did not cross the structure within the window")

    tau_ref_loc = 0.0
    if kt.R_as > 0:
        cr = _crossings(t, x_ref, sys.a1)
        if len(cr) >= 2:
            r0 = refine_crossing(xbar_ref, t[cr[0]], t[cr[0] + 1], sys.a1, tol)
            r1 = refine_crossing(xbar_ref, t[cr[-1]], t[cr[-1] + 1], sys.a1, tol)
            tau_ref_loc = r1 - r0

    final_overlap = float(mo.overlap[-1] / math.sqrt(mo.norm["tr"][-1] * mo.norm["ref"][-1])) if kt.R_as > 0 else 0.0
    ocs = final_overlap < ocs_tol
    if not ocs:
        notes.append(f"ocs-invalid: final overlap {final_overlap:.2e}")

    return Trajectory(
        t=t, x_tr=x_tr, x_ref=x_ref, x_tot=x_tot,
        norm_T=mo.norm["tr"], norm_R=mo.norm["ref"], norm_tot=mo.norm["tot"],
        flux_xc_minus=f_minus, flux_xc_plus=f_plus, dT_dt=dT,
        rwp_x=rwp_position(kt, sys, t), overlap=mo.overlap, kspace=kt,
        tau_tr_loc=t_exit - t_entry, tau_ref_loc=tau_ref_loc,
        t_tr_entry=t_entry, t_tr_exit=t_exit, ocs_valid=ocs, final_overlap=final_overlap,
        quad_residual=float(residual), quad_converged=ok, n_nodes=int(k.size), grid=grid,
        warnings=notes,
    )


def linear_fit(t, x, mask):
    """Slope and intercept of a least-squares line through the masked samples."""
    slope, intercept = np.polyfit(np.asarray(t)[mask], np.asarray(x)[mask], 1)
    return float(slope), float(intercept)


def stage_masks(traj: Trajectory, sys: BarrierSystem, spec: PacketSpec, n_sigma=6.0):
    """(incident, final) time masks where the transmitted packet is clear of the structure."""
    sig = spec.width(traj.t, sys.m, sys.hbar)
    early = traj.x_tr + n_sigma * sig < sys.a1
    late = (traj.x_tr - n_sigma * sig > sys.b2) & (traj.x_ref + n_sigma * sig < sys.a1)
    return early, late
