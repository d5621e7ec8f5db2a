"""Scenario definitions, the built-in figure set and the runner that writes CSV,
metadata and gnuplot files."""

from __future__ import annotations

import configparser
import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from importlib import metadata as _md

import numpy as np

from .core import UNIT_PRESETS, BarrierSystem, calibrate_mass_fraction, get_preset, make_system
from .packets import PacketSpec, run_packet
from .scattering import unit_transmission_points
from .times import TimeScales, _row_flags, _stack, resonance_lengths, time_scales

MODES = ("times-vs-k", "times-vs-L", "wavepacket")
# fixed chunking keeps every value independent of the thread count
_CHUNK = 256


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """One figure-style run.  Lengths are in units of d for the dimensionless
    style (``two_kappa0_d`` set) and in preset units otherwise."""

    name: str
    mode: str
    preset: str = "natural"
    mass_fraction: float | None = None
    tau_free_target: float | None = None
    two_kappa0_d: float | None = None
    L_over_d: float | None = None
    d: float | None = None
    V0: float | None = None
    L: float | None = None
    a1: float | None = None
    k_min: float = 0.01
    k_max: float = 3.0
    n_points: int = 600
    k_over_kappa0: float | None = None
    L_min: float = 0.0
    L_max: float = 10.0
    l0: float | None = None
    energy: float | None = None
    t_max: float | None = None
    dt: float | None = None
    plot: str = "tau_tr_dwell,tau_dwell,tau_ph,tau_free"

    def errors(self):
        e = []
        if self.mode not in MODES:
            e.append(f"mode: must be one of {MODES}, got {self.mode!r}")
        if self.preset not in UNIT_PRESETS:
            e.append(f"preset: must be one of {UNIT_PRESETS}, got {self.preset!r}")
        if self.preset == "effective-mass" and self.mass_fraction is None and self.tau_free_target is None:
            e.append("mass_fraction: required for the effective-mass preset (or give tau_free_target)")
        dimless = self.two_kappa0_d is not None
        if dimless:
            if not self.two_kappa0_d > 0:
                e.append("two_kappa0_d: must be > 0")
            if self.L_over_d is not None and self.L_over_d < 0:
                e.append("L_over_d: must be >= 0")
            if self.V0 is not None or self.L is not None:
                e.append("V0/L: give either two_kappa0_d and L_over_d or V0, d and L, not both")
        else:
            for key in ("V0", "d", "L"):
                if getattr(self, key) is None:
                    e.append(f"{key}: required when two_kappa0_d is not given")
            if self.d is not None and not self.d > 0:
                e.append("d: must be > 0")
            if self.L is not None and self.L < 0:
                e.append("L: must be >= 0")
        if self.a1 is not None and not self.a1 > 0:
            e.append("a1: must be > 0")
        if self.mode == "times-vs-k":
            if not 0 < self.k_min < self.k_max:
                e.append("k_min/k_max: need 0 < k_min < k_max")
            if self.n_points < 2:
                e.append("n_points: must be >= 2")
        if self.mode == "times-vs-L":
            if self.k_over_kappa0 is None or not self.k_over_kappa0 > 0:
                e.append("k_over_kappa0: required and > 0 for times-vs-L")
            if not 0 <= self.L_min < self.L_max:
                e.append("L_min/L_max: need 0 <= L_min < L_max")
            if self.n_points < 2:
                e.append("n_points: must be >= 2")
        if self.mode == "wavepacket":
            for key in ("l0", "energy"):
                v = getattr(self, key)
                if v is None or not v > 0:
                    e.append(f"{key}: required and > 0 for wavepacket mode")
        return e

    def validate(self):
        errs = self.errors()
        if errs:
            raise ScenarioError(f"scenario {self.name!r}: " + "; ".join(errs))
        return self


def resolve(sc: Scenario):
    """(BarrierSystem, notes) with every unit choice written out."""
    notes = {}
    mf = sc.mass_fraction
    if sc.preset == "effective-mass" and mf is None:
        D = 2 * sc.d + sc.L
        mf = calibrate_mass_fraction(sc.tau_free_target, D, sc.energy)
        notes["mass_calibration"] = f"m chosen so m D/(hbar kbar) = {sc.tau_free_target}"
    pr = get_preset(sc.preset, mf)
    notes.update(preset=pr.name, hbar=pr.hbar, mass=pr.mass, mass_fraction=pr.mass_fraction,
                 length_unit=pr.length_unit, energy_unit=pr.energy_unit, time_unit=pr.time_unit)
    if sc.two_kappa0_d is not None:
        d = 1.0 if sc.d is None else sc.d
        kappa0 = sc.two_kappa0_d / (2 * d)
        V0 = (pr.hbar * kappa0) ** 2 / (2 * pr.mass)
        L = (sc.L_over_d or 0.0) * d
        a1 = 10.0 * d if sc.a1 is None else sc.a1
        notes["resolution"] = f"two_kappa0_d={sc.two_kappa0_d} L_over_d={sc.L_over_d or 0.0} with d={d}"
    else:
        d, V0, L = sc.d, sc.V0, sc.L
        a1 = 10.0 * d if sc.a1 is None else sc.a1
    sys = make_system(V0, d, L, a1, pr.mass, pr.hbar)
    notes.update(V0=sys.V0, d=sys.d, L=sys.L, a1=sys.a1, b2=sys.b2, D=sys.D, x_c=sys.xc,
                 kappa0=abs(sys.kappa0), tau_0=sys.tau0())
    return sys, notes


def _parallel_times(sys_of, values, threads):
    """time_scales over ``values`` in fixed chunks; sys_of(chunk) -> list of (sys, k) rows."""
    chunks = [values[i:i + _CHUNK] for i in range(0, len(values), _CHUNK)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(sys_of, chunks))
    return parts


def _sweep_k(sys: BarrierSystem, sc: Scenario, threads):
    k0 = abs(sys.kappa0)
    k = np.linspace(sc.k_min, sc.k_max, sc.n_points) * k0
    parts = _parallel_times(lambda ch: time_scales(sys, ch), k, threads)
    ts = TimeScales(**{
        f.name: (parts[0].tau_0 if f.name == "tau_0" else np.concatenate([np.ravel(getattr(p, f.name)) for p in parts]))
        for f in fields(TimeScales)
    })
    res = unit_transmission_points(sys, (0.0, sc.k_max * k0))
    return k, k / k0, ts, res


def _sweep_L(sys: BarrierSystem, sc: Scenario, threads):
    k0 = abs(sys.kappa0)
    k = sc.k_over_kappa0 * k0
    L = np.linspace(sc.L_min, sc.L_max, sc.n_points) * sys.d

    def chunk(Ls):
        return [time_scales(sys.with_(L=float(x)), np.array([k])) for x in Ls]

    rows = [r for part in _parallel_times(chunk, L, threads) for r in part]
    ts = _stack(rows)
    res = resonance_lengths(sys, k, L[-1])
    return L, L / sys.d, ts, [r for r in res if r >= L[0]]


TIME_COLUMNS = ("tau_tr_dwell", "tau_tr_1", "tau_tr_gap", "tau_ref_dwell", "tau_dwell",
                "tau_ph", "tau_as", "tau_dep", "tau_free")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def write_sweep_csv(path, sweep_name, values, scaled, scaled_name, ts: TimeScales):
    flags = _row_flags(ts)
    header = [sweep_name, scaled_name, "T_two", "R_two", "tau_tr_dwell", "tau_tr_1", "tau_tr_gap",
              "tau_ref_dwell", "tau_dwell", "tau_ph", "tau_as", "tau_dep", "x_start", "tau_free",
              "resonance_flag"] + [f"{c}/tau0" for c in TIME_COLUMNS] + ["flags"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(len(values)):
            g = lambda n: np.ravel(getattr(ts, n))[i]  # noqa: E731
            row = [values[i], scaled[i], g("T_two"), g("R_two"), g("tau_tr_dwell"), g("tau_tr_1"),
                   g("tau_tr_gap"), g("tau_ref_dwell"), g("tau_dwell"), g("tau_ph"), g("tau_as"),
                   g("tau_dep"), g("x_start"), g("tau_free"), bool(g("near_resonance"))]
            row += [g(c) / ts.tau_0 for c in TIME_COLUMNS]
            w.writerow([_fmt(v) for v in row] + [flags[i]])


def write_metadata(path, items):
    with open(path, "w") as fh:
        for key, val in items.items():
            fh.write(f"{key} = {val}\n")


def _version():
    try:
        return _md.version("artifact")
    except _md.PackageNotFoundError:
        return "unknown"


def write_plot_script(path, data_file, x_col, columns, title, markers=()):
    lines = [
        f"# plot {title}: gnuplot {os.path.basename(path)}",
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        f"set xlabel '{x_col}'",
        "set terminal pngcairo size 900,600",
        f"set output '{os.path.splitext(os.path.basename(path))[0]}.png'",
    ]
    for m in markers:
        lines.append(f"set arrow from {m:.10g}, graph 0 to {m:.10g}, graph 1 nohead dt 3 lc rgb 'gray'")
    plots = [f"'{data_file}' using '{x_col}':'{c}' with lines" for c in columns]
    lines.append("plot " + ", \\\n     ".join(plots))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def run(sc: Scenario, out_dir, threads=1):
    """Write the scenario's data, metadata and plot files; returns their paths."""
    sc.validate()
    os.makedirs(out_dir, exist_ok=True)
    sys, notes = resolve(sc)
    meta = {"scenario": sc.name, "mode": sc.mode, "version": _version()}
    meta.update({f"config.{k}": v for k, v in asdict(sc).items() if v is not None})
    meta.update({f"resolved.{k}": v for k, v in notes.items()})
    base = os.path.join(out_dir, sc.name)
    paths = []
    if sc.mode in ("times-vs-k", "times-vs-L"):
        if sc.mode == "times-vs-k":
            values, scaled, ts, res = _sweep_k(sys, sc, threads)
            names, markers = ("k", "k/kappa0"), [r / abs(sys.kappa0) for r in res]
        else:
            values, scaled, ts, res = _sweep_L(sys, sc, threads)
            names, markers = ("L", "L/d"), [r / sys.d for r in res]
        data = base + ".csv"
        write_sweep_csv(data, names[0], values, scaled, names[1], ts)
        meta["resonances"] = " ".join(format(r, ".12g") for r in res)
        meta["resonance_guard"] = "R_two < 1e-12"
        plot = base + ".gp"
        cols = [f"{c}/tau0" for c in sc.plot.split(",")]
        write_plot_script(plot, os.path.basename(data), names[1], cols, sc.name, markers)
        paths += [data, plot]
    else:
        paths += _run_packet(sys, sc, base, meta)
    write_metadata(base + ".meta", meta)
    paths.append(base + ".meta")
    return paths


def _run_packet(sys, sc: Scenario, base, meta):
    spec = PacketSpec(l0=sc.l0, kbar=float(sys.wavenumber(sc.energy)))
    tr = run_packet(sys, spec, t_max=sc.t_max, dt=sc.dt)
    meta.update({
        "packet.kbar": spec.kbar, "packet.k_interval": f"{spec.k_interval[0]:.12g} {spec.k_interval[1]:.12g}",
        "packet.k_nodes": tr.n_nodes, "packet.gl_order": spec.order,
        "packet.quadrature_residual": tr.quad_residual, "packet.x_nodes": tr.grid.x.size,
        "packet.x_range": f"{tr.grid.lo:.12g} {tr.grid.hi:.12g}", "packet.dt": tr.t[1] - tr.t[0],
        "packet.tau_free": sys.tau_free(spec.kbar), "packet.final_overlap": tr.final_overlap,
        "packet.warnings": "; ".join(tr.warnings) or "none",
    })
    flag = "ok" if tr.ocs_valid else "ocs-invalid"
    if not tr.quad_converged:
        flag = "quadrature-warn"
    traj = base + "_trajectory.csv"
    cols = ("t", "x_tr", "x_ref", "x_tot", "norm_T", "norm_R", "flux_xc_minus", "flux_xc_plus", "rwp_x")
    with open(traj, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(cols) + ["flags"])
        for i in range(tr.t.size):
            w.writerow([_fmt(getattr(tr, c)[i]) for c in cols] + [flag])
    summ = base + "_summary.csv"
    kt = tr.kspace
    with open(summ, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau_tr_loc", "tau_ref_loc", "tau_tr_as", "tau_ref_as", "T_as", "R_as", "t_dep", "ocs_valid", "flags"])
        w.writerow([_fmt(v) for v in (tr.tau_tr_loc, tr.tau_ref_loc, kt.tau_tr_as, kt.tau_ref_as,
                                      kt.T_as, kt.R_as, kt.t_dep, tr.ocs_valid)] + [flag])
    plot = base + ".gp"
    write_plot_script(plot, os.path.basename(traj), "t", ["x_tr", "rwp_x"], sc.name,
                      markers=())
    with open(plot, "a") as fh:
        fh.write(f"# structure occupies [{sys.a1:.10g}, {sys.b2:.10g}]\n")
    return [traj, summ, plot]


BUILTINS = {
    "fig1": Scenario("fig1", "times-vs-k", two_kappa0_d=3 * math.pi, L_over_d=0.0,
                     k_min=0.01, k_max=3.0, n_points=1200, plot="tau_tr_dwell,tau_dwell,tau_ph,tau_free"),
    "fig2": Scenario("fig2", "times-vs-k", two_kappa0_d=3 * math.pi, L_over_d=0.0,
                     k_min=0.01, k_max=3.0, n_points=1200, plot="tau_tr_dwell,tau_dep,tau_ref_dwell,tau_as"),
    "fig3": Scenario("fig3", "times-vs-L", two_kappa0_d=3 * math.pi, L_over_d=0.0, k_over_kappa0=1.5,
                     L_min=0.0, L_max=10.0, n_points=2001, plot="tau_tr_dwell,tau_dwell,tau_as,tau_free"),
    "fig4": Scenario("fig4", "times-vs-L", two_kappa0_d=3 * math.pi, L_over_d=0.0, k_over_kappa0=1.5,
                     L_min=0.0, L_max=10.0, n_points=2001,
                     plot="tau_tr_dwell,tau_ref_dwell,tau_as,tau_dep,tau_free"),
    "fig5": Scenario("fig5", "times-vs-L", two_kappa0_d=3 * math.pi, L_over_d=0.0, k_over_kappa0=0.97,
                     L_min=0.0, L_max=10.0, n_points=2001, plot="tau_tr_dwell,tau_dwell,tau_as,tau_free"),
    "fig6": Scenario("fig6", "times-vs-L", two_kappa0_d=3 * math.pi, L_over_d=0.0, k_over_kappa0=0.97,
                     L_min=0.0, L_max=10.0, n_points=2001, plot="tau_tr_dwell,tau_ref_dwell,tau_as,tau_free"),
    "fig7": Scenario("fig7", "wavepacket", preset="effective-mass", tau_free_target=0.025,
                     V0=0.2, d=7.5, L=0.0, a1=200.0, l0=10.0, energy=0.05),
}


def _convert(f, raw):
    typ = str(f.type)
    raw = raw.strip()
    if raw.lower() in ("", "none"):
        return None
    if "int" in typ:
        return int(raw)
    if "float" in typ:
        return float(raw)
    return raw


def load_scenario(path) -> Scenario:
    """Read a key = value file with a single [scenario] section."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    with open(path) as fh:
        cp.read_file(fh)
    if "scenario" not in cp:
        raise ScenarioError(f"{path}: missing [scenario] section")
    sec = cp["scenario"]
    known = {f.name: f for f in fields(Scenario)}
    errs, kw = [], {}
    for key, raw in sec.items():
        if key not in known:
            errs.append(f"{key}: unknown field")
            continue
        try:
            kw[key] = _convert(known[key], raw)
        except ValueError:
            errs.append(f"{key}: cannot parse {raw!r} as {known[key].type}")
    kw.setdefault("name", os.path.splitext(os.path.basename(path))[0])
    if "mode" not in kw:
        errs.append("mode: required")
    else:
        errs += Scenario(**kw).errors()
    if errs:
        raise ScenarioError(f"{path}: " + "; ".join(errs))
    return Scenario(**kw)


def get_scenario(name_or_path) -> Scenario:
    if name_or_path in BUILTINS:
        return BUILTINS[name_or_path]
    if os.path.exists(name_or_path):
        return load_scenario(name_or_path)
    raise ScenarioError(f"{name_or_path!r} is neither a builtin ({', '.join(BUILTINS)}) nor a file")


def with_overrides(sc: Scenario, **kw) -> Scenario:
    return replace(sc, **kw).validate()
