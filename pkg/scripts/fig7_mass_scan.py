"""Local and asymptotic transmission times of the fig7 packet versus the effective mass.

The fig7 parameters fix V0, d, l0 and the mean energy but not the mass; this
scan shows how tau_tr_loc and tau_tr_as respond when the mass is varied around
the calibrated value m D/(hbar kbar) = 0.025 ps.

    python3 scripts/fig7_mass_scan.py [--masses 0.0489 0.067 0.1]
"""

import argparse

from twobarrier.acceptance import FIG7
from twobarrier.core import calibrate_mass_fraction, get_preset, make_system
from twobarrier.packets import packet_from_energy, run_packet


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    cal = calibrate_mass_fraction(FIG7["tau_free"], 2 * FIG7["d"] + FIG7["L"], FIG7["energy"])
    ap.add_argument("--masses", type=float, nargs="+", default=[cal, 0.067, 0.1, 0.2],
                    help="mass fractions m/m_e to scan")
    args = ap.parse_args()
    print("m/m_e, tau_free_ps, tau_tr_loc_ps, tau_tr_as_ps, T_as, ocs_valid")
    for mf in args.masses:
        pr = get_preset("effective-mass", mf)
        sys = make_system(FIG7["V0"], FIG7["d"], FIG7["L"], FIG7["a1"], pr.mass, pr.hbar)
        spec = packet_from_energy(sys, FIG7["l0"], FIG7["energy"])
        tr = run_packet(sys, spec)
        print(f"{mf:.5f}, {sys.tau_free(spec.kbar):.5f}, {tr.tau_tr_loc:.5f}, {tr.tau_tr_as:.5f}, "
              f"{tr.T_as:.4e}, {tr.ocs_valid}", flush=True)


if __name__ == "__main__":
    main()
