"""Hartman saturation at E = V0/2: tau_as and tau_tr_dwell against barrier width
and against gap width (at the gap midpoints between resonances).

    python3 scripts/hartman_scan.py
"""

import numpy as np

from twobarrier.core import make_system
from twobarrier.times import midpoint_lengths, time_scales

V0, K = 1.0, 1.0


def main():
    print("# width scan, L = 0.3")
    print("kappa_d, tau_as, tau_tr_dwell, tau_ph")
    for d in (2.0, 4.0, 8.0, 15.0, 30.0):
        ts = time_scales(make_system(V0, d, 0.3, 200.0), np.array([K]))
        print(f"{d:g}, {ts.tau_as[0]:.10g}, {ts.tau_tr_dwell[0]:.6g}, {ts.tau_ph[0]:.10g}")
    print("# gap scan at midpoints, kappa d = 15")
    print("L, tau_as, tau_tr_dwell")
    sys = make_system(V0, 15.0, 0.0, 200.0)
    for L in midpoint_lengths(sys, K, 40.0):
        ts = time_scales(sys.with_(L=L), np.array([K]))
        print(f"{L:.6f}, {ts.tau_as[0]:.10g}, {ts.tau_tr_dwell[0]:.6g}")


if __name__ == "__main__":
    main()
