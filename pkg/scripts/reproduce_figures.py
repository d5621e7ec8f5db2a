"""Regenerate the figure datasets (CSV, metadata, gnuplot script) for fig1..fig7.

    python3 scripts/reproduce_figures.py --out out --threads 4 [--skip-packet]
"""

import argparse
import time

from twobarrier import scenarios


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="out")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--skip-packet", action="store_true", help="leave out the fig7 wave-packet run")
    args = ap.parse_args()
    for name, sc in scenarios.BUILTINS.items():
        if args.skip_packet and sc.mode == "wavepacket":
            continue
        t0 = time.perf_counter()
        paths = scenarios.run(sc, args.out, threads=args.threads)
        print(f"{name}: {time.perf_counter() - t0:.1f} s -> {', '.join(paths)}")


if __name__ == "__main__":
    main()
