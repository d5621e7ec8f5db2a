"""Command line entry point: ``twobarrier run|verify|list-builtins``."""

from __future__ import annotations

import argparse
import sys

from . import acceptance, scenarios


def _run(args):
    try:
        sc = scenarios.get_scenario(args.scenario)
        paths = scenarios.run(sc, args.out, threads=args.threads)
    except scenarios.ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    return 0


def _verify(args):
    results = acceptance.run_suite(full=args.full)
    for r in results:
        print(r.line(), flush=True)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def _list(_args):
    for name, sc in scenarios.BUILTINS.items():
        print(f"{name}\t{sc.mode}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="twobarrier", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file or builtin")
    r.add_argument("scenario", help="builtin name or path to a scenario file")
    r.add_argument("--out", default="out", help="output directory (default: out)")
    r.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    r.set_defaults(func=_run)
    v = sub.add_parser("verify", help="run the acceptance checks")
    g = v.add_mutually_exclusive_group()
    g.add_argument("--fast", dest="full", action="store_false", help="skip ODE and packet runs (default)")
    g.add_argument("--full", dest="full", action="store_true", help="include ODE oracle and packet runs")
    v.set_defaults(func=_verify, full=False)
    ls = sub.add_parser("list-builtins", help="list embedded scenarios")
    ls.set_defaults(func=_list)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
