"""Command line front end: ``coxlim analyze | limitset | verify``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import chart as chart_mod
from . import coxsys, words
from .chart import Chart
from .coxsys import CoxeterError, CoxeterSystem, irreducible_components, load_system
from .limits import classify_action, limit_set_sample, write_limit_csv
from .verify import SUITES

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("coxlim")


@dataclass
class RunConfig:
    zero_tolerance: float = coxsys.ZERO_TOLERANCE
    boundary_tol: float = chart_mod.BOUNDARY_TOL
    descent_tol: float = words.DESCENT_TOL
    seed: int = 0

    def __post_init__(self):
        for name in ("zero_tolerance", "boundary_tol", "descent_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


def _fmt(v) -> str:
    return " ".join(f"{x:.17g}" for x in np.atleast_1d(v))


def _load(path, cfg: RunConfig) -> CoxeterSystem:
    m = load_system(path)
    return CoxeterSystem(m, tol=cfg.zero_tolerance)


def cmd_analyze(args, cfg: RunConfig) -> int:
    m = load_system(args.file)
    form = coxsys.build_form(m)
    sig = coxsys.signature(form, cfg.zero_tolerance)
    comps = irreducible_components(form)
    print(f"rank {m.rank}")
    print(f"signature {sig}")
    print(f"eigenvalues {_fmt(sig.eigenvalues)}")
    print("irreducible" if len(comps) == 1 else
          "reducible: components " + " ".join("{" + ",".join(str(i + 1) for i in c) + "}" for c in comps))
    system = CoxeterSystem(m, tol=cfg.zero_tolerance)
    print(f"o {_fmt(system.o)}")
    print(f"negative eigenvalue {system.neg_eigenvalue:.17g}")
    res = classify_action(system)
    cusps = res.witnesses.get("cusps", [])
    print(f"classification {res.case} ({res.roman})")
    print(f"coordinate minima over closure of D {_fmt(res.witnesses['coordinate_minima'])}")
    if not cusps:
        print("cusps: none")
    else:
        ranks = sorted({c.rank for c in cusps})
        print(f"cusps: {len(cusps)} (rank {', '.join(map(str, ranks))})")
        for c in cusps:
            print(f"  {c}")
    print(f"summary: signature {sig}; {res.case}; "
          + ("cusps: none" if not cusps else f"{len(cusps)} cusps (rank {', '.join(map(str, ranks))})"))
    return EXIT_OK


def cmd_limitset(args, cfg: RunConfig) -> int:
    system = _load(args.file, cfg)
    gens = None
    if args.generators:
        gens = sorted({int(t) - 1 for t in args.generators.replace(",", " ").split()})
        if any(g < 0 or g >= system.rank for g in gens):
            raise argparse.ArgumentTypeError(f"generator out of range 1..{system.rank}")
    out = Path(args.out)
    csv_path = out if out.suffix.lower() != ".svg" else out.with_suffix(".csv")
    engine = words.WordEngine(system, descent_tol=cfg.descent_tol)
    chart = Chart(system, boundary_tol=cfg.boundary_tol)
    sample = limit_set_sample(system, args.depth, mode=args.mode, q_max=args.q_max, generators=gens,
                              engine=engine, chart=chart)
    write_limit_csv(csv_path, sample)
    print(f"wrote {len(sample.points)} points to {csv_path}")
    if out.suffix.lower() == ".svg":
        from .plotting import UnsupportedRenderError, render_limit_set

        view = None if args.view is None else np.array([float(t) for t in args.view.replace(",", " ").split()])
        try:
            render_limit_set(out, chart, sample.points, view=view,
                             title=f"{args.mode} samples, depth {args.depth}")
        except (UnsupportedRenderError, ValueError) as exc:
            print(f"error: {exc} (CSV was written)", file=sys.stderr)
            return EXIT_USAGE
        print(f"wrote {out}")
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    system = _load(args.file, cfg)
    checks = SUITES[args.suite](system, seed=cfg.seed)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    print(f"suite {args.suite}: {len(checks) - len(failed)}/{len(checks)} checks passed")
    if failed:
        print("FAILURES " + json.dumps([{"check": c.name, "value": c.value, "threshold": c.threshold}
                                         for c in failed]))
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coxlim", description="Limit sets of Lorentzian Coxeter groups.")
    p.add_argument("--zero-tolerance", type=float, default=coxsys.ZERO_TOLERANCE)
    p.add_argument("--boundary-tol", type=float, default=chart_mod.BOUNDARY_TOL)
    p.add_argument("--descent-tol", type=float, default=words.DESCENT_TOL)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="signature, Perron vector, classification and cusps")
    a.add_argument("file")
    a.set_defaults(func=cmd_analyze)

    ls = sub.add_parser("limitset", help="write limit-set samples as CSV (and SVG)")
    ls.add_argument("file")
    ls.add_argument("--depth", type=int, required=True)
    ls.add_argument("--mode", choices=("orbit", "roots"), default="orbit")
    ls.add_argument("--out", required=True, help="output path ending in .csv or .svg")
    ls.add_argument("--q-max", type=float, default=0.05, help="keep points with |q| below this")
    ls.add_argument("--generators", help="restrict to a special subgroup, e.g. '1,2'")
    ls.add_argument("--view", help="projection direction for rank 4 pictures, e.g. '1,1,1,1'")
    ls.set_defaults(func=cmd_limitset)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("file")
    v.add_argument("--suite", choices=sorted(SUITES), required=True)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(args.zero_tolerance, args.boundary_tol, args.descent_tol,
                        seed=getattr(args, "seed", 0))
    except ValueError as exc:
        parser.error(str(exc))
    if getattr(args, "depth", 0) is not None and getattr(args, "depth", 0) < 0:
        parser.error("--depth must be >= 0")
    try:
        return args.func(args, cfg)
    except (CoxeterError, argparse.ArgumentTypeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
