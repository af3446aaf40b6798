"""Command-line front end.

Subcommands:

* ``verify``    -- the convolution-identity suite on a grid ladder
* ``extend``    -- the propagator-extension demo over the fixed test matrix
* ``calculus``  -- multiplicativity / generator / smoothing checks
* ``scenario``  -- closed-form growth scenarios (l2-blowup, mult-exp)
* ``convolve``  -- ad-hoc convolution of kernel specs / bumps / CSV files

Exit codes: 0 all checks passed, 1 some check failed, 2 configuration or
I/O error.  CCF_THREADS caps suite parallelism.

Function specs accepted by ``convolve``: kernel specs (``jalpha:<a>``,
``chi01``, ``kdelta:<d>``, ``subord:<spec>``, ``file:<path.csv>``) and
bumps ``bump:<a>,<b>,<p>``.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import gridfn
from .gridfn import Grid
from .harness import (
    Report,
    RunConfig,
    parse_bump,
    parse_generator,
    run_calculus_suite,
    run_extension_demo,
    run_identity_suite,
    run_l2_blowup,
    run_mult_exp,
)
from .kernels import parse_kernel


def _emit(report: Report, out: str | None, fmt: str) -> int:
    if out:
        report.write(out, fmt)
    else:
        if fmt == "json":
            print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
        else:
            for r in report.records:
                print(f"{r.name},{r.value!r},{r.tolerance!r},{r.order!r},{int(r.passed)}")
    n_fail = sum(not r.passed for r in report.records)
    print(f"# {report.suite}: {len(report.records) - n_fail}/{len(report.records)} "
          f"checks passed", file=sys.stderr)
    return 0 if report.passed else 1


def _parse_grid(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(",") if p.strip())


def _parse_times(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _sample_spec(spec: str, grid: Grid):
    if spec.startswith("bump:"):
        return parse_bump(spec.split(":", 1)[1]).sample(grid)
    return parse_kernel(spec).sample(grid)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ccf", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="write the report to this path")
    common.add_argument("--format", dest="fmt", default="json", choices=["json", "csv"])

    p = sub.add_parser("verify", parents=[common], help="run the identity suite")
    p.add_argument("--grid", type=_parse_grid, default=(256, 512, 1024),
                   help="comma-separated grid ladder (default 256,512,1024)")
    p.add_argument("--T", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--fault", default=None,
                   choices=["shift-convolve"], help="negative-control fault injection")

    p = sub.add_parser("extend", parents=[common], help="run the extension demo")
    p.add_argument("--grid", type=_parse_grid, default=(64, 128, 256),
                   help="nodes per unit window, comma-separated ladder")
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--fault", default=None, choices=["drop-extension-term"])

    p = sub.add_parser("calculus", parents=[common], help="operator-calculus checks")
    p.add_argument("--kernel", default="jalpha:1", help="power kernel spec jalpha:<a>")
    p.add_argument("--gen", default="0,1,2j", help="comma-separated spectral parameters")
    p.add_argument("--bump", default="0.2,0.8,5", help="test bump a,b,p")
    p.add_argument("--check", default="mult", choices=["mult", "gen", "smooth"])
    p.add_argument("--grid", type=_parse_grid, default=(256, 512),
                   help="coarser rungs sit outside the asymptotic regime")
    p.add_argument("--tau", type=float, default=1.0)

    p = sub.add_parser("scenario", parents=[common], help="closed-form growth scenarios")
    p.add_argument("name", choices=["l2-blowup", "mult-exp"])
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--modes", type=int, default=30)
    p.add_argument("--times", type=_parse_times, default=[0.8, 1.2])
    p.add_argument("--xmax", type=float, default=25.0)

    p = sub.add_parser("convolve", parents=[common], help="ad-hoc convolution")
    p.add_argument("--f", required=True, help="kernel spec, bump:a,b,p, or file:<csv>")
    p.add_argument("--g", required=True)
    p.add_argument("--T", type=float, default=2.0)
    p.add_argument("--grid", type=int, default=512, help="subintervals M")
    p.add_argument("--product", default="star", choices=["star", "dual", "cosine"])
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "verify":
            cfg = RunConfig(suite="identity", grid=args.grid, T=args.T,
                            seed=args.seed, fault=args.fault,
                            out=args.out, fmt=args.fmt)
            return _emit(run_identity_suite(cfg), cfg.out, cfg.fmt)

        if args.command == "extend":
            cfg = RunConfig(suite="extend", grid=args.grid, nmax=args.nmax,
                            fault=args.fault, out=args.out, fmt=args.fmt)
            return _emit(run_extension_demo(cfg), cfg.out, cfg.fmt)

        if args.command == "calculus":
            cfg = RunConfig(suite="calculus", grid=args.grid, kernel=args.kernel,
                            gen=args.gen, tau=args.tau, out=args.out, fmt=args.fmt)
            parse_generator(cfg.gen)
            bump = parse_bump(args.bump)
            return _emit(run_calculus_suite(cfg, args.check, bump), cfg.out, cfg.fmt)

        if args.command == "scenario":
            if args.name == "l2-blowup":
                report = run_l2_blowup(args.T, args.modes, args.times)
            else:
                report = run_mult_exp(args.xmax, args.times)
            return _emit(report, args.out, args.fmt)

        if args.command == "convolve":
            grid = Grid(args.T, args.grid)
            f = _sample_spec(args.f, grid)
            g = _sample_spec(args.g, grid)
            if args.product == "star":
                result = gridfn.convolve(f, g)
            elif args.product == "dual":
                result = gridfn.dual_convolve(f, g)
            else:
                result = gridfn.cosine_convolve(f, g)
            if args.out:
                gridfn.write_csv(result, args.out)
            else:
                for t, v in zip(grid.nodes, result.values):
                    print(f"{float(t)!r},{float(v.real)!r},{float(v.imag)!r}")
            return 0
    except (ValueError, OSError) as err:
        print(f"ccf: error: {err}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
