"""
Command-line front end.

Subcommands: ``bound``, ``sweep``, ``figure``, ``oracle-check``, ``gmax``.
Exit codes: 0 ok, 1 usage, 2 physicality violation, 3 certification failure.
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .bounds import Protocol, evaluate
from .errors import CertificationFailure, CutoffTooSmall, DomainError, GainOutOfRange, PhysicalityViolation
from .nla import NlaConfig, g_max, ns_max
from .states import QiScenario
from .sweep import FIGURES, SweepSpec, run_figure, write_sweep

EXIT_OK, EXIT_USAGE, EXIT_PHYSICALITY, EXIT_CERTIFICATION = 0, 1, 2, 3

ORACLE_NS = (0.05, 0.1)
ORACLE_G = (1.0, 1.5)
ORACLE_S = (0.3, 0.5, 0.7)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _emit(obj, stream=None):
    print(json.dumps(obj, sort_keys=False), file=stream or sys.stdout)


def _physicality_payload(exc, scenario=None):
    out = {"error": type(exc).__name__, "constraint": exc.constraint, "value": exc.value, "message": str(exc)}
    if isinstance(exc, GainOutOfRange):
        out["g_max"] = exc.g_max
    elif scenario is not None and scenario.n_b < scenario.kappa:
        out["g_max"] = g_max(scenario.kappa, 2.0 * scenario.n_b / scenario.kappa)
    return out


def cmd_bound(args):
    scenario = QiScenario(args.ns, args.nb, args.kappa, args.m)
    nla = NlaConfig(args.g, args.a)
    try:
        result = evaluate(args.protocol, scenario, nla)
    except PhysicalityViolation as exc:
        _emit(_physicality_payload(exc, scenario), sys.stderr)
        return EXIT_PHYSICALITY
    _emit(result.to_dict())
    return EXIT_OK


def _load_config(path):
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise DomainError("sweep configuration must be a flat JSON object")
    return data


def cmd_sweep(args):
    config = _load_config(args.config)
    overrides = {
        "name": args.name,
        "protocols": args.protocols,
        "n_s": args.ns,
        "n_b": args.nb,
        "kappa": args.kappa,
        "m_probes": args.m,
        "g": args.g,
        "a": args.a,
        "axis": args.axis,
        "start": args.start,
        "stop": args.stop,
        "points": args.points,
        "scale": args.scale,
        "ns_policy": args.ns_policy,
        "ns_fraction": args.ns_fraction,
    }
    config.update({k: v for k, v in overrides.items() if v is not None})
    spec = SweepSpec.from_mapping(config)
    csv_path, meta_path, rows = write_sweep(spec, args.out, args.workers)
    _emit({"csv": str(csv_path), "metadata": str(meta_path), "rows": len(rows),
           "skipped": sum(not r.physical for r in rows)})
    return EXIT_OK


def cmd_figure(args):
    paths = run_figure(args.name, args.out_dir, args.workers)
    _emit({"figure": args.name, "csv": [str(p) for p in paths]})
    return EXIT_OK


def _oracle_point(job):
    from .fock import certify_pipeline

    ns, g, nb, kappa, s_grid, cutoff, tol = job
    point = {"n_s": ns, "g": g, "n_b": nb, "kappa": kappa}
    try:
        report = certify_pipeline(QiScenario(ns, nb, kappa, 1), g, s_grid, cutoff=cutoff, tol=tol)
    except CertificationFailure as exc:
        point.update(exc.report.to_dict() if exc.report else {})
        point.update(certified=False, error="CertificationFailure", message=str(exc))
        return point
    except CutoffTooSmall as exc:
        point.update(certified=False, error="CutoffTooSmall", message=str(exc))
        return point
    point.update(report.to_dict())
    return point


def cmd_oracle_check(args):
    jobs = [
        (ns, g, args.nb, args.kappa, tuple(args.s), args.cutoff, args.tol)
        for ns in args.ns
        for g in args.g
    ]
    if args.parallel and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers or os.cpu_count()) as pool:
            results = list(pool.map(_oracle_point, jobs))
    else:
        results = [_oracle_point(job) for job in jobs]
    ok = True
    for res in results:
        ok &= bool(res.get("certified"))
        _emit(res)
    return EXIT_OK if ok else EXIT_CERTIFICATION


def cmd_gmax(args):
    eps = 2.0 * args.nb / args.kappa
    gm = g_max(args.kappa, eps)
    out = {"n_b": args.nb, "kappa": args.kappa, "tau": args.kappa, "epsilon": eps, "g_max": gm}
    out["ns_max_at_g_max"] = ns_max(args.nb, args.kappa, gm) if math.isfinite(gm) else None
    if args.g is not None:
        out["g"] = args.g
        out["ns_max"] = ns_max(args.nb, args.kappa, args.g)
    _emit(out)
    return EXIT_OK


def _gain(text):
    return text if text == "gmax" else float(text)


def build_parser():
    parser = _Parser(prog="qinla", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bound", help="evaluate one protocol bound, printed as JSON")
    p.add_argument("--protocol", required=True, choices=[x.value for x in Protocol])
    p.add_argument("--ns", type=float, required=True, help="mean signal photons N_S")
    p.add_argument("--nb", type=float, required=True, help="mean background photons N_B")
    p.add_argument("--kappa", type=float, required=True, help="target reflectivity")
    p.add_argument("--m", type=int, required=True, help="number of probes M")
    p.add_argument("--g", type=float, default=1.0, help="NLA gain (NLA protocols only)")
    p.add_argument("--a", type=float, default=1.0, help="NLA efficiency divisor, P = 1/(a g^2)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="run a parameter sweep to CSV + JSON")
    p.add_argument("--config", help="flat JSON sweep configuration; flags override it")
    p.add_argument("--out", required=True, help="output CSV path (metadata goes next to it)")
    p.add_argument("--name")
    p.add_argument("--protocols", nargs="+", choices=[x.value for x in Protocol])
    p.add_argument("--ns", type=float)
    p.add_argument("--nb", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--g", type=_gain)
    p.add_argument("--a", type=float)
    p.add_argument("--axis", choices=["g", "n_s", "m_probes", "a"])
    p.add_argument("--start", type=_gain)
    p.add_argument("--stop", type=_gain)
    p.add_argument("--points", type=int)
    p.add_argument("--scale", choices=["linear", "log"])
    p.add_argument("--ns-policy", choices=["fixed", "local_max_fraction"])
    p.add_argument("--ns-fraction", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="reproduce a figure preset")
    p.add_argument("name", choices=FIGURES)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("oracle-check", help="certify the Gaussian route against the Fock oracle")
    p.add_argument("--ns", type=float, nargs="+", default=list(ORACLE_NS))
    p.add_argument("--g", type=float, nargs="+", default=list(ORACLE_G))
    p.add_argument("--s", type=float, nargs="+", default=list(ORACLE_S))
    p.add_argument("--nb", type=float, default=0.1)
    p.add_argument("--kappa", type=float, default=0.2)
    p.add_argument("--cutoff", type=int, help="fixed Fock cutoff (default: adaptive from 25)")
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--parallel", action="store_true", help="evaluate points in a process pool")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("gmax", help="maximum NLA gain and signal energy")
    p.add_argument("--nb", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--g", type=float, help="also report N_S^max at this gain")
    p.set_defaults(func=cmd_gmax)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except PhysicalityViolation as exc:
        _emit(_physicality_payload(exc), sys.stderr)
        return EXIT_PHYSICALITY
    except (DomainError, OSError) as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
