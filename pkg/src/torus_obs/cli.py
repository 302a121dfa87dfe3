"""Command-line front end.

Exit codes: 0 success, 1 replay digest mismatch, 2 usage error, 3 domain
error, 4 numerical non-convergence.  Failures print one line on stderr of
the form ``torus-obs: error code=<int> kind=<word> reason=<text>``.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .clusters import arc_window_check, connes_threshold, decomposition_gap, partition
from .errors import ConvergenceError, DomainError
from .expoly import ExponentialPolynomial
from .lattice import cap_statistics, enumerate_sphere
from .observability import (exponent_tables, family_hyperplane, family_simple, family_wigert,
                            gram_matrix, min_eigenvalue, upper_bound_eval)
from .report import RunManifest, canonical_json, digest, emit_report
from .spectral import gamma_bounds, gamma_max, kernel_vector, moment_matrix
from .turan import extremal_scaling_suite, random_trials

log = logging.getLogger("torus_obs")

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_DOMAIN, EXIT_NONCONV = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_at_least(lo):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v
    return parse


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not v > 0 or math.isinf(v):
        raise argparse.ArgumentTypeError(f"must be a finite number > 0, got {text}")
    return v


def worker_count():
    raw = os.environ.get("TORUS_OBS_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"TORUS_OBS_THREADS must be an integer >= 1, got {raw!r}")
    return n


def _pool_map(fn, items):
    n = worker_count()
    if n == 1:
        return list(map(fn, items))
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# each command returns (results, csv_rows_or_text, csv_columns)

def cmd_sphere(a):
    s = enumerate_sphere(a.dim, a.norm)
    res = {"sphere": s, "count": len(s)}
    if a.cap_radius is not None:
        res["cap"] = cap_statistics(s, a.cap_radius, a.exact_limit)
    return res, s.to_csv(), None


def cmd_gamma(a):
    b = gamma_bounds(a.dim, a.norm, a.c_arith)
    n_max = a.n_max if a.n_max is not None else int(b.upper_M) + 1
    g = gamma_max(a.dim, a.norm, n_max)
    pts = enumerate_sphere(a.dim, a.norm).tuples()
    kv = kernel_vector(moment_matrix(pts, g, reduced=True)) if g >= 0 else None
    res = {"d": a.dim, "n": a.norm, "count": len(pts), "n_max": n_max,
           "gamma_max": g, "bounds": b, "kernel": kv}
    row = {"d": a.dim, "n": a.norm, "count": len(pts), "gamma_max": g,
           "lower": b.lower, "upper_M": b.upper_M, "upper_D": b.upper_D}
    return res, [row], None


def cmd_observability(a):
    s = enumerate_sphere(a.dim, a.norm)
    if len(s) == 0:
        raise DomainError(f"empty eigenspace: S_{a.dim}(sqrt({a.norm}))")
    rows = []
    for r in a.r:
        e = min_eigenvalue(gram_matrix(s, r), a.tol, a.max_sweeps)
        rows.append({"d": a.dim, "n": a.norm, "count": len(s), "r": r, "m": e.value, "sweeps": e.sweeps})
    return {"rows": rows}, rows, ["d", "n", "count", "r", "m", "sweeps"]


def cmd_cluster(a):
    s = enumerate_sphere(a.dim, a.norm)
    part = partition(s, a.rho)
    res = {"partition": part, "components": len(part)}
    if a.connes:
        res["connes_threshold"] = connes_threshold(s)
        # trend reference only: the threshold is expected to scale like this, up to unknown constants
        res["connes_scale"] = math.sqrt(a.norm) ** (2 / math.factorial(a.dim + 1))
    if a.decomp_r is not None:
        rng = np.random.default_rng(a.seed)
        signs = rng.choice([-1, 1], size=len(s)).tolist()
        u = ExponentialPolynomial.from_terms(zip(s.tuples(), signs))
        res["decomposition"] = decomposition_gap(u, a.rho, a.decomp_r)
    rows = [{"component": i, "point": list(p)} for i, comp in enumerate(part.components) for p in comp]
    return res, rows, ["component", "point"]


def cmd_jarnik(a):
    ns = list(range(a.n_min, a.n_max + 1))
    done = []

    def one(n):
        c = arc_window_check(n, a.m)
        done.append(n)
        if len(done) % 1000 == 0:
            log.info("jarnik: %d/%d values of n checked", len(done), len(ns))
        return c

    checks = sorted(_pool_map(one, ns), key=lambda c: c.n)
    bad = [c for c in checks if c.violations]
    res = {"m": a.m, "n_min": a.n_min, "n_max": a.n_max, "checked": len(checks),
           "violating_n": [c.n for c in bad], "violations": [c.to_json() for c in bad]}
    return res, [c.csv_row() for c in checks], ["n", "threshold", "m", "violations"]


def cmd_turan(a):
    if a.trials:
        rows = random_trials(a.trials, a.seed, map_fn=_pool_map)
        cols = ["trial_id", "terms", "set", "measured_ratio", "per_term_exponent", "seed"]
        floor = min(r["measured_ratio"] for r in rows)
        return {"trials": rows, "min_ratio": floor, "seed": a.seed}, rows, cols
    rows = extremal_scaling_suite(a.n_max, a.r)
    cols = ["kind", "n", "n2", "r", "r2", "measured", "analytic", "log_diff"]
    return {"rows": rows, "max_log_diff": max(r["log_diff"] for r in rows)}, rows, cols


def cmd_family(a):
    if a.kind == "simple":
        rep = family_simple(a.dim, a.index, a.r)
    elif a.kind == "hyperplane":
        rep = family_hyperplane(a.dim, a.K, a.r)
    else:
        rep = family_wigert(a.m, a.r)
    return rep, [rep.csv_row()], ["family", "d", "n", "r", "measured", "bound"]


def cmd_bounds(a):
    b = gamma_bounds(a.dim, a.norm, a.c_arith)
    res = {"d": a.dim, "n": a.norm, "gamma_bounds": b}
    row = {"d": a.dim, "n": a.norm, "lower": b.lower, "upper_M": b.upper_M, "upper_D": b.upper_D}
    if a.r is not None:
        count = len(enumerate_sphere(a.dim, a.norm))
        diam = 2 * math.sqrt(a.norm)
        res["upper_bound_eval"] = upper_bound_eval(count, diam, max(b.lower, 0), a.r)
        row["upper_bound_eval"] = res["upper_bound_eval"]
        if a.dim >= 3 and a.r < 1:
            res["exponents"] = exponent_tables(a.dim, a.r, a.gamma_exp, a.D, n=a.norm)
    return res, [row], None


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--manifest", metavar="PATH", help="append a run manifest (JSON line) to PATH")
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="torus-obs", description="Spectral geometry of flat tori at desk scale.")
    p.add_argument("--version", action="version", version=f"torus-obs {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sphere", parents=[common], help="integer points on a sphere")
    s.add_argument("--dim", type=_int_at_least(2), required=True)
    s.add_argument("--norm", type=_int_at_least(0), required=True, help="squared radius n")
    s.add_argument("--cap-radius", type=_positive_float)
    s.add_argument("--exact-limit", type=_int_at_least(0), default=64)
    s.set_defaults(func=cmd_sphere)

    s = sub.add_parser("gamma", parents=[common], help="maximal vanishing order")
    s.add_argument("--dim", type=_int_at_least(2), required=True)
    s.add_argument("--norm", type=_int_at_least(0), required=True)
    s.add_argument("--n-max", type=_int_at_least(0))
    s.add_argument("--c-arith", type=_positive_float, default=1.0)
    s.set_defaults(func=cmd_gamma)

    s = sub.add_parser("observability", parents=[common], help="smallest Gram eigenvalue m")
    s.add_argument("--dim", type=_int_at_least(1), required=True)
    s.add_argument("--norm", type=_int_at_least(0), required=True)
    s.add_argument("--r", type=_positive_float, nargs="+", required=True)
    s.add_argument("--tol", type=_positive_float, default=1e-12)
    s.add_argument("--max-sweeps", type=_int_at_least(1), default=100)
    s.set_defaults(func=cmd_observability)

    s = sub.add_parser("cluster", parents=[common], help="proximity-graph partition")
    s.add_argument("--dim", type=_int_at_least(2), required=True)
    s.add_argument("--norm", type=_int_at_least(0), required=True)
    s.add_argument("--rho", type=_positive_float, required=True)
    s.add_argument("--connes", action="store_true", help="also report the hyperplane threshold")
    s.add_argument("--decomp-r", type=_positive_float, help="decomposition gap at this r, random signs")
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("jarnik", parents=[common], help="arc-window cluster checks over a range of n")
    s.add_argument("--n-min", type=_int_at_least(1), default=1)
    s.add_argument("--n-max", type=_int_at_least(1), required=True)
    s.add_argument("--m", type=_int_at_least(1), default=2)
    s.set_defaults(func=cmd_jarnik)

    s = sub.add_parser("turan", parents=[common], help="Turan ratio harness")
    s.add_argument("--n-max", type=_int_at_least(0), default=6)
    s.add_argument("--r", type=_positive_float, nargs="+", default=[0.2, 0.5, 1.0])
    s.add_argument("--trials", type=_int_at_least(0), default=0, help="random trials instead of the suite")
    s.set_defaults(func=cmd_turan)

    s = sub.add_parser("family", parents=[common], help="extremal eigenfunction families")
    s.add_argument("kind", choices=["simple", "hyperplane", "wigert"])
    s.add_argument("--r", type=_positive_float, required=True)
    s.add_argument("--dim", type=_int_at_least(2), default=2)
    s.add_argument("--index", type=_int_at_least(1), default=1, help="n for the simple family")
    s.add_argument("--K", type=_positive_float, default=1.0)
    s.add_argument("--m", type=_int_at_least(0), default=5, help="prime bound for the Wigert family")
    s.set_defaults(func=cmd_family)

    s = sub.add_parser("bounds", parents=[common], help="bound evaluators")
    s.add_argument("--dim", type=_int_at_least(2), required=True)
    s.add_argument("--norm", type=_int_at_least(0), required=True)
    s.add_argument("--r", type=_positive_float)
    s.add_argument("--c-arith", type=_positive_float, default=1.0)
    s.add_argument("--gamma-exp", type=_positive_float, default=1.0)
    s.add_argument("--D", type=_positive_float, default=1.0)
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("replay", help="rerun a manifest entry and compare digests")
    s.add_argument("manifest_path")
    s.add_argument("--index", type=int, default=-1, help="which manifest line (default: last)")
    s.set_defaults(func=None)
    return p


def _strip_manifest(argv):
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
        elif tok == "--manifest":
            skip = True
        elif not tok.startswith("--manifest="):
            out.append(tok)
    return out


def run(argv):
    """Parse and execute; returns ``(args, results, output_bytes)``."""
    args = build_parser().parse_args(argv)
    results, table, columns = args.func(args)
    if args.format == "csv":
        data = emit_report(table, "csv", columns)
    else:
        data = canonical_json(results)
    return args, results, data


def _replay(args):
    with open(args.manifest_path) as fh:
        lines = [ln for ln in fh if ln.strip()]
    if not lines:
        raise DomainError(f"no manifest entries in {args.manifest_path}")
    entry = RunManifest.from_json(json.loads(lines[args.index]))
    _, results, _ = run(list(entry.argv))
    got = digest(canonical_json(results))
    ok = got == entry.digest
    sys.stdout.write(canonical_json({"expected": entry.digest, "got": got, "match": ok}).decode())
    return EXIT_OK if ok else EXIT_MISMATCH


def _fail(code, kind, exc):
    reason = " ".join(str(exc).split())
    sys.stderr.write(f"torus-obs: error code={code} kind={kind} reason={reason}\n")
    return code


def dispatch(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        first = next((t for t in argv if not t.startswith("-")), None)
        if first == "replay":
            args = build_parser().parse_args(argv)
            return _replay(args)
        worker_count()
        manifest_path = build_parser().parse_args(argv).manifest
        args, results, data = run(_strip_manifest(argv))
        if args.out:
            with open(args.out, "wb") as fh:
                fh.write(data)
        else:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        if manifest_path:
            params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest", "out")}
            m = RunManifest(tuple(_strip_manifest(argv)), params, args.seed, __version__,
                            digest=digest(canonical_json(results)))
            with open(manifest_path, "a") as fh:
                fh.write(canonical_json(m).decode())
        return EXIT_OK
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    except ConvergenceError as exc:
        return _fail(EXIT_NONCONV, "convergence", exc)
    except DomainError as exc:
        return _fail(EXIT_DOMAIN, "domain", exc)
    except OSError as exc:
        return _fail(EXIT_DOMAIN, "io", exc)


def main():
    sys.exit(dispatch())
