"""Command-line front end: ising-corner <command> [options].

Exit codes: 0 success, 1 verify tolerance failure, 2 usage error,
3 resource-guard violation.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
import io
import itertools
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import exact_finite as ef
from . import free_energy as fe
from . import relations as rel
from . import spinor as sp
from .params import RegimeError, isotropic_params, make_couplings, params_from_couplings, params_from_kv
from .verify import SUITES, TOLERANCES, run_suite

SCHEMA_VERSION = 1
COLUMNS = ("fb", "fs", "fsp", "fc")
FE_METHODS = ("series", "product", "integral", "integral_theta", "integral_elliptic", "mccoy_wu")
EXACT_METHODS = ("enumeration", "transfer", "spinor")


class UsageError(Exception):
    pass


# JSON with 17 significant digits

def _fmt_float(x):
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps17(obj, indent=2, _level=0):
    """json.dumps where every float is written with 17 significant digits."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return json.dumps(obj if obj is None or isinstance(obj, str) else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps17(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [inner + dumps17(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v):
    if isinstance(v, float):
        return _fmt_float(v) if math.isfinite(v) else ""
    if v is None:
        return ""
    return str(v)


def _header(rows):
    cols = []
    for r in rows:
        cols.extend(c for c in r if c not in cols)
    return cols


def render(payload, fmt):
    rows = payload["results"]
    if fmt == "json":
        return dumps17(payload) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        cols = _header(rows)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in cols])
        return buf.getvalue()
    lines = []
    if rows:
        cols = _header(rows)
        cells = [[_short(r.get(c)) for c in cols] for r in rows]
        width = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
        lines.append("  ".join(c.ljust(width[i]) for i, c in enumerate(cols)))
        lines.extend("  ".join(row[i].ljust(width[i]) for i in range(len(cols))) for row in cells)
    for ch in payload["checks"]:
        mark = "PASS" if ch["passed"] else "FAIL"
        crit = f"[{ch['criterion']}] " if ch.get("criterion") else ""
        lines.append(f"{mark} {crit}{ch['name']}: {_short(ch['value'])} (tol {_short(ch['tol'])}) {ch.get('kind', '')}".rstrip())
    return "\n".join(lines) + "\n"


def _short(v):
    if isinstance(v, float):
        return format(v, ".12g")
    return "" if v is None else str(v)


# argument handling

def _float_list(s):
    try:
        return [float(x) for x in str(s).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")


def _int_list(s):
    try:
        return [int(x) for x in str(s).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


def _name_list(s):
    return [x.strip() for x in str(s).split(",") if x.strip()]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="ising-corner", description="Exact finite-lattice and closed-form Ising free energies.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp_, params=True):
        if params:
            sp_.add_argument("--H", type=float, help="vertical coupling")
            sp_.add_argument("--Hp", type=float, help="horizontal coupling")
            sp_.add_argument("--k", type=_float_list, help="elliptic modulus (list allowed in sweep)")
            sp_.add_argument("--v-imag", type=_float_list, help="Im v (list allowed in sweep)")
            sp_.add_argument("--isotropic", action="store_true", help="use v = -iK'/2")
        sp_.add_argument("--format", choices=("json", "csv", "table"), default="table")
        sp_.add_argument("--out", help="write output here instead of stdout")
        sp_.add_argument("--tol", action="append", default=[], metavar="NAME=VAL", help="tolerance override")
        sp_.add_argument("--config", help="flat key = value file; flags override it")

    s = sub.add_parser("free-energies", help="closed-form free energies")
    common(s)
    s.add_argument("--method", type=_name_list, default=["series"])
    s = sub.add_parser("exact", help="exact log Z of finite lattices")
    common(s)
    s.add_argument("--M", type=_int_list, required=False)
    s.add_argument("--N", type=_int_list, required=False)
    s.add_argument("--method", type=_name_list, default=["transfer"])
    s = sub.add_parser("verify", help="run a verification suite")
    common(s, params=False)
    s.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    s = sub.add_parser("sweep", help="free energies over a parameter grid")
    common(s)
    s.add_argument("--method", type=_name_list, default=["series"])
    s = sub.add_parser("critical", help="fit the singular behaviour near k = 1")
    common(s, params=False)
    s.add_argument("--which", type=_name_list, default=list(COLUMNS))
    s.add_argument("--w-exponent", type=float, default=0.25, help="w = q^e held fixed")
    s.add_argument("--k-min", type=float, default=0.99)
    s.add_argument("--k-max", type=float, default=0.9999)
    s.add_argument("--points", type=int, default=24)
    return p


def read_config(path):
    """Flat key = value lines; '#' starts a comment."""
    out = []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            key, val = (x.strip() for x in line.split("=", 1))
            opt = "--" + key.replace("_", "-")
            if val.lower() in ("true", "yes", "on"):
                out.append(opt)
            elif val.lower() in ("false", "no", "off"):
                continue
            else:
                out.extend([opt, val])
    return out


def _merge_config(argv):
    """Insert config-file options right after the command so later flags win."""
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return argv
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    ns, _ = pre.parse_known_args(argv)
    return argv[:1] + read_config(ns.config) + argv[1:]


def parse_tolerances(items):
    tols = dict(TOLERANCES)
    for item in items:
        if "=" not in item:
            raise UsageError(f"--tol expects NAME=VAL, got {item!r}")
        name, val = item.split("=", 1)
        if name not in TOLERANCES:
            raise UsageError(f"unknown tolerance {name!r}; known: {', '.join(TOLERANCES)}")
        try:
            tols[name] = float(val)
        except ValueError:
            raise UsageError(f"tolerance {name} needs a number, got {val!r}")
    return tols


def _scalar(lst, name):
    if lst is None:
        return None
    if len(lst) != 1:
        raise UsageError(f"--{name} takes a single value for this command")
    return lst[0]


def param_points(args, allow_lists=False, couplings_only=False):
    """Resolve exactly one parameter source into a list of ParamSet.

    With couplings_only the result is a list of CouplingParams and the
    ordered-regime check is skipped for (H, H'), since finite lattices
    are defined at any positive couplings.
    """
    sources = []
    if args.H is not None or args.Hp is not None:
        sources.append("couplings")
    if args.k is not None and args.isotropic:
        sources.append("isotropic")
    if args.k is not None and args.v_imag is not None:
        sources.append("kv")
    if len(sources) != 1 or (args.isotropic and args.v_imag is not None):
        raise UsageError("give exactly one parameter source: --H/--Hp, --k with --v-imag, or --k with --isotropic")
    src = sources[0]
    try:
        if src == "couplings":
            if args.H is None or args.Hp is None or args.k is not None or args.isotropic:
                raise UsageError("--H and --Hp must be given together and alone")
            if couplings_only:
                return [make_couplings(args.H, args.Hp)]
            return [params_from_couplings(args.H, args.Hp)]
        ks = args.k if allow_lists else [_scalar(args.k, "k")]
        if src == "isotropic":
            pts = [isotropic_params(k) for k in ks]
            return [ps.couplings for ps in pts] if couplings_only else pts
        vs = args.v_imag if allow_lists else [_scalar(args.v_imag, "v-imag")]
        pts = [params_from_kv(k, v) for k, v in itertools.product(ks, vs)]
        return [ps.couplings for ps in pts] if couplings_only else pts
    except (RegimeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(str(exc))


def _point_info(ps):
    return {"H": ps.couplings.H, "Hp": ps.couplings.H_prime, "k": ps.k, "v_imag": ps.v_imag,
            "w": ps.w, "q": ps.q}


def free_energy_rows(ps, methods):
    rows = []
    for m in methods:
        if m == "mccoy_wu":
            for route, v in fe.mccoy_wu_fs(ps).items():
                rows.append({"method": f"mccoy_wu_{route}", "fb": None, "fs": v, "fsp": None, "fc": None})
            continue
        if m == "integral":
            rows.extend(free_energy_rows(ps, ["integral_theta", "integral_elliptic"]))
            continue
        fn = {"series": fe.free_energies_series, "product": fe.free_energies_product,
              "integral_theta": fe.free_energies_integral_theta,
              "integral_elliptic": fe.free_energies_integral_elliptic}[m]
        r = fn(ps)
        rows.append({"method": m, "fb": r.fb, "fs": r.fs, "fsp": r.fsp, "fc": r.fc})
    return rows


def max_deviation(rows, cols=COLUMNS):
    dev = 0.0
    for a, b in itertools.combinations(rows, 2):
        for c in cols:
            if a.get(c) is not None and b.get(c) is not None:
                dev = max(dev, abs(a[c] - b[c]))
    return dev


def _check_methods(methods, allowed):
    bad = [m for m in methods if m not in allowed]
    if bad:
        raise UsageError(f"unknown method(s) {', '.join(bad)}; choose from {', '.join(allowed)}")


def cmd_free_energies(args, tols):
    _check_methods(args.method, FE_METHODS)
    (ps,) = param_points(args)
    rows = [dict(_point_info(ps), **r) for r in free_energy_rows(ps, args.method)]
    checks = []
    if len(rows) > 1:
        dev = max_deviation(rows)
        checks.append({"name": "cross_method_max_deviation", "criterion": 3, "value": dev,
                       "tol": tols["four_way"], "passed": dev <= tols["four_way"], "kind": "info"})
    return rows, checks, 0


def cmd_exact(args, tols):
    _check_methods(args.method, EXACT_METHODS)
    if not args.M or not args.N:
        raise UsageError("exact needs --M and --N")
    (c,) = param_points(args, couplings_only=True)
    rows, checks = [], []
    for M, N in itertools.product(args.M, args.N):
        spec = ef.LatticeSpec(M, N)
        group = []
        for m in args.method:
            fn = {"enumeration": ef.log_z_enumeration, "transfer": ef.log_z_transfer,
                  "spinor": sp.log_z_spinor}[m]
            r = fn(spec, c)
            group.append({"M": M, "N": N, "method": m, "log_z": r.log_z, "err_estimate": r.err_estimate})
        rows.extend(group)
        if len(group) > 1:
            dev = max(abs(a["log_z"] - b["log_z"]) for a, b in itertools.combinations(group, 2))
            checks.append({"name": f"exact_agreement_M{M}_N{N}", "criterion": 1, "value": dev,
                           "tol": tols["spinor_vs_enum"], "passed": dev <= tols["spinor_vs_enum"],
                           "kind": "info"})
    return rows, checks, 0


def cmd_verify(args, tols):
    checks = [c.as_dict() for c in run_suite(args.suite, tols)]
    failed = any(not c["passed"] for c in checks if c["kind"] == "criterion")
    return [], checks, 1 if failed else 0


def _sweep_point(job):
    ps, methods = job
    rows = free_energy_rows(ps, methods)
    return [dict(_point_info(ps), **r) for r in rows]


def worker_count(n_jobs):
    env = os.environ.get("ISING_CORNER_THREADS")
    try:
        cap = int(env) if env else (os.cpu_count() or 1)
    except ValueError:
        raise UsageError(f"ISING_CORNER_THREADS must be an integer, got {env!r}")
    return max(1, min(cap, n_jobs))


def sweep_rows(points, methods):
    """Yield rows in grid order whatever the worker scheduling."""
    jobs = [(ps, methods) for ps in points]
    n = worker_count(len(jobs))
    if n == 1:
        for j in jobs:
            yield from _sweep_point(j)
        return
    with ProcessPoolExecutor(max_workers=n) as pool:
        for rows in pool.map(_sweep_point, jobs):
            yield from rows


def cmd_sweep(args, tols):
    _check_methods(args.method, FE_METHODS)
    points = param_points(args, allow_lists=True)
    return sweep_rows(points, args.method), [], 0


def cmd_critical(args, tols):
    bad = [w for w in args.which if w not in COLUMNS]
    if bad:
        raise UsageError(f"--which takes a subset of {', '.join(COLUMNS)}")
    if not 0.9 < args.k_min < args.k_max < 0.99999 or args.points < 8:
        raise UsageError("need 0.9 < k-min < k-max < 0.99999 and at least 8 points")
    grid = 1 - np.geomspace(1 - args.k_min, 1 - args.k_max, args.points)
    rows, checks = [], []
    for w in args.which:
        try:
            f = rel.critical_scan(grid, which=w, w_exponent=args.w_exponent)
        except ValueError as exc:
            raise UsageError(str(exc))
        ratio = f.singular_coefficient / f.expected_coefficient - 1 if f.expected_coefficient else float("nan")
        rows.append({"which": w, "w_exponent": args.w_exponent, "alpha": f.alpha, "alpha_hat": f.alpha_hat,
                     "singular_coefficient": f.singular_coefficient,
                     "expected_coefficient": f.expected_coefficient, "relative_error": ratio,
                     "residual": f.residual})
        if math.isfinite(ratio):
            checks.append({"name": f"critical_amplitude_{w}", "criterion": 14, "value": abs(ratio),
                           "tol": tols["critical_rel"], "passed": abs(ratio) <= tols["critical_rel"],
                           "kind": "info"})
    return rows, checks, 0


COMMANDS = {"free-energies": cmd_free_energies, "exact": cmd_exact, "verify": cmd_verify,
            "sweep": cmd_sweep, "critical": cmd_critical}


def _config_echo(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "config") and v is not None}


def _emit(text, out):
    if out:
        with open(out, "a") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def run(argv):
    """Parse argv, run the command, write output; return the exit status."""
    try:
        argv = _merge_config(list(argv))
        args = build_parser().parse_args(argv)
        tols = parse_tolerances(args.tol)
        rows, checks, status = COMMANDS[args.command](args, tols)
        if args.out:
            open(args.out, "w").close()
        if args.command == "sweep" and args.format == "csv":
            # stream rows as they arrive
            cols = None
            for r in rows:
                if cols is None:
                    cols = list(r)
                    _emit(",".join(cols) + "\n", args.out)
                _emit(",".join(_cell(r.get(c)) for c in cols) + "\n", args.out)
            return status
        payload = {"version": SCHEMA_VERSION, "config": _config_echo(args), "results": list(rows), "checks": checks}
        _emit(render(payload, args.format), args.out)
        return status
    except UsageError as exc:
        print(f"ising-corner: error: {exc}", file=sys.stderr)
        return 2
    except ef.ResourceGuardError as exc:
        print(f"ising-corner: resource guard: {exc}", file=sys.stderr)
        return 3
    except (RegimeError, fe.AnnulusError) as exc:
        print(f"ising-corner: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ising-corner: error: {exc}", file=sys.stderr)
        return 2


def main(argv=None):
    sys.exit(run(sys.argv[1:] if argv is None else argv))
