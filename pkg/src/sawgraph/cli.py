"""Command-line front end.

Every subcommand writes a table (CSV or JSON) whose header records the
package version, the effective configuration, the seed and the convention.
Errors are reported as a JSON object on stderr with a nonzero exit code.

Exit codes: 0 success, 1 a verification failed, 2 bad input or module
error, 3 partial output (budget exhausted).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import check_graph
from .exact import (EVAL_COLUMNS, census_to_csv, critical_scan, enumerate_census,
                    evaluate, intersection_prob_bruteforce, monotonicity_scan, pair_census,
                    verify_intersection_identity)
from .exceptions import BudgetExceeded, PreconditionViolated, SAWError
from .graph import girth, is_regular, is_vertex_transitive, regular_degree
from .io import format_edge_list, format_json_graph, format_table
from .meanfield import MEANFIELD_COLUMNS, evaluate_complete
from .nbrw import (MC_EVAL_COLUMNS, SURVIVAL_COLUMNS, estimate_measure_from_stats,
                   estimate_survival, estimate_survival_splitting, exact_T_distribution,
                   mixing_time)
from .predictions import (BOUND_COLUMNS, check_bound, critical_L_bounds, exact_paper_L,
                          subcritical_L_bounds)

EXIT_OK, EXIT_FAILED, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2, 3
IDENTITY_TOL = 1e-10


class CLIError(SAWError):
    pass


# ------------------------------------------------------------------ parsing


def parse_x_list(text: str) -> list:
    try:
        xs = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CLIError(f"bad x list {text!r}") from None
    if not xs:
        raise CLIError("empty x list")
    return xs


def parse_grid(text: str) -> list:
    """``lo,hi,steps[,linear|log]`` -> list of x values (endpoints included)."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (3, 4):
        raise CLIError(f"grid must be lo,hi,steps[,linear|log], got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CLIError(f"bad grid {text!r}") from None
    scale = parts[3] if len(parts) == 4 else "linear"
    if not lo < hi:
        raise CLIError("grid needs lo < hi")
    if steps < 1:
        raise CLIError("grid needs steps >= 1")
    if steps == 1:
        return [lo]
    if scale == "log":
        if lo <= 0:
            raise CLIError("log grid needs lo > 0")
        return np.geomspace(lo, hi, steps).tolist()
    if scale != "linear":
        raise CLIError(f"grid scale must be linear or log, got {scale!r}")
    return np.linspace(lo, hi, steps).tolist()


def _x_values(args, required=True):
    if getattr(args, "grid", None):
        return parse_grid(args.grid)
    if getattr(args, "x", None):
        x = args.x
        return parse_x_list(x) if isinstance(x, str) else [float(v) for v in x]
    if required:
        raise CLIError("give --x or --grid")
    return []


def _int_list(text, what):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise CLIError(f"bad {what} list {text!r}") from None


def resolve_seed(seed) -> int:
    """Seed 0 (or absent) draws 64 bits of OS entropy; the result is recorded."""
    seed = int(seed or 0)
    if seed == 0:
        seed = int(np.random.SeedSequence().entropy) & ((1 << 64) - 1) or 1
    if not 0 < seed < (1 << 64):
        raise CLIError("seed must fit in 64 bits")
    return seed


def load_config(path) -> dict:
    """Flat ``key = value`` TOML file; keys are flag names (dashes or underscores)."""
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise CLIError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise CLIError(f"bad config {path}: {exc}") from None
    out = {}
    for key, value in data.items():
        if isinstance(value, dict):
            raise CLIError(f"config must be flat; {key!r} is a table")
        out[key.replace("-", "_")] = value
    return out


def _common(p, seed=False, samples=False, convention=False, x=True):
    p.add_argument("--config", help="flat TOML file of flag values (flags win)")
    p.add_argument("--output", "-o", help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--budget", type=int, default=10**9, help="DFS node limit")
    p.add_argument("--workers", type=int, default=1)
    if x:
        p.add_argument("--x", help="comma-separated fugacities")
        p.add_argument("--grid", help="lo,hi,steps[,linear|log]")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="0 draws from OS entropy")
    if samples:
        p.add_argument("--samples", type=int, default=100_000)
    if convention:
        p.add_argument("--convention", choices=["exact", "paper"], default="exact",
                       help="weight of the empty walk: 1 (exact) or d/(d-1) (paper)")


def _graph_args(p):
    p.add_argument("--graph", "-g", required=False,
                   help="family spec (petersen, complete:6, torus:5,2, random-regular:n,d,seed) or file")
    p.add_argument("--root", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sawgraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a graph file")
    _graph_args(p)
    p.add_argument("--output", "-o", help="path; .json selects JSON, anything else edge list")
    p.add_argument("--config")
    p.add_argument("--format", choices=["edges", "json"], default=None)

    p = sub.add_parser("census", help="exact walk counts by length")
    _graph_args(p)
    _common(p, x=False)
    p.add_argument("--k-max", type=int, default=None)

    p = sub.add_parser("eval", help="Z, L, I, gamma from the exact census")
    _graph_args(p)
    _common(p)
    p.add_argument("--assume-transitive", action="store_true")

    p = sub.add_parser("pairs", help="I by brute-force pair enumeration")
    _graph_args(p)
    _common(p)

    p = sub.add_parser("nbrw", help="Monte-Carlo estimates from non-backtracking walks")
    _graph_args(p)
    _common(p, seed=True, samples=True, convention=True)
    p.add_argument("--assume-transitive", action="store_true")
    p.add_argument("--survival", action="store_true", help="emit the survival curve of T")
    p.add_argument("--method", choices=["direct", "splitting"], default="direct")
    p.add_argument("--replicates", type=int, default=8)

    p = sub.add_parser("mixing", help="mixing time of the non-backtracking walk")
    _graph_args(p)
    _common(p, x=False)
    p.add_argument("--horizon", type=int, default=200)

    p = sub.add_parser("scan", help="Z across graph sizes and x")
    _common(p, seed=True, samples=True)
    p.add_argument("--family", required=False, help="complete, cycle, hypercube, torus:<dim>, "
                   "random-regular:<d>,<seed>")
    p.add_argument("--sizes", required=False)
    p.add_argument("--levels", default="2,10,100")
    p.add_argument("--method", choices=["auto", "exact", "mc"], default="auto")

    p = sub.add_parser("meanfield", help="closed forms on the complete graph")
    _common(p)
    p.add_argument("--n", required=False, help="comma-separated sizes")
    p.add_argument("--scaled", action="store_true", help="read x as (n-1)x")
    p.add_argument("--check-enumeration", action="store_true",
                   help="compare with exact enumeration (n <= 10)")

    p = sub.add_parser("verify", help="identity, monotonicity and bound checks")
    _graph_args(p)
    _common(p)
    p.add_argument("--assume-transitive", action="store_true")
    return parser


def parse_args(argv=None):
    """Parse ``argv``; values from ``--config`` become defaults so flags win."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        config = load_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(config) - known
        if unknown:
            raise CLIError(f"unknown config keys: {', '.join(sorted(unknown))}")
        sub.set_defaults(**config)
        args = parser.parse_args(argv)
    return args


# ------------------------------------------------------------------ output


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items())
            if k not in ("output", "config", "format") and v is not None}


def _emit(args, columns, rows, meta=None, text=None):
    header = {"version": __version__, "command": args.command, "config": _config_echo(args)}
    for key in ("seed", "convention"):
        if getattr(args, key, None) is not None:
            header[key] = getattr(args, key)
    header.update(meta or {})
    if text is None:
        text = format_table(columns, rows, header, args.format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _graph(args):
    if not getattr(args, "graph", None):
        raise CLIError("--graph is required")
    g = check_graph(args.graph)
    if args.root is not None:
        g = g.with_root(args.root)
    return g


# ------------------------------------------------------------- subcommands


def cmd_gen(args):
    g = _graph(args)
    as_json = args.format == "json" or (args.format is None and args.output
                                         and args.output.lower().endswith(".json"))
    text = format_json_graph(g) if as_json else format_edge_list(g)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_census(args):
    g = _graph(args)
    try:
        census = enumerate_census(g, k_max=args.k_max, budget=args.budget, workers=args.workers)
        status = EXIT_OK
    except BudgetExceeded as exc:
        census, status = exc.partial, EXIT_PARTIAL
    rows = [{"k": k, "count": str(c)} for k, c in enumerate(census.counts)]
    meta = {"graph": census.graph_name, "root": census.root, "k_max": census.k_max,
            "valid": census.valid}
    if args.format == "csv":
        extra = {"version": __version__, "command": "census", "config": _config_echo(args)}
        _emit(args, None, None, text=census_to_csv(census, extra))
    else:
        _emit(args, ["k", "count"], rows, meta)
    return status


def _transitive(args, g):
    return bool(getattr(args, "assume_transitive", False)) or is_vertex_transitive(g) is True


def cmd_eval(args):
    g = _graph(args)
    xs = _x_values(args)
    census = enumerate_census(g, budget=args.budget, workers=args.workers)
    trans = _transitive(args, g)
    rows = [evaluate(census, x, transitive=trans).as_row() for x in xs]
    _emit(args, EVAL_COLUMNS, rows, {"graph": g.name, "root": g.root, "transitive": trans})
    return EXIT_OK


def cmd_pairs(args):
    g = _graph(args)
    xs = _x_values(args)
    census = enumerate_census(g, budget=args.budget, workers=args.workers)
    pairs = pair_census(g, budget=args.budget)
    rows = []
    for x in xs:
        I = intersection_prob_bruteforce(g, x, census=census, pairs=pairs)
        row = evaluate(census, x, I=I).as_row()
        rows.append(row)
    _emit(args, EVAL_COLUMNS, rows, {"graph": g.name, "root": g.root})
    return EXIT_OK


def _stats(args, g):
    if getattr(args, "method", "direct") == "splitting":
        return estimate_survival_splitting(g, max(2, args.samples // args.replicates), args.seed,
                                           replicates=args.replicates)
    return estimate_survival(g, args.samples, args.seed, workers=args.workers)


def cmd_nbrw(args):
    g = _graph(args)
    if args.samples < 1:
        raise CLIError("--samples must be >= 1")
    args.seed = resolve_seed(args.seed)
    stats = _stats(args, g)
    meta = {"graph": g.name, "root": g.root, "degree": stats.degree, "girth": stats.girth,
            "estimator": stats.method}
    if args.survival:
        _emit(args, SURVIVAL_COLUMNS, stats.rows(), meta)
        return EXIT_OK
    xs = _x_values(args)
    rows = [estimate_measure_from_stats(stats, x, args.convention, args.assume_transitive).as_row()
            for x in xs]
    _emit(args, MC_EVAL_COLUMNS, rows, meta)
    return EXIT_OK


def cmd_mixing(args):
    g = _graph(args)
    report = mixing_time(g, args.horizon)
    tau = "exceeds-horizon" if report.tau is None else report.tau
    _emit(args, ["t", "max_dev"], report.rows(),
          {"graph": g.name, "horizon": args.horizon, "threshold": 1.0 / (2 * g.n), "tau": tau})
    return EXIT_OK


def cmd_scan(args):
    if not args.family or not args.sizes:
        raise CLIError("--family and --sizes are required")
    args.seed = resolve_seed(args.seed)
    sizes = _int_list(args.sizes, "size")
    levels = [float(v) for v in str(args.levels).split(",")]
    table = critical_scan(args.family, sizes, _x_values(args), levels=levels, method=args.method,
                          budget=args.budget, n_samples=args.samples, seed=args.seed)
    crossings = {str(lvl): {str(s): v for s, v in d.items()} for lvl, d in table.crossings.items()}
    _emit(args, list(table.COLUMNS), table.rows, {"crossings": crossings})
    return EXIT_OK


def cmd_meanfield(args):
    if not args.n:
        raise CLIError("--n is required")
    sizes = _int_list(args.n, "n")
    xs = _x_values(args)
    rows = []
    failed = False
    for n in sizes:
        for x in xs:
            xv = x / (n - 1) if args.scaled else x
            ev = evaluate_complete(n, xv)
            row = ev.as_row()
            if args.check_enumeration:
                if n > 10:
                    raise CLIError("--check-enumeration supports n <= 10")
                from .graph import complete

                ex = evaluate(enumerate_census(complete(n)), xv)
                rel_z = abs(ex.log_Z - ev.log_Z) / max(abs(ex.log_Z), 1e-300)
                rel_l = abs(ex.L - ev.L) / max(abs(ex.L), 1e-300)
                row["enum_L"], row["enum_Z_log"] = ex.L, ex.log_Z
                row["match"] = rel_z <= 1e-10 and rel_l <= 1e-10
                failed |= not row["match"]
            rows.append(row)
    columns = MEANFIELD_COLUMNS + (["enum_L", "enum_Z_log", "match"] if args.check_enumeration else [])
    _emit(args, columns, rows)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_verify(args):
    """Identity residuals (transitive graphs), monotonicity of L and, on
    regular graphs, the large-girth brackets for L."""
    g = _graph(args)
    xs = sorted(_x_values(args))
    reports = []
    trans = _transitive(args, g)
    census = enumerate_census(g, budget=args.budget, workers=args.workers)
    if trans:
        for chk in verify_intersection_identity(g, xs, assume_transitive=True, budget=args.budget):
            reports.append(check_bound(f"identity_residual@x={chk.x!r}", chk.residual, None,
                                       (0.0, IDENTITY_TOL), "intersection identity"))
    grid = np.geomspace(min(xs) / 10, max(xs) * 10, 200).tolist()
    ok, bad = monotonicity_scan(census, grid)
    reports.append(check_bound("L_monotone_violations", 0.0 if ok else 1.0, None, (0.0, 0.0),
                               "L non-decreasing"))
    if is_regular(g) and regular_degree(g) >= 3:
        d, g0 = regular_degree(g), girth(g)
        for x in xs:
            y = (d - 1) * x
            if y < 1:
                lo, hi = subcritical_L_bounds(x, d, g0)
                L = exact_paper_L(census, d, x)
                reports.append(check_bound(f"L_paper@x={x!r}", L, None, (lo, hi),
                                           "sub-critical large-girth sandwich"))
            elif math.isclose(y, 1.0, rel_tol=1e-12):
                br = critical_L_bounds(exact_T_distribution(g), d, g0)
                L = exact_paper_L(census, d, x)
                reports.append(check_bound(f"L_paper@x={x!r}", L, None, (br.lo, br.hi),
                                           "critical plug-in bracket"))
    failed = any(r.holds is False for r in reports)
    _emit(args, BOUND_COLUMNS, [r.as_row() for r in reports],
          {"graph": g.name, "transitive": trans})
    return EXIT_FAILED if failed else EXIT_OK


COMMANDS = {"gen": cmd_gen, "census": cmd_census, "eval": cmd_eval, "pairs": cmd_pairs,
            "nbrw": cmd_nbrw, "mixing": cmd_mixing, "scan": cmd_scan,
            "meanfield": cmd_meanfield, "verify": cmd_verify}


def _error(exc, code):
    obj = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    partial = getattr(exc, "partial", None)
    if partial is not None:
        obj["partial"] = True
    sys.stderr.write(json.dumps(obj) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except (SAWError, PreconditionViolated, ValueError, OSError) as exc:
        return _error(exc, EXIT_ERROR)


if __name__ == "__main__":
    sys.exit(main())
