"""
Command-line front end writing CSV tables.

Subcommands: ``solve``, ``sweep-k``, ``timestep``, ``compare-rational``,
``bounds`` and ``oracle-check``. Settings come from flags or from a JSON file
given with ``--config``; flags win on conflict. The environment variable
``RK_DRE_SEED`` overrides the problem seed from either source.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""
import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .bounds import (ProblemScalars, exact_solution_bound, exp_error_bound, lyapunov_apriori,
                     max_solution_bound, refined_symmetric_bound, riccati_apriori)
from .core_linalg import spectral_norm
from .dre import solve_adaptive, solve_in_basis, solve_single
from .exceptions import (DimensionError, KrylovDREError, MatrixMarketError, ToleranceNotMetError)
from .krylov import rational_block_arnoldi
from .oracle import ORACLE_LIMIT, DenseDRE, dense_dre_solve, heat_lyapunov, rk_dre_solve
from .problems import ProblemSpec
from .stepping import StepPlan, integrate

SEED_ENV = "RK_DRE_SEED"

COLUMNS = {
    "solve": ["k_used", "basis_cols", "est", "rank", "norm_X", "timings"],
    "sweep-k": ["k", "error", "est", "bound_thm41", "bound_eq43", "bound_thm45", "elapsed"],
    "timestep": ["l", "k_used", "est_l", "rank", "eps_l", "budget_62", "budget_71", "error"],
    "compare-rational": ["basis_dim", "err_poly", "err_rational", "err_best_svd"],
    "bounds": ["k", "t", "exact_solution", "max_solution", "exp_error", "lyapunov_apriori",
               "refined_symmetric", "riccati_apriori"],
    "oracle-check": ["t", "norm_X", "err_dm_rk", "err_dm_closed", "passed"],
}

# keys a JSON config may hold, with defaults
DEFAULTS = {
    "problem": {"generator": "heat", "params": {}, "seed": 0, "files": {}},
    "t": 0.1, "h": None, "N": None, "k": None, "tol": None, "m": 10,
    "k_max": 30, "k_first": None, "eps_cut": None, "rank": None, "poles": [1.0],
    "oracle": False, "oracle_m": 20, "rk_steps": 2000, "output": None,
    "jobs": 1, "timings": True,
}


class UsageError(Exception):
    pass


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _param(text):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="krylov-dre", description="Krylov projection solver for differential Riccati equations")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("problem")
    g.add_argument("--config", help="JSON config file")
    g.add_argument("--generator", choices=["heat", "random_dense", "scalar", "cooling"])
    g.add_argument("--param", action="append", type=_param, metavar="KEY=VALUE",
                   help="generator parameter (JSON value), repeatable")
    g.add_argument("--file", action="append", type=_param, metavar="NAME=PATH",
                   help="Matrix Market file for the cooling generator (M, A, B, C)")
    g.add_argument("--seed", type=int)
    s = common.add_argument_group("solver")
    s.add_argument("--t", type=float, help="final time")
    s.add_argument("--m", type=int, help="Davison-Maki substeps")
    s.add_argument("--k-max", type=int, dest="k_max")
    s.add_argument("--oracle-m", type=int, dest="oracle_m")
    o = common.add_argument_group("output")
    o.add_argument("-o", "--output", help="CSV path (default stdout)")
    o.add_argument("--no-timings", dest="timings", action="store_const", const=False,
                   help="leave timing columns empty")
    o.add_argument("--jobs", type=int, help="worker threads for independent solves")

    def k_or_tol(p):
        x = p.add_mutually_exclusive_group()
        x.add_argument("--k", type=int, help="number of block Arnoldi steps")
        x.add_argument("--tol", type=float, help="a posteriori tolerance (adaptive k)")

    p = sub.add_parser("solve", parents=[common], help="single projection solve")
    k_or_tol(p)
    p.add_argument("--oracle", action="store_const", const=True, help="add an oracle error column")

    p = sub.add_parser("sweep-k", parents=[common], help="error, estimate and bounds for k = 1..k_max")
    p.add_argument("--oracle", action="store_const", const=True)

    p = sub.add_parser("timestep", parents=[common], help="multiple time steps with rank cuts")
    k_or_tol(p)
    p.add_argument("--h", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--k-first", type=int, dest="k_first")
    x = p.add_mutually_exclusive_group()
    x.add_argument("--eps-cut", type=float, dest="eps_cut")
    x.add_argument("--rank", type=int)
    p.add_argument("--oracle", action="store_const", const=True)

    p = sub.add_parser("compare-rational", parents=[common],
                       help="polynomial vs rational Krylov vs best low-rank error")
    p.add_argument("--poles", type=float, nargs="+")

    p = sub.add_parser("bounds", parents=[common], help="a priori bounds for k = 1..k_max")

    p = sub.add_parser("oracle-check", parents=[common], help="cross-check the dense oracles")
    p.add_argument("--rk-steps", type=int, dest="rk_steps")
    return parser


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as err:
        raise UsageError(f"cannot read config: {err}")
    except json.JSONDecodeError as err:
        raise UsageError(f"malformed config {path}: {err}")
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def resolve_config(args, environ=None):
    """Merge defaults, the JSON file, flags and ``RK_DRE_SEED`` (in that order)."""
    environ = os.environ if environ is None else environ
    cfg = json.loads(json.dumps(DEFAULTS))
    file_cfg = _load_config(args.config) if args.config else {}
    if file_cfg.get("k") is not None and file_cfg.get("tol") is not None:
        raise UsageError("config gives both k and tol; they are mutually exclusive")
    if file_cfg.get("eps_cut") is not None and file_cfg.get("rank") is not None:
        raise UsageError("config gives both eps_cut and rank; they are mutually exclusive")
    problem = dict(cfg["problem"])
    problem.update(file_cfg.pop("problem", {}) or {})
    cfg.update(file_cfg)

    flags = {k: v for k, v in vars(args).items()
             if v is not None and k in DEFAULTS and k != "problem"}
    # an explicit flag replaces its mutually exclusive partner from the file
    for a, b in (("k", "tol"), ("eps_cut", "rank")):
        if a in flags:
            cfg[b] = None
        if b in flags:
            cfg[a] = None
    cfg.update(flags)

    if args.generator:
        problem["generator"] = args.generator
    if args.param:
        problem["params"] = {**problem.get("params", {}), **dict(args.param)}
    if args.file:
        problem["files"] = {**problem.get("files", {}), **dict(args.file)}
    if args.seed is not None:
        problem["seed"] = args.seed
    if environ.get(SEED_ENV):
        try:
            problem["seed"] = int(environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {environ[SEED_ENV]!r}")
    try:
        cfg["problem"] = ProblemSpec.from_dict(problem)
    except (TypeError, ValueError) as err:
        raise UsageError(f"bad problem spec: {err}")
    cfg["command"] = args.command
    return cfg


def _build_problem(cfg):
    try:
        return cfg["problem"].build()
    except (TypeError, DimensionError, MatrixMarketError, OSError) as err:
        raise UsageError(f"cannot build problem: {err}")
    except ValueError as err:
        if isinstance(err, KrylovDREError):
            raise
        raise UsageError(f"cannot build problem: {err}")


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError(f"{cfg['command']} needs {', '.join('--' + k.replace('_', '-') for k in missing)}")


def _oracle_solution(p, t, cfg, X0=None):
    """Reference ``X(t)``: closed form for the heat Lyapunov problem, else dense Davison-Maki."""
    spec = cfg["problem"]
    if X0 is None and spec.generator == "heat" and not spec.params.get("r"):
        return heat_lyapunov(p.n, spec.params.get("scale", 1e2), p.Z, p.C, t)
    d = DenseDRE.from_problem(p)
    if X0 is not None:
        d = replace(d, X0=X0)
    return dense_dre_solve(d, t, cfg["oracle_m"])


def _check_oracle_size(p):
    if p.n > ORACLE_LIMIT:
        raise UsageError(f"oracle needs n <= {ORACLE_LIMIT}, problem has n = {p.n}")


def cmd_solve(cfg, p):
    t0 = time.perf_counter()
    if cfg["tol"] is not None:
        out = solve_adaptive(p, cfg["t"], cfg["tol"], cfg["m"], k_max=cfg["k_max"])
    else:
        out = solve_single(p, cfg["t"], cfg["k"] if cfg["k"] is not None else cfg["k_max"], cfg["m"])
    elapsed = time.perf_counter() - t0
    cols = list(COLUMNS["solve"])
    row = [out.k_used, out.basis_cols, out.est, out.state.rank, out.state.norm(),
           elapsed if cfg["timings"] else None]
    if cfg["oracle"]:
        _check_oracle_size(p)
        cols.append("error")
        row.append(spectral_norm(out.state.to_dense() - _oracle_solution(p, cfg["t"], cfg)))
    return cols, [row]


def _map(cfg, fn, items):
    if cfg["jobs"] and cfg["jobs"] > 1:
        with ThreadPoolExecutor(max_workers=cfg["jobs"]) as pool:
            return list(pool.map(fn, items))  # map preserves input order
    return [fn(x) for x in items]


def _bound_columns(p, k, t, s):
    lyap = p.lyapunov
    b41 = lyapunov_apriori(k, t, s) if lyap else None
    b43 = None
    if lyap and s.rho is not None and _is_symmetric(p):
        b43 = refined_symmetric_bound(k, t, s.rho, s.norm_X0, s.norm_Q)
    return b41, b43, riccati_apriori(k, t, s)


def _is_symmetric(p):
    if p.A.spectrum is not None:
        return True
    if p.n > ORACLE_LIMIT:
        return False
    A = p.A.to_dense()
    return np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max()))


def cmd_sweep_k(cfg, p):
    t = cfg["t"]
    X = None
    if cfg["oracle"]:
        _check_oracle_size(p)
        X = _oracle_solution(p, t, cfg)
    s = ProblemScalars.from_problem(p)

    def one(k):
        t0 = time.perf_counter()
        out = solve_single(p, t, k, cfg["m"])
        elapsed = time.perf_counter() - t0
        err = spectral_norm(out.state.to_dense() - X) if X is not None else None
        return [k, err, out.est, *_bound_columns(p, k, t, s), elapsed if cfg["timings"] else None]

    return COLUMNS["sweep-k"], _map(cfg, one, range(1, cfg["k_max"] + 1))


def cmd_timestep(cfg, p):
    _require(cfg, "h", "N")
    if cfg["eps_cut"] is None and cfg["rank"] is None:
        raise UsageError("timestep needs --eps-cut or --rank")
    try:
        plan = StepPlan(h=cfg["h"], N=cfg["N"], m=cfg["m"], eps_cut=cfg["eps_cut"],
                        rank=cfg["rank"], k=cfg["k"] if cfg["k"] is not None else 10,
                        tol_krylov=cfg["tol"], k_max=cfg["k_max"], k_first=cfg["k_first"])
    except ValueError as err:
        raise UsageError(str(err))
    traj, report = integrate(p, plan)
    errors = [None] * len(traj)
    if cfg["oracle"]:
        _check_oracle_size(p)
        X = p.Z @ p.Z.T
        for i, state in enumerate(traj):
            X = _oracle_solution(p, plan.h, cfg, X0=X)
            errors[i] = spectral_norm(state.to_dense() - X)
    rows = []
    for rec, err in zip(report.records, errors):
        rows.append([rec.step, rec.k_used, rec.est, rec.rank, rec.sigma_cut,
                     rec.budget_62, rec.budget_71, err])
    recs = report.records
    rows.append(["total", sum(r.k_used for r in recs), sum(r.est for r in recs), recs[-1].rank,
                 sum(r.sigma_cut for r in recs), report.budget_62, report.budget_71, errors[-1]])
    return COLUMNS["timestep"], rows


def cmd_compare_rational(cfg, p):
    _check_oracle_size(p)
    t = cfg["t"]
    X = _oracle_solution(p, t, cfg)
    lam = np.sort(np.abs(np.linalg.eigvalsh(X)))[::-1]

    def one(k):
        dr = rational_block_arnoldi(p.A, p.start_block, cfg["poles"], k)
        d = dr.basis_cols
        poly = solve_single(p, t, k, cfg["m"])
        if poly.basis_cols != d:
            raise KrylovDREError(f"basis dimensions differ at k = {k}: "
                                 f"{poly.basis_cols} vs {d} (deflation)")
        rat = solve_in_basis(p, dr, t, cfg["m"])
        return [d, spectral_norm(poly.state.to_dense() - X),
                spectral_norm(rat.state.to_dense() - X), lam[d] if d < lam.size else 0.0]

    return COLUMNS["compare-rational"], _map(cfg, one, range(1, cfg["k_max"] + 1))


def cmd_bounds(cfg, p):
    s = ProblemScalars.from_problem(p)
    t = cfg["t"]
    rows = []
    for k in range(1, cfg["k_max"] + 1):
        ref = None
        if p.lyapunov and s.rho is not None and _is_symmetric(p):
            ref = refined_symmetric_bound(k, t, s.rho, s.norm_X0, s.norm_Q)
        rows.append([k, t, exact_solution_bound(t, s), max_solution_bound(t, s),
                     exp_error_bound(k, t, s), lyapunov_apriori(k, t, s) if p.lyapunov else None,
                     ref, riccati_apriori(k, t, s)])
    return COLUMNS["bounds"], rows


def cmd_oracle_check(cfg, p):
    _check_oracle_size(p)
    t = cfg["t"]
    d = DenseDRE.from_problem(p)
    X = dense_dre_solve(d, t, cfg["oracle_m"])
    Xrk = rk_dre_solve(d, t, cfg["rk_steps"])
    err_rk = spectral_norm(X - Xrk)
    spec = cfg["problem"]
    err_cf = None
    if spec.generator == "heat" and not spec.params.get("r"):
        err_cf = spectral_norm(X - heat_lyapunov(p.n, spec.params.get("scale", 1e2), p.Z, p.C, t))
    passed = err_rk <= 1e-7 and (err_cf is None or err_cf <= 1e-7)
    return COLUMNS["oracle-check"], [[t, spectral_norm(X), err_rk, err_cf, passed]], passed


COMMANDS = {
    "solve": cmd_solve, "sweep-k": cmd_sweep_k, "timestep": cmd_timestep,
    "compare-rational": cmd_compare_rational, "bounds": cmd_bounds,
    "oracle-check": cmd_oracle_check,
}


def write_csv(fh, columns, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])


def run(argv=None, environ=None, stdout=None, stderr=None):
    """Entry point returning the exit code (see the module docstring)."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args, environ)
        p = _build_problem(cfg)
        result = COMMANDS[cfg["command"]](cfg, p)
    except UsageError as err:
        print(f"krylov-dre {args.command}: error: {err}", file=stderr)
        return 2
    except ToleranceNotMetError as err:
        print(f"krylov-dre {args.command}: tolerance not met: {err}", file=stderr)
        return 1
    except (KrylovDREError, ArithmeticError, np.linalg.LinAlgError) as err:
        print(f"krylov-dre {args.command}: numerical failure: {err}", file=stderr)
        return 1
    columns, rows, ok = (result + (True,))[:3]
    if cfg["output"]:
        with open(cfg["output"], "w", newline="") as fh:
            write_csv(fh, columns, rows)
    else:
        write_csv(stdout, columns, rows)
    return 0 if ok else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
