"""Command-line interface: build, evaluate, and benchmark surrogates.

Exit codes: 0 success, 2 usage/configuration error, 3 numerical failure,
4 file-format error. ``STT_CACHE_DIR`` (optional) persists the evaluation
ledger between ``build`` runs with identical settings.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import bench
from . import quadrature as quad
from . import stt
from .cross import CrossConfig, EvalLedger
from .estimator import parallel_eval
from .exceptions import (
    ConfigurationError,
    DomainError,
    FormatError,
    InvalidInputError,
    NumericalFailureError,
    ResourceLimitError,
)

USAGE_ERROR, NUMERICAL_ERROR, FORMAT_ERROR = 2, 3, 4

BUILTIN_FUNCTIONS = (
    [f"genz-{fam}" for fam in bench.GENZ_FAMILIES]
    + ["bump", "fourier-f1", "fourier-f2"]
)


def _normalize_function_name(name):
    # accept both "genz-gaussian" and "gaussian-genz" spellings
    if name.endswith("-genz"):
        name = "genz-" + name[: -len("-genz")]
    if name not in BUILTIN_FUNCTIONS:
        raise ConfigurationError(
            f"unknown function {name!r}; choose from {', '.join(BUILTIN_FUNCTIONS)}")
    return name


def _resolve_function(cfg):
    """Builtin target function and its domains from a merged config dict."""
    name = _normalize_function_name(cfg["function"])
    d = int(cfg["dim"])
    seed = int(cfg["seed"])
    if name.startswith("genz-"):
        spec = bench.genz_sample(name[len("genz-"):], d,
                                 modified=bool(cfg.get("modified", True)), seed=seed)
        return bench.genz_make(spec), [(0.0, 1.0)] * d
    if name == "bump":
        x0 = cfg.get("x0", [0.2] * d)
        return bench.bump(d, x0, float(cfg.get("l", 0.05))), [(0.0, 1.0)] * d
    kind = name.split("-")[1]
    J = cfg.get("J", [0, 1])
    degrees = cfg.get("mode_degrees", 15)
    Sigma = cfg.get("Sigma")
    if kind == "f2" and Sigma is None:
        c = len(J)
        Sigma = np.eye(c) - 0.9 * (np.ones((c, c)) - np.eye(c))
    return bench.fourier_probe(kind, d, J, degrees, Sigma), [(-1.0, 1.0)] * d


def _cache_path(cfg):
    root = os.environ.get("STT_CACHE_DIR")
    if not root:
        return None
    key = json.dumps({k: cfg[k] for k in sorted(cfg)}, sort_keys=True, default=str)
    digest = hashlib.sha256(key.encode()).hexdigest()[:16]
    return os.path.join(root, f"ledger-{digest}.npz")


def _make_ledger(cfg):
    ledger = EvalLedger()
    path = _cache_path(cfg)
    if path and os.path.exists(path):
        data = np.load(path)
        for row, val in zip(data["keys"], data["values"]):
            ledger.cache[tuple(int(v) for v in row)] = float(val)
    return ledger, path


def _spill_ledger(ledger, path):
    if not path or not ledger.cache:
        return
    os.makedirs(os.path.dirname(path), exist_ok=True)
    keys = np.array(sorted(ledger.cache), dtype=np.int64)
    values = np.array([ledger.cache[tuple(k)] for k in keys])
    np.savez_compressed(path, keys=keys, values=values)


def _build_surrogate(f, domains, cfg, ledger=None):
    cross_cfg = CrossConfig(eps=float(cfg["eps"]), seed=int(cfg["seed"]))
    mode = cfg["mode"]
    degree = int(cfg["degree"])
    fp = parallel_eval(f, int(cfg.get("jobs", 1)))
    if mode == "projection":
        return stt.ftt_projection_construct(fp, domains, degree, cross_cfg, ledger=ledger)
    if mode == "lagrange":
        rules = [quad.gauss_rule(quad.LEGENDRE, degree + 1, dom) for dom in domains]
        return stt.ftt_interpolation_construct(
            fp, [r.nodes for r in rules], domains, cross_cfg, mode=stt.LAGRANGE,
            weights=[r.weights for r in rules], ledger=ledger)
    if mode == "linear":
        nodes = [np.linspace(a, b, degree + 1) for a, b in domains]
        return stt.ftt_interpolation_construct(fp, nodes, domains, cross_cfg,
                                               mode=stt.LINEAR, ledger=ledger)
    raise ConfigurationError(f"unknown mode {mode!r}")


def cmd_build(args):
    cfg = _merge_config(args, required=("function",))
    f, domains = _resolve_function(cfg)
    ledger, cache_path = _make_ledger(cfg)
    t0 = time.perf_counter()
    s = _build_surrogate(f, domains, cfg, ledger=ledger)
    seconds = time.perf_counter() - t0
    _spill_ledger(ledger, cache_path)
    if cfg.get("out"):
        stt.save_surrogate(s, cfg["out"])
    report = {
        "function": _normalize_function_name(cfg["function"]),
        "dim": int(cfg["dim"]),
        "degree": int(cfg["degree"]),
        "mode": cfg["mode"],
        "eps": float(cfg["eps"]),
        "seed": int(cfg["seed"]),
        "eval_count": s.metadata["eval_count"],
        "ranks": list(s.ranks),
        "seconds": round(seconds, 3),
        "out": cfg.get("out"),
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_eval(args):
    s = stt.load_surrogate(args.surrogate)
    rows, header = [], None
    with open(args.points, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                values = [float(v) for v in row]
            except ValueError:
                if lineno == 1 and header is None:
                    header = row
                    continue
                raise FormatError(f"malformed row at line {lineno} of {args.points}")
            if len(values) != s.ndim:
                raise FormatError(
                    f"line {lineno}: expected {s.ndim} coordinates, got {len(values)}")
            rows.append(values)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        if header is not None:
            writer.writerow(header + ["value"])
        if rows:
            pts = np.asarray(rows, dtype=float)
            vals = s(pts)
            for row, v in zip(rows, vals):
                writer.writerow([repr(x) for x in row] + [repr(float(v))])
    finally:
        if args.out:
            out.close()
    return 0


BENCH_COLUMNS = ("d", "degree_or_gridsize", "eps", "eval_count", "max_rank",
                 "rel_l2", "rel_l2_se", "seconds")


def _bench_rows_genz(cfg):
    family = cfg.get("family", "gaussian")
    dims = cfg.get("dims", [5, 10, 20])
    rows = []
    for d in dims:
        spec = bench.genz_sample(family, int(d), modified=bool(cfg.get("modified", True)),
                                 seed=int(cfg["seed"]))
        f = bench.genz_make(spec)
        run = dict(cfg, dim=int(d))
        t0 = time.perf_counter()
        s = _build_surrogate(f, [(0.0, 1.0)] * int(d), run)
        seconds = time.perf_counter() - t0
        err, se = bench.rel_l2_error(f, s, n_samples=int(cfg.get("samples", 10000)),
                                     seed=int(cfg["seed"]) + 1)
        rows.append((d, cfg["degree"], cfg["eps"], s.metadata["eval_count"],
                     s.max_rank, err, se, round(seconds, 3)))
    return rows


def _bench_rows_fourier(cfg):
    d = int(cfg.get("dim", 5))
    J_sets = cfg.get("J_sets", [[1, 2], [0, 4]])
    n = int(cfg.get("mode_degrees", 15))
    rows = []
    for J in J_sets:
        c = len(J)
        Sigma = np.asarray(cfg.get("Sigma", np.eye(c) - 0.9 * (np.ones((c, c)) - np.eye(c))))
        f = bench.fourier_probe("f2", d, J, n, Sigma)
        run = dict(cfg, dim=d)
        t0 = time.perf_counter()
        s = _build_surrogate(f, [(-1.0, 1.0)] * d, run)
        seconds = time.perf_counter() - t0
        err, se = bench.rel_l2_error(f, s, n_samples=int(cfg.get("samples", 10000)),
                                     seed=int(cfg["seed"]) + 1)
        rows.append((d, cfg["degree"], cfg["eps"], s.metadata["eval_count"],
                     s.max_rank, err, se, round(seconds, 3)))
    return rows


def _bench_rows_feature(cfg):
    dims = cfg.get("dims", [2, 3])
    grid = int(cfg.get("grid", 32))
    rows = []
    for d in dims:
        d = int(d)
        f = bench.bump(d, [0.2] * d, float(cfg.get("l", 0.05)))
        run = dict(cfg, dim=d, mode="linear", degree=grid - 1)
        t0 = time.perf_counter()
        s = _build_surrogate(f, [(0.0, 1.0)] * d, run)
        seconds = time.perf_counter() - t0
        err, se = bench.rel_l2_error(f, s, n_samples=int(cfg.get("samples", 10000)),
                                     seed=int(cfg["seed"]) + 1)
        rows.append((d, grid, cfg["eps"], s.metadata["eval_count"],
                     s.max_rank, err, se, round(seconds, 3)))
    return rows


def _bench_rows_pde(cfg):
    kl = bench.kl_build(float(cfg.get("sigma2", 0.1)), float(cfg.get("l", 0.25)),
                        grid=int(cfg.get("kl_grid", 32)))
    mesh = int(cfg.get("mesh", 64))
    degrees = cfg.get("degrees", [0, 1, 3])
    d = kl.d_kl

    def qoi(X):
        X = np.atleast_2d(X)
        return np.array([bench.poisson_qoi(x, kl, mesh=mesh) for x in X])

    rows = []
    for N in degrees:
        run = dict(cfg, dim=d, degree=int(N), mode="projection")
        cross_cfg = CrossConfig(eps=float(cfg["eps"]), seed=int(cfg["seed"]))
        fp = parallel_eval(qoi, int(cfg.get("jobs", 1)))
        t0 = time.perf_counter()
        s = stt.ftt_projection_construct(fp, [None] * d, int(N), cross_cfg,
                                         families=[quad.HERMITE] * d)
        seconds = time.perf_counter() - t0
        err, se = bench.rel_l2_error(qoi, s, n_samples=int(cfg.get("samples", 400)),
                                     seed=int(cfg["seed"]) + 1)
        rows.append((d, N, cfg["eps"], s.metadata["eval_count"],
                     s.max_rank, err, se, round(seconds, 3)))
    return rows


def cmd_bench(args):
    cfg = _merge_config(args)
    suites = {
        "genz": _bench_rows_genz,
        "fourier": _bench_rows_fourier,
        "feature": _bench_rows_feature,
        "pde": _bench_rows_pde,
    }
    rows = suites[args.suite](cfg)
    out = open(cfg["out"], "w", newline="") if cfg.get("out") else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(BENCH_COLUMNS)
        for row in rows:
            writer.writerow(row)
    finally:
        if cfg.get("out"):
            out.close()
    return 0


def _merge_config(args, required=()):
    """Flags layered over an optional JSON config file; flags win."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"config file is not valid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise FormatError("config file must hold a JSON object")
        cfg.update(loaded)
    defaults = {"dim": 2, "degree": 7, "eps": 1e-10, "seed": 0,
                "mode": "projection", "jobs": 1}
    for key, fallback in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
        cfg.setdefault(key, fallback)
    for key in ("function", "out", "family"):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
    for key in required:
        if key not in cfg:
            raise ConfigurationError(f"missing required setting {key!r}")
    return cfg


def make_parser():
    parser = argparse.ArgumentParser(
        prog="stt", description="Spectral tensor-train surrogate toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--dim", type=int, help="number of input dimensions")
        p.add_argument("--degree", type=int,
                       help="polynomial degree (grid size - 1 in interpolation modes)")
        p.add_argument("--eps", type=float, help="cross-approximation tolerance")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--mode", choices=["projection", "lagrange", "linear"])
        p.add_argument("--out", help="output file path")
        p.add_argument("--jobs", type=int, help="parallel evaluation threads")
        p.add_argument("--config", help="JSON config file (flags override)")

    p_build = sub.add_parser("build", help="build and save a surrogate")
    p_build.add_argument("--function", help="builtin target function name")
    common(p_build)
    p_build.set_defaults(func=cmd_build)

    p_eval = sub.add_parser("eval", help="evaluate a saved surrogate on CSV points")
    p_eval.add_argument("surrogate", help="surrogate file written by build")
    p_eval.add_argument("points", help="CSV of evaluation points, one per row")
    p_eval.add_argument("--out", help="output CSV path (default stdout)")
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("bench", help="run a benchmark suite, emit CSV")
    p_bench.add_argument("suite", choices=["genz", "fourier", "feature", "pde"])
    p_bench.add_argument("--family", choices=list(bench.GENZ_FAMILIES))
    common(p_bench)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else USAGE_ERROR
    try:
        return args.func(args)
    except (ConfigurationError, InvalidInputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FORMAT_ERROR
    except (NumericalFailureError, ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
