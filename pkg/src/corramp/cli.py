"""Command-line entry point: ``corramp <subcommand> ...``.

Exit codes: 0 success / found, 1 nothing found, 2 parameter or format error.
Reports are JSON with sorted keys; only the ``timings`` member varies between
identical runs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bounds, kernels
from .amplifier import (
    AmplifierParams,
    amplify_coord,
    amplify_many,
    complete_schedule,
    derive_schedule,
    CoordStats,
)
from .detector import MODES, DetectorConstants, derive_params, detect_outliers
from .errors import CapacityError, ConvergenceError, FormatError, ParameterError
from .problems import gen_lightbulb, gen_parity, solve_lightbulb, solve_parity
from .rng import SplitMix64
from .rotgraph import parse_graph, second_eigenvalue, square, tensor, zigzag
from .vecio import read_vectors, write_vectors

EXIT_FOUND, EXIT_NOT_FOUND, EXIT_PARAM = 0, 1, 2


# -- shared plumbing ---------------------------------------------------------


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out") and v is not None}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, int) and obj.bit_length() > 53:
        return str(obj)
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


def emit(report: dict, out: str | None) -> None:
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _consts(args) -> DetectorConstants:
    return DetectorConstants(args.eps, args.tau_max, args.delta, args.C, args.alpha)


def _add_consts(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("algorithm constants (explicit mode)")
    g.add_argument("--eps", type=float, default=0.5)
    g.add_argument("--tau-max", type=float, default=0.9)
    g.add_argument("--delta", type=float, default=0.1)
    g.add_argument("--C", type=float, default=61.0)
    g.add_argument("--alpha", type=float, default=1.0)


def _add_common(p: argparse.ArgumentParser, mode: bool = True) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    if mode:
        p.add_argument("--mode", choices=MODES, default="toy")
        p.add_argument("--backend", choices=("blocked", "naive"), default="blocked")


# -- params ------------------------------------------------------------------


def _line(name: str, value, source: str) -> str:
    return f"{name:<22} = {value!s:<28} [{source}]"


def cmd_params(args) -> int:
    if args.what == "detect":
        return _params_detect(args)
    if args.what == "amplify":
        return _params_amplify(args)
    return _params_bounds(args)


def _params_detect(args) -> int:
    params = derive_params(args.n, args.d, args.rho, args.tau, _consts(args), strict=False)
    lines = [
        _line("sigma", params.sigma, "0.99 eps (alpha - delta) / (4C + 1)"),
        _line("s", params.s, "floor(n^sigma)"),
        _line("log2 gamma", params.log2_gamma, "-eps log2(tau_max) / 1e5"),
        _line("gamma", params.gamma, "2^(log2 gamma)"),
        _line("c1", params.c1, "tau_max^(-eps / 1e5)"),
        _line("c2", params.c2, "(1 - 0.99 eps/(4C+1)) (alpha - delta) / C"),
        _line("p", params.p or "undefined", "power of 2 in (L/2, L], L = ((1-sigma)alpha-delta) log n / (C log(gamma/tau))"),
        _line("D", params.D or "undefined", "2^floor(log d + C p log(gamma/tau))"),
        _line("threshold", params.threshold if params.p else "undefined", "n^(2 sigma) (tau gamma)^p D, rounded down"),
    ]
    for key, val in sorted(params.checks.items()):
        lines.append(_line(key, val, "check"))
    for v in params.violations:
        lines.append(f"VIOLATED: {v}")
    print("\n".join(lines), file=sys.stderr if args.json else sys.stdout)
    if args.json or args.out:
        emit({"command": "params detect", "args": _echo(args), "params": params.ledger()}, args.out)
    return EXIT_PARAM if params.violations else 0


def _params_amplify(args) -> int:
    sched = derive_schedule(AmplifierParams(args.d, args.tau, args.gamma, args.ell, K=args.K))
    led = sched.ledger()
    lines = [
        _line("gamma0", led["gamma0"], "sqrt(gamma)"),
        _line("tau0", led["tau0"], "tau / gamma"),
        _line("k", sched.k, "least k with 2^k >= 2 d gamma / tau / (1 - gamma^-1/2)"),
    ]
    for lv in led["levels"]:
        i = lv["i"] + 1
        src = "tau0" if i == 1 else "tau_{i-1}^2 / gamma0"
        lines.append(_line(f"tau_{i}", lv["tau_i"], src))
        lines.append(_line(f"b_{i}", lv["b_i"], "max(b_min, ceil(log2((32/((1-1/gamma0) tau_i^2))^4)/4))"))
        lines.append(_line(f"t_{i}", lv["t_i"], "max(1, ceil(log2 d_i / (16 b_i)))"))
        lines.append(_line(f"D_{i}", lv["D_i"], "expander vertex count"))
    lines.append(_line("K", sched.K, "least K with 2^K >= d (2^10/(1-gamma^-1/2))^(20l+1) (gamma/tau)^(60 2^l)"))
    lines.append(_line("output dimension", f"2^{sched.K}", "2^K"))
    q = bounds.DimQuery(args.d, args.tau, args.gamma, ell=args.ell)
    lines.append(_line("existence dim", bounds.existence_dim(q), "ceil(3d (gamma^p-1)^-2 (gamma/tau)^(2p))"))
    lb = bounds.lower_dim(q)
    lines.append(_line("lower bound", lb.value if lb.applicable else f"n/a ({lb.violated})", "ceil((gamma tau)^-p / 5)"))
    print("\n".join(lines), file=sys.stderr if args.json else sys.stdout)
    if args.json or args.out:
        emit({"command": "params amplify", "args": _echo(args), "params": led}, args.out)
    return 0


def _params_bounds(args) -> int:
    q = bounds.DimQuery(args.d, args.tau, args.gamma, p=args.p, ell=args.ell)
    p = q.strength
    res = {"p": p, "existence": bounds.existence_dim(q)}
    if p >= 2 and p & (p - 1) == 0:
        ell = p.bit_length() - 1
        ex = bounds.explicit_dim(bounds.DimQuery(args.d, args.tau, args.gamma, ell=ell))
        res["explicit_K"] = ex.K
        res["explicit_sharp_log2"] = ex.log2_sharp
    lb = bounds.lower_dim(q)
    res["lower"] = lb.value if lb.applicable else None
    res["lower_violated"] = lb.violated
    res["lower_p_cap"] = lb.p_cap
    lines = [
        _line("existence dim", res["existence"], "ceil(3d (gamma^p-1)^-2 (gamma/tau)^(2p))"),
        _line("explicit K", res.get("explicit_K", "n/a (p not 2^l, l >= 1)"), "least K meeting the explicit requirement"),
        _line("lower bound", res["lower"] if lb.applicable else f"n/a ({lb.violated})", "ceil((gamma tau)^-p / 5)"),
    ]
    print("\n".join(lines), file=sys.stderr if args.json else sys.stdout)
    if args.json or args.out:
        emit({"command": "params bounds", "args": _echo(args), "params": res}, args.out)
    return 0


# -- gen ---------------------------------------------------------------------


def cmd_gen(args) -> int:
    report = {"command": f"gen {args.what}", "args": _echo(args)}
    if args.what == "uniform":
        V = SplitMix64(args.seed).sign_rows(args.n, args.d)
    elif args.what == "lightbulb":
        inst = gen_lightbulb(args.n, args.d, args.rho, args.seed)
        V = inst.vectors
        report["results"] = {"planted": list(inst.planted)}
    else:
        V = read_vectors(args.input)
    write_vectors(args.vectors, V, binary=args.binary)
    report["results"] = {**report.get("results", {}), "n": V.shape[0], "d": V.shape[1]}
    emit(report, args.out)
    return 0


# -- detect / problems -------------------------------------------------------


def cmd_detect(args) -> int:
    X = read_vectors(args.x)
    Y = read_vectors(args.y) if args.y else X
    rep = detect_outliers(
        X, Y, args.rho, args.tau, consts=_consts(args), amplifier_mode=args.mode,
        s=args.s, seed=args.seed, backend=args.backend, threads=args.threads,
    )
    outliers = rep.outliers
    if not args.y:
        # single collection: drop self-pairs and report each unordered pair once
        outliers = [(i, j, ip) for i, j, ip in outliers if i < j]
    body = rep.to_dict()
    body["outliers"] = [list(t) for t in outliers]
    emit(
        {
            "command": "detect",
            "args": _echo(args),
            "params": body.pop("params"),
            "counters": body.pop("counters"),
            "results": body,
            "timings": rep.timings,
        },
        args.out,
    )
    return EXIT_FOUND if outliers else EXIT_NOT_FOUND


def cmd_lightbulb(args) -> int:
    t0 = time.perf_counter()
    if args.input:
        from .problems import LightBulbInstance

        V = read_vectors(args.input)
        inst = LightBulbInstance(V, bounds.to_fraction(args.rho), (-1, -1), args.seed)
    else:
        inst = gen_lightbulb(args.n, args.d, args.rho, args.seed)
    res = solve_lightbulb(
        inst, kappa=args.kappa, consts=_consts(args), amplifier_mode=args.mode,
        rho_max=args.rho_max, threads=args.threads, backend=args.backend,
    )
    results = {
        "pair": list(res.found) if res.found else None,
        "inner_product": res.value,
        "candidates": [[list(p), ip] for p, ip in res.candidates],
        "notes": res.notes,
    }
    if not args.input:
        results["planted"] = list(inst.planted)
        results["correct"] = res.found == inst.planted
    counters = {
        "rounds": len(res.reports),
        "tiles_scanned": sum(r.counters["tiles_scanned"] for r in res.reports),
        "pairs_scanned": sum(r.counters["pairs_scanned"] for r in res.reports),
        "backend": kernels.BACKEND,
    }
    params = res.reports[0].params.ledger() if res.reports else {}
    emit(
        {"command": "lightbulb", "args": _echo(args), "params": params, "counters": counters,
         "results": results, "timings": {"total": time.perf_counter() - t0}},
        args.out,
    )
    return EXIT_FOUND if res.ok else EXIT_NOT_FOUND


def cmd_parity(args) -> int:
    t0 = time.perf_counter()
    S = [int(s) for s in args.support.split(",") if s != ""]
    inst = gen_parity(args.v, args.k, S, args.eta, args.d, args.seed)
    res = solve_parity(
        inst, xi=args.xi, theta=args.theta, consts=_consts(args),
        amplifier_mode=args.mode, threads=args.threads, backend=args.backend,
    )
    rep = res.reports[0]
    results = {
        "support": list(res.found) if res.found else None,
        "score": res.value,
        "planted": list(inst.S),
        "correct": res.found == inst.S,
        "candidates": [[list(J), sc] for J, sc in res.candidates],
        "notes": res.notes,
    }
    emit(
        {"command": "parity", "args": _echo(args), "params": rep.params.ledger(),
         "counters": rep.counters, "results": results,
         "timings": {"total": time.perf_counter() - t0}},
        args.out,
    )
    return EXIT_FOUND if res.ok else EXIT_NOT_FOUND


# -- amplify / spectral ------------------------------------------------------


def cmd_amplify(args) -> int:
    t0 = time.perf_counter()
    if args.mode == "theoretical":
        sched = derive_schedule(AmplifierParams(args.d, args.tau, args.gamma, args.ell))
    elif args.graphs:
        graphs = tuple(parse_graph(g) for g in args.graphs.split(","))
        sched = derive_schedule(
            AmplifierParams(args.d, args.tau, args.gamma, len(graphs), mode="toy",
                            level_graphs=graphs, k=args.k)
        )
    else:
        sched = complete_schedule(args.d, args.tau, args.gamma, ell=args.ell, k=args.k)
    report = {"command": "amplify", "args": _echo(args), "params": sched.ledger()}
    if args.input:
        X = read_vectors(args.input)
        F = amplify_many(X, sched)
        if args.vectors:
            write_vectors(args.vectors, F, binary=args.binary)
        report["results"] = {"n": F.shape[0], "D": F.shape[1]}
    else:
        x = SplitMix64(args.seed).sign_rows(1, args.d)[0]
        coords = [int(c) for c in args.coord.split(",")] if args.coord else [0]
        stats = CoordStats([0] * sched.ell)
        vals = [amplify_coord(x, sched, j, stats) for j in coords]
        report["results"] = {
            "coords": [str(c) for c in coords],
            "values": vals,
            "input_touches": stats.input_touches,
            "rot_evals": stats.rot_evals,
        }
    report["timings"] = {"total": time.perf_counter() - t0}
    emit(report, args.out)
    return 0


def cmd_spectral(args) -> int:
    g = parse_graph(args.graph)
    if args.op != "none":
        if args.op == "square":
            g = square(g)
        else:
            if not args.with_graph:
                raise ParameterError(f"--op {args.op} needs --with")
            h = parse_graph(args.with_graph)
            g = tensor(g, h) if args.op == "tensor" else zigzag(g, h)
    t0 = time.perf_counter()
    est = second_eigenvalue(g, tol=args.tol, seed=args.seed)
    report = {
        "command": "spectral",
        "args": _echo(args),
        "results": {
            "vertices": str(g.vertex_count),
            "degree": g.degree,
            "lambda_hat": est.lambda_hat,
            "lambda_bound": g.lambda_bound,
            "iterations": est.iterations,
            "residual": est.residual,
            "tree": g.describe(),
        },
        "timings": {"total": time.perf_counter() - t0},
    }
    if args.tree:
        print(g.describe(), file=sys.stderr)
    emit(report, args.out)
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="corramp", description="Correlation amplifiers and outlier detection.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print derived parameter ledgers")
    psub = p.add_subparsers(dest="what", required=True)
    pd = psub.add_parser("detect")
    pd.add_argument("--n", type=int, required=True)
    pd.add_argument("--d", type=int, required=True)
    pd.add_argument("--rho", required=True)
    pd.add_argument("--tau", required=True)
    _add_consts(pd)
    pa = psub.add_parser("amplify")
    pa.add_argument("--d", type=int, required=True)
    pa.add_argument("--tau", required=True)
    pa.add_argument("--gamma", required=True)
    pa.add_argument("--ell", type=int, default=1)
    pa.add_argument("--K", type=int)
    pb = psub.add_parser("bounds")
    pb.add_argument("--d", type=int, required=True)
    pb.add_argument("--tau", required=True)
    pb.add_argument("--gamma", required=True)
    pb.add_argument("--p", type=int)
    pb.add_argument("--ell", type=int)
    for q in (pd, pa, pb):
        q.add_argument("--json", action="store_true", help="also print the JSON ledger")
        q.add_argument("--out")
    p.set_defaults(func=cmd_params)

    g = sub.add_parser("gen", help="generate or convert vector files")
    gsub = g.add_subparsers(dest="what", required=True)
    gu = gsub.add_parser("uniform")
    gu.add_argument("--n", type=int, required=True)
    gu.add_argument("--d", type=int, required=True)
    gl = gsub.add_parser("lightbulb")
    gl.add_argument("--n", type=int, required=True)
    gl.add_argument("--d", type=int, required=True)
    gl.add_argument("--rho", required=True)
    gc = gsub.add_parser("convert")
    gc.add_argument("--in", dest="input", required=True)
    for q in (gu, gl, gc):
        q.add_argument("--vectors", required=True, help="output vector file")
        q.add_argument("--binary", action="store_true")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("detect", help="report pairs with |<x, y>| >= rho d")
    d.add_argument("--x", required=True)
    d.add_argument("--y", help="second collection (default: pairs within --x)")
    d.add_argument("--rho", required=True)
    d.add_argument("--tau", required=True)
    d.add_argument("--s", type=int)
    _add_common(d)
    _add_consts(d)
    d.set_defaults(func=cmd_detect)

    lb = sub.add_parser("lightbulb", help="recover a planted correlated pair")
    lb.add_argument("--in", dest="input", help="vector file (default: generate)")
    lb.add_argument("--n", type=int, default=64)
    lb.add_argument("--d", type=int, default=512)
    lb.add_argument("--rho", default="0.5")
    lb.add_argument("--kappa", type=float, default=2.0)
    lb.add_argument("--rho-max", type=float, default=0.9)
    _add_common(lb)
    _add_consts(lb)
    lb.set_defaults(func=cmd_lightbulb)

    pr = sub.add_parser("parity", help="learn a sparse noisy parity")
    pr.add_argument("--v", type=int, required=True)
    pr.add_argument("--k", type=int, required=True)
    pr.add_argument("--support", required=True, help="comma-separated planted support")
    pr.add_argument("--eta", type=float, default=0.0)
    pr.add_argument("--d", type=int, required=True)
    pr.add_argument("--xi", type=float, default=1.5)
    pr.add_argument("--theta", type=float, default=0.9)
    _add_common(pr)
    _add_consts(pr)
    pr.set_defaults(func=cmd_parity)

    am = sub.add_parser("amplify", help="evaluate a correlation amplifier")
    am.add_argument("--d", type=int, required=True)
    am.add_argument("--tau", required=True)
    am.add_argument("--gamma", required=True)
    am.add_argument("--ell", type=int, default=1)
    am.add_argument("--k", type=int)
    am.add_argument("--mode", choices=("toy", "theoretical"), default="toy")
    am.add_argument("--graphs", help="comma-separated level graphs for toy mode, e.g. k32,k1024")
    am.add_argument("--in", dest="input", help="vector file to amplify (toy sizes)")
    am.add_argument("--vectors", help="write amplified vectors here")
    am.add_argument("--binary", action="store_true")
    am.add_argument("--coord", help="comma-separated output coordinates of a seeded random input")
    am.add_argument("--seed", type=int, default=0)
    am.add_argument("--out")
    am.set_defaults(func=cmd_amplify)

    sp = sub.add_parser("spectral", help="measure the normalized second eigenvalue")
    sp.add_argument("--graph", required=True, help="cN, kN, pN, base:B:M or rvw:B:T")
    sp.add_argument("--op", choices=("none", "square", "tensor", "zigzag"), default="none")
    sp.add_argument("--with", dest="with_graph")
    sp.add_argument("--tol", type=float, default=1e-7)
    sp.add_argument("--tree", action="store_true", help="print the construction tree")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_spectral)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, FormatError, CapacityError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
