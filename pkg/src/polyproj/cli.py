"""Command-line entry point.

Exit codes: 0 success, 1 usage or input error (nothing computed),
2 computed but failed validation (invalid certificate, sweep violation,
failed Monte-Carlo report, infeasible search result).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .certify import Certificate, certify
from .errors import DegenerateInputError, InvalidStateError, RankDeficientError
from .geom import SeededStream, eval_constants, sample_unit_sphere
from .hull import (build_hull, covering_radius, format_facets, max_edge_length,
                   polytope_digest, read_polytope, volume, write_polytope)

EXIT_OK, EXIT_INPUT, EXIT_VALIDATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def _meta(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    return {"version": __version__, "config": cfg, "seed": getattr(args, "seed", None)}


def _emit(payload: dict, args) -> None:
    text = json.dumps(_jsonable(payload), indent=2)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load(path: str):
    reps = read_polytope(path)
    return reps, build_hull(reps)


def _set_threads(n: int | None) -> None:
    # the compiled kernels are serial, so the count is validated and recorded
    # in the run metadata but cannot change any result
    if n is not None and n < 1:
        raise UsageError("--threads must be >= 1")


# ------------------------------------------------------------------ commands

def cmd_constants(args) -> int:
    rec = eval_constants(args.n)
    print(f"C_{args.n} = {rec.c_thm1:.6f}")
    _emit({"meta": _meta(args), "constants": rec.as_dict()}, args)
    return EXIT_OK


def cmd_gen(args) -> int:
    reps = sample_unit_sphere(args.n, args.N, SeededStream(args.seed))
    write_polytope(args.out, reps)
    print(json.dumps({"meta": _meta(args), "digest": polytope_digest(reps)}))
    return EXIT_OK


def cmd_hull(args) -> int:
    reps, p = _load(args.inp)
    cr = covering_radius(p)
    info = {"meta": _meta(args), "n": p.n, "N": p.N, "vertices": 2 * p.N,
            "facets": p.num_facets, "volume": volume(p), "max_edge": max_edge_length(p),
            "covering_radius": cr.exact, "digest": polytope_digest(reps)}
    print(f"{p.num_facets} facets")
    if args.facets:
        with open(args.facets, "w") as fh:
            fh.write(format_facets(p))
    _emit(info, args)
    return EXIT_OK


def cmd_certify(args) -> int:
    reps, p = _load(args.inp)
    if args.mode == "sampled" and args.seed is None:
        raise UsageError("--seed is required with --mode sampled")
    t0 = time.perf_counter()
    cert = certify(p, epsilon=args.epsilon, mode=args.mode, samples=args.samples,
                   stream=SeededStream(args.seed if args.seed is not None else 0),
                   use_3d_alternative=args.alt3d, allow_large=args.allow_large)
    out = cert.to_dict()
    out.update(polytope_digest=polytope_digest(reps), wall_time=time.perf_counter() - t0,
               counts=cert.counts, meta=_meta(args))
    _emit(out, args)
    return EXIT_OK if cert.valid else EXIT_VALIDATION


def _parse_v(text: str, n: int) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"--v must be comma-separated numbers, got {text!r}")
    if len(v) != n or not np.linalg.norm(v) > 0:
        raise UsageError(f"--v must be a nonzero vector of length {n}")
    return v


def cmd_projnorm(args) -> int:
    from .projnorm import hyperplane_sweep, min_projection_norm
    _, p = _load(args.inp)
    if args.action == "sweep":
        if args.cert is None or args.seed is None:
            raise UsageError("projnorm sweep needs --cert and --seed")
        with open(args.cert) as fh:
            d = json.load(fh)
        cert = Certificate.from_dict(d.get("certificate", d))
        rep = hyperplane_sweep(p, cert, args.count, SeededStream(args.seed), args.tol)
        payload = rep.to_dict()
        payload["meta"] = _meta(args)
        _emit(payload, args)
        bad = rep.violations > 0 or (rep.min_norm_min is not None
                                     and rep.min_norm_min < 1 - args.tol)
        return EXIT_VALIDATION if (bad and cert.valid) else EXIT_OK
    if args.v is None:
        raise UsageError("projnorm needs --v (or the 'sweep' action)")
    res = min_projection_norm(p, _parse_v(args.v, p.n), args.tol)
    payload = res.to_dict()
    payload["meta"] = _meta(args)
    _emit(payload, args)
    return EXIT_OK if res.lp_status == "optimal" else EXIT_VALIDATION


def cmd_mc(args) -> int:
    from . import mclab
    if args.seed is None and args.kind != "bm":
        raise UsageError("--seed is required for Monte-Carlo runs")
    s = SeededStream(args.seed if args.seed is not None else 0)
    k = args.kind
    if k == "faces":
        reports = [mclab.mc_face_count(args.n, args.N, args.trials, s)]
    elif k == "detmoment":
        reports = [mclab.mc_det_moment(args.n, args.samples, args.exponent, s)]
    elif k == "betaks":
        reports = [mclab.beta_product_check(args.n, args.samples, s, args.beta_n)]
    elif k == "net":
        eps = args.epsilon if args.epsilon is not None else 1 / (4 * args.n)
        reports = [mclab.mc_net_failure(args.n, args.N, eps, args.trials, s)]
    elif k == "thm2":
        reports = mclab.mc_theorem2_events(args.n, args.N, args.trials, s)
    else:  # bm
        if None in (args.alpha, args.beta, args.c, args.m):
            raise UsageError("mc bm needs --alpha --beta --c --m")
        val, bound = mclab.quadrature_Bm(args.alpha, args.beta, args.c, args.m)
        _emit({"meta": _meta(args), "value": val, "bound": bound, "passed": val <= bound}, args)
        return EXIT_OK if val <= bound else EXIT_VALIDATION
    payload = {"meta": _meta(args), "reports": [r.to_dict() for r in reports]}
    _emit(payload, args)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VALIDATION


def cmd_search(args) -> int:
    from .search3d import SearchConfig, search
    cfg = SearchConfig(N=args.N, iterations=args.iters, restarts=args.restarts,
                       step=args.step, out_dir=args.out_dir, seed=args.seed)
    res = search(cfg)
    s = res.summary()
    print(json.dumps(_jsonable({"meta": _meta(args), **s, "valid": res.certificate.valid})))
    ok = res.certificate.valid and s["volume"] > 4 and s["max_edge"] < 0.25
    return EXIT_OK if ok else EXIT_VALIDATION


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="polyproj", description="Certified lower bounds for hyperplane "
                 "projection norms of symmetric spherical polytopes.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads for compiled kernels (results do not depend on it)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("constants", help="evaluate the dimension constants")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("gen", help="sample N random representatives")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("hull", help="build the symmetric hull and report its shape")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--facets", help="write facet list to this file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hull)

    p = sub.add_parser("certify", help="compute the certified bound")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--3d-alt", dest="alt3d", action="store_true")
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("projnorm", help="minimal projection norm onto a hyperplane, or a sweep")
    p.add_argument("action", nargs="?", choices=["sweep"])
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--v")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--cert")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_projnorm)

    p = sub.add_parser("mc", help="Monte-Carlo and quadrature checks")
    p.add_argument("kind", choices=["faces", "detmoment", "betaks", "net", "bm", "thm2"])
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--exponent", type=float, default=-0.5)
    p.add_argument("--beta-n", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("search", help="annealing search for a 3-D certified polytope")
    p.add_argument("--N", type=int, default=434)
    p.add_argument("--iters", type=int, default=10_000)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_search)
    return ap


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _set_threads(args.threads)
        return args.func(args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, DegenerateInputError, RankDeficientError, InvalidStateError) as e:
        print(f"polyproj: error: {e}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
