"""Simulated-annealing search for 3-D symmetric spherical polytopes with a
large certified bound C_3 alpha^2 beta, subject to volume > 4 and every edge
shorter than 1/4 (the 3-D substitute for the net condition).

Each proposal moves one representative along the tangent plane. The hull is
rebuilt in full (cheap at these sizes), while alpha and beta are kept exact
incrementally: every tuple whose |det| is at most a threshold T is cached,
keyed by content (vertex triples for alpha, facet vertex sets for beta).
Tuples that do not involve a moved point or a changed facet keep their
determinant, so replacing only the affected entries leaves the cache
complete and its minimum exact. When the cache empties or overflows the
family is re-enumerated from scratch.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .certify import Certificate, certify
from .errors import DegenerateInputError, InvalidStateError, RankDeficientError
from .geom import SeededStream, as_stream, eval_constants, normalize
from .hull import Polytope, build_hull, max_edge_length, volume, write_polytope

MIN_N = 50
START_ATTEMPTS = 10_000
CACHE_CAP = 400_000


class InfeasibleStartError(InvalidStateError):
    """No feasible starting configuration was found."""

    def __init__(self, constraint: str, attempts: int, detail: str = ""):
        self.constraint = constraint
        super().__init__(f"no feasible start after {attempts} attempts: "
                         f"constraint '{constraint}' fails{detail}")


@dataclass
class SearchConfig:
    N: int = 434
    iterations: int = 10_000
    restarts: int = 1
    t_start: float = 0.3          # Metropolis temperature on log(alpha^2 beta)
    t_end: float = 0.003
    step: float = 0.01            # tangent perturbation scale
    targeted: float = 0.5         # share of moves drawn from the argmin tuples
    relax_iterations: int = 60
    jitter: float = 1e-3
    slack: float = 30.0           # cache threshold T = slack * current minimum
    checkpoint_every: int = 10_000
    out_dir: str | None = None
    seed: int = 0

    def validate(self) -> None:
        if self.N < MIN_N:
            raise ValueError(f"N must be >= {MIN_N}, got {self.N}")
        if self.iterations < 0 or self.restarts < 1:
            raise ValueError("iterations must be >= 0 and restarts >= 1")
        if not (self.t_start > 0 and self.t_end > 0 and self.step > 0):
            raise ValueError("temperatures and step must be positive")
        if not 0.0 <= self.targeted <= 1.0:
            raise ValueError("targeted must lie in [0, 1]")
        if self.slack <= 1.0:
            raise ValueError("slack must exceed 1")


@dataclass
class SearchResult:
    polytope: Polytope
    certificate: Certificate
    objective: float
    alpha: float
    beta: float
    restart: int
    log: list = field(default_factory=list, repr=False)
    restart_objectives: list = field(default_factory=list)

    def summary(self) -> dict:
        return {"objective": self.objective, "alpha": self.alpha, "beta": self.beta,
                "restart": self.restart, "restart_objectives": self.restart_objectives,
                "bound_minus_one": self.certificate.excess,
                "volume": volume(self.polytope), "max_edge": max_edge_length(self.polytope)}


def feasibility(p: Polytope) -> tuple[bool, float, float]:
    vol = volume(p)
    edge = max_edge_length(p)
    return (vol > 4.0 and edge < 0.25), vol, edge


def evaluate_candidate(reps) -> tuple[bool, float, float | None, float]:
    """(feasible, alpha, beta, alpha^2 beta) with exact enumeration.

    Degenerate input (e.g. a repeated point) gives alpha = 0 and objective 0.
    """
    reps = np.ascontiguousarray(reps, dtype=float)
    if reps.ndim != 2 or reps.shape[1] != 3:
        raise ValueError("evaluate_candidate works in R^3")
    a, *_ = _kernels.alpha3(reps, -1.0, 1)
    a = 0.0 if a < 1e-14 else float(a)
    try:
        p = build_hull(reps)
    except (DegenerateInputError, RankDeficientError):
        return False, a, None, 0.0
    ok, _, _ = feasibility(p)
    b, _, count, *_ = _kernels.beta3(np.ascontiguousarray(p.normals),
                                     np.ascontiguousarray(p.facet_vertices), -1.0, 1)
    if count == 0:
        return ok, a, None, 0.0
    b = 0.0 if b < 1e-14 else float(b)
    return ok, a, b, a * a * b


# ---------------------------------------------------------------- starts

def fibonacci_reps(N: int) -> np.ndarray:
    """Upper half of a 2N-point Fibonacci sphere."""
    M = 2 * N
    k = np.arange(N)
    z = 1.0 - (2 * k + 1) / M
    r = np.sqrt(1.0 - z * z)
    phi = k * math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def relax_symmetric(reps: np.ndarray, iterations: int, step: float = 0.05) -> np.ndarray:
    """Coulomb repulsion on the antipodally symmetric set, moving only reps."""
    X = reps.copy()
    N = len(X)
    for _ in range(iterations):
        P = np.vstack([X, -X])
        D = X[:, None, :] - P[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", D, D)
        d2[np.arange(N), np.arange(N)] = np.inf
        force = np.einsum("ij,ijk->ik", d2 ** -1.5, D)
        force -= np.einsum("ij,ij->i", force, X)[:, None] * X
        scale = np.linalg.norm(force, axis=1).max()
        X = normalize(X + step * force / (scale * math.sqrt(N)))
    return X


def _perturb(rng, reps: np.ndarray, i: int, scale: float) -> np.ndarray:
    x = reps[i]
    g = rng.normal(size=3) * scale
    g -= (g @ x) * x
    out = reps.copy()
    out[i] = normalize(x + g)
    return out


def feasible_start(N: int, stream, cfg: SearchConfig) -> tuple[np.ndarray, Polytope]:
    stream = as_stream(stream)
    base = relax_symmetric(fibonacci_reps(N), cfg.relax_iterations)
    fails = {"volume > 4": 0, "max edge < 1/4": 0, "general position": 0}
    best_vol, best_edge = 0.0, math.inf
    for k in range(START_ATTEMPTS):
        rng = stream.child(k).generator()
        reps = normalize(base + cfg.jitter * rng.normal(size=base.shape))
        try:
            p = build_hull(reps)
        except (DegenerateInputError, RankDeficientError):
            fails["general position"] += 1
            continue
        ok, vol, edge = feasibility(p)
        if ok:
            return reps, p
        best_vol, best_edge = max(best_vol, vol), min(best_edge, edge)
        fails["volume > 4"] += vol <= 4.0
        fails["max edge < 1/4"] += edge >= 0.25
    worst = max(fails, key=fails.get)
    raise InfeasibleStartError(worst, START_ATTEMPTS,
                               f" (best volume {best_vol:.6f}, best max edge {best_edge:.6f})")


# ---------------------------------------------------------- determinant caches

class _AlphaCache:
    def __init__(self, X: np.ndarray, slack: float):
        self.slack = slack
        self.rebuild(X)

    def rebuild(self, X, known=None):
        best = _kernels.alpha3(X, -1.0, 1)[0] if known is None else known
        T = self.slack * best
        while True:
            _, _, _, idx, val, ncol = _kernels.alpha3(X, T, CACHE_CAP)
            if ncol <= CACHE_CAP:
                break
            T = best + (T - best) / 4
        self.T = T
        self.entries = {tuple(int(j) for j in r): float(v) for r, v in zip(idx[:ncol], val[:ncol])}
        self.full_rebuilds = getattr(self, "full_rebuilds", 0) + 1

    def propose(self, X, i):
        new = {k: v for k, v in self.entries.items() if i not in k}
        _, _, _, idx, val, ncol = _kernels.alpha3_through(X, i, self.T, CACHE_CAP)
        if ncol > CACHE_CAP:
            return None
        for r, v in zip(idx[:ncol], val[:ncol]):
            new[tuple(sorted(int(j) for j in r))] = float(v)
        return new

    @staticmethod
    def minimum(entries):
        if not entries:
            return None, None
        k = min(entries, key=lambda t: (entries[t], t))
        return entries[k], k


class _BetaCache:
    def __init__(self, p: Polytope, slack: float):
        self.slack = slack
        self.full_rebuilds = 0
        self.rebuild(p)

    @staticmethod
    def facet_keys(p: Polytope) -> list:
        return [tuple(sorted(int(v) for v in f)) for f in p.facet_vertices]

    @staticmethod
    def _neg(key, twoN):
        half = twoN // 2
        return tuple(sorted((v + half) % twoN for v in key))

    def _triple_key(self, a, b, c, twoN):
        t = tuple(sorted((a, b, c)))
        u = tuple(sorted((self._neg(a, twoN), self._neg(b, twoN), self._neg(c, twoN))))
        return min(t, u)

    def _collect(self, keys, idx, val, ncol, twoN, into):
        for r, v in zip(idx[:ncol], val[:ncol]):
            into[self._triple_key(keys[r[0]], keys[r[1]], keys[r[2]], twoN)] = float(v)

    def rebuild(self, p: Polytope, known=None):
        nr = np.ascontiguousarray(p.normals)
        fv = np.ascontiguousarray(p.facet_vertices)
        if known is None:
            best, _, count, *_ = _kernels.beta3(nr, fv, -1.0, 1)
            if count == 0:
                raise InvalidStateError("no admissible facet triple: beta is vacuous")
        else:
            best = known
        T = self.slack * best
        while True:
            _, _, _, idx, val, ncol = _kernels.beta3(nr, fv, T, CACHE_CAP)
            if ncol <= CACHE_CAP:
                break
            T = best + (T - best) / 4
        self.T = T
        keys = self.facet_keys(p)
        self.keyset = set(keys)
        self.entries = {}
        self._collect(keys, idx, val, ncol, 2 * p.N, self.entries)
        self.full_rebuilds += 1

    def propose(self, p: Polytope, moved: int):
        """Cache after moving representative ``moved``: facets touching the
        moved vertex (or its antipode) changed even if their ids did not."""
        keys = self.facet_keys(p)
        keyset = set(keys)
        touched = {moved, moved + p.N}
        removed = (self.keyset - keyset) | {k for k in self.keyset if touched.intersection(k)}
        M = p.num_orbits
        added = sorted({k % M for k, key in enumerate(keys)
                        if key not in self.keyset or touched.intersection(key)})
        new = {t: v for t, v in self.entries.items()
               if t[0] not in removed and t[1] not in removed and t[2] not in removed}
        if added:
            _, _, _, idx, val, ncol = _kernels.beta3_through(
                np.ascontiguousarray(p.normals), np.ascontiguousarray(p.facet_vertices),
                np.array(added, dtype=np.int64), self.T, CACHE_CAP)
            if ncol > CACHE_CAP:
                return None, keyset
            self._collect(keys, idx, val, ncol, 2 * p.N, new)
        return new, keyset

    @staticmethod
    def minimum(entries):
        return _AlphaCache.minimum(entries)


# ---------------------------------------------------------------- annealing

@dataclass
class _Chain:
    reps: np.ndarray
    poly: Polytope
    alpha: float
    beta: float
    log_obj: float
    alpha_arg: tuple
    beta_arg: tuple


def _log_objective(a, b):
    if a is None or b is None or a <= 0 or b <= 0:
        return -math.inf
    return 2 * math.log(a) + math.log(b)


def _move_candidates(chain: _Chain) -> list:
    ids = set(chain.alpha_arg)
    N = chain.poly.N
    for key in chain.beta_arg:
        ids.update(v % N for v in key)
    return sorted(ids)


def _temperature(cfg: SearchConfig, it: int) -> float:
    if cfg.iterations <= 1:
        return cfg.t_start
    return cfg.t_start * (cfg.t_end / cfg.t_start) ** (it / (cfg.iterations - 1))


def _checkpoint(cfg: SearchConfig, restart: int, it: int, best: _Chain, temp: float,
                current: _Chain, path: tuple) -> None:
    if not cfg.out_dir:
        return
    os.makedirs(cfg.out_dir, exist_ok=True)
    stem = os.path.join(cfg.out_dir, f"checkpoint_r{restart}")
    write_polytope(stem + ".txt", best.poly.reps)
    state = {"restart": restart, "iteration": it, "temperature": temp,
             "current_objective": math.exp(current.log_obj),
             "best_objective": math.exp(best.log_obj),
             "best_alpha": best.alpha, "best_beta": best.beta,
             "seed": cfg.seed, "stream_path": list(path)}
    with open(stem + ".json", "w") as fh:
        json.dump(state, fh, indent=2)


def run_chain(cfg: SearchConfig, stream: SeededStream, restart: int = 0):
    """One annealing chain. Returns (best chain state, log rows)."""
    reps, poly = feasible_start(cfg.N, stream.child(0), cfg)
    rng = stream.child(1).generator()

    acache = _AlphaCache(reps, cfg.slack)
    bcache = _BetaCache(poly, cfg.slack)
    a, aarg = acache.minimum(acache.entries)
    b, barg = bcache.minimum(bcache.entries)
    cur = _Chain(reps, poly, a, b, _log_objective(a, b), aarg, barg)
    best = cur
    log = [(0, _temperature(cfg, 0), math.exp(cur.log_obj), True)]

    for it in range(1, cfg.iterations + 1):
        temp = _temperature(cfg, it - 1)
        if rng.random() < cfg.targeted:
            cand = _move_candidates(cur)
            i = cand[int(rng.integers(len(cand)))]
        else:
            i = int(rng.integers(cfg.N))
        new_reps = _perturb(rng, cur.reps, i, cfg.step)
        u = rng.random()
        accepted = False
        try:
            p = build_hull(new_reps)
        except (DegenerateInputError, RankDeficientError, InvalidStateError):
            p = None
        if p is not None and feasibility(p)[0]:
            a_entries = acache.propose(new_reps, i)
            b_entries, keyset = bcache.propose(p, i)
            if a_entries is None or not a_entries or b_entries is None or not b_entries:
                saved = (acache.entries, acache.T, bcache.entries, bcache.T, bcache.keyset)
                acache.rebuild(new_reps)
                bcache.rebuild(p)
                a_entries, b_entries, keyset = acache.entries, bcache.entries, bcache.keyset
                (acache.entries, acache.T, bcache.entries, bcache.T, bcache.keyset) = saved
            na, naarg = acache.minimum(a_entries)
            nb, nbarg = bcache.minimum(b_entries)
            lo = _log_objective(na, nb)
            delta = lo - cur.log_obj
            if delta >= 0 or (math.isfinite(lo) and u < math.exp(delta / temp)):
                accepted = True
                acache.entries, bcache.entries, bcache.keyset = a_entries, b_entries, keyset
                cur = _Chain(new_reps, p, na, nb, lo, naarg, nbarg)
                if lo > best.log_obj:
                    best = cur
                # tighten thresholds once the minimum has grown well past them
                if na > acache.T / 3:
                    acache.rebuild(new_reps, na)
                if nb > bcache.T / 3:
                    bcache.rebuild(p, nb)
        log.append((it, temp, math.exp(cur.log_obj), accepted))
        if cfg.checkpoint_every and it % cfg.checkpoint_every == 0:
            _checkpoint(cfg, restart, it, best, temp, cur, stream.path)
    return best, log


def search(cfg: SearchConfig, stream=None) -> SearchResult:
    """Run ``cfg.restarts`` independent chains and return the best.

    Restarts run one after another on child streams of the seed; the winner is
    the largest objective, ties broken by the lowest restart index.
    """
    cfg.validate()
    stream = as_stream(stream if stream is not None else cfg.seed)
    chains, logs = [], []
    for r in range(cfg.restarts):
        best, log = run_chain(cfg, stream.child(r), r)
        chains.append(best)
        logs.append(log)
    objs = [c.log_obj for c in chains]
    r = max(range(len(chains)), key=lambda k: (objs[k], -k))
    win = chains[r]
    cert = certify(win.poly, use_3d_alternative=True)
    # incremental minima use a different row order than the full enumerators,
    # so they agree with the re-certification only to rounding
    if not (math.isclose(cert.alpha, win.alpha, rel_tol=1e-9)
            and cert.beta is not None and math.isclose(cert.beta, win.beta, rel_tol=1e-9)):
        raise InvalidStateError(f"incremental minima disagree with re-certification: "
                                f"alpha {win.alpha!r} vs {cert.alpha!r}, "
                                f"beta {win.beta!r} vs {cert.beta!r}")
    rows = [(k, *row) for k, log in enumerate(logs) for row in log]
    res = SearchResult(win.poly, cert, cert.alpha ** 2 * cert.beta, cert.alpha, cert.beta, r,
                       log=rows, restart_objectives=[math.exp(o) for o in objs])
    if cfg.out_dir:
        write_outputs(res, cfg)
    return res


def write_outputs(res: SearchResult, cfg: SearchConfig) -> dict:
    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = {"polytope": os.path.join(cfg.out_dir, "best_polytope.txt"),
             "certificate": os.path.join(cfg.out_dir, "certificate.json"),
             "log": os.path.join(cfg.out_dir, "search_log.csv")}
    write_polytope(paths["polytope"], res.polytope.reps)
    with open(paths["certificate"], "w") as fh:
        json.dump({"certificate": res.certificate.to_dict(), "search": res.summary(),
                   "config": asdict(cfg),
                   "reference_c3": eval_constants(3).c_thm1}, fh, indent=2)
    with open(paths["log"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["restart", "iteration", "temperature", "objective", "accepted"])
        for row in res.log:
            w.writerow([row[0], row[1], repr(row[2]), repr(row[3]), int(row[4])])
    return paths
