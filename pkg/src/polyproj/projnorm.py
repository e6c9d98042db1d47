"""Minimal operator norm of projections onto a hyperplane of the polytope
norm, and the good/bad facet classification used by the certificate.

A projection onto Y = {<x, v> = 0} with kernel direction w (normalized so
<v, w> = 1) is P = I - w v^T. Its operator norm is the maximum, over
representatives u and facet functionals g = f / h, of
<u, g> - <v, u> <w, g>; minimizing over w is a linear program in (w, t).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linprog

from .certify import Certificate
from .geom import as_stream, normalize, s_threshold, sample_unit_sphere
from .hull import Polytope

BLOCK = 64
_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass
class ProjectionResult:
    v: np.ndarray
    min_norm: float
    witness_w: np.ndarray
    active_constraints: list
    lp_status: str
    lower_bound: float = math.nan
    rounds: int = 0

    def to_dict(self) -> dict:
        return {"v": self.v.tolist(), "min_norm": self.min_norm,
                "witness_w": self.witness_w.tolist(),
                "active_constraints": [list(c) for c in self.active_constraints],
                "lp_status": self.lp_status}


def _top(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` largest values; ties resolved toward the lowest
    index."""
    if len(values) <= k:
        return np.lexsort((np.arange(len(values)), -values))
    thr = np.partition(values, len(values) - k)[len(values) - k]
    above = np.flatnonzero(values > thr)
    at = np.flatnonzero(values == thr)[: k - len(above)]
    sel = np.concatenate([above, at])
    return sel[np.lexsort((sel, -values[sel]))]


def _functionals(p: Polytope) -> np.ndarray:
    return p.normals / p.offsets[:, None]


def _tables(p: Polytope, v: np.ndarray):
    G = _functionals(p)          # (F, n)
    A = p.reps @ G.T             # (N, F): <u, g>
    B = p.reps @ v               # (N,):   <v, u>
    return G, A, B


def projection_operator_norm(p: Polytope, v, w) -> float:
    """||I - w v^T / <v, w>|| in the polytope norm, by direct maximization
    over representatives x facet functionals."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    vw = float(v @ w)
    if abs(vw) <= 1e-12:
        raise ValueError("kernel direction w is parallel to the hyperplane (<v, w> = 0)")
    G, A, B = _tables(p, v)
    vals = A - np.outer(B, G @ (w / vw))
    return float(vals.max())


def min_projection_norm(p: Polytope, v, tol: float = 1e-9, max_rounds: int = 500,
                        box: float = 100.0) -> ProjectionResult:
    """Minimal norm over all projections onto {<x, v> = 0}.

    Constraint generation: solve the LP on a working set of (vertex, facet)
    constraints, evaluate every constraint at the optimum, add the
    ``BLOCK`` most violated ones, and stop once none is violated by more
    than ``tol``. The returned ``min_norm`` is the exact operator norm at the
    returned witness, hence never below the true optimum; ``lower_bound`` is
    the working-set LP value, never above it.
    """
    v = normalize(np.asarray(v, dtype=float))
    n = p.n
    G, A, B = _tables(p, v)
    N, F = A.shape

    w = v.copy()
    vals = A - np.outer(B, G @ w)
    flat = vals.ravel()
    work = set(_top(flat, 4 * BLOCK).tolist())
    status, lp_t, rounds = "tolerance", -math.inf, 0
    while rounds < max_rounds:
        rounds += 1
        idx = np.array(sorted(work))
        ui, gi = np.divmod(idx, F)
        # -B_u <g, w> - t <= -A_ug
        A_ub = np.hstack([-B[ui, None] * G[gi], -np.ones((len(idx), 1))])
        b_ub = -A[ui, gi]
        res = linprog(np.r_[np.zeros(n), 1.0], A_ub=A_ub, b_ub=b_ub,
                      A_eq=np.r_[v, 0.0][None, :], b_eq=[1.0],
                      bounds=[(-box, box)] * n + [(None, None)],
                      method="highs", options=_HIGHS)
        if res.status != 0:
            status = "infeasible"
            break
        w = res.x[:n]
        lp_t = float(res.x[n])
        vals = A - np.outer(B, G @ w)
        flat = vals.ravel()
        viol = flat - lp_t
        if viol.max() <= tol:
            if np.max(np.abs(w)) >= box * (1 - 1e-9):
                box *= 10.0
                continue
            status = "optimal"
            break
        cand = np.flatnonzero(viol > tol)
        cand = cand[~np.isin(cand, idx)]
        if len(cand) == 0:
            break
        work.update(cand[_top(viol[cand], BLOCK)].tolist())

    t = float(flat.max())
    active = [(int(a), int(b)) for a, b in zip(*np.divmod(np.flatnonzero(flat >= t - max(tol, 1e-12)), F))]
    return ProjectionResult(v=v, min_norm=t, witness_w=w, active_constraints=active,
                            lp_status=status, lower_bound=lp_t, rounds=rounds)


@dataclass(frozen=True)
class FaceClass:
    facet: int
    cls: str
    margin: float


def facet_hyperplane_margin(p: Polytope, f: int, v) -> float | None:
    """max over z in Y cap F of the in-facet distance from z to the facet
    boundary, or None when the hyperplane misses the facet."""
    v = np.asarray(v, dtype=float)
    verts = p.vertices[p.facet_vertices[f]]
    s = verts @ v
    if s.min() > 0 or s.max() < 0:
        return None
    n = p.n
    E = (verts[1:] - verts[0]).T
    Gr = np.linalg.pinv(E)
    grads = np.vstack([-Gr.sum(axis=0), Gr])
    height = 1.0 / np.linalg.norm(grads, axis=1)
    # variables: barycentric lambda (n), margin m; maximize m
    c = np.r_[np.zeros(n), -1.0]
    A_ub = np.hstack([-np.diag(height), np.ones((n, 1))])     # m - H_i lambda_i <= 0
    A_eq = np.vstack([np.r_[np.ones(n), 0.0], np.r_[s, 0.0]])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=[1.0, 0.0],
                  bounds=[(0, None)] * n + [(None, None)], method="highs", options=_HIGHS)
    if res.status != 0:
        return None
    return max(float(res.x[n]), 0.0)


def classify_faces(p: Polytope, v, alpha: float, d: float | None = None) -> list[FaceClass]:
    """Good / bad / no-intersection class of every facet against Y = v^perp."""
    s = s_threshold(p.n, alpha, d)
    v = normalize(np.asarray(v, dtype=float))
    out = []
    for f in range(p.num_facets):
        m = facet_hyperplane_margin(p, f, v)
        if m is None:
            out.append(FaceClass(f, "no-intersection", math.nan))
        else:
            out.append(FaceClass(f, "good" if m >= s else "bad", m))
    return out


@dataclass
class SweepReport:
    count: int
    bound: float
    certificate_valid: bool
    advisory_only: bool
    violations: int
    min_norm_min: float | None
    min_norm_median: float | None
    results: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["results"] = [{"v": r.v.tolist(), "min_norm": r.min_norm, "lp_status": r.lp_status}
                        for r in self.results]
        return d


def hyperplane_sweep(p: Polytope, cert: Certificate, count: int, stream,
                     tol: float = 1e-9) -> SweepReport:
    """Minimal projection norms for ``count`` random hyperplanes, checked
    against the certified bound."""
    results = []
    if count > 0:
        vs = sample_unit_sphere(p.n, count, as_stream(stream))
        results = [min_projection_norm(p, v, tol) for v in vs]
    norms = np.array([r.min_norm for r in results])
    viol = int(np.sum(norms < cert.bound - tol)) if count else 0
    return SweepReport(
        count=count, bound=cert.bound, certificate_valid=cert.valid,
        advisory_only=not cert.valid, violations=viol,
        min_norm_min=float(norms.min()) if count else None,
        min_norm_median=float(np.median(norms)) if count else None,
        results=results)
