"""Determinant minima, the net condition and assembly of the certified bound
``||P|| >= 1 + C_n alpha^2 beta`` for every hyperplane projection."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .geom import as_stream, eval_constants
from .hull import Polytope, covering_radius, max_edge_length, volume

ZERO_TOL = 1e-14
MAX_EXACT_TUPLES = 10 ** 10
SAMPLE_BLOCK = 4096


@dataclass(frozen=True)
class DetMinimum:
    """Minimum |det| over a tuple family.

    ``value`` is None when the family is empty (vacuous condition). In sampled
    mode the value is an upper estimate of the true minimum.
    """

    value: float | None
    argmin: tuple
    count: int
    mode: str

    @property
    def vacuous(self) -> bool:
        return self.value is None


def _clip(v: float) -> float:
    return 0.0 if v < ZERO_TOL else float(v)


def _mode_name(mode: str, samples: int) -> str:
    if mode == "exact":
        return "exact"
    if mode == "sampled":
        return f"sampled({samples})"
    raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")


def _guard(total: float, allow_large: bool) -> None:
    if total > MAX_EXACT_TUPLES and not allow_large:
        raise ValueError(f"exact enumeration of {total:.3g} tuples exceeds the "
                         f"{MAX_EXACT_TUPLES:.0e} guard; use sampled mode or allow_large=True")


def _distinct_rows(rng, hi: int, k: int, size: int) -> np.ndarray:
    """``size`` rows of ``k`` distinct integers in [0, hi), generated in fixed
    blocks so a longer request extends a shorter one draw for draw."""
    out = []
    have = 0
    while have < size:
        blk = rng.integers(0, hi, size=(SAMPLE_BLOCK, k))
        srt = np.sort(blk, axis=1)
        ok = np.all(np.diff(srt, axis=1) > 0, axis=1)
        blk = blk[ok]
        out.append(blk)
        have += len(blk)
    return np.concatenate(out)[:size]


def compute_alpha(p: Polytope, mode: str = "exact", samples: int = 100_000,
                  stream=None, allow_large: bool = False) -> DetMinimum:
    """Minimum of |det| over unordered n-tuples of representatives."""
    X = np.ascontiguousarray(p.reps if isinstance(p, Polytope) else np.asarray(p, float))
    N, n = X.shape
    if N < n:
        raise ValueError(f"need N >= n, got N={N}, n={n}")
    name = _mode_name(mode, samples)
    if mode == "exact":
        _guard(math.comb(N, n), allow_large)
        if n == 3:
            best, arg, count, *_ = _kernels.alpha3(X, -1.0, 1)
        else:
            best, arg, count = _kernels.alpha_generic(X, n)
        return DetMinimum(_clip(best), tuple(int(i) for i in arg), int(count), name)
    rng = as_stream(stream if stream is not None else 0).generator()
    idx = _distinct_rows(rng, N, n, samples)
    dets = np.abs(np.linalg.det(X[idx]))
    j = int(np.argmin(dets))
    return DetMinimum(_clip(dets[j]), tuple(int(i) for i in idx[j]), samples, name)


def _admissible(fv: np.ndarray, M: int, tup) -> bool:
    orbits = [t % M for t in tup]
    if len(set(orbits)) < len(tup):
        return False
    sets = [set(fv[t].tolist()) for t in tup]
    return all(not (sets[a] & sets[b]) for a in range(len(tup)) for b in range(a + 1, len(tup)))


def compute_beta(p: Polytope, mode: str = "exact", samples: int = 100_000,
                 stream=None, allow_large: bool = False,
                 max_draws: int | None = None) -> DetMinimum:
    """Minimum of |det| of unit normals over admissible facet n-tuples.

    Admissible: pairwise non-neighbouring (disjoint vertex sets) and no two
    facets from one antipodal pair. ``value`` is None if no tuple exists.
    """
    n = p.n
    M = p.num_orbits
    name = _mode_name(mode, samples)
    fv = np.ascontiguousarray(p.facet_vertices)
    nr = np.ascontiguousarray(p.normals)
    if mode == "exact":
        _guard(math.comb(M, n) * 2 ** (n - 1), allow_large)
        if n == 3:
            best, arg, count, *_ = _kernels.beta3(nr, fv, -1.0, 1)
        else:
            best, arg, count = _kernels.beta_generic(nr, fv, n)
        if count == 0:
            return DetMinimum(None, (), 0, name)
        return DetMinimum(_clip(best), tuple(int(i) for i in arg), int(count), name)

    rng = as_stream(stream if stream is not None else 0).generator()
    max_draws = max_draws or 100 * samples
    best, arg, got, drawn = math.inf, (), 0, 0
    while got < samples and drawn < max_draws:
        blk = rng.integers(0, p.num_facets, size=(SAMPLE_BLOCK, n))
        drawn += SAMPLE_BLOCK
        keep = np.array([_admissible(fv, M, row) for row in blk], dtype=bool)
        blk = blk[keep][: samples - got]
        if len(blk):
            d = np.abs(np.linalg.det(nr[blk]))
            j = int(np.argmin(d))
            if d[j] < best:
                best, arg = float(d[j]), tuple(int(i) for i in blk[j])
            got += len(blk)
    if got == 0:
        return DetMinimum(None, (), 0, name)
    return DetMinimum(_clip(best), arg, got, name)


class NetCheck(NamedTuple):
    ok: bool
    margin: float
    method: str
    radius: float


def check_net(p: Polytope, epsilon: float, method: str = "voronoi-exact") -> NetCheck:
    """Whether the vertices form an ``epsilon``-net of the sphere."""
    cr = covering_radius(p)
    if method == "voronoi-exact":
        r = cr.exact
    elif method == "offset-bound":
        r = cr.certified
    else:
        raise ValueError(f"unknown net method {method!r}")
    return NetCheck(r <= epsilon, epsilon - r, method, r)


class Alt3D(NamedTuple):
    ok: bool
    volume: float
    max_edge: float


def check_3d_alternative(p: Polytope) -> Alt3D:
    """Substitute for the net condition in R^3: volume > 4 and every edge < 1/4."""
    if p.n != 3:
        raise ValueError(f"the volume/edge alternative needs n = 3, got n = {p.n}")
    vol = volume(p)
    edge = max_edge_length(p)
    return Alt3D(vol > 4.0 and edge < 0.25, vol, edge)


@dataclass
class Certificate:
    n: int
    N: int
    epsilon: float
    net_ok: bool
    net_method: str
    alpha: float
    beta: float | None
    alpha_mode: str
    beta_mode: str
    c_n: float
    bound: float
    valid: bool
    notes: str = ""
    excess: float = 0.0     # bound - 1 = C_n alpha^2 beta, kept apart from 1 + ... rounding
    counts: dict = field(default_factory=dict, repr=False, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("counts")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        names = [f for f in cls.__dataclass_fields__ if f != "counts"]
        return cls(**{k: d[k] for k in names if k in d})


ANTIPODAL_NOTE = ("facet tuples exclude antipodal pairs (F, -F); "
                  "non-neighbouring means disjoint vertex sets")


def certify(p: Polytope | None, epsilon: float | None = None, mode: str = "exact",
            samples: int = 100_000, stream=None, use_3d_alternative: bool = False,
            net_method: str = "voronoi-exact", alpha: float | None = None,
            beta: float | None = None, n: int | None = None,
            allow_large: bool = False) -> Certificate:
    """Assemble the certificate for ``p``.

    ``alpha`` / ``beta`` may be injected as precomputed values (recorded with
    mode ``injected``; such certificates are never marked valid). With
    ``p=None`` the dimension must be given and both values injected.
    """
    if p is None:
        if n is None or alpha is None or beta is None:
            raise ValueError("without a polytope, n, alpha and beta must all be given")
        N = 0
    else:
        n, N = p.n, p.N
    eps = 1.0 / (4 * n) if epsilon is None else float(epsilon)
    notes = [ANTIPODAL_NOTE]
    counts = {}
    stream = as_stream(stream if stream is not None else 0)

    if p is None:
        net_ok, method = False, "none"
        notes.append("no polytope given: net condition not checked")
    elif use_3d_alternative:
        alt = check_3d_alternative(p)
        net_ok, method = alt.ok, "3d-alternative"
        counts.update(volume=alt.volume, max_edge=alt.max_edge)
    else:
        chk = check_net(p, eps, net_method)
        net_ok, method = chk.ok, net_method
        counts.update(covering_radius=chk.radius)

    if alpha is not None:
        a_val, a_mode = _clip(float(alpha)), "injected"
    else:
        am = compute_alpha(p, mode, samples, stream.child(0), allow_large)
        a_val, a_mode = am.value, am.mode
        counts["alpha_tuples"] = am.count
        counts["alpha_argmin"] = list(am.argmin)
    if beta is not None:
        b_val, b_mode = _clip(float(beta)), "injected"
    else:
        bm = compute_beta(p, mode, samples, stream.child(1), allow_large)
        b_val, b_mode = bm.value, bm.mode
        counts["beta_tuples"] = bm.count
        counts["beta_argmin"] = list(bm.argmin)

    c_n = eval_constants(n).c_thm1
    if b_val is None:
        notes.append("no admissible facet tuple, so beta is vacuous and the bound does not apply")
        excess = 0.0
    else:
        excess = c_n * a_val ** 2 * b_val
    bound = 1.0 + excess
    if a_mode.startswith("sampled") or b_mode.startswith("sampled"):
        notes.append("sampled minima are upper estimates; certificate not valid")
    valid = (net_ok and a_val > 0 and b_val is not None and b_val > 0
             and a_mode == "exact" and b_mode == "exact")
    return Certificate(n=n, N=N, epsilon=eps, net_ok=bool(net_ok), net_method=method,
                       alpha=a_val, beta=b_val, alpha_mode=a_mode, beta_mode=b_mode,
                       c_n=c_n, bound=bound, valid=bool(valid), notes="; ".join(notes), excess=excess,
                       counts=counts)


def check_lemma2(xs, v, alpha: float) -> bool:
    """max_i |<x_i, v>| >= alpha / n for unit x_i with |det(x)| >= alpha."""
    xs = np.asarray(xs, dtype=float)
    v = np.asarray(v, dtype=float)
    n = xs.shape[0]
    if abs(np.linalg.det(xs)) < alpha:
        raise ValueError(f"|det(xs)| = {abs(np.linalg.det(xs)):.3g} is below alpha = {alpha:.3g}")
    return bool(np.max(np.abs(xs @ v)) >= alpha / n)
