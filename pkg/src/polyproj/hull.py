"""Facet complex of symmetric spherical polytopes conv{+-x_1, ..., +-x_N}
and the geometric queries the certificate needs.

Vertices are indexed two ways. Internally ``vertices[v]`` for ``0 <= v < 2N``
with ``v < N`` meaning ``+reps[v]`` and ``v >= N`` meaning ``-reps[v - N]``.
Facets expose *signed ids* ``+-(i + 1)`` for ``+-reps[i]``.

Facets are stored in antipodal pairs: for ``M = num_facets // 2``, facet
``k + M`` is exactly ``-facet k`` (negated normal, equal offset).
"""
from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import ConditioningWarning, DegenerateInputError, InvalidStateError, RankDeficientError
from .geom import check_unit

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class Facet:
    vertex_ids: tuple
    unit_normal: np.ndarray
    offset: float


@dataclass(frozen=True, eq=False)
class Polytope:
    reps: np.ndarray            # (N, n)
    facet_vertices: np.ndarray  # (F, n) indices into vertices
    normals: np.ndarray         # (F, n)
    offsets: np.ndarray         # (F,)
    symmetric: bool = True

    @property
    def n(self) -> int:
        return self.reps.shape[1]

    @property
    def N(self) -> int:
        return self.reps.shape[0]

    @property
    def vertices(self) -> np.ndarray:
        return np.vstack([self.reps, -self.reps])

    @property
    def num_facets(self) -> int:
        return self.normals.shape[0]

    @property
    def num_orbits(self) -> int:
        return self.num_facets // 2

    def antipode(self, k: int) -> int:
        m = self.num_orbits
        return k + m if k < m else k - m

    def signed_ids(self, k: int) -> tuple:
        N = self.N
        return tuple(int(v) + 1 if v < N else -(int(v) - N + 1) for v in self.facet_vertices[k])

    def facet(self, k: int) -> Facet:
        self._check_id(k)
        return Facet(self.signed_ids(k), self.normals[k].copy(), float(self.offsets[k]))

    @property
    def facets(self) -> list[Facet]:
        return [self.facet(k) for k in range(self.num_facets)]

    def facet_keys(self) -> list[tuple]:
        """Sorted signed-id tuple per facet; identifies a facet independently
        of facet numbering."""
        return [tuple(sorted(self.signed_ids(k))) for k in range(self.num_facets)]

    def _check_id(self, k) -> None:
        if not (isinstance(k, (int, np.integer)) and 0 <= k < self.num_facets):
            raise ValueError(f"facet id {k!r} out of range [0, {self.num_facets})")


def _exact_orientation(points) -> Fraction:
    """Exact determinant of the homogeneous (n+1)x(n+1) matrix [p_i, 1]."""
    m = [[Fraction(float(x)) for x in p] + [Fraction(1)] for p in points]
    size = len(m)
    det = Fraction(1)
    for col in range(size):
        piv = next((r for r in range(col, size) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, size):
            f = m[r][col] / m[col][col]
            if f:
                for c in range(col, size):
                    m[r][c] -= f * m[col][c]
    return det


def _facet_planes(pts: np.ndarray, simp: np.ndarray):
    """Unit normal and offset of the hyperplane through each simplex, oriented
    away from the origin. Solves A g = 1 so the plane is <g, x> = 1."""
    A = pts[simp]                                   # (F, n, n)
    g = np.linalg.solve(A, np.ones(A.shape[:2] + (1,)))[..., 0]
    norm = np.linalg.norm(g, axis=1)
    return g / norm[:, None], 1.0 / norm


def build_hull(reps, tol: float = DEGENERACY_TOL, strict: bool = True) -> Polytope:
    """Facet enumeration of conv{+-reps}.

    Qhull produces the triangulated facets; this function then checks general
    position (no vertex within ``tol`` of a foreign facet hyperplane, with
    exact rational escalation of borderline cases), pairs every facet with its
    antipode and makes the pairing exact.

    ``strict=False`` skips the general-position check and triangulates
    non-simplicial faces symmetrically (facets with normals in one half-space
    are kept and mirrored). Volume and edge queries stay meaningful; facet
    counts and anything combinatorial do not.
    """
    reps = check_unit(np.atleast_2d(np.asarray(reps, dtype=float)))
    N, n = reps.shape
    if n < 2:
        raise ValueError("dimension must be >= 2")
    if N < n:
        raise RankDeficientError(f"need at least n={n} representatives, got {N}")
    if np.linalg.matrix_rank(reps) < n:
        raise RankDeficientError("representatives do not span R^n")
    pts = np.vstack([reps, -reps])

    close = cKDTree(pts).query_pairs(1e-12, output_type="ndarray")
    if len(close):
        i, j = (int(v) for v in close[0])
        raise DegenerateInputError(f"coincident signed vertices {i} and {j}", (i, j))

    try:
        qh = ConvexHull(pts)
    except QhullError as exc:  # pragma: no cover - rank is checked above
        raise DegenerateInputError(f"qhull failed: {exc}") from exc
    simp = np.sort(qh.simplices, axis=1)
    normals, offsets = _facet_planes(pts, simp)

    if not np.all(offsets > 0):
        raise DegenerateInputError("origin not strictly interior")
    missing = np.setdiff1d(np.arange(2 * N), simp.ravel())
    if len(missing):
        v = int(missing[0])
        raise DegenerateInputError(f"signed vertex {v} is not extreme", (v,))

    if not strict:
        return _mirror_half(reps, simp, normals, offsets)
    _check_general_position(pts, simp, normals, offsets, tol)

    # pair facets with antipodes; keep one representative per orbit first
    flip = np.where(simp < N, simp + N, simp - N)
    keys = {tuple(row): k for k, row in enumerate(simp)}
    anti = np.empty(len(simp), dtype=np.int64)
    for k, row in enumerate(np.sort(flip, axis=1)):
        a = keys.get(tuple(row))
        if a is None:
            raise InvalidStateError(f"facet {tuple(simp[k])} has no antipodal facet")
        anti[k] = a
    first = [k for k in range(len(simp)) if k < anti[k]]
    order = np.array(first + [int(anti[k]) for k in first], dtype=np.int64)
    m = len(first)
    fv = simp[order]
    nr = normals[order].copy()
    off = offsets[order].copy()
    fv[m:] = np.sort(np.where(fv[:m] < N, fv[:m] + N, fv[:m] - N), axis=1)
    nr[m:] = -nr[:m]
    off[m:] = off[:m]
    return Polytope(reps=reps, facet_vertices=fv, normals=nr, offsets=off)


def _mirror_half(reps, simp, normals, offsets) -> Polytope:
    N = reps.shape[0]
    big = np.abs(normals) > 1e-9
    lead = np.argmax(big, axis=1)
    keep = normals[np.arange(len(normals)), lead] > 0
    fv = simp[keep]
    fv = np.vstack([fv, np.sort(np.where(fv < N, fv + N, fv - N), axis=1)])
    nr = np.vstack([normals[keep], -normals[keep]])
    off = np.concatenate([offsets[keep], offsets[keep]])
    return Polytope(reps=reps, facet_vertices=fv, normals=nr, offsets=off)


def _check_general_position(pts, simp, normals, offsets, tol) -> None:
    F = len(simp)
    for start in range(0, F, 512):
        sl = slice(start, min(start + 512, F))
        S = normals[sl] @ pts.T - offsets[sl, None]
        rows = np.arange(S.shape[0])[:, None]
        S[rows, simp[sl]] = -np.inf
        if np.any(S > tol):
            f, v = np.argwhere(S > tol)[0]
            raise InvalidStateError(f"vertex {v} above facet {tuple(simp[start + f])}")
        for f, v in np.argwhere(S >= -tol):
            tup = tuple(int(x) for x in simp[start + f]) + (int(v),)
            det = _exact_orientation(pts[list(tup)])
            # v must lie strictly on the origin's side of the facet hyperplane
            ref = _exact_orientation(np.vstack([pts[list(tup[:-1])], np.zeros(pts.shape[1])]))
            if det == 0 or (det > 0) != (ref > 0):
                raise DegenerateInputError(
                    f"signed vertices {tup} lie on a common facet hyperplane", tup)


def non_neighbouring(p: Polytope, i: int, j: int) -> bool:
    """True iff facets ``i`` and ``j`` share no vertex."""
    p._check_id(i)
    p._check_id(j)
    if i == j:
        return False
    return not set(p.facet_vertices[i].tolist()) & set(p.facet_vertices[j].tolist())


def polytope_norm(p: Polytope, z) -> np.ndarray | float:
    """Gauge of the polytope: max over facets of <z, f> / h."""
    z = np.asarray(z, dtype=float)
    vals = (z @ p.normals.T) / p.offsets
    out = vals.max(axis=-1)
    return float(out) if out.ndim == 0 else out


class CoveringRadius(NamedTuple):
    exact: float
    certified: float


def covering_radius(p: Polytope) -> CoveringRadius:
    """Covering radius of the vertex set on the sphere.

    ``exact`` is the largest distance from a facet's cap apex (its unit
    normal) to the nearest vertex; spherical Voronoi vertices are exactly those
    apexes. ``certified`` is the bound max_F sqrt(2 - 2 h_F).
    """
    verts = check_unit(p.vertices)
    dist, _ = cKDTree(verts).query(p.normals, k=1)
    certified = float(np.sqrt(np.maximum(2.0 - 2.0 * p.offsets, 0.0)).max())
    return CoveringRadius(float(dist.max()), certified)


def facet_dets(p: Polytope) -> np.ndarray:
    """|det| of every facet's vertex matrix (n! times its cone volume)."""
    return np.abs(np.linalg.det(p.vertices[p.facet_vertices]))


def volume(p: Polytope) -> float:
    """Volume as the sum of cones over facets, sum_F |det(F)| / n!."""
    return float(facet_dets(p).sum() / math.factorial(p.n))


def edges(p: Polytope) -> np.ndarray:
    """Unique vertex pairs (a, b), a < b, spanning an edge.

    For a simplicial polytope every vertex pair of a facet is an edge.
    """
    pairs = np.concatenate([p.facet_vertices[:, [a, b]]
                            for a, b in combinations(range(p.n), 2)])
    return np.unique(pairs, axis=0)


def max_edge_length(p: Polytope) -> float:
    e = edges(p)
    v = p.vertices
    return float(np.linalg.norm(v[e[:, 0]] - v[e[:, 1]], axis=1).max())


def facet_diameters(p: Polytope) -> np.ndarray:
    v = p.vertices[p.facet_vertices]
    d = np.zeros(p.num_facets)
    for a, b in combinations(range(p.n), 2):
        d = np.maximum(d, np.linalg.norm(v[:, a] - v[:, b], axis=1))
    return d


def simplex_inradius(vertices) -> float:
    """Inradius of a (k)-simplex given by k+1 points, measured in its own
    affine hull: 1 / sum_i |grad lambda_i| with lambda the barycentric
    coordinates (|grad lambda_i| is the reciprocal height over ridge i)."""
    a = np.asarray(vertices, dtype=float)
    E = (a[1:] - a[0]).T                              # (n, k)
    if np.linalg.matrix_rank(E, tol=1e-15) < E.shape[1]:
        raise InvalidStateError("simplex is affinely dependent")
    G = np.linalg.pinv(E)                             # rows: gradients of lambda_1..k
    grads = np.vstack([-G.sum(axis=0), G])
    r = 1.0 / np.linalg.norm(grads, axis=1).sum()
    if r < 1e-6:
        warnings.warn(f"ill-conditioned simplex: inradius {r:.3g}", ConditioningWarning,
                      stacklevel=2)
    return float(r)


def facet_inradius(p: Polytope, f: int) -> float:
    """Chebyshev radius of facet ``f`` within its own hyperplane."""
    p._check_id(f)
    verts = p.vertices[p.facet_vertices[f]]
    if len(verts) != p.n:
        raise InvalidStateError(f"facet {f} is not a simplex")
    return simplex_inradius(verts)


# --- file formats -----------------------------------------------------------

def format_polytope(reps) -> str:
    reps = np.asarray(reps, dtype=float)
    lines = [f"{reps.shape[1]} {reps.shape[0]}"]
    lines += [" ".join(f"{x:.17g}" for x in row) for row in reps]
    return "\n".join(lines) + "\n"


def write_polytope(path, reps) -> None:
    with open(path, "w") as fh:
        fh.write(format_polytope(reps))


def read_polytope(path) -> np.ndarray:
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 2:
            raise ValueError(f"{path}: first line must be 'n N'")
        n, N = int(head[0]), int(head[1])
        rows = [line.split() for line in fh if line.strip()]
    if len(rows) != N or any(len(r) != n for r in rows):
        raise ValueError(f"{path}: expected {N} rows of {n} coordinates")
    return np.array([[float(x) for x in r] for r in rows])


def polytope_digest(reps) -> str:
    return hashlib.sha256(format_polytope(reps).encode()).hexdigest()


def format_facets(p: Polytope) -> str:
    out = []
    for k in range(p.num_facets):
        ids = " ".join(str(i) for i in p.signed_ids(k))
        nrm = " ".join(f"{x:.17g}" for x in p.normals[k])
        out.append(f"{ids} {nrm} {p.offsets[k]:.17g}")
    return "\n".join(out) + "\n"
