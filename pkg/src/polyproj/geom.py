"""Vector and determinant primitives, reproducible sphere sampling, special
functions and the named constants of the projection bounds.

Points on the sphere are plain ``numpy`` arrays: a single unit vector has
shape ``(n,)`` and a batch has shape ``(count, n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SeededStream:
    """A named, reproducible random stream.

    Identical ``(seed, stream_id, path)`` always yields the same draws; the
    underlying generator is PCG64 seeded through ``SeedSequence`` so results
    do not depend on platform or on the order streams are created in.
    """

    seed: int
    stream_id: int = 0
    path: tuple = field(default=())

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, k: int) -> "SeededStream":
        """Independent sub-stream number ``k`` (used for per-trial streams)."""
        return SeededStream(self.seed, self.stream_id, self.path + (int(k),))


def as_stream(stream) -> SeededStream:
    if isinstance(stream, SeededStream):
        return stream
    if isinstance(stream, (int, np.integer)):
        return SeededStream(int(stream))
    raise TypeError(f"expected SeededStream or int seed, got {type(stream).__name__}")


def normalize(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def check_unit(x: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Return ``x`` as a float array, raising ``ValueError`` if any row is off
    the unit sphere by more than ``tol``."""
    x = np.asarray(x, dtype=float)
    err = np.abs(np.linalg.norm(x, axis=-1) - 1.0)
    if np.any(err > tol):
        raise ValueError(f"vector off the unit sphere by {float(np.max(err)):.3g} (tol {tol:g})")
    return x


def sample_unit_sphere(n: int, count: int, stream) -> np.ndarray:
    """Draw ``count`` independent uniform points on the unit sphere in R^n.

    Standard Gaussian vectors are normalized, which is exactly rotation
    invariant. Returns an array of shape ``(count, n)``.
    """
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = as_stream(stream).generator()
    x = rng.standard_normal((count, n))
    return normalize(x)


def determinant(rows) -> float:
    """Determinant via LAPACK partial-pivot LU; singular input gives 0.0."""
    a = np.asarray(rows, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"determinant needs a square matrix, got shape {a.shape}")
    return float(np.linalg.det(a))


def sphere_density_constant(n: int) -> float:
    """Normalizer c of the density c (1 - s^2)^((n-3)/2) of <u, X> for X
    uniform on the sphere in R^n."""
    return math.exp(gammaln(n / 2) - gammaln((n - 1) / 2)) / math.sqrt(math.pi)


def cap_measure(n: int, r: float) -> float:
    """Normalized surface measure of the cap {y : ||x - y|| <= r}.

    The cap is {<x, y> >= 1 - r^2/2}; its measure is the 1-D integral of the
    inner-product density from 1 - r^2/2 to 1 (QUADPACK, abs. tol 1e-10).
    """
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got {n}")
    if not 0.0 < r < 2.0:
        raise ValueError(f"cap radius must lie in (0, 2), got {r}")
    c = sphere_density_constant(n)
    e = (n - 3) / 2
    lo = 1.0 - r * r / 2.0
    # weight (1 - s)^e handled analytically by QAWS; (1 + s)^e is smooth on [lo, 1]
    val, _ = integrate.quad(lambda s: (1.0 + s) ** e, lo, 1.0, weight="alg", wvar=(0.0, e),
                            epsabs=1e-12, epsrel=1e-12, limit=200)
    return float(min(max(c * val, 0.0), 1.0))


def cap_measure_lower_bound(n: int, r: float, extended: bool = False) -> float:
    """Lower bound (2 pi (n-1))^(-1/2) (r / sqrt 2)^(n-1) on the cap measure.

    Stated for 0 < r < 1; ``extended=True`` admits r up to sqrt(2), the range
    the underlying angular argument actually covers.
    """
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got {n}")
    hi = math.sqrt(2.0) if extended else 1.0
    if not (0.0 < r < 1.0 or (extended and 0.0 < r <= hi)):
        raise ValueError(f"r={r} outside (0, 1); pass extended=True for r <= sqrt(2)")
    return (r / math.sqrt(2.0)) ** (n - 1) / math.sqrt(2.0 * math.pi * (n - 1))


@dataclass(frozen=True)
class ConstantsRecord:
    n: int
    c_thm1: float
    c_thm2: float
    c_thm2_recomposed: float
    k_n: float
    k_n_bound: float
    m_n_closed: float
    m_n_bound: float
    d: float
    log_c_thm1: float
    log_c_thm2: float
    log_c_thm2_recomposed: float
    log_k_n: float
    log_m_n_closed: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def log_c_thm1(n: int) -> float:
    return ((1.5 * n - 2) * math.log(2) + (n - 4) * math.log(n)
            - math.log(5) - 0.5 * math.log(n - 1))


def log_m_n(n: int) -> float:
    """log of E|det(x_1..x_n)|^(-1/2) via its Gamma product."""
    return sum(gammaln(i / 2 - 0.25) + gammaln(n / 2) - gammaln(i / 2) - gammaln(n / 2 - 0.25)
               for i in range(1, n))


def eval_constants(n: int) -> ConstantsRecord:
    """All named constants for dimension ``3 <= n <= 20``.

    ``c_thm2`` is the random-polytope constant as printed; the product
    ``c_thm1 * (n-1)^-6 * e^(-3n/2)`` that composing the general bound with the
    random-polytope choices of alpha and beta actually produces is reported
    alongside it as ``c_thm2_recomposed`` (it multiplies the bound, where
    ``c_thm2`` divides it).
    """
    if not 3 <= n <= 20:
        raise ValueError(f"n must satisfy 3 <= n <= 20, got {n}")
    lc1 = log_c_thm1(n)
    lc2 = (2 * math.log(n) + 0.5 * math.log(n - 1) - math.log(5) - (n / 2) * math.log(2)
           - (n - 1) * math.log(n) + 6 * math.log(n - 1) + 1.5 * n)
    lrec = lc1 - 6 * math.log(n - 1) - 1.5 * n
    lk = (n * math.log(2) + (n / 2 - 1) * math.log(math.pi) - math.log(n) - 2 * math.log(n - 1)
          + gammaln((n * n - 2 * n + 2) / 2) - gammaln((n * n - 2 * n + 1) / 2)
          + (n - 1) * (gammaln((n + 1) / 2) - gammaln(n / 2)))
    lkb = n * math.log(4) + math.log(n - 1) + (n - 1) / 2 * math.log(n / 2)
    lm = log_m_n(n)
    return ConstantsRecord(
        n=n,
        c_thm1=math.exp(lc1),
        c_thm2=math.exp(lc2),
        c_thm2_recomposed=math.exp(lrec),
        k_n=math.exp(lk),
        k_n_bound=math.exp(lkb),
        m_n_closed=math.exp(lm),
        m_n_bound=math.exp(n / 4) * (n - 1),
        d=1.0 / (2 * n),
        log_c_thm1=lc1,
        log_c_thm2=lc2,
        log_c_thm2_recomposed=lrec,
        log_k_n=lk,
        log_m_n_closed=lm,
    )


def s_threshold(n: int, alpha: float, d: float | None = None) -> float:
    """Good/bad facet depth threshold 2^(n/2-1) alpha^2 / (n^2 sqrt(n-1) d^(n-1)).

    ``d`` is the facet diameter bound, 1/(2n) unless given.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if d is None:
        d = 1.0 / (2 * n)
    return 2 ** (n / 2 - 1) * alpha ** 2 / (n ** 2 * math.sqrt(n - 1) * d ** (n - 1))


def inradius_lower_bound(n: int, alpha: float, d: float) -> float:
    """Lower bound 2^(n/2-1) alpha / (n sqrt(n-1) d^(n-2)) on every facet
    inradius, for facets of diameter at most ``d`` with |det| >= alpha."""
    return 2 ** (n / 2 - 1) * alpha / (n * math.sqrt(n - 1) * d ** (n - 2))


def regular_simplex_volume(k: int, edge: float) -> float:
    """k-volume of the regular k-simplex with the given edge length."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if edge <= 0:
        raise ValueError(f"edge must be positive, got {edge}")
    return math.sqrt(k + 1) / (math.factorial(k) * 2 ** (k / 2)) * edge ** k


def gamma_ratio_sweep(x_grid: Sequence[float]) -> list[tuple[float, float, float]]:
    """(sqrt(x), Gamma(x+1)/Gamma(x+1/2), sqrt(x+1/2)) for each grid point."""
    out = []
    for x in x_grid:
        x = float(x)
        if not x > 0:
            raise ValueError(f"grid points must be positive, got {x}")
        ratio = math.exp(gammaln(x + 1) - gammaln(x + 0.5))
        out.append((math.sqrt(x), ratio, math.sqrt(x + 0.5)))
    return out
