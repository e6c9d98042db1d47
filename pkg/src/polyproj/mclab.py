"""Monte-Carlo and quadrature checks of the probabilistic statements about
random spherical polytopes.

Everything here runs at desk scale. The random-polytope bound itself is
stated for N >= n^(4n) points, far beyond what can be simulated, so these
reports check the ingredients (cap measures, face counts, determinant
moments, the Beta-product law, net failure) at small N and say so.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, stats
from scipy.special import gammaln

from .certify import compute_alpha, compute_beta, _admissible
from .errors import DegenerateInputError, RankDeficientError
from .geom import as_stream, eval_constants, sample_unit_sphere, sphere_density_constant
from .hull import build_hull, covering_radius

DESK_SCALE = "desk-scale check; the random-polytope bound assumes N >= n^(4n), not simulated"


@dataclass
class McReport:
    quantity: str
    n: int
    N: int
    trials: int
    estimate: float
    dispersion: float
    paper_bound: float
    direction: str          # "<=" or ">="
    seed: int | None
    margin_units: float = 3.0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.direction == "<=":
            return self.estimate + self.margin_units * self.dispersion <= self.paper_bound
        if self.direction == ">=":
            return self.estimate - self.margin_units * self.dispersion >= self.paper_bound
        raise ValueError(f"bad direction {self.direction!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _seed_of(stream) -> int | None:
    return getattr(stream, "seed", None)


def random_dets(n: int, samples: int, stream) -> np.ndarray:
    """det(x_1, ..., x_n) for ``samples`` independent uniform n-tuples."""
    x = sample_unit_sphere(n, samples * n, stream).reshape(samples, n, n)
    return np.linalg.det(x)


def median_of_means(x: np.ndarray, blocks: int = 20) -> tuple[float, float]:
    """Median of block means and its spread (std of block means / sqrt(blocks))."""
    x = np.asarray(x, dtype=float)
    k = len(x) // blocks
    means = x[: k * blocks].reshape(blocks, k).mean(axis=1)
    return float(np.median(means)), float(means.std(ddof=1) / math.sqrt(blocks))


def mc_face_count(n: int, N: int, trials: int, stream) -> McReport:
    """Mean facet count of symmetric hulls of N random pairs vs 2^(n^2) N."""
    if N < 2 * n:
        raise ValueError(f"need N >= 2n, got N={N}, n={n}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    stream = as_stream(stream)
    counts, errors = [], 0
    for t in range(trials):
        try:
            counts.append(build_hull(sample_unit_sphere(n, N, stream.child(t))).num_facets)
        except (DegenerateInputError, RankDeficientError):
            errors += 1
    c = np.array(counts, dtype=float)
    disp = float(c.std(ddof=1) / math.sqrt(len(c))) if len(c) > 1 else 0.0
    return McReport("face_count", n, N, trials, float(c.mean()), disp,
                    float(2 ** (n * n) * N), "<=", _seed_of(stream),
                    extra={"counts": [int(v) for v in counts], "hull_errors": errors,
                           "note": DESK_SCALE})


def mc_det_moment(n: int, samples: int, exponent: float, stream, blocks: int = 20) -> McReport:
    """Median-of-means estimate of E|det(x_1..x_n)|^exponent."""
    if samples < 10_000:
        raise ValueError("samples must be >= 1e4")
    if not -1.0 < exponent <= 0.0:
        raise ValueError(f"exponent must lie in (-1, 0], got {exponent}")
    stream = as_stream(stream)
    d = np.abs(random_dets(n, samples, stream))
    with np.errstate(divide="ignore"):
        vals = d ** exponent
    est, disp = median_of_means(vals, blocks)
    extra = {"blocks": blocks, "exponent": exponent}
    bound = math.inf
    if exponent == -0.5 and 3 <= n <= 20:
        const = eval_constants(n)
        bound = const.m_n_bound
        extra["closed_form"] = const.m_n_closed
    elif exponent == -0.5:
        extra["closed_form"] = math.exp(sum(
            gammaln(i / 2 - 0.25) + gammaln(n / 2) - gammaln(i / 2) - gammaln(n / 2 - 0.25)
            for i in range(1, n)))
    return McReport("det_moment", n, n, samples, est, disp, bound, "<=",
                    _seed_of(stream), extra=extra)


def beta_product_samples(n: int, samples: int, stream) -> np.ndarray:
    """Independent products prod_{i<n} Beta(i/2, (n-i)/2)."""
    rng = as_stream(stream).generator()
    out = np.ones(samples)
    for i in range(1, n):
        out *= rng.beta(i / 2, (n - i) / 2, samples)
    return out


def beta_product_check(n: int, samples: int, stream, beta_n: int | None = None) -> McReport:
    """Two-sample KS between det^2 of random n-tuples and the Beta product.

    ``beta_n`` defaults to ``n``; a different value gives a negative control.
    """
    if samples < 10_000:
        raise ValueError("samples must be >= 1e4")
    stream = as_stream(stream)
    beta_n = n if beta_n is None else beta_n
    d2 = random_dets(n, samples, stream.child(0)) ** 2
    bp = beta_product_samples(beta_n, samples, stream.child(1))
    ks = stats.ks_2samp(d2, bp)
    return McReport("beta_product_ks", n, n, samples, float(ks.pvalue), 0.0, 0.01, ">=",
                    _seed_of(stream), margin_units=0.0,
                    extra={"statistic": float(ks.statistic), "beta_n": beta_n})


def _binomial_half_width(k: int, trials: int) -> float:
    ci = stats.binomtest(k, trials).proportion_ci(confidence_level=0.95, method="exact")
    return float((ci.high - ci.low) / 2)


def mc_net_failure(n: int, N: int, epsilon: float, trials: int, stream) -> McReport:
    """Frequency with which N random pairs fail to form an epsilon-net."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    stream = as_stream(stream)
    fails, radii = 0, []
    for t in range(trials):
        p = build_hull(sample_unit_sphere(n, N, stream.child(t)))
        r = covering_radius(p).exact
        radii.append(r)
        fails += r > epsilon
    freq = fails / trials
    return McReport("net_failure", n, N, trials, freq, _binomial_half_width(fails, trials),
                    1.0 / N, "<=", _seed_of(stream), margin_units=0.0,
                    extra={"failures": int(fails), "epsilon": epsilon,
                           "covering_radius_min": float(min(radii)),
                           "covering_radius_max": float(max(radii)), "note": DESK_SCALE})


def _inner_pieces(a: float, c: float):
    """The inner integral F(t) = int_{-1}^t c (1 - s^2)^((a-1)/2) ds, split as
    F(t) for t <= 0 and F(1 - u) = total - G(u) with G(u) = int_{1-u}^1, so that
    neither side subtracts nearly equal numbers. QUADPACK's algebraic weights
    absorb the endpoint singularities at +-1 for a < 1."""
    e = (a - 1) / 2
    total, _ = integrate.quad(lambda s: 1.0, -1.0, 1.0, weight="alg", wvar=(e, e),
                              epsabs=0.0, epsrel=1e-13)
    total *= c

    def left(t: float) -> float:
        if t <= -1.0:
            return 0.0
        v, _ = integrate.quad(lambda s: (1.0 - s) ** e, -1.0, t, weight="alg", wvar=(e, 0.0),
                              epsabs=0.0, epsrel=1e-13, limit=200)
        return c * v

    def tail(u: float) -> float:
        # int_0^u (w (2 - w))^e dw, the mass within u of the right endpoint
        if u <= 0.0:
            return 0.0
        v, _ = integrate.quad(lambda w: (2.0 - w) ** e, 0.0, u, weight="alg", wvar=(e, 0.0),
                              epsabs=0.0, epsrel=1e-13, limit=200)
        return c * v

    return total, left, tail


def bm_bound(alpha: float, beta: float, c: float, m: int) -> float:
    q = (beta + 1) / (alpha + 1)
    return math.exp(-q * math.log(m) + (beta + 1) / 2 * math.log(2) - math.log(alpha + 1)
                    + q * math.log((alpha + 1) / c) + gammaln(q))


# outer breakpoints in u = 1 - t: for large m the integrand lives at u ~ m^(-2/(alpha+1))
_U_BREAKS = [10.0 ** -k for k in range(0, 61)]


def quadrature_Bm(alpha: float, beta: float, c: float, m: int) -> tuple[float, float]:
    """(B_m, closed-form upper bound) where
    B_m = int_{-1}^1 (1-t^2)^((beta-1)/2) (int_{-1}^t c (1-s^2)^((alpha-1)/2) ds)^m dt.

    Nested adaptive quadrature with a relative tolerance of 1e-10 on every
    outer piece. The half t > 0 is integrated in u = 1 - t over geometric
    pieces, since for large m all of the mass sits extremely close to t = 1.
    Overflow of the inner power returns ``inf``.
    """
    if not (alpha > -1 and beta > -1):
        raise ValueError("alpha and beta must exceed -1")
    if c <= 0:
        raise ValueError("c must be positive")
    if m < 1:
        raise ValueError("m must be >= 1")
    total, left, tail = _inner_pieces(alpha, c)
    e = (beta - 1) / 2

    def f_left(t):
        return (1.0 - t) ** e * left(t) ** m

    def f_right(u):          # weight u^e supplied by QUADPACK on the innermost piece
        return (2.0 - u) ** e * (total - tail(u)) ** m

    def f_right_full(u):
        return (u * (2.0 - u)) ** e * (total - tail(u)) ** m

    opts = dict(epsabs=0.0, epsrel=1e-10, limit=500)
    with np.errstate(over="ignore"), _quiet():
        try:
            lo, _ = integrate.quad(f_left, -1.0, 0.0, weight="alg", wvar=(e, 0.0), **opts)
            hi = 0.0
            for u1, u0 in zip(_U_BREAKS[:-1], _U_BREAKS[1:]):
                hi += integrate.quad(f_right_full, u0, u1, **opts)[0]
            hi += integrate.quad(f_right, 0.0, _U_BREAKS[-1], weight="alg", wvar=(e, 0.0),
                                 **opts)[0]
            value = lo + hi
        except OverflowError:
            value = math.inf
    if not math.isfinite(value):
        value = math.inf
    return float(value), bm_bound(alpha, beta, c, m)


class _quiet:
    def __enter__(self):
        import warnings
        self._w = warnings.catch_warnings()
        self._w.__enter__()
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        warnings.simplefilter("ignore", RuntimeWarning)

    def __exit__(self, *exc):
        return self._w.__exit__(*exc)


def expected_faces_formula(n: int, N: int) -> float:
    """Expected facet count of conv of N uniform points on the sphere in R^n,
    2 c0 C(N, n) B_{N-n} with alpha = n-2, beta = n^2-2n, c the sphere
    inner-product density constant."""
    c0 = math.exp(gammaln((n * n - 2 * n + 2) / 2) - gammaln((n * n - 2 * n + 1) / 2)) / math.sqrt(math.pi)
    val, _ = quadrature_Bm(n - 2, n * n - 2 * n, sphere_density_constant(n), N - n)
    return 2 * c0 * math.comb(N, n) * val


def default_thresholds(n: int, N: int) -> dict:
    """Default event thresholds (iii) and (iv) of the random-polytope argument."""
    log_a = math.log(N) + math.log(n - 1) + n / 4
    t3 = -2 * (log_a + math.log(math.comb(N, n)))
    t4 = -2 * (log_a + math.log(math.comb(2 ** (n * n) * N * N, n)))
    return {"vertex_det": math.exp(t3), "facet_det": math.exp(t4)}


def _facet_tuple_inner_products(p, k: int, rng) -> np.ndarray:
    fv, M, n = p.facet_vertices, p.num_orbits, p.n
    out = []
    while len(out) < k:
        tup = rng.integers(0, p.num_facets, size=n)
        if _admissible(fv, M, tup):
            g = p.normals[tup] @ p.normals[tup].T
            out.append(g[np.triu_indices(n, 1)])
    return np.concatenate(out)


def mc_theorem2_events(n: int, N: int, trials: int, stream, thresholds: dict | None = None,
                       uniformity_tuples: int = 2000) -> list[McReport]:
    """Empirical frequencies of the four failure events of the random-polytope
    argument, plus a KS check that normals of admissible facet tuples look
    like independent uniform points (pairwise inner products)."""
    stream = as_stream(stream)
    thr = default_thresholds(n, N)
    if thresholds:
        thr.update(thresholds)
    eps = 1.0 / (4 * n)
    face_cap = 2 ** (n * n) * N * N
    hits = {"net": 0, "faces": 0, "vertex_det": 0, "facet_det": 0}
    inner = []
    per_trial = max(1, -(-uniformity_tuples // trials))
    rng = stream.child(10 ** 6).generator()
    for t in range(trials):
        p = build_hull(sample_unit_sphere(n, N, stream.child(t)))
        hits["net"] += covering_radius(p).exact > eps
        hits["faces"] += p.num_facets > face_cap
        hits["vertex_det"] += compute_alpha(p).value <= thr["vertex_det"]
        b = compute_beta(p)
        hits["facet_det"] += (not b.vacuous) and b.value <= thr["facet_det"]
        if len(inner) * 1 < uniformity_tuples:
            inner.append(_facet_tuple_inner_products(p, per_trial, rng))
    seed = _seed_of(stream)
    reports = []
    for key, label in [("net", "event_i_net_failure"), ("faces", "event_ii_face_count"),
                       ("vertex_det", "event_iii_vertex_det"), ("facet_det", "event_iv_facet_det")]:
        k = int(hits[key])
        reports.append(McReport(label, n, N, trials, k / trials, _binomial_half_width(k, trials),
                                1.0 / N, "<=", seed, margin_units=0.0,
                                extra={"hits": k, "thresholds": thr, "note": DESK_SCALE}))
    sample = np.concatenate(inner)[: uniformity_tuples * n * (n - 1) // 2]
    ref = sample_unit_sphere(n, 2 * len(sample), stream.child(10 ** 6 + 1)).reshape(len(sample), 2, n)
    ref_ip = np.einsum("ij,ij->i", ref[:, 0], ref[:, 1])
    ks = stats.ks_2samp(sample, ref_ip)
    reports.append(McReport("event_iv_normal_uniformity", n, N, trials, float(ks.pvalue), 0.0,
                            0.01, ">=", seed, margin_units=0.0,
                            extra={"statistic": float(ks.statistic), "pairs": int(len(sample))}))
    return reports


def check_probsiec_inequality(N: int) -> bool:
    """3 + ln N < N^(1/4)."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return 3 + math.log(N) < N ** 0.25
