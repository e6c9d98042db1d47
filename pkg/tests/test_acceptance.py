"""Acceptance gate: criteria 1-13, each at its stated tolerance and runtime
budget. Every test records one PASS/FAIL line; the lines are printed in the
terminal summary (and when run as a script)."""
import itertools
import math
import time

import numpy as np
import pytest

from polyproj import mclab
from polyproj.certify import certify, check_lemma2
from polyproj.geom import (SeededStream, cap_measure, cap_measure_lower_bound,
                           gamma_ratio_sweep, sample_unit_sphere)
from polyproj.hull import build_hull, max_edge_length, volume
from polyproj.projnorm import hyperplane_sweep, min_projection_norm
from polyproj.search3d import SearchConfig, feasible_start, search

RESULTS = {}


def record(k, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    RESULTS[k] = (ok, f"{detail}; {elapsed:.1f}s of {budget:g}s budget")
    assert ok, RESULTS[k][1]


def summary_lines():
    return [f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} - {d}"
            for k, (ok, d) in sorted(RESULTS.items())]


def test_criterion_01_injected_certificate():
    t = time.perf_counter()
    c = certify(None, n=3, alpha=5.303e-7, beta=1.244e-7)
    ok = 9.31e-21 <= c.excess <= 9.35e-21
    record(1, ok, f"bound - 1 = {c.excess:.4e}", time.perf_counter() - t, 1)


def test_criterion_02_facet_identity():
    t = time.perf_counter()
    s = SeededStream(2002)
    counts = [build_hull(sample_unit_sphere(3, 100, s.child(k))).num_facets for k in range(50)]
    record(2, set(counts) == {396}, f"facet counts {sorted(set(counts))}",
           time.perf_counter() - t, 30)


def test_criterion_03_face_count_4d():
    t = time.perf_counter()
    r = mclab.mc_face_count(4, 50, 50, SeededStream(2003))
    bound = 2 ** 16 * 50
    ok = r.estimate + 3 * r.dispersion < bound
    record(3, ok, f"mean {r.estimate:.1f} +- {r.dispersion:.2f} vs {bound}",
           time.perf_counter() - t, 600)


def test_criterion_04_det_moment():
    t = time.perf_counter()
    r = mclab.mc_det_moment(3, 100_000, -0.5, SeededStream(2004))
    ok = abs(r.estimate - 2.3964) <= 0.1 * 2.3964 and r.estimate < 4.2340
    record(4, ok, f"median-of-means {r.estimate:.4f} (closed form 2.3964, bound 4.2340)",
           time.perf_counter() - t, 60)


def test_criterion_05_beta_product():
    t = time.perf_counter()
    pos = mclab.beta_product_check(3, 50_000, SeededStream(2005))
    neg = mclab.beta_product_check(3, 50_000, SeededStream(2005), beta_n=4)
    ok = pos.estimate >= 0.01 and neg.estimate < 0.01
    record(5, ok, f"KS p = {pos.estimate:.3f}, negative control p = {neg.estimate:.2e}",
           time.perf_counter() - t, 120)


def test_criterion_06_bm_grid():
    t = time.perf_counter()
    grid = list(itertools.product([-0.5, 0, 1, 3, 8], [-0.5, 0, 1, 3, 8], [0.1, 1, 10],
                                  [1, 10, 100, 1000]))
    bad = []
    for a, b, c, m in grid:
        v, bound = mclab.quadrature_Bm(a, b, c, m)
        if not v <= bound:
            bad.append((a, b, c, m))
    v1, b1 = mclab.quadrature_Bm(1, 1, 0.5, 1)
    anchor = abs(v1 - 1) <= 1e-8 and b1 == pytest.approx(4.0)
    record(6, not bad and anchor,
           f"{len(grid) - len(bad)}/{len(grid)} grid points satisfy value <= bound "
           f"(first violation {bad[:1]}); B_1(1,1,1/2) = {v1:.10f}, bound {b1:g}",
           time.perf_counter() - t, 300)


def test_criterion_07_cap_lower_bound():
    t = time.perf_counter()
    pairs = [(n, r) for n in (3, 4, 5, 8) for r in (0.1, 0.3, 0.5, 0.9)]
    ok = all(cap_measure_lower_bound(n, r) <= cap_measure(n, r) for n, r in pairs)
    hemi = cap_measure(3, math.sqrt(2))
    ok = ok and abs(hemi - 0.5) <= 1e-12
    record(7, ok, f"16 (n, r) pairs bounded; hemisphere {hemi!r}", time.perf_counter() - t, 10)


def test_criterion_08_gamma_ratio():
    t = time.perf_counter()
    rows = gamma_ratio_sweep(np.logspace(-1, 4, 200))
    ok = all(lo <= r <= hi for lo, r, hi in rows)
    record(8, ok, "200-point log grid bracketed", time.perf_counter() - t, 1)


def _zoom_grid_min(p, v, radius=4.0, points=1000, levels=4, shrink=50.0):
    """Brute-force min of ||I - w v^T|| over w = v + a e + b f by repeated
    10^6-point grids, each centered on the previous grid minimizer."""
    e, f = np.linalg.svd(v[None, :])[2][1:3]
    G = p.normals / p.offsets[:, None]
    A = (p.reps @ G.T).ravel()
    B = np.repeat(p.reps @ v, G.shape[0])
    Gv, Ge, Gf = (np.tile(G @ x, p.N) for x in (v, e, f))
    # every constraint is affine in (a, b): A - B (Gv + a Ge + b Gf)
    coef = np.vstack([A - B * Gv, -B * Ge, -B * Gf])
    ca = cb = 0.0
    best = math.inf
    for _ in range(levels):
        ax = np.linspace(ca - radius, ca + radius, points)
        bx = np.linspace(cb - radius, cb + radius, points)
        lv_best, lv_arg = math.inf, None
        for i0 in range(0, points, 100):
            a, b = np.meshgrid(ax[i0:i0 + 100], bx, indexing="ij")
            X = np.column_stack([np.ones(a.size), a.ravel(), b.ravel()])
            vals = (X @ coef).max(axis=1)
            j = int(vals.argmin())
            if vals[j] < lv_best:
                lv_best, lv_arg = float(vals[j]), (X[j, 1], X[j, 2])
        best = min(best, lv_best)
        ca, cb = lv_arg
        radius /= shrink
    return best


def test_criterion_09_lp_oracle():
    t = time.perf_counter()
    oct_ = build_hull(np.eye(3))
    r0 = min_projection_norm(oct_, [1.0, 0, 0])
    ok = abs(r0.min_norm - 1) <= 1e-9
    s = SeededStream(2009)
    gaps = []
    for k in range(10):
        p = build_hull(sample_unit_sphere(3, 20, s.child(k)))
        v = sample_unit_sphere(3, 1, s.child(100 + k))[0]
        lp = min_projection_norm(p, v)
        g = _zoom_grid_min(p, v)
        gaps.append(abs(g - lp.min_norm))
        ok = ok and lp.lp_status == "optimal"
    ok = ok and max(gaps) <= 1e-6
    record(9, ok, f"cross-polytope {r0.min_norm!r}; max |grid - LP| = {max(gaps):.2e} "
           f"over 10 polytopes", time.perf_counter() - t, 600)


def test_criterion_10_certified_sweep():
    t = time.perf_counter()
    cfg = SearchConfig(N=434)
    reps, p = feasible_start(434, SeededStream(2010), cfg)
    cert = certify(p, use_3d_alternative=True)
    rep = hyperplane_sweep(p, cert, 100, SeededStream(2011), tol=1e-9)
    norms = [r.min_norm for r in rep.results]
    ok = (cert.valid and cert.alpha > 0 and cert.beta > 0 and rep.violations == 0
          and min(norms) >= 1 - 1e-9 and min(norms) >= cert.bound - 1e-9)
    record(10, ok, f"valid={cert.valid}, alpha={cert.alpha:.3e}, beta={cert.beta:.3e}, "
           f"bound-1={cert.excess:.3e}; min over 100 hyperplanes {min(norms):.6f}, "
           f"violations {rep.violations}", time.perf_counter() - t, 3600)


def test_criterion_11_search_determinism():
    t = time.perf_counter()
    runs = []
    for _ in range(2):
        cfg = SearchConfig(N=434, iterations=100, restarts=2, seed=2011)
        runs.append(search(cfg))
    a, b = runs
    p = a.polytope
    ok = (a.objective == b.objective and np.array_equal(a.polytope.reps, b.polytope.reps)
          and volume(p) > 4 and max_edge_length(p) < 0.25
          and a.alpha > 0 and a.beta > 0 and a.certificate.valid)
    record(11, ok, f"objectives {a.objective!r} / {b.objective!r}; volume {volume(p):.4f}, "
           f"max edge {max_edge_length(p):.4f}", time.perf_counter() - t, 4 * 1800)


def test_criterion_12_det_inner_product():
    t = time.perf_counter()
    s = SeededStream(2012)
    total, held = 0, 0
    for n in (3, 4, 5, 6):
        k = 25_000
        xs = sample_unit_sphere(n, k * n, s.child(n)).reshape(k, n, n)
        vs = sample_unit_sphere(n, k, s.child(10 + n))
        alpha = np.abs(np.linalg.det(xs))
        lhs = np.abs(np.einsum("kij,kj->ki", xs, vs)).max(axis=1)
        held += int(np.sum(lhs >= alpha / n))
        total += k
    # the scalar entry point agrees on a subsample
    assert all(check_lemma2(xs[i], vs[i], abs(np.linalg.det(xs[i]))) for i in range(100))
    record(12, held == total, f"{held}/{total} instances satisfy the conclusion",
           time.perf_counter() - t, 60)


def test_criterion_13_net_covering():
    t = time.perf_counter()
    arith = mclab.check_probsiec_inequality(3 ** 12) and not mclab.check_probsiec_inequality(100)
    r = mclab.mc_net_failure(3, 2000, 1 / 12, 200, SeededStream(2013))
    fails = r.extra["failures"]
    record(13, arith and fails == 0,
           f"inequality at 3^12: True, at 100: False; net failures {fails}/200 "
           f"(covering radius {r.extra['covering_radius_min']:.4f}.."
           f"{r.extra['covering_radius_max']:.4f} vs 1/12 = 0.0833)",
           time.perf_counter() - t, 1200)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(summary_lines()))
