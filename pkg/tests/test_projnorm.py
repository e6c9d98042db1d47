import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyproj.certify import certify
from polyproj.geom import SeededStream, sample_unit_sphere
from polyproj.hull import build_hull
from polyproj.projnorm import (_top, classify_faces, facet_hyperplane_margin, hyperplane_sweep,
                               min_projection_norm, projection_operator_norm)


def _key_index(p, key):
    return p.facet_keys().index(tuple(sorted(key)))


def grid_norm_min(p, v, radius, k):
    """Brute-force min of ||I - w v^T|| over a k x k grid of w = v + a e + b f."""
    e, f = np.linalg.svd(v[None, :])[2][1:3]
    G = p.normals / p.offsets[:, None]
    A = (p.reps @ G.T).ravel()
    B = np.repeat(p.reps @ v, G.shape[0])
    Gv, Ge, Gf = G @ v, G @ e, G @ f
    Gv, Ge, Gf = (np.tile(x, p.N) for x in (Gv, Ge, Gf))
    ax = np.linspace(-radius, radius, k)
    a, b = np.meshgrid(ax, ax, indexing="ij")
    a, b = a.ravel(), b.ravel()
    best = math.inf
    for s in range(0, len(a), 20_000):
        vals = A[None, :] - B[None, :] * (Gv[None, :] + a[s:s + 20_000, None] * Ge[None, :]
                                          + b[s:s + 20_000, None] * Gf[None, :])
        best = min(best, vals.max(axis=1).min())
    return best


def test_top_helper():
    v = np.array([1.0, 5, 5, 2, 5, 0])
    assert _top(v, 2).tolist() == [1, 2]
    assert _top(v, 4).tolist() == [1, 2, 4, 3]
    assert _top(v, 10).tolist() == [1, 2, 4, 3, 0, 5]


def test_operator_norm_cross_polytope(octahedron):
    e1 = np.array([1.0, 0, 0])
    assert projection_operator_norm(octahedron, e1, e1) == pytest.approx(1.0)
    w = np.array([1.0, 0.3, -0.2])
    base = projection_operator_norm(octahedron, e1, w)
    for c in (2.0, -0.5, 7.0):
        assert projection_operator_norm(octahedron, e1, c * w) == pytest.approx(base, rel=1e-12)
    with pytest.raises(ValueError):
        projection_operator_norm(octahedron, e1, [0, 1.0, 0])


def test_operator_norm_near_spherical():
    p = build_hull(sample_unit_sphere(3, 2000, SeededStream(3)))
    for v in sample_unit_sphere(3, 5, SeededStream(4)):
        assert abs(projection_operator_norm(p, v, v) - 1) < 0.01


def test_min_norm_cross_polytope(octahedron):
    r = min_projection_norm(octahedron, [1.0, 0, 0])
    assert r.lp_status == "optimal"
    assert r.min_norm == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=12, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.sampled_from([3, 4]))
def test_min_norm_invariants(seed, n):
    s = SeededStream(seed)
    p = build_hull(sample_unit_sphere(n, 15, s.child(0)))
    v = sample_unit_sphere(n, 1, s.child(1))[0]
    r = min_projection_norm(p, v)
    assert r.lp_status == "optimal"
    assert r.min_norm >= 1 - 1e-9
    assert r.lower_bound <= r.min_norm + 1e-12
    assert r.min_norm - r.lower_bound <= 1e-8
    assert projection_operator_norm(p, v, r.witness_w) == pytest.approx(r.min_norm, abs=1e-8)
    assert abs(r.witness_w @ r.v - 1) < 1e-9
    assert r.active_constraints


def test_min_norm_vs_coarse_grid():
    p = build_hull(sample_unit_sphere(3, 12, SeededStream(17)))
    v = sample_unit_sphere(3, 1, SeededStream(18))[0]
    r = min_projection_norm(p, v)
    g = grid_norm_min(p, v, 3.0, 400)
    # every grid point is a feasible projection, so the grid cannot beat the LP
    assert g >= r.min_norm - 1e-9
    assert g - r.min_norm < 0.05


def test_min_norm_near_spherical():
    p = build_hull(sample_unit_sphere(3, 2000, SeededStream(3)))
    for v in sample_unit_sphere(3, 3, SeededStream(5)):
        r = min_projection_norm(p, v)
        assert 1 - 1e-9 <= r.min_norm <= 1.01


def test_classify_octahedron(octahedron):
    p = octahedron
    f = _key_index(p, (1, 2, 3))
    assert facet_hyperplane_margin(p, f, [0, 0, 1.0]) == pytest.approx(0, abs=1e-12)
    cls = classify_faces(p, [0, 0, 1.0], alpha=1.0)
    assert cls[f].cls == "bad"
    v = np.array([1.0, -1, 0]) / math.sqrt(2)
    # the plane passes through the facet's incenter, so the margin is the inradius
    assert facet_hyperplane_margin(p, f, v) == pytest.approx(math.sqrt(2) / (2 * math.sqrt(3)), abs=1e-9)
    cls = classify_faces(p, v, alpha=1e-3)
    assert cls[f].cls == "good"
    cls = classify_faces(p, np.ones(3) / math.sqrt(3), alpha=1.0)
    assert cls[f].cls == "no-intersection" and math.isnan(cls[f].margin)


def test_classification_consistent_with_threshold():
    p = build_hull(sample_unit_sphere(3, 40, SeededStream(2)))
    v = sample_unit_sphere(3, 1, SeededStream(6))[0]
    from polyproj.geom import s_threshold
    a = 0.01
    s = s_threshold(3, a)
    for fc in classify_faces(p, v, a):
        if fc.cls == "good":
            assert fc.margin >= s
        elif fc.cls == "bad":
            assert 0 <= fc.margin < s
        else:
            sv = p.vertices[p.facet_vertices[fc.facet]] @ v
            assert sv.min() > 0 or sv.max() < 0


def test_sweep_reports():
    p = build_hull(sample_unit_sphere(3, 60, SeededStream(1)))
    valid = certify(p, epsilon=2.0)
    assert valid.valid
    rep = hyperplane_sweep(p, valid, 10, SeededStream(2))
    assert rep.violations == 0 and not rep.advisory_only and rep.min_norm_min >= 1 - 1e-9
    d = rep.to_dict()
    assert len(d["results"]) == 10 and set(d["results"][0]) == {"v", "min_norm", "lp_status"}
    invalid = certify(p)
    assert not invalid.valid
    assert hyperplane_sweep(p, invalid, 2, SeededStream(2)).advisory_only
    empty = hyperplane_sweep(p, valid, 0, SeededStream(2))
    assert empty.count == 0 and empty.results == [] and empty.violations == 0
