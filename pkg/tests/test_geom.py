import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import gamma

from polyproj import geom
from polyproj.geom import SeededStream


def test_sample_unit_norm_and_determinism():
    v = geom.sample_unit_sphere(3, 1, SeededStream(11))
    assert abs(np.linalg.norm(v[0]) - 1) < 1e-12
    a = geom.sample_unit_sphere(5, 50, SeededStream(4, 2))
    b = geom.sample_unit_sphere(5, 50, SeededStream(4, 2))
    assert np.array_equal(a, b)
    c = geom.sample_unit_sphere(5, 50, SeededStream(4, 3))
    assert not np.array_equal(a, c)


def test_sample_moments():
    x = geom.sample_unit_sphere(3, 100_000, SeededStream(1))
    assert np.all(np.abs(x.mean(axis=0)) < 0.01)
    assert abs((x[:, 0] ** 2).mean() - 1 / 3) < 0.01


def test_sample_rejects_bad_args():
    with pytest.raises(ValueError):
        geom.sample_unit_sphere(1, 3, SeededStream(0))
    with pytest.raises(ValueError):
        geom.sample_unit_sphere(3, 0, SeededStream(0))


def test_child_streams_independent_of_order():
    s = SeededStream(9)
    a = s.child(3).generator().random(4)
    s.child(1).generator().random(100)
    b = s.child(3).generator().random(4)
    assert np.array_equal(a, b)


def test_determinant_basics():
    assert geom.determinant(np.eye(3)) == 1.0
    m = np.array([[1.0, 2, 0], [0, 1, 3], [4, 0, 1]])
    assert geom.determinant(m[[1, 0, 2]]) == pytest.approx(-geom.determinant(m))
    assert geom.determinant(np.array([[1.0, 2, 3], [1, 2, 3], [0, 1, 0]])) == 0.0
    with pytest.raises(ValueError):
        geom.determinant(np.ones((2, 3)))


def test_cap_measure_hemisphere_and_bound():
    assert geom.cap_measure(3, math.sqrt(2)) == pytest.approx(0.5, abs=1e-12)
    lb = geom.cap_measure_lower_bound(3, math.sqrt(2), extended=True)
    assert lb == pytest.approx(1 / math.sqrt(4 * math.pi), rel=1e-12)
    assert lb <= 0.5
    assert geom.cap_measure_lower_bound(3, 0.5) <= geom.cap_measure(3, 0.5)
    assert geom.cap_measure_lower_bound(5, 0.9) <= geom.cap_measure(5, 0.9)
    with pytest.raises(ValueError):
        geom.cap_measure_lower_bound(3, 1.2)


def _cap_area_oracle(n, r):
    # spherical-coordinate oracle: area fraction of {angle <= theta}
    theta = 2 * math.asin(r / 2)
    num, _ = integrate.quad(lambda t: math.sin(t) ** (n - 2), 0, theta)
    den, _ = integrate.quad(lambda t: math.sin(t) ** (n - 2), 0, math.pi)
    return num / den


@pytest.mark.parametrize("n", [3, 4, 5, 8])
@pytest.mark.parametrize("r", [0.1, 0.3, 0.5, 0.9, 1.5])
def test_cap_measure_matches_angular_oracle(n, r):
    assert geom.cap_measure(n, r) == pytest.approx(_cap_area_oracle(n, r), rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("n,r", [(3, 0.5), (4, 0.9), (5, 1.2)])
def test_cap_measure_matches_mc(n, r):
    x = geom.sample_unit_sphere(n, 400_000, SeededStream(5, n))
    hits = (x[:, 0] >= 1 - r * r / 2).astype(float)
    p, sd = hits.mean(), hits.std() / math.sqrt(len(hits))
    assert abs(geom.cap_measure(n, r) - p) <= 3 * sd + 1e-6


def test_cap_measure_n4_small_radius_mc():
    x = geom.sample_unit_sphere(4, 1_000_000, SeededStream(6))
    hits = (x[:, 0] >= 1 - 0.005).astype(float)
    sd = math.sqrt(hits.mean() * (1 - hits.mean()) / len(hits))
    assert abs(geom.cap_measure(4, 0.1) - hits.mean()) <= 3 * sd


def test_constants_n3():
    c = geom.eval_constants(3)
    assert c.c_thm1 == pytest.approx(4 / 15, rel=1e-14)
    assert c.m_n_closed == pytest.approx(2.3964, abs=2e-4)
    assert c.m_n_bound == pytest.approx(2 * math.exp(0.75), rel=1e-14)
    assert c.m_n_closed < c.m_n_bound
    assert c.k_n <= 192 and c.k_n_bound == pytest.approx(192)
    assert c.d == pytest.approx(1 / 6)


@pytest.mark.parametrize("n", range(3, 21))
def test_constants_positive_and_consistent(n):
    c = geom.eval_constants(n)
    for k, v in c.as_dict().items():
        if not k.startswith("log") and k != "n":
            assert math.isfinite(v) and v > 0, k
    direct = 2 ** (1.5 * n - 2) * n ** (n - 4) / (5 * math.sqrt(n - 1))
    assert c.c_thm1 == pytest.approx(direct, rel=1e-12)
    # Gamma-product closed form against direct Gamma evaluation
    direct_m = np.prod([gamma(i / 2 - 0.25) * gamma(n / 2) / (gamma(i / 2) * gamma(n / 2 - 0.25))
                        for i in range(1, n)])
    assert c.m_n_closed == pytest.approx(direct_m, rel=1e-10)
    assert c.m_n_closed < c.m_n_bound
    assert c.k_n <= c.k_n_bound


def test_constants_domain():
    with pytest.raises(ValueError):
        geom.eval_constants(2)
    with pytest.raises(ValueError):
        geom.eval_constants(21)


def test_s_threshold_values():
    assert geom.s_threshold(3, 1.0) == pytest.approx(4.0)
    assert geom.s_threshold(3, 0.5) == pytest.approx(1.0)


@given(n=st.integers(3, 12), alpha=st.floats(1e-8, 1.0), beta=st.floats(1e-8, 1.0))
def test_s_threshold_identity(n, alpha, beta):
    c = geom.eval_constants(n).c_thm1
    s = geom.s_threshold(n, alpha)
    assert 5 * c * alpha ** 2 * beta / s == pytest.approx(beta / n, rel=1e-10)


def test_regular_simplex_volume():
    assert geom.regular_simplex_volume(1, 0.7) == pytest.approx(0.7)
    assert geom.regular_simplex_volume(2, 2.0) == pytest.approx(math.sqrt(3))
    # Cayley-Menger oracle for the unit tetrahedron
    cm = np.ones((5, 5)) - np.eye(5)
    cm[0, 0] = 0
    v2 = np.linalg.det(cm) / 288
    assert geom.regular_simplex_volume(3, 1.0) == pytest.approx(math.sqrt(v2))
    assert geom.regular_simplex_volume(3, 1.0) == pytest.approx(math.sqrt(2) / 12)


def test_gamma_ratio_examples():
    (lo, r, hi), = geom.gamma_ratio_sweep([1.0])
    assert r == pytest.approx(1 / 0.886226925, rel=1e-8) and lo <= r <= hi
    (lo, r, hi), = geom.gamma_ratio_sweep([0.25])
    assert r == pytest.approx(gamma(1.25) / gamma(0.75), rel=1e-12) and lo <= r <= hi
    assert abs(r - 0.73965) < 5e-5
    (lo, r, hi), = geom.gamma_ratio_sweep([100.0])
    # sqrt(100.5) - 10 = 0.02494: the bracket width at x = 100 is just under 0.025
    assert lo <= r <= hi and hi - lo < 0.025


@settings(max_examples=200)
@given(x=st.floats(1e-3, 1e6))
def test_gamma_ratio_bracketed(x):
    (lo, r, hi), = geom.gamma_ratio_sweep([x])
    assert lo <= r * (1 + 1e-13) and r <= hi * (1 + 1e-13)


def test_inradius_bound_matches_threshold_chain():
    # s = (alpha / n) * inradius bound at d = 1/(2n)
    n, a = 4, 0.3
    d = 1 / (2 * n)
    assert geom.s_threshold(n, a) == pytest.approx(a / (n * d) * geom.inradius_lower_bound(n, a, d))
