import math

import numpy as np
import pytest

from ulamfloat import caps
from ulamfloat.geometry import BodyHandle
from ulamfloat.weights import WeightFunction, total_mass

from conftest import disc_cut_for_area, disc_segment_area, random_direction


def test_cap_mass_examples(square01, disc, w1):
    assert caps.cap_mass(square01, w1, [1, 0], 0.9) == pytest.approx(0.1, abs=1e-12)
    assert caps.cap_mass(disc, w1, [0.6, 0.8], 0.0) == pytest.approx(math.pi / 2, rel=1e-12)
    d = 0.857
    assert caps.cap_mass(disc, w1, [1, 0], d) == pytest.approx(disc_segment_area(d), rel=1e-10)


def test_cut_height_examples(square01, disc, w1):
    assert caps.cut_height(square01, w1, [1, 0], 0.1) == pytest.approx(0.9, abs=1e-11)
    assert caps.cut_height(disc, w1, [0, 1], math.pi / 2) == pytest.approx(0.0, abs=1e-12)
    d_oracle = disc_cut_for_area(0.1)
    assert caps.cut_height(disc, w1, [1, 0], 0.1) == pytest.approx(d_oracle, abs=1e-11)
    assert d_oracle == pytest.approx(0.857, abs=5e-4)


def test_cut_height_boundary_convention(square01, disc, w1):
    assert caps.cut_height(square01, w1, [1, 0], 0.0) == pytest.approx(1.0)
    assert caps.cut_height(square01, w1, [1, 0], 1.0) == pytest.approx(0.0)
    assert caps.cut_height(disc, w1, [0, 1], 0.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        caps.cut_height(square01, w1, [1, 0], 1.5)
    with pytest.raises(ValueError):
        caps.cut_height(square01, w1, [1, 0], -0.2)


def test_cap_barycenter_examples(square01, disc, w1):
    assert np.allclose(caps.cap_barycenter(square01, w1, [1, 0], 0.9), [0.95, 0.5], atol=1e-12)
    b = caps.cap_barycenter(disc, w1, [0, 1], 0.0)
    assert np.allclose(b, [0.0, 4.0 / (3.0 * math.pi)], atol=1e-12)


def test_cap_barycenter_on_axis_by_symmetry(w1):
    rng = np.random.default_rng(0)
    ball = BodyHandle.ball([0.0, 0.0, 0.0], 1.7)
    for _ in range(10):
        theta = random_direction(rng, 3)
        d = caps.cut_height(ball, w1, theta, 0.4)
        b = caps.cap_barycenter(ball, w1, theta, d)
        # barycenter lies on span(theta)
        assert np.linalg.norm(b - np.dot(b, theta) * theta) <= 1e-10


def test_cap_first_moment_examples(square01, disc, w1):
    assert caps.cap_first_moment(square01, w1, [1, 0], 0.9) == pytest.approx(0.095, abs=1e-12)
    assert caps.cap_first_moment(disc, w1, [0, 1], 0.0) == pytest.approx(2.0 / 3.0, rel=1e-12)


def test_cap_first_moment_equals_mass_times_height(disc, w1):
    d = caps.cut_height(disc, w1, [1, 0], 0.1)
    mass = caps.cap_mass(disc, w1, [1, 0], d)
    bary = caps.cap_barycenter(disc, w1, [1, 0], d)
    assert caps.cap_first_moment(disc, w1, [1, 0], d) == pytest.approx(mass * bary[0], rel=1e-12)


def test_cap_first_moment_mc_oracle(disc, w1):
    # cross-check the delta = 0.1 cap moment against seeded Monte Carlo
    d = caps.cut_height(disc, w1, [1, 0], 0.1)
    exact = caps.cap_moment(disc, w1, [1, 0], d)
    ests = []
    for seed in range(10):
        est, err = caps.cap_moment_mc(disc, w1, [1, 0], d, samples=1_000_000, seed=seed)
        ests.append(est)
    mean = np.mean(ests, axis=0)
    sigma = np.std(ests, axis=0) / math.sqrt(len(ests))
    assert np.all(np.abs(mean - exact) <= 5 * sigma + 1e-6)


def test_monotonicity_in_height(square01, disc, cube3, w1):
    rng = np.random.default_rng(1)
    for body in (square01, disc, cube3):
        theta = random_direction(rng, body.dim)
        lo, hi = caps.support_interval(body, theta)
        ds = np.linspace(lo + 1e-6, hi - 1e-6, 40)
        masses = [caps.cap_mass(body, w1, theta, d) for d in ds]
        assert np.all(np.diff(masses) < 1e-14)


def test_inverse_consistency_100_random(square01, disc, ellipse, cube3, w1):
    rng = np.random.default_rng(2)
    bodies = [square01, disc, ellipse, cube3]
    for i in range(100):
        body = bodies[i % len(bodies)]
        total = total_mass(w1, body)
        theta = random_direction(rng, body.dim)
        delta = total * (0.02 + 0.96 * rng.random())
        d = caps.cut_height(body, w1, theta, delta)
        assert abs(caps.cap_mass(body, w1, theta, d) - delta) <= 1e-9 * total


def test_inverse_consistency_smooth(triangle, cube3):
    rng = np.random.default_rng(3)
    g2 = WeightFunction.gaussian([0.0, 0.0], 1.0)
    g3 = WeightFunction.gaussian([0.0, 0.0, 0.0], 1.0)
    for body, w in ((triangle, g2), (cube3, g3)):
        total = total_mass(w, body)
        for _ in range(10):
            theta = random_direction(rng, body.dim)
            delta = total * (0.05 + 0.9 * rng.random())
            d = caps.cut_height(body, w, theta, delta)
            assert abs(caps.cap_mass(body, w, theta, d) - delta) <= 1e-9 * total


def test_rotation_equivariance(csquare, w1):
    ang = 0.7345
    rot = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    rotated = csquare.apply_linear(rot)
    rng = np.random.default_rng(4)
    for _ in range(20):
        theta = random_direction(rng, 2)
        d1 = caps.cut_height(csquare, w1, theta, 0.2)
        d2 = caps.cut_height(rotated, w1, rot @ theta, 0.2)
        assert d1 == pytest.approx(d2, abs=1e-10)


def test_ellipsoid_reduces_to_mapped_ball(w1):
    rng = np.random.default_rng(5)
    ball = BodyHandle.ball([0.0, 0.0], 1.0)
    A = rng.normal(size=(2, 2))
    T = A / abs(np.linalg.det(A)) ** 0.5  # volume preserving
    ell = ball.apply_linear(T)
    for _ in range(10):
        theta = random_direction(rng, 2)
        d = 0.1 + 0.3 * rng.random()
        w_vec = T.T @ theta
        nw = np.linalg.norm(w_vec)
        mass_ell = caps.cap_mass(ell, w1, theta, d)
        mass_ball = caps.cap_mass(ball, w1, w_vec / nw, d / nw)
        assert mass_ell == pytest.approx(mass_ball, abs=1e-8)
        # barycenters map through T
        b_ell = caps.cap_barycenter(ell, w1, theta, d)
        b_ball = caps.cap_barycenter(ball, w1, w_vec / nw, d / nw)
        assert np.allclose(b_ell, T @ b_ball, atol=1e-8)


def test_grunbaum_bounds_log_concave(triangle, cube3):
    lo, hi = 1.0 / math.e, 1.0 - 1.0 / math.e
    rng = np.random.default_rng(6)
    w1 = WeightFunction.constant(1.0)
    g3 = WeightFunction.gaussian([0.0, 0.0, 0.0], 1.0)
    for body, w in ((triangle, w1), (cube3, w1), (cube3, g3)):
        total = total_mass(w, body)
        for _ in range(8):
            theta = random_direction(rng, body.dim)
            beta = random_direction(rng, body.dim)
            delta = total * (0.1 + 0.5 * rng.random())
            frac, err = caps.cap_halfspace_mass_fraction(body, w, theta, delta, beta)
            assert lo - 1e-9 - 4 * err <= frac <= hi + 1e-9 + 4 * err


def test_grunbaum_bounds_ball_mc(disc, w1):
    lo, hi = 1.0 / math.e, 1.0 - 1.0 / math.e
    rng = np.random.default_rng(7)
    for i in range(4):
        theta = random_direction(rng, 2)
        beta = random_direction(rng, 2)
        frac, err = caps.cap_halfspace_mass_fraction(disc, w1, theta, 0.8, beta, seed=i)
        assert lo - 5 * err <= frac <= hi + 5 * err


def test_cap_cut_record(square01, w1):
    cut = caps.cap_cut(square01, w1, [1, 0], delta=0.1)
    assert cut.d == pytest.approx(0.9, abs=1e-11)
    assert cut.backend == "exact-clip"
    assert cut.mass == pytest.approx(0.1, abs=1e-11)
    assert np.allclose(cut.barycenter, [0.95, 0.5], atol=1e-10)
    with pytest.raises(ValueError):
        caps.cap_cut(square01, w1, [1, 0])
    with pytest.raises(ValueError):
        caps.cap_cut(square01, w1, [1, 0], delta=0.1, d=0.5)


def test_mc_backend_matches_analytic(disc, w1):
    d = 0.3
    exact = caps.cap_mass(disc, w1, [1, 0], d)
    est, err = caps.cap_mass_mc(disc, w1, [1, 0], d, samples=400_000, seed=9)
    assert abs(est - exact) <= 5 * err
    # deterministic for a fixed seed
    est2, err2 = caps.cap_mass_mc(disc, w1, [1, 0], d, samples=400_000, seed=9)
    assert est == est2 and err == err2


def test_high_dim_ball_caps(w1):
    b5 = BodyHandle.ball(np.zeros(5), 1.0)
    total = total_mass(w1, b5)
    d = caps.cut_height(b5, w1, np.eye(5)[0], 0.25 * total)
    assert abs(caps.cap_mass(b5, w1, np.eye(5)[0], d) - 0.25 * total) <= 1e-10 * total
    assert caps.cut_height(b5, w1, np.eye(5)[0], 0.5 * total) == pytest.approx(0.0, abs=1e-12)


def test_zero_mass_barycenter_rejected(disc, w1):
    with pytest.raises(ValueError):
        caps.cap_barycenter(disc, w1, [1, 0], 1.5)
