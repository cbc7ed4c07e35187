import math

import numpy as np
import pytest

from ulamfloat import caps
from ulamfloat import float_bodies as fb
from ulamfloat.asa import ball_shrinkage
from ulamfloat.geometry import BodyHandle, antipodal_grid
from ulamfloat.weights import WeightFunction, total_mass

from conftest import random_direction


def test_ulam_support_examples(square01, disc, w1):
    h, x = fb.ulam_support(square01, w1, [1, 0], 0.1)
    assert h == pytest.approx(0.95, abs=1e-11)
    assert np.allclose(x, [0.95, 0.5], atol=1e-11)
    h2, _ = fb.ulam_support(disc, w1, [0, 1], math.pi / 2)
    assert h2 == pytest.approx(4.0 / (3.0 * math.pi), rel=1e-12)


def test_ulam_support_below_body_support(square01, disc, w1):
    rng = np.random.default_rng(0)
    for body in (square01, disc):
        for _ in range(10):
            theta = random_direction(rng, 2)
            h, _ = fb.ulam_support(body, w1, theta, 0.1)
            assert h < body.support(theta)


def test_ulam_support_small_delta_limit(disc, square01, w1):
    # h -> h_K(theta) as delta -> 0, monotonically
    for body in (disc, square01):
        theta = np.array([0.6, 0.8])
        hk = body.support(theta)
        gaps = []
        for delta in (1e-2, 1e-4, 1e-6):
            h, _ = fb.ulam_support(body, w1, theta, delta)
            gaps.append(hk - h)
        assert gaps[0] > gaps[1] > gaps[2] > 0


def test_build_ulam_disc_is_round(disc, w1):
    approx = fb.build_ulam_body(disc, w1, 0.1, m=128)
    radii = np.linalg.norm(approx.boundary_points, axis=1)
    assert radii.max() - radii.min() <= 1e-8
    assert radii.mean() == pytest.approx(1.0 - ball_shrinkage(1.0, 0.1, 2), rel=1e-10)


def test_build_ulam_square_strictly_convex(csquare, w1):
    approx = fb.build_ulam_body(csquare, w1, 0.1, m=256)
    pts = approx.boundary_points
    # all boundary points distinct
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    assert d.min() > 1e-10
    # each point is the unique maximizer of its own direction
    inner = pts @ approx.directions.T
    for i in range(len(pts)):
        col = inner[:, i]
        best = np.argmax(col)
        assert best == i
        runner = np.partition(col, -2)[-2]
        assert col[i] - runner > 1e-12


def test_ulam_scaling_oracle(w1):
    # cap-barycenter bodies commute with dilation: lam * body at mass delta/lam^n
    ball2 = BodyHandle.ball([0.0, 0.0], 2.0)
    delta = 0.3
    h_big, _ = fb.ulam_support(ball2, w1, [1, 0], delta)
    h_unit, _ = fb.ulam_support(BodyHandle.ball([0.0, 0.0], 1.0), w1, [1, 0], delta / 4.0)
    assert h_big == pytest.approx(2.0 * h_unit, rel=1e-10)
    assert ball_shrinkage(2.0, delta, 2) == pytest.approx(2.0 * ball_shrinkage(1.0, delta / 4.0, 2), rel=1e-10)


def test_floating_support_guard(square01, w1):
    with pytest.raises(ValueError):
        fb.floating_support(square01, w1, [1, 0], 0.6)
    assert fb.floating_support(square01, w1, [1, 0], 0.1) == pytest.approx(0.9, abs=1e-11)


def test_floating_equals_classical_for_const(disc, csquare, w1):
    # with a unit weight the weighted floating body is the convex floating body:
    # same halfspace offsets d(theta, delta) on the grid
    for body in (disc, csquare):
        fbody = fb.build_floating_body(body, w1, 0.05, m=64)
        for i, th in enumerate(fbody.directions):
            assert fbody.support_values[i] == pytest.approx(
                caps.cut_height(body, w1, th, 0.05), abs=1e-12)


def test_floating_emptiness_certificate(w1):
    # a long thin triangle: delta close to half the area empties the body
    thin = BodyHandle.polytope([[0, 0], [10, 0], [0, 0.1]])
    with pytest.raises(fb.EmptyBodyError):
        fb.build_floating_body(thin, w1, 0.49 * thin.volume, m=64)


def test_zp_support_examples(cube3):
    csq = BodyHandle.cube(1.0, 2)
    assert fb.zp_support(csq, 1.0, [1, 0]) == pytest.approx(0.25, abs=1e-9)
    assert fb.zp_support(csq, 2.0, [1, 0]) == pytest.approx(1.0 / (2 * math.sqrt(3)), abs=1e-9)
    assert fb.zp_support(cube3, 1.0, [1, 0, 0]) == pytest.approx(0.25, abs=1e-9)
    assert fb.zp_support(cube3, 2.0, [0, 1, 0]) == pytest.approx(1.0 / (2 * math.sqrt(3)), abs=1e-9)
    vd = BodyHandle.ball([0.0, 0.0], 1.0 / math.sqrt(math.pi))
    r = 1.0 / math.sqrt(math.pi)
    assert fb.zp_support(vd, 2.0, [0.6, 0.8]) == pytest.approx(r / 2.0, rel=1e-9)


def test_zp_support_preconditions(disc):
    with pytest.raises(ValueError):
        fb.zp_support(disc, 2.0, [1, 0])  # volume pi, not 1
    vd = BodyHandle.ball([0.0, 0.0], 1.0 / math.sqrt(math.pi))
    with pytest.raises(ValueError):
        fb.zp_support(vd, 0.5, [1, 0])  # p < 1


def test_sandwich_check_examples(disc, csquare, triangle, w1):
    rep = fb.sandwich_check(disc, w1, 0.05 * disc.volume, m=64)
    assert rep.passed and rep.worst_margin > 0
    rep2 = fb.sandwich_check(csquare, w1, 0.02, m=128)
    assert rep2.passed
    g = WeightFunction.gaussian([0.0, 0.0], 1.0)
    rep3 = fb.sandwich_check(triangle, g, 0.05 * total_mass(g, triangle), m=64)
    assert rep3.passed


def test_sandwich_requires_log_concave_flag(disc):
    w = WeightFunction.phi_p(2.0, disc)
    assert w.is_log_concave is None
    with pytest.raises(ValueError):
        fb.sandwich_check(disc, w, 0.05, m=16)


def test_zp_sandwich_examples():
    vd = BodyHandle.ball([0.0, 0.0], 1.0 / math.sqrt(math.pi))
    rep = fb.zp_sandwich_check(vd, 0.1, m=64)
    assert rep.passed
    cube = BodyHandle.cube(1.0, 3)
    rep2 = fb.zp_sandwich_check(cube, 0.05, m=64)
    assert rep2.passed
    rep3 = fb.zp_sandwich_check(vd, 0.3, m=64)  # still below 1/e
    assert rep3.passed
    with pytest.raises(ValueError):
        fb.zp_sandwich_check(vd, 0.4, m=16)  # above 1/e


def test_symmetry_check_examples(triangle):
    tri = fb.normalized_unit_volume(triangle)
    rep = fb.symmetry_check(tri, 0.3, m=64)
    assert rep.passed
    assert rep.details["max_residual"] <= 1e-10
    rep_half = fb.symmetry_check(tri, 0.5, m=64)
    assert rep_half.passed
    # disc: both sides are radii with the exact ratio delta/(1-delta)
    vd = BodyHandle.ball([0.0, 0.0], 1.0 / math.sqrt(math.pi))
    rep_disc = fb.symmetry_check(vd, 0.25, m=32)
    assert rep_disc.passed


def test_symmetry_check_preconditions(triangle):
    with pytest.raises(ValueError):
        fb.symmetry_check(triangle, 0.3, m=16)  # volume 1/2, off-center


def test_radial_boundary(disc, csquare, w1):
    approx = fb.build_ulam_body(disc, w1, 0.1, m=256)
    r_ref = 1.0 - ball_shrinkage(1.0, 0.1, 2)
    lo, hi = fb.radial_boundary(approx, [1, 0])
    assert lo <= r_ref <= hi + 1e-12
    assert hi - lo <= approx.gap_estimate + 1e-12
    # square: diagonal and axis radii differ (strict convexity)
    ap2 = fb.build_ulam_body(csquare, w1, 0.1, m=1024)
    r_axis = fb.radial_boundary(ap2, [1, 0])
    r_diag = fb.radial_boundary(ap2, [1, 1])
    assert abs(r_axis[0] - r_diag[0]) > 1e-3


def test_radial_refinement_shrinks_gap(csquare, w1):
    gaps = []
    for m in (64, 256):
        ap = fb.build_ulam_body(csquare, w1, 0.1, m=m)
        lo, hi = fb.radial_boundary(ap, [0.6, 0.8])
        gaps.append(hi - lo)
    assert gaps[1] <= gaps[0] / 2.0


def test_gap_estimate_decreases(csquare, w1):
    gaps = [fb.build_ulam_body(csquare, w1, 0.1, m=m).gap_estimate for m in (64, 128, 256)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_origin_outside_rejected(csquare, w1):
    approx = fb.build_ulam_body(csquare, w1, 0.1, m=64)
    shifted = fb.BodyApproximation(
        approx.kind, approx.directions, approx.support_values,
        approx.boundary_points, approx.params, np.array([5.0, 5.0]),
        approx.antipode,
    )
    with pytest.raises(ValueError):
        shifted.radial_bounds(np.array([[1.0, 0.0]]))


def test_volume_difference_concentric_examples(w1):
    ball = BodyHandle.ball([0.0, 0.0, 0.0], 1.0)
    inner = fb.approximation_of_body(BodyHandle.ball([0.0, 0.0, 0.0], 0.5), m=1024)
    lo, hi = fb.volume_difference(ball, inner, resolution=2048)
    exact = (4.0 * math.pi / 3.0) * (1.0 - 0.125)
    assert lo <= exact <= hi

    sq = BodyHandle.cube(1.0, 2)
    half = fb.approximation_of_body(BodyHandle.cube(0.5, 2), m=512)
    lo2, hi2 = fb.volume_difference(sq, half, resolution=512)
    assert lo2 <= 0.75 <= hi2
    assert hi2 - lo2 < 1e-10


def test_volume_difference_disc_ulam(disc, w1):
    approx = fb.build_ulam_body(disc, w1, 0.1, m=1024)
    lo, hi = fb.volume_difference(disc, approx, resolution=1024)
    delta_r = ball_shrinkage(1.0, 0.1, 2)
    exact = math.pi - math.pi * (1.0 - delta_r) ** 2
    assert lo <= exact <= hi
    assert hi - lo <= 1e-3


def test_volume_difference_rejects_outside(disc, w1):
    big = fb.approximation_of_body(BodyHandle.ball([0.0, 0.0], 1.5), m=128)
    with pytest.raises(ValueError):
        fb.volume_difference(disc, big, resolution=128)


def test_inner_outer_volumes_bracket(csquare, w1):
    ap = fb.build_ulam_body(csquare, w1, 0.05, m=256)
    vi, vo = ap.inner_volume(), ap.outer_volume()
    assert vi <= vo
    ap2 = fb.build_ulam_body(csquare, w1, 0.05, m=1024)
    assert (ap2.outer_volume() - ap2.inner_volume()) < (vo - vi)


def test_nesting_in_delta(disc, csquare, triangle, w1):
    rng = np.random.default_rng(8)
    for body in (disc, csquare, triangle):
        total = body.volume
        for _ in range(5):
            theta = random_direction(rng, 2)
            h1, _ = fb.ulam_support(body, w1, theta, 0.1 * total)
            h2, _ = fb.ulam_support(body, w1, theta, 0.3 * total)
            assert h2 < h1 - 1e-10


def test_equivariance_volume_preserving(csquare, w1):
    rng = np.random.default_rng(9)
    A = rng.normal(size=(2, 2))
    T = A / abs(np.linalg.det(A)) ** 0.5
    image = csquare.apply_linear(T)
    for _ in range(10):
        thetap = random_direction(rng, 2)
        pullback = T.T @ thetap
        theta = pullback / np.linalg.norm(pullback)
        _, x = fb.ulam_support(csquare, w1, theta, 0.07)
        _, xp = fb.ulam_support(image, w1, thetap, 0.07)
        assert np.allclose(xp, T @ x, atol=1e-9)


def test_translation_covariance(triangle, w1):
    v = np.array([0.3, -1.2])
    moved = triangle.translate(v)
    rng = np.random.default_rng(10)
    for _ in range(10):
        theta = random_direction(rng, 2)
        _, x = fb.ulam_support(triangle, w1, theta, 0.1)
        _, xm = fb.ulam_support(moved, w1, theta, 0.1)
        assert np.allclose(xm, x + v, atol=1e-10)


def test_approximation_consistency_guard(csquare, w1):
    ap = fb.build_ulam_body(csquare, w1, 0.1, m=64)
    with pytest.raises(ValueError):
        fb.BodyApproximation("ulam", ap.directions, ap.support_values + 1.0,
                             ap.boundary_points, {}, ap.origin)
