import math

import numpy as np
import pytest

from ulamfloat.geometry import BodyHandle
from ulamfloat.weights import WeightFunction, eval_weight, total_mass

from conftest import random_direction


def test_constant_eval(disc):
    w = WeightFunction.constant(3.0)
    assert eval_weight(w, disc, np.array([0.1, -0.2])) == 3.0
    assert w.is_log_concave is True


def test_eval_outside_rejected(disc):
    w = WeightFunction.constant(1.0)
    with pytest.raises(ValueError):
        eval_weight(w, disc, np.array([2.0, 0.0]))


def test_phi_p_is_one_at_p1(disc, ellipse):
    assert WeightFunction.phi_p(1.0, disc).constant_value == pytest.approx(1.0)
    w = WeightFunction.phi_p(1.0, ellipse)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-0.4, 0.4, size=(20, 2))
    pts = pts[[ellipse.contains(p) for p in pts]]
    assert np.allclose(w.eval_many(pts), 1.0, atol=1e-12)


def test_phi_p_ball_value():
    # centered ball radius rho: value rho^(n^2 (p-1)/(n+p))
    rho, p, n = 2.0, 2.0, 2
    w = WeightFunction.phi_p(p, BodyHandle.ball([0.0, 0.0], rho))
    assert w.constant_value == pytest.approx(rho ** (n * n * (p - 1) / (n + p)), rel=1e-12)
    assert w.constant_value == pytest.approx(rho, rel=1e-12)


def test_phi_p_constant_on_ball_boundary():
    body = BodyHandle.ball([0.0, 0.0, 0.0], 1.3)
    w = WeightFunction.phi_p(2.5, body)
    bq = body.boundary_quadrature(128)
    vals = w.eval_many(bq.points)
    assert vals.max() - vals.min() <= 1e-10


def test_phi_p_polytope_rejected(csquare):
    with pytest.raises(ValueError):
        WeightFunction.phi_p(2.0, csquare)


def test_phi_p_ellipsoid_boundary_value(ellipse):
    # at (0, 2): kappa = det(A)/||A x||^3 = 0.25/0.125 = 2, <x,N> = 2
    p, n = 2.0, 2
    e_dot = n * (n + 1) * (p - 1) / (2 * (n + p))
    e_kap = n * (p - 1) / (2 * (n + p))
    w = WeightFunction.phi_p(p, ellipse)
    want = 2.0 ** e_dot / 2.0 ** e_kap
    assert w(np.array([0.0, 2.0])) == pytest.approx(want, rel=1e-10)
    # radial extension: constant along the ray to the boundary
    assert w(np.array([0.0, 1.0])) == pytest.approx(want, rel=1e-10)
    assert w(np.array([0.0, 0.2])) == pytest.approx(want, rel=1e-10)


def test_phi_p_collar_extension_matches_boundary(ellipse):
    w_rad = WeightFunction.phi_p(2.0, ellipse, extension="radial")
    w_col = WeightFunction.phi_p(2.0, ellipse, extension="collar")
    bq = ellipse.boundary_quadrature(64)
    assert np.allclose(w_rad.eval_many(bq.points), w_col.eval_many(bq.points), rtol=1e-9)


def test_total_mass_examples(square01, disc):
    assert total_mass(WeightFunction.constant(1.0), square01) == pytest.approx(1.0)
    assert total_mass(WeightFunction.constant(2.5), disc) == pytest.approx(2.5 * math.pi, rel=1e-12)
    g = WeightFunction.gaussian([0.0, 0.0], 1.0)
    assert total_mass(g, disc) == pytest.approx(2 * math.pi * (1 - math.exp(-0.5)), rel=1e-10)


def test_total_mass_scaling(triangle):
    g = WeightFunction.gaussian([0.0, 0.0], 0.8)
    base = total_mass(g, triangle)

    scaled = WeightFunction(
        "scaled", {}, lambda pts, _b=g.eval_many: 3.0 * _b(pts),
        is_log_concave=True, label="3*gaussian",
    )
    assert total_mass(scaled, triangle) == pytest.approx(3.0 * base, rel=1e-10)
    assert total_mass(WeightFunction.constant(3.0), triangle) == pytest.approx(
        3.0 * total_mass(WeightFunction.constant(1.0), triangle), rel=1e-12)


def test_gaussian_positive_and_continuous(cube3):
    g = WeightFunction.gaussian([0.0, 0.0, 0.0], 1.0)
    rng = np.random.default_rng(1)
    pts = rng.uniform(-0.5, 0.5, size=(100, 3))
    vals = g.eval_many(pts)
    assert np.all(vals > 0)
    # empirical Lipschitz bound on compact probes: |grad| <= max ||x||/sigma^2 * phi <= 0.87
    for _ in range(50):
        x = rng.uniform(-0.5, 0.5, size=3)
        y = x + rng.normal(size=3) * 1e-4
        assert abs(g(x) - g(y)) <= 1.0 * np.linalg.norm(x - y)


def test_weight_json_roundtrip(disc):
    for spec in ({"kind": "constant", "s": 2.0},
                 {"kind": "gaussian", "center": [0.0, 0.0], "sigma": 0.7},
                 {"kind": "phi_p", "p": 2.0}):
        w = WeightFunction.from_json(spec, host=disc)
        back = w.to_json()
        assert back["kind"] == spec["kind"]
    with pytest.raises(ValueError):
        WeightFunction.from_json({"kind": "nope"})
    with pytest.raises(ValueError):
        WeightFunction.from_json({"kind": "phi_p", "p": 2.0})  # host required


def test_log_concavity_flags(disc):
    assert WeightFunction.constant(1.0).is_log_concave is True
    assert WeightFunction.gaussian([0.0, 0.0], 1.0).is_log_concave is True
    assert WeightFunction.phi_p(2.0, disc).is_log_concave is None
