"""Cap volume/moment functionals of the halfspace parameter and their derivatives.

For a vector ``a`` with the hyperplane {<x,a> = 1} meeting the body's interior,
the cap functionals are

    delta(a) = vol(body ∩ {<x,a> >= 1}),
    U(a)     = integral of x over the same cap,

and their derivative formulas are hyperplane-section integrals:

    grad delta(a) = (1/||a||) * (section first moment),
    DU(a)         = (1/||a||) * (section second-moment matrix),

which this module evaluates exactly per representation (segments/polygons for
polytopes, closed-form disc moments for balls, affine reduction for
ellipsoids) and validates against central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .caps import (
    _order_section_points,
    _plane_basis,
    _polytope_chord,
    cap_mass,
    cap_moment,
)
from .geometry import Ball, BodyHandle, Ellipsoid, Polytope, as_direction
from .weights import WeightFunction

_W1 = WeightFunction.constant(1.0)


@dataclass(frozen=True)
class CapFunctionalPoint:
    """Functional values and derivatives at one halfspace parameter a."""

    a: np.ndarray
    delta: float
    U: np.ndarray
    grad_delta: np.ndarray
    jac_U: np.ndarray

    def to_json(self) -> dict:
        return {
            "a": self.a.tolist(),
            "delta": self.delta,
            "U": self.U.tolist(),
            "grad_delta": self.grad_delta.tolist(),
            "jac_U": self.jac_U.tolist(),
        }


def halfspace_param(theta, d: float, body: BodyHandle) -> tuple[np.ndarray, np.ndarray]:
    """Convert a (direction, height) cut into the parameter a with <x,a> >= 1.

    Valid directly only for d > 0; otherwise the body is translated by
    v = 2 * diameter * theta (returned as the second element) so the shifted
    cut height is positive, and a refers to the translated body.
    """
    theta = as_direction(theta)
    if d > 1e-9 * max(1.0, body.diameter):
        return theta / d, np.zeros(body.dim)
    v = 2.0 * body.diameter * theta
    return theta / (d + 2.0 * body.diameter), v


def _hyperplane_cut(body: BodyHandle, a: np.ndarray):
    """Unit normal and cut height for {<x,a> = 1}; checks the plane meets int(body)."""
    a = np.asarray(a, dtype=float)
    na = float(np.linalg.norm(a))
    if na == 0.0:
        raise ValueError("a must be nonzero")
    theta = a / na
    d = 1.0 / na
    lo = -body.support(-theta)
    hi = body.support(theta)
    if not lo < d < hi:
        raise ValueError("hyperplane {<x,a> = 1} misses the body's interior")
    return theta, d, na


def delta_functional(body: BodyHandle, a) -> float:
    """Cap volume delta(a) = vol(body ∩ {<x,a> >= 1})."""
    a = np.asarray(a, dtype=float)
    na = float(np.linalg.norm(a))
    return cap_mass(body, _W1, a / na, 1.0 / na)


def moment_functional(body: BodyHandle, a) -> np.ndarray:
    """Cap first moment U(a) = integral of x over the cap."""
    a = np.asarray(a, dtype=float)
    na = float(np.linalg.norm(a))
    return cap_moment(body, _W1, a / na, 1.0 / na)


# ---------------------------------------------------------------------------
# exact section moments (measure, first moment, second moment)
# ---------------------------------------------------------------------------


def _segment_moments(p0: np.ndarray, p1: np.ndarray):
    length = float(np.linalg.norm(p1 - p0))
    first = length * 0.5 * (p0 + p1)
    outer = np.outer
    second = length * ((outer(p0, p0) + outer(p1, p1)) / 3.0
                       + (outer(p0, p1) + outer(p1, p0)) / 6.0)
    return length, first, second


def _triangle_moments(v0, v1, v2):
    """Area, first and second moment of a triangle embedded in R^3."""
    area = 0.5 * float(np.linalg.norm(np.cross(v1 - v0, v2 - v0)))
    first = area * (v0 + v1 + v2) / 3.0
    s = v0 + v1 + v2
    second = (area / 12.0) * (np.outer(v0, v0) + np.outer(v1, v1) + np.outer(v2, v2)
                              + np.outer(s, s))
    return area, first, second


def section_moments(body: BodyHandle, a) -> tuple[float, np.ndarray, np.ndarray]:
    """(measure, first moment, second moment) of body ∩ {<x,a> = 1}.

    Moments are taken with respect to (n-1)-dimensional Lebesgue measure on
    the hyperplane, about the frame origin.
    """
    theta, d, _ = _hyperplane_cut(body, np.asarray(a, dtype=float))
    n = body.dim
    s = body.shape
    if isinstance(s, Polytope):
        if n == 2:
            ring = s.vertices[s.ring]
            seg = _polytope_chord(ring, ring @ theta, theta, d)
            if seg is None:
                return 0.0, np.zeros(2), np.zeros((2, 2))
            return _segment_moments(seg[0], seg[1])
        heights = s.vertices @ theta
        mask = (heights[s.edges[:, 0]] - d) * (heights[s.edges[:, 1]] - d) < 0.0
        e = s.edges[mask]
        if len(e) == 0:
            return 0.0, np.zeros(3), np.zeros((3, 3))
        ha, hb = heights[e[:, 0]], heights[e[:, 1]]
        lam = (d - ha) / (hb - ha)
        pts = s.vertices[e[:, 0]] + lam[:, None] * (s.vertices[e[:, 1]] - s.vertices[e[:, 0]])
        poly = _order_section_points(pts, theta)
        if len(poly) < 3:
            return 0.0, np.zeros(3), np.zeros((3, 3))
        ctr = poly.mean(axis=0)
        measure, first = 0.0, np.zeros(3)
        second = np.zeros((3, 3))
        for i in range(len(poly)):
            ar, fi, se = _triangle_moments(ctr, poly[i], poly[(i + 1) % len(poly)])
            measure += ar
            first += fi
            second += se
        return measure, first, second
    # ball / ellipsoid: the section is an (n-1)-disc (affine image for ellipsoids)
    if isinstance(s, Ball):
        center, radius = s.center, s.radius
        sdist = d - float(np.dot(center, theta))
        r_sec = math.sqrt(max(0.0, radius ** 2 - sdist ** 2))
        z0 = center + sdist * theta
        measure = _disc_volume(n - 1, r_sec)
        first = measure * z0
        cov = measure * r_sec ** 2 / (n + 1)
        second = measure * np.outer(z0, z0) + cov * (np.eye(n) - np.outer(theta, theta))
        return measure, first, second
    # ellipsoid: map the unit-ball section through B; (n-1)-measures scale by
    # det(B) * ||a|| / ||B a|| for the plane with normal proportional to B a
    B = s.sqrt_inv
    c = s.center
    w = B @ theta
    nw = float(np.linalg.norm(w))
    thetap = w / nw
    dp = (d - float(np.dot(c, theta))) / nw
    r_sec = math.sqrt(max(0.0, 1.0 - dp ** 2))
    z0 = dp * thetap
    meas_u = _disc_volume(n - 1, r_sec)
    first_u = meas_u * z0
    cov = meas_u * r_sec ** 2 / (n + 1)
    second_u = meas_u * np.outer(z0, z0) + cov * (np.eye(n) - np.outer(thetap, thetap))
    jac = s.det_sqrt_inv * 1.0 / nw  # det(B) * ||theta|| / ||B theta||
    measure = jac * meas_u
    first = jac * (c * meas_u + B @ first_u)
    second = jac * (meas_u * np.outer(c, c) + np.outer(c, B @ first_u)
                    + np.outer(B @ first_u, c) + B @ second_u @ B.T)
    return measure, first, second


def _disc_volume(k: int, r: float) -> float:
    from .geometry import unit_ball_volume

    return unit_ball_volume(k) * r ** k


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------


def grad_delta(body: BodyHandle, a) -> np.ndarray:
    """Gradient of the cap volume: (1/||a||) * section first moment."""
    a = np.asarray(a, dtype=float)
    _, first, _ = section_moments(body, a)
    return first / float(np.linalg.norm(a))


def jac_U(body: BodyHandle, a) -> np.ndarray:
    """Jacobian of the cap moment: (1/||a||) * section second-moment matrix."""
    a = np.asarray(a, dtype=float)
    _, _, second = section_moments(body, a)
    return second / float(np.linalg.norm(a))


def cap_functional_point(body: BodyHandle, a) -> CapFunctionalPoint:
    a = np.asarray(a, dtype=float)
    return CapFunctionalPoint(
        a=a,
        delta=delta_functional(body, a),
        U=moment_functional(body, a),
        grad_delta=grad_delta(body, a),
        jac_U=jac_U(body, a),
    )


def fd_grad_delta(body: BodyHandle, a, step_rel: float = 1e-5) -> np.ndarray:
    """Central finite differences of delta(a) with step 1e-5 * ||a|| per axis."""
    a = np.asarray(a, dtype=float)
    h = step_rel * float(np.linalg.norm(a))
    g = np.zeros(body.dim)
    for j in range(body.dim):
        e = np.zeros(body.dim)
        e[j] = h
        g[j] = (delta_functional(body, a + e) - delta_functional(body, a - e)) / (2.0 * h)
    return g


def fd_jac_U(body: BodyHandle, a, step_rel: float = 1e-5) -> np.ndarray:
    """Central finite-difference Jacobian of U(a)."""
    a = np.asarray(a, dtype=float)
    h = step_rel * float(np.linalg.norm(a))
    J = np.zeros((body.dim, body.dim))
    for j in range(body.dim):
        e = np.zeros(body.dim)
        e[j] = h
        J[:, j] = (moment_functional(body, a + e) - moment_functional(body, a - e)) / (2.0 * h)
    return J


# ---------------------------------------------------------------------------
# randomized validation
# ---------------------------------------------------------------------------


def _random_body(rng: np.random.Generator, kind: str) -> BodyHandle:
    if kind == "ball":
        n = int(rng.integers(2, 4))
        return BodyHandle.ball(rng.normal(size=n) * 0.3, 0.6 + rng.random())
    if kind == "ellipsoid":
        n = int(rng.integers(2, 4))
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        ev = 0.4 + rng.random(n) * 2.0
        return BodyHandle.ellipsoid(rng.normal(size=n) * 0.3, (Q * ev) @ Q.T)
    n = 2 if kind == "polytope2" else 3
    k = int(rng.integers(n + 2, n + 9))
    return BodyHandle.polytope(rng.normal(size=(k, n)))


def _random_param(rng: np.random.Generator, body: BodyHandle) -> np.ndarray:
    """Halfspace parameter whose plane cuts well inside the body, with d > 0."""
    for _ in range(100):
        theta = rng.normal(size=body.dim)
        theta /= np.linalg.norm(theta)
        hi = body.support(theta)
        lo = -body.support(-theta)
        d = lo + (0.15 + 0.7 * rng.random()) * (hi - lo)
        if d > 0.05 * max(1.0, body.diameter):
            return theta / d
    raise RuntimeError("could not sample a positive cut height")


@dataclass
class GradCheckReport:
    passed: bool
    samples: int
    max_grad_deviation: float
    max_jac_deviation: float
    per_kind: dict

    def to_json(self) -> dict:
        return {
            "passed": bool(self.passed),
            "samples": self.samples,
            "max_grad_deviation": self.max_grad_deviation,
            "max_jac_deviation": self.max_jac_deviation,
            "per_kind": self.per_kind,
        }


def grad_check(samples: int = 20, seed: int = 7,
               kinds=("ball", "ellipsoid", "polytope2", "polytope3")) -> GradCheckReport:
    """Finite-difference validation of grad delta and DU on random instances.

    Each deviation is compared against max(1e-6, 1e-3 * norm of the analytic
    derivative); the check passes when no instance exceeds its tolerance.
    """
    rng = np.random.default_rng(seed)
    worst_g, worst_j = 0.0, 0.0
    per_kind = {}
    passed = True
    for kind in kinds:
        kg, kj = 0.0, 0.0
        for _ in range(samples):
            body = _random_body(rng, kind)
            a = _random_param(rng, body)
            g = grad_delta(body, a)
            g_fd = fd_grad_delta(body, a)
            dev_g = float(np.max(np.abs(g - g_fd)))
            tol_g = max(1e-6, 1e-3 * float(np.linalg.norm(g)))
            J = jac_U(body, a)
            J_fd = fd_jac_U(body, a)
            dev_j = float(np.max(np.abs(J - J_fd)))
            tol_j = max(1e-6, 1e-3 * float(np.linalg.norm(J)))
            if dev_g > tol_g or dev_j > tol_j:
                passed = False
            kg, kj = max(kg, dev_g), max(kj, dev_j)
        per_kind[kind] = {"max_grad_deviation": kg, "max_jac_deviation": kj}
        worst_g, worst_j = max(worst_g, kg), max(worst_j, kj)
    return GradCheckReport(passed, samples, worst_g, worst_j, per_kind)
