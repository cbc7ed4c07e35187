"""Floating-body constructions and their inclusion / symmetry / volume checks.

Four body families are built over a common antipodally closed direction grid:

- the cap-barycenter body: its boundary point with outer normal theta is the
  weighted barycenter of the cap of mass delta in direction theta;
- the (weighted) floating body: intersection of the halfspaces whose
  complementary caps carry mass delta;
- the classical convex floating body (the constant-weight special case);
- the Lp centroid body, whose support value is the p-th moment of |<x,theta>|.

Constructions carry a two-sided description: an inner vertex hull and an outer
halfspace intersection, so downstream volumes come with [lo, hi] brackets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .caps import (
    cap_barycenter,
    cap_mass,
    cut_height,
    get_profile,
    support_interval,
    weighted_body_mass,
)
from .geometry import BodyHandle, antipodal_grid, as_direction
from .utils import parallel_map
from .weights import WeightFunction

E = math.e


class EmptyBodyError(ValueError):
    """Raised when a halfspace construction is certifiably empty."""


# ---------------------------------------------------------------------------
# sampled two-sided body approximations
# ---------------------------------------------------------------------------


@dataclass
class BodyApproximation:
    """Outer halfspace intersection plus inner vertex hull of a constructed body."""

    kind: str
    directions: np.ndarray
    support_values: np.ndarray
    boundary_points: np.ndarray | None
    params: dict
    origin: np.ndarray
    antipode: np.ndarray | None = None
    gap_estimate: float = float("nan")
    _inner_eqs: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.boundary_points is not None:
            slack = np.einsum("ij,ij->i", self.boundary_points, self.directions) - self.support_values
            if np.max(np.abs(slack)) > 1e-7:
                raise ValueError("boundary points inconsistent with support values")

    # -- radial queries ------------------------------------------------------

    def _inner_equations(self):
        if self._inner_eqs is None:
            if self.boundary_points is None:
                raise ValueError(f"{self.kind} approximation carries no inner hull")
            hull = ConvexHull(self.boundary_points - self.origin)
            self._inner_eqs = (hull.equations[:, :-1].copy(), -hull.equations[:, -1].copy())
        return self._inner_eqs

    def radial_bounds(self, rays: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Inner/outer boundary radii along unit rays from the stored origin."""
        rays = np.atleast_2d(np.asarray(rays, dtype=float))
        h_shift = self.support_values - self.directions @ self.origin
        if np.min(h_shift) <= 0.0:
            raise ValueError("origin is not interior to the outer intersection")
        den = rays @ self.directions.T
        with np.errstate(divide="ignore"):
            quo = np.where(den > 1e-14, h_shift[None, :] / den, np.inf)
        r_hi = quo.min(axis=1)
        A, b = self._inner_equations()
        if np.min(b) <= 0.0:
            raise ValueError("origin is not interior to the inner hull")
        den2 = rays @ A.T
        with np.errstate(divide="ignore"):
            quo2 = np.where(den2 > 1e-14, b[None, :] / den2, np.inf)
        r_lo = quo2.min(axis=1)
        return r_lo, r_hi

    def support(self, theta) -> float:
        """Outer support value: min over stored halfspaces evaluated radially is
        not a support function, so this exposes the exact outer-hull support via
        the vertex enumeration (dimensions 2 and 3)."""
        verts = self.outer_vertices()
        return float(np.max(verts @ as_direction(theta)))

    def outer_vertices(self) -> np.ndarray:
        hs = np.column_stack([self.directions, -(self.support_values - self.directions @ self.origin)])
        try:
            inter = HalfspaceIntersection(hs, np.zeros(self.directions.shape[1]))
        except QhullError as exc:
            raise EmptyBodyError("outer halfspace intersection failed (empty or degenerate)") from exc
        return inter.intersections + self.origin

    def inner_volume(self) -> float:
        if self.boundary_points is None:
            raise ValueError(f"{self.kind} approximation carries no inner hull")
        return float(ConvexHull(self.boundary_points).volume)

    def outer_volume(self) -> float:
        return float(ConvexHull(self.outer_vertices()).volume)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "params": {k: (v if not isinstance(v, np.ndarray) else v.tolist())
                       for k, v in self.params.items()},
            "directions": self.directions.tolist(),
            "support_values": self.support_values.tolist(),
            "boundary_points": None if self.boundary_points is None else self.boundary_points.tolist(),
            "origin": self.origin.tolist(),
            "gap_estimate": self.gap_estimate,
        }


def normalized_unit_volume(body: BodyHandle, barycentered: bool = True) -> BodyHandle:
    """Copy scaled to volume 1, optionally with the barycenter moved to the origin."""
    scaled = body.scale(body.volume ** (-1.0 / body.dim))
    if barycentered:
        scaled = scaled.translate(-scaled.barycenter)
    return scaled


def approximation_of_body(body: BodyHandle, m: int = 256) -> BodyApproximation:
    """Wrap an exact body as a sampled two-sided approximation (for comparisons)."""
    dirs, anti = antipodal_grid(body.dim, m)
    h = body.support_many(dirs)
    pts = np.array([body.support_point(t) for t in dirs])
    return BodyApproximation("exact", dirs, h, pts, {"body": body.to_json()},
                             body.interior_point.copy(), anti, 0.0)


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------


def ulam_support(body: BodyHandle, w: WeightFunction, theta, delta: float):
    """Support value and boundary point of the cap-barycenter body.

    Returns ``(h, x)`` with ``x`` the weighted barycenter of the cap of mass
    delta in direction theta and ``h = <x, theta>`` (strictly below the support
    of the body for 0 < delta < total mass).
    """
    theta = as_direction(theta)
    d = cut_height(body, w, theta, delta)
    x = cap_barycenter(body, w, theta, d)
    return float(np.dot(x, theta)), x


def _gap_estimate(approx: BodyApproximation) -> float:
    """Worst radial gap between outer and inner descriptions, probed on a
    finer interleaved grid so probes do not coincide with construction rays."""
    n = approx.directions.shape[1]
    probes = min(4096, 2 * len(approx.directions))
    dirs, _ = antipodal_grid(n, probes)
    if n == 2:
        ang = math.pi / probes
        rot = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
        dirs = dirs @ rot.T
    try:
        lo, hi = approx.radial_bounds(dirs)
    except (ValueError, QhullError):
        return float("nan")
    return float(np.max(hi - lo))


def build_ulam_body(body: BodyHandle, w: WeightFunction, delta: float, m: int = 512,
                    with_gap: bool = True) -> BodyApproximation:
    """Sampled cap-barycenter body: inner hull of barycenters, outer support cuts."""
    total = weighted_body_mass(body, w)
    if not 0.0 < delta < total:
        raise ValueError("delta must lie strictly between 0 and the total mass")
    dirs, anti = antipodal_grid(body.dim, m)
    results = parallel_map(lambda th: ulam_support(body, w, th, delta), dirs)
    h = np.array([r[0] for r in results])
    pts = np.array([r[1] for r in results])
    approx = BodyApproximation(
        "ulam", dirs, h, pts,
        {"delta": delta, "weight": w.label, "m": len(dirs)},
        body.interior_point.copy(), anti,
    )
    if with_gap and body.dim <= 3:
        approx.gap_estimate = _gap_estimate(approx)
    return approx


def floating_support(body: BodyHandle, w: WeightFunction, theta, delta: float) -> float:
    """Offset of the defining halfspace of the weighted floating body at theta.

    This is the cut height d(theta, delta); the floating body is contained in
    every such halfspace, and the sampled construction is their intersection.
    """
    total = weighted_body_mass(body, w)
    if not 0.0 < delta < 0.5 * total:
        raise ValueError("floating bodies are built for 0 < delta < total/2")
    return cut_height(body, w, as_direction(theta), delta)


def build_floating_body(body: BodyHandle, w: WeightFunction, delta: float,
                        m: int = 512) -> BodyApproximation:
    """Sampled weighted floating body (outer description only)."""
    total = weighted_body_mass(body, w)
    if not 0.0 < delta < 0.5 * total:
        raise ValueError("floating bodies are built for 0 < delta < total/2")
    dirs, anti = antipodal_grid(body.dim, m)
    h = np.array(parallel_map(lambda th: cut_height(body, w, th, delta), dirs))
    # constructive emptiness check: the deepest point of the halfspace
    # intersection (Chebyshev radius) must be nonnegative
    from scipy.optimize import linprog

    n = body.dim
    res = linprog(
        np.concatenate([np.zeros(n), [-1.0]]),
        A_ub=np.column_stack([dirs, np.ones(len(dirs))]),
        b_ub=h,
        bounds=[(None, None)] * n + [(None, None)],
        method="highs",
    )
    if not res.success or res.x[n] < 0.0:
        worst = int(np.argmin(h - dirs @ (res.x[:n] if res.success else body.barycenter)))
        raise EmptyBodyError(
            "floating body is empty at this mass; deepest point violates the cut "
            f"in direction {dirs[worst].tolist()} (inradius {res.x[n] if res.success else float('nan')})"
        )
    approx = BodyApproximation(
        "floating", dirs, h, None,
        {"delta": delta, "weight": w.label, "m": len(dirs)},
        body.interior_point.copy(), anti,
    )
    return approx


def zp_support(body: BodyHandle, p: float, theta) -> float:
    """p-th moment support value (integral of |<x,theta>|^p over the body)^(1/p).

    The body must have volume 1 (enforced to 1e-6 relative); the moment is
    taken about the frame origin, the convention under which the centroid-body
    comparisons are stated.
    """
    if p < 1.0:
        raise ValueError("p must be >= 1")
    if abs(body.volume - 1.0) > 1e-6:
        raise ValueError("centroid bodies are defined for volume-1 bodies")
    theta = as_direction(theta)
    prof = get_profile(body, WeightFunction.constant(1.0), theta)
    moment = prof.weighted_height_integral(lambda t: np.abs(t) ** p, extra_breaks_t=(0.0,))
    return float(moment) ** (1.0 / p)


def build_zp_body(body: BodyHandle, p: float, m: int = 512) -> BodyApproximation:
    """Sampled centroid body of order p (outer description only)."""
    dirs, anti = antipodal_grid(body.dim, m)
    h = np.array([zp_support(body, p, th) for th in dirs])
    return BodyApproximation("centroid_zp", dirs, h, None, {"p": p, "m": len(dirs)},
                             np.zeros(body.dim), anti)


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst_margin: float
    witness: dict | None
    details: dict

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "passed": bool(self.passed),
            "worst_margin": self.worst_margin,
            "witness": self.witness,
            "details": self.details,
        }


def sandwich_check(body: BodyHandle, w: WeightFunction, delta: float, m: int = 512,
                   tol: float = 1e-8) -> CheckReport:
    """Two-sided inclusion between the floating and cap-barycenter bodies.

    Verifies on the grid, for a log-concave weight:
    (a) the floating body at mass (1-1/e)*delta is inside the cap-barycenter
        body: each cut d(theta, (1-1/e) delta) stays below the support h(theta);
    (b) the cap-barycenter body is inside the floating body at mass delta/e:
        every barycenter point satisfies every cut <x(theta), beta> <= d(beta, delta/e).
    """
    if w.is_log_concave is not True:
        raise ValueError("sandwich check requires a weight flagged log-concave")
    total = weighted_body_mass(body, w)
    if not 0.0 < delta < total:
        raise ValueError("delta must lie strictly inside (0, total mass)")
    dirs, anti = antipodal_grid(body.dim, m)
    mm = len(dirs)

    def _one(th):
        hi, xi = ulam_support(body, w, th, delta)
        return (hi, xi,
                cut_height(body, w, th, (1.0 - 1.0 / E) * delta),
                cut_height(body, w, th, delta / E))

    results = parallel_map(_one, dirs)
    h = np.array([r[0] for r in results])
    pts = np.array([r[1] for r in results])
    d_left = np.array([r[2] for r in results])
    d_right = np.array([r[3] for r in results])
    margin_a = h - d_left
    margin_b = d_right[None, :] - pts @ dirs.T
    worst_a = float(margin_a.min())
    ia = int(np.argmin(margin_a))
    worst_b = float(margin_b.min())
    ib, jb = np.unravel_index(int(np.argmin(margin_b)), margin_b.shape)
    passed = worst_a >= -tol and worst_b >= -tol
    witness = None
    if not passed:
        if worst_a < -tol:
            witness = {"side": "left", "theta": dirs[ia].tolist(), "margin": worst_a}
        else:
            witness = {"side": "right", "theta": dirs[ib].tolist(),
                       "beta": dirs[jb].tolist(), "margin": worst_b}
    return CheckReport(
        "sandwich", passed, min(worst_a, worst_b), witness,
        {"delta": delta, "m": mm, "weight": w.label,
         "worst_left_margin": worst_a, "worst_right_margin": worst_b},
    )


def zp_sandwich_check(body: BodyHandle, delta: float, m: int = 512,
                      tol: float = 1e-8) -> CheckReport:
    """Floating cut <= cap-barycenter support <= e * centroid-body support.

    Requires a centrally symmetric volume-1 body (barycenter at the origin)
    and delta < 1/e; the centroid order is p = log(1/delta).
    """
    if abs(body.volume - 1.0) > 1e-6:
        raise ValueError("body must have volume 1")
    if np.linalg.norm(body.barycenter) > 1e-8 * max(1.0, body.diameter):
        raise ValueError("body must be centered at the origin")
    if not 0.0 < delta < 1.0 / E:
        raise ValueError("delta must lie in (0, 1/e)")
    p = math.log(1.0 / delta)
    w1 = WeightFunction.constant(1.0)
    dirs, anti = antipodal_grid(body.dim, m)

    def _one(th):
        return (ulam_support(body, w1, th, delta)[0],
                cut_height(body, w1, th, delta),
                zp_support(body, p, th))

    results = parallel_map(_one, dirs)
    h = np.array([r[0] for r in results])
    d = np.array([r[1] for r in results])
    hz = np.array([r[2] for r in results])
    left = h - d
    right = E * hz - h
    worst = float(min(left.min(), right.min()))
    passed = worst >= -tol
    witness = None
    if not passed:
        side = "left" if left.min() < right.min() else "right"
        idx = int(np.argmin(left if side == "left" else right))
        witness = {"side": side, "theta": dirs[idx].tolist(), "margin": worst}
    return CheckReport(
        "zp-sandwich", passed, worst, witness,
        {"delta": delta, "p": p, "m": len(dirs),
         "worst_left_margin": float(left.min()), "worst_right_margin": float(right.min())},
    )


def symmetry_check(body: BodyHandle, delta: float, m: int = 512,
                   tol: float = 1e-8) -> CheckReport:
    """Reflection identity between the delta and (1-delta) cap-barycenter bodies.

    For a volume-1 body with barycenter at the origin and constant weight,
    h_{1-delta}(theta) must equal (delta/(1-delta)) * h_delta(-theta); at
    delta = 1/2 the body is centrally symmetric.
    """
    if abs(body.volume - 1.0) > 1e-8:
        raise ValueError("body must have volume 1")
    if np.linalg.norm(body.barycenter) > 1e-9 * max(1.0, body.diameter):
        raise ValueError("body barycenter must sit at the origin")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    w1 = WeightFunction.constant(1.0)
    dirs, anti = antipodal_grid(body.dim, m)
    h_d = np.array(parallel_map(lambda th: ulam_support(body, w1, th, delta)[0], dirs))
    h_c = np.array(parallel_map(lambda th: ulam_support(body, w1, th, 1.0 - delta)[0], dirs))
    resid = h_c - (delta / (1.0 - delta)) * h_d[anti]
    worst = float(np.max(np.abs(resid)))
    h_half = (h_d if delta == 0.5 else
              np.array(parallel_map(lambda th: ulam_support(body, w1, th, 0.5)[0], dirs)))
    central = float(np.max(np.abs(h_half - h_half[anti])))
    passed = worst <= tol and central <= tol
    witness = None
    if not passed:
        idx = int(np.argmax(np.abs(resid)))
        witness = {"theta": dirs[idx].tolist(), "residual": float(resid[idx])}
    return CheckReport(
        "symmetry", passed, -worst, witness,
        {"delta": delta, "m": len(dirs), "max_residual": worst,
         "max_central_residual": central},
    )


# ---------------------------------------------------------------------------
# radial queries and volume differences
# ---------------------------------------------------------------------------


def radial_boundary(approx: BodyApproximation, ray_direction) -> tuple[float, float]:
    """Inner and outer boundary radii of the approximation along one ray."""
    u = as_direction(ray_direction)
    lo, hi = approx.radial_bounds(u[None, :])
    return float(lo[0]), float(hi[0])


def volume_difference(body: BodyHandle, approx: BodyApproximation,
                      resolution: int = 2048) -> tuple[float, float]:
    """Bracket of vol(body) - vol(inner body described by ``approx``).

    Evaluates the radial boundary-difference integral
    (1/n) * surface integral of <x,N(x)> (1 - (r_L/||x||)^n), with the inner
    body's radius taken from the two-sided approximation, so the result is a
    [lo, hi] bracket. The approximation must contain the body's interior point.
    """
    n = body.dim
    origin = body.interior_point
    bq = body.boundary_quadrature(resolution)
    rel = bq.points - origin
    dist = np.linalg.norm(rel, axis=1)
    rays = rel / dist[:, None]
    shifted = BodyApproximation(
        approx.kind, approx.directions, approx.support_values,
        approx.boundary_points, approx.params, origin.astype(float),
        approx.antipode, approx.gap_estimate,
    )
    r_lo, r_hi = shifted.radial_bounds(rays)
    if np.any(r_lo > dist * (1.0 + 1e-9)):
        bad = int(np.argmax(r_lo / dist))
        raise ValueError(
            f"approximation is not certifiably inside the body along ray {rays[bad].tolist()}"
        )
    # the outer polyhedral relaxation may poke slightly outside the body between
    # grid directions; intersecting it with the body keeps a valid upper set
    r_hi = np.minimum(r_hi, dist)
    r_lo = np.minimum(r_lo, dist)
    xdn = np.einsum("ij,ij->i", rel, bq.normals)
    f_hi = xdn * (1.0 - (r_lo / dist) ** n)
    f_lo = xdn * (1.0 - (r_hi / dist) ** n)
    lo = float(np.dot(bq.weights, f_lo)) / n
    hi = float(np.dot(bq.weights, f_hi)) / n
    pad = 1e-13 * (abs(lo) + abs(hi) + body.volume)  # floating-point roundoff cushion
    return lo - pad, hi + pad
