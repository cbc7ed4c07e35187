"""Concrete convex bodies with exact support, membership, volume and boundary queries.

Three representations are supported:

- balls (any dimension up to 10),
- ellipsoids ``{x : (x-c)^T A (x-c) <= 1}`` with symmetric positive definite A,
- V-polytopes in dimension 2 or 3 (stored as an irredundant vertex hull).

Every body is wrapped in an immutable :class:`BodyHandle` that caches volume,
barycenter, diameter and a certified interior point (the Chebyshev center).
Queries are answered in the coordinate frame the body was constructed in;
operations that need an interior origin (radial queries, cap profiles for
position-dependent weights) shift to the cached interior point internally.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError
from scipy.special import gammaln
from scipy.stats import qmc

DIRECTION_TOL = 1e-12
_uid_counter = itertools.count()


class NonSmoothBoundaryError(ValueError):
    """Raised when a curvature/normal query lands on a polytope vertex or edge."""


def unit_ball_volume(n: int) -> float:
    """Lebesgue volume of the n-dimensional Euclidean unit ball."""
    return math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1.0))


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere boundary of the n-dimensional unit ball."""
    return n * unit_ball_volume(n)


def as_direction(v) -> np.ndarray:
    """Normalize ``v`` to a unit vector, rejecting (near-)zero input."""
    v = np.asarray(v, dtype=float)
    nrm = float(np.linalg.norm(v))
    if nrm <= DIRECTION_TOL:
        raise ValueError("direction must be a nonzero vector")
    return v / nrm


def _fibonacci_sphere(k: int) -> np.ndarray:
    """k roughly equidistributed points on the unit 2-sphere (Fibonacci lattice)."""
    i = np.arange(k, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / k
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def antipodal_grid(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Antipodally closed direction grid with its antipode permutation.

    Returns ``(dirs, antipode)`` where ``dirs[antipode[i]] == -dirs[i]``.
    n=2 uses uniform angles, n=3 a symmetrized Fibonacci lattice, n>=4 a
    symmetrized Halton sequence pushed through the normal quantile map.
    The actual grid size is ``m`` rounded up to the next even integer.
    """
    if n < 2:
        raise ValueError("dimension must be >= 2")
    if m < 2 * n + 2:
        m = 2 * n + 2
    if n == 2:
        if m % 2:
            m += 1
        ang = 2.0 * math.pi * np.arange(m) / m
        dirs = np.column_stack([np.cos(ang), np.sin(ang)])
        anti = (np.arange(m) + m // 2) % m
        return dirs, anti
    k = (m + 1) // 2
    if n == 3:
        half = _fibonacci_sphere(k)
    else:
        sampler = qmc.Halton(d=n, scramble=False)
        sampler.fast_forward(1)  # skip the origin-heavy first point
        from scipy.stats import norm

        u = sampler.random(k)
        g = norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
        half = g / np.linalg.norm(g, axis=1, keepdims=True)
    dirs = np.vstack([half, -half])
    anti = np.concatenate([np.arange(k) + k, np.arange(k)])
    return dirs, anti


def direction_grid(n: int, m: int) -> np.ndarray:
    """Antipodally closed direction grid (see :func:`antipodal_grid`)."""
    return antipodal_grid(n, m)[0]


# ---------------------------------------------------------------------------
# shape records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class Ellipsoid:
    center: np.ndarray
    shape: np.ndarray          # SPD matrix A, body = {x : (x-c)^T A (x-c) <= 1}
    shape_inv: np.ndarray = field(repr=False, default=None)
    sqrt_inv: np.ndarray = field(repr=False, default=None)   # B = A^{-1/2}
    sqrt: np.ndarray = field(repr=False, default=None)       # A^{1/2}
    det_sqrt_inv: float = field(repr=False, default=0.0)     # det B
    eigvals: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class Polytope:
    vertices: np.ndarray       # irredundant extreme points, (k, n)
    normals: np.ndarray        # outward unit facet normals, (f, n)
    offsets: np.ndarray        # facet offsets, facet = {x : <a,x> <= b}
    triangles: np.ndarray      # oriented boundary simplices (3D), (t, 3) indices
    edges: np.ndarray          # unique vertex-index pairs (3D), (e, 2)
    ring: np.ndarray           # counterclockwise vertex order (2D), (k,)


def _make_ellipsoid(center: np.ndarray, shape: np.ndarray) -> Ellipsoid:
    A = 0.5 * (shape + shape.T)
    if not np.allclose(shape, shape.T, atol=1e-12, rtol=0.0):
        raise ValueError("ellipsoid shape matrix must be symmetric (within 1e-12)")
    evals, evecs = np.linalg.eigh(A)
    if np.min(evals) <= 0.0:
        raise ValueError("ellipsoid shape matrix must be positive definite")
    B = (evecs * (evals ** -0.5)) @ evecs.T
    S = (evecs * (evals ** 0.5)) @ evecs.T
    return Ellipsoid(
        center=center,
        shape=A,
        shape_inv=(evecs * (1.0 / evals)) @ evecs.T,
        sqrt_inv=B,
        sqrt=S,
        det_sqrt_inv=float(np.prod(evals ** -0.5)),
        eigvals=evals,
    )


def _make_polytope(vertices: np.ndarray) -> Polytope:
    n = vertices.shape[1]
    if n not in (2, 3):
        raise ValueError("polytopes are supported in dimension 2 or 3 only")
    if vertices.shape[0] < n + 1:
        raise ValueError("polytope needs at least n+1 vertices")
    try:
        hull = ConvexHull(vertices)
    except QhullError as exc:
        raise ValueError(
            "degenerate polytope: vertices are affinely dependent or too close"
        ) from exc
    verts = vertices[hull.vertices]
    hull = ConvexHull(verts)  # re-hull so every stored vertex is extreme
    normals = hull.equations[:, :n].copy()
    offsets = -hull.equations[:, n].copy()
    triangles = np.zeros((0, 3), dtype=int)
    edges = np.zeros((0, 2), dtype=int)
    ring = np.zeros(0, dtype=int)
    if n == 2:
        ring = hull.vertices.copy()  # counterclockwise for 2D qhull
    else:
        tris = hull.simplices.copy()
        eqs = hull.equations
        for t in range(tris.shape[0]):
            a, b, c = verts[tris[t]]
            if np.dot(np.cross(b - a, c - a), eqs[t, :3]) < 0.0:
                tris[t, 1], tris[t, 2] = tris[t, 2], tris[t, 1]
        triangles = tris
        pair = set()
        for t in tris:
            for i, j in ((0, 1), (1, 2), (2, 0)):
                pair.add((min(t[i], t[j]), max(t[i], t[j])))
        edges = np.array(sorted(pair), dtype=int)
    return Polytope(verts, normals, offsets, triangles, edges, ring)


def _polytope_volume_barycenter(poly: Polytope, n: int) -> tuple[float, np.ndarray]:
    """Exact volume and barycenter via a signed simplex fan about the vertex mean."""
    o = poly.vertices.mean(axis=0)
    vol = 0.0
    mom = np.zeros(n)
    if n == 2:
        ring = poly.vertices[poly.ring] - o
        for i in range(len(ring)):
            a, b = ring[i], ring[(i + 1) % len(ring)]
            s = 0.5 * (a[0] * b[1] - a[1] * b[0])
            vol += s
            mom += s * (a + b) / 3.0
    else:
        for t in poly.triangles:
            a, b, c = poly.vertices[t] - o
            s = np.dot(a, np.cross(b, c)) / 6.0
            vol += s
            mom += s * (a + b + c) / 4.0
    return vol, o + mom / vol


def _chebyshev_center(poly: Polytope) -> tuple[np.ndarray, float]:
    """Inradius center of a polytope, via max r s.t. <a_i,x> + r <= b_i."""
    n = poly.vertices.shape[1]
    c = np.concatenate([np.zeros(n), [-1.0]])
    A_ub = np.column_stack([poly.normals, np.ones(len(poly.offsets))])
    res = linprog(c, A_ub=A_ub, b_ub=poly.offsets, bounds=[(None, None)] * n + [(0, None)], method="highs")
    if not res.success:
        raise ValueError("could not locate an interior point of the polytope")
    return res.x[:n], float(res.x[n])


# ---------------------------------------------------------------------------
# boundary quadrature record
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundarySample:
    """Surface quadrature: points, outward normals, weights, Gaussian curvatures.

    ``weights`` sum to the surface area; ``support_dot`` holds <x, N(x)> in the
    body's construction frame. Polytope samples lie on facet interiors and carry
    curvature 0.
    """

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    curvatures: np.ndarray
    support_dot: np.ndarray


class BodyHandle:
    """Immutable convex body with cached global quantities.

    All query methods are pure; handles are safe to share across workers.
    """

    def __init__(self, shape, _from_factory: bool = False):
        if not _from_factory:
            raise TypeError("use BodyHandle.ball/ellipsoid/polytope or from_json")
        self.shape = shape
        if isinstance(shape, Ball):
            self.dim = shape.center.size
            self.volume = shape.radius ** self.dim * unit_ball_volume(self.dim)
            self.barycenter = shape.center.copy()
            self.diameter = 2.0 * shape.radius
            self.interior_point = shape.center.copy()
            self.inradius = shape.radius
        elif isinstance(shape, Ellipsoid):
            self.dim = shape.center.size
            self.volume = unit_ball_volume(self.dim) * shape.det_sqrt_inv
            self.barycenter = shape.center.copy()
            self.diameter = 2.0 / math.sqrt(float(np.min(shape.eigvals)))
            self.interior_point = shape.center.copy()
            self.inradius = 1.0 / math.sqrt(float(np.max(shape.eigvals)))
        elif isinstance(shape, Polytope):
            self.dim = shape.vertices.shape[1]
            self.volume, self.barycenter = _polytope_volume_barycenter(shape, self.dim)
            d = shape.vertices[:, None, :] - shape.vertices[None, :, :]
            self.diameter = float(np.sqrt((d * d).sum(-1)).max())
            self.interior_point, self.inradius = _chebyshev_center(shape)
        else:
            raise TypeError(f"unsupported shape {type(shape)!r}")
        self.uid = next(_uid_counter)
        if not self.contains(self.interior_point):
            raise ValueError("interior point certification failed")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def ball(center, radius: float) -> "BodyHandle":
        center = np.asarray(center, dtype=float)
        if not radius > 0.0:
            raise ValueError("ball radius must be positive")
        if center.ndim != 1 or not 2 <= center.size <= 10:
            raise ValueError("ball center must be a vector of dimension 2..10")
        return BodyHandle(Ball(center, float(radius)), _from_factory=True)

    @staticmethod
    def ellipsoid(center, shape) -> "BodyHandle":
        center = np.asarray(center, dtype=float)
        shape = np.asarray(shape, dtype=float)
        if center.ndim != 1 or not 2 <= center.size <= 10:
            raise ValueError("ellipsoid center must be a vector of dimension 2..10")
        if shape.shape != (center.size, center.size):
            raise ValueError("ellipsoid shape matrix must be n x n")
        return BodyHandle(_make_ellipsoid(center, shape), _from_factory=True)

    @staticmethod
    def polytope(vertices) -> "BodyHandle":
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim != 2:
            raise ValueError("polytope vertices must be a (k, n) array")
        return BodyHandle(_make_polytope(vertices), _from_factory=True)

    @staticmethod
    def cube(side: float = 1.0, n: int = 3, center=None) -> "BodyHandle":
        """Axis-aligned cube of given side length, centered at ``center`` (default 0)."""
        corners = np.array(list(itertools.product([-0.5, 0.5], repeat=n))) * side
        if center is not None:
            corners = corners + np.asarray(center, dtype=float)
        return BodyHandle.polytope(corners)

    # -- serialization ------------------------------------------------------

    @staticmethod
    def from_json(spec) -> "BodyHandle":
        if isinstance(spec, str):
            spec = json.loads(spec)
        kind = spec.get("type")
        if kind == "ball":
            return BodyHandle.ball(spec["center"], spec["radius"])
        if kind == "ellipsoid":
            return BodyHandle.ellipsoid(spec["center"], spec["shape"])
        if kind == "polytope":
            return BodyHandle.polytope(spec["vertices"])
        raise ValueError(f"unknown body type {kind!r} (expected ball|ellipsoid|polytope)")

    def to_json(self) -> dict:
        if isinstance(self.shape, Ball):
            return {"type": "ball", "center": self.shape.center.tolist(), "radius": self.shape.radius}
        if isinstance(self.shape, Ellipsoid):
            return {"type": "ellipsoid", "center": self.shape.center.tolist(), "shape": self.shape.shape.tolist()}
        return {"type": "polytope", "vertices": self.shape.vertices.tolist()}

    # -- primitive queries ---------------------------------------------------

    def support(self, theta) -> float:
        """Support value max_{x in body} <x, theta> for a unit direction."""
        theta = np.asarray(theta, dtype=float)
        s = self.shape
        if isinstance(s, Ball):
            return float(np.dot(s.center, theta)) + s.radius
        if isinstance(s, Ellipsoid):
            return float(np.dot(s.center, theta)) + math.sqrt(float(theta @ s.shape_inv @ theta))
        return float(np.max(s.vertices @ theta))

    def support_many(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=float)
        s = self.shape
        if isinstance(s, Ball):
            return thetas @ s.center + s.radius
        if isinstance(s, Ellipsoid):
            return thetas @ s.center + np.sqrt(np.einsum("ij,jk,ik->i", thetas, s.shape_inv, thetas))
        return (thetas @ s.vertices.T).max(axis=1)

    def support_point(self, theta) -> np.ndarray:
        """A boundary point attaining the support value in direction ``theta``."""
        theta = np.asarray(theta, dtype=float)
        s = self.shape
        if isinstance(s, Ball):
            return s.center + s.radius * theta
        if isinstance(s, Ellipsoid):
            w = s.shape_inv @ theta
            return s.center + w / math.sqrt(float(theta @ w))
        return s.vertices[int(np.argmax(s.vertices @ theta))].copy()

    def support_homogeneous(self, z) -> float:
        """Positively homogeneous extension ||z|| * h(z/||z||); 0 at the origin."""
        z = np.asarray(z, dtype=float)
        nrm = float(np.linalg.norm(z))
        if nrm == 0.0:
            return 0.0
        return nrm * self.support(z / nrm)

    def contains(self, x, tol: float = 1e-12) -> bool:
        """Closed membership test, exact per representation."""
        x = np.asarray(x, dtype=float)
        s = self.shape
        if isinstance(s, Ball):
            return float(np.linalg.norm(x - s.center)) <= s.radius + tol
        if isinstance(s, Ellipsoid):
            d = x - s.center
            return float(d @ s.shape @ d) <= 1.0 + tol
        return float(np.max(s.normals @ x - s.offsets)) <= tol * max(1.0, self.diameter)

    def contains_many(self, pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        s = self.shape
        if isinstance(s, Ball):
            return np.linalg.norm(pts - s.center, axis=1) <= s.radius + tol
        if isinstance(s, Ellipsoid):
            d = pts - s.center
            return np.einsum("ij,jk,ik->i", d, s.shape, d) <= 1.0 + tol
        return (pts @ s.normals.T - s.offsets).max(axis=1) <= tol * max(1.0, self.diameter)

    # -- transforms ----------------------------------------------------------

    def translate(self, v) -> "BodyHandle":
        v = np.asarray(v, dtype=float)
        s = self.shape
        if isinstance(s, Ball):
            return BodyHandle.ball(s.center + v, s.radius)
        if isinstance(s, Ellipsoid):
            return BodyHandle.ellipsoid(s.center + v, s.shape)
        return BodyHandle.polytope(s.vertices + v)

    def centered(self) -> "BodyHandle":
        """Copy translated so the certified interior point sits at the origin."""
        return self.translate(-self.interior_point)

    def apply_linear(self, T) -> "BodyHandle":
        """Image of the body under an invertible linear map (ball maps may leave the family)."""
        T = np.asarray(T, dtype=float)
        det = float(np.linalg.det(T))
        if abs(det) < 1e-14:
            raise ValueError("linear map must be invertible")
        Tinv = np.linalg.inv(T)
        s = self.shape
        if isinstance(s, Ball):
            g = T.T @ T
            scale2 = g[0, 0]
            if np.allclose(g, scale2 * np.eye(self.dim), atol=1e-12 * max(1.0, scale2)):
                return BodyHandle.ball(T @ s.center, s.radius * math.sqrt(scale2))
            A = Tinv.T @ Tinv / s.radius ** 2
            return BodyHandle.ellipsoid(T @ s.center, A)
        if isinstance(s, Ellipsoid):
            return BodyHandle.ellipsoid(T @ s.center, Tinv.T @ s.shape @ Tinv)
        return BodyHandle.polytope(s.vertices @ T.T)

    def scale(self, lam: float) -> "BodyHandle":
        return self.apply_linear(np.eye(self.dim) * float(lam))

    # -- differential boundary data -------------------------------------------

    def normal_at(self, x) -> np.ndarray:
        """Outer unit normal at a boundary point (unique-normal points only)."""
        x = np.asarray(x, dtype=float)
        s = self.shape
        if isinstance(s, Ball):
            return (x - s.center) / float(np.linalg.norm(x - s.center))
        if isinstance(s, Ellipsoid):
            g = s.shape @ (x - s.center)
            return g / float(np.linalg.norm(g))
        resid = s.normals @ x - s.offsets
        tol = 1e-10 * max(1.0, self.diameter)
        active = np.flatnonzero(resid > -tol)
        if active.size == 0:
            raise ValueError("point is not on the polytope boundary")
        if active.size > 1:
            raise NonSmoothBoundaryError("point lies on the vertex/edge skeleton")
        return s.normals[active[0]].copy()

    def curvature_at(self, x) -> float:
        """Gaussian curvature at a boundary point; 0 on polytope facet interiors."""
        x = np.asarray(x, dtype=float)
        s = self.shape
        if isinstance(s, Ball):
            return s.radius ** (1 - self.dim)
        if isinstance(s, Ellipsoid):
            g = s.shape @ (x - s.center)
            detA = float(np.prod(s.eigvals))
            return detA / float(np.linalg.norm(g)) ** (self.dim + 1)
        self.normal_at(x)  # raises NonSmoothBoundaryError on the skeleton
        return 0.0

    def radial_boundary_scale(self, origin: np.ndarray, u: np.ndarray) -> float:
        """t > 0 with origin + t*u on the boundary, for an interior origin."""
        s = self.shape
        if isinstance(s, Ball):
            d = origin - s.center
            b = float(np.dot(d, u))
            c = float(np.dot(d, d)) - s.radius ** 2
            return -b + math.sqrt(b * b - c)
        if isinstance(s, Ellipsoid):
            d = origin - s.center
            a2 = float(u @ s.shape @ u)
            b2 = float(d @ s.shape @ u)
            c2 = float(d @ s.shape @ d) - 1.0
            return (-b2 + math.sqrt(b2 * b2 - a2 * c2)) / a2
        num = s.offsets - s.normals @ origin
        den = s.normals @ u
        pos = den > 1e-15
        if not np.any(pos):
            raise ValueError("ray does not leave the polytope (origin not interior?)")
        return float(np.min(num[pos] / den[pos]))

    # -- boundary quadrature ---------------------------------------------------

    def boundary_quadrature(self, resolution: int = 256) -> BoundarySample:
        """Quadrature over the boundary surface; see :class:`BoundarySample`."""
        s = self.shape
        n = self.dim
        if isinstance(s, (Ball, Ellipsoid)):
            if n == 2:
                m = max(8, int(resolution))
                ang = 2.0 * math.pi * (np.arange(m) + 0.5) / m
                u = np.column_stack([np.cos(ang), np.sin(ang)])
                w_sphere = np.full(m, 2.0 * math.pi / m)
            elif n == 3:
                q = max(8, int(math.sqrt(max(resolution, 16) / 2.0)))
                z, wz = np.polynomial.legendre.leggauss(q)
                ph = 2.0 * math.pi * (np.arange(2 * q) + 0.5) / (2 * q)
                zz, pp = np.meshgrid(z, ph, indexing="ij")
                rr = np.sqrt(np.maximum(0.0, 1.0 - zz ** 2))
                u = np.column_stack([(rr * np.cos(pp)).ravel(), (rr * np.sin(pp)).ravel(), zz.ravel()])
                w_sphere = (np.repeat(wz, 2 * q) * (2.0 * math.pi / (2 * q)))
            else:
                m = max(64, int(resolution))
                u, _ = antipodal_grid(n, m)
                m = len(u)
                w_sphere = np.full(m, unit_sphere_area(n) / m)
            if isinstance(s, Ball):
                pts = s.center + s.radius * u
                normals = u
                jac = s.radius ** (n - 1) * np.ones(len(u))
                curv = np.full(len(u), s.radius ** (1 - n))
            else:
                pts = s.center + u @ s.sqrt_inv.T
                g = u @ s.sqrt.T
                gn = np.linalg.norm(g, axis=1)
                jac = s.det_sqrt_inv * gn
                normals = g / gn[:, None]
                detA = float(np.prod(s.eigvals))
                an = np.linalg.norm((pts - s.center) @ s.shape.T, axis=1)
                curv = detA / an ** (n + 1)
            w = w_sphere * jac
            return BoundarySample(pts, normals, w, curv, np.einsum("ij,ij->i", pts, normals))
        # polytope facets
        pts, normals, w = [], [], []
        if n == 2:
            ring = s.vertices[s.ring]
            q = max(4, int(resolution) // max(1, len(ring)))
            gx, gw = np.polynomial.legendre.leggauss(q)
            gx = 0.5 * (gx + 1.0)
            gw = 0.5 * gw
            for i in range(len(ring)):
                a, b = ring[i], ring[(i + 1) % len(ring)]
                e = b - a
                length = float(np.linalg.norm(e))
                nrm = np.array([e[1], -e[0]]) / length
                pts.append(a + gx[:, None] * e)
                normals.append(np.tile(nrm, (q, 1)))
                w.append(gw * length)
        else:
            splits = max(1, int(round(math.sqrt(max(resolution, 1) / max(1, len(s.triangles))))))
            bl = []
            for i in range(splits):
                for j in range(splits - i):
                    bl.append(((i + 1.0 / 3.0) / splits, (j + 1.0 / 3.0) / splits))
                    if i + j < splits - 1:
                        bl.append(((i + 2.0 / 3.0) / splits, (j + 2.0 / 3.0) / splits))
            bl = np.asarray(bl)
            for t in s.triangles:
                a, b, c = s.vertices[t]
                cr = np.cross(b - a, c - a)
                area2 = float(np.linalg.norm(cr))
                nrm = cr / area2
                sub = a + bl[:, :1] * (b - a) + bl[:, 1:2] * (c - a)
                pts.append(sub)
                normals.append(np.tile(nrm, (len(bl), 1)))
                w.append(np.full(len(bl), 0.5 * area2 / len(bl)))
        pts = np.vstack(pts)
        normals = np.vstack(normals)
        w = np.concatenate(w)
        curv = np.zeros(len(w))
        return BoundarySample(pts, normals, w, curv, np.einsum("ij,ij->i", pts, normals))

    def surface_area(self) -> float:
        """Analytic surface area (ball, 2D ellipse, polytope); quadrature otherwise."""
        s = self.shape
        if isinstance(s, Ball):
            return unit_sphere_area(self.dim) * s.radius ** (self.dim - 1)
        if isinstance(s, Polytope):
            if self.dim == 2:
                ring = s.vertices[s.ring]
                return float(np.linalg.norm(np.roll(ring, -1, axis=0) - ring, axis=1).sum())
            total = 0.0
            for t in s.triangles:
                a, b, c = s.vertices[t]
                total += 0.5 * float(np.linalg.norm(np.cross(b - a, c - a)))
            return total
        if self.dim == 2:
            from scipy.special import ellipe

            ax = np.sort(1.0 / np.sqrt(s.eigvals))[::-1]  # semi-axes, a >= b
            return 4.0 * ax[0] * float(ellipe(1.0 - (ax[1] / ax[0]) ** 2))
        return float(self.boundary_quadrature(16384).weights.sum())

    def __repr__(self) -> str:
        return f"BodyHandle({self.shape.__class__.__name__}, dim={self.dim}, volume={self.volume:.6g})"
