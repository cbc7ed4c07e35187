"""Halfspace cap machinery: weighted cap mass, cut heights, cap barycenters.

A cap is ``body ∩ {x : <x,theta> >= d}`` for a unit direction theta. Backends:

- ``analytic``: ball or ellipsoid with a constant weight, via the regularized
  incomplete beta function (ellipsoids reduce to the unit ball through their
  defining affine map);
- ``exact-clip``: polytope with a constant weight, via exact polygon /
  polyhedron clipping and signed simplex fans;
- ``slice-quadrature``: any body with a smooth weight, via panelwise
  Gauss-Legendre integration of weighted cross-section integrals (balls are
  parametrized by polar angle so the endpoint square roots stay smooth);
- ``monte-carlo``: seeded stratified rejection sampling in the cap slab,
  exposed separately as a cross check.

Cut heights are found by bisection on panelwise polynomial antiderivatives,
which is exact for constant weights on polytopes (the cross-section measure is
piecewise polynomial between vertex heights).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.special import betainc

from .geometry import (
    Ball,
    BodyHandle,
    Ellipsoid,
    Polytope,
    as_direction,
    unit_ball_volume,
)
from .weights import WeightFunction

MASS_REL_TOL = 1e-10          # |cap_mass(cut_height(delta)) - delta| <= tol * total
_SMOOTH_PANEL_NODES = 10
_CONST_PANEL_NODES = 5
_MIN_SMOOTH_PANELS = 8
_PROFILE_CACHE: dict = {}
_PROFILE_CACHE_MAX = 16384
_TOTAL_MASS_CACHE: dict = {}


@dataclass(frozen=True)
class CapCut:
    """One resolved cap: direction, cut height, weighted mass and barycenter."""

    theta: np.ndarray
    d: float
    mass: float
    barycenter: np.ndarray
    backend: str
    error_estimate: float

    def to_json(self) -> dict:
        return {
            "theta": self.theta.tolist(),
            "d": self.d,
            "mass": self.mass,
            "barycenter": self.barycenter.tolist(),
            "backend": self.backend,
            "error_estimate": self.error_estimate,
        }


def support_interval(body: BodyHandle, theta: np.ndarray) -> tuple[float, float]:
    """Range of <x,theta> over the body: [-h(-theta), h(theta)]."""
    return -body.support(-theta), body.support(theta)


@lru_cache(maxsize=64)
def _gl(q: int) -> tuple[np.ndarray, np.ndarray]:
    return npleg.leggauss(q)


# ---------------------------------------------------------------------------
# analytic unit-ball caps
# ---------------------------------------------------------------------------


def unit_cap_volume(n: int, a: float) -> float:
    """Volume of {x in unit n-ball : x_1 >= a} for a in [-1, 1].

    Uses the complementary regularized incomplete beta in the small-|a| regime,
    where evaluating at 1 - a^2 would lose all precision.
    """
    a = min(1.0, max(-1.0, a))
    vn = unit_ball_volume(n)
    half_excess = 0.5 * vn * float(betainc(0.5, 0.5 * (n + 1), a * a))
    return 0.5 * vn - half_excess if a >= 0.0 else 0.5 * vn + half_excess


def unit_cap_axis_moment(n: int, a: float) -> float:
    """Integral of x_1 over {x in unit n-ball : x_1 >= a} (closed form)."""
    a = min(1.0, max(-1.0, a))
    return unit_ball_volume(n - 1) * (1.0 - a * a) ** (0.5 * (n + 1)) / (n + 1)


def unit_cap_height_for_volume(n: int, target: float) -> float:
    """Solve unit_cap_volume(n, a) == target by bisection on [-1, 1]."""
    vn = unit_ball_volume(n)
    if not 0.0 <= target <= vn:
        raise ValueError("target volume outside [0, |B|]")
    lo, hi = -1.0, 1.0  # volume decreases in a
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if unit_cap_volume(n, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _ball_frame(body: BodyHandle, theta: np.ndarray):
    """Reduce ball/ellipsoid caps to the unit ball: returns (thetap, offset, scale, B, detB, center).

    Cap {x : <x,theta> >= d} of the body equals center + B * (unit-ball cap in
    direction thetap at height (d - offset) / scale); masses scale by detB.
    """
    s = body.shape
    if isinstance(s, Ball):
        B = np.eye(body.dim) * s.radius
        return theta, float(np.dot(s.center, theta)), s.radius, B, s.radius ** body.dim, s.center
    w = s.sqrt_inv @ theta
    nw = float(np.linalg.norm(w))
    return w / nw, float(np.dot(s.center, theta)), nw, s.sqrt_inv, s.det_sqrt_inv, s.center


# ---------------------------------------------------------------------------
# exact polytope clipping (closed convex regions as rings / triangle soups)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region2D:
    ring: np.ndarray  # (k, 2) counterclockwise


@dataclass(frozen=True)
class Region3D:
    triangles: np.ndarray  # (t, 3, 3) outward oriented boundary triangles


def polytope_region(body: BodyHandle):
    s = body.shape
    if not isinstance(s, Polytope):
        raise TypeError("polytope_region needs a polytope body")
    if body.dim == 2:
        return Region2D(s.vertices[s.ring].copy())
    return Region3D(s.vertices[s.triangles].copy())


def _clip_ring(ring: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex ring, keeping <x,normal> >= offset."""
    if len(ring) == 0:
        return ring
    s = ring @ normal - offset
    snap = 1e-13 * max(1.0, float(np.max(np.abs(s))))  # vertices on the cut line count as kept
    s[np.abs(s) <= snap] = 0.0
    out = []
    k = len(ring)
    for i in range(k):
        j = (i + 1) % k
        si, sj = s[i], s[j]
        if si >= 0.0:
            out.append(ring[i])
        if (si > 0.0) != (sj > 0.0) and si != sj:
            lam = si / (si - sj)
            if 0.0 < lam < 1.0:
                out.append(ring[i] + lam * (ring[j] - ring[i]))
    if not out:
        return np.zeros((0, 2))
    out = np.asarray(out)
    keep = np.ones(len(out), dtype=bool)
    for i in range(len(out)):
        if np.linalg.norm(out[i] - out[i - 1]) < 1e-14:
            keep[i] = False
    return out[keep]


def _ring_area_moment(ring: np.ndarray) -> tuple[float, np.ndarray]:
    """Signed area and first moment of a counterclockwise ring (signed fan)."""
    if len(ring) < 3:
        return 0.0, np.zeros(2)
    a = ring
    b = np.roll(ring, -1, axis=0)
    cr = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    area = 0.5 * float(cr.sum())
    mom = ((a + b) * cr[:, None]).sum(axis=0) / 6.0
    return area, mom


def _plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = int(np.argmin(np.abs(normal)))
    e = np.zeros(3)
    e[k] = 1.0
    b1 = e - normal * normal[k]
    b1 /= np.linalg.norm(b1)
    return b1, np.cross(normal, b1)


def _order_section_points(pts: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """Deduplicate and angularly order coplanar points around their mean."""
    if len(pts) == 0:
        return pts
    scale = max(1.0, float(np.abs(pts).max()))
    key = np.round(pts / scale, 11)
    _, idx = np.unique(key, axis=0, return_index=True)
    pts = pts[np.sort(idx)]
    if len(pts) < 3:
        return pts
    b1, b2 = _plane_basis(normal)
    rel = pts - pts.mean(axis=0)
    ang = np.arctan2(rel @ b2, rel @ b1)
    return pts[np.argsort(ang)]


def _clip_soup(tris: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Clip an outward-oriented triangle soup, keeping <x,normal> >= offset.

    The freshly cut planar face is re-added as a fan oriented with outward
    normal -normal, so the result is again a closed oriented soup.
    """
    out = []
    cut_pts = []
    for tri in tris:
        ring = _clip_ring3(tri, normal, offset, cut_pts)
        for i in range(1, len(ring) - 1):
            out.append([ring[0], ring[i], ring[i + 1]])
    if cut_pts:
        sec = _order_section_points(np.asarray(cut_pts), normal)
        if len(sec) >= 3:
            b1, b2 = _plane_basis(normal)
            rel = sec - sec[0]
            # fan orientation: outward normal of the cut face is -normal
            for i in range(1, len(sec) - 1):
                cr = np.cross(sec[i] - sec[0], sec[i + 1] - sec[0])
                if np.dot(cr, normal) > 0.0:
                    out.append([sec[0], sec[i + 1], sec[i]])
                else:
                    out.append([sec[0], sec[i], sec[i + 1]])
    if not out:
        return np.zeros((0, 3, 3))
    return np.asarray(out)


def _clip_ring3(tri: np.ndarray, normal: np.ndarray, offset: float, cut_pts: list) -> np.ndarray:
    s = tri @ normal - offset
    snap = 1e-13 * max(1.0, float(np.max(np.abs(s))))
    s[np.abs(s) <= snap] = 0.0
    out = []
    for i in range(3):
        j = (i + 1) % 3
        if s[i] >= 0.0:
            out.append(tri[i])
        if (s[i] > 0.0) != (s[j] > 0.0) and s[i] != s[j]:
            lam = s[i] / (s[i] - s[j])
            if 0.0 < lam < 1.0:
                p = tri[i] + lam * (tri[j] - tri[i])
                out.append(p)
                cut_pts.append(p)
        elif s[i] == 0.0:
            cut_pts.append(tri[i])
    return np.asarray(out) if out else np.zeros((0, 3))


def _soup_volume_moment(tris: np.ndarray) -> tuple[float, np.ndarray]:
    """Volume and first moment of the region bounded by an oriented soup."""
    if len(tris) == 0:
        return 0.0, np.zeros(3)
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    vols = np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0
    vol = float(vols.sum())
    mom = (vols[:, None] * (a + b + c) / 4.0).sum(axis=0)
    return vol, mom


def clip_region(region, normal: np.ndarray, offset: float):
    if isinstance(region, Region2D):
        return Region2D(_clip_ring(region.ring, normal, offset))
    return Region3D(_clip_soup(region.triangles, normal, offset))


def region_volume_moment(region) -> tuple[float, np.ndarray]:
    if isinstance(region, Region2D):
        return _ring_area_moment(region.ring)
    return _soup_volume_moment(region.triangles)


def region_vertices(region) -> np.ndarray:
    if isinstance(region, Region2D):
        return region.ring
    return region.triangles.reshape(-1, 3)


def region_to_polytope(region) -> BodyHandle:
    return BodyHandle.polytope(region_vertices(region))


def cap_region(body: BodyHandle, theta: np.ndarray, d: float):
    """Exactly clipped cap of a polytope body, as a closed region."""
    return clip_region(polytope_region(body), np.asarray(theta, dtype=float), float(d))


# ---------------------------------------------------------------------------
# weighted cross sections
# ---------------------------------------------------------------------------


def _segment_quadrature(p0, p1, q=16):
    x, w = _gl(q)
    mid, half = 0.5 * (p0 + p1), 0.5 * (p1 - p0)
    nodes = mid + np.outer(x, half)
    length = float(np.linalg.norm(p1 - p0))
    return nodes, 0.5 * w * length


@lru_cache(maxsize=16)
def _duffy_grid(q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flattened collapsed-square Gauss grid (u, u*v, jacobian-weighted w)."""
    x, w = _gl(q)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    uu, vv = np.meshgrid(u, u, indexing="ij")
    ww = np.outer(wu, wu) * uu
    return uu.ravel(), (uu * vv).ravel(), ww.ravel()


def _polygon_quadrature(poly: np.ndarray, q=6):
    """Fan quadrature over a planar convex polygon given by ordered vertices."""
    ctr = poly.mean(axis=0)
    a = poly - ctr
    b = np.roll(poly, -1, axis=0) - poly
    uu, uv, ww = _duffy_grid(q)
    nodes = ctr[None, None, :] + uu[None, :, None] * a[:, None, :] + uv[None, :, None] * b[:, None, :]
    if poly.shape[1] == 2:
        dbl = np.abs(a[:, 0] * (a + b)[:, 1] - a[:, 1] * (a + b)[:, 0])
    else:
        dbl = np.linalg.norm(np.cross(a, a + b), axis=1)
    wts = ww[None, :] * dbl[:, None]
    return nodes.reshape(-1, poly.shape[1]), wts.ravel()


def _polygon_area_centroid_3d(poly: np.ndarray, normal: np.ndarray):
    b1, b2 = _plane_basis(normal)
    m = poly.mean(axis=0)
    rel = poly - m
    q = np.column_stack([rel @ b1, rel @ b2])
    area, mom = _ring_area_moment(q)
    if area < 0.0:
        area, mom = -area, -mom
    if area == 0.0:
        return 0.0, m
    c2 = mom / area
    return area, m + c2[0] * b1 + c2[1] * b2


def _polytope_chord(ring: np.ndarray, heights: np.ndarray, theta: np.ndarray, t: float):
    """Endpoints of the section segment of a convex polygon at height t."""
    pts = []
    k = len(ring)
    for i in range(k):
        j = (i + 1) % k
        hi, hj = heights[i], heights[j]
        if (hi - t) * (hj - t) <= 0.0 and hi != hj:
            lam = (t - hi) / (hj - hi)
            if 0.0 <= lam <= 1.0:
                pts.append(ring[i] + lam * (ring[j] - ring[i]))
    if len(pts) < 2:
        return None
    pts = np.asarray(pts)
    if len(pts) > 2:  # vertex hit: keep the extreme pair along the section line
        perp = np.array([-theta[1], theta[0]])
        proj = pts @ perp
        pts = pts[[int(np.argmin(proj)), int(np.argmax(proj))]]
    return pts


def _polytope_section_polygon(verts, edges, heights, theta, t):
    mask = (heights[edges[:, 0]] - t) * (heights[edges[:, 1]] - t) < 0.0
    if not np.any(mask):
        return None
    e = edges[mask]
    ha, hb = heights[e[:, 0]], heights[e[:, 1]]
    lam = (t - ha) / (hb - ha)
    pts = verts[e[:, 0]] + lam[:, None] * (verts[e[:, 1]] - verts[e[:, 0]])
    pts = _order_section_points(pts, theta)
    return pts if len(pts) >= 3 else None


# ---------------------------------------------------------------------------
# panel profiles: one-dimensional cumulative mass/moment along a direction
# ---------------------------------------------------------------------------


class CapProfile:
    """Cumulative weighted mass/moment of caps along one direction.

    The profile integrates panelwise in a parameter ``s`` with a monotone map
    ``t(s)`` to cut heights; every panel stores Legendre coefficients of the
    mass density and of the (vector) first-moment density in ``s``.
    """

    def __init__(self, breaks, eval_sections, t_of_s, s_of_t, dim, nodes):
        self.breaks = np.asarray(breaks, dtype=float)
        self.t_of_s = t_of_s
        self.s_of_t = s_of_t
        self.dim = dim
        x, w = _gl(nodes)
        P = len(self.breaks) - 1
        self.mass_coef = []
        self.mom_coef = []
        panel_mass = np.zeros(P)
        panel_mom = np.zeros((P, dim))
        err = 0.0
        for j in range(P):
            lo, hi = self.breaks[j], self.breaks[j + 1]
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            svals = mid + half * x
            g, mom = eval_sections(svals)
            cg = npleg.legfit(x, g, deg=nodes - 1)
            cm = npleg.legfit(x, mom, deg=nodes - 1)
            self.mass_coef.append(cg)
            self.mom_coef.append(cm)
            panel_mass[j] = half * float(np.dot(w, g))
            panel_mom[j] = half * (w @ mom)
            err += abs(cg[-1]) * half
        self._halves = 0.5 * np.diff(self.breaks)
        self.mass_anti = [npleg.legint(c) for c in self.mass_coef]
        self.mom_anti = [npleg.legint(c) for c in self.mom_coef]
        self._mass_anti_hi = np.array([npleg.legval(1.0, a) for a in self.mass_anti])
        self._mom_anti_hi = np.array([npleg.legval(1.0, a) for a in self.mom_anti])
        self.cum_mass = np.concatenate([np.cumsum(panel_mass[::-1])[::-1], [0.0]])
        self.cum_mom = np.vstack([np.cumsum(panel_mom[::-1], axis=0)[::-1], np.zeros(dim)])
        self.total_mass = float(self.cum_mass[0])
        self.total_moment = self.cum_mom[0].copy()
        self.error_estimate = float(err)
        self.t_lo = float(t_of_s(self.breaks[0]))
        self.t_hi = float(t_of_s(self.breaks[-1]))

    def _locate(self, s: float) -> int:
        j = int(np.searchsorted(self.breaks, s, side="right")) - 1
        return min(max(j, 0), len(self.breaks) - 2)

    def _xi(self, j: int, s: float) -> float:
        lo, hi = self.breaks[j], self.breaks[j + 1]
        return min(1.0, max(-1.0, (2.0 * s - lo - hi) / (hi - lo)))

    def _mass_above_panel(self, j: int, xi: float) -> float:
        part = self._halves[j] * (self._mass_anti_hi[j] - npleg.legval(xi, self.mass_anti[j]))
        return float(self.cum_mass[j + 1] + part)

    def mass_above_param(self, s: float) -> float:
        if s <= self.breaks[0]:
            return self.total_mass
        if s >= self.breaks[-1]:
            return 0.0
        j = self._locate(s)
        return self._mass_above_panel(j, self._xi(j, s))

    def mass_above(self, d: float) -> float:
        return self.mass_above_param(self.s_of_t(d))

    def moment_above(self, d: float) -> np.ndarray:
        s = self.s_of_t(d)
        if s <= self.breaks[0]:
            return self.total_moment.copy()
        if s >= self.breaks[-1]:
            return np.zeros(self.dim)
        j = self._locate(s)
        xi = self._xi(j, s)
        part = self._halves[j] * (self._mom_anti_hi[j] - npleg.legval(xi, self.mom_anti[j]))
        return self.cum_mom[j + 1] + part

    def cut_for_mass(self, target: float) -> float:
        """Bisection for the height whose cap mass equals ``target``.

        The containing panel is located from the cumulative masses first, then
        the panel-local polynomial antiderivative is bisected to machine width.
        """
        j = 0
        while j < len(self.cum_mass) - 2 and self.cum_mass[j + 1] > target:
            j += 1
        lo, hi = -1.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if self._mass_above_panel(j, mid) > target:
                lo = mid
            else:
                hi = mid
        xi = 0.5 * (lo + hi)
        s = 0.5 * (self.breaks[j] + self.breaks[j + 1]) + self._halves[j] * xi
        return float(self.t_of_s(s))

    def _density_param(self, s: float) -> float:
        j = self._locate(s)
        lo, hi = self.breaks[j], self.breaks[j + 1]
        xi = min(1.0, max(-1.0, (2.0 * s - lo - hi) / (hi - lo)))
        return float(npleg.legval(xi, self.mass_coef[j]))

    def weighted_height_integral(self, fn, extra_breaks_t=()) -> float:
        """Integral of fn(t) against the section mass density.

        ``extra_breaks_t`` adds panel splits at heights where fn is not smooth
        (e.g. t = 0 for |t|^p moments).
        """
        breaks = list(self.breaks)
        for tb in extra_breaks_t:
            sb = self.s_of_t(float(tb))
            if self.breaks[0] < sb < self.breaks[-1]:
                breaks.append(sb)
        breaks = np.unique(np.asarray(breaks))
        x, wq = _gl(40)
        total = 0.0
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            svals = mid + half * x
            dens = np.array([self._density_param(s) for s in svals])
            tvals = np.array([self.t_of_s(s) for s in svals])
            total += half * float(np.dot(wq, fn(tvals) * dens))
        return total


def _batched_sections(w: WeightFunction, dim: int, section_rule):
    """Panel evaluator that gathers all section nodes into one weight call."""

    def eval_sections(svals):
        g = np.zeros(len(svals))
        mom = np.zeros((len(svals), dim))
        nodes, wts, owner = [], [], []
        for i, sv in enumerate(svals):
            rule = section_rule(float(sv))
            if rule is None:
                continue
            nd, wt = rule
            nodes.append(nd)
            wts.append(wt)
            owner.append(np.full(len(wt), i))
        if not nodes:
            return g, mom
        nd = np.vstack(nodes)
        wt = np.concatenate(wts)
        own = np.concatenate(owner)
        ph = w.eval_many(nd) * wt
        g = np.bincount(own, weights=ph, minlength=len(svals))
        for k in range(dim):
            mom[:, k] = np.bincount(own, weights=ph * nd[:, k], minlength=len(svals))
        return g, mom

    return eval_sections


def _affine_pullback(w: WeightFunction, B: np.ndarray, c: np.ndarray):
    if w.constant_value is not None:
        return lambda pts: np.full(len(pts), w.constant_value)
    return lambda pts: w.eval_many(pts @ B.T + c)


def _build_profile(body: BodyHandle, w: WeightFunction, theta: np.ndarray) -> CapProfile:
    s = body.shape
    n = body.dim
    smooth = w.constant_value is None
    if isinstance(s, Polytope):
        heights = s.vertices @ theta
        t0, t1 = float(heights.min()), float(heights.max())
        span = t1 - t0
        br = np.unique(np.round((heights - t0) / span, 13)) * span + t0
        min_panels = _MIN_SMOOTH_PANELS if smooth else 1
        breaks = []
        for i in range(len(br) - 1):
            width = br[i + 1] - br[i]
            parts = max(1, int(math.ceil(width / (span / min_panels)))) if smooth else 1
            for k in range(parts):
                breaks.append(br[i] + width * k / parts)
        breaks.append(br[-1])
        breaks = np.asarray(breaks)
        if n == 2:
            ring = s.vertices[s.ring]
            ring_h = heights[s.ring]

            def section_rule(t):
                seg = _polytope_chord(ring, ring_h, theta, t)
                if seg is None:
                    return None
                return _segment_quadrature(seg[0], seg[1])

            def section_exact(t):
                seg = _polytope_chord(ring, ring_h, theta, t)
                if seg is None:
                    return 0.0, np.zeros(2)
                length = float(np.linalg.norm(seg[1] - seg[0]))
                return length, length * 0.5 * (seg[0] + seg[1])

        else:

            def section_rule(t):
                poly = _polytope_section_polygon(s.vertices, s.edges, heights, theta, t)
                if poly is None:
                    return None
                return _polygon_quadrature(poly)

            def section_exact(t):
                poly = _polytope_section_polygon(s.vertices, s.edges, heights, theta, t)
                if poly is None:
                    return 0.0, np.zeros(3)
                area, ctr = _polygon_area_centroid_3d(poly, theta)
                return area, area * ctr

        if smooth:
            eval_sections = _batched_sections(w, n, section_rule)
        else:

            def eval_sections(ts):
                g = np.zeros(len(ts))
                mom = np.zeros((len(ts), n))
                for i, t in enumerate(ts):
                    gi, mi = section_exact(t)
                    g[i] = w.constant_value * gi
                    mom[i] = w.constant_value * mi
                return g, mom

        return CapProfile(breaks, eval_sections, lambda x: x, lambda x: x, n,
                          _SMOOTH_PANEL_NODES if smooth else _CONST_PANEL_NODES)

    # ball (possibly the unit-ball pullback of an ellipsoid handled by caller)
    if not isinstance(s, Ball):
        raise TypeError("profiles are built for polytopes and balls only")
    if n > 3 and smooth:
        raise NotImplementedError("smooth weights on balls need dimension <= 3")
    c, r = s.center, s.radius
    ct = float(np.dot(c, theta))
    t_of_s = lambda sp: ct + r * math.cos(-sp)
    s_of_t = lambda t: -math.acos(min(1.0, max(-1.0, (t - ct) / r)))
    breaks = np.linspace(-math.pi, 0.0, 17)
    b1v = b2v = None
    if n == 3:
        b1v, b2v = _plane_basis(theta)

    def section_rule(sp):
        alpha = -sp
        rt = r * math.sin(alpha)
        if rt <= 0.0:
            return None
        t = ct + r * math.cos(alpha)
        center = c + (t - ct) * theta
        if n == 2:
            perp = np.array([-theta[1], theta[0]])
            return _segment_quadrature(center - rt * perp, center + rt * perp)
        qr, wr = _gl(8)
        rho = 0.5 * (qr + 1.0) * rt
        wrho = 0.5 * wr * rt * rho
        qa = 16
        ang = 2.0 * math.pi * (np.arange(qa) + 0.5) / qa
        ca, sa = np.cos(ang), np.sin(ang)
        nd = (center[None, None, :]
              + rho[:, None, None] * (ca[None, :, None] * b1v + sa[None, :, None] * b2v))
        return nd.reshape(-1, 3), np.repeat(wrho, qa) * (2.0 * math.pi / qa)

    if smooth:
        base = _batched_sections(w, n, section_rule)

        def eval_sections(svals):
            g, mom = base(svals)
            tprime = r * np.sin(-np.asarray(svals))
            return g * tprime, mom * tprime[:, None]

    else:

        def eval_sections(svals):
            g = np.zeros(len(svals))
            mom = np.zeros((len(svals), n))
            for i, sp in enumerate(svals):
                alpha = -sp
                rt = r * math.sin(alpha)
                tprime = r * math.sin(alpha)
                if rt <= 0.0:
                    continue
                t = ct + r * math.cos(alpha)
                center = c + (t - ct) * theta
                sec = w.constant_value * unit_ball_volume(n - 1) * rt ** (n - 1)
                g[i] = sec * tprime
                mom[i] = sec * tprime * center
            return g, mom

    return CapProfile(breaks, eval_sections, t_of_s, s_of_t, n, _SMOOTH_PANEL_NODES)


class _EllipsoidProfile:
    """Cap profile of an ellipsoid, delegating to its unit-ball pullback."""

    def __init__(self, body: BodyHandle, w: WeightFunction, theta: np.ndarray):
        s = body.shape
        self.c = s.center
        self.B = s.sqrt_inv
        self.detB = s.det_sqrt_inv
        wvec = s.sqrt_inv @ theta
        self.scale = float(np.linalg.norm(wvec))
        self.ct = float(np.dot(s.center, theta))
        thetap = wvec / self.scale
        unit = BodyHandle.ball(np.zeros(body.dim), 1.0)
        pulled = WeightFunction(
            "pullback", {}, _affine_pullback(w, self.B, self.c),
            is_log_concave=w.is_log_concave,
            constant_value=w.constant_value,
        )
        self.inner = _build_profile(unit, pulled, thetap)
        self.total_mass = self.detB * self.inner.total_mass
        self.error_estimate = self.detB * self.inner.error_estimate
        self.t_lo = self.ct + self.scale * self.inner.t_lo
        self.t_hi = self.ct + self.scale * self.inner.t_hi

    def _dp(self, d: float) -> float:
        return (d - self.ct) / self.scale

    def mass_above(self, d: float) -> float:
        return self.detB * self.inner.mass_above(self._dp(d))

    def moment_above(self, d: float) -> np.ndarray:
        m = self.inner.mass_above(self._dp(d))
        mom = self.inner.moment_above(self._dp(d))
        return self.detB * (self.c * m + self.B @ mom)

    def cut_for_mass(self, target: float) -> float:
        dp = self.inner.cut_for_mass(target / self.detB)
        return self.ct + self.scale * dp

    def weighted_height_integral(self, fn, extra_breaks_t=()) -> float:
        inner_breaks = tuple(self._dp(t) for t in extra_breaks_t)
        return self.detB * self.inner.weighted_height_integral(
            lambda tp: fn(self.ct + self.scale * tp), inner_breaks)


def _theta_key(theta: np.ndarray) -> bytes:
    return np.round(theta, 14).tobytes()


def get_profile(body: BodyHandle, w: WeightFunction, theta: np.ndarray):
    key = (body.uid, w.uid, _theta_key(theta))
    prof = _PROFILE_CACHE.get(key)
    if prof is None:
        if isinstance(body.shape, Ellipsoid):
            prof = _EllipsoidProfile(body, w, theta)
        else:
            prof = _build_profile(body, w, theta)
        if len(_PROFILE_CACHE) >= _PROFILE_CACHE_MAX:
            _PROFILE_CACHE.clear()
        _PROFILE_CACHE[key] = prof
    return prof


def weighted_body_mass(body: BodyHandle, w: WeightFunction) -> float:
    """Total weight mass over the body (profile integration for smooth weights)."""
    if w.constant_value is not None:
        return w.constant_value * body.volume
    key = (body.uid, w.uid)
    val = _TOTAL_MASS_CACHE.get(key)
    if val is None:
        e1 = np.zeros(body.dim)
        e1[0] = 1.0
        val = get_profile(body, w, e1).total_mass
        _TOTAL_MASS_CACHE[key] = val
    return val


# ---------------------------------------------------------------------------
# public cap operations
# ---------------------------------------------------------------------------


def backend_name(body: BodyHandle, w: WeightFunction) -> str:
    if w.constant_value is not None:
        return "analytic" if isinstance(body.shape, (Ball, Ellipsoid)) else "exact-clip"
    return "slice-quadrature"


def cap_mass(body: BodyHandle, w: WeightFunction, theta, d: float) -> float:
    """Weighted mass of body ∩ {<x,theta> >= d}."""
    theta = as_direction(theta)
    d = float(d)
    if w.constant_value is not None:
        s = w.constant_value
        if isinstance(body.shape, (Ball, Ellipsoid)):
            _, off, scale, _, detB, _ = _ball_frame(body, theta)
            return s * detB * unit_cap_volume(body.dim, (d - off) / scale)
        vol, _ = region_volume_moment(cap_region(body, theta, d))
        return s * vol
    return get_profile(body, w, theta).mass_above(d)


def cap_moment(body: BodyHandle, w: WeightFunction, theta, d: float) -> np.ndarray:
    """Weighted first moment vector of the cap (integral of y * phi(y))."""
    theta = as_direction(theta)
    d = float(d)
    if w.constant_value is not None:
        s = w.constant_value
        if isinstance(body.shape, (Ball, Ellipsoid)):
            thetap, off, scale, B, detB, c = _ball_frame(body, theta)
            a = (d - off) / scale
            vol = unit_cap_volume(body.dim, a)
            axis = unit_cap_axis_moment(body.dim, a)
            return s * detB * (c * vol + B @ (axis * thetap))
        vol, mom = region_volume_moment(cap_region(body, theta, d))
        return s * mom
    return get_profile(body, w, theta).moment_above(d)


def cap_barycenter(body: BodyHandle, w: WeightFunction, theta, d: float) -> np.ndarray:
    """Weighted barycenter of the cap; rejects (near-)zero-mass caps."""
    mass = cap_mass(body, w, theta, d)
    if mass <= 1e-300:
        raise ValueError("cap has zero mass; barycenter undefined")
    return cap_moment(body, w, theta, d) / mass


def cap_first_moment(body: BodyHandle, w: WeightFunction, theta, d: float) -> float:
    """Integral of <theta, y> * phi(y) over the cap."""
    theta = as_direction(theta)
    return float(np.dot(cap_moment(body, w, theta, d), theta))


def cut_height(body: BodyHandle, w: WeightFunction, theta, delta: float) -> float:
    """Height d with cap_mass(theta, d) == delta, by bisection.

    Boundary convention: delta == 0 returns h(theta) and delta == total mass
    returns -h(-theta); values outside [0, total] are rejected.
    """
    theta = as_direction(theta)
    total = weighted_body_mass(body, w)
    delta = float(delta)
    if delta < -1e-12 * total or delta > total * (1.0 + 1e-12):
        raise ValueError(f"delta={delta!r} outside [0, total mass {total!r}]")
    lo_t, hi_t = support_interval(body, theta)
    if delta <= 0.0:
        return hi_t
    if delta >= total:
        return lo_t
    if w.constant_value is not None and isinstance(body.shape, (Ball, Ellipsoid)):
        _, off, scale, _, detB, _ = _ball_frame(body, theta)
        a = unit_cap_height_for_volume(body.dim, delta / (w.constant_value * detB))
        return off + scale * a
    return get_profile(body, w, theta).cut_for_mass(delta)


def cap_cut(body: BodyHandle, w: WeightFunction, theta, delta: float | None = None,
            d: float | None = None) -> CapCut:
    """Resolve a cap from either its mass or its cut height."""
    theta = as_direction(theta)
    if (delta is None) == (d is None):
        raise ValueError("provide exactly one of delta or d")
    if d is None:
        d = cut_height(body, w, theta, delta)
    mass = cap_mass(body, w, theta, d)
    bary = cap_barycenter(body, w, theta, d)
    backend = backend_name(body, w)
    err = 0.0
    if backend == "slice-quadrature":
        err = float(get_profile(body, w, theta).error_estimate)
    return CapCut(theta, float(d), float(mass), bary, backend, err)


# ---------------------------------------------------------------------------
# Monte Carlo cross-check backend
# ---------------------------------------------------------------------------


def _body_box_frame(body: BodyHandle, theta: np.ndarray):
    """Orthonormal frame starting with theta plus support bounds per axis."""
    n = body.dim
    M = np.eye(n)
    M[:, 0] = theta
    Q, _ = np.linalg.qr(M)
    if np.dot(Q[:, 0], theta) < 0:
        Q[:, 0] *= -1.0
    bounds = np.array([support_interval(body, Q[:, j]) for j in range(n)])
    return Q, bounds


def cap_mass_mc(body: BodyHandle, w: WeightFunction, theta, d: float,
                samples: int = 200000, seed: int = 0, strata: int = 16,
                beta_cut: tuple | None = None) -> tuple[float, float]:
    """Stratified rejection estimate of the cap mass, with standard error.

    ``beta_cut=(beta, offset)`` additionally restricts to <x,beta> >= offset,
    which is used by the barycenter-halfspace mass checks.
    """
    theta = as_direction(theta)
    rng = np.random.default_rng(seed)
    Q, bounds = _body_box_frame(body, theta)
    lo = bounds[:, 0].copy()
    hi = bounds[:, 1].copy()
    lo[0] = max(lo[0], float(d))
    if hi[0] <= lo[0]:
        return 0.0, 0.0
    per = max(1, samples // strata)
    edges = np.linspace(lo[0], hi[0], strata + 1)
    total, var = 0.0, 0.0
    widths = hi[1:] - lo[1:]
    for k in range(strata):
        u = rng.random((per, body.dim))
        coords = np.empty_like(u)
        coords[:, 0] = edges[k] + u[:, 0] * (edges[k + 1] - edges[k])
        coords[:, 1:] = lo[1:] + u[:, 1:] * widths
        pts = coords @ Q.T
        inside = body.contains_many(pts)
        if beta_cut is not None:
            inside &= (pts @ beta_cut[0]) >= beta_cut[1]
        vals = np.where(inside, w.eval_many(pts), 0.0)
        cell = (edges[k + 1] - edges[k]) * float(np.prod(widths))
        total += cell * float(vals.mean())
        var += cell ** 2 * float(vals.var(ddof=1)) / per
    return total, math.sqrt(var)


def cap_moment_mc(body: BodyHandle, w: WeightFunction, theta, d: float,
                  samples: int = 200000, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Plain Monte Carlo estimate of the cap first-moment vector."""
    theta = as_direction(theta)
    rng = np.random.default_rng(seed)
    Q, bounds = _body_box_frame(body, theta)
    lo, hi = bounds[:, 0].copy(), bounds[:, 1]
    lo[0] = max(lo[0], float(d))
    if hi[0] <= lo[0]:
        return np.zeros(body.dim), np.zeros(body.dim)
    u = rng.random((samples, body.dim))
    pts = (lo + u * (hi - lo)) @ Q.T
    inside = body.contains_many(pts)
    vals = np.where(inside, w.eval_many(pts), 0.0)[:, None] * pts
    box = float(np.prod(hi - lo))
    est = box * vals.mean(axis=0)
    err = box * vals.std(axis=0, ddof=1) / math.sqrt(samples)
    return est, err


# ---------------------------------------------------------------------------
# log-concave barycenter-halfspace mass bounds
# ---------------------------------------------------------------------------


def cap_halfspace_mass_fraction(body: BodyHandle, w: WeightFunction, theta, delta: float,
                                beta, mc_samples: int = 400000, seed: int = 0):
    """Fraction of the cap's mass on the beta-side of its own weighted barycenter.

    For log-concave weights this fraction lies in [1/e, 1-1/e]. Exact clipped
    regions are used for polytopes; balls/ellipsoids fall back to seeded Monte
    Carlo and also return the standard error of the fraction.
    """
    theta = as_direction(theta)
    beta = as_direction(beta)
    d = cut_height(body, w, theta, delta)
    xbar = cap_barycenter(body, w, theta, d)
    off = float(np.dot(xbar, beta))
    if isinstance(body.shape, Polytope):
        region = cap_region(body, theta, d)
        sub = clip_region(region, beta, off)
        if w.constant_value is not None:
            vol_c, _ = region_volume_moment(region)
            vol_s, _ = region_volume_moment(sub)
            return vol_s / vol_c, 0.0
        subverts = region_vertices(sub)
        if len(subverts) < body.dim + 1:
            return 0.0, 0.0
        sub_mass = weighted_body_mass(region_to_polytope(sub), w)
        return sub_mass / delta, 0.0
    est, err = cap_mass_mc(body, w, theta, d, samples=mc_samples, seed=seed,
                           beta_cut=(beta, off))
    return est / delta, err / delta
