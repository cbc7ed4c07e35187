"""Two-dimensional flotation equilibria for a uniform-density convex body.

A body of relative density rho in (0, 1) floats with up-direction u when its
barycenter g sits directly above the buoyancy center b(u), i.e. g - b(u) is
parallel to u. The submerged part is the cap of area fraction rho on the -u
side of the waterline. Equilibria are located as sign changes of the torque
proxy tau(u) = cross(u, g - b(u)) over an angle grid, refined by bisection.
No stability classification is attempted (that would need a potential-energy
second derivative, which is out of scope here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .caps import cap_barycenter, cut_height
from .float_bodies import build_ulam_body
from .geometry import BodyHandle, as_direction
from .weights import WeightFunction

_W1 = WeightFunction.constant(1.0)


def normalized_float_body(body: BodyHandle) -> BodyHandle:
    """Copy scaled to unit area with barycenter at the origin (2D)."""
    if body.dim != 2:
        raise ValueError("flotation is implemented in the plane only")
    scaled = body.scale(body.volume ** -0.5)
    return scaled.translate(-scaled.barycenter)


def _cross2(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def buoyancy_center(body: BodyHandle, rho: float, u) -> np.ndarray:
    """Barycenter of the submerged cap (area fraction rho on the -u side)."""
    if not 0.0 < rho < 1.0:
        raise ValueError("relative density must lie in (0, 1)")
    u = as_direction(u)
    down = -u
    d = cut_height(body, _W1, down, rho * body.volume)
    return cap_barycenter(body, _W1, down, d)


def emerged_barycenter(body: BodyHandle, rho: float, u) -> np.ndarray:
    """Barycenter of the part above the waterline (area fraction 1 - rho)."""
    if not 0.0 < rho < 1.0:
        raise ValueError("relative density must lie in (0, 1)")
    u = as_direction(u)
    d = cut_height(body, _W1, u, (1.0 - rho) * body.volume)
    return cap_barycenter(body, _W1, u, d)


def torque(body: BodyHandle, rho: float, u) -> float:
    """Signed torque proxy cross(u, g - b(u)); zero exactly at equilibria."""
    u = as_direction(u)
    return _cross2(u, body.barycenter - buoyancy_center(body, rho, u))


def collinearity_residual(body: BodyHandle, rho: float, u) -> float:
    """|cross(b - g, a - g)| for buoyancy center b and emerged barycenter a.

    Vanishes identically: the barycenter, the buoyancy center and the emerged
    part's barycenter always lie on one line.
    """
    u = as_direction(u)
    g = body.barycenter
    b = buoyancy_center(body, rho, u) - g
    a = emerged_barycenter(body, rho, u) - g
    return abs(_cross2(b, a))


@dataclass
class FlotationResult:
    angles: np.ndarray
    floats_in_every_position: bool
    max_torque: float
    rho: float
    angular_resolution: int

    def directions(self) -> np.ndarray:
        return np.column_stack([np.cos(self.angles), np.sin(self.angles)])

    def to_json(self) -> dict:
        return {
            "equilibrium_angles": self.angles.tolist(),
            "floats_in_every_position": bool(self.floats_in_every_position),
            "max_torque": self.max_torque,
            "rho": self.rho,
            "angular_resolution": self.angular_resolution,
        }


def equilibrium_directions(body: BodyHandle, rho: float, angular_resolution: int = 4096,
                           refine_tol: float = 1e-10,
                           everywhere_tol: float = 1e-12) -> FlotationResult:
    """All equilibrium up-directions, from a scan plus bisection refinement.

    When the torque vanishes on the whole grid (within ``everywhere_tol``,
    scaled by the body diameter) the body floats in every position and the
    full grid is returned with the flag set.
    """
    if body.dim != 2:
        raise ValueError("flotation is implemented in the plane only")
    angles = 2.0 * math.pi * np.arange(angular_resolution) / angular_resolution
    taus = np.array([torque(body, rho, np.array([math.cos(t), math.sin(t)])) for t in angles])
    max_tau = float(np.max(np.abs(taus)))
    if max_tau <= everywhere_tol * max(1.0, body.diameter):
        return FlotationResult(angles, True, max_tau, rho, angular_resolution)
    roots = []
    for i in range(angular_resolution):
        j = (i + 1) % angular_resolution
        ti, tj = taus[i], taus[j]
        if ti == 0.0:
            roots.append(angles[i])
            continue
        if ti * tj < 0.0:
            lo, hi = angles[i], angles[i] + 2.0 * math.pi / angular_resolution
            flo = ti
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = torque(body, rho, np.array([math.cos(mid), math.sin(mid)]))
                if abs(fm) <= refine_tol:
                    lo = hi = mid
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi) % (2.0 * math.pi))
    roots = np.array(sorted(set(np.round(roots, 12))))
    # merge near-duplicates (a root on a grid node can be found twice)
    if len(roots) > 1:
        keep = [roots[0]]
        for r in roots[1:]:
            if r - keep[-1] > 1e-9:
                keep.append(r)
        if keep[0] + 2.0 * math.pi - keep[-1] <= 1e-9:
            keep.pop()
        roots = np.array(keep)
    return FlotationResult(roots, False, max_tau, rho, angular_resolution)


def ulam_body_roundness(body: BodyHandle, delta: float, m: int = 512) -> float:
    """Sphericity score of the cap-barycenter body: min/max distance to a
    least-squares center fit of its boundary points (1.0 means round)."""
    approx = build_ulam_body(body, _W1, delta, m=m, with_gap=False)
    pts = approx.boundary_points
    A = np.column_stack([2.0 * pts, np.ones(len(pts))])
    rhs = np.einsum("ij,ij->i", pts, pts)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    center = sol[: body.dim]
    dist = np.linalg.norm(pts - center, axis=1)
    return float(dist.min() / dist.max())
