"""Positive continuous weight functions on a convex body.

Supported kinds:

- ``constant(s)``: phi(x) = s > 0, log-concave;
- ``gaussian(center, sigma)``: phi(x) = exp(-||x-center||^2 / (2 sigma^2)),
  log-concave;
- ``phi_p(p, host)``: the curvature/support weight
  ``<x,N(x)>^(n(n+1)(p-1)/(2(n+p))) / kappa(x)^(n(p-1)/(2(n+p)))`` evaluated at
  the boundary point hit by the ray from the host body's interior point through
  x, extended off the boundary either radially (constant along rays, default) or
  as a boundary-value collar blended into the mean boundary value.

Weights are immutable; evaluation is pure and vectorized.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .geometry import Ball, BodyHandle, Ellipsoid, Polytope

_uid_counter = itertools.count()


class WeightFunction:
    """Positive weight on a host body; see module docstring for kinds."""

    def __init__(self, kind, params, eval_many, is_log_concave, constant_value=None, label=None):
        self.kind = kind
        self.params = params
        self._eval_many = eval_many
        self.is_log_concave = is_log_concave
        # set when the weight is a constant function (enables analytic cap backends)
        self.constant_value = constant_value
        self.label = label or kind
        self.uid = next(_uid_counter)

    # -- constructors --------------------------------------------------------

    @staticmethod
    def constant(s: float = 1.0) -> "WeightFunction":
        s = float(s)
        if not s > 0.0:
            raise ValueError("constant weight must be positive")
        return WeightFunction(
            "constant", {"s": s},
            lambda pts: np.full(len(np.atleast_2d(pts)), s),
            is_log_concave=True, constant_value=s, label=f"constant({s:g})",
        )

    @staticmethod
    def gaussian(center, sigma: float = 1.0) -> "WeightFunction":
        center = np.asarray(center, dtype=float)
        sigma = float(sigma)
        if not sigma > 0.0:
            raise ValueError("gaussian sigma must be positive")

        def _eval(pts):
            d = np.atleast_2d(pts) - center
            return np.exp(-0.5 * np.einsum("ij,ij->i", d, d) / sigma ** 2)

        return WeightFunction(
            "gaussian", {"center": center, "sigma": sigma}, _eval,
            is_log_concave=True, label=f"gaussian(sigma={sigma:g})",
        )

    @staticmethod
    def phi_p(p: float, host: BodyHandle, extension: str = "radial",
              collar_width: float = 0.2) -> "WeightFunction":
        if isinstance(host.shape, Polytope):
            raise ValueError(
                "phi_p is 0 or infinite on polytope boundaries and cannot be used as a weight"
            )
        if extension not in ("radial", "collar"):
            raise ValueError("extension must be 'radial' or 'collar'")
        n = host.dim
        if p == -n:
            raise ValueError("phi_p is undefined at p = -n")
        if math.isinf(p):
            e_dot, e_kap = n * (n + 1) / 2.0, n / 2.0
        else:
            e_dot = n * (n + 1) * (p - 1.0) / (2.0 * (n + p))
            e_kap = n * (p - 1.0) / (2.0 * (n + p))
        origin = host.interior_point

        if isinstance(host.shape, Ball):
            # constant on the sphere: <x,N> = r about the center, kappa = r^(1-n)
            r = host.shape.radius
            val = r ** e_dot / (r ** (1.0 - n)) ** e_kap
            w = WeightFunction.constant(val)
            w.kind = "phi_p"
            w.params = {"p": p, "host": host.to_json(), "extension": extension}
            w.is_log_concave = None
            w.label = f"phi_p(p={p:g})"
            return w

        def _boundary_value(bpts):
            shp = host.shape
            g = (bpts - shp.center) @ shp.shape.T
            gn = np.linalg.norm(g, axis=1)
            normals = g / gn[:, None]
            detA = float(np.prod(shp.eigvals))
            kap = detA / gn ** (n + 1)
            xdn = np.einsum("ij,ij->i", bpts, normals)
            if np.any(xdn <= 0.0):
                raise ValueError("phi_p needs the frame origin inside the host body")
            return xdn ** e_dot / kap ** e_kap

        def _eval(pts):
            pts = np.atleast_2d(pts)
            d = pts - origin
            nd = np.linalg.norm(d, axis=1)
            out = np.empty(len(pts))
            tiny = nd < 1e-13 * max(1.0, host.diameter)
            if np.any(tiny):
                e1 = np.zeros(n)
                e1[0] = 1.0
                t = host.radial_boundary_scale(origin, e1)
                out[tiny] = _boundary_value((origin + t * e1)[None, :])[0]
            idx = np.flatnonzero(~tiny)
            if idx.size:
                u = d[idx] / nd[idx, None]
                t = np.array([host.radial_boundary_scale(origin, ui) for ui in u])
                vals = _boundary_value(origin + t[:, None] * u)
                if extension == "radial":
                    out[idx] = vals
                else:
                    # collar: boundary value near the boundary, mean value inside
                    frac = nd[idx] / t
                    mean_val = float(np.mean(_boundary_value(
                        host.boundary_quadrature(512).points)))
                    lo, hi = 1.0 - 2.0 * collar_width, 1.0 - collar_width
                    lam = np.clip((frac - lo) / (hi - lo), 0.0, 1.0)
                    out[idx] = (1.0 - lam) * mean_val + lam * vals
            return out

        return WeightFunction(
            "phi_p", {"p": p, "host": host.to_json(), "extension": extension}, _eval,
            is_log_concave=None, label=f"phi_p(p={p:g})",
        )

    @staticmethod
    def from_json(spec, host: BodyHandle | None = None) -> "WeightFunction":
        if isinstance(spec, str):
            import json

            spec = json.loads(spec)
        kind = spec.get("kind")
        if kind == "constant":
            return WeightFunction.constant(spec.get("s", 1.0))
        if kind == "gaussian":
            return WeightFunction.gaussian(spec["center"], spec.get("sigma", 1.0))
        if kind == "phi_p":
            if host is None:
                raise ValueError("phi_p weight requires a host body")
            return WeightFunction.phi_p(spec["p"], host, spec.get("extension", "radial"))
        raise ValueError(f"unknown weight kind {kind!r} (expected constant|gaussian|phi_p)")

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "constant":
            out["s"] = self.constant_value
        elif self.kind == "gaussian":
            out["center"] = self.params["center"].tolist()
            out["sigma"] = self.params["sigma"]
        elif self.kind == "phi_p":
            out["p"] = self.params["p"]
            out["extension"] = self.params.get("extension", "radial")
        return out

    # -- evaluation ----------------------------------------------------------

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        return self._eval_many(np.atleast_2d(np.asarray(pts, dtype=float)))

    def __call__(self, x) -> float:
        return float(self.eval_many(np.asarray(x, dtype=float)[None, :])[0])

    def compose_linear(self, M) -> "WeightFunction":
        """Weight x -> phi(M x); used for equivariance checks (phi o T^{-1} with M = T^{-1})."""
        M = np.asarray(M, dtype=float)
        base = self._eval_many
        if self.constant_value is not None:
            return WeightFunction.constant(self.constant_value)
        return WeightFunction(
            "linear_image", {"matrix": M, "base": self.label},
            lambda pts, _b=base, _M=M: _b(np.atleast_2d(pts) @ _M.T),
            is_log_concave=self.is_log_concave, label=f"{self.label}∘M",
        )


def eval_weight(w: WeightFunction, body: BodyHandle, x) -> float:
    """Evaluate the weight at a point of the host body; rejects outside points."""
    x = np.asarray(x, dtype=float)
    if not body.contains(x, tol=1e-9 * max(1.0, body.diameter)):
        raise ValueError("weight evaluation point lies outside the body")
    return w(x)


def total_mass(w: WeightFunction, body: BodyHandle) -> float:
    """Integral of the weight over the body (exact for constants)."""
    if w.constant_value is not None:
        return w.constant_value * body.volume
    from .caps import weighted_body_mass

    return weighted_body_mass(body, w)
