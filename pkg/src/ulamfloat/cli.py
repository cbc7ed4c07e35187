"""Command-line interface: constructions, verification checks, and experiments.

Every output artifact embeds the resolved configuration, the tool version and
the seed, so runs are reproducible; floats are printed with 17 significant
digits and a '.' decimal separator. Exit codes: 0 success / check passed,
1 check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__, asa, cap_calculus, flotation
from . import float_bodies as fb
from .caps import cap_cut
from .geometry import BodyHandle
from .utils import fmt, set_worker_count
from .weights import WeightFunction, total_mass


class UsageError(Exception):
    pass


def _load_json(path: str, what: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise UsageError(f"{what} file not found: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path} is not valid JSON: {exc}")


def _load_body(path: str) -> BodyHandle:
    spec = _load_json(path, "body spec")
    try:
        return BodyHandle.from_json(spec)
    except (KeyError, ValueError, TypeError) as exc:
        field = exc.args[0] if isinstance(exc, KeyError) else exc
        raise UsageError(f"bad body spec {path}: {field}")


def _load_weight(path: str | None, body: BodyHandle) -> WeightFunction:
    if path is None:
        return WeightFunction.constant(1.0)
    spec = _load_json(path, "weight spec")
    try:
        return WeightFunction.from_json(spec, host=body)
    except (KeyError, ValueError, TypeError) as exc:
        field = exc.args[0] if isinstance(exc, KeyError) else exc
        raise UsageError(f"bad weight spec {path}: {field}")


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise UsageError(f"bad vector {text!r}: expected comma-separated floats")


def _emit(payload: dict, args) -> None:
    doc = {
        "tool": "ulamfloat",
        "version": __version__,
        "config": {k: v for k, v in sorted(vars(args).items())
                   if k != "func" and not callable(v)},
        **payload,
    }
    text = json.dumps(doc, indent=2, default=_jsonable)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return float(x)
    raise TypeError(f"not serializable: {type(x)!r}")


def _write_record_csv(rec, path: str | None, args) -> None:
    rows = rec.csv_rows()
    header = ["k", "delta", "ratio_lo", "ratio_hi", "extrapolated", "reference"]
    meta = json.dumps({"tool": "ulamfloat", "version": __version__,
                       "config": {k: v for k, v in sorted(vars(args).items())
                                  if k != "func" and not callable(v)}},
                      default=_jsonable)
    lines = [f"# {meta}", ",".join(header)]
    for row in rows:
        cells = []
        for col in header:
            val = row[col]
            if col == "k":
                cells.append(str(val))
            elif isinstance(val, float) and math.isnan(val):
                cells.append("")
            else:
                cells.append(fmt(val))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as handle:
            handle.write(text)
    else:
        print(text, end="")


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def cmd_body(args) -> int:
    body = _load_body(args.body)
    _emit({"result": {
        "spec": body.to_json(),
        "dim": body.dim,
        "volume": body.volume,
        "barycenter": body.barycenter,
        "interior_point": body.interior_point,
        "inradius": body.inradius,
        "diameter": body.diameter,
        "surface_area": body.surface_area(),
    }}, args)
    return 0


def cmd_cut(args) -> int:
    body = _load_body(args.body)
    w = _load_weight(args.weight, body)
    theta = _parse_vector(args.theta)
    cut = cap_cut(body, w, theta, delta=args.delta)
    _emit({"result": {"d": cut.d, "mass": cut.mass, "barycenter": cut.barycenter,
                      "backend": cut.backend, "error_estimate": cut.error_estimate,
                      "theta": cut.theta}}, args)
    return 0


def cmd_ulam(args) -> int:
    body = _load_body(args.body)
    w = _load_weight(args.weight, body)
    approx = fb.build_ulam_body(body, w, args.delta, m=args.dirs)
    _emit({"result": approx.to_json()}, args)
    return 0


def cmd_floating(args) -> int:
    body = _load_body(args.body)
    w = _load_weight(args.weight, body)
    try:
        approx = fb.build_floating_body(body, w, args.delta, m=args.dirs)
    except fb.EmptyBodyError as exc:
        _emit({"result": None, "diagnostic": str(exc)}, args)
        return 1
    _emit({"result": approx.to_json()}, args)
    return 0


def cmd_zp(args) -> int:
    body = _load_body(args.body)
    approx = fb.build_zp_body(body, args.p, m=args.dirs)
    _emit({"result": approx.to_json()}, args)
    return 0


def cmd_check(args) -> int:
    body = _load_body(args.body)
    if args.which == "sandwich":
        w = _load_weight(args.weight, body)
        delta = args.delta * total_mass(w, body) if args.delta_relative else args.delta
        report = fb.sandwich_check(body, w, delta, m=args.dirs)
    elif args.which == "zp-sandwich":
        report = fb.zp_sandwich_check(fb.normalized_unit_volume(body), args.delta, m=args.dirs)
    else:
        report = fb.symmetry_check(fb.normalized_unit_volume(body), args.delta, m=args.dirs)
    _emit({"result": report.to_json()}, args)
    return 0 if report.passed else 1


def cmd_asa(args) -> int:
    body = _load_body(args.body)
    p = math.inf if args.p in ("inf", "+inf") else (-math.inf if args.p == "-inf" else float(args.p))
    val = asa.asa_p(body, p)
    _emit({"result": {"p": args.p, "as_p": val}}, args)
    return 0


def cmd_limit(args) -> int:
    body = _load_body(args.body)
    w = _load_weight(args.weight, body)
    rec = asa.limit_experiment(body, w, delta0=args.delta0, k_max=args.steps - 1,
                               m=args.dirs)
    _write_record_csv(rec, args.out, args)
    summary = {
        "extrapolated": rec.extrapolated_final,
        "uncertainty": rec.uncertainty,
        "reference": rec.reference,
        "reference_detail": rec.reference_detail,
    }
    print(json.dumps({"summary": summary}, indent=2, default=_jsonable), file=sys.stderr)
    return 0


def cmd_pasa(args) -> int:
    body = _load_body(args.body)
    rec = asa.corollary_pasa_experiment(body, args.p, delta0=args.delta0,
                                        k_max=args.steps - 1, m=args.dirs)
    _write_record_csv(rec, args.out, args)
    return 0


def cmd_grad_check(args) -> int:
    report = cap_calculus.grad_check(samples=args.samples, seed=args.seed)
    _emit({"result": report.to_json()}, args)
    return 0 if report.passed else 1


def cmd_float2d(args) -> int:
    body = flotation.normalized_float_body(_load_body(args.body))
    res = flotation.equilibrium_directions(body, args.rho,
                                           angular_resolution=args.angles,
                                           refine_tol=args.tol)
    _emit({"result": res.to_json()}, args)
    return 0


def cmd_roundness(args) -> int:
    body = _load_body(args.body)
    score = flotation.ulam_body_roundness(body, args.delta, m=args.dirs)
    _emit({"result": {"delta": args.delta, "roundness": score}}, args)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ulamfloat",
        description="floating-body constructions and experiments for convex bodies",
    )
    parser.add_argument("--threads", type=int, default=1,
                        help="worker count for grid evaluations (env ULAMFLOAT_THREADS overrides)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=handler)
        return p

    p = add("body", cmd_body, help="inspect a body spec")
    p.add_argument("--body", required=True)
    p.add_argument("--out")

    p = add("cut", cmd_cut, help="resolve one cap from its mass")
    p.add_argument("--body", required=True)
    p.add_argument("--weight")
    p.add_argument("--theta", required=True, help="comma-separated direction")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")

    for name, handler in (("ulam", cmd_ulam), ("floating", cmd_floating)):
        p = add(name, handler, help=f"build the {name} body on a direction grid")
        p.add_argument("--body", required=True)
        p.add_argument("--weight")
        p.add_argument("--delta", type=float, required=True)
        p.add_argument("--dirs", type=int, default=512)
        p.add_argument("--out")

    p = add("zp", cmd_zp, help="build a centroid body of order p")
    p.add_argument("--body", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--dirs", type=int, default=512)
    p.add_argument("--out")

    p = add("check", cmd_check, help="run a verification check")
    p.add_argument("which", choices=["sandwich", "zp-sandwich", "symmetry"])
    p.add_argument("--body", required=True)
    p.add_argument("--weight")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--delta-relative", action="store_true",
                   help="interpret --delta as a fraction of the total mass (sandwich)")
    p.add_argument("--dirs", type=int, default=512)
    p.add_argument("--out")

    p = add("asa", cmd_asa, help="Lp affine surface area of a smooth body")
    p.add_argument("--body", required=True)
    p.add_argument("--p", default="1", help="float, or inf/-inf")
    p.add_argument("--out")

    for name, handler in (("limit", cmd_limit), ("pasa", cmd_pasa)):
        p = add(name, handler, help=f"run the {name} volume-ratio experiment (CSV)")
        p.add_argument("--body", required=True)
        if name == "limit":
            p.add_argument("--weight")
        else:
            p.add_argument("--p", type=float, required=True)
        p.add_argument("--delta0", type=float, default=1e-2)
        p.add_argument("--steps", type=int, default=6)
        p.add_argument("--dirs", type=int, default=2048)
        p.add_argument("--out")

    p = add("grad-check", cmd_grad_check, help="finite-difference derivative validation")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out")

    p = add("float2d", cmd_float2d, help="planar flotation equilibria")
    p.add_argument("--body", required=True)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--angles", type=int, default=4096)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")

    p = add("roundness", cmd_roundness, help="sphericity score of the cap-barycenter body")
    p.add_argument("--body", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--dirs", type=int, default=512)
    p.add_argument("--out")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    set_worker_count(args.threads)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
