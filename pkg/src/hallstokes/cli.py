"""Command line driver: every subcommand prints one JSON document on stdout."""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .charges import RaySpec, StabilityCondition, parse_exact_complex
from .errors import ConfigurationError, HallStokesError
from .graded import GradedLieElement, LieAlgebraSpec
from .quiver import (HallElement, IsoClass, QuiverSpec, hall_algebra, hall_lie_spec, hall_product,
                     indicator, kappa, one, splus)

EXIT_USAGE = 2
EXIT_FAILURE = 1


class UsageError(Exception):
    pass


# -- parsing helpers ----------------------------------------------------------------

def parse_quiver(s) -> int:
    if isinstance(s, int):
        n = s
    else:
        m = re.fullmatch(r"\s*[Aa]?(\d+)\s*", str(s))
        if not m:
            raise UsageError(f"bad quiver {s!r}; expected e.g. A2")
        n = int(m.group(1))
    if n < 1:
        raise UsageError("quiver needs at least one vertex")
    return n


def parse_class(s) -> tuple:
    if isinstance(s, (list, tuple)):
        vals = s
    else:
        vals = [x for x in str(s).replace("(", "").replace(")", "").split(",") if x.strip()]
    try:
        return tuple(int(x) for x in vals)
    except ValueError as exc:
        raise UsageError(f"bad class {s!r}") from exc


def parse_complex(s) -> complex:
    if isinstance(s, (list, tuple)) and len(s) == 2:
        return complex(float(s[0]), float(s[1]))
    if isinstance(s, (int, float)):
        return complex(s)
    try:
        return complex(str(s).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"bad complex number {s!r}") from exc


def parse_complex_list(s) -> list[complex]:
    if isinstance(s, list):
        return [parse_complex(x) for x in s]
    s = str(s).strip()
    if s.endswith(".json") and os.path.exists(s):
        with open(s) as fh:
            return parse_complex_list(json.load(fh))
    if s.startswith("["):
        try:
            data = json.loads("[" + s + "]") if not s.startswith("[[") else json.loads(s)
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad list {s!r}") from exc
        if data and not isinstance(data[0], list):
            data = [data]
        if len(data) == 1 and isinstance(data[0], list) and data[0] and isinstance(data[0][0], list):
            data = data[0]
        return [parse_complex(x) for x in data]
    return [parse_complex(x) for x in s.split(",") if x.strip()]


def make_Z(args, N: int) -> StabilityCondition:
    if getattr(args, "Z_exact", None):
        vals = args.Z_exact if isinstance(args.Z_exact, list) else args.Z_exact.split(",")
        try:
            Z = StabilityCondition((), exact=[parse_exact_complex(v) for v in vals])
        except ConfigurationError as exc:
            raise UsageError(str(exc)) from exc
    elif getattr(args, "Z", None):
        try:
            Z = StabilityCondition(parse_complex_list(args.Z))
        except ConfigurationError as exc:
            raise UsageError(str(exc)) from exc
    else:
        raise UsageError("this command needs --Z or --Z-exact")
    if Z.rank != N:
        raise UsageError(f"Z has {Z.rank} values but the quiver has {N} vertices")
    return Z


def load_json_arg(s):
    if s is None:
        return None
    if isinstance(s, (dict, list)):
        return s
    if os.path.exists(s):
        with open(s) as fh:
            return json.load(fh)
    try:
        return json.loads(s)
    except json.JSONDecodeError as exc:
        raise UsageError(f"not a JSON file or literal: {s!r}") from exc


def threads() -> int:
    raw = os.environ.get("HALLSTOKES_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"HALLSTOKES_THREADS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise UsageError("HALLSTOKES_THREADS must be positive")
    return n


def pmap(fn, items) -> list:
    n = threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def cjson(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _lie_spec(args, N: int, d: int) -> LieAlgebraSpec:
    data = load_json_arg(getattr(args, "lie", None))
    if data is None:
        return hall_lie_spec(N, d)
    return LieAlgebraSpec.from_json(data)


def _coeffs(args, spec: LieAlgebraSpec) -> GradedLieElement:
    data = load_json_arg(getattr(args, "coeffs", None))
    if data is not None:
        return GradedLieElement.from_json(spec, data)
    rng = np.random.default_rng(args.seed)
    scale = args.scale
    return GradedLieElement(spec, {lab: complex(*(rng.normal(0, scale, 2))) for lab in spec.labels})


def _meta(args, **extra) -> dict:
    out = {"command": args.command, "version": __version__, "seed": args.seed}
    if hasattr(args, "quiver"):
        out["quiver"] = f"A{parse_quiver(args.quiver)}"
    if hasattr(args, "d"):
        out["truncation"] = args.d
    out.update(extra)
    return out


# -- Hall element arguments ------------------------------------------------------------

def _factor(spec: QuiverSpec, text: str, Z) -> HallElement:
    from .stability import delta, epsilon
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    alg = hall_algebra(spec.N, spec.d)
    if kind == "one":
        return one(alg)
    if kind == "splus":
        return splus(alg)
    if kind == "kappa":
        return kappa(alg, parse_class(rest))
    if kind == "indicator":
        return indicator(alg, IsoClass.parse(spec.N, json.loads(rest)))
    if kind in ("delta", "epsilon"):
        if Z is None:
            raise UsageError(f"{kind} factors need --Z")
        return (delta if kind == "delta" else epsilon)(Z, parse_class(rest), alg)
    if kind == "json":
        return HallElement.from_json(alg, load_json_arg(rest))
    raise UsageError(f"unknown factor {text!r}")


# -- subcommands -------------------------------------------------------------------------

def cmd_hall_product(args) -> dict:
    N = parse_quiver(args.quiver)
    spec = QuiverSpec(N, args.d)
    Z = make_Z(args, N) if (args.Z or args.Z_exact) else None
    factors = [_factor(spec, f, Z) for f in args.factor]
    if not factors:
        raise UsageError("hall-product needs at least one --factor")
    return {"meta": _meta(args), "result": hall_product(factors).to_json()}


def cmd_semistables(args) -> dict:
    from .quiver import enumerate_iso_classes
    from .stability import is_semistable
    N = parse_quiver(args.quiver)
    Z = make_Z(args, N)
    gamma = parse_class(args.gamma)
    if len(gamma) != N:
        raise UsageError(f"class {gamma} has the wrong rank")
    ms = enumerate_iso_classes(N, gamma, args.d) if any(gamma) else []
    if args.chamber_csv:
        from .stability import chamber_report_rows
        with open(args.chamber_csv, "w") as fh:
            fh.write("\n".join(chamber_report_rows([Z], QuiverSpec(N, args.d))) + "\n")
    return {"meta": _meta(args, gamma=list(gamma)),
            "semistables": [m.to_json() for m in ms if is_semistable(Z, m)]}


def cmd_hn(args) -> dict:
    from .stability import hn_classes
    N = parse_quiver(args.quiver)
    Z = make_Z(args, N)
    try:
        M = IsoClass.parse(N, load_json_arg(args.module))
    except (HallStokesError, TypeError, ValueError) as exc:
        raise UsageError(f"bad module {args.module!r}: {exc}") from exc
    return {"meta": _meta(args), "module": M.to_json(),
            "hn_classes": [list(c) for c in hn_classes(Z, M)]}


def cmd_calculus(args) -> dict:
    from .stability import delta, epsilon
    N = parse_quiver(args.quiver)
    alg = hall_algebra(N, args.d)
    gamma = parse_class(args.gamma)
    if args.command == "kappa":
        el = kappa(alg, gamma)
    else:
        Z = make_Z(args, N)
        el = (delta if args.command == "delta" else epsilon)(Z, gamma, alg)
    return {"meta": _meta(args, gamma=list(gamma)), "result": el.to_json()}


def cmd_stokes(args) -> dict:
    from .stokes import Provenance, stokes_forward, stokes_inverse, stokes_inverse_j
    N = parse_quiver(args.quiver)
    spec = _lie_spec(args, N, args.d)
    Z = make_Z(args, spec.rank)
    x = _coeffs(args, spec)
    prov = Provenance()
    if args.command == "stokes-forward":
        out = stokes_forward(Z, x, prov)
    elif args.route == "j":
        out = stokes_inverse_j(Z, x, prov)
    else:
        out = stokes_inverse(Z, x, prov)
    key = "epsilon" if args.command == "stokes-forward" else "f"
    return {"meta": _meta(args, route=getattr(args, "route", "series")),
            "input": x.to_json(), key: out.to_json(), "provenance": prov.to_json()}


def cmd_jn_eval(args) -> dict:
    from .special import eval_J, eval_L, eval_M, on_cut, set_arc_fraction
    z = parse_complex_list(args.z)
    if len(z) != args.n:
        raise UsageError(f"--n {args.n} needs {args.n} values of z, got {len(z)}")
    if not 0 < args.arc_eps < 0.5:
        raise UsageError("--arc-eps must lie in (0, 0.5)")
    set_arc_fraction(args.arc_eps)
    fn = {"J": eval_J, "L": eval_L, "M": eval_M}[args.function]
    v = fn(z)
    return {"meta": _meta(args, function=args.function, n=args.n, arc_eps=args.arc_eps),
            "z": [cjson(x) for x in z], "value": cjson(v.value), "error": v.estimated_error,
            "on_cut": on_cut(z), "branch_notes": list(v.branch_notes)}


def cmd_ode_extract(args) -> dict:
    from .isomonodromy import f_of_Z
    from .ode import build_rep, extract_stokes_factor, extract_stokes_multipliers, stokes_directions
    from .stokes import clockwise_product
    N = parse_quiver(args.quiver)
    Z = make_Z(args, N)
    if args.from_stability:
        f = f_of_Z(QuiverSpec(N, args.d), Z)
        spec = f.spec
    else:
        spec = _lie_spec(args, N, args.d)
        f = _coeffs(args, spec)
    rep = build_rep(spec, Z, f)
    out = {"meta": _meta(args, tolerances={"ray": 1e-9, "leakage": 1e-8}), "f": f.to_json()}
    if args.multipliers:
        sp, sm = extract_stokes_multipliers(rep, RaySpec(args.phase or 0.0))
        out["S_plus"] = sp.to_json()
        out["S_minus"] = sm.to_json()
        return out
    if args.phase is not None:
        ex = extract_stokes_factor(rep, RaySpec(args.phase))
        out.update({"factor": ex.factor.to_json(), "leakage": ex.leakage,
                    "estimated_error": ex.error_estimate, "sector": list(ex.rays)})
        return out
    # every Stokes ray in the upper half plane, and the product check against S+
    phases = sorted((a / np.pi for a in stokes_directions(rep) if 0 < a < np.pi), reverse=True)
    exs = pmap(lambda ph: extract_stokes_factor(rep, RaySpec(ph)), phases)
    sp, _ = extract_stokes_multipliers(rep, RaySpec(0.0))
    prod = clockwise_product([(RaySpec(ph), ex.factor) for ph, ex in zip(phases, exs)])
    out["rays"] = [{"phase": ph, "factor": ex.factor.to_json(), "leakage": ex.leakage,
                    "estimated_error": ex.error_estimate} for ph, ex in zip(phases, exs)]
    out["leakage"] = max((ex.leakage for ex in exs), default=0.0)
    out["S_plus_check"] = prod.distance(sp)
    return out


def cmd_isomonodromy(args) -> dict:
    from .isomonodromy import pde_residual
    from .stability import random_stability
    import random
    N = parse_quiver(args.quiver)
    spec = QuiverSpec(N, args.d)
    if args.random:
        rng = random.Random(args.seed)
        Zs = [random_stability(N, rng, exact=False) for _ in range(args.random)]
    else:
        Zs = [make_Z(args, N)]

    def one_point(Z):
        res = pde_residual(spec, Z, args.h)
        return {"Z": [cjson(z) for z in Z.z],
                "residuals": {",".join(map(str, a)): r for a, r in res.items()},
                "max_residual": max(res.values(), default=0.0)}

    points = pmap(one_point, Zs)
    return {"meta": _meta(args, h=args.h), "points": points,
            "max_residual": max(p["max_residual"] for p in points)}


def cmd_wallcross(args) -> dict:
    from .isomonodromy import wallcross_experiment
    N = parse_quiver(args.quiver)
    Z = make_Z(args, N)
    v = parse_complex_list(args.direction)
    if len(v) != N:
        raise UsageError("--direction needs one complex value per vertex")
    etas = [float(x) for x in str(args.etas).split(",")]
    rep = wallcross_experiment(QuiverSpec(N, args.d), parse_class(args.alpha), Z, v, etas,
                               samples=args.samples)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("\n".join(rep.csv_rows()) + "\n")
    return {"meta": _meta(args), "report": rep.to_json()}


# -- parser ------------------------------------------------------------------------------

def _common(p, quiver=True, z=True):
    p.add_argument("--config", help="JSON file whose keys override the flags")
    p.add_argument("--seed", type=int, default=0)
    if quiver:
        p.add_argument("--quiver", default="A2", help="equioriented A_N quiver, e.g. A3")
        p.add_argument("--d", type=int, default=4, help="truncation (total dimension)")
    if z:
        p.add_argument("--Z", help='simple values, e.g. "[-1,1],[1,1]"')
        p.add_argument("--Z-exact", dest="Z_exact", help='exact values, e.g. "-1+i,1+i"')


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hallstokes", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hall-product", help="iterated Hall product of factors")
    _common(p)
    p.add_argument("--factor", action="append", default=[],
                   help="one, splus, kappa:1,1, indicator:[[1,2]], delta:1,1, epsilon:1,1, json:FILE")
    p.set_defaults(func=cmd_hall_product)

    p = sub.add_parser("semistables", help="semistable iso-classes of a class")
    _common(p)
    p.add_argument("--gamma", required=True)
    p.add_argument("--chamber-csv", dest="chamber_csv",
                   help="write the chamber report of Z (signatures, semistable supports) here")
    p.set_defaults(func=cmd_semistables)

    p = sub.add_parser("hn", help="HN classes of a module")
    _common(p)
    p.add_argument("--module", required=True, help='intervals, e.g. "[[1,1],[2,2]]"')
    p.set_defaults(func=cmd_hn)

    for name in ("delta", "epsilon", "kappa"):
        p = sub.add_parser(name, help=f"the Hall element {name}_gamma")
        _common(p)
        p.add_argument("--gamma", required=True)
        p.set_defaults(func=cmd_calculus)

    for name in ("stokes-forward", "stokes-inverse"):
        p = sub.add_parser(name, help="f -> epsilon" if name == "stokes-forward" else "epsilon -> f")
        _common(p)
        p.add_argument("--lie", help="Lie algebra spec JSON (default: Hall Lie algebra)")
        p.add_argument("--coeffs", help="coefficients JSON (default: random from --seed)")
        p.add_argument("--scale", type=float, default=0.3)
        if name == "stokes-inverse":
            p.add_argument("--route", choices=["series", "j"], default="series")
        p.set_defaults(func=cmd_stokes)

    p = sub.add_parser("jn-eval", help="evaluate J_n (or L_n, M_n)")
    _common(p, quiver=False, z=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--z", required=True, help='comma separated, e.g. "1+1i,2-1i"')
    p.add_argument("--function", choices=["J", "L", "M"], default="J")
    p.add_argument("--arc-eps", dest="arc_eps", type=float, default=1e-3,
                   help="detour arc radius relative to |s_n|")
    p.set_defaults(func=cmd_jn_eval)

    p = sub.add_parser("ode-extract", help="Stokes data from the ODE")
    _common(p)
    p.add_argument("--lie", "--spec", dest="lie", help="Lie algebra spec JSON")
    p.add_argument("--coeffs", "--f", dest="coeffs", help="coefficients of f as JSON")
    p.add_argument("--scale", type=float, default=0.2)
    p.add_argument("--from-stability", action="store_true", help="use f(Z) from stability data")
    p.add_argument("--phase", "--ray-phase", dest="phase", type=float,
                   help="ray phase in units of pi (default: all rays)")
    p.add_argument("--multipliers", action="store_true", help="S+ and S- for the ray --phase")
    p.set_defaults(func=cmd_ode_extract)

    p = sub.add_parser("isomonodromy-check", help="PDE residual of f(Z)")
    _common(p)
    p.add_argument("--h", type=float, default=1e-4)
    p.add_argument("--random", type=int, default=0, help="use this many random Z from --seed")
    p.set_defaults(func=cmd_isomonodromy)

    p = sub.add_parser("wallcross", help="wall-crossing continuity study")
    _common(p)
    p.add_argument("--alpha", default="1,1")
    p.add_argument("--direction", required=True, help="complex direction per vertex")
    p.add_argument("--etas", default="1e-2,1e-3,1e-4")
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--csv", help="write f_alpha samples along the path here")
    p.set_defaults(func=cmd_wallcross)
    return ap


def _apply_config(args, parser):
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest == "command":
            if val != args.command:
                raise UsageError(f"config is for {val!r}, not {args.command!r}")
            continue
        if dest in ("config", "func") or not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if dest == "quiver" and isinstance(val, dict):
            args.quiver, args.d = val.get("N", 2), val.get("d", args.d)
            continue
        setattr(args, dest, val)
    for key in ("d", "seed", "n", "random", "samples"):
        if hasattr(args, key) and getattr(args, key) is not None and not isinstance(getattr(args, key), int):
            raise UsageError(f"{key} must be an integer")
    for key in ("h", "scale"):
        v = getattr(args, key, None)
        if v is not None and (not isinstance(v, (int, float)) or not v > 0):
            raise UsageError(f"{key} must be positive")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=True)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _apply_config(args, parser)
        if hasattr(args, "d") and args.d < 1:
            raise UsageError("--d must be positive")
        threads()
        result = args.func(args)
    except UsageError as exc:
        print(f"hallstokes {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigurationError, json.JSONDecodeError) as exc:
        print(f"hallstokes {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HallStokesError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(_dump({"error": type(exc).__name__, "message": str(exc),
                     "command": args.command}))
        return EXIT_FAILURE
    print(_dump(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
