"""Command line front end: JSON in, JSON out.

    berkpatch <command> [INPUT] [--seed N] [--tol NORM] [--samples N]
                        [--format json|text|dot] [--out PATH] [--plot PATH]

INPUT is a path, inline JSON, or "-" for stdin.  Exit codes: 0 pass,
2 unknown command, 3 invalid input, 4 mathematical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction

from . import geometry as geo
from . import patching as pt
from . import propagation as prop
from . import series as ser
from . import thickening as th
from .poly import padd, pmul, ppow, pscale, pshift, ptrim
from .ultrametric import ZERO, NormValue, PrimeContext, pnorm, scalar_norm

EXIT_OK, EXIT_UNKNOWN, EXIT_SCHEMA, EXIT_MATH = 0, 2, 3, 4
DEFAULT_TOL = pnorm(40)


class SchemaError(ValueError):
    pass


class MathFailure(Exception):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


MATH_ERRORS = (geo.GeometryError, ser.SeriesError, pt.PatchingError, th.ThickeningError, ZeroDivisionError)


# ---------------------------------------------------------------- parsing helpers


def _nv(obj) -> NormValue:
    try:
        return NormValue.from_json(obj)
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad norm value {obj!r}") from exc


def _frac(x) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise SchemaError(f"expected a rational as int or 'num/den' string, got {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational {x!r}") from exc


def _poly(obj):
    if not isinstance(obj, list):
        raise SchemaError("a polynomial is a list of coefficients, lowest degree first")
    return ptrim([_frac(c) for c in obj])


def _point(obj) -> geo.GaussPoint:
    if not isinstance(obj, dict):
        raise SchemaError("a point is {'center', 'radius'} or {'infinity': true}")
    if obj.get("infinity"):
        return geo.INFINITY
    return geo.GaussPoint(_frac(obj["center"]), _nv(obj.get("radius", {"kind": "zero"})))


def _coeff_map(obj) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError("coefficients are a map from exponent to rational")
    try:
        return {int(n): _frac(c) for n, c in obj.items()}
    except ValueError as exc:
        raise SchemaError("exponents must be integers") from exc


def _domain(obj, p: int = 5) -> geo.AffinoidDomain:
    if not isinstance(obj, list):
        raise SchemaError("a domain is a list of constraints")
    if obj and isinstance(obj[0], dict) and obj[0].get("empty"):
        return geo.EMPTY
    cons = []
    try:
        for c in obj:
            if "center" in c:
                cons.append(geo.Constraint.linear(_frac(c["center"]), c["rel"], _nv(c["bound"])))
            else:
                poly = _poly(c["poly"])
                geo.check_constraint_poly(poly, p)
                cons.append(geo.Constraint(poly, c["rel"], _nv(c["bound"])))
    except geo.GeometryError as exc:
        raise SchemaError(str(exc)) from exc
    return geo.AffinoidDomain(tuple(cons), "yes")


def _cover(doc, p):
    if "cover" in doc:
        c = doc["cover"]
        return geo.NiceCover(tuple(_domain(u, p) for u in c["pieces"]), tuple(_point(x) for x in c["nodes"]))
    if "points" in doc:
        return geo.build_nice_cover([_point(x) for x in doc["points"]], p)
    raise SchemaError("expected 'cover' or 'points'")


def _tag(doc, p, mode=ser.CIRCLE):
    return ser.RingTag(_nv(doc["r"]), mode, p)


def _element(obj, tag, modulus):
    """A Laurent coefficient map, or a list of maps (one per power of X) over a modulus."""
    if modulus is None:
        return ser.LaurentElement(_coeff_map(obj), tag)
    if not isinstance(obj, list):
        raise SchemaError("quotient elements are lists of coefficient maps")
    return ser.QuotientElement(modulus, [ser.LaurentElement(_coeff_map(x), tag) for x in obj], tag)


def _matrix(obj, tag, modulus):
    if not isinstance(obj, list) or not obj or any(not isinstance(row, list) or len(row) != len(obj) for row in obj):
        raise SchemaError("a matrix is a square list of rows")
    return tuple(tuple(_element(x, tag, modulus) for x in row) for row in obj)


def _mat_json(m):
    return [[x.to_json() for x in row] for row in m]


def _roots_mults(doc):
    roots = [_frac(a) for a in doc["roots"]]
    mults = [int(m) for m in doc.get("mult", [1] * len(roots))]
    if len(mults) != len(roots):
        raise SchemaError("'mult' must match 'roots'")
    return roots, mults


# ---------------------------------------------------------------- commands


def cmd_norm_eval(doc, ctx):
    p = ctx["p"]
    kind = doc.get("kind", "gauss")
    if kind == "gauss":
        return {"norm": geo.eval_gauss_norm(_poly(doc["poly"]), _point(doc["point"]), p).to_json()}
    if kind == "laurent":
        el = ser.LaurentElement(_coeff_map(doc["coeffs"]), _tag(doc, p))
        return {"norm": el.norm().to_json()}
    if kind == "partial-fractions":
        return _partial_fractions(doc, p)
    if kind == "two-variable":
        t, s = _nv(doc["t"]), _nv(doc["s"])
        best = None
        for key, c in doc["coeffs"].items():
            try:
                m, n = (int(x) for x in key.split(","))
            except ValueError as exc:
                raise SchemaError("two-variable exponents are written 'm,n'") from exc
            v = scalar_norm(_frac(c), p) * t**m * s**n
            best = v if best is None or v > best else best
        return {"norm": (best if best is not None else ZERO).to_json()}
    raise SchemaError(f"unknown norm kind {kind!r}")


def _partial_fractions(doc, p):
    alpha, r = _frac(doc["alpha"]), _nv(doc["r"])
    if r.is_zero or r.is_type3 or r.e.a.denominator != 1:
        raise SchemaError("the radius must be an integral power of p")
    poles = [(_frac(x["center"]), _coeff_map(x["coeffs"])) for x in doc.get("poles", [])]
    regular = _coeff_map(doc.get("regular", {}))
    for i, (a, cs) in enumerate(poles):
        if scalar_norm(a - alpha, p) > r:
            raise SchemaError(f"pole {i} lies outside the disc of radius r")
        if any(n <= 0 for n in cs):
            raise SchemaError("principal parts use positive exponents")
        for b, _ in poles[:i]:
            if scalar_norm(a - b, p) != r:
                raise SchemaError("distinct poles must be at distance exactly r")
    if any(n < 0 for n in regular):
        raise SchemaError("the regular part uses exponents >= 0")
    terms = [scalar_norm(regular.get(0, 0), p)]
    terms += [scalar_norm(c, p) * r**n for n, c in regular.items() if n > 0]
    terms += [scalar_norm(c, p) / r**n for _, cs in poles for n, c in cs.items()]
    formula = max(terms)
    # exact value of the rational function at eta(alpha, r)
    eta = geo.GaussPoint(alpha, r)
    den = (Fraction(1),)
    for a, cs in poles:
        den = pmul(den, ppow((-a, Fraction(1)), max(cs)))
    num = pmul(den, pshift(tuple(regular.get(n, Fraction(0)) for n in range(max(regular, default=0) + 1)), -alpha))
    for a, cs in poles:
        top = max(cs)
        rest = (Fraction(1),)
        for b, ds in poles:
            if b != a:
                rest = pmul(rest, ppow((-b, Fraction(1)), max(ds)))
        for n, c in cs.items():
            num = padd(num, pscale(pmul(rest, ppow((-a, Fraction(1)), top - n)), c))
    exact = geo.eval_gauss_norm(num, eta, p) / geo.eval_gauss_norm(den, eta, p)
    out = {"norm": formula.to_json(), "exact": exact.to_json(), "agree": exact == formula}
    if exact != formula:
        raise MathFailure("the closed form disagrees with the exact value", out)
    return out


def cmd_point_classify(doc, ctx):
    pts = doc["points"] if "points" in doc else [doc["point"]]
    return {"types": [geo.classify_point(_point(x)) for x in pts]}


def cmd_fiber_radii(doc, ctx):
    p = ctx["p"]
    r = _nv(doc["r"])
    if "dist" in doc:
        mult = tuple(int(m) for m in doc["mult"])
        rs = geo.RootSystem(mult, tuple(tuple(_nv(x) for x in row) for row in doc["dist"]))
    else:
        roots, mults = _roots_mults(doc)
        rs = geo.RootSystem.from_roots(roots, mults, p)
    out = []
    for a in range(len(rs.mult)):
        s, closer = geo.fiber_radius_solve(rs, a, r)
        if geo.level_at(rs, a, s) != r:
            raise MathFailure("fiber radius identity failed", {"root": a})
        out.append({"root": a, "s": s.to_json(), "closer": closer, "type": geo.classify_point(geo.GaussPoint(0, s))})
    return {"radii": out}


def cmd_domain_op(doc, ctx):
    p = ctx["p"]
    op = doc.get("op")
    u = _domain(doc["u"], p)
    if op == "intersect":
        return {"domain": geo.domain_intersect(u, _domain(doc["v"], p), p).to_json()}
    if op == "union":
        return {"domain": geo.domain_union(u, _domain(doc["v"], p), p).to_json()}
    if op == "canonical":
        return {"domain": geo.canonicalize(u, p).to_json()}
    if op == "contains":
        return {"contains": [u.contains(_point(x), p) for x in doc["points"]]}
    if op == "empty":
        return {"empty": geo.is_empty(u, p)}
    if op == "side":
        return {"side": geo.domain_side(u, _point(doc["point"]), p)}
    raise SchemaError(f"unknown domain op {op!r}")


def cmd_cover_build(doc, ctx):
    p = ctx["p"]
    cover = geo.build_nice_cover([_point(x) for x in doc["points"]], p)
    return {"cover": cover.to_json(), "colors": geo.parity_coloring(cover, p)}


def cmd_cover_check(doc, ctx):
    rep = geo.nice_cover_check(_cover(doc, ctx["p"]), ctx["p"])
    if not rep.valid:
        raise MathFailure("not a nice cover", rep.to_json())
    return rep.to_json()


def cmd_cover_color(doc, ctx):
    cover = _cover(doc, ctx["p"])
    colors = geo.parity_coloring(cover, ctx["p"])
    return {"colors": colors, "edges": [[k, i, j] for k, i, j in cover.adjacency(ctx["p"])]}


def cmd_cover_dot(doc, ctx):
    return {"dot": geo.cover_to_dot(_cover(doc, ctx["p"]), ctx["p"])}


def _series_element(doc, key, p):
    obj = doc[key]
    tag = ser.RingTag(_nv(doc["r"]), doc.get("mode", ser.CIRCLE), p)
    modulus = _poly(doc["modulus"]) if "modulus" in doc else None
    return _element(obj, tag, modulus)


def cmd_series_split(doc, ctx):
    c = _series_element(doc, "element", ctx["p"])
    if isinstance(c, ser.LaurentElement):
        a, b = ser.split_laurent(c)
    else:
        a, shape = ser.split_quotient(c)
        b = shape.to_element()
    exact = a + b == c
    out = {
        "disc": a.to_json(),
        "outer": b.to_json(),
        "norms": {"element": c.norm().to_json(), "disc": a.norm().to_json(), "outer": b.norm().to_json()},
        "sum_exact": exact,
    }
    if not exact:
        raise MathFailure("split does not sum back", out)
    return out


def cmd_series_mul(doc, ctx):
    f, g = _series_element(doc, "f", ctx["p"]), _series_element(doc, "g", ctx["p"])
    h = f * g
    return {"product": h.to_json(), "norm": h.norm().to_json(), "submultiplicative": h.norm() <= f.norm() * g.norm()}


def cmd_series_invert(doc, ctx):
    h = _series_element(doc, "element", ctx["p"])
    if not isinstance(h, ser.LaurentElement):
        raise SchemaError("inversion is implemented for Laurent elements")
    inv, tail = ser.invert_dominant(h, ctx["tol"])
    resid = (h * inv - ser.LaurentElement.const(1, h.tag)).norm()
    return {"inverse": inv.to_json(), "tail": tail.to_json(), "residual": resid.to_json(), "terms": len(inv.coeffs)}


def cmd_constants(doc, ctx):
    p = ctx["p"]
    modulus, r = _poly(doc["modulus"]), _nv(doc["r"])
    consts = ser.norm_constants(modulus, r, p)
    out = {"constants": consts.to_json()}
    if consts.d >= 2:
        res, m = ser.resultant_bound(modulus, r, p)
        out["resultant"] = [str(c) for c in res]
        out["resultant_norm"] = ser.circle_poly_norm(res, r, p).to_json()
    return out


def _triple(doc, p):
    modulus = _poly(doc["modulus"]) if "modulus" in doc else None
    d = _frac(doc.get("d", "1/2"))
    return pt.BanachTriple(_tag(doc, p), modulus, d), modulus


def cmd_patch_factor(doc, ctx):
    p = ctx["p"]
    tri, modulus = _triple(doc, p)
    if "target" in doc:
        a = _matrix(doc["target"], tri.tag, modulus)
        n = len(a)
        chart = pt.GroupChart.gl(n)
        eps = _frac(doc["eps"]) if "eps" in doc else None
        u, v, cert = pt.factor_near_identity(tri, chart, a, ctx["tol"], eps)
        ident = tri.identity(n)
        g, g1, g2 = pt.mat_add(ident, a), pt.mat_add(ident, u), pt.mat_add(ident, v)
    else:
        g = _matrix(doc["g"], tri.tag, modulus)
        chart = pt.GroupChart.gl(len(g))
        g1, g2, cert, _ = pt.factor_general(tri, chart, g, ctx["tol"])
        u, v = g1, g2
    ok, resid = pt.verify_factorization(g, g1, g2, ctx["tol"])
    ctx["certificate"] = cert
    out = {
        "u": _mat_json(u),
        "v": _mat_json(v),
        "certificate": cert.to_json(),
        "verified": ok,
        "residual": resid.to_json(),
    }
    if not (ok and cert.ok):
        raise MathFailure("factorization not verified", out)
    return out


def cmd_patch_propagate(doc, ctx):
    p = ctx["p"]
    cover = _cover(doc, p)
    colors = doc.get("colors") or geo.parity_coloring(cover, p)
    transitions = {}
    for key, m in doc["transitions"].items():
        k = int(key)
        if not 0 <= k < len(cover.nodes):
            raise SchemaError(f"no node {k}")
        eta = cover.nodes[k]
        transitions[k] = _matrix(m, ser.RingTag(eta.radius, ser.CIRCLE, p), None)
    res = prop.propagate_over_cover(cover, colors, transitions, ctx["tol"], p)
    out = res.to_json()
    out["colors"] = colors
    out["ok"] = res.ok(ctx["tol"])
    if not out["ok"]:
        raise MathFailure("propagation residual above tolerance", out)
    return out


def cmd_patch_verify(doc, ctx):
    p = ctx["p"]
    tri, modulus = _triple(doc, p)
    g, g1, g2 = (_matrix(doc[k], tri.tag, modulus) for k in ("g", "g1", "g2"))
    ok, resid = pt.verify_factorization(g, g1, g2, ctx["tol"])
    out = {"verified": ok, "residual": resid.to_json()}
    if not ok:
        raise MathFailure("residual above tolerance", out)
    return out


def _relative(doc, p):
    rs = th.RelativeRootSystem.from_json(doc["roots"], p)
    t = _nv(doc["base"]["t"])
    th.BasePoint(t, p)
    holes = [(int(h["root"]), _nv(h["radius"])) for h in doc.get("holes", [])]
    return rs, t, _nv(doc["r"]), int(doc.get("alpha", 0)), holes


def cmd_thicken_window(doc, ctx):
    p = ctx["p"]
    rs, t, r, alpha, holes = _relative(doc, p)
    s, closer = th.relative_fiber_radius(rs, alpha, r, t)
    w = th.thickening_window(rs, alpha, r, t, holes)
    return {
        "window": w.to_json(),
        "fiber_radius": s.to_json(),
        "closer": closer,
        "tight": th.endpoint_equalities(rs, alpha, r, t, w, holes),
    }


def cmd_thicken_check(doc, ctx):
    p = ctx["p"]
    rs, t, r, alpha, holes = _relative(doc, p)
    w = th.thickening_window(rs, alpha, r, t, holes)
    try:
        extra_u = [th.RelConstraint.from_json(c) for c in doc.get("extra_u", [])]
        extra_v = [th.RelConstraint.from_json(c) for c in doc.get("extra_v", [])]
    except th.ThickeningError as exc:
        raise SchemaError(str(exc)) from exc
    rep = th.thickened_domain_check(
        rs, r, w, extra_u, extra_v, int(doc.get("fibers", 20)), ctx["samples"] or 1000, ctx["seed"]
    )
    out = {"window": w.to_json(), "report": rep.to_json()}
    if not rep.passed:
        raise MathFailure("sampled fiber violation", out)
    return out


def cmd_suite(doc, ctx):
    from .suite import run_suite

    only = doc.get("only") if isinstance(doc, dict) else None
    results = run_suite(ctx["seed"], ctx["samples"], only)
    out = {"results": [r.to_json() for r in results], "lines": [r.line() for r in results]}
    if not all(r.passed for r in results):
        raise MathFailure("acceptance battery failed", out)
    return out


COMMANDS = {
    "norm-eval": cmd_norm_eval,
    "point-classify": cmd_point_classify,
    "fiber-radii": cmd_fiber_radii,
    "domain-op": cmd_domain_op,
    "cover-build": cmd_cover_build,
    "cover-check": cmd_cover_check,
    "cover-color": cmd_cover_color,
    "cover-dot": cmd_cover_dot,
    "series-split": cmd_series_split,
    "series-mul": cmd_series_mul,
    "series-invert": cmd_series_invert,
    "constants": cmd_constants,
    "patch-factor": cmd_patch_factor,
    "patch-propagate": cmd_patch_propagate,
    "patch-verify": cmd_patch_verify,
    "thicken-window": cmd_thicken_window,
    "thicken-check": cmd_thicken_check,
    "suite": cmd_suite,
}


# ---------------------------------------------------------------- dispatch


def run_command(command: str, doc, seed: int = 0, tol: NormValue | None = None, samples: int | None = None, ctx=None):
    """Run one command on a parsed document; returns (exit code, report dict)."""
    report = {"command": command}
    if command not in COMMANDS:
        report.update(status="error", exit_code=EXIT_UNKNOWN, error=f"unknown command {command!r}", known=sorted(COMMANDS))
        return EXIT_UNKNOWN, report
    ctx = ctx if ctx is not None else {}
    try:
        if not isinstance(doc, dict):
            raise SchemaError("the input document must be a JSON object")
        p = doc.get("p", 5)
        if not isinstance(p, int) or isinstance(p, bool):
            raise SchemaError("'p' must be an integer")
        try:
            PrimeContext(p)
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc
        if tol is None:
            tol = _nv(doc["tol"]) if "tol" in doc else DEFAULT_TOL
        ctx.update(p=p, seed=seed, tol=tol, samples=samples)
        payload = COMMANDS[command](doc, ctx)
    except MathFailure as exc:
        report.update(status="fail", exit_code=EXIT_MATH, error=str(exc), payload=exc.payload)
        return EXIT_MATH, report
    except MATH_ERRORS as exc:
        report.update(status="fail", exit_code=EXIT_MATH, error=f"{type(exc).__name__}: {exc}")
        return EXIT_MATH, report
    except (SchemaError, KeyError, TypeError, ValueError, AttributeError, IndexError) as exc:
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        report.update(status="error", exit_code=EXIT_SCHEMA, error=f"invalid input: {msg}")
        return EXIT_SCHEMA, report
    report.update(status="ok", exit_code=EXIT_OK, payload=payload)
    return EXIT_OK, report


def _load(arg: str | None):
    if arg is None:
        return {}
    if arg == "-":
        return json.load(sys.stdin)
    text = arg.strip()
    if text.startswith("{") or text.startswith("["):
        return json.loads(text)
    with open(arg, encoding="utf-8") as fh:
        return json.load(fh)


def _text(obj, prefix="") -> list[str]:
    lines = []
    if isinstance(obj, dict):
        if set(obj) <= {"kind", "a", "b"} and "kind" in obj:
            return [f"{prefix}: {_nv_text(obj)}"]
        for k, v in obj.items():
            lines += _text(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and all(isinstance(x, (dict, list)) for x in obj):
        for i, v in enumerate(obj):
            lines += _text(v, f"{prefix}[{i}]")
    else:
        lines.append(f"{prefix}: {json.dumps(obj) if not isinstance(obj, str) else obj}")
    return lines


def _nv_text(obj) -> str:
    return str(NormValue.from_json(obj))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="berkpatch", description=__doc__.splitlines()[0])
    ap.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    ap.add_argument("input", nargs="?", help="JSON file, inline JSON, or - for stdin")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--tol", default=None, help="norm value as JSON, e.g. '{\"kind\":\"pos\",\"a\":\"40\",\"b\":\"0\"}'")
    ap.add_argument("--samples", type=int, default=None)
    ap.add_argument("--format", choices=("json", "text", "dot"), default="json")
    ap.add_argument("--out", default=None, help="write the report here instead of stdout")
    ap.add_argument("--plot", default=None, help="patch-factor: write an SVG convergence plot")
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if not exc.code:
            return EXIT_OK
        print(json.dumps({"status": "error", "exit_code": EXIT_SCHEMA, "error": "invalid arguments"}, sort_keys=True))
        return EXIT_SCHEMA
    seed = args.seed
    if seed is None:
        env = os.environ.get("BERKPATCH_SEED")
        seed = int(env) if env and env.isdigit() else 0
    code, report = EXIT_OK, None
    if args.command not in COMMANDS:
        code, report = run_command(args.command, {})
    else:
        try:
            doc = _load(args.input)
            tol = _nv(json.loads(args.tol)) if args.tol else None
        except (OSError, json.JSONDecodeError, SchemaError) as exc:
            report = {"command": args.command, "status": "error", "exit_code": EXIT_SCHEMA, "error": f"invalid input: {exc}"}
            code = EXIT_SCHEMA
        else:
            random.seed(seed)
            ctx: dict = {}
            code, report = run_command(args.command, doc, seed, tol, args.samples, ctx)
            if args.plot and "certificate" in ctx:
                from .plot import emit_convergence_plot

                emit_convergence_plot(ctx["certificate"], args.plot, ctx["p"])
    if args.format == "dot" and report.get("status") == "ok" and "dot" in report.get("payload", {}):
        text = report["payload"]["dot"]
    elif args.format == "text":
        text = "\n".join(_text(report)) + "\n"
    else:
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


__all__ = ["main", "run_command", "COMMANDS"]
