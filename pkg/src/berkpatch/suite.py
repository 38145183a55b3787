"""Randomized acceptance battery.

Each check draws its cases from one seeded generator and compares library
results against a slower oracle written independently of the code under test.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import geometry as geo
from .geometry import GE, LE, AffinoidDomain, Constraint, GaussPoint, RootSystem
from .patching import BanachTriple, GroupChart, factor_near_identity, mat_add, verify_factorization
from .poly import from_roots
from .propagation import laurent_to_rat, propagate_over_cover
from .series import (
    CIRCLE,
    LaurentElement,
    QuotientElement,
    RingTag,
    norm_constants,
    spectral_enclosure,
    split_laurent,
    split_quotient,
)
from .thickening import (
    FiberEvaluator,
    FiberPoint,
    MonomialRoot,
    RelativeRootSystem,
    RelConstraint,
    ThickeningError,
    endpoint_equalities,
    relative_fiber_radius,
    thickened_domain_check,
    thickening_window,
)
from .ultrametric import ONE, ZERO, LogExponent, compare_rational, pnorm, scalar_norm

P = 5
TAU_R = pnorm(0, 1)


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    cases: int
    failures: list = field(default_factory=list)
    seconds: float = 0.0
    notes: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.criterion}] {self.name}: {self.cases} cases, {len(self.failures)} failures"

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "criterion": self.criterion,
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "failures": self.failures[:10],
            "notes": self.notes,
        }
        if timing:
            out["seconds"] = round(self.seconds, 3)
        return out


def _rand_coeff(rng, vmin, vmax):
    v = rng.randint(vmin, vmax)
    num = rng.choice([k for k in range(1, 25) if k % P])
    den = rng.choice([1, 2, 3, 4, 7])
    return Fraction(num * rng.choice((1, -1)), den) * Fraction(P) ** v


def _rand_laurent(rng, tag, lo=-4, hi=4, terms=5, vmin=-2, vmax=3):
    return LaurentElement({rng.randint(lo, hi): _rand_coeff(rng, vmin, vmax) for _ in range(rng.randint(1, terms))}, tag)


# ---------------------------------------------------------------- 1


def check_splits(rng, count=1000) -> CheckResult:
    res = CheckResult(1, "split contracts", True, 0)
    t0 = time.perf_counter()
    tag = RingTag(TAU_R, CIRCLE, P)
    modulus = (Fraction(-5), Fraction(0), Fraction(1))
    for _ in range(count):
        c = _rand_laurent(rng, tag)
        a, b = split_laurent(c)
        res.cases += 1
        if not (a + b == c and max(a.norm(), b.norm()) == c.norm()):
            res.failures.append({"kind": "laurent", "element": c.to_json()})
        q = QuotientElement(modulus, [_rand_laurent(rng, tag) for _ in range(2)], tag)
        qa, shape = split_quotient(q)
        qb = shape.to_element()
        res.cases += 1
        if not (qa + qb == q and max(qa.norm(), shape.norm()) == q.norm() and qb.norm() == shape.norm()):
            res.failures.append({"kind": "quotient", "element": q.to_json()})
    res.seconds = time.perf_counter() - t0
    res.passed = not res.failures and res.seconds < 10
    return res


# ---------------------------------------------------------------- 2


def random_small_target(rng, n, tag, floor: int = 3):
    """n x n matrix of Laurent polynomials whose terms all have norm <= p^-floor."""
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            coeffs = {}
            for _ in range(rng.randint(0, 4)):
                k = rng.randint(-3, 3)
                # |c| r^k = p^-(v + k e) with e the exponent of r; need v + k e >= floor
                ek = tag.r.e.scale(k)
                vmin = math.ceil(floor - ek.approx())
                while LogExponent(vmin) + ek < LogExponent(floor):
                    vmin += 1
                coeffs[k] = _rand_coeff(rng, vmin, vmin + 2)
            row.append(LaurentElement(coeffs, tag))
        rows.append(tuple(row))
    return tuple(rows)


def check_factorization(rng, count=100, tol_exp=40) -> CheckResult:
    res = CheckResult(2, "factorization certificates", True, 0)
    t0 = time.perf_counter()
    tag = RingTag(TAU_R, CIRCLE, P)
    tri = BanachTriple(tag)
    tol = pnorm(tol_exp)
    worst = 0
    for _ in range(count):
        n = rng.choice((1, 2))
        a = random_small_target(rng, n, tag)
        chart = GroupChart.gl(n)
        res.cases += 1
        try:
            u, v, cert = factor_near_identity(tri, chart, a, tol)
        except Exception as exc:  # reported, not raised
            res.failures.append({"error": str(exc)})
            continue
        ident = tri.identity(n)
        ok, resid = verify_factorization(mat_add(ident, a), mat_add(ident, u), mat_add(ident, v), tol)
        decreasing = all(
            x.residual < y.residual or x.residual.is_zero for y, x in zip(cert.steps, cert.steps[1:])
        )
        worst = max(worst, cert.iterations)
        if not (cert.ok and ok and cert.iterations <= 80 and decreasing and resid == cert.final_residual):
            res.failures.append({"n": n, "iterations": cert.iterations, "ok": cert.ok, "verified": ok})
    res.seconds = time.perf_counter() - t0
    res.notes["max_iterations"] = worst
    res.passed = not res.failures and res.seconds < 60
    return res


# ---------------------------------------------------------------- 3


def random_ultrametric(rng, k):
    """Distance matrix from random merges at increasing heights (some of type 3)."""
    heights = sorted(
        (pnorm(Fraction(rng.randint(-6, 6), rng.choice((1, 2, 3))), rng.choice((0, 0, Fraction(rng.randint(-2, 2), 2)))) for _ in range(k - 1)),
        key=lambda x: -x.e.approx(),
    )
    clusters = [[i] for i in range(k)]
    dist = [[ZERO] * k for _ in range(k)]
    for h in heights:
        i, j = sorted(rng.sample(range(len(clusters)), 2))
        for a in clusters[i]:
            for b in clusters[j]:
                dist[a][b] = dist[b][a] = h
        clusters[i] += clusters.pop(j)
    return tuple(tuple(row) for row in dist)


def brute_fiber_radius(mult, dist, alpha, r):
    """All s solving r = s^m prod max(s, d)^mu, found by trying every segment."""
    m = mult[alpha]
    others = [(dist[alpha][j], mult[j]) for j in range(len(mult)) if j != alpha]
    found = []
    for k in range(len(others) + 1):
        for closer_set in _subsets_of_size(len(others), k):
            weight = m + sum(others[i][1] for i in closer_set)
            far = ONE
            for i, (d, mu) in enumerate(others):
                if i not in closer_set:
                    far = far * d**mu
            s = (r / far) ** Fraction(1, weight)
            lhs = s**m
            for d, mu in others:
                lhs = lhs * (d if d > s else s) ** mu
            if lhs == r and s not in found:
                found.append(s)
    return found


def _subsets_of_size(n, k):
    from itertools import combinations

    return [set(c) for c in combinations(range(n), k)]


def check_fiber_radii(rng, count=100) -> CheckResult:
    res = CheckResult(3, "fiber radii", True, 0)
    for _ in range(count):
        k = rng.randint(1, 5)
        dist = random_ultrametric(rng, k) if k > 1 else ((ZERO,),)
        mult = tuple(rng.randint(1, 3) for _ in range(k))
        rs = RootSystem(mult, dist)
        r = pnorm(Fraction(rng.randint(-20, 20), rng.randint(1, 3)), rng.choice((0, 1, Fraction(1, 2), -1)))
        for alpha in range(k):
            res.cases += 1
            s = geo.fiber_radii(rs, alpha, r)
            oracle = brute_fiber_radius(mult, dist, alpha, r)
            if oracle != [s]:
                res.failures.append({"alpha": alpha, "closed_form": s.to_json(), "oracle": [x.to_json() for x in oracle]})
    res.passed = not res.failures
    return res


# ---------------------------------------------------------------- 4

SANDWICH_MODULI = ([1], [0, 5], [0, 1, 25])


def check_sandwich(rng, count=50, r=TAU_R) -> CheckResult:
    res = CheckResult(4, "norm sandwich", True, 0)
    tag = RingTag(r, CIRCLE, P)
    for roots in SANDWICH_MODULI:
        modulus = from_roots(roots)
        consts = norm_constants(modulus, r, P)
        if len(roots) == 1 and consts.c.hi != 1:
            res.failures.append({"modulus": roots, "C": str(consts.c.hi)})
        done = 0
        while done < count:
            f = QuotientElement(modulus, [_rand_laurent(rng, tag, -3, 3, 4) for _ in roots], tag)
            if f.is_zero():
                continue
            done += 1
            res.cases += 1
            box = spectral_enclosure(f, roots, [1] * len(roots), r)
            nf = f.norm()
            if compare_rational(nf, box.lo, P) < 0 or compare_rational(nf, consts.c.hi * box.hi, P) > 0:
                res.failures.append({"modulus": roots, "element": f.to_json()})
    res.passed = not res.failures
    return res


# ---------------------------------------------------------------- 5


def _rand_center(rng):
    return Fraction(rng.randint(-30, 30), rng.choice((1, 1, 2, 3)))


def _rand_type3(rng, lo=-3, hi=3):
    return pnorm(Fraction(rng.randint(lo * 2, hi * 2), 2), rng.choice((1, -1, Fraction(1, 2), Fraction(-1, 2))))


def random_sample_point(rng, centers, radii):
    kind = rng.random()
    if kind < 0.02:
        return geo.INFINITY
    c = rng.choice(centers)
    if rng.random() < 0.3:
        c = c + _rand_coeff(rng, -2, 3)
    if kind < 0.1:
        return GaussPoint(c, ZERO)
    base = rng.choice(radii)
    u = rng.random()
    if u < 0.3:
        return GaussPoint(c, base)
    if u < 0.8:
        return GaussPoint(c, base * pnorm(Fraction(rng.randint(-8, 8), rng.randint(1, 4))))
    return GaussPoint(c, base * pnorm(0, Fraction(rng.randint(-3, 3), rng.randint(1, 3))))


def _random_pair(rng):
    """Two connected pieces meeting exactly at eta = eta(c, rho)."""
    c = _rand_center(rng)
    rho = _rand_type3(rng)
    inner, outer = [], []
    for _ in range(rng.randint(0, 2)):
        # hole inside the disc: centre in the disc, radius well below rho
        hc = c + _rand_coeff(rng, 0, 2) if rng.random() < 0.7 else c
        while scalar_norm(hc - c, P) > rho:
            hc = c + (hc - c) * P
        hr = rho * pnorm(Fraction(rng.randint(1, 4)), rng.choice((0, Fraction(1, 3))))
        if scalar_norm(hc - c, P) < hr:
            hc = c
        inner.append(Constraint.linear(hc, GE, hr))
    for _ in range(rng.randint(0, 2)):
        if rng.random() < 0.5:
            outer.append(Constraint.linear(c, LE, rho * pnorm(-Fraction(rng.randint(1, 4)), Fraction(1, 5))))
        else:
            far = c + Fraction(P) ** (-rng.randint(-1, 2)) * rng.choice((1, 2, 3))
            while scalar_norm(far - c, P) <= rho:
                far = c + (far - c) / P
            outer.append(Constraint.linear(far, GE, min(scalar_norm(far - c, P), rho) * pnorm(1, Fraction(1, 7))))
    u = AffinoidDomain((Constraint.linear(c, LE, rho),) + tuple(inner), "yes")
    v = AffinoidDomain((Constraint.linear(c, GE, rho),) + tuple(outer), "yes")
    return u, v, inner, outer


def _sample_cloud(rng, domains, count):
    centers = [Fraction(0)]
    radii = [ONE]
    for d in domains:
        for c in d.constraints:
            if c.center is not None:
                centers.append(c.center)
                radii.append(c.bound)
    return [random_sample_point(rng, centers, radii) for _ in range(count)]


def check_domain_algebra(rng, count=200, samples=1000) -> CheckResult:
    res = CheckResult(5, "domain algebra", True, 0)
    for _ in range(count):
        res.cases += 1
        u, v, inner, outer = _random_pair(rng)
        try:
            union = geo.domain_union(u, v, P)
            inter = geo.domain_intersect(u, v, P)
            cu, cv = geo.canonicalize(u, P), geo.canonicalize(v, P)
        except geo.GeometryError as exc:
            res.failures.append({"error": str(exc)})
            continue
        # the union keeps every non-redundant constraint except the shared pair
        expected = {_key(c) for c in inner if u.contains(c.point, P)}
        expected |= {_key(c) for c in outer if v.contains(c.point, P)}
        if set(map(_key, union.constraints)) != expected:
            res.failures.append({"kind": "union-formula"})
        w = _random_domain(rng)
        inter2 = geo.domain_intersect(u, w, P)
        for pt in _sample_cloud(rng, (u, v, w), samples):
            iu, iv, iw = u.contains(pt, P), v.contains(pt, P), w.contains(pt, P)
            if union.contains(pt, P) != (iu or iv):
                res.failures.append({"kind": "union", "point": pt.to_json()})
                break
            if inter.contains(pt, P) != (iu and iv):
                res.failures.append({"kind": "intersection", "point": pt.to_json()})
                break
            if inter2.contains(pt, P) != (iu and iw):
                res.failures.append({"kind": "intersection-random", "point": pt.to_json()})
                break
            if cu.contains(pt, P) != iu or cv.contains(pt, P) != iv:
                res.failures.append({"kind": "canonical", "point": pt.to_json()})
                break
    # the n = m = 0 case: a disc and its complement glue to the whole line
    eta = GaussPoint(Fraction(0), TAU_R)
    u = AffinoidDomain((Constraint.linear(0, LE, TAU_R),), "yes")
    v = AffinoidDomain((Constraint.linear(0, GE, TAU_R),), "yes")
    whole = geo.domain_union(u, v, P)
    res.cases += 1
    if whole.constraints or whole.empty or not whole.contains(eta, P):
        res.failures.append({"kind": "whole-line"})
    res.passed = not res.failures
    return res


def _key(c: Constraint):
    return (c.poly, c.rel, c.bound)


def _random_domain(rng):
    cs = []
    for _ in range(rng.randint(1, 3)):
        cs.append(Constraint.linear(_rand_center(rng), rng.choice((LE, GE, LE)), _rand_type3(rng)))
    return AffinoidDomain(tuple(cs))


# ---------------------------------------------------------------- 6


def random_monomial_system(rng):
    roots = []
    keys = set()
    for _ in range(rng.randint(1, 4)):
        k = rng.choice((0, 0, 1, 1, 2))
        c = Fraction(0) if (k == 0 and rng.random() < 0.3) else _rand_coeff(rng, -1, 2)
        if c == 0:
            k = 0
        if (c, k) in keys:
            continue
        keys.add((c, k))
        roots.append(MonomialRoot(c, k, rng.randint(1, 2)))
    return RelativeRootSystem(tuple(roots), P)


def _strict_ok(rs, alpha, r, t_y, closer_ref):
    """Independent check: s separates the distances and gives back r."""
    s, _ = relative_fiber_radius(rs, alpha, r, t_y)
    closer = set()
    level = s ** rs.roots[alpha].mult
    for j, root in enumerate(rs.roots):
        if j == alpha:
            continue
        terms = rs.difference(alpha, j)
        d = max(scalar_norm(c, P) * t_y**k for k, c in terms.items())
        if d == s:
            return False, s
        if d < s:
            closer.add(j)
        level = level * max(d, s) ** root.mult
    return closer == closer_ref and level == r, s


def check_thickening(rng, count=50, fibers=20, samples=1000) -> CheckResult:
    res = CheckResult(6, "thickening", True, 0)
    made = 0
    attempts = 0
    while made < count and attempts < 50 * count:
        attempts += 1
        rs = random_monomial_system(rng)
        t = pnorm(Fraction(rng.randint(-4, 4), 2), rng.choice((1, -1, Fraction(1, 2))))
        r = pnorm(Fraction(rng.randint(-8, 8), 2), rng.choice((1, 2, Fraction(3, 2), -1)))
        alpha = rng.randrange(len(rs.roots))
        try:
            s_t, _ = relative_fiber_radius(rs, alpha, r, t)
            holes = []
            if rng.random() < 0.5:
                holes = [(alpha, s_t * pnorm(rng.randint(1, 3)))]
            window = thickening_window(rs, alpha, r, t, holes)
        except ThickeningError:
            continue
        made += 1
        res.cases += 1
        eqs = endpoint_equalities(rs, alpha, r, t, window, holes)
        for name, bound in (("lower", window.lo), ("upper", window.hi)):
            if bound is not None and not eqs.get(name):
                res.failures.append({"kind": "endpoint-not-tight", "side": name})
        closer_t = {j for j in range(len(rs.roots)) if j != alpha and rs.distance(alpha, j, t) < s_t}
        # central fiber against the absolute computation
        if all(root.k == 0 for root in rs.roots):
            absolute = RootSystem.from_roots([root.c for root in rs.roots], [root.mult for root in rs.roots], P)
            if geo.fiber_radii(absolute, alpha, r) != s_t:
                res.failures.append({"kind": "central-fiber"})
        elif geo.fiber_radii(rs.at(t), alpha, r) != s_t:
            res.failures.append({"kind": "central-fiber"})
        for _ in range(fibers):
            t_y = window.sample(rng)
            ok, s_y = _strict_ok(rs, alpha, r, t_y, closer_t)
            root = rs.roots[alpha]
            eta = FiberPoint(((root.k, root.c),) if root.c else (), s_y)
            if not ok or FiberEvaluator(rs, t_y).level(eta) != r:
                res.failures.append({"kind": "interior", "t_y": t_y.to_json()})
            for i, rho in holes:
                if not rho < relative_fiber_radius(rs, i, r, t_y)[0]:
                    res.failures.append({"kind": "hole", "t_y": t_y.to_json()})
        extra_u = [RelConstraint(GE, rho, (rs.roots[i].c, rs.roots[i].k)) for i, rho in holes]
        rep = thickened_domain_check(rs, r, window, extra_u, (), fibers, samples, rng.randrange(2**32))
        if not rep.passed:
            res.failures.append({"kind": "set-identities", "violations": rep.violations[:3]})
    res.passed = not res.failures and made == count
    res.notes["systems"] = made
    return res


# ---------------------------------------------------------------- 7


def golden_inputs(rng):
    """Hand-built inputs for the three closed-form norms, with their expected values."""
    r = TAU_R
    coeffs = {-2: Fraction(3, 25), 0: Fraction(7), 1: Fraction(50), 3: Fraction(1, 5)}
    ex2 = {"kind": "laurent", "r": r.to_json(), "coeffs": {str(n): str(c) for n, c in coeffs.items()}}
    want2 = max(scalar_norm(c, P) * r**n for n, c in coeffs.items())
    poles = [
        {"center": "1", "coeffs": {"1": "3", "2": "1/5"}},
        {"center": "2", "coeffs": {"1": "25"}},
        {"center": "3", "coeffs": {"3": "7"}},
    ]
    regular = {"0": "10", "1": "1/25", "4": "2"}
    rr = ONE
    ex3 = {"kind": "partial-fractions", "alpha": "0", "r": rr.to_json(), "poles": poles, "regular": regular}
    terms = [scalar_norm(Fraction(regular["0"]), P)]
    terms += [scalar_norm(Fraction(c), P) * rr ** int(n) for n, c in regular.items() if n != "0"]
    terms += [scalar_norm(Fraction(c), P) / rr ** int(n) for pole in poles for n, c in pole["coeffs"].items()]
    want3 = max(terms)
    tt, ss = pnorm(0, 1), pnorm(Fraction(1, 3), Fraction(-1, 2))
    two = {(1, 0): Fraction(5), (0, 2): Fraction(1, 25), (-1, 1): Fraction(2), (2, -3): Fraction(125)}
    ex6 = {
        "kind": "two-variable",
        "t": tt.to_json(),
        "s": ss.to_json(),
        "coeffs": {f"{m},{n}": str(c) for (m, n), c in two.items()},
    }
    want6 = max(scalar_norm(c, P) * tt**m * ss**n for (m, n), c in two.items())
    return [("laurent", ex2, want2), ("partial-fractions", ex3, want3), ("two-variable", ex6, want6)]


def check_golden(rng, run_cli=None) -> CheckResult:
    res = CheckResult(7, "golden formulas", True, 0)
    if run_cli is None:
        from .cli import run_command as run_cli
    for name, doc, want in golden_inputs(rng):
        res.cases += 1
        code, out = run_cli("norm-eval", doc)
        got = out.get("payload", {}).get("norm")
        if code != 0 or got != want.to_json():
            res.failures.append({"example": name, "got": got, "want": want.to_json()})
    res.passed = not res.failures
    return res


# ---------------------------------------------------------------- 8


def random_cover_points(rng, k):
    pts = []
    while len(pts) < k:
        x = GaussPoint(_rand_center(rng), _rand_type3(rng))
        if not any(geo.same_point(x, y, P) for y in pts):
            pts.append(x)
    return pts


def chain_transitions(rng, cover, n=2, floor=3):
    out = {}
    for k, eta in enumerate(cover.nodes):
        tag = RingTag(eta.radius, CIRCLE, P)
        a = random_small_target(rng, n, tag, floor)
        ident = tuple(tuple(LaurentElement.const(1 if i == j else 0, tag) for j in range(n)) for i in range(n))
        out[k] = mat_add(ident, a)
    return out


def check_covers(rng, count=50, tol_exp=30) -> CheckResult:
    res = CheckResult(8, "cover machinery", True, 0)
    for _ in range(count):
        pts = random_cover_points(rng, rng.randint(1, 5))
        cover = geo.build_nice_cover(pts, P)
        res.cases += 1
        rep = geo.nice_cover_check(cover, P)
        if not rep.valid:
            res.failures.append({"kind": "nice-cover", "violations": rep.violations[:3]})
            continue
        colors = geo.parity_coloring(cover, P)
        if any(colors[i] == colors[j] for _, i, j in cover.adjacency(P)):
            res.failures.append({"kind": "coloring"})
    tol = pnorm(tol_exp)
    # three-piece chain: disc, annulus, outside
    chain = geo.build_nice_cover([GaussPoint(0, TAU_R), GaussPoint(0, pnorm(-1, 1))], P)
    colors = geo.parity_coloring(chain, P)
    for _ in range(3):
        res.cases += 1
        tr = chain_transitions(rng, chain)
        out = propagate_over_cover(chain, colors, tr, tol, P)
        if len(out.residuals) != 2 or not out.ok(tol):
            res.failures.append({"kind": "chain", "residuals": {k: v.to_json() for k, v in out.residuals.items()}})
    # two pieces: the same answer as a single factorization
    two = geo.build_nice_cover([GaussPoint(Fraction(1, 5), pnorm(1, 1))], P)
    colors = geo.parity_coloring(two, P)
    for _ in range(3):
        res.cases += 1
        tr = chain_transitions(rng, two)
        out = propagate_over_cover(two, colors, tr, tol, P)
        eta = two.nodes[0]
        tri = BanachTriple(RingTag(eta.radius, CIRCLE, P))
        ident = tri.identity(2)
        a = tuple(tuple(tr[0][i][j] - ident[i][j] for j in range(2)) for i in range(2))
        u, v, _ = factor_near_identity(tri, GroupChart.gl(2), a, tol, prune=tol)
        disc = 0 if colors[0] == 0 else 1
        if not (
            out.elements[disc] == laurent_to_rat(mat_add(ident, u), eta.center)
            and out.elements[1 - disc] == laurent_to_rat(mat_add(ident, v), eta.center).inverse()
        ):
            res.failures.append({"kind": "two-piece"})
    res.passed = not res.failures
    return res


# ---------------------------------------------------------------- driver

CHECKS = {
    1: check_splits,
    2: check_factorization,
    3: check_fiber_radii,
    4: check_sandwich,
    5: check_domain_algebra,
    6: check_thickening,
    7: check_golden,
    8: check_covers,
}


def run_suite(seed: int = 0, samples: int | None = None, only=None) -> list[CheckResult]:
    """Run the battery; ``samples`` overrides the per-fiber and per-scenario sample counts."""
    out = []
    for k, fn in CHECKS.items():
        if only and k not in only:
            continue
        rng = random.Random(f"{seed}:{k}")
        if samples is not None and k == 5:
            out.append(fn(rng, samples=samples))
        elif samples is not None and k == 6:
            out.append(fn(rng, samples=samples))
        else:
            out.append(fn(rng))
    return out


__all__ = ["CheckResult", "run_suite", "CHECKS", "brute_fiber_radius", "golden_inputs"]
