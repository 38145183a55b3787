"""Fiber radii and affinoids over a small neighbourhood of a type-3 base point.

The base is a disc with coordinate S; a base point y is the Gauss point of
radius t_y.  Roots are monomials c*S^k, so every distance |alpha_i - alpha_j|_y
is a monomial in t_y.  Writing t_y = p^-x, each norm is p^-(linear in x) and
the conditions defining a thickening are linear inequalities in x, solved
exactly over Q + Q*sqrt2.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .geometry import EQ, GE, LE, GeometryError, RootSystem, fiber_radius_solve
from .ultrametric import ONE, ZERO, LogExponent, NormValue, pnorm, valuation


class ThickeningError(ValueError):
    pass


def _exp(n: NormValue) -> LogExponent:
    if n.is_zero:
        raise ThickeningError("zero has no exponent")
    return n.e


@dataclass(frozen=True)
class BasePoint:
    t: NormValue
    p: int = 5

    def __post_init__(self):
        if not self.t.is_type3:
            raise ThickeningError("the base point must be of type 3")

    @property
    def x(self) -> LogExponent:
        return self.t.e


@dataclass(frozen=True)
class MonomialRoot:
    c: Fraction
    k: int
    mult: int = 1

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        if self.c == 0 and self.k:
            raise ThickeningError("the zero root must be written with k = 0")
        if self.k < 0 or self.mult < 1:
            raise ThickeningError("need k >= 0 and mult >= 1")


@dataclass(frozen=True)
class Line:
    """x -> icpt + slope * x on exponents."""

    slope: Fraction
    icpt: LogExponent

    def __call__(self, x: LogExponent) -> LogExponent:
        return self.icpt + x.scale(self.slope)

    def __sub__(self, other: Line) -> Line:
        return Line(self.slope - other.slope, self.icpt - other.icpt)

    def root(self) -> LogExponent | None:
        if self.slope == 0:
            return None
        return self.icpt.scale(Fraction(-1) / self.slope)


def _monomial_lines(terms, p: int) -> list[Line]:
    """Exponent lines of |sum c_k S^k|_y as min over k of v(c_k) + k x."""
    return [Line(Fraction(k), LogExponent(valuation(c, p), 0)) for k, c in terms.items() if c]


def _min_line(lines: list[Line], x: LogExponent) -> Line:
    best = lines[0]
    for ln in lines[1:]:
        if ln(x) < best(x):
            best = ln
    return best


def _eval_lines(lines, x: LogExponent) -> LogExponent:
    return _min_line(lines, x)(x)


def _crossings(lines) -> list[Fraction]:
    out = []
    for i, a in enumerate(lines):
        for b in lines[i + 1 :]:
            if a.slope != b.slope:
                # rational data only: both intercepts are rational here
                out.append((b.icpt.a - a.icpt.a) / (a.slope - b.slope))
    return out


@dataclass(frozen=True)
class RelativeRootSystem:
    roots: tuple
    p: int = 5

    def __post_init__(self):
        keys = [(r.c, r.k) for r in self.roots]
        if len(set(keys)) != len(keys):
            raise ThickeningError("roots must be distinct")
        if not self.roots:
            raise ThickeningError("need at least one root")

    @classmethod
    def from_json(cls, obj, p: int = 5) -> RelativeRootSystem:
        roots = tuple(MonomialRoot(Fraction(x["c"]), int(x.get("k", 0)), int(x.get("mult", 1))) for x in obj)
        return cls(roots, p)

    def to_json(self) -> list:
        return [{"c": str(r.c), "k": r.k, "mult": r.mult} for r in self.roots]

    @property
    def degree(self) -> int:
        return sum(r.mult for r in self.roots)

    def difference(self, i: int, j: int) -> dict:
        a, b = self.roots[i], self.roots[j]
        out = {a.k: a.c}
        out[b.k] = out.get(b.k, 0) - b.c
        return {k: c for k, c in out.items() if c}

    def dist_lines(self, i: int, j: int) -> list[Line]:
        return _monomial_lines(self.difference(i, j), self.p)

    def distance(self, i: int, j: int, t_y: NormValue) -> NormValue:
        if i == j:
            return ZERO
        return NormValue(_eval_lines(self.dist_lines(i, j), _exp(t_y)))

    def at(self, t_y: NormValue) -> RootSystem:
        n = len(self.roots)
        dist = tuple(tuple(self.distance(i, j, t_y) for j in range(n)) for i in range(n))
        return RootSystem(tuple(r.mult for r in self.roots), dist)

    def breakpoints(self) -> list[Fraction]:
        out = set()
        n = len(self.roots)
        for i in range(n):
            for j in range(i + 1, n):
                out.update(_crossings(self.dist_lines(i, j)))
        return sorted(out)


# ---------------------------------------------------------------- fiber radii


def relative_fiber_radius(rs: RelativeRootSystem, alpha: int, r: NormValue, t_y: NormValue) -> tuple[NormValue, int]:
    """(s, j0) with r = s^(m + j0) * prod over farther roots; j0 is the closer multiplicity."""
    if r.is_zero:
        raise ThickeningError("the level must be nonzero")
    rsy = rs.at(t_y)
    try:
        s, _ = fiber_radius_solve(rsy, alpha, r)
    except GeometryError as exc:
        raise ThickeningError(str(exc)) from exc
    closer = []
    level = s ** rs.roots[alpha].mult
    for j in range(len(rs.roots)):
        if j == alpha:
            continue
        d = rsy.dist[alpha][j]
        if d == s:
            raise ThickeningError(f"tie: s equals the distance to root {j}")
        if d < s:
            closer.append(rs.roots[j].mult)
            level = level * s ** rs.roots[j].mult
        else:
            level = level * d ** rs.roots[j].mult
    if level != r:
        raise ThickeningError("fiber radius identity failed")
    return s, sum(closer)


def _closer_set(rs, alpha, r, t_y) -> frozenset:
    s, _ = relative_fiber_radius(rs, alpha, r, t_y)
    return frozenset(j for j in range(len(rs.roots)) if j != alpha and rs.distance(alpha, j, t_y) < s)


def _sigma_line(rs, alpha, closer, r: NormValue, x: LogExponent) -> Line:
    """Exponent of s as a line near x, with the set of closer roots fixed."""
    weight = rs.roots[alpha].mult + sum(rs.roots[j].mult for j in closer)
    slope = Fraction(0)
    icpt = _exp(r)
    for j in range(len(rs.roots)):
        if j == alpha or j in closer:
            continue
        ln = _min_line(rs.dist_lines(alpha, j), x)
        mu = rs.roots[j].mult
        slope -= mu * ln.slope
        icpt = icpt - ln.icpt.scale(mu)
    return Line(slope / weight, icpt.scale(Fraction(1, weight)))


# ---------------------------------------------------------------- windows


@dataclass(frozen=True)
class ThickeningWindow:
    """Open interval of exponents x = -log_p t_y; None means unbounded."""

    lo: LogExponent | None
    hi: LogExponent | None
    center: LogExponent
    p: int = 5

    def contains(self, t_y: NormValue) -> bool:
        x = _exp(t_y)
        return (self.lo is None or self.lo < x) and (self.hi is None or x < self.hi)

    @property
    def t_lower(self) -> NormValue:
        return ZERO if self.hi is None else NormValue(self.hi)

    @property
    def t_upper(self) -> NormValue | None:
        return None if self.lo is None else NormValue(self.lo)

    def sample(self, rng: random.Random) -> NormValue:
        lam = Fraction(rng.randint(1, 999), 1000)
        if self.lo is not None and self.hi is not None:
            x = self.lo + (self.hi - self.lo).scale(lam)
        elif self.lo is not None:
            x = self.lo + LogExponent(Fraction(1) / lam - 1 + Fraction(1, 1000))
        elif self.hi is not None:
            x = self.hi - LogExponent(Fraction(1) / lam - 1 + Fraction(1, 1000))
        else:
            x = self.center + LogExponent(Fraction(rng.randint(-4000, 4000), 1000))
        return NormValue(x)

    def to_json(self) -> dict:
        ex = lambda e: None if e is None else {"a": str(e.a), "b": str(e.b)}  # noqa: E731
        return {
            "x_lower": ex(self.lo),
            "x_upper": ex(self.hi),
            "t_lower": self.t_lower.to_json(),
            "t_upper": None if self.t_upper is None else self.t_upper.to_json(),
        }


@dataclass
class _Condition:
    """h(x) > 0 where h is rebuilt on each linear piece."""

    build: object
    label: str


def _conditions(rs, alpha, r, t, holes):
    x_t = _exp(t)
    conds = []
    systems = [(alpha, None)] + [(i, rho) for i, rho in holes]
    for idx, rho in systems:
        closer = _closer_set(rs, idx, r, t)
        for j in range(len(rs.roots)):
            if j == idx:
                continue

            def build(x, idx=idx, j=j, closer=closer):
                sig = _sigma_line(rs, idx, closer, r, x)
                d = _min_line(rs.dist_lines(idx, j), x)
                return (d - sig) if j in closer else (sig - d)

            conds.append(_Condition(build, f"root {idx} vs root {j}"))
        if rho is not None:

            def hole(x, idx=idx, closer=closer, rho=rho):
                return Line(Fraction(0), _exp(rho)) - _sigma_line(rs, idx, closer, r, x)

            conds.append(_Condition(hole, f"hole at root {idx} inside the fiber radius"))
    for c in conds:
        if not c.build(x_t)(x_t) > LogExponent(0):
            raise ThickeningError(f"the defining inequality {c.label} fails at t")
    return conds


def thickening_window(rs: RelativeRootSystem, alpha: int, r: NormValue, t: NormValue, holes=()) -> ThickeningWindow:
    """Maximal open interval around t on which the configuration at t persists.

    ``holes`` lists (root index, radius) pairs whose discs must stay strictly
    inside the fiber radius of that root.
    """
    x_t = _exp(t)
    conds = _conditions(rs, alpha, r, t, holes)
    bps = [LogExponent(b) for b in rs.breakpoints()]
    hi = _walk(conds, x_t, sorted((b for b in bps if b > x_t), key=lambda e: e.approx()), +1)
    lo = _walk(conds, x_t, sorted((b for b in bps if b < x_t), key=lambda e: -e.approx()), -1)
    return ThickeningWindow(lo, hi, x_t, rs.p)


def _walk(conds, x_t, stops, direction):
    start = x_t
    for end in stops + [None]:
        if end is None:
            probe = start + LogExponent(direction)
        else:
            probe = (start + end).scale(Fraction(1, 2))
        best = None
        for c in conds:
            h = c.build(probe)
            z = h.root()
            if z is None:
                continue
            ahead = z > start if direction > 0 else z < start
            within = end is None or (z <= end if direction > 0 else z >= end)
            if ahead and within and (best is None or (z < best if direction > 0 else z > best)):
                best = z
        if best is not None:
            return best
        if end is not None:
            start = end
    return None


def endpoint_equalities(rs, alpha, r, t, window: ThickeningWindow, holes=()) -> dict:
    """Labels of the inequalities that become equalities at each finite endpoint."""
    conds = _conditions(rs, alpha, r, t, holes)
    out = {}
    for name, e in (("lower", window.lo), ("upper", window.hi)):
        if e is None:
            continue
        out[name] = [c.label for c in conds if c.build(e)(e) == LogExponent(0)]
    return out


# ---------------------------------------------------------------- fibers


@dataclass(frozen=True)
class FiberPoint:
    """eta_{a, rho} in the fiber over y, with a = sum c_k S^k."""

    a: tuple
    rho: NormValue

    def to_json(self) -> dict:
        return {"a": {str(k): str(c) for k, c in self.a}, "rho": self.rho.to_json()}


@dataclass(frozen=True)
class RelConstraint:
    """|R| rel bound when center is None, else |T - c S^k| rel bound."""

    rel: str
    bound: NormValue
    center: tuple | None = None

    def __post_init__(self):
        if self.rel not in (LE, EQ, GE):
            raise ThickeningError(f"unknown relation {self.rel!r}")

    def to_json(self) -> dict:
        out = {"rel": self.rel, "bound": self.bound.to_json()}
        if self.center is not None:
            out["center"] = {"c": str(self.center[0]), "k": self.center[1]}
        return out

    @classmethod
    def from_json(cls, obj) -> RelConstraint:
        center = None
        if obj.get("center") is not None:
            center = (Fraction(obj["center"]["c"]), int(obj["center"].get("k", 0)))
        return cls(obj["rel"], NormValue.from_json(obj["bound"]), center)


class FiberEvaluator:
    """Exact norms at fiber points over one base radius.

    Membership is first decided on float exponents; anything within 1e-7 of a
    tie is recomputed exactly, so the answers are exact.
    """

    GAP = 1e-7

    def __init__(self, rs: RelativeRootSystem, t_y: NormValue):
        self.rs = rs
        self.x = _exp(t_y)
        self.xf = self.x.approx()
        self.p = rs.p
        self._val: dict = {}

    def _v(self, c) -> int:
        v = self._val.get(c)
        if v is None:
            v = self._val[c] = valuation(c, self.p)
        return v

    def poly_norm(self, terms: dict) -> NormValue:
        lines = _monomial_lines(terms, self.p)
        if not lines:
            return ZERO
        return NormValue(_eval_lines(lines, self.x))

    def linear(self, pt: FiberPoint, c, k) -> NormValue:
        terms = dict(pt.a)
        terms[k] = terms.get(k, 0) - c
        d = self.poly_norm({kk: v for kk, v in terms.items() if v})
        return d if d > pt.rho else pt.rho

    def level(self, pt: FiberPoint) -> NormValue:
        out = ONE
        for root in self.rs.roots:
            out = out * self.linear(pt, root.c, root.k) ** root.mult
        return out

    def _linear_f(self, pt: FiberPoint, c, k) -> float:
        terms = dict(pt.a)
        terms[k] = terms.get(k, 0) - c
        best = pt.rho.e.approx() if not pt.rho.is_zero else float("inf")
        for kk, v in terms.items():
            if v:
                e = self._v(v) + kk * self.xf
                if e < best:
                    best = e
        return best

    def _value_f(self, con: RelConstraint, pt: FiberPoint) -> float:
        if con.center is not None:
            return self._linear_f(pt, *con.center)
        return sum(root.mult * self._linear_f(pt, root.c, root.k) for root in self.rs.roots)

    def holds(self, con: RelConstraint, pt: FiberPoint) -> bool:
        # exponents: larger exponent means smaller norm
        fe = self._value_f(con, pt)
        be = con.bound.e.approx()
        if abs(fe - be) > self.GAP:
            c = 1 if fe < be else -1
        else:
            v = self.level(pt) if con.center is None else self.linear(pt, *con.center)
            c = v.cmp(con.bound)
        return c <= 0 if con.rel == LE else (c >= 0 if con.rel == GE else c == 0)

    def contains(self, cons, pt: FiberPoint) -> bool:
        return all(self.holds(c, pt) for c in cons)


def random_fiber_point(rng: random.Random, rs: RelativeRootSystem, radii, p: int) -> FiberPoint:
    """A point near a random root, at a radius scattered around the given ones."""
    root = rng.choice(rs.roots)
    terms = {root.k: root.c} if root.c else {}
    if rng.random() < 0.5:
        k = rng.randint(0, 3)
        terms[k] = terms.get(k, 0) + Fraction(rng.randint(1, 24), rng.choice((1, 2, 3))) * Fraction(p) ** rng.randint(-1, 3)
    base = rng.choice(radii)
    kind = rng.random()
    if kind < 0.25:
        rho = base
    elif kind < 0.9:
        rho = base * pnorm(Fraction(rng.randint(-12, 12), rng.randint(1, 4)))
    else:
        rho = base * pnorm(0, Fraction(rng.randint(-4, 4), rng.randint(1, 4)))
    return FiberPoint(tuple(sorted((k, c) for k, c in terms.items() if c)), rho)


@dataclass
class ThickeningReport:
    passed: bool = True
    fibers: int = 0
    points: int = 0
    violations: list = field(default_factory=list)

    def fail(self, kind: str, detail: dict):
        self.passed = False
        if len(self.violations) < 20:
            self.violations.append({"kind": kind, **detail})

    def to_json(self) -> dict:
        return {"passed": self.passed, "fibers": self.fibers, "points": self.points, "violations": self.violations}


def thickened_domain_check(
    rs: RelativeRootSystem,
    r: NormValue,
    window: ThickeningWindow,
    extra_u=(),
    extra_v=(),
    fibers: int = 20,
    samples: int = 1000,
    seed: int = 0,
) -> ThickeningReport:
    """Sampled check of the thickened intersection, union and nice-cover clauses.

    U = {|R| <= r} plus extra_u and V = {|R| >= r} plus extra_v.  On every
    sampled fiber: U and V meet exactly in {|R| = r} (with both extras), and
    U or V holds exactly where the extras hold.
    """
    rng = random.Random(seed)
    rep = ThickeningReport()
    u_cons = (RelConstraint(LE, r),) + tuple(extra_u)
    v_cons = (RelConstraint(GE, r),) + tuple(extra_v)
    i_cons = (RelConstraint(EQ, r),) + tuple(extra_u) + tuple(extra_v)
    w_cons = tuple(extra_u) + tuple(extra_v)
    for _ in range(fibers):
        t_y = window.sample(rng)
        ev = FiberEvaluator(rs, t_y)
        rep.fibers += 1
        radii = [rs.distance(i, j, t_y) for i in range(len(rs.roots)) for j in range(i)]
        eta_pts = []
        for a, root in enumerate(rs.roots):
            s, _ = relative_fiber_radius(rs, a, r, t_y)
            eta = FiberPoint(((root.k, root.c),) if root.c else (), s)
            if ev.level(eta) != r:
                rep.fail("fiber-radius", {"root": a, "t_y": t_y.to_json()})
            radii.append(s)
            eta_pts.append(eta)
        radii = [x for x in radii if not x.is_zero] or [ONE]
        if not any(ev.contains(u_cons, e) and ev.contains(v_cons, e) for e in eta_pts):
            rep.fail("intersection-empty", {"t_y": t_y.to_json()})
        u_only = v_only = False
        for _ in range(samples):
            pt = random_fiber_point(rng, rs, radii, rs.p)
            rep.points += 1
            in_u, in_v = ev.contains(u_cons, pt), ev.contains(v_cons, pt)
            u_only |= in_u and not in_v
            v_only |= in_v and not in_u
            if (in_u and in_v) != ev.contains(i_cons, pt):
                rep.fail("intersection", {"t_y": t_y.to_json(), "point": pt.to_json()})
            if (in_u or in_v) != ev.contains(w_cons, pt):
                rep.fail("union", {"t_y": t_y.to_json(), "point": pt.to_json()})
        if not (u_only and v_only):
            rep.fail("containment", {"t_y": t_y.to_json()})
    return rep
