"""Points, affinoid domains and nice covers of the Berkovich projective line over Q_p.

Points are eta(a, r) with rational centre a and radius r in the extended
value group, plus the point at infinity.  Domains are finite systems of
inequalities |P| <= r, |P| = r, |P| >= r.  All decisions for systems of
degree-one constraints are made on a finite set of candidate points on the
skeleton spanned by the constraint centres, which suffices because every
other point retracts onto that skeleton without changing any |T - c_i|.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key

from .poly import Poly, peval, pfmt, pshift, ptrim
from .ultrametric import (
    ONE,
    ZERO,
    NormValue,
    frac,
    pnorm,
    scalar_norm,
    valuation,
)

LE, EQ, GE = "le", "eq", "ge"
RELATIONS = (LE, EQ, GE)


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class GaussPoint:
    """eta(center, radius); center None marks the point at infinity."""

    center: Fraction | None
    radius: NormValue = ZERO

    def __post_init__(self):
        if self.center is not None:
            object.__setattr__(self, "center", frac(self.center))

    @property
    def is_infinity(self) -> bool:
        return self.center is None

    def to_json(self) -> dict:
        if self.center is None:
            return {"infinity": True}
        return {"center": str(self.center), "radius": self.radius.to_json()}

    @classmethod
    def from_json(cls, obj) -> GaussPoint:
        if obj.get("infinity"):
            return INFINITY
        return cls(Fraction(obj["center"]), NormValue.from_json(obj["radius"]))


INFINITY = GaussPoint(None)


def classify_point(pt: GaussPoint) -> int:
    """1 for rigid points, 2 for radii in p^Q, 3 otherwise.  Infinity is rigid."""
    if pt.is_infinity or pt.radius.is_zero:
        return 1
    return 2 if pt.radius.e.b == 0 else 3


def same_point(x: GaussPoint, y: GaussPoint, p: int) -> bool:
    if x.is_infinity or y.is_infinity:
        return x.is_infinity and y.is_infinity
    if x.radius != y.radius:
        return False
    return scalar_norm(x.center - y.center, p) <= x.radius


def eval_gauss_norm(q: Poly, pt: GaussPoint, p: int) -> NormValue:
    """|q| at pt: recentre at the centre and take max |c_n| r^n."""
    q = ptrim(q)
    if pt.is_infinity:
        if len(q) > 1:
            raise GeometryError("a non-constant polynomial is unbounded at infinity")
        return scalar_norm(q[0], p) if q else ZERO
    if not q:
        return ZERO
    if pt.radius.is_zero:
        return scalar_norm(peval(q, pt.center), p)
    coeffs = pshift(q, pt.center) if pt.center else q
    best = ZERO
    rn = ONE
    for c in coeffs:
        if c:
            val = scalar_norm(c, p) * rn
            if val > best:
                best = val
        rn = rn * pt.radius
    return best


def linear_norm(center, pt: GaussPoint, p: int) -> NormValue:
    """|T - center| at a finite point, i.e. max(|a - center|, r)."""
    d = scalar_norm(pt.center - center, p)
    return d if d > pt.radius else pt.radius


# ---------------------------------------------------------------- root systems


@dataclass(frozen=True)
class RootSystem:
    mult: tuple
    dist: tuple
    embedding: tuple | None = None

    def __post_init__(self):
        k = len(self.mult)
        if len(self.dist) != k or any(len(row) != k for row in self.dist):
            raise GeometryError("distance matrix has the wrong shape")
        for i in range(k):
            if not self.dist[i][i].is_zero:
                raise GeometryError("diagonal distances must vanish")
            for j in range(k):
                if self.dist[i][j] != self.dist[j][i]:
                    raise GeometryError("distance matrix is not symmetric")
                if i != j and self.dist[i][j].is_zero:
                    raise GeometryError("distinct roots at distance zero")
                for l in range(k):
                    if self.dist[i][l] > max(self.dist[i][j], self.dist[j][l]):
                        raise GeometryError(f"ultrametric inequality fails at ({i},{j},{l})")

    @classmethod
    def from_roots(cls, roots, mults, p: int) -> RootSystem:
        roots = [frac(a) for a in roots]
        dist = tuple(tuple(scalar_norm(a - b, p) for b in roots) for a in roots)
        return cls(tuple(mults), dist, tuple(roots))

    @property
    def degree(self) -> int:
        return sum(self.mult)


def fiber_radius_solve(rs: RootSystem, alpha: int, r: NormValue) -> tuple[NormValue, int]:
    """Return (s, j0): s solves r = s^m prod max(s, |alpha - beta|), j0 is the multiplicity of strictly closer roots."""
    if r.is_zero:
        raise GeometryError("the fibre radius needs a nonzero level")
    m = rs.mult[alpha]
    others = sorted(
        ((rs.dist[alpha][j], rs.mult[j]) for j in range(len(rs.mult)) if j != alpha),
        key=cmp_to_key(lambda x, y: x[0].cmp(y[0])),
    )
    n = len(others)
    for k in range(n + 1):
        closer = sum(mu for _, mu in others[:k])
        far = ONE
        for d, mu in others[k:]:
            far = far * d**mu
        s = (r / far).root(m + closer)
        lo_ok = k == 0 or others[k - 1][0] <= s
        hi_ok = k == n or s <= others[k][0]
        if lo_ok and hi_ok:
            return s, closer
    raise GeometryError("no consistent segment; the distance data is corrupted")


def fiber_radii(rs: RootSystem, alpha: int, r: NormValue) -> NormValue:
    return fiber_radius_solve(rs, alpha, r)[0]


def level_at(rs: RootSystem, alpha: int, s: NormValue) -> NormValue:
    """s^m prod max(s, |alpha - beta|)."""
    out = s ** rs.mult[alpha]
    for j, mu in enumerate(rs.mult):
        if j != alpha:
            d = rs.dist[alpha][j]
            out = out * (d if d > s else s) ** mu
    return out


# ---------------------------------------------------------------- domains


@dataclass(frozen=True)
class Constraint:
    poly: Poly
    rel: str
    bound: NormValue

    def __post_init__(self):
        poly = ptrim(self.poly)
        object.__setattr__(self, "poly", poly)
        if len(poly) < 2 or poly[-1] != 1:
            raise GeometryError("constraint polynomials must be monic of degree >= 1")
        if self.rel not in RELATIONS:
            raise GeometryError(f"unknown relation {self.rel!r}")
        if self.bound.is_zero and self.rel != LE:
            raise GeometryError("a zero bound only makes sense with <=")

    @classmethod
    def linear(cls, center, rel: str, bound: NormValue) -> Constraint:
        return cls((-frac(center), Fraction(1)), rel, bound)

    @property
    def center(self) -> Fraction | None:
        return -self.poly[0] if len(self.poly) == 2 else None

    @property
    def point(self) -> GaussPoint:
        if self.center is None:
            raise GeometryError("only degree-one constraints have a rational boundary point")
        return GaussPoint(self.center, self.bound)

    def value(self, pt: GaussPoint, p: int) -> NormValue | None:
        """|poly| at pt, or None at infinity."""
        if pt.is_infinity:
            return None
        if self.center is not None:
            return linear_norm(self.center, pt, p)
        return eval_gauss_norm(self.poly, pt, p)

    def holds(self, pt: GaussPoint, p: int) -> bool:
        v = self.value(pt, p)
        if v is None:
            return self.rel == GE
        c = v.cmp(self.bound)
        return c <= 0 if self.rel == LE else (c == 0 if self.rel == EQ else c >= 0)

    def to_json(self) -> dict:
        return {"poly": [str(c) for c in self.poly], "rel": self.rel, "bound": self.bound.to_json()}

    @classmethod
    def from_json(cls, obj) -> Constraint:
        return cls(tuple(Fraction(c) for c in obj["poly"]), obj["rel"], NormValue.from_json(obj["bound"]))

    def describe(self) -> str:
        sym = {LE: "<=", EQ: "=", GE: ">="}[self.rel]
        return f"|{pfmt(self.poly)}| {sym} {self.bound}"


def newton_slopes(poly: Poly, p: int) -> list[tuple[Fraction, int]]:
    """Root valuations from the Newton polygon, as (valuation, count) pairs in increasing order."""
    pts = [(i, valuation(c, p)) for i, c in enumerate(ptrim(poly)) if c != 0]
    hull: list[tuple[int, int]] = []
    for q in pts:
        # lower convex hull, left to right
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (q[0] - x1) >= (q[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(q)
    out = [(Fraction(y1 - y2, x2 - x1), x2 - x1) for (x1, y1), (x2, y2) in zip(hull, hull[1:])]
    return sorted(out)


def check_constraint_poly(poly: Poly, p: int) -> None:
    """Reject low-degree constraint polynomials that the Newton polygon shows to be reducible.

    Above degree 3 irreducibility is the caller's responsibility. A single slope does
    not prove irreducibility, so this is a necessary check only.
    """
    poly = ptrim(poly)
    if 3 <= len(poly) <= 4:
        slopes = newton_slopes(poly, p)
        if poly[0] == 0 or len(slopes) > 1:
            raise GeometryError(f"{pfmt(poly)} is reducible over Q_{p}")


@dataclass(frozen=True)
class AffinoidDomain:
    """Intersection of the constraints; no constraints and empty=False is all of P^1."""

    constraints: tuple = ()
    connected: str = "unknown"
    empty: bool = False

    def contains(self, pt: GaussPoint, p: int) -> bool:
        if self.empty:
            return False
        return all(c.holds(pt, p) for c in self.constraints)

    @property
    def is_linear(self) -> bool:
        return all(c.center is not None for c in self.constraints)

    def boundary(self, p: int) -> list[GaussPoint]:
        """Points of the non-redundant degree-one constraints."""
        pts: list[GaussPoint] = []
        for c in self.constraints:
            q = c.point
            if self.contains(q, p) and not any(same_point(q, x, p) for x in pts):
                pts.append(q)
        return pts

    def to_json(self) -> list:
        if self.empty:
            return [{"empty": True}]
        return [c.to_json() for c in self.constraints]

    @classmethod
    def from_json(cls, obj, connected: str = "unknown") -> AffinoidDomain:
        if obj and isinstance(obj[0], dict) and obj[0].get("empty"):
            return EMPTY
        return cls(tuple(Constraint.from_json(c) for c in obj), connected)


EMPTY = AffinoidDomain((), "yes", True)
PROJECTIVE_LINE = AffinoidDomain((), "yes", False)


def _sorted_norms(values) -> list[NormValue]:
    out: list[NormValue] = []
    for v in sorted(values, key=cmp_to_key(lambda x, y: x.cmp(y))):
        if not out or out[-1] != v:
            out.append(v)
    return out


def candidate_points(constraints, p: int, extra_centers=()) -> list[GaussPoint]:
    """Finite set of points meeting every cell cut out by degree-one constraints."""
    centers: list[Fraction] = []
    for c in constraints:
        if c.center is None:
            raise GeometryError("candidate search needs degree-one constraints")
        if c.center not in centers:
            centers.append(c.center)
    for x in extra_centers:
        if frac(x) not in centers:
            centers.append(frac(x))
    if not centers:
        centers = [Fraction(0)]
    radii = {c.bound for c in constraints if not c.bound.is_zero}
    for i, a in enumerate(centers):
        for b in centers[i + 1 :]:
            radii.add(scalar_norm(a - b, p))
    radii = _sorted_norms(radii) or [ONE]
    pp = pnorm(1)
    ext = [ZERO, radii[0] * pp]
    for i, r in enumerate(radii):
        ext.append(r)
        if i + 1 < len(radii):
            ext.append((r * radii[i + 1]).root(2))
    ext.append(radii[-1] / pp)
    pts = [GaussPoint(c, r) for c in centers for r in ext]
    pts.append(INFINITY)
    return pts


def find_point(domain: AffinoidDomain, p: int, avoid=()) -> GaussPoint | None:
    """Some point of the domain outside the given circles, or None."""
    if domain.empty:
        return None
    for pt in candidate_points(domain.constraints + tuple(avoid), p):
        if domain.contains(pt, p) and not any(
            c.value(pt, p) is not None and c.value(pt, p) == c.bound for c in avoid
        ):
            return pt
    return None


def is_empty(domain: AffinoidDomain, p: int) -> bool:
    return domain.empty or find_point(domain, p) is None


def domain_side(u: AffinoidDomain, eta: GaussPoint, p: int, witness: GaussPoint | None = None) -> str:
    """LE or GE: the half {|T - c| <= r} or {|T - c| >= r} that contains the connected domain u."""
    if classify_point(eta) != 3:
        raise GeometryError("the separating point must be of type 3")
    if not any(c.center is not None and same_point(c.point, eta, p) for c in u.constraints):
        raise GeometryError("the point is not on the boundary of the domain")
    if not u.contains(eta, p):
        raise GeometryError("the point is not on the boundary of the domain")
    circle = Constraint.linear(eta.center, EQ, eta.radius)
    if witness is None:
        witness = find_point(u, p, avoid=(circle,))
        if witness is None:
            raise GeometryError("the domain has no interior witness")
    if witness.is_infinity:
        return GE
    v = linear_norm(eta.center, witness, p)
    c = v.cmp(eta.radius)
    if c == 0:
        raise GeometryError("the witness lies on the separating circle")
    return LE if c < 0 else GE


def _bound_key(c: Constraint):
    return c.poly


def domain_intersect(u: AffinoidDomain, v: AffinoidDomain, p: int) -> AffinoidDomain:
    if u.empty or v.empty:
        return EMPTY
    groups: dict = {}
    for c in u.constraints + v.constraints:
        groups.setdefault(_bound_key(c), []).append(c)
    out: list[Constraint] = []
    for poly, cs in groups.items():
        lows = [c.bound for c in cs if c.rel in (GE, EQ)]
        highs = [c.bound for c in cs if c.rel in (LE, EQ)]
        lo = max(lows) if lows else None
        hi = min(highs) if highs else None
        if lo is not None and hi is not None:
            if lo > hi:
                return EMPTY
            if lo == hi:
                out.append(Constraint(poly, EQ, lo))
                continue
        if lo is not None:
            out.append(Constraint(poly, GE, lo))
        if hi is not None:
            out.append(Constraint(poly, LE, hi))
    conn = "yes" if u.connected == v.connected == "yes" else "unknown"
    dom = AffinoidDomain(tuple(out), conn)
    if dom.is_linear and is_empty(dom, p):
        return EMPTY
    return dom


def reduce_domain(u: AffinoidDomain, p: int) -> AffinoidDomain:
    """Drop degree-one constraints whose boundary point is outside a connected nonempty domain."""
    if u.empty or not u.is_linear:
        return u
    keep = tuple(c for c in u.constraints if u.contains(c.point, p))
    return AffinoidDomain(keep, u.connected)


def domain_union(u: AffinoidDomain, v: AffinoidDomain, p: int) -> AffinoidDomain:
    """Union of two connected domains meeting in one type-3 point: drop the separating pair."""
    u, v = reduce_domain(u, p), reduce_domain(v, p)
    for first, second in ((u, v), (v, u)):
        for cu in first.constraints:
            if cu.rel != LE:
                continue
            for cv in second.constraints:
                if cv.rel == GE and cv.poly == cu.poly and cv.bound == cu.bound:
                    return _glue(first, second, cu, cv, p)
    raise GeometryError("no separating constraint pair |R| <= r, |R| >= r was found")


def _glue(u, v, cu, cv, p) -> AffinoidDomain:
    if not cu.bound.is_type3:
        raise GeometryError("the shared boundary is not a type-3 point")
    if cu.center is not None:
        eta = cu.point
        if not (u.contains(eta, p) and v.contains(eta, p)):
            raise GeometryError("the domains do not meet in the separating point")
    rest = tuple(c for c in u.constraints if c is not cu) + tuple(c for c in v.constraints if c is not cv)
    conn = "yes" if u.connected == v.connected == "yes" else "unknown"
    return AffinoidDomain(rest, conn)


def canonical_form(boundary, witness: GaussPoint, p: int) -> AffinoidDomain:
    """One constraint per boundary point, oriented towards the witness."""
    out = []
    for eta in boundary:
        if eta.is_infinity or classify_point(eta) != 3:
            raise GeometryError("boundary points must be of type 3")
        if witness.is_infinity:
            rel = GE
        else:
            c = linear_norm(eta.center, witness, p).cmp(eta.radius)
            if c == 0:
                raise GeometryError("the witness lies on a boundary circle")
            rel = LE if c < 0 else GE
        out.append(Constraint.linear(eta.center, rel, eta.radius))
    return AffinoidDomain(tuple(out), "yes")


def canonicalize(u: AffinoidDomain, p: int) -> AffinoidDomain:
    if u.empty:
        return u
    bd = u.boundary(p)
    circles = tuple(Constraint.linear(x.center, EQ, x.radius) for x in bd)
    witness = find_point(u, p, avoid=circles)
    if witness is None:
        raise GeometryError("the domain has no interior point off its boundary")
    return canonical_form(bd, witness, p)


# ---------------------------------------------------------------- nice covers


@dataclass(frozen=True)
class NiceCover:
    pieces: tuple
    nodes: tuple

    def adjacency(self, p: int) -> list[tuple[int, int, int]]:
        """(node, i, j) for each node lying on pieces i < j."""
        out = []
        for k, eta in enumerate(self.nodes):
            on = [i for i, u in enumerate(self.pieces) if u.contains(eta, p)]
            for a in range(len(on)):
                for b in range(a + 1, len(on)):
                    out.append((k, on[a], on[b]))
        return out

    def to_json(self) -> dict:
        return {"pieces": [u.to_json() for u in self.pieces], "nodes": [x.to_json() for x in self.nodes]}

    @classmethod
    def from_json(cls, obj) -> NiceCover:
        pieces = tuple(AffinoidDomain.from_json(u) for u in obj["pieces"])
        return cls(pieces, tuple(GaussPoint.from_json(x) for x in obj["nodes"]))


@dataclass
class CoverReport:
    valid: bool = True
    violations: list = field(default_factory=list)

    def fail(self, clause: str, detail: str, witness: GaussPoint | None = None):
        self.valid = False
        self.violations.append(
            {"clause": clause, "detail": detail, "witness": witness.to_json() if witness else None}
        )

    def to_json(self) -> dict:
        return {"valid": self.valid, "violations": self.violations}


def nice_cover_check(cover: NiceCover, p: int) -> CoverReport:
    rep = CoverReport()
    pieces = cover.pieces
    allc = tuple(c for u in pieces for c in u.constraints)
    if any(c.center is None for c in allc):
        rep.fail("shape", "only degree-one constraints are checked")
        return rep
    cands = candidate_points(allc, p, [x.center for x in cover.nodes if not x.is_infinity])
    for pt in cands:
        if not any(u.contains(pt, p) for u in pieces):
            rep.fail("cover", "point covered by no piece", pt)
            break
    bds = []
    for i, u in enumerate(pieces):
        if u.connected == "no":
            rep.fail("connected", f"piece {i} is flagged disconnected")
        if u.empty or is_empty(u, p):
            rep.fail("connected", f"piece {i} is empty")
        bd = u.boundary(p)
        for x in bd:
            if classify_point(x) != 3:
                rep.fail("type3-boundary", f"piece {i} has a boundary point of type {classify_point(x)}", x)
        bds.append(bd)
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            for pt in cands:
                if pieces[i].contains(pt, p) and pieces[j].contains(pt, p):
                    shared = any(same_point(pt, x, p) for x in bds[i]) and any(
                        same_point(pt, x, p) for x in bds[j]
                    )
                    if not shared or classify_point(pt) != 3:
                        rep.fail("intersection", f"pieces {i} and {j} share a non-boundary point", pt)
                        break
                    if not any(same_point(pt, x, p) for x in cover.nodes):
                        rep.fail("intersection", f"pieces {i} and {j} meet at an unlisted node", pt)
                        break
    for i in range(len(pieces)):
        for j in range(len(pieces)):
            if i != j and not any(pieces[i].contains(pt, p) and not pieces[j].contains(pt, p) for pt in cands):
                rep.fail("containment", f"piece {i} is contained in piece {j}")
    for k, eta in enumerate(cover.nodes):
        if classify_point(eta) != 3:
            rep.fail("intersection", f"node {k} is not of type 3", eta)
    return rep


def two_coloring(n: int, edges) -> list[int]:
    """BFS 2-colouring in index order; raises on an odd cycle."""
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        nbrs[i].append(j)
        nbrs[j].append(i)
    color = [-1] * n
    for start in range(n):
        if color[start] >= 0:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in nbrs[i]:
                if color[j] < 0:
                    color[j] = 1 - color[i]
                    queue.append(j)
                elif color[j] == color[i]:
                    raise GeometryError(f"odd cycle through pieces {i} and {j}; no parity function")
    return color


def parity_coloring(cover: NiceCover, p: int) -> list[int]:
    edges = [(i, j) for _, i, j in cover.adjacency(p)]
    return two_coloring(len(cover.pieces), edges)


def build_nice_cover(points, p: int) -> NiceCover:
    """Closures of the components of P^1 minus a finite set of type-3 points."""
    pts = list(points)
    for k, x in enumerate(pts):
        if x.is_infinity or classify_point(x) != 3:
            raise GeometryError("cover nodes must be type-3 points with rational centres")
        if any(same_point(x, y, p) for y in pts[:k]):
            raise GeometryError("cover nodes must be distinct")

    def inside(s, t):
        return s.radius < t.radius and scalar_norm(s.center - t.center, p) <= t.radius

    parent = []
    for s in pts:
        enclosing = [t for t in range(len(pts)) if inside(s, pts[t])]
        parent.append(min(enclosing, key=lambda t: pts[t].radius) if enclosing else None)
    children = {k: [j for j in range(len(pts)) if parent[j] == k] for k in range(len(pts))}
    order: list[int] = []

    def visit(k):
        for j in children[k]:
            visit(j)
        order.append(k)

    for k in range(len(pts)):
        if parent[k] is None:
            visit(k)
    pieces = []
    for k in order:
        s = pts[k]
        cs = [Constraint.linear(s.center, LE, s.radius)]
        cs += [Constraint.linear(pts[j].center, GE, pts[j].radius) for j in children[k]]
        pieces.append(AffinoidDomain(tuple(cs), "yes"))
    outer = [Constraint.linear(pts[k].center, GE, pts[k].radius) for k in range(len(pts)) if parent[k] is None]
    pieces.append(AffinoidDomain(tuple(outer), "yes"))
    return NiceCover(tuple(pieces), tuple(pts[k] for k in order))


def cover_to_dot(cover: NiceCover, p: int) -> str:
    lines = ["graph cover {"]
    for i, u in enumerate(cover.pieces):
        label = " & ".join(c.describe() for c in u.constraints) or "P1"
        lines.append(f'  U{i} [shape=box, label="U{i}: {label}"];')
    for k, x in enumerate(cover.nodes):
        lines.append(f'  s{k} [shape=point, xlabel="eta({x.center}, {x.radius})"];')
    for k, x in enumerate(cover.nodes):
        for i, u in enumerate(cover.pieces):
            if u.contains(x, p):
                lines.append(f"  U{i} -- s{k};")
    lines.append("}")
    return "\n".join(lines) + "\n"
