"""Patching over a nice cover: from transition matrices at the nodes to one matrix per piece.

Piece elements are kept as matrices of exact rational functions in T, so the
identities g_s = g_U * g_V^-1 can be checked without truncation.  Near a node
eta = eta_{c, rho} they are expanded as Laurent polynomials in W = T - c.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .geometry import GE, LE, AffinoidDomain, Constraint, GaussPoint, NiceCover, candidate_points, domain_side, eval_gauss_norm
from .patching import (
    BanachTriple,
    GroupChart,
    PatchingError,
    factor_near_identity,
    factor_near_identity_swapped,
    mat_add,
)
from .poly import padd, pmul, pneg, pscale, pshift, psub, ptrim
from .series import CIRCLE, LaurentElement, RingTag, invert_dominant, padic_round
from .ultrametric import ZERO, NormValue, frac


class RatMatrix:
    """A matrix of rational functions stored as N / D: polynomial entries over one monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(Fraction(1),)):
        den = ptrim(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        lead = den[-1]
        rows = tuple(tuple(pscale(ptrim(x), 1 / lead) for x in row) for row in num)
        den = pscale(den, 1 / lead)
        # cancel a common power of T
        k = len(den) - 1
        for row in rows:
            for x in row:
                if x:
                    k = min(k, next(i for i, c in enumerate(x) if c))
        k = min(k, next(i for i, c in enumerate(den) if c))
        if k:
            rows = tuple(tuple(x[k:] for x in row) for row in rows)
            den = den[k:]
        self.num = rows
        self.den = den

    @property
    def n(self) -> int:
        return len(self.num)

    @classmethod
    def identity(cls, n: int) -> RatMatrix:
        return cls(tuple(tuple((Fraction(1),) if i == j else () for j in range(n)) for i in range(n)))

    def __repr__(self):
        return f"RatMatrix({self.num}, {self.den})"

    def __eq__(self, other):
        if not isinstance(other, RatMatrix) or self.n != other.n:
            return False
        return all(
            pmul(x, other.den) == pmul(y, self.den)
            for rx, ry in zip(self.num, other.num)
            for x, y in zip(rx, ry)
        )

    def __matmul__(self, other: RatMatrix) -> RatMatrix:
        n, m, k = self.n, len(other.num[0]), len(other.num)
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = ()
                for t in range(k):
                    acc = padd(acc, pmul(self.num[i][t], other.num[t][j]))
                row.append(acc)
            out.append(tuple(row))
        return RatMatrix(tuple(out), pmul(self.den, other.den))

    def __sub__(self, other: RatMatrix) -> RatMatrix:
        rows = tuple(
            tuple(psub(pmul(x, other.den), pmul(y, self.den)) for x, y in zip(rx, ry))
            for rx, ry in zip(self.num, other.num)
        )
        return RatMatrix(rows, pmul(self.den, other.den))

    def inverse(self) -> RatMatrix:
        det = _pdet(self.num)
        if not det:
            raise PatchingError("matrix is not invertible over Q(T)")
        adj = _padjugate(self.num)
        return RatMatrix(tuple(tuple(pmul(x, self.den) for x in row) for row in adj), det)

    def norm_at(self, pt: GaussPoint, p: int) -> NormValue:
        top = max((eval_gauss_norm(x, pt, p) for row in self.num for x in row), default=ZERO)
        return top / eval_gauss_norm(self.den, pt, p)

    def to_json(self) -> dict:
        return {
            "num": [[[str(c) for c in x] for x in row] for row in self.num],
            "den": [str(c) for c in self.den],
        }

    @classmethod
    def from_json(cls, obj) -> RatMatrix:
        num = tuple(tuple(tuple(Fraction(c) for c in x) for x in row) for row in obj["num"])
        return cls(num, tuple(Fraction(c) for c in obj["den"]))


def _minor(m, i, j):
    return tuple(tuple(x for c, x in enumerate(row) if c != j) for r, row in enumerate(m) if r != i)


def _pdet(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return psub(pmul(m[0][0], m[1][1]), pmul(m[0][1], m[1][0]))
    acc = ()
    for j in range(n):
        term = pmul(m[0][j], _pdet(_minor(m, 0, j)))
        acc = padd(acc, term if j % 2 == 0 else pneg(term))
    return acc


def _padjugate(m):
    n = len(m)
    if n == 1:
        return (((Fraction(1),),),)
    return tuple(
        tuple(
            _pdet(_minor(m, j, i)) if (i + j) % 2 == 0 else pneg(_pdet(_minor(m, j, i)))
            for j in range(n)
        )
        for i in range(n)
    )


# ---------------------------------------------------------------- conversions


def node_tag(eta: GaussPoint, p: int) -> RingTag:
    return RingTag(eta.radius, CIRCLE, p)


def laurent_to_rat(m, center) -> RatMatrix:
    """A matrix of Laurent polynomials in W = T - center as a rational matrix in T."""
    c = frac(center)
    k = max((max(0, -min(x.coeffs)) for row in m for x in row if not x.is_zero()), default=0)
    rows = []
    for row in m:
        out = []
        for x in row:
            if x.is_zero():
                out.append(())
                continue
            num_w = [Fraction(0)] * (max(x.coeffs) + k + 1)
            for n, a in x.coeffs.items():
                num_w[n + k] = a
            out.append(pshift(tuple(num_w), -c))
        rows.append(tuple(out))
    den_w = tuple([Fraction(0)] * k + [Fraction(1)])
    return RatMatrix(tuple(rows), pshift(den_w, -c))


def rat_to_laurent(f: RatMatrix, eta: GaussPoint, tol: NormValue, p: int):
    """Laurent expansion in W = T - c on the circle of eta, entrywise accurate to tol."""
    tag = node_tag(eta, p)
    c = eta.center
    nums = [[LaurentElement(dict(enumerate(pshift(x, c))), tag) for x in row] for row in f.num]
    top = max((x.norm() for row in nums for x in row), default=ZERO)
    if top.is_zero:
        return tuple(tuple(x for x in row) for row in nums)
    den = LaurentElement(dict(enumerate(pshift(f.den, c))), tag)
    if len(f.den) == 1:
        inv = LaurentElement.const(1 / f.den[0], tag)
    else:
        inv, _ = invert_dominant(den, tol / top)
    out = []
    for row in nums:
        cur = []
        for x in row:
            cur.append(padic_round(x * inv, tol))
        out.append(tuple(cur))
    return tuple(out)


def mat_from_json(obj, p: int, eta: GaussPoint):
    """Matrix of {"n": "c"} coefficient maps in W = T - c at the node."""
    tag = node_tag(eta, p)
    return tuple(tuple(LaurentElement({int(n): Fraction(c) for n, c in x.items()}, tag) for x in row) for row in obj)


# ---------------------------------------------------------------- propagation


@dataclass
class FactorRecord:
    node: int
    half: str
    center: Fraction
    radius: NormValue

    def to_json(self) -> dict:
        return {"node": self.node, "half": self.half, "center": str(self.center), "radius": self.radius.to_json()}


@dataclass
class PropagationResult:
    order: list
    elements: dict
    residuals: dict
    certificates: list
    factors: dict = field(default_factory=dict)
    regular: dict = field(default_factory=dict)

    def ok(self, tol: NormValue) -> bool:
        return all(r <= tol for r in self.residuals.values()) and all(self.regular.values())

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "elements": {
                str(i): m.to_json() for i, m in sorted(self.elements.items())
            },
            "residuals": {str(k): r.to_json() for k, r in sorted(self.residuals.items())},
            "certificates": [c.to_json() for c in self.certificates],
            "factors": {str(i): [f.to_json() for f in fs] for i, fs in sorted(self.factors.items())},
            "regular": {str(i): v for i, v in sorted(self.regular.items())},
        }


def _half_contains(u: AffinoidDomain, half: Constraint, p: int) -> bool:
    cands = candidate_points(u.constraints + (half,), p)
    return all(half.holds(x, p) for x in cands if u.contains(x, p))


def _factor_at(triple, chart, target, tol, disc_left: bool, prune=None):
    """target = left * right; the disc factor goes left iff disc_left."""
    n = chart.n
    ident = triple.identity(n)
    a = tuple(tuple(target[i][j] - ident[i][j] for j in range(n)) for i in range(n))
    if disc_left:
        u, v, cert = factor_near_identity(triple, chart, a, tol, prune=prune)
        return mat_add(ident, u), mat_add(ident, v), cert
    v, u, cert = factor_near_identity_swapped(triple, chart, a, tol, prune=prune)
    return mat_add(ident, v), mat_add(ident, u), cert


def propagate_over_cover(cover: NiceCover, coloring, transitions: dict, tol: NormValue, p: int, chart=None, prune="tol"):
    """Piece matrices g_U with g_s = g_U * g_V^-1 at every node, where colour(U) = 0.

    ``transitions`` maps node index to a matrix of Laurent polynomials in
    W = T - c on the node's circle.  Increments are rounded at ``prune``
    (default: tol) to keep coefficient heights bounded.
    """
    if prune == "tol":
        prune = tol
    adj = {}
    for k, i, j in cover.adjacency(p):
        if k in adj:
            raise PatchingError(f"node {k} lies on more than two pieces")
        adj[k] = (i, j)
    missing = [k for k in range(len(cover.nodes)) if k not in adj]
    if missing:
        raise PatchingError(f"nodes {missing} do not join two pieces")
    if set(transitions) != set(adj):
        raise PatchingError("transitions must be given at every node")
    for k, (i, j) in adj.items():
        if coloring[i] == coloring[j]:
            raise PatchingError(f"pieces {i} and {j} share node {k} and a colour")
    first = next(iter(transitions.values()))
    n = len(first)
    chart = chart or GroupChart.gl(n)

    order = [0]
    placed = {0}
    links = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for k, (a, b) in sorted(adj.items()):
            if i not in (a, b):
                continue
            j = b if a == i else a
            if j in placed:
                continue
            touching = {x if y == j else y for x, y in adj.values() if j in (x, y)}
            if len(touching & placed) != 1:
                raise PatchingError("no ordering with connected prefix unions")
            placed.add(j)
            order.append(j)
            links.append((j, i, k))
            queue.append(j)
    if len(order) != len(cover.pieces):
        raise PatchingError("the cover is not connected through its nodes")

    elements = {0: RatMatrix.identity(n)}
    factors: dict = {0: []}
    certs = []
    for new, old, k in links:
        eta = cover.nodes[k]
        c = eta.center
        tri = BanachTriple(node_tag(eta, p))
        side = domain_side(cover.pieces[new], eta, p)
        other = GE if side == LE else LE
        g_eta = transitions[k]
        if coloring[new] == 0:
            # g_eta * g_old = a * b with a on the new side
            target = _laurent_mul(g_eta, rat_to_laurent(elements[old], eta, tol, p))
            left, right, cert = _factor_at(tri, chart, target, tol, disc_left=(side == LE), prune=prune)
            fix = laurent_to_rat(right, c).inverse()
            new_elem = laurent_to_rat(left, c)
            new_half, old_half = side, other
        else:
            # g_old^-1 * g_eta = c * d with d on the new side
            inv_old = rat_to_laurent(elements[old].inverse(), eta, tol, p)
            target = _laurent_mul(inv_old, g_eta)
            left, right, cert = _factor_at(tri, chart, target, tol, disc_left=(side == GE), prune=prune)
            fix = laurent_to_rat(left, c)
            new_elem = laurent_to_rat(right, c).inverse()
            new_half, old_half = side, other
        certs.append(cert)
        for h in list(elements):
            elements[h] = elements[h] @ fix
            factors[h].append(FactorRecord(k, old_half, c, eta.radius))
        elements[new] = new_elem
        factors[new] = [FactorRecord(k, new_half, c, eta.radius)]

    residuals = {}
    for k, (i, j) in adj.items():
        u, v = (i, j) if coloring[i] == 0 else (j, i)
        eta = cover.nodes[k]
        g_eta = laurent_to_rat(transitions[k], eta.center)
        residuals[k] = (g_eta - elements[u] @ elements[v].inverse()).norm_at(eta, p)

    regular = {}
    for i, fs in factors.items():
        regular[i] = all(
            _half_contains(cover.pieces[i], Constraint.linear(f.center, f.half, f.radius), p) for f in fs
        )
    return PropagationResult(order, elements, residuals, certs, factors, regular)


def _laurent_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for t in range(1, k):
                acc = acc + a[i][t] * b[t][j]
            row.append(acc.retag(CIRCLE))
        out.append(tuple(row))
    return tuple(out)


def identity_transition(n: int, eta: GaussPoint, p: int):
    tag = node_tag(eta, p)
    return tuple(tuple(LaurentElement.const(1 if i == j else 0, tag) for j in range(n)) for i in range(n))


__all__ = [
    "RatMatrix",
    "PropagationResult",
    "FactorRecord",
    "propagate_over_cover",
    "rat_to_laurent",
    "laurent_to_rat",
    "identity_transition",
    "mat_from_json",
]
