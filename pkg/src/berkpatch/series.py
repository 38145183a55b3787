"""Laurent polynomials over Q normed at a radius r, and their quotients by P(X) - T.

A ring tag fixes the radius and which exponents are allowed: ``disc`` keeps
n >= 0, ``outer`` keeps n <= 0 and ``circle`` allows every n.  The norm is
max |a_n| r^n in all three cases.  A quotient element is stored through its
representative of degree < d in X, each coefficient a Laurent polynomial in T.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct

from .geometry import GaussPoint, RootSystem, eval_gauss_norm, fiber_radii
from .poly import Poly, from_roots, padd, pmul, ppow, pscale, ptrim
from .ultrametric import (
    ONE,
    ZERO,
    LogExponent,
    NormValue,
    RationalInterval,
    compare_rational,
    frac,
    norm_enclosure,
    scalar_norm,
    valuation,
)

DISC, OUTER, CIRCLE = "disc", "outer", "circle"
MODES = (DISC, OUTER, CIRCLE)


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class RingTag:
    r: NormValue
    mode: str
    p: int = 5

    def __post_init__(self):
        if self.r.is_zero:
            raise SeriesError("the radius must be nonzero")
        if self.mode not in MODES:
            raise SeriesError(f"unknown ring mode {self.mode!r}")

    def allows(self, n: int) -> bool:
        return self.mode == CIRCLE or (n >= 0 if self.mode == DISC else n <= 0)

    def with_mode(self, mode: str) -> RingTag:
        return RingTag(self.r, mode, self.p)

    def join(self, other: RingTag) -> RingTag:
        if self.r != other.r or self.p != other.p:
            raise SeriesError("ring tags with different radii or primes")
        return self if self.mode == other.mode else self.with_mode(CIRCLE)

    def to_json(self) -> dict:
        return {"r": self.r.to_json(), "mode": self.mode, "p": self.p}

    @classmethod
    def from_json(cls, obj) -> RingTag:
        return cls(NormValue.from_json(obj["r"]), obj["mode"], int(obj.get("p", 5)))


def _term_exp(c: Fraction, n: int, r: NormValue, p: int) -> LogExponent:
    v = valuation(c, p)
    return LogExponent(v + n * r.e.a, n * r.e.b)


class LaurentElement:
    """Finitely supported sum of a_n T^n."""

    __slots__ = ("coeffs", "tag", "_norm")

    def __init__(self, coeffs, tag: RingTag):
        clean = {}
        for n, c in coeffs.items():
            c = frac(c)
            if c:
                n = int(n)
                if not tag.allows(n):
                    raise SeriesError(f"exponent {n} is not allowed in the {tag.mode} ring")
                clean[n] = c
        self.coeffs = clean
        self.tag = tag
        self._norm = None

    @classmethod
    def zero(cls, tag: RingTag) -> LaurentElement:
        return cls({}, tag)

    @classmethod
    def const(cls, c, tag: RingTag) -> LaurentElement:
        return cls({0: c}, tag)

    @classmethod
    def monomial(cls, c, n: int, tag: RingTag) -> LaurentElement:
        return cls({n: c}, tag)

    def __repr__(self):
        body = " + ".join(f"{c}*T^{n}" for n, c in sorted(self.coeffs.items())) or "0"
        return f"Laurent[{self.tag.mode}]({body})"

    def __eq__(self, other):
        return isinstance(other, LaurentElement) and self.coeffs == other.coeffs and self.tag.r == other.tag.r

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, n: int) -> Fraction:
        return self.coeffs.get(n, Fraction(0))

    def norm(self) -> NormValue:
        if self._norm is None:
            best = None
            r, p = self.tag.r, self.tag.p
            for n, c in self.coeffs.items():
                e = _term_exp(c, n, r, p)
                if best is None or e.cmp(best) < 0:
                    best = e
            self._norm = ZERO if best is None else NormValue(best)
        return self._norm

    def retag(self, mode: str) -> LaurentElement:
        return LaurentElement(self.coeffs, self.tag.with_mode(mode))

    def __add__(self, other):
        out = dict(self.coeffs)
        for n, c in other.coeffs.items():
            out[n] = out.get(n, 0) + c
        return LaurentElement(out, self.tag.join(other.tag))

    def __neg__(self):
        return LaurentElement({n: -c for n, c in self.coeffs.items()}, self.tag)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, LaurentElement):
            q = frac(other)
            return LaurentElement({n: c * q for n, c in self.coeffs.items()}, self.tag)
        out: dict[int, Fraction] = {}
        for n, c in self.coeffs.items():
            for m, d in other.coeffs.items():
                out[n + m] = out.get(n + m, 0) + c * d
        return LaurentElement(out, self.tag.join(other.tag))

    __rmul__ = __mul__

    def dominant(self) -> tuple[int, Fraction]:
        """The unique term of maximal norm; ties are rejected."""
        if not self.coeffs:
            raise SeriesError("the zero element has no dominant term")
        top = self.norm()
        hits = [(n, c) for n, c in self.coeffs.items() if NormValue(_term_exp(c, n, self.tag.r, self.tag.p)) == top]
        if len(hits) != 1:
            raise SeriesError("no unique dominant term")
        return hits[0]

    def to_json(self) -> dict:
        return {
            "tag": self.tag.to_json(),
            "coeffs": {str(n): str(c) for n, c in sorted(self.coeffs.items())},
        }

    @classmethod
    def from_json(cls, obj) -> LaurentElement:
        tag = RingTag.from_json(obj["tag"])
        return cls({int(n): Fraction(c) for n, c in obj["coeffs"].items()}, tag)


def _ceil_exponent(e: LogExponent) -> int:
    """Smallest integer M with M >= a + b*sqrt2."""
    m = int(e.approx()) - 2
    while LogExponent(m, 0) < e:
        m += 1
    return m


def padic_round(x: LaurentElement, prune: NormValue) -> LaurentElement:
    """Drop terms of norm <= prune and round the rest p-adically, each within prune."""
    tag, p = x.tag, x.tag.p
    out = {}
    for n, c in x.coeffs.items():
        term = NormValue(_term_exp(c, n, tag.r, p))
        if term <= prune:
            continue
        # |c - c'| r^n <= prune  <=>  p^-(v+M) <= prune / (|c| r^n)
        m = max(_ceil_exponent((prune / term).e), 1)
        v = valuation(c, p)
        unit = c / Fraction(p) ** v
        mod = p**m
        rounded = (unit.numerator * pow(unit.denominator, -1, mod)) % mod
        if rounded > mod // 2:
            rounded -= mod
        out[n] = Fraction(rounded) * Fraction(p) ** v
    return LaurentElement(out, tag)


def ring_norm(f) -> NormValue:
    return f.norm()


def split_laurent(c: LaurentElement) -> tuple[LaurentElement, LaurentElement]:
    """Nonnegative exponents to the disc ring, negative ones to the outer ring."""
    a = {n: x for n, x in c.coeffs.items() if n >= 0}
    b = {n: x for n, x in c.coeffs.items() if n < 0}
    return LaurentElement(a, c.tag.with_mode(DISC)), LaurentElement(b, c.tag.with_mode(OUTER))


# ---------------------------------------------------------------- quotients


class QuotientElement:
    """sum_i rep[i] X^i modulo P(X) - T, with P monic of degree d."""

    __slots__ = ("modulus", "rep", "tag")

    def __init__(self, modulus: Poly, rep, tag: RingTag):
        modulus = ptrim(modulus)
        if len(modulus) < 2 or modulus[-1] != 1:
            raise SeriesError("the modulus must be monic of degree >= 1")
        d = len(modulus) - 1
        rep = list(rep)
        if len(rep) > d:
            raise SeriesError("the representative has degree >= d")
        rep += [LaurentElement.zero(tag)] * (d - len(rep))
        self.modulus = modulus
        self.rep = tuple(x if isinstance(x, LaurentElement) else LaurentElement(x, tag) for x in rep)
        self.tag = tag
        for x in self.rep:
            if x.tag.r != tag.r:
                raise SeriesError("coefficient radius differs from the tag")

    @property
    def d(self) -> int:
        return len(self.modulus) - 1

    @classmethod
    def zero(cls, modulus, tag) -> QuotientElement:
        return cls(modulus, [], tag)

    @classmethod
    def const(cls, c, modulus, tag) -> QuotientElement:
        return cls(modulus, [LaurentElement.const(c, tag)], tag)

    def __repr__(self):
        return f"Quotient[{self.tag.mode}]({list(self.rep)})"

    def __eq__(self, other):
        return (
            isinstance(other, QuotientElement)
            and self.modulus == other.modulus
            and all(a == b for a, b in zip(self.rep, other.rep))
        )

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.rep)

    def norm(self) -> NormValue:
        return max((x.norm() for x in self.rep), default=ZERO)

    def _check(self, other):
        if not isinstance(other, QuotientElement) or other.modulus != self.modulus:
            raise SeriesError("quotient elements with different moduli")

    def __add__(self, other):
        self._check(other)
        tag = self.tag.join(other.tag)
        return QuotientElement(self.modulus, [a + b for a, b in zip(self.rep, other.rep)], tag)

    def __neg__(self):
        return QuotientElement(self.modulus, [-a for a in self.rep], self.tag)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, QuotientElement):
            return QuotientElement(self.modulus, [a * other for a in self.rep], self.tag)
        self._check(other)
        tag = self.tag.join(other.tag)
        d = self.d
        coeffs: list[dict] = [dict() for _ in range(2 * d - 1)]
        for i, a in enumerate(self.rep):
            for j, b in enumerate(other.rep):
                slot = coeffs[i + j]
                for n, x in a.coeffs.items():
                    for m, y in b.coeffs.items():
                        slot[n + m] = slot.get(n + m, 0) + x * y
        return QuotientElement(self.modulus, _reduce(coeffs, self.modulus, tag), tag)

    __rmul__ = __mul__

    def retag(self, mode: str) -> QuotientElement:
        return QuotientElement(self.modulus, [x.retag(mode) for x in self.rep], self.tag.with_mode(mode))

    def to_json(self) -> dict:
        return {
            "tag": self.tag.to_json(),
            "modulus": [str(c) for c in self.modulus],
            "rep": [{str(n): str(c) for n, c in sorted(x.coeffs.items())} for x in self.rep],
        }

    @classmethod
    def from_json(cls, obj) -> QuotientElement:
        tag = RingTag.from_json(obj["tag"])
        modulus = tuple(Fraction(c) for c in obj["modulus"])
        rep = [LaurentElement({int(n): Fraction(c) for n, c in x.items()}, tag) for x in obj["rep"]]
        return cls(modulus, rep, tag)


def _reduce(coeffs: list[dict], modulus: Poly, tag: RingTag) -> list[LaurentElement]:
    # X^d = T - sum_{i<d} alpha_i X^i
    d = len(modulus) - 1
    for k in range(len(coeffs) - 1, d - 1, -1):
        top = coeffs[k]
        if not top:
            continue
        low = coeffs[k - d]
        for n, x in top.items():
            low[n + 1] = low.get(n + 1, 0) + x
        for i in range(d):
            a = modulus[i]
            if a:
                slot = coeffs[k - d + i]
                for n, x in top.items():
                    slot[n] = slot.get(n, 0) - a * x
        coeffs[k] = {}
    return [LaurentElement(c, tag) for c in coeffs[:d]]


def quotient_mul(f: QuotientElement, g: QuotientElement) -> QuotientElement:
    if f.tag.mode != g.tag.mode:
        raise SeriesError("quotient elements live in different rings")
    return f * g


@dataclass(frozen=True)
class OuterQuotientShape:
    """a00 + sum_{i<d} sum_{n>=1} a_{n,i} T^-n X^i."""

    a00: Fraction
    tail: dict
    modulus: Poly
    tag: RingTag

    def norm(self) -> NormValue:
        best = scalar_norm(self.a00, self.tag.p)
        for (n, _), c in self.tail.items():
            v = scalar_norm(c, self.tag.p) / self.tag.r**n
            if v > best:
                best = v
        return best

    def to_element(self) -> QuotientElement:
        d = len(self.modulus) - 1
        rep: list[dict] = [dict() for _ in range(d)]
        if self.a00:
            rep[0][0] = self.a00
        for (n, i), c in self.tail.items():
            rep[i][-n] = c
        tag = self.tag.with_mode(OUTER)
        return QuotientElement(self.modulus, [LaurentElement(x, tag) for x in rep], tag)

    @classmethod
    def from_element(cls, f: QuotientElement) -> OuterQuotientShape:
        a00 = Fraction(0)
        tail = {}
        for i, x in enumerate(f.rep):
            for n, c in x.coeffs.items():
                if n == 0 and i == 0:
                    a00 = c
                elif n <= -1:
                    tail[(-n, i)] = c
                else:
                    raise SeriesError("element does not have the outer shape")
        return cls(a00, tail, f.modulus, f.tag.with_mode(OUTER))


def split_quotient(c: QuotientElement) -> tuple[QuotientElement, OuterQuotientShape]:
    """Coefficientwise split of the representative: n >= 0 to the disc side."""
    discs, outers = zip(*(split_laurent(x) for x in c.rep))
    a = QuotientElement(c.modulus, discs, c.tag.with_mode(DISC))
    b = QuotientElement(c.modulus, outers, c.tag.with_mode(OUTER))
    return a, OuterQuotientShape.from_element(b)


# ---------------------------------------------------------------- series with tails


def _smallest_power(base: NormValue, target: NormValue, scale: NormValue = ONE) -> int:
    """Least N >= 0 with scale * base^N <= target; base < 1 required."""
    if scale <= target:
        return 0
    if base.is_zero:
        return 1
    # exponents: scale.e + N base.e >= target.e
    gap = target.e - scale.e
    n = 1
    while LogExponent(base.e.a * n, base.e.b * n) < gap:
        n *= 2
    lo, hi = n // 2, n
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if LogExponent(base.e.a * mid, base.e.b * mid) < gap:
            lo = mid
        else:
            hi = mid
    return hi


def invert_near_unit(h: LaurentElement, tol: NormValue) -> tuple[LaurentElement, NormValue]:
    """h^-1 = sum b^-1 e^i with b the constant term and e = 1 - h/b, truncated at tol."""
    b = h.coeff(0)
    if b == 0:
        raise SeriesError("the constant term is not a unit")
    one = LaurentElement.const(1, h.tag)
    e = one - h * (1 / b)
    ne = e.norm()
    if not ne < ONE:
        raise SeriesError("|1 - h/b| >= 1: the geometric series diverges")
    binv = scalar_norm(1 / b, h.tag.p)
    n = _smallest_power(ne, tol, max(binv, ONE)) if not ne.is_zero else 1
    acc = LaurentElement.zero(h.tag)
    term = one * (1 / b)
    for _ in range(n):
        acc = acc + term
        term = term * e
    tail = binv * ne**n if not ne.is_zero else ZERO
    return acc, tail


def invert_dominant(h: LaurentElement, tol: NormValue) -> tuple[LaurentElement, NormValue]:
    """Inverse on the circle by factoring out the unique dominant monomial c T^k."""
    k, c = h.dominant()
    mono_inv = LaurentElement.monomial(1 / c, -k, h.tag.with_mode(CIRCLE))
    unit = h.retag(CIRCLE) * mono_inv
    scaled_tol = tol * h.norm()
    inv, tail = invert_near_unit(unit, scaled_tol)
    return inv * mono_inv, tail / h.norm()


def eval_series(coeffs, bound_m, a, tol, p: int):
    """Sum of c_l a^l over multi-indices l, with the tail bounded by (M|a|)^(N+1).

    ``coeffs`` is either a dict of finitely many multi-indices or a callable
    l -> c_l with |c_l| <= M^|l|.  Returns (value, tail bound as a rational).
    """
    bound_m = frac(bound_m)
    a = [frac(x) for x in a]
    if isinstance(coeffs, dict):
        value = Fraction(0)
        for l, c in coeffs.items():
            term = frac(c)
            for x, k in zip(a, l):
                term *= x**k
            value += term
        return value, Fraction(0)
    vals = [valuation(x, p) for x in a if x]
    na = Fraction(p) ** (-min(vals)) if vals else Fraction(0)
    ratio = bound_m * na
    if ratio >= 1:
        raise SeriesError("|a| >= 1/M: the series is not known to converge")

    def small_enough(x: Fraction) -> bool:
        if isinstance(tol, NormValue):
            return compare_rational(tol, x, p) >= 0
        return x <= frac(tol)

    n_terms = 0
    while ratio and not small_enough(ratio ** (n_terms + 1)):
        n_terms += 1
    value = Fraction(0)
    for l in _multi_indices(len(a), n_terms):
        c = frac(coeffs(l))
        if c and Fraction(p) ** (-valuation(c, p)) > bound_m ** sum(l):
            raise SeriesError(f"coefficient at {l} exceeds the bound M^|l|")
        term = c
        for x, kk in zip(a, l):
            term *= x**kk
        value += term
    return value, ratio ** (n_terms + 1)


def _multi_indices(n: int, max_total: int):
    for l in iproduct(range(max_total + 1), repeat=n):
        if sum(l) <= max_total:
            yield l


# ---------------------------------------------------------------- norm comparison


def resultant_poly(modulus: Poly) -> Poly:
    """Res_X(P(X) - T, P'(X)) as a polynomial in T."""
    import sympy

    x, t = sympy.symbols("X T")
    pe = sum(sympy.Rational(c.numerator, c.denominator) * x**i for i, c in enumerate(modulus))
    res = sympy.resultant(pe - t, sympy.diff(pe, x), x)
    coeffs = sympy.Poly(sympy.expand(res), t).all_coeffs()[::-1]
    return ptrim([Fraction(int(c.p), int(c.q)) for c in coeffs])


def circle_poly_norm(q: Poly, r: NormValue, p: int) -> NormValue:
    return eval_gauss_norm(q, GaussPoint(0, r), p)


def resultant_bound(modulus: Poly, r: NormValue, p: int) -> tuple[Poly, Fraction]:
    modulus = ptrim(modulus)
    if len(modulus) - 1 < 2:
        raise SeriesError("the comparison constant is trivial for degree one")
    res = resultant_poly(modulus)
    if not res:
        raise SeriesError("the resultant vanishes identically")
    lo = norm_enclosure(circle_poly_norm(res, r, p), p).lo
    return res, lo / 2


@dataclass(frozen=True)
class NormComparisonConstants:
    d: int
    v1: RationalInterval
    c1: RationalInterval
    s: Fraction
    m: Fraction
    c: RationalInterval

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "v_prime": self.v1.to_json(),
            "C_prime": self.c1.to_json(),
            "s": str(self.s),
            "m": str(self.m),
            "C": self.c.to_json(),
        }


def norm_constants(modulus: Poly, r: NormValue, p: int) -> NormComparisonConstants:
    modulus = ptrim(modulus)
    d = len(modulus) - 1
    one = RationalInterval.point(1)
    if d == 1:
        return NormComparisonConstants(1, one, one, Fraction(1), Fraction(1), one)
    beta = [circle_poly_norm((modulus[0], Fraction(-1)), r, p)]
    beta += [scalar_norm(modulus[i], p) for i in range(1, d)]
    total = sum(norm_enclosure(b, p).hi for b in beta)
    v1 = 1 / (2 * total)
    c1 = max(Fraction(2), 2 / v1**d)
    v2 = max((beta[i].root(d - i) for i in range(1, d)), default=ZERO)
    s = max(v1, norm_enclosure(v2, p).hi)
    _, m = resultant_bound(modulus, r, p)
    factor = max(s ** (-i) for i in range(1, d))
    c = max(Fraction(1), c1 * factor * d * d * (2 * s) ** (d * d - d) / m)
    return NormComparisonConstants(
        d, RationalInterval.point(v1), RationalInterval.point(c1), s, m, RationalInterval.point(c)
    )


def _num_over_power(f: QuotientElement) -> tuple[Poly, int]:
    # f(X) = Num(X) / P(X)^N after substituting T = P(X)
    low = min((n for x in f.rep for n in x.coeffs), default=0)
    big_n = max(0, -low)
    pows: dict[int, Poly] = {}
    num: Poly = ()
    for i, x in enumerate(f.rep):
        for n, c in x.coeffs.items():
            k = n + big_n
            if k not in pows:
                pows[k] = ppow(f.modulus, k)
            num = padd(num, pscale(pmul(pows[k], (Fraction(0),) * i + (Fraction(1),)), c))
    return num, big_n


def fiber_points(roots, mults, r: NormValue, p: int) -> list[GaussPoint]:
    rs = RootSystem.from_roots(roots, mults, p)
    return [GaussPoint(a, fiber_radii(rs, k, r)) for k, a in enumerate(rs.embedding)]


def spectral_norm(f: QuotientElement, roots, mults, r: NormValue) -> NormValue:
    """max over the fibre points eta(alpha, s_alpha) of |f|, computed exactly."""
    p = f.tag.p
    if from_roots(roots, mults) != f.modulus:
        raise SeriesError("the roots do not split the modulus")
    num, big_n = _num_over_power(f)
    best = ZERO
    for eta in fiber_points(roots, mults, r, p):
        if eval_gauss_norm(f.modulus, eta, p) != r:
            raise SeriesError("fibre point off the level set |P| = r")
        v = eval_gauss_norm(num, eta, p) / r**big_n
        if v > best:
            best = v
    return best


def spectral_enclosure(f: QuotientElement, roots, mults, r: NormValue, precision: int = 64) -> RationalInterval:
    return norm_enclosure(spectral_norm(f, roots, mults, r), f.tag.p, precision)
