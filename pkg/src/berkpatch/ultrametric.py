"""Exact p-adic scalars and the value group p^(Q + Q*sqrt2) with a zero adjoined.

Norm values are stored by their exponent: a positive value is p^-(a + b*tau)
with tau = sqrt(2) kept formal.  Order, products, quotients and rational
roots are all decided exactly.  Real enclosures are only produced on request.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath import iv
from mpmath.libmp import to_rational

__all__ = [
    "PrimeContext",
    "PScalar",
    "LogExponent",
    "NormValue",
    "RationalInterval",
    "ZERO",
    "ONE",
    "valuation",
    "scalar_norm",
    "log_compare",
    "in_sqrt_value_group",
    "norm_enclosure",
    "compare_rational",
    "pnorm",
    "frac",
]


def frac(x) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact scalars")
    if isinstance(x, PScalar):
        return x.value
    return Fraction(x)


@dataclass(frozen=True)
class PrimeContext:
    p: int

    def __post_init__(self):
        p = self.p
        if not isinstance(p, int) or p < 2 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p!r} is not a prime")


def valuation(x, p: int) -> int | None:
    """p-adic valuation of a rational; None for zero."""
    x = frac(x)
    if x == 0:
        return None
    return _int_valuation(x.numerator, p) - _int_valuation(x.denominator, p)


def _int_valuation(n: int, p: int) -> int:
    # strip p^(2^k) blocks, largest first; linear division is slow on big heights
    if n % p:
        return 0
    powers = [(p, 1)]
    while n % (powers[-1][0] ** 2) == 0:
        q, k = powers[-1]
        powers.append((q * q, 2 * k))
    v = 0
    for q, k in reversed(powers):
        while n % q == 0:
            n //= q
            v += k
    return v


def _sign_sqrt2(da: Fraction, db: Fraction) -> int:
    # sign of da + db*sqrt(2)
    if db == 0:
        return (da > 0) - (da < 0)
    if da == 0:
        return 1 if db > 0 else -1
    if (da > 0) == (db > 0):
        return 1 if da > 0 else -1
    lhs = da * da
    rhs = 2 * db * db
    if da > 0:
        return (lhs > rhs) - (lhs < rhs)
    return (rhs > lhs) - (rhs < lhs)


class LogExponent:
    """The real number a + b*sqrt(2) with a, b rational."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = frac(a)
        self.b = frac(b)

    def __repr__(self):
        return f"LogExponent({self.a}, {self.b})"

    def __eq__(self, other):
        return isinstance(other, LogExponent) and self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def cmp(self, other: LogExponent) -> int:
        return _sign_sqrt2(self.a - other.a, self.b - other.b)

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __add__(self, other):
        return LogExponent(self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        return LogExponent(self.a - other.a, self.b - other.b)

    def __neg__(self):
        return LogExponent(-self.a, -self.b)

    def scale(self, q) -> LogExponent:
        q = frac(q)
        return LogExponent(self.a * q, self.b * q)

    def sign(self) -> int:
        return _sign_sqrt2(self.a, self.b)

    def approx(self) -> float:
        return float(self.a) + float(self.b) * 2**0.5


def log_compare(e1: LogExponent, e2: LogExponent) -> int:
    """-1, 0 or 1 according to the sign of e1 - e2 as real numbers."""
    return e1.cmp(e2)


class NormValue:
    """Either zero or p^-(exponent).  Larger exponent means smaller value."""

    __slots__ = ("e",)

    def __init__(self, e: LogExponent | None):
        self.e = e

    @property
    def is_zero(self) -> bool:
        return self.e is None

    def __repr__(self):
        if self.e is None:
            return "NormValue(0)"
        return f"NormValue(p^-({self.e.a} + {self.e.b}*tau))"

    def __str__(self):
        if self.e is None:
            return "0"
        a, b = self.e.a, self.e.b
        tau = "tau" if abs(b) == 1 else f"{abs(b)}*tau"
        if b == 0:
            return f"p^{-a}"
        if a == 0:
            return f"p^({'-' if b > 0 else ''}{tau})"
        return f"p^({-a} {'-' if b > 0 else '+'} {tau})"

    def __eq__(self, other):
        return isinstance(other, NormValue) and self.e == other.e

    def __hash__(self):
        return hash(self.e)

    def cmp(self, other: NormValue) -> int:
        if self.e is None:
            return 0 if other.e is None else -1
        if other.e is None:
            return 1
        return other.e.cmp(self.e)

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __mul__(self, other):
        if self.e is None or other.e is None:
            return ZERO
        return NormValue(self.e + other.e)

    def __truediv__(self, other):
        if other.e is None:
            raise ZeroDivisionError("division by the zero norm")
        if self.e is None:
            return ZERO
        return NormValue(self.e - other.e)

    def __pow__(self, k):
        k = frac(k)
        if self.e is None:
            if k <= 0:
                raise ZeroDivisionError("non-positive power of the zero norm")
            return ZERO
        return NormValue(self.e.scale(k))

    def root(self, d: int) -> NormValue:
        return self ** Fraction(1, d)

    @property
    def is_type3(self) -> bool:
        return self.e is not None and self.e.b != 0

    def to_json(self) -> dict:
        if self.e is None:
            return {"kind": "zero"}
        return {"kind": "pos", "a": str(self.e.a), "b": str(self.e.b)}

    @classmethod
    def from_json(cls, obj) -> NormValue:
        if not isinstance(obj, dict) or obj.get("kind") not in ("zero", "pos"):
            raise ValueError(f"malformed norm value: {obj!r}")
        if obj["kind"] == "zero":
            return ZERO
        return pnorm(Fraction(obj["a"]), Fraction(obj["b"]))


def pnorm(a=0, b=0) -> NormValue:
    """The norm value p^-(a + b*tau)."""
    return NormValue(LogExponent(a, b))


ZERO = NormValue(None)
ONE = pnorm(0, 0)


@dataclass(frozen=True)
class PScalar:
    value: Fraction
    context: PrimeContext

    def __post_init__(self):
        object.__setattr__(self, "value", frac(self.value))

    def norm(self) -> NormValue:
        return scalar_norm(self.value, self.context.p)


def scalar_norm(x, p: int) -> NormValue:
    v = valuation(x, p)
    if v is None:
        return ZERO
    return NormValue(LogExponent(v, 0))


def in_sqrt_value_group(n: NormValue) -> bool:
    if n.is_zero:
        raise ValueError("the zero norm has no exponent")
    return n.e.b == 0


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", frac(self.lo))
        object.__setattr__(self, "hi", frac(self.hi))
        if self.lo > self.hi:
            raise ValueError("empty interval")

    @classmethod
    def point(cls, x) -> RationalInterval:
        return cls(x, x)

    def __contains__(self, x):
        return self.lo <= frac(x) <= self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __add__(self, other):
        other = _as_interval(other)
        return RationalInterval(self.lo + other.lo, self.hi + other.hi)

    def __mul__(self, other):
        other = _as_interval(other)
        prods = [x * y for x in (self.lo, self.hi) for y in (other.lo, other.hi)]
        return RationalInterval(min(prods), max(prods))

    __rmul__ = __mul__
    __radd__ = __add__

    def __truediv__(self, other):
        other = _as_interval(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        return self * RationalInterval(1 / other.hi, 1 / other.lo)

    def to_json(self) -> dict:
        return {"lo": str(self.lo), "hi": str(self.hi)}


def _as_interval(x) -> RationalInterval:
    return x if isinstance(x, RationalInterval) else RationalInterval.point(x)


def norm_enclosure(n: NormValue, p: int, precision: int = 64) -> RationalInterval:
    """Rational interval around the real value of n, relative width <= 2^-precision."""
    if n.is_zero:
        return RationalInterval.point(0)
    a, b = n.e.a, n.e.b
    if b == 0 and a.denominator == 1:
        return RationalInterval.point(Fraction(p) ** (-a.numerator))
    saved = iv.prec
    work = precision + 24
    try:
        while True:
            iv.prec = work
            x = iv.mpf(a.numerator) / a.denominator
            if b:
                x = x + (iv.mpf(b.numerator) / b.denominator) * iv.sqrt(2)
            val = iv.exp(-x * iv.log(p))
            lo, hi = (Fraction(*to_rational(end)) for end in val._mpi_)
            if lo > 0 and (hi - lo) <= lo / 2**precision:
                return RationalInterval(lo, hi)
            work *= 2
    finally:
        iv.prec = saved


def compare_rational(n: NormValue, q, p: int) -> int:
    """Sign of (real value of n) - q, decided exactly."""
    q = frac(q)
    if n.is_zero:
        return -1 if q > 0 else (0 if q == 0 else 1)
    if q <= 0:
        return 1
    a, b = n.e.a, n.e.b
    if b == 0:
        # p^(-num/den) against q  <=>  p^(-num) against q^den
        lhs = Fraction(p) ** (-a.numerator)
        rhs = q ** a.denominator
        return (lhs > rhs) - (lhs < rhs)
    # p^-(a+b*sqrt2) is transcendental, so it never equals q; refine until separated
    precision = 32
    while True:
        box = norm_enclosure(n, p, precision)
        if box.hi < q:
            return -1
        if box.lo > q:
            return 1
        precision *= 2
