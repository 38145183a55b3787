"""Dense univariate polynomials over Q as tuples of Fractions, lowest degree first."""
from __future__ import annotations

from fractions import Fraction

from .ultrametric import frac

Poly = tuple


def ptrim(c) -> Poly:
    c = [frac(x) for x in c]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def pdeg(a: Poly) -> int:
    return len(a) - 1


def padd(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return ptrim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def pneg(a: Poly) -> Poly:
    return tuple(-x for x in a)


def psub(a: Poly, b: Poly) -> Poly:
    return padd(a, pneg(b))


def pscale(a: Poly, q) -> Poly:
    q = frac(q)
    return ptrim([x * q for x in a])


def pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return ptrim(out)


def ppow(a: Poly, k: int) -> Poly:
    out: Poly = (Fraction(1),)
    for _ in range(k):
        out = pmul(out, a)
    return out


def peval(a: Poly, x):
    x = frac(x)
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def pshift(a: Poly, c) -> Poly:
    """Coefficients of a(T + c)."""
    c = frac(c)
    lin = (c, Fraction(1)) if c else (Fraction(0), Fraction(1))
    acc: Poly = ()
    for coef in reversed(a):
        acc = padd(pmul(acc, lin), (coef,))
    return acc


def pderiv(a: Poly) -> Poly:
    return ptrim([i * a[i] for i in range(1, len(a))])


def from_roots(roots, mults=None) -> Poly:
    out: Poly = (Fraction(1),)
    mults = mults or [1] * len(roots)
    for r, m in zip(roots, mults):
        out = pmul(out, ppow((-frac(r), Fraction(1)), m))
    return out


def pdivmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    for i in range(len(a) - len(b), -1, -1):
        coef = rem[i + len(b) - 1] / lead
        q[i] = coef
        if coef:
            for j, y in enumerate(b):
                rem[i + j] -= coef * y
    return ptrim(q), ptrim(rem[: len(b) - 1])


def pfmt(a: Poly, var: str = "T") -> str:
    terms = []
    for i, c in enumerate(a):
        if c == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if mono and c == 1:
            terms.append(mono)
        elif mono and c == -1:
            terms.append("-" + mono)
        else:
            terms.append(f"{c}{'*' + mono if mono else ''}")
    if not terms:
        return "0"
    out = ""
    for t in reversed(terms):
        if not out:
            out = t
        elif t.startswith("-"):
            out += " - " + t[1:]
        else:
            out += " + " + t
    return out
