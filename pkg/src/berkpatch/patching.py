"""Certified factorization g = g1 * g2 of matrices near the identity.

The rings come in triples: a circle ring R0 and the disc and outer rings A1,
A2 that split it.  With the chart phi(g) = g - I on GL_n the multiplication
becomes f(u, v) = u + v + uv, and the iteration

    e_s = a - f(u_s, v_s),   (alpha, beta) = split(e_s),
    u_{s+1} = u_s + alpha,   v_{s+1} = v_s + beta

is run until |e_s| drops below the tolerance.  Each step is checked against
three bounds in eps' = eps / d:

    (1) |u_s|, |v_s| <= eps'
    (2) |u_s - u_{s-1}|, |v_s - v_{s-1}| <= eps'^((s+1)/2)
    (3) |e_s| <= d * eps'^((s+2)/2)
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .series import (
    CIRCLE,
    DISC,
    OUTER,
    LaurentElement,
    QuotientElement,
    RingTag,
    SeriesError,
    padic_round,
    split_laurent,
    split_quotient,
)
from .ultrametric import ONE, ZERO, NormValue, compare_rational, frac, norm_enclosure, scalar_norm


class PatchingError(ValueError):
    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


# ---------------------------------------------------------------- matrices


def mat_norm(m) -> NormValue:
    return max((x.norm() for row in m for x in row), default=ZERO)


def mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for t in range(1, k):
                acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def transpose(a):
    return tuple(zip(*a))


def mat_equal(a, b) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


# ---------------------------------------------------------------- triples


@dataclass(frozen=True)
class BanachTriple:
    """Circle ring with its disc/outer splitting; modulus None means plain Laurent rings."""

    tag: RingTag
    modulus: tuple | None = None
    d: Fraction = Fraction(1, 2)
    splitter: object = None

    @property
    def p(self) -> int:
        return self.tag.p

    def const(self, c, mode: str = CIRCLE):
        tag = self.tag.with_mode(mode)
        if self.modulus is None:
            return LaurentElement.const(c, tag)
        return QuotientElement.const(c, self.modulus, tag)

    def split(self, c):
        if self.splitter is not None:
            return self.splitter(c)
        if self.modulus is None:
            return split_laurent(c)
        a, shape = split_quotient(c)
        return a, shape.to_element()

    def identity(self, n: int, mode: str = CIRCLE):
        return tuple(tuple(self.const(1 if i == j else 0, mode) for j in range(n)) for i in range(n))

    def zeros(self, n: int, mode: str):
        return tuple(tuple(self.const(0, mode) for _ in range(n)) for _ in range(n))

    def random_element(self, rng: random.Random, span: int = 3, terms: int = 4):
        if self.modulus is None:
            return random_laurent(rng, self.tag, -span, span, terms)
        d = len(self.modulus) - 1
        rep = [random_laurent(rng, self.tag, -span, span, terms) for _ in range(d)]
        return QuotientElement(self.modulus, rep, self.tag)


def random_rational(rng: random.Random, p: int, vmin: int = -2, vmax: int = 3) -> Fraction:
    """A random nonzero rational with p-adic valuation in [vmin, vmax]."""
    v = rng.randint(vmin, vmax)
    num = rng.randint(1, 4 * p)
    while num % p == 0:
        num = rng.randint(1, 4 * p)
    den = rng.randint(1, 3 * p)
    while den % p == 0:
        den = rng.randint(1, 3 * p)
    x = Fraction(num * rng.choice((1, -1)), den)
    return x * Fraction(p) ** v


def random_laurent(rng, tag: RingTag, lo: int, hi: int, terms: int, vmin=-2, vmax=3) -> LaurentElement:
    if tag.mode == DISC:
        lo = max(lo, 0)
    elif tag.mode == OUTER:
        hi = min(hi, 0)
    coeffs = {}
    for _ in range(rng.randint(0, terms)):
        coeffs[rng.randint(lo, hi)] = random_rational(rng, tag.p, vmin, vmax)
    return LaurentElement(coeffs, tag)


def _ratio_at_least(x: NormValue, y: NormValue, q: Fraction, p: int) -> bool:
    """x >= q * y for norm values and a positive rational q."""
    if y.is_zero:
        return True
    if x.is_zero:
        return False
    return compare_rational(x / y, q, p) >= 0


@dataclass
class SettingReport:
    passed: bool
    worst_ratio: NormValue
    checked: int
    witness: dict | None = None

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "worst_ratio": self.worst_ratio.to_json(),
            "checked": self.checked,
            "witness": self.witness,
        }


def check_setting(triple: BanachTriple, samples: int = 100, seed: int = 0) -> SettingReport:
    """Sample elements and check linearity, the embeddings and the split inequality."""
    rng = random.Random(seed)
    p = triple.p
    worst = ZERO
    for k in range(samples):
        c = triple.random_element(rng)
        lam = random_rational(rng, p)
        if (c * lam).norm() != scalar_norm(lam, p) * c.norm():
            return SettingReport(False, worst, k, {"kind": "linearity", "element": c.to_json()})
        a, b = triple.split(c)
        if a.retag(CIRCLE).norm() != a.norm() or b.retag(CIRCLE).norm() != b.norm():
            return SettingReport(False, worst, k, {"kind": "embedding", "element": c.to_json()})
        if not (a + b) == c:
            return SettingReport(False, worst, k, {"kind": "sum", "element": c.to_json()})
        big = max(a.norm(), b.norm())
        if not _ratio_at_least(c.norm(), big, triple.d, p):
            return SettingReport(False, worst, k, {"kind": "split-bound", "element": c.to_json()})
        if not c.is_zero():
            worst = max(worst, big / c.norm())
    return SettingReport(True, worst if samples else ONE, samples)


# ---------------------------------------------------------------- charts


@dataclass(frozen=True)
class GroupChart:
    """Polynomial chart f: each coordinate maps exponent tuples over (S, T) to coefficients."""

    n: int
    coords: tuple
    M: Fraction = Fraction(1)
    delta: Fraction = Fraction(1)

    @classmethod
    def gl(cls, n: int) -> GroupChart:
        size = n * n
        coords = []
        for i in range(n):
            for j in range(n):
                terms = {}
                terms[_unit(2 * size, i * n + j)] = Fraction(1)
                terms[_unit(2 * size, size + i * n + j)] = Fraction(1)
                for k in range(n):
                    e = [0] * (2 * size)
                    e[i * n + k] += 1
                    e[size + k * n + j] += 1
                    terms[tuple(e)] = Fraction(1)
                coords.append(terms)
        return cls(n, tuple(coords))

    @property
    def size(self) -> int:
        return len(self.coords)

    def apply(self, u, v, one):
        """f(u, v) for n x n matrices u, v; ``one`` is the unit of the target ring."""
        flat = [x for row in u for x in row] + [x for row in v for x in row]
        out = []
        for terms in self.coords:
            acc = one * 0
            for e, c in terms.items():
                term = one * c
                for idx, k in enumerate(e):
                    for _ in range(k):
                        term = term * flat[idx]
                acc = acc + term
            out.append(acc)
        side = int(round(len(out) ** 0.5))
        return tuple(tuple(out[i * side : (i + 1) * side]) for i in range(side))


def _unit(length: int, k: int) -> tuple:
    e = [0] * length
    e[k] = 1
    return tuple(e)


@dataclass(frozen=True)
class ChartExpansion:
    n: int
    M: Fraction
    terms: int
    max_degree: int

    def to_json(self) -> dict:
        return {"n": self.n, "M": str(self.M), "terms": self.terms, "max_degree": self.max_degree}


def expand_chart(chart: GroupChart, p: int) -> ChartExpansion:
    """Check the chart starts with S_i + T_i and that |c| <= M^deg for every coefficient."""
    size = chart.size
    if chart.n * chart.n != size:
        raise PatchingError("the chart has the wrong number of coordinates")
    total, top = 0, 0
    for i, terms in enumerate(chart.coords):
        linear = {e: c for e, c in terms.items() if sum(e) == 1}
        if any(sum(e) == 0 and c for e, c in terms.items()):
            raise PatchingError(f"coordinate {i} has a constant term")
        want = {_unit(2 * size, i): Fraction(1), _unit(2 * size, size + i): Fraction(1)}
        if {e: c for e, c in linear.items() if c} != want:
            raise PatchingError(f"coordinate {i} does not start with S_{i} + T_{i}")
        for e, c in terms.items():
            deg = sum(e)
            if c and compare_rational(scalar_norm(c, p), chart.M**deg, p) > 0:
                raise PatchingError(f"coefficient of {e} exceeds M^{deg}")
            top = max(top, deg)
        total += len(terms)
    return ChartExpansion(chart.n, chart.M, total, top)


def compute_epsilon(d, M, delta, p: int = 5) -> Fraction:
    """min(d / 2M, d^3 / M^4, d delta / 2); admissible eps must lie strictly below it."""
    d, M = frac(d), frac(M)
    if isinstance(delta, NormValue):
        if delta.is_zero or delta.e.b != 0 or delta.e.a.denominator != 1:
            raise PatchingError("delta must be a rational norm value")
        delta = norm_enclosure(delta, p).lo
    delta = frac(delta)
    if not (0 < d <= 1 and M >= 1 and delta > 0):
        raise PatchingError("need 0 < d <= 1, M >= 1 and delta > 0")
    return min(d / (2 * M), d**3 / M**4, d * delta / 2)


# ---------------------------------------------------------------- certificates


@dataclass
class StepRecord:
    step: int
    norm_u: NormValue
    norm_v: NormValue
    norm_du: NormValue | None
    norm_dv: NormValue | None
    residual: NormValue
    cond1: bool
    cond2: bool
    cond3: bool

    def to_json(self) -> dict:
        nv = lambda x: None if x is None else x.to_json()  # noqa: E731
        return {
            "step": self.step,
            "norm_u": nv(self.norm_u),
            "norm_v": nv(self.norm_v),
            "norm_du": nv(self.norm_du),
            "norm_dv": nv(self.norm_dv),
            "residual": nv(self.residual),
            "cond1": self.cond1,
            "cond2": self.cond2,
            "cond3": self.cond3,
        }


@dataclass
class PatchingCertificate:
    eps: Fraction
    eps_prime: Fraction
    d: Fraction
    threshold: Fraction
    steps: list = field(default_factory=list)
    converged: bool = False

    @property
    def final_residual(self) -> NormValue:
        return self.steps[-1].residual if self.steps else ZERO

    @property
    def iterations(self) -> int:
        return len(self.steps) - 1 if self.steps else 0

    @property
    def ok(self) -> bool:
        return self.converged and all(s.cond1 and s.cond2 and s.cond3 for s in self.steps)

    def to_json(self) -> dict:
        return {
            "eps": str(self.eps),
            "eps_prime": str(self.eps_prime),
            "d": str(self.d),
            "threshold": str(self.threshold),
            "converged": self.converged,
            "iterations": self.iterations,
            "final_residual": self.final_residual.to_json(),
            "steps": [s.to_json() for s in self.steps],
        }


def _below_power(x: NormValue, scale: Fraction, base: Fraction, half_power: int, p: int) -> bool:
    """x <= scale * base^(half_power / 2), decided on squares."""
    if x.is_zero:
        return True
    return compare_rational(x**2, scale * scale * base**half_power, p) <= 0


def default_eps(na: NormValue, threshold: Fraction, p: int) -> Fraction:
    if na.is_zero:
        return threshold / 2
    return norm_enclosure(na, p, 32).hi


def factor_near_identity(
    triple: BanachTriple, chart: GroupChart, a, tol: NormValue, eps=None, max_iter: int = 80, prune: NormValue | None = None
):
    """Solve (I + u)(I + v) = I + a with u over the disc ring and v over the outer ring.

    With ``prune`` set, increments are rounded p-adically (see padic_round)
    before they enter the iterates, which keeps rational heights bounded.  Residuals are still computed exactly from the
    iterates actually kept, so the certificate remains valid; the residual can
    then not fall below prune, so prune should not exceed tol.
    """
    n = chart.n
    if len(a) != n or any(len(row) != n for row in a):
        raise PatchingError("target matrix does not match the chart size")
    p = triple.p
    d = frac(triple.d)
    threshold = compute_epsilon(d, chart.M, chart.delta, triple.p)
    na = mat_norm(a)
    eps = default_eps(na, threshold, p) if eps is None else frac(eps)
    cert = PatchingCertificate(eps, eps / d, d, threshold)
    if not eps < threshold:
        raise PatchingError(f"eps = {eps} is not below the threshold {threshold}", cert)
    if compare_rational(na, eps, p) > 0:
        raise PatchingError("|a| exceeds eps", cert)
    ep = eps / d
    one = triple.const(1)
    u = triple.zeros(n, DISC)
    v = triple.zeros(n, OUTER)
    du = dv = None
    for s in range(max_iter + 1):
        e = mat_sub(a, chart.apply(u, v, one))
        ne = mat_norm(e)
        nu, nv = mat_norm(u), mat_norm(v)
        c1 = _below_power(nu, Fraction(1), ep, 2, p) and _below_power(nv, Fraction(1), ep, 2, p)
        c2 = s == 0 or (
            _below_power(mat_norm(du), Fraction(1), ep, s + 1, p)
            and _below_power(mat_norm(dv), Fraction(1), ep, s + 1, p)
        )
        c3 = _below_power(ne, d, ep, s + 2, p)
        cert.steps.append(
            StepRecord(s, nu, nv, None if du is None else mat_norm(du), None if dv is None else mat_norm(dv), ne, c1, c2, c3)
        )
        if not (c1 and c2 and c3):
            raise PatchingError(f"certificate condition failed at step {s}", cert)
        if ne <= tol:
            cert.converged = True
            return u, v, cert
        parts = [[triple.split(x) for x in row] for row in e]
        du = tuple(tuple(_prune(pa, prune) for pa, _ in row) for row in parts)
        dv = tuple(tuple(_prune(pb, prune) for _, pb in row) for row in parts)
        u = mat_add(u, du)
        v = mat_add(v, dv)
    raise PatchingError(f"no convergence within {max_iter} iterations", cert)


def _prune(x, prune):
    if prune is None or not isinstance(x, LaurentElement):
        return x
    return padic_round(x, prune)


def factor_near_identity_swapped(triple, chart, a, tol, eps=None, max_iter: int = 80, prune=None):
    """Solve I + a = (I + v)(I + u) with v outer and u disc, by factoring the transpose."""
    ut, vt, cert = factor_near_identity(triple, chart, transpose(a), tol, eps, max_iter, prune)
    return transpose(vt), transpose(ut), cert


def verify_factorization(g, g1, g2, tol: NormValue) -> tuple[bool, NormValue]:
    res = mat_norm(mat_sub(g, mat_mul(g1, g2)))
    return res <= tol, res


def _dominant_diagonal(triple, g):
    n = len(g)
    h, hinv = [], []
    for i in range(n):
        x = g[i][i]
        if not isinstance(x, LaurentElement) or x.is_zero():
            return None
        try:
            k, c = x.dominant()
        except SeriesError:
            return None
        h.append(LaurentElement.monomial(c, k, triple.tag))
        hinv.append(LaurentElement.monomial(1 / c, -k, triple.tag))
    zero = triple.const(0)
    diag = lambda xs: tuple(tuple(xs[i] if i == j else zero for j in range(n)) for i in range(n))  # noqa: E731
    return diag(h), diag(hinv)


def factor_general(triple, chart, g, tol: NormValue, h=None, max_iter: int = 80):
    """g = g1 * g2 with g1 = h (I + u) and g2 = I + v.

    h defaults to the diagonal of dominant monomials of g.  If h^-1 g is not
    close enough to I, the degenerate answer g1 = g, g2 = I is returned; it is
    valid because every Laurent polynomial is a quotient of disc elements.
    Returns (g1, g2, certificate, h).
    """
    n = len(g)
    ident = triple.identity(n)
    threshold = compute_epsilon(triple.d, chart.M, chart.delta, triple.p)
    if h is None:
        pair = _dominant_diagonal(triple, g) or (ident, ident)
    else:
        pair = h
    hh, hinv = pair
    a = mat_sub(mat_mul(hinv, g), ident)
    if compare_rational(mat_norm(a), threshold, triple.p) >= 0:
        if h is not None:
            raise PatchingError("h^-1 g is not close enough to the identity")
        cert = PatchingCertificate(Fraction(0), Fraction(0), frac(triple.d), threshold, converged=True)
        return g, ident, cert, ident
    u, v, cert = factor_near_identity(triple, chart, a, tol, max_iter=max_iter)
    g1 = mat_mul(hh, mat_add(ident, u))
    g2 = mat_add(ident, v)
    return g1, g2, cert, hh
