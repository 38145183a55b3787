import math
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from berkpatch.geometry import (
    EQ,
    GE,
    INFINITY,
    LE,
    AffinoidDomain,
    Constraint,
    GaussPoint,
    GeometryError,
    NiceCover,
    RootSystem,
    build_nice_cover,
    check_constraint_poly,
    newton_slopes,
    canonical_form,
    canonicalize,
    classify_point,
    cover_to_dot,
    domain_intersect,
    domain_side,
    domain_union,
    eval_gauss_norm,
    fiber_radius_solve,
    is_empty,
    level_at,
    nice_cover_check,
    parity_coloring,
    two_coloring,
)
from berkpatch.ultrametric import ONE, ZERO, pnorm, scalar_norm

P = 5
TAU = pnorm(0, 1)
TSYM = sympy.Symbol("T")


def disc(c, r):
    return AffinoidDomain((Constraint.linear(c, LE, r),), "yes")


def outside(c, r):
    return AffinoidDomain((Constraint.linear(c, GE, r),), "yes")


def shifted_norm(poly, pt):
    """Gauss norm from the Taylor coefficients at the centre, expanded by sympy."""
    q = sum(sympy.Rational(c.numerator, c.denominator) * TSYM**i for i, c in enumerate(poly))
    shifted = sympy.Poly(sympy.expand(q.subs(TSYM, TSYM + sympy.Rational(pt.center.numerator, pt.center.denominator))), TSYM)
    best = ZERO
    for (i,), c in shifted.terms():
        v = scalar_norm(Fraction(int(c.p), int(c.q)), P) * pt.radius**i if i else scalar_norm(Fraction(int(c.p), int(c.q)), P)
        best = max(best, v)
    return best


# ---------------------------------------------------------------- points and norms


def test_gauss_norm_examples():
    assert eval_gauss_norm((0, 1), GaussPoint(0, TAU), P) == TAU
    assert eval_gauss_norm((5, 0, 1), GaussPoint(0, ONE), P) == ONE
    assert eval_gauss_norm((0, 1), GaussPoint(5, pnorm(2)), P) == pnorm(1)


def test_classification():
    assert classify_point(GaussPoint(3)) == 1
    assert classify_point(GaussPoint(0, pnorm(Fraction(1, 2)))) == 2
    assert classify_point(GaussPoint(0, TAU)) == 3


polys = st.lists(st.fractions(max_denominator=30, min_value=-200, max_value=200), min_size=1, max_size=5).filter(
    lambda c: any(c)
)
centers = st.fractions(max_denominator=25, min_value=-10, max_value=10)
radii = st.builds(pnorm, st.integers(-3, 3), st.integers(0, 2))


@given(polys, centers, radii)
@settings(max_examples=60, deadline=None)
def test_gauss_norm_matches_taylor_expansion(poly, c, r):
    pt = GaussPoint(c, r)
    assert eval_gauss_norm(tuple(Fraction(x) for x in poly), pt, P) == shifted_norm(poly, pt)


@given(polys, centers)
@settings(max_examples=60, deadline=None)
def test_type1_norm_is_value(poly, c):
    val = sum(Fraction(x) * c**i for i, x in enumerate(poly))
    assert eval_gauss_norm(tuple(Fraction(x) for x in poly), GaussPoint(c), P) == scalar_norm(val, P)


@given(polys, polys, centers, radii)
@settings(max_examples=40, deadline=None)
def test_gauss_norm_is_multiplicative(f, g, c, r):
    from berkpatch.poly import pmul

    pt = GaussPoint(c, r)
    f, g = tuple(map(Fraction, f)), tuple(map(Fraction, g))
    assert eval_gauss_norm(pmul(f, g), pt, P) == eval_gauss_norm(f, pt, P) * eval_gauss_norm(g, pt, P)


# ---------------------------------------------------------------- fibre radii


def float_fiber_radius(rs, alpha, r):
    """Bisection on log s for s^m prod max(s, d) = r, in floating point."""
    target = -(float(r.e.a) + float(r.e.b) * math.sqrt(2))
    logs = [None if d.is_zero else -(float(d.e.a) + float(d.e.b) * math.sqrt(2)) for d in rs.dist[alpha]]

    def level(x):
        total = rs.mult[alpha] * x
        for j, mu in enumerate(rs.mult):
            if j != alpha:
                total += mu * max(x, logs[j])
        return total

    lo, hi = -200.0, 200.0
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if level(mid) < target else (lo, mid)
    return lo


def test_fiber_radius_examples():
    rs = RootSystem.from_roots([0, 5], [1, 1], P)
    assert fiber_radius_solve(rs, 0, ONE) == (ONE, 1)
    assert fiber_radius_solve(rs, 0, pnorm(3))[0] == pnorm(2)
    single = RootSystem.from_roots([0], [2], P)
    assert fiber_radius_solve(single, 0, pnorm(0, 2))[0] == TAU


@given(
    st.lists(st.fractions(max_denominator=5, min_value=-30, max_value=30), min_size=1, max_size=5, unique=True),
    st.lists(st.integers(1, 3), min_size=5, max_size=5),
    st.builds(pnorm, st.integers(-4, 6), st.integers(-2, 3)),
)
@settings(max_examples=80, deadline=None)
def test_fiber_radius_identity_and_float_oracle(roots, mults, r):
    rs = RootSystem.from_roots(roots, mults[: len(roots)], P)
    for a in range(len(roots)):
        s, _ = fiber_radius_solve(rs, a, r)
        assert level_at(rs, a, s) == r
        approx = -(float(s.e.a) + float(s.e.b) * math.sqrt(2))
        assert abs(approx - float_fiber_radius(rs, a, r)) < 1e-6


@given(st.lists(st.fractions(max_denominator=25, min_value=-5, max_value=5), min_size=1, max_size=6, unique=True))
def test_root_distances_are_ultrametric(roots):
    rs = RootSystem.from_roots(roots, [1] * len(roots), P)
    n = len(roots)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert rs.dist[i][k] <= max(rs.dist[i][j], rs.dist[j][k])


def test_root_system_rejects_bad_matrices():
    with pytest.raises(GeometryError):
        RootSystem((1, 1, 1), ((ZERO, ONE, pnorm(2)), (ONE, ZERO, pnorm(1)), (pnorm(2), pnorm(1), ZERO)))


# ---------------------------------------------------------------- domains


def test_domain_side_examples():
    eta = GaussPoint(0, TAU)
    assert domain_side(disc(0, TAU), eta, P) == LE
    assert domain_side(outside(0, TAU), eta, P) == GE
    ann = AffinoidDomain((Constraint.linear(0, GE, pnorm(0, 2)), Constraint.linear(0, LE, TAU)), "yes")
    assert domain_side(ann, GaussPoint(0, pnorm(0, 2)), P) == GE


def test_union_examples():
    r, r2 = TAU, pnorm(-1, 1)
    assert domain_union(disc(0, r), outside(0, r), P).constraints == ()
    ann = AffinoidDomain((Constraint.linear(0, GE, r), Constraint.linear(0, LE, r2)), "yes")
    assert domain_union(disc(0, r), ann, P).constraints == (Constraint.linear(0, LE, r2),)
    # a disc with a hole glued to the outside of a larger circle
    rho = pnorm(1, 1)
    hole = Constraint.linear(5, GE, rho)
    u = AffinoidDomain((Constraint.linear(0, LE, r2), hole), "yes")
    assert domain_union(u, outside(0, r2), P).constraints == (hole,)
    # a hole outside the disc is redundant, so the union is everything
    far = AffinoidDomain((Constraint.linear(0, LE, r2), Constraint.linear(1, GE, rho)), "yes")
    assert domain_union(far, outside(0, r2), P).constraints == ()


def test_union_needs_type3_boundary():
    with pytest.raises(GeometryError):
        domain_union(disc(0, pnorm(-1)), outside(0, pnorm(-1)), P)


def test_intersection_examples():
    r1, r2 = pnorm(0, 2), TAU
    assert domain_intersect(disc(0, TAU), outside(0, TAU), P).constraints == (Constraint.linear(0, EQ, TAU),)
    ann = domain_intersect(disc(0, r2), outside(0, r1), P)
    assert set(ann.constraints) == {Constraint.linear(0, GE, r1), Constraint.linear(0, LE, r2)}
    assert domain_intersect(disc(0, pnorm(2, 1)), disc(1, pnorm(2, 1)), P).empty


def test_canonical_form_examples():
    r1, r2 = pnorm(0, 2), TAU
    mid = GaussPoint(0, (r1 * r2).root(2))
    out = canonical_form([GaussPoint(0, r1), GaussPoint(0, r2)], mid, P)
    assert set(out.constraints) == {Constraint.linear(0, GE, r1), Constraint.linear(0, LE, r2)}
    assert canonical_form([GaussPoint(0, r2)], GaussPoint(0, r2 * pnorm(1)), P).constraints == (
        Constraint.linear(0, LE, r2),
    )
    assert canonical_form([GaussPoint(0, r2)], INFINITY, P).constraints == (Constraint.linear(0, GE, r2),)


def random_point(rng):
    if rng.random() < 0.05:
        return INFINITY
    c = Fraction(rng.randint(-30, 30), rng.choice([1, 1, 5, 25]))
    kind = rng.random()
    if kind < 0.2:
        return GaussPoint(c)
    return GaussPoint(c, pnorm(rng.randint(-3, 3), rng.randint(-2, 2)))


def test_domain_operations_against_sampling():
    rng = random.Random(7)
    cloud = [random_point(rng) for _ in range(1000)]
    r = pnorm(0, 1)
    u = AffinoidDomain((Constraint.linear(0, LE, pnorm(-2, 1)), Constraint.linear(1, GE, r)), "yes")
    v = AffinoidDomain((Constraint.linear(Fraction(1, 5), LE, pnorm(-1, 1)),), "yes")
    both = domain_intersect(u, v, P)
    for x in cloud:
        assert both.contains(x, P) == (u.contains(x, P) and v.contains(x, P))
    canon = canonicalize(u, P)
    for x in cloud:
        assert canon.contains(x, P) == u.contains(x, P)
    w = outside(0, pnorm(-2, 1))
    glued = domain_union(u, w, P)
    for x in cloud:
        assert glued.contains(x, P) == (u.contains(x, P) or w.contains(x, P))


def test_emptiness():
    assert is_empty(domain_intersect(disc(0, TAU), disc(1, TAU), P), P)
    assert not is_empty(disc(0, TAU), P)


# ---------------------------------------------------------------- nice covers


def test_cover_check_examples():
    r1, r2 = pnorm(0, 2), TAU
    two = NiceCover((disc(0, r2), outside(0, r2)), (GaussPoint(0, r2),))
    assert nice_cover_check(two, P).valid
    overlap = NiceCover((disc(0, r2), outside(0, r1)), (GaussPoint(0, r1), GaussPoint(0, r2)))
    assert not nice_cover_check(overlap, P).valid
    nested = NiceCover((disc(0, r2), disc(0, r1)), (GaussPoint(0, r1),))
    assert not nice_cover_check(nested, P).valid


def test_coloring_examples():
    two = build_nice_cover([GaussPoint(0, TAU)], P)
    assert parity_coloring(two, P) == [0, 1]
    chain = build_nice_cover([GaussPoint(0, TAU), GaussPoint(0, pnorm(-1, 1))], P)
    assert parity_coloring(chain, P) == [0, 1, 0]
    with pytest.raises(GeometryError):
        two_coloring(3, [(0, 1), (1, 2), (0, 2)])


def test_build_examples():
    r = TAU
    assert build_nice_cover([GaussPoint(0, r)], P).pieces == (disc(0, r), outside(0, r))
    r2 = pnorm(-1, 1)
    chain = build_nice_cover([GaussPoint(0, r), GaussPoint(0, r2)], P)
    assert [set(u.constraints) for u in chain.pieces] == [
        {Constraint.linear(0, LE, r)},
        {Constraint.linear(0, GE, r), Constraint.linear(0, LE, r2)},
        {Constraint.linear(0, GE, r2)},
    ]
    rho = pnorm(1, 1)
    apart = build_nice_cover([GaussPoint(0, r), GaussPoint(1, rho)], P)
    assert [set(u.constraints) for u in apart.pieces] == [
        {Constraint.linear(0, LE, r)},
        {Constraint.linear(1, LE, rho)},
        {Constraint.linear(0, GE, r), Constraint.linear(1, GE, rho)},
    ]


type3_points = st.builds(
    lambda c, a, b: GaussPoint(c, pnorm(a, b)),
    st.fractions(max_denominator=25, min_value=-3, max_value=3),
    st.integers(-3, 3),
    st.integers(1, 2),
)


@given(st.lists(type3_points, min_size=1, max_size=5))
@settings(max_examples=40, deadline=None)
def test_built_covers_are_nice_and_bipartite(points):
    from berkpatch.geometry import same_point

    pts = []
    for x in points:
        if not any(same_point(x, y, P) for y in pts):
            pts.append(x)
    cover = build_nice_cover(pts, P)
    assert nice_cover_check(cover, P).valid
    colors = parity_coloring(cover, P)
    assert all(colors[i] != colors[j] for _, i, j in cover.adjacency(P))
    assert len(cover.pieces) == len(pts) + 1


def test_dot_output_counts():
    chain = build_nice_cover([GaussPoint(0, TAU), GaussPoint(0, pnorm(-1, 1))], P)
    dot = cover_to_dot(chain, P)
    assert dot.startswith("graph cover {")
    assert dot.count("shape=box") == 3
    assert dot.count("shape=point") == 2
    assert dot.count(" -- ") == 4


def test_json_round_trips():
    chain = build_nice_cover([GaussPoint(0, TAU), GaussPoint(Fraction(1, 5), pnorm(1, 1))], P)
    assert NiceCover.from_json(chain.to_json()).to_json() == chain.to_json()
    assert GaussPoint.from_json(INFINITY.to_json()) is INFINITY


def _trial_valuation(x: Fraction, p: int) -> int:
    v, n, d = 0, x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(min_value=-200, max_value=200, max_denominator=50).filter(lambda x: x != 0), min_size=1, max_size=4))
def test_newton_slopes_match_root_valuations(roots):
    X = sympy.Symbol("X")
    coeffs = sympy.Poly(sympy.prod([X - sympy.Rational(r.numerator, r.denominator) for r in roots]), X).all_coeffs()[::-1]
    poly = tuple(Fraction(int(c.p), int(c.q)) for c in coeffs)
    want = {}
    for r in roots:
        v = _trial_valuation(r, 5)
        want[v] = want.get(v, 0) + 1
    assert newton_slopes(poly, 5) == sorted((Fraction(v), k) for v, k in want.items())


def test_constraint_poly_check():
    check_constraint_poly((-5, 0, 1), 5)  # X^2 - 5: one slope 1/2
    check_constraint_poly((5, 0, 0, 1), 5)  # Eisenstein cubic
    check_constraint_poly((0, 0, 0, 0, 1), 5)  # degree 4 is not checked
    with pytest.raises(GeometryError):
        check_constraint_poly((0, -5, 1), 5)  # X (X - 5)
    with pytest.raises(GeometryError):
        check_constraint_poly((-25, 1, 1), 5)  # slopes 0 and 2
