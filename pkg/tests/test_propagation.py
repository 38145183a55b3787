import random
from fractions import Fraction

import pytest
import sympy

from berkpatch.geometry import GaussPoint, build_nice_cover, parity_coloring
from berkpatch.patching import BanachTriple, GroupChart, PatchingError, factor_near_identity, mat_add
from berkpatch.propagation import (
    RatMatrix,
    identity_transition,
    laurent_to_rat,
    propagate_over_cover,
    rat_to_laurent,
)
from berkpatch.series import CIRCLE, LaurentElement, RingTag
from berkpatch.ultrametric import ZERO, pnorm, scalar_norm

P = 5
TOL = pnorm(30)
T, W = sympy.symbols("T W")


def rat_sym(m: RatMatrix):
    den = sum(sympy.Rational(c.numerator, c.denominator) * T**i for i, c in enumerate(m.den))
    return sympy.Matrix(
        [[sum(sympy.Rational(c.numerator, c.denominator) * T**i for i, c in enumerate(x)) / den for x in row] for row in m.num]
    )


def laurent_sym(m, center):
    c = sympy.Rational(center.numerator, center.denominator)
    return sympy.Matrix(
        [[sum(sympy.Rational(a.numerator, a.denominator) * (T - c) ** n for n, a in x.coeffs.items()) for x in row] for row in m]
    )


def poly_gauss_norm(expr, eta):
    """Gauss norm of a polynomial in T via its Taylor coefficients at the centre."""
    c = sympy.Rational(eta.center.numerator, eta.center.denominator)
    pol = sympy.Poly(sympy.expand(expr.subs(T, W + c)), W)
    best = ZERO
    for (i,), a in pol.terms():
        best = max(best, scalar_norm(Fraction(int(a.p), int(a.q)), P) * eta.radius**i)
    return best


def rational_norm(expr, eta):
    num, den = sympy.fraction(sympy.cancel(sympy.together(expr)))
    if num == 0:
        return ZERO
    return poly_gauss_norm(num, eta) / poly_gauss_norm(den, eta)


def small_transition(rng, eta, floor=3):
    tag = RingTag(eta.radius, CIRCLE, P)
    rows = []
    for i in range(2):
        row = []
        for j in range(2):
            m = {0: 1} if i == j else {}
            for _ in range(rng.randint(1, 3)):
                k = rng.randint(-2, 2)
                ek = eta.radius.e.scale(k)
                v = floor - int(ek.a + ek.b * 1.4142135623730951) + 2
                m[k] = m.get(k, 0) + Fraction(rng.choice([1, 2, -3]) * P**v, rng.choice([1, 3, 7]))
            row.append(LaurentElement(m, tag))
        rows.append(tuple(row))
    return tuple(rows)


def transitions_for(cover, seed):
    rng = random.Random(seed)
    return {k: small_transition(rng, eta) for k, eta in enumerate(cover.nodes)}


def independent_residuals(cover, colors, transitions, result):
    out = {}
    for k, i, j in cover.adjacency(P):
        u, v = (i, j) if colors[i] == 0 else (j, i)
        eta = cover.nodes[k]
        diff = laurent_sym(transitions[k], eta.center) - rat_sym(result.elements[u]) * rat_sym(result.elements[v]).inv()
        out[k] = max(rational_norm(e, eta) for e in diff)
    return out


# ---------------------------------------------------------------- rational matrices


def test_rat_matrix_algebra_against_sympy():
    a = RatMatrix((((Fraction(1), Fraction(2)), (Fraction(3),)), ((), (Fraction(1), Fraction(0), Fraction(1)))), (Fraction(-1), Fraction(1)))
    b = RatMatrix((((Fraction(5),), (Fraction(0), Fraction(1))), ((Fraction(1),), (Fraction(2),))), (Fraction(0), Fraction(1)))
    assert (rat_sym(a @ b) - rat_sym(a) * rat_sym(b)).applyfunc(sympy.simplify) == sympy.zeros(2, 2)
    assert (rat_sym(a.inverse()) - rat_sym(a).inv()).applyfunc(sympy.simplify) == sympy.zeros(2, 2)
    assert a @ a.inverse() == RatMatrix.identity(2)
    assert RatMatrix.from_json(a.to_json()) == a


def test_laurent_round_trip():
    eta = GaussPoint(Fraction(1, 5), pnorm(1, 1))
    tr = small_transition(random.Random(0), eta)
    rat = laurent_to_rat(tr, eta.center)
    assert (rat_sym(rat) - laurent_sym(tr, eta.center)).applyfunc(sympy.simplify) == sympy.zeros(2, 2)
    back = rat_to_laurent(rat, eta, TOL, P)
    assert max((x - y).norm() for rx, ry in zip(back, tr) for x, y in zip(rx, ry)) <= TOL
    inv = rat_to_laurent(rat.inverse(), eta, TOL, P)
    prod = laurent_sym(inv, eta.center) * laurent_sym(tr, eta.center) - sympy.eye(2)
    assert max(rational_norm(e, eta) for e in prod) <= TOL


# ---------------------------------------------------------------- propagation


def test_identity_transitions_give_identity():
    cover = build_nice_cover([GaussPoint(0, pnorm(0, 1)), GaussPoint(0, pnorm(-1, 1))], P)
    colors = parity_coloring(cover, P)
    tr = {k: identity_transition(2, eta, P) for k, eta in enumerate(cover.nodes)}
    res = propagate_over_cover(cover, colors, tr, TOL, P)
    assert all(m == RatMatrix.identity(2) for m in res.elements.values())
    assert all(r == ZERO for r in res.residuals.values())


def test_two_pieces_match_single_factorization():
    eta = GaussPoint(Fraction(1, 5), pnorm(1, 1))
    cover = build_nice_cover([eta], P)
    colors = parity_coloring(cover, P)
    tr = transitions_for(cover, 1)
    res = propagate_over_cover(cover, colors, tr, TOL, P)
    tri = BanachTriple(RingTag(eta.radius, CIRCLE, P))
    ident = tri.identity(2)
    a = tuple(tuple(tr[0][i][j] - ident[i][j] for j in range(2)) for i in range(2))
    u, v, _ = factor_near_identity(tri, GroupChart.gl(2), a, TOL, prune=TOL)
    assert res.elements[0] == laurent_to_rat(mat_add(ident, u), eta.center)
    assert res.elements[1] == laurent_to_rat(mat_add(ident, v), eta.center).inverse()


def test_three_piece_chain():
    cover = build_nice_cover([GaussPoint(0, pnorm(0, 1)), GaussPoint(0, pnorm(-1, 1))], P)
    colors = parity_coloring(cover, P)
    assert colors == [0, 1, 0]
    tr = transitions_for(cover, 2)
    res = propagate_over_cover(cover, colors, tr, TOL, P)
    assert res.ok(TOL)
    assert len(res.residuals) == 2
    assert independent_residuals(cover, colors, tr, res) == res.residuals
    assert all(res.regular.values())


def test_four_piece_star():
    pts = [GaussPoint(0, pnorm(-1, 1)), GaussPoint(0, pnorm(0, 1)), GaussPoint(5, pnorm(1, 1))]
    cover = build_nice_cover(pts, P)
    colors = parity_coloring(cover, P)
    tr = transitions_for(cover, 3)
    res = propagate_over_cover(cover, colors, tr, TOL, P)
    assert res.ok(TOL)
    assert independent_residuals(cover, colors, tr, res) == res.residuals


def test_piece_elements_have_no_poles_inside():
    cover = build_nice_cover([GaussPoint(0, pnorm(0, 1)), GaussPoint(0, pnorm(-1, 1))], P)
    colors = parity_coloring(cover, P)
    res = propagate_over_cover(cover, colors, transitions_for(cover, 4), TOL, P)
    rng = random.Random(9)
    for i, piece in enumerate(cover.pieces):
        den = res.elements[i].den
        det_den = sympy.fraction(sympy.cancel(rat_sym(res.elements[i]).det()))[1]
        for _ in range(200):
            x = GaussPoint(Fraction(rng.randint(-200, 200), rng.choice([1, 5, 25])))
            if piece.contains(x, P):
                assert sum(c * x.center**k for k, c in enumerate(den)) != 0
                assert det_den.subs(T, sympy.Rational(x.center.numerator, x.center.denominator)) != 0


def test_missing_transition_is_rejected():
    cover = build_nice_cover([GaussPoint(0, pnorm(0, 1)), GaussPoint(0, pnorm(-1, 1))], P)
    tr = transitions_for(cover, 5)
    del tr[1]
    with pytest.raises(PatchingError):
        propagate_over_cover(cover, parity_coloring(cover, P), tr, TOL, P)
