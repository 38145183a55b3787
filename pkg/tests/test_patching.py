import math
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from berkpatch.patching import (
    BanachTriple,
    GroupChart,
    PatchingError,
    check_setting,
    compute_epsilon,
    expand_chart,
    factor_general,
    factor_near_identity,
    factor_near_identity_swapped,
    mat_add,
    mat_mul,
    verify_factorization,
)
from berkpatch.series import CIRCLE, DISC, OUTER, LaurentElement, QuotientElement, RingTag, split_laurent
from berkpatch.ultrametric import ZERO, pnorm, scalar_norm

P = 5
R = pnorm(0, 1)
TAG = RingTag(R, CIRCLE, P)
TOL = pnorm(40)
T = sympy.Symbol("T")


def el(m, tag=TAG):
    return LaurentElement(m, tag)


def sym(x: LaurentElement):
    return sum(sympy.Rational(c.numerator, c.denominator) * T**n for n, c in x.coeffs.items())


def sym_matrix(m):
    return sympy.Matrix([[sym(x) for x in row] for row in m])


def sympy_norm(expr, r=R):
    """max |c| r^n over the expanded Laurent polynomial."""
    expr = sympy.expand(expr)
    if expr == 0:
        return ZERO
    best = ZERO
    for term in sympy.Add.make_args(expr):
        c, n = term.as_coeff_exponent(T)
        best = max(best, scalar_norm(Fraction(int(c.p), int(c.q)), P) * r ** int(n))
    return best


def residual_oracle(g, g1, g2):
    diff = sym_matrix(g) - sym_matrix(g1) * sym_matrix(g2)
    return max(sympy_norm(e) for e in diff)


def identity(n):
    return BanachTriple(TAG).identity(n)


def small_matrix(rng, n, floor=3):
    # entries c T^k with v(c) + k tau >= floor
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            m = {}
            for _ in range(rng.randint(0, 3)):
                k = rng.randint(-2, 2)
                v = floor + max(0, math.ceil(-k * math.sqrt(2)))
                m[k] = Fraction(rng.choice([1, 2, 3, 4, -1, -2]) * P**v, rng.choice([1, 2, 3, 7]))
            row.append(el(m))
        rows.append(tuple(row))
    return tuple(rows)


# ---------------------------------------------------------------- setting and chart


def test_setting_checks():
    assert check_setting(BanachTriple(TAG)).passed
    rep = check_setting(BanachTriple(TAG))
    assert rep.worst_ratio == pnorm(0)
    mod = (Fraction(-5), Fraction(0), Fraction(1))
    assert check_setting(BanachTriple(TAG, mod)).passed

    def lossy(c):
        a, b = split_laurent(c)
        return el({n: x for n, x in a.coeffs.items() if n != 0}, a.tag), b

    bad = check_setting(BanachTriple(TAG, splitter=lossy))
    assert not bad.passed and bad.witness is not None


def test_chart_expansion():
    one = expand_chart(GroupChart.gl(1), P)
    assert (one.terms, one.max_degree, one.M) == (3, 2, 1)
    assert set(GroupChart.gl(1).coords[0].values()) == {1}
    two = expand_chart(GroupChart.gl(2), P)
    assert (two.terms, two.M) == (16, 1)
    bad = GroupChart(1, ({(1, 0): Fraction(1), (0, 1): Fraction(2)},))
    with pytest.raises(PatchingError):
        expand_chart(bad, P)


def test_chart_apply_is_matrix_product():
    rng = random.Random(1)
    u, v = small_matrix(rng, 2, 0), small_matrix(rng, 2, 0)
    one = el({0: 1})
    f = GroupChart.gl(2).apply(u, v, one)
    lhs = sym_matrix(mat_add(identity(2), f))
    rhs = sym_matrix(mat_add(identity(2), u)) * sym_matrix(mat_add(identity(2), v))
    assert (lhs - rhs).applyfunc(sympy.expand) == sympy.zeros(2, 2)


@pytest.mark.parametrize(
    "d, m, delta, expected",
    [(Fraction(1, 2), 1, 1, Fraction(1, 8)), (Fraction(1, 2), 2, 1, Fraction(1, 128)), (1, 1, 2, Fraction(1, 2))],
)
def test_epsilon_threshold(d, m, delta, expected):
    assert compute_epsilon(d, m, delta) == expected


# ---------------------------------------------------------------- near-identity factorization


def test_zero_target():
    zero = ((el({}),),)
    u, v, cert = factor_near_identity(BanachTriple(TAG), GroupChart.gl(1), zero, TOL)
    assert cert.iterations == 0 and u[0][0].is_zero() and v[0][0].is_zero()


def test_scalar_example():
    a = ((el({0: 25, -1: 625}),),)
    u, v, cert = factor_near_identity(BanachTriple(TAG), GroupChart.gl(1), a, TOL)
    assert cert.ok and cert.iterations <= 80
    assert u[0][0].tag.mode == DISC and v[0][0].tag.mode == OUTER
    g = mat_add(identity(1), a)
    g1, g2 = mat_add(identity(1), u), mat_add(identity(1), v)
    resid = residual_oracle(g, g1, g2)
    assert resid == cert.final_residual
    assert resid <= TOL
    # frozen from the exact run
    assert cert.iterations == 19
    assert resid == pnorm(42, -1)
    assert cert.eps == Fraction(1, 25)


def test_matrix_examples_against_sympy():
    rng = random.Random(3)
    tri, chart = BanachTriple(TAG), GroupChart.gl(2)
    for _ in range(3):
        a = small_matrix(rng, 2)
        u, v, cert = factor_near_identity(tri, chart, a, TOL)
        g = mat_add(identity(2), a)
        g1, g2 = mat_add(identity(2), u), mat_add(identity(2), v)
        assert cert.ok
        assert residual_oracle(g, g1, g2) == cert.final_residual <= TOL
        ok, resid = verify_factorization(g, g1, g2, TOL)
        assert ok and resid == cert.final_residual


def check_conditions_in_floats(cert):
    """Re-derive conditions (1)-(3) from the recorded norms with float logs."""
    lp = math.log(P)

    def log_norm(x):
        return -math.inf if x is None or x.is_zero else -(float(x.e.a) + float(x.e.b) * math.sqrt(2)) * lp

    le = math.log(cert.eps_prime)
    for st_ in cert.steps:
        slack = 1e-9
        assert max(log_norm(st_.norm_u), log_norm(st_.norm_v)) <= le + slack
        if st_.step:
            assert max(log_norm(st_.norm_du), log_norm(st_.norm_dv)) <= (st_.step + 1) / 2 * le + slack
        assert log_norm(st_.residual) <= math.log(cert.d) + (st_.step + 2) / 2 * le + slack


@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
@settings(max_examples=15, deadline=None)
def test_certificate_conditions_hold(seed, n):
    a = small_matrix(random.Random(seed), n)
    u, v, cert = factor_near_identity(BanachTriple(TAG), GroupChart.gl(n), a, pnorm(25))
    assert cert.ok
    check_conditions_in_floats(cert)
    residuals = [s.residual for s in cert.steps]
    assert all(x > y for x, y in zip(residuals, residuals[1:]))


def test_threshold_violation_raises():
    a = ((el({0: 1}),),)
    with pytest.raises(PatchingError):
        factor_near_identity(BanachTriple(TAG), GroupChart.gl(1), a, TOL)


def test_swapped_order():
    a = small_matrix(random.Random(5), 2)
    v, u, cert = factor_near_identity_swapped(BanachTriple(TAG), GroupChart.gl(2), a, TOL)
    g = mat_add(identity(2), a)
    assert residual_oracle(g, mat_add(identity(2), v), mat_add(identity(2), u)) <= TOL
    assert all(x.tag.mode == OUTER for row in v for x in row)


def test_quotient_triple():
    mod = (Fraction(-5), Fraction(0), Fraction(1))
    tri = BanachTriple(TAG, mod)
    a = ((QuotientElement(mod, [el({0: 25, -1: 625}), el({1: 125})], TAG),),)
    u, v, cert = factor_near_identity(tri, GroupChart.gl(1), a, TOL)
    g = mat_add(tri.identity(1), a)
    ok, resid = verify_factorization(g, mat_add(tri.identity(1), u), mat_add(tri.identity(1), v), TOL)
    assert cert.ok and ok


def test_pruned_iterates_still_certified():
    a = small_matrix(random.Random(11), 2)
    u, v, cert = factor_near_identity(BanachTriple(TAG), GroupChart.gl(2), a, pnorm(30), prune=pnorm(30))
    g = mat_add(identity(2), a)
    assert residual_oracle(g, mat_add(identity(2), u), mat_add(identity(2), v)) == cert.final_residual <= pnorm(30)


# ---------------------------------------------------------------- verification and general elements


def test_verify_factorization_examples():
    i2 = identity(2)
    assert verify_factorization(i2, i2, i2, TOL) == (True, ZERO)
    a = small_matrix(random.Random(2), 2)
    u, v, _ = factor_near_identity(BanachTriple(TAG), GroupChart.gl(2), a, TOL)
    g, g1, g2 = mat_add(i2, a), mat_add(i2, u), mat_add(i2, v)
    assert verify_factorization(g, g1, g2, TOL)[0]
    bump = ((el({0: 5**10}), el({})), (el({}), el({})))
    ok, resid = verify_factorization(g, g1, mat_add(g2, bump), TOL)
    assert not ok and resid == residual_oracle(g, g1, mat_add(g2, bump))


def test_factor_general_examples():
    tri, chart = BanachTriple(TAG), GroupChart.gl(2)
    i2 = identity(2)
    g1, g2, cert, _ = factor_general(tri, chart, i2, TOL)
    assert g1 == i2 and g2 == i2
    a = small_matrix(random.Random(4), 2)
    g = mat_add(i2, a)
    g1, g2, cert, h = factor_general(tri, chart, g, TOL, h=(i2, i2))
    u, v, _ = factor_near_identity(tri, chart, a, TOL)
    assert g1 == mat_add(i2, u) and g2 == mat_add(i2, v)
    d = ((el({1: 1}), el({})), (el({}), el({-1: 1})))
    g = mat_mul(d, mat_add(i2, a))
    g1, g2, cert, h = factor_general(tri, chart, g, TOL)
    # h is the diagonal of dominant monomials: unit multiples of T and T^-1
    assert [list(h[i][i].coeffs) for i in range(2)] == [[1], [-1]]
    assert all(h[i][i].norm() == d[i][i].norm() for i in range(2))
    assert residual_oracle(g, g1, g2) <= TOL


def test_epsilon_with_norm_delta_uses_the_prime():
    # delta = |p| as a norm value: 1/5 at p = 5, 1/3 at p = 3
    assert compute_epsilon(1, 1, pnorm(1), p=5) == Fraction(1, 10)
    assert compute_epsilon(1, 1, pnorm(1), p=3) == Fraction(1, 6)
