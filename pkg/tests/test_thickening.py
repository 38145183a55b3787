import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from berkpatch.geometry import GE, RootSystem, fiber_radius_solve
from berkpatch.thickening import (
    BasePoint,
    MonomialRoot,
    RelativeRootSystem,
    RelConstraint,
    ThickeningError,
    endpoint_equalities,
    relative_fiber_radius,
    thickened_domain_check,
    thickening_window,
)
from berkpatch.ultrametric import LogExponent, pnorm, valuation

P = 5
SQ2 = math.sqrt(2)


def roots(*spec):
    return RelativeRootSystem(tuple(MonomialRoot(Fraction(c), k, m) for c, k, m in spec), P)


def fexp(e: LogExponent) -> float:
    return float(e.a) + float(e.b) * SQ2


# ---------------------------------------------------------------- float oracle


def dist_exp(rs, i, j, x):
    """-log_p |alpha_i - alpha_j| at t_y = p^-x: the smallest v(c) + k x over the difference."""
    a, b = rs.roots[i], rs.roots[j]
    diff = {a.k: a.c}
    diff[b.k] = diff.get(b.k, 0) - b.c
    return min(valuation(c, P) + k * x for k, c in diff.items() if c)


def sigma_float(rs, alpha, r_exp, x):
    """Exponent of the fibre radius, by bisection on the level function."""
    others = [(dist_exp(rs, alpha, j, x), rs.roots[j].mult) for j in range(len(rs.roots)) if j != alpha]
    m = rs.roots[alpha].mult

    def level(sig):
        # exponent of s^m prod max(s, d)
        return m * sig + sum(mu * min(sig, d) for d, mu in others)

    lo, hi = -500.0, 500.0
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if level(mid) < r_exp else (lo, mid)
    return lo


def configuration(rs, alpha, r_exp, x, holes):
    """Closer sets of alpha and the hole roots, plus the hole conditions, with the smallest margin."""
    out, margin = [], math.inf
    for idx, rho in [(alpha, None)] + list(holes):
        sig = sigma_float(rs, idx, r_exp, x)
        closer = []
        for j in range(len(rs.roots)):
            if j != idx:
                d = dist_exp(rs, idx, j, x)
                closer.append(d > sig)
                margin = min(margin, abs(d - sig))
        out.append(tuple(closer))
        if rho is not None:
            out.append(fexp(rho.e) > sig)
            margin = min(margin, abs(fexp(rho.e) - sig))
    return tuple(out), margin


# ---------------------------------------------------------------- examples


def test_base_point_must_be_type3():
    BasePoint(pnorm(0, 1))
    with pytest.raises(ThickeningError):
        BasePoint(pnorm(1))


def test_relative_radius_examples():
    rs = roots((0, 0, 1), (1, 1, 1))
    r = pnorm(0, 4)
    assert relative_fiber_radius(rs, 0, r, pnorm(0, 1)) == (pnorm(0, 3), 0)
    assert relative_fiber_radius(rs, 0, r, pnorm(0, Fraction(3, 2)))[0] == pnorm(0, Fraction(5, 2))


def test_constant_roots_reduce_to_fixed_fibre():
    rs = roots((0, 0, 1), (5, 0, 2), (Fraction(1, 3), 0, 1))
    fixed = RootSystem.from_roots([0, 5, Fraction(1, 3)], [1, 2, 1], P)
    for r in (pnorm(3), pnorm(1, 1), pnorm(-1)):
        for a in range(3):
            for t in (pnorm(0, 1), pnorm(2, -1)):
                try:
                    s, closer = relative_fiber_radius(rs, a, r, t)
                except ThickeningError:
                    continue
                assert (s, closer) == fiber_radius_solve(fixed, a, r)


def test_window_example():
    rs = roots((0, 0, 1), (1, 1, 1))
    w = thickening_window(rs, 0, pnorm(0, 4), pnorm(0, 1))
    assert w.lo is None and w.hi == LogExponent(0, 2)
    assert w.t_lower == pnorm(0, 2) and w.t_upper is None
    assert endpoint_equalities(rs, 0, pnorm(0, 4), pnorm(0, 1), w) == {"upper": ["root 0 vs root 1"]}


def test_tie_is_rejected():
    rs = roots((0, 0, 1), (1, 1, 1))
    with pytest.raises(ThickeningError):
        thickening_window(rs, 0, pnorm(0, 2), pnorm(0, 1))


def test_single_root_window_is_unbounded():
    w = thickening_window(roots((0, 0, 2)), 0, pnorm(0, 2), pnorm(0, 1))
    assert w.lo is None and w.hi is None


def test_domain_check_with_hole():
    rs = roots((0, 0, 1), (1, 1, 1), (5, 1, 1))
    r, t = pnorm(0, 5), pnorm(0, 1)
    w = thickening_window(rs, 0, r, t, holes=[(0, pnorm(0, 7))])
    hole = RelConstraint(GE, pnorm(0, 7), (Fraction(0), 0))
    rep = thickened_domain_check(rs, r, w, extra_u=[hole], fibers=5, samples=200, seed=1)
    assert rep.passed


# ---------------------------------------------------------------- properties


root_spec = st.tuples(
    st.sampled_from([Fraction(1), Fraction(2), Fraction(-1), Fraction(5), Fraction(1, 5), Fraction(3, 25), Fraction(0)]),
    st.integers(0, 3),
    st.integers(1, 2),
)


def build(spec):
    seen, out = set(), []
    for c, k, m in spec:
        k = 0 if c == 0 else k
        if (c, k) not in seen:
            seen.add((c, k))
            out.append(MonomialRoot(c, k, m))
    return RelativeRootSystem(tuple(out), P)


@given(
    st.lists(root_spec, min_size=1, max_size=4),
    st.integers(-6, 6),
    st.integers(1, 6),
    st.integers(-2, 2),
    st.integers(1, 2),
)
@settings(max_examples=60, deadline=None)
def test_window_matches_float_oracle(spec, ra, rb, ta, tb):
    rs = build(spec)
    r, t = pnorm(ra, rb), pnorm(ta, tb)
    try:
        w = thickening_window(rs, 0, r, t)
    except ThickeningError:
        return
    r_exp = fexp(r.e)
    base, _ = configuration(rs, 0, r_exp, fexp(t.e), [])
    lo = fexp(w.lo) if w.lo is not None else fexp(t.e) - 30
    hi = fexp(w.hi) if w.hi is not None else fexp(t.e) + 30
    # interior: the configuration at t persists
    for k in range(1, 40):
        x = lo + (hi - lo) * k / 40
        cfg, margin = configuration(rs, 0, r_exp, x, [])
        if margin > 1e-6:
            assert cfg == base
    # just past a finite endpoint the configuration breaks or ties
    for end, step in ((w.lo, -1e-4), (w.hi, 1e-4)):
        if end is None:
            continue
        at_end, margin = configuration(rs, 0, r_exp, fexp(end), [])
        assert margin < 1e-6
        past, pmargin = configuration(rs, 0, r_exp, fexp(end) + step, [])
        assert past != base or pmargin < 1e-3


@given(
    st.lists(root_spec, min_size=1, max_size=4),
    st.integers(1, 6),
    st.integers(-2, 2),
    st.integers(0, 10**6),
)
@settings(max_examples=40, deadline=None)
def test_sampled_fibres_satisfy_level_identity(spec, rb, ta, seed):
    rs = build(spec)
    r, t = pnorm(0, rb), pnorm(ta, 1)
    try:
        w = thickening_window(rs, 0, r, t)
    except ThickeningError:
        return
    rng = random.Random(seed)
    for _ in range(5):
        ty = w.sample(rng)
        assert w.contains(ty)
        s, _ = relative_fiber_radius(rs, 0, r, ty)
        assert abs(fexp(s.e) - sigma_float(rs, 0, fexp(r.e), fexp(ty.e))) < 1e-6


def test_unknown_relation_is_rejected():
    with pytest.raises(ThickeningError):
        RelConstraint(">=", pnorm(1))


def test_relative_system_json_round_trip():
    rs = roots((0, 0, 1), (Fraction(2, 5), 2, 3))
    assert RelativeRootSystem.from_json(rs.to_json(), P) == rs
