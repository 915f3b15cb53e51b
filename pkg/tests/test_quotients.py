"""Difference-quotient calculus tests: exact quotient values, limits at
vanishing increments, Taylor residuals, the combinatorial identities, Hölder
scans, and approximate derivatives."""

import random
from fractions import Fraction

import pytest
import sympy

from qpcalc.funcs import LinearMap, MultiPoly, SymbolicFunction
from qpcalc.measure import GridFunction
from qpcalc.padic import (
    Ball,
    Order,
    PAdicNumber,
    PAdicVector,
    PadicError,
    PPow,
    unit_vector,
    vdp_compare,
)
from qpcalc.quotients import (
    ApDerivative,
    IdentityCheck,
    NonconvergenceError,
    QuotientPoint,
    ap_derivative,
    chain_rule_check,
    holder_scan,
    phi1,
    phin,
    phin_exact_zero,
    phin_limit,
    product_rule_check,
    stepanoff_scan,
    taylor_eval,
    telescope_check,
)


def num(n, p=5):
    return PAdicNumber.from_int(p, n, prec=24)


def frac(q, p=5):
    return PAdicNumber.from_fraction(p, Fraction(q), prec=24)


def vec(*ns, p=5):
    return PAdicVector.from_ints(p, ns, prec=24)


def fn(*sources, p=5, m=None):
    return SymbolicFunction.from_sources(p, list(sources), m=m)


# ---------------------------------------------------------------------------
# phi1 / phin exact values
# ---------------------------------------------------------------------------

def test_phi1_identity_returns_direction():
    f = fn("x0", "x1", m=2)
    out = phi1(f, vec(1, 2), vec(3, 4), num(5))
    assert [c.as_fraction() for c in out] == [3, 4]


def test_phi1_constant_vanishes():
    f = fn("7", m=1)
    out = phi1(f, vec(2), vec(1), num(25))
    assert out[0].is_zero()


def test_phi1_square_frozen_value():
    # (36 - 1) / 5
    f = fn("x0*x0")
    out = phi1(f, vec(1), vec(1), num(5))
    assert out[0].as_fraction() == 7


def test_phi1_rejects_zero_t():
    with pytest.raises(PadicError):
        phi1(fn("x0"), vec(1), vec(1), PAdicNumber.zero(5))


def test_phi2_of_square_is_v1_v2():
    f = fn("x0*x0")
    rng = random.Random(3)
    for _ in range(20):
        x = vec(rng.randrange(1, 100))
        v1, v2 = vec(rng.randrange(1, 50)), vec(rng.randrange(1, 50))
        t1, t2 = num(5 ** rng.randrange(1, 3)), num(rng.randrange(1, 20))
        q = QuotientPoint(x, (v1, v2), (t1, t2))
        out = phin(f, 2, q)
        assert (out[0] - v1[0] * v2[0]).is_zero()


def test_phi2_of_affine_vanishes():
    f = fn("3*x0 - x1 + 2", m=2)
    q = QuotientPoint(vec(1, 2), (vec(1, 0), vec(0, 2)), (num(5), num(3)))
    out = phin(f, 2, q)
    assert out[0].is_zero()


def test_phin_above_degree_vanishes():
    f = fn("x0*x0*x0 + 2*x0")
    rng = random.Random(9)
    for _ in range(10):
        vs = tuple(vec(rng.randrange(1, 30)) for _ in range(4))
        ts = tuple(num(rng.randrange(1, 30)) for _ in range(4))
        out = phin(f, 4, QuotientPoint(vec(rng.randrange(50)), vs, ts))
        assert out[0].is_zero()


def test_phi1_of_ball_indicator_is_minus_inverse_t():
    # x = 0 in the unit ball, x + vt outside: jump -1 over the increment
    f = fn("ch(0;0)")
    t = frac(Fraction(1, 5))
    out = phi1(f, PAdicVector.zero(5, 1), vec(1), t)
    assert (out[0] + num(5)).is_zero()      # value is -1/t = -5
    assert out[0].norm() == Fraction(1, 5)


def test_phi1_scaling_identity():
    # phi1(x; vc; t/c) = c * phi1(x; v; t)
    rng = random.Random(21)
    f = fn("x0*x0*x1 - x1 + 4", m=2)
    for _ in range(25):
        x = vec(rng.randrange(40), rng.randrange(40))
        v = vec(rng.randrange(1, 20), rng.randrange(1, 20))
        t, c = num(rng.randrange(1, 40)), num(rng.randrange(1, 40))
        lhs = phi1(f, x, v.scale(c), t / c)
        rhs = phi1(f, x, v, t).scale(c)
        assert all(d.is_zero() for d in (lhs - rhs).coords)


# ---------------------------------------------------------------------------
# limits at t -> 0
# ---------------------------------------------------------------------------

def test_phin_limit_square_stabilizes_to_derivative():
    f = fn("x0*x0")
    x, h = vec(3), vec(2)
    rep = phin_limit(f, 1, x, [h])
    assert rep.converged
    expected = num(12)          # 2 * 3 * 2
    assert vdp_compare(rep.value[0], expected) is Order.EQUAL


def test_phin_limit_second_order_already_constant():
    f = fn("x0*x0")
    rep = phin_limit(f, 2, vec(1), [vec(2), vec(3)])
    assert rep.converged
    assert vdp_compare(rep.value[0], num(6)) is Order.EQUAL


def test_phin_limit_locally_constant_hits_zero():
    f = fn("ch(0;0)")
    rep = phin_limit(f, 1, PAdicVector.zero(5, 1), [vec(1)])
    assert rep.converged
    assert rep.value[0].is_zero()


def test_phin_limit_agrees_with_symbolic_multilinear_form():
    rng = random.Random(14)
    f = fn("x0*x0*x1 + 2*x1*x1 - x0", m=2)
    for _ in range(5):
        x = vec(rng.randrange(20), rng.randrange(20))
        vs = [vec(rng.randrange(1, 9), rng.randrange(1, 9)) for _ in range(2)]
        rep = phin_limit(f, 2, x, vs)
        exact = phin_exact_zero(f, 2, x, vs)
        assert rep.converged
        assert vdp_compare(rep.value[0], exact[0]) is Order.EQUAL


# ---------------------------------------------------------------------------
# Taylor expansion
# ---------------------------------------------------------------------------

def test_taylor_affine_exact():
    f = fn("3*x0 + 1")
    out = taylor_eval(f, 0, vec(2), vec(17))
    assert out.exact
    assert out.residual[0].is_zero()


def test_taylor_square_terms_and_zero_residual():
    f = fn("x0*x0")
    y, x = vec(3), vec(8)
    out = taylor_eval(f, 1, y, x)
    # f(x) = f(y) + 2y(x-y) + (x-y)^2 exactly
    assert out.residual[0].is_zero()
    assert out.terms[0][0].as_fraction() == 30     # 2*3*5
    assert out.terms[1][0].as_fraction() == 25     # 5^2


def test_taylor_cubic_tail():
    f = fn("x0*x0*x0")
    y, x = vec(1), vec(6)
    out = taylor_eval(f, 1, y, x)
    # degree 3 > n+1 = 2: residual is exactly the cubic tail (x-y)^3
    assert out.residual[0].as_fraction() == 125
    assert out.residual_norm() <= Fraction((x - y).sup_norm()) ** 3


def test_taylor_limit_route_for_indicators():
    f = fn("ch(0;0)")
    y = PAdicVector.zero(5, 1)
    x = PAdicVector([frac(Fraction(25))])
    out = taylor_eval(f, 0, y, x)
    assert not out.exact
    assert out.residual[0].is_zero()    # locally constant near 0


# ---------------------------------------------------------------------------
# combinatorial identities
# ---------------------------------------------------------------------------

def test_chain_rule_frozen_example():
    u = fn("x0", "x0*x0")                 # y -> (y, y^2)
    f = fn("x0*x1", m=2)
    out = chain_rule_check(f, u, vec(1), vec(1), num(5))
    assert out.equal
    assert out.lhs[0].as_fraction() == 43  # (6*36 - 1) / 5


def test_chain_rule_constant_inner():
    u = fn("2", "3")
    f = fn("x0*x1", m=2)
    out = chain_rule_check(f, u, vec(1), vec(1), num(5))
    assert out.equal
    assert out.lhs[0].is_zero()


def test_chain_rule_linear_outer():
    u = fn("x0*x0", "x0 + 1")
    f = fn("x0 + 2*x1", m=2)
    out = chain_rule_check(f, u, vec(2), vec(3), num(25))
    assert out.equal


def test_telescope_frozen_example():
    f = fn("x0*x1", m=2)
    out = telescope_check(f, vec(1, 1), vec(1, 2), num(5))
    assert out.equal
    assert out.lhs[0].as_fraction() == 13  # (66 - 1)/5


def test_telescope_single_coordinate():
    f = fn("x0*x0 + x1", m=2)
    out = telescope_check(f, vec(2, 7), vec(1, 0), num(5))
    assert out.equal


def test_telescope_with_indicator():
    f = fn("ch(0;0;1)", m=2)
    out = telescope_check(f, vec(1, 1), vec(3, 4), frac(Fraction(1, 5)))
    assert out.equal


def test_product_rule_identity_squared():
    f = g = fn("x0")
    out = product_rule_check(f, g, vec(1), vec(1), num(3))
    assert out.equal
    assert out.lhs[0].as_fraction() == 5   # ((1+3)^2 - 1)/3


def test_product_rule_with_constant_factor():
    f, g = fn("4"), fn("x0*x0")
    out = product_rule_check(f, g, vec(3), vec(2), num(5))
    assert out.equal
    direct = phi1(g, vec(3), vec(2), num(5))
    assert (out.lhs[0] - num(4) * direct[0]).is_zero()


def test_product_rule_unit_factor():
    f, g = fn("x0*x0 - x0"), fn("1")
    out = product_rule_check(f, g, vec(7), vec(1), num(5))
    assert out.equal
    direct = phi1(f, vec(7), vec(1), num(5))
    assert (out.lhs[0] - direct[0]).is_zero()


# ---------------------------------------------------------------------------
# recentering against an independent oracle
# ---------------------------------------------------------------------------

def test_recentering_against_sympy():
    xs, hs = sympy.symbols("x h")
    rng = random.Random(7)
    for _ in range(5):
        coeffs = [rng.randrange(-9, 10) for _ in range(5)]
        y0 = rng.randrange(-5, 6)
        expanded = sympy.expand(
            sum(c * (y0 + hs) ** i for i, c in enumerate(coeffs)))
        q = MultiPoly(1, {(i,): c for i, c in enumerate(coeffs)})
        r = q.recenter([Fraction(y0)])
        for i in range(5):
            assert r.coefficient((i,)) == Fraction(int(expanded.coeff(hs, i)))


# ---------------------------------------------------------------------------
# Hölder scans
# ---------------------------------------------------------------------------

def unit_domain(p=5):
    return Ball(PAdicVector.zero(p, 1), 0)


def test_holder_scan_constant():
    f = GridFunction.from_callable(unit_domain(), 2, lambda r: vec(9))
    out = holder_scan(f, 1)
    assert out.constant == 0
    assert out.witness is None


def test_holder_scan_identity():
    f = GridFunction.from_callable(unit_domain(), 2, lambda r: r)
    out = holder_scan(f, 1)
    assert out.constant == 1
    x, y = out.witness
    assert (x - y).sup_norm() == (f.evaluate(x) - f.evaluate(y)).sup_norm()


def test_holder_scan_indicator_jump():
    ind = fn("ch(0;1)")
    f = GridFunction.from_callable(unit_domain(), 2, ind)
    out = holder_scan(f, 1)
    assert out.constant == 1
    out_half = holder_scan(f, Fraction(1, 2))
    assert out_half.constant == 1


def test_holder_scan_rejects_bad_exponent():
    f = GridFunction.from_callable(unit_domain(), 1, lambda r: r)
    with pytest.raises(PadicError):
        holder_scan(f, Fraction(3, 2))


# ---------------------------------------------------------------------------
# approximate derivatives
# ---------------------------------------------------------------------------

def test_ap_derivative_linear_recovers_matrix():
    m = LinearMap.from_ints(5, [[1, 5], [0, 2]])
    f = fn("x0 + 5*x1", "2*x1", m=2)
    x = vec(1, 2)
    out = ap_derivative(f, x, (1, 2, 3), Fraction(1, 25), resolution=4)
    got = [[e.as_fraction() for e in row] for row in out.linear_map.rows]
    want = [[e.as_fraction() for e in row] for row in m.rows]
    assert got == want
    assert out.verdict == "converges-to-0"
    assert all(c == 0 for _, c, _ in out.estimate.ratios)


def test_ap_derivative_square():
    f = fn("x0*x0")
    out = ap_derivative(f, vec(1), (1, 2, 3), Fraction(1, 25), resolution=5)
    assert vdp_compare(out.linear_map.rows[0][0], num(2)) is Order.EQUAL
    assert out.verdict == "converges-to-0"


def test_ap_derivative_locally_constant():
    f = fn("ch(0;1)")
    out = ap_derivative(f, PAdicVector.zero(5, 1), (1, 2, 3), Fraction(1, 5),
                        resolution=4)
    assert out.linear_map.rows[0][0].is_zero()
    assert out.verdict == "converges-to-0"


def test_ap_derivative_stable_under_refined_j_range():
    f = fn("x0*x0 - 3*x0")
    a = ap_derivative(f, vec(2), (1, 2, 3), Fraction(1, 25), resolution=5)
    b = ap_derivative(f, vec(2), (1, 2, 3, 4), Fraction(1, 25), resolution=5)
    ga = [[e.as_fraction() for e in r] for r in a.linear_map.rows]
    gb = [[e.as_fraction() for e in r] for r in b.linear_map.rows]
    assert ga == gb


def test_stepanoff_scan_linear_and_square():
    dom = unit_domain()
    lin = fn("3*x0 + 1")
    assert stepanoff_scan(lin, dom, 2, Fraction(1, 25)).fraction == 1
    sq = fn("x0*x0")
    assert stepanoff_scan(sq, dom, 2, Fraction(1, 25)).fraction == 1


def test_stepanoff_scan_step_function():
    f = fn("ch(0;1) + 2*ch(1;1)")
    assert stepanoff_scan(f, unit_domain(), 2, Fraction(1, 25)).fraction == 1
