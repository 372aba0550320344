import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from selfsim_ap import (
    APWitness, DomainError, GeneralSystem, NormalizationError, ap_length_bounds,
    build_ap, certified_search, lambda_nm, make_system, no_ap_test, overlap_ap, renormalize_ap,
    upper_bound_alpha, upper_bound_power, verify_witness,
)
from selfsim_ap.bounds import power_residual


def test_bounds_below_threshold():
    b = ap_length_bounds(make_system(2, F(3, 10)))
    assert (b.lower, b.upper, b.exact) == (2, 2, 2)
    assert b.sources == ("TheoremMain", "PowerBound(1)")


@pytest.mark.parametrize("lam, source", [
    (F(1, 3), "AlphaBound"), (F(7, 20), "AlphaBound"), (F(2, 5), "PowerBound(2)"),
])
def test_bounds_pinch_four(lam, source):
    b = ap_length_bounds(make_system(2, lam))
    assert b.exact == 4 and b.lower == 4
    assert source in b.sources


def test_bounds_n3_quarter():
    b = ap_length_bounds(make_system(3, F(1, 4)))
    assert (b.lower, b.upper) == (6, 9) and b.exact is None


def test_bounds_json_infinite_upper():
    # near 1/n every power bound fails within a small m_max
    b = ap_length_bounds(make_system(2, F(49, 100)), m_max=2)
    assert b.to_json()["upper"] == 51


@pytest.mark.parametrize("n, lam, expected", [
    (2, F(7, 20), 4), (2, F(9, 20), 11), (3, F(1, 4), 9),
])
def test_upper_bound_alpha(n, lam, expected):
    assert upper_bound_alpha(make_system(n, lam)) == expected


def test_lambda_nm_linear():
    box = lambda_nm(2, 1)
    assert box.low == box.high == F(1, 3)


def test_lambda_nm_sqrt2():
    tol = F(1, 10**12)
    box = lambda_nm(2, 2, tol)
    assert box.width <= tol
    assert (box.low + 1) ** 2 <= 2 <= (box.high + 1) ** 2


def test_lambda_nm_n3():
    box = lambda_nm(3, 2, F(1, 10**12))
    assert (4 * box.low + 3) ** 2 <= 17 <= (4 * box.high + 3) ** 2


@given(st.integers(2, 6), st.integers(1, 9))
def test_lambda_nm_brackets_sign_change(n, m):
    box = lambda_nm(n, m, F(1, 10**6))
    assert power_residual(n, m, box.low) <= 0 <= power_residual(n, m, box.high)
    assert box.width <= F(1, 10**6)
    # the root itself lies in [1/(2n-1), 1/n)
    assert F(1, 2 * n - 1) <= box.high and box.low < F(1, n)


@pytest.mark.parametrize("lam, expected", [(F(2, 5), 4), (F(3, 10), 2), (F(9, 20), 8)])
def test_upper_bound_power(lam, expected):
    assert upper_bound_power(make_system(2, lam), m_max=4) == expected


def test_upper_bound_power_is_strict_at_root():
    # at lam = 1/3 the m = 1 residual vanishes; {0, 1/3, 2/3, 1} rules out the bound 2
    assert upper_bound_power(make_system(2, F(1, 3)), m_max=4) == 4
    assert upper_bound_power(make_system(2, F(49, 100)), m_max=3) == math.inf


def test_overlap_touching():
    g = GeneralSystem(2, F(1, 2), (0, F(1, 2)))
    c = overlap_ap(g)
    assert c.kind == "EXISTS"
    assert c.witness.terms == (0, F(1, 2), 1)
    assert verify_witness(c.witness, g).passed


def test_overlap_hull_covered():
    g = GeneralSystem(2, F(3, 5), (0, F(2, 5)))
    c = overlap_ap(g)
    assert c.kind == "EXISTS"
    assert c.witness.terms == (0, F(2, 5), F(4, 5))
    assert verify_witness(c.witness, g).passed


def test_overlap_separated():
    assert overlap_ap(make_system(2, F(1, 3))).kind == "NOT_FOUND"


def test_no_ap_example():
    g = GeneralSystem(3, F(1, 20), (0, F(3, 10), F(19, 20)))
    c = no_ap_test(g)
    assert c.kind == "NO_AP"
    assert c.checks["triple_min"] == "7/20"
    assert c.checks["spacing_min"] == "3/10"
    assert c.checks["threshold"] == "3/20"


def test_no_ap_inapplicable():
    c = no_ap_test(GeneralSystem(3, F(2, 5), (0, F(3, 10), F(3, 5))))
    assert c.kind == "INAPPLICABLE" and c.checks["failing"] == "b-has-AP"
    with pytest.raises(NormalizationError):
        GeneralSystem(3, F(1, 5), (0, F(3, 10), F(19, 20)))


def test_no_ap_counts_repeated_indices():
    # Strictly increasing triples alone would allow lam up to (4/5)/2, yet
    # 0, f_1(0) = 1/20 and f_0(1) = 1/10 form a progression.
    g = GeneralSystem(3, F(1, 10), (0, F(1, 20), F(9, 10)))
    c = no_ap_test(g)
    assert c.kind == "INAPPLICABLE"
    assert c.checks["threshold"] == "1/40"
    found = certified_search(g, 3, max_depth=4)
    assert found.kind == "EXISTS"
    assert found.witness.terms == (0, F(1, 20), F(1, 10))
    assert verify_witness(found.witness, g).passed


def test_renormalize_examples():
    p = make_system(3, F(1, 4))
    w = build_ap(p)
    assert renormalize_ap(w, p).terms == w.terms
    shrunk = APWitness(tuple(x / 4 for x in w.terms))
    back = renormalize_ap(shrunk, p)
    assert back.terms == w.terms
    q = make_system(2, F(1, 3))
    bw = build_ap(q)
    out = renormalize_ap(bw, q)
    assert out.terms == bw.terms and out.diff >= q.alpha


def test_renormalize_deep_prefix():
    p = make_system(2, F(1, 3))
    # push {0, 1/3, 2/3, 1} into the cylinder 0 2 0
    lo, scale = F(2, 27), F(1, 27)
    w = APWitness(tuple(lo + scale * x for x in (0, F(1, 3), F(2, 3), 1)))
    out = renormalize_ap(w, p)
    assert out.terms == (0, F(1, 3), F(2, 3), 1)
    assert verify_witness(out, p).passed


def test_renormalize_degenerate():
    with pytest.raises(DomainError):
        renormalize_ap(APWitness((F(1, 3),)), make_system(2, F(1, 3)))
