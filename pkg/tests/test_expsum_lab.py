import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _oracles as oracle
from sqfree_lab import expsum_lab as es
from sqfree_lab.arith_core import von_mangoldt
from sqfree_lab.diophantine import convergent_near, golden_ratio, sqrt_spec


def test_ap_examples():
    assert abs(es.ap_exp_sum(4, 1, 1, 0.5)) < 1e-15
    assert es.ap_exp_sum(100, 3, 7, 0.0) == pytest.approx(len(range(3, 101, 7)))
    got = es.ap_exp_sum(100, 1, 3, sqrt_spec(2))
    assert abs(got - oracle.ap_sum(100, 1, 3, math.sqrt(2))) < 1e-9
    assert es.ap_exp_sum(5, 7, 9, 0.3) == 0
    with pytest.raises(ValueError):
        es.ap_exp_sum(10, 0, 3, 0.1)


@given(st.integers(1, 3000), st.integers(1, 60), st.data(), st.floats(0, 1))
@settings(max_examples=300)
def test_ap_closed_form_and_bound(X, d, data, gamma):
    a = data.draw(st.integers(1, d))
    s = es.ap_exp_sum(X, a, d, gamma)
    assert abs(s - oracle.ap_sum(X, a, d, gamma)) < 1e-9 * max(1, X / d)
    assert abs(s) <= es.ap_bound(X, d, gamma) * (1 + 1e-12)


def test_ap_rational_frequency_is_exact():
    assert es.ap_exp_sum(12, 1, 1, Fraction(1, 3)) == pytest.approx(0, abs=1e-12)
    assert es.ap_exp_sum(12, 2, 3, Fraction(1, 3)) == pytest.approx(4 * complex(-0.5, -math.sqrt(3) / 2))


def test_random_audit_is_reproducible():
    one = es.ap_random_audit(500, seed=3)
    assert one == es.ap_random_audit(500, seed=3)
    assert one["violations"] == 0
    assert one["max_abs_error"] < 1e-9


def _vaughan_lhs(X, Y, a_float):
    total = 0.0
    for n in range(1, X + 1):
        frac = (a_float * n) % 1
        dist = min(frac, 1 - frac)
        total += min(X * Y / n, 1 / dist)
    return total


def test_vaughan_example():
    rec = es.vaughan_audit(100, 10, 5, sqrt_spec(2))
    assert rec.lhs == pytest.approx(_vaughan_lhs(100, 10, math.sqrt(2)), rel=1e-9)
    assert rec.ratio <= es.DEFAULT_CEILING and not rec.flagged
    conv = convergent_near(sqrt_spec(2), 5)
    assert es.vaughan_audit(100, 10, conv, sqrt_spec(2)).ratio == rec.ratio


def test_vaughan_single_term():
    rec = es.vaughan_audit(1, 7, 1, golden_ratio())
    frac = (1 + math.sqrt(5)) / 2 % 1
    assert rec.lhs == pytest.approx(min(7, 1 / min(frac, 1 - frac)))


def test_vaughan_grid_bounded():
    alpha = golden_ratio()
    ratios = []
    for X in (100, 1000, 10 ** 4):
        for Y in (1, 10, 100):
            q = convergent_near(alpha, math.sqrt(X)).q
            ratios.append(es.vaughan_audit(X, Y, q, alpha).ratio)
    assert max(ratios) < es.DEFAULT_CEILING
    assert all(np.isfinite(ratios))


def _quad_lhs(M, J, x, power):
    total = 0.0
    for m in range(M + 1, 2 * M + 1):
        for j in range(J + 1, 2 * J + 1):
            n = m ** power * j
            frac = (math.sqrt(2) * n) % 1
            total += oracle.tau_k(m, 2) * oracle.tau_k(j, 2) * min(x / n, 1 / min(frac, 1 - frac))
    return total


@pytest.mark.parametrize("M,J,x,power", [(8, 8, 10 ** 4, 2), (4, 16, 10 ** 5, 4), (1, 1, 100, 2), (3, 5, 1000, 4)])
def test_quadratic_sums(M, J, x, power):
    alpha = sqrt_spec(2)
    q = convergent_near(alpha, x ** 0.35).q
    rec = es.quadratic_sum_audit(M, J, x, alpha, q, power)
    assert rec.lhs == pytest.approx(_quad_lhs(M, J, x, power), rel=1e-7)
    assert np.isfinite(rec.ratio)
    if (M, J) != (1, 1):
        assert rec.ratio <= es.DEFAULT_CEILING


def test_quadratic_validation():
    with pytest.raises(ValueError):
        es.quadratic_sum_lhs(0, 1, 10, sqrt_spec(2), 2)
    with pytest.raises(ValueError):
        es.quadratic_sum_lhs(1, 1, 10, sqrt_spec(2), 3)
    with pytest.raises(OverflowError):
        es.quadratic_sum_lhs(10 ** 5, 10, 10, sqrt_spec(2), 4)


def test_hb_examples():
    assert es.hb_decompose(8, 8, 1) == pytest.approx(math.log(2), abs=1e-12)
    assert es.hb_decompose(6, 6, 1) == pytest.approx(0, abs=1e-12)
    assert es.hb_decompose(1, 1, 3) == 0
    with pytest.raises(ValueError):
        es.hb_decompose(100, 4, 3)


@given(st.integers(2, 600), st.integers(1, 3))
@settings(max_examples=120, deadline=None)
def test_hb_against_enumeration(n, J):
    z = es.integer_root_ceil(n, J)
    assert es.hb_decompose(n, z, J) == pytest.approx(oracle.hb_rhs(n, z, J), abs=1e-9)


@given(st.integers(2, 10 ** 4), st.integers(1, 3), st.integers(0, 5))
@settings(max_examples=300)
def test_hb_any_large_z(n, J, extra):
    z = es.integer_root_ceil(n, J) + extra
    assert es.hb_decompose(n, z, J) == pytest.approx(von_mangoldt(n), abs=1e-9)


@given(st.integers(1, 10 ** 9), st.integers(1, 4))
def test_integer_root_ceil(n, J):
    z = es.integer_root_ceil(n, J)
    assert z ** J >= n and (z == 1 or (z - 1) ** J < n)


def test_hb_parameters():
    prm = es.hb_parameters(10 ** 10)
    assert prm["u"] == pytest.approx(2 ** -7 * 100)
    assert prm["v"] == pytest.approx(2 ** 7 * 10 ** (10 / 3))
    assert prm["hb_w"] == pytest.approx(10 ** 4)


def test_dyadic_examples():
    assert es.dyadic_split(1, 8) == [(0, 1), (1, 2), (2, 4), (4, 8)]
    assert es.dyadic_split(5, 20) == [(4, 8), (8, 16), (16, 20)]
    assert es.dyadic_split(7, 7) == [(6, 7)]
    with pytest.raises(ValueError):
        es.dyadic_split(5, 4)


def test_dyadic_random_partitions():
    rng = random.Random(11)
    for _ in range(1000):
        lo = rng.randrange(1, 10 ** 6)
        hi = lo + rng.randrange(0, 10 ** 5)
        blocks = es.dyadic_split(lo, hi)
        assert blocks[0][0] == lo - 1 and blocks[-1][1] == hi
        assert all(b[1] == c[0] for b, c in zip(blocks, blocks[1:]))
        # each block sits inside one (B, 2B]
        for a, b in blocks:
            assert a < b
            B = 1 << max(0, (b - 1).bit_length() - 1) if b > 1 else 0
            assert a >= B and (b <= 2 * B or B == 0)
        assert len(blocks) <= math.log2(hi / lo) + 2


def test_mennema_roots_bounded():
    pts = es.mennema_audit(xs=(10 ** 3, 10 ** 4, 10 ** 5))
    assert len(pts) == 12
    for pt in pts:
        assert 0 < pt.lemma1_root < 1
        assert 0 < pt.lemma2_root < 1
        assert pt.lemma2_tail > 0


def test_mennema_lemma1_sum_matches_brute_force():
    (pt,) = es.mennema_audit(ks=(3,), xs=(1000,))
    want = sum(oracle.tau_k(n, 3) for n in range(1, 1001) if oracle.squarefree(n))
    assert pt.lemma1_sum == want


def test_euler_total_brackets_partial_sum():
    lo, hi = es._euler_total(2)
    partial = sum(oracle.tau_k(d, 2) / d ** 2 for d in range(1, 20001) if oracle.squarefree(d))
    assert partial < hi
    assert hi - lo < 1e-7
