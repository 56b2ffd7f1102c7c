import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _oracles as oracle
from sqfree_lab import shift_system as ss

SYSTEMS = [(1, 2), (1, 5), (1, 10), (2, 3, 7), (1, 3, 7, 13), (4, 30), (2, 4)]

shift_sets = st.lists(st.integers(1, 60), min_size=2, max_size=5, unique=True)


def _w(a) -> int:
    bound = math.isqrt(max(a) - min(a))
    return math.prod(oracle.primes_upto(bound))


@pytest.mark.parametrize("a,w", [((1, 2), 1), ((1, 5), 2), ((1, 10), 6), ((3, 40), 30), ((3, 52), 210)])
def test_primorial(a, w):
    A = ss.new_shift_system(a)
    assert A.w == w
    assert math.prod(A.w_primes) == w


def test_constructor_validation():
    assert ss.new_shift_system([5, 1]).a == (1, 5)
    for bad in ([1, 1], [3], [0, 2], [-1, 4]):
        with pytest.raises(ValueError):
            ss.new_shift_system(bad)
    with pytest.raises(ValueError):
        ss.parse_shifts("1,x")
    assert ss.parse_shifts("2, 3,7").a == (2, 3, 7)


@given(shift_sets)
def test_primorial_property(a):
    A = ss.new_shift_system(a)
    assert A.w == _w(a)
    assert all(p * p <= A.span for p in A.w_primes)


def test_nu_examples():
    assert ss.nu(ss.new_shift_system([1, 5]), 2, 2) == 1
    assert ss.nu(ss.new_shift_system([1, 2]), 2, 2) == 2
    assert ss.nu(ss.new_shift_system([1, 2]), 101, 2) == 2
    assert ss.nu_star(ss.new_shift_system([1, 2]), 2, 2) == 1
    assert ss.nu_star(ss.new_shift_system([1, 3]), 2, 2) == 2
    assert ss.nu_star(ss.new_shift_system([2, 4]), 2, 2) == 0
    with pytest.raises(ValueError):
        ss.nu(ss.new_shift_system([1, 2]), 4, 2)


@given(shift_sets, st.sampled_from([2, 3, 5, 7, 11]), st.integers(1, 3))
def test_nu_counts_match_enumeration(a, p, r):
    A = ss.new_shift_system(a)
    m = p ** r
    assert ss.nu(A, p, r) == len(oracle.residues(a, m))
    assert ss.nu_star(A, p, r) == len(oracle.residues(a, m) & oracle.reduced_residues(m))
    if m > A.span:
        assert ss.nu(A, p, r) == A.s
        assert ss.nu_star(A, p, r) == sum(v % p != 0 for v in a)


@given(shift_sets, st.sampled_from([2, 3, 5, 7]), st.integers(1, 3))
def test_nu_star_sign_convention(a, p, r):
    # counting classes of -a_i instead of a_i gives the same number
    m = p ** r
    negated = {(-v) % m for v in a} & oracle.reduced_residues(m)
    assert ss.nu_star(ss.new_shift_system(a), p, r) == len(negated)


def test_admissibility_examples():
    assert not ss.is_admissible(ss.new_shift_system([1, 3]))
    assert ss.is_admissible(ss.new_shift_system([1, 2]))
    assert ss.is_admissible(ss.new_shift_system([2, 4]))
    # covers 1, 3 mod 4 and 1, 2, 4, 5, 7, 8 mod 9
    assert not ss.is_admissible(ss.new_shift_system([1, 2, 4, 5, 7, 8]))


@given(st.lists(st.integers(1, 200), min_size=2, max_size=9, unique=True))
@settings(max_examples=200)
def test_admissibility_against_all_small_primes(a):
    expected = all(not oracle.reduced_residues(p * p) <= oracle.residues(a, p * p)
                   for p in oracle.primes_upto(20))
    assert ss.is_admissible(ss.new_shift_system(a)) == expected


def test_mu_w_examples():
    A = ss.new_shift_system([1, 5])  # w = 2
    assert ss.mu_w(A, 12) == 0
    assert ss.mu_w(A, 6) == -1
    assert ss.mu_w(A, 15) == 1
    assert ss.mu_tilde(A, 12) == -1
    assert ss.mu_tilde(A, 8) == 1
    B = ss.new_shift_system([1, 2])
    assert all(ss.mu_w(B, n) == 1 and ss.mu_tilde(B, n) == oracle.mu(n) for n in range(1, 200))


@pytest.mark.parametrize("a", SYSTEMS)
def test_mobius_factorises(a):
    A = ss.new_shift_system(a)
    from sqfree_lab.arith_core import build_sieve

    mu = build_sieve(1, 10 ** 5).mu
    for n in range(1, 10 ** 5 + 1, 7):
        assert ss.mu_w(A, n) * ss.mu_tilde(A, n) == mu[n - 1]


@pytest.mark.parametrize("a", SYSTEMS)
def test_mu_tilde_square_is_coprime_divisor_sum(a):
    A = ss.new_shift_system(a)
    for n in range(1, 20000, 3):
        rhs = sum(oracle.mu(d) for d in range(1, math.isqrt(n) + 1)
                  if n % (d * d) == 0 and math.gcd(d, A.w) == 1)
        assert ss.mu_tilde(A, n) ** 2 == rhs


@given(st.sampled_from(SYSTEMS), st.integers(1, 10 ** 6), st.integers(0, 50))
def test_mu_w_depends_on_class_mod_w_squared(a, n, j):
    A = ss.new_shift_system(a)
    assert ss.mu_w(A, n) ** 2 == ss.mu_w(A, n + j * A.w ** 2) ** 2


@given(st.sampled_from(SYSTEMS), st.integers(0, 10 ** 6))
def test_f_periodic_and_direct(a, t):
    A = ss.new_shift_system(a)
    direct = int(all(ss.mu_w(A, t + v) != 0 for v in a))
    assert ss.f(A, t) == direct
    assert ss.f(A, t) == ss.f(A, t + A.w ** 2)


def test_f_examples():
    A = ss.new_shift_system([1, 5])
    assert ss.f(A, 3) == 0
    assert ss.f(A, 1) == 1
    assert all(ss.f(ss.new_shift_system([1, 2]), t) == 1 for t in range(50))


@pytest.mark.parametrize("a", SYSTEMS)
def test_coprime_square_divisors_are_pairwise_coprime(a):
    A = ss.new_shift_system(a)
    rng = random.Random(7)
    for _ in range(400):
        n = rng.randrange(1, 10 ** 7)
        ds = [[d for d, _ in ss.squarefree_root_divisors(n + v, A.w)] for v in a]
        for i in range(len(a)):
            for j in range(i + 1, len(a)):
                assert all(math.gcd(x, y) == 1 for x in ds[i] for y in ds[j])


@given(st.integers(1, 10 ** 6), st.sampled_from([1, 2, 6, 30]))
def test_root_divisor_enumeration(m, w):
    got = sorted(ss.squarefree_root_divisors(m, w))
    want = sorted((d, oracle.mu(d)) for d in range(1, math.isqrt(m) + 1)
                  if m % (d * d) == 0 and oracle.mu(d) and math.gcd(d, w) == 1)
    assert got == want
