"""Slow, obviously-correct reference implementations used only by the tests.

Nothing here imports the package under test.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from itertools import product

import mpmath


def factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


def primes_upto(n: int) -> list[int]:
    return [p for p in range(2, n + 1) if is_prime(p)]


def mu(n: int) -> int:
    fac = factor(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return (-1) ** len(fac)


def squarefree(n: int) -> bool:
    return all(n % (d * d) for d in range(2, math.isqrt(n) + 1))


def rfree(n: int, r: int) -> bool:
    d = 2
    while d ** r <= n:
        if n % d ** r == 0:
            return False
        d += 1
    return True


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def tau_k(n: int, k: int) -> int:
    """Count ordered k-tuples with product n by recursion over divisors."""
    if k == 1:
        return 1
    return sum(tau_k(n // d, k - 1) for d in divisors(n))


def von_mangoldt(n: int) -> float:
    fac = factor(n)
    return math.log(next(iter(fac))) if len(fac) == 1 else 0.0


def residues(a, m: int) -> set[int]:
    return {v % m for v in a}


def reduced_residues(m: int) -> set[int]:
    return {v for v in range(m) if math.gcd(v, m) == 1}


def mirsky_count(x: int, a, r: int) -> int:
    return sum(all(rfree(n + v, r) for v in a) for n in range(1, x + 1))


def changa_count(x: int, a, r: int) -> int:
    return sum(all(rfree(p + v, r) for v in a) for p in primes_upto(x))


def dist_to_int(value) -> float:
    """||value|| for an mpmath number."""
    frac = value - mpmath.floor(value)
    return float(min(frac, 1 - frac))


def ap_sum(X: int, a: int, d: int, gamma: float) -> complex:
    return sum(cmath.exp(2j * math.pi * gamma * n) for n in range(a, X + 1, d))


def hb_rhs(n: int, z: int, J: int) -> float:
    """Heath-Brown right-hand side by enumerating all factorisations of n."""
    divs = divisors(n)
    total = 0.0
    for j in range(1, J + 1):
        coeff = (-1) ** (j - 1) * math.comb(J, j)
        for ms in product([d for d in divs if d <= z], repeat=j):
            m = math.prod(ms)
            if n % m:
                continue
            weight = math.prod(mu(v) for v in ms)
            if not weight:
                continue
            rest = n // m
            # n_1 ... n_j = rest with weight log n_1; the other j-1 factors are free
            for n1 in divisors(rest):
                free = tau_k(rest // n1, j - 1) if j > 1 else int(n1 == rest)
                total += coeff * weight * free * math.log(n1)
    return total


def triangle(t: float, delta: float) -> float:
    u = abs(t - round(t))
    return max(0.0, 1.0 - u / delta)


def euler_partial(factor_fn, primes) -> Fraction:
    out = Fraction(1)
    for p in primes:
        out *= factor_fn(p)
    return out
