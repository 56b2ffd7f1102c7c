"""The shift set a_1 < ... < a_s and the structure hanging off it.

``w`` is the product of the primes up to sqrt(a_s - a_1).  It splits the
Mobius function as mu(n) = mu_w(n) * mu_tilde(n), where mu_w sees only the
primes dividing w.  Residue counts ``nu``/``nu_star`` feed the Euler
products in :mod:`sqfree_lab.singular_series`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .arith_core import base_primes, factorize, is_prime, mobius, nu_p


@dataclass(frozen=True)
class ShiftSystem:
    a: tuple[int, ...]
    w: int = field(init=False)
    w_primes: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        a = tuple(int(v) for v in self.a)
        if len(a) < 2:
            raise ValueError("a shift system needs at least 2 entries")
        if any(v <= 0 for v in a):
            raise ValueError("shifts must be positive")
        if any(x >= y for x, y in zip(a, a[1:])):
            raise ValueError("shifts must be strictly increasing")
        object.__setattr__(self, "a", a)
        primes = tuple(base_primes(math.isqrt(a[-1] - a[0])).tolist())
        object.__setattr__(self, "w_primes", primes)
        object.__setattr__(self, "w", math.prod(primes))

    @property
    def s(self) -> int:
        return len(self.a)

    @property
    def span(self) -> int:
        return self.a[-1] - self.a[0]

    @cached_property
    def _f_table(self) -> tuple[int, ...]:
        m = self.w * self.w
        return tuple(_f_direct(self, t) for t in range(m))

    def __str__(self) -> str:
        return ",".join(map(str, self.a))


def new_shift_system(values: Iterable[int]) -> ShiftSystem:
    """Validate, sort and wrap a list of shifts; duplicates are rejected."""
    vals = [int(v) for v in values]
    if len(set(vals)) != len(vals):
        raise ValueError(f"duplicate shifts in {vals}")
    return ShiftSystem(tuple(sorted(vals)))


def parse_shifts(text: str) -> ShiftSystem:
    """Parse the comma-separated CLI form, e.g. ``"1,2"``."""
    try:
        vals = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValueError(f"malformed shift list {text!r}") from exc
    return new_shift_system(vals)


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


def nu(A: ShiftSystem, p: int, r: int) -> int:
    """Number of distinct classes a_i mod p^r."""
    _check_prime(p)
    m = p ** r
    return len({v % m for v in A.a})


def nu_star(A: ShiftSystem, p: int, r: int) -> int:
    """Number of distinct classes a_i mod p^r with p not dividing a_i."""
    _check_prime(p)
    m = p ** r
    return len({v % m for v in A.a if v % p})


def is_admissible(A: ShiftSystem) -> bool:
    """True when no p^2 has all of its reduced residues among the a_i.

    Only p with p(p-1) <= s can fail: s classes cannot cover phi(p^2) > s.
    """
    p = 2
    while p * (p - 1) <= A.s:
        if is_prime(p) and nu_star(A, p, 2) == p * (p - 1):
            return False
        p += 1
    return True


def mu_w(A: ShiftSystem, n: int) -> int:
    """Mobius value of the part of n supported on primes dividing w."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = 0
    for p in A.w_primes:
        e = nu_p(n, p)
        if e > 1:
            return 0
        k += e
    return -1 if k % 2 else 1


def mu_tilde(A: ShiftSystem, n: int) -> int:
    """Mobius value of the part of n coprime to w."""
    if n < 1:
        raise ValueError("n must be >= 1")
    for p in A.w_primes:
        while n % p == 0:
            n //= p
    return mobius(n)


def _f_direct(A: ShiftSystem, t: int) -> int:
    for v in A.a:
        m = t + v
        for p in A.w_primes:
            if m % (p * p) == 0:
                return 0
    return 1


def f(A: ShiftSystem, t: int) -> int:
    """1 iff every w-part of t + a_i is square-free; periodic mod w^2."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return A._f_table[t % (A.w * A.w)]


def squarefree_root_divisors(m: int, coprime_to: int = 1) -> list[tuple[int, int]]:
    """All (d, mu(d)) with d square-free, d^2 | m and gcd(d, coprime_to) = 1."""
    base = [p for p, e in factorize(m).items() if e >= 2 and coprime_to % p]
    out = [(1, 1)]
    for p in base:
        out += [(d * p, -s) for d, s in out]
    return out
