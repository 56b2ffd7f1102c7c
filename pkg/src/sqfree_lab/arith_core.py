"""Segmented sieving and the arithmetic functions everything else is built on.

Array-valued work (Mobius values, smallest prime factors, r-free masks) goes
through a numpy segmented sieve of Eratosthenes; single-integer queries
(``mu_r``, ``tau_k``, ``nu_p``...) factor by trial division.

Conventions at n = 1: mu(1) = 1, Lambda(1) = 0, tau_k(1) = 1, mu_r(1) = 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import BudgetError

DEFAULT_SEGMENT = 1 << 20
# Per-table entry budget for a full SieveTable (about 18 bytes per entry).
MAX_TABLE_ENTRIES = 1 << 24
# Largest base-prime sieve we are willing to build (covers hi up to ~2^54).
MAX_BASE_LIMIT = 1 << 27
INT64_MAX = (1 << 63) - 1


@lru_cache(maxsize=8)
def _primes_upto(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p::2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def base_primes(limit: int) -> np.ndarray:
    """Primes <= limit as an int64 array (cached for the common limits)."""
    if limit > MAX_BASE_LIMIT:
        raise BudgetError(f"base prime table up to {limit} exceeds budget {MAX_BASE_LIMIT}")
    # round up to a power of two so nearby requests share one cache entry
    cap = 1 << max(4, int(limit).bit_length())
    cap = min(cap, MAX_BASE_LIMIT)
    primes = _primes_upto(max(cap, limit))
    return primes[: np.searchsorted(primes, limit, side="right")]


@dataclass(frozen=True)
class SieveTable:
    """Per-integer arithmetic records for every n in [lo, hi].

    Attributes:
        lo, hi: inclusive bounds.
        spf: smallest prime factor (spf[1] = 1).
        mu: Mobius function values in {-1, 0, 1}.
        is_prime: prime flags.
        lam_prime: p when n = p^k (k >= 1), else 0; the support of Lambda.
    """

    lo: int
    hi: int
    spf: np.ndarray
    mu: np.ndarray
    is_prime: np.ndarray
    lam_prime: np.ndarray

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)

    def _idx(self, n: int) -> int:
        if not self.lo <= n <= self.hi:
            raise IndexError(f"{n} outside [{self.lo}, {self.hi}]")
        return n - self.lo

    def mobius(self, n: int) -> int:
        return int(self.mu[self._idx(n)])

    def prime(self, n: int) -> bool:
        return bool(self.is_prime[self._idx(n)])

    def lambda_pair(self, n: int) -> tuple[int, int] | None:
        """(p, k) with n = p^k, or None when Lambda(n) = 0."""
        p = int(self.lam_prime[self._idx(n)])
        if p == 0:
            return None
        return p, nu_p(n, p)

    def lambda_log(self) -> np.ndarray:
        """Lambda(n) as float64 for the whole table."""
        out = np.zeros(len(self), dtype=np.float64)
        nz = self.lam_prime > 0
        out[nz] = np.log(self.lam_prime[nz].astype(np.float64))
        return out

    def squarefree(self) -> np.ndarray:
        return self.mu != 0

    def records(self, n: int) -> tuple[int, int, bool, int]:
        i = self._idx(n)
        return (int(self.spf[i]), int(self.mu[i]), bool(self.is_prime[i]), int(self.lam_prime[i]))


def _sieve_segment(lo: int, hi: int, primes: np.ndarray):
    size = hi - lo + 1
    n = np.arange(lo, hi + 1, dtype=np.int64)
    mu = np.ones(size, dtype=np.int8)
    prod = np.ones(size, dtype=np.int64)
    spf = np.zeros(size, dtype=np.int64)
    for p in primes.tolist():
        pp = p * p
        if pp > hi:
            break
        start = (-lo) % p
        mu[start::p] *= -1
        prod[start::p] *= p
        view = spf[start::p]
        view[view == 0] = p
        mu[(-lo) % pp::pp] = 0
    # at most one prime factor above sqrt(hi) survives the small-prime pass
    mu[prod != n] *= -1
    unset = spf == 0
    spf[unset] = n[unset]
    is_prime = (spf == n) & (n >= 2)
    lam = np.where(is_prime, n, 0)
    for p in primes.tolist():
        pk = p * p
        if pk > hi:
            break
        while pk <= hi:
            if pk >= lo:
                lam[pk - lo] = p
            pk *= p
    return spf, mu, is_prime, lam


def _check_range(lo: int, hi: int) -> None:
    if lo < 1:
        raise ValueError("lo must be >= 1")
    if lo >= hi:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    if hi > INT64_MAX:
        raise ValueError("hi must fit in a signed 64-bit integer")


def split_range(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    """Split [lo, hi] into ``parts`` contiguous inclusive pieces (fewer if short)."""
    parts = max(1, min(parts, hi - lo + 1))
    step, extra = divmod(hi - lo + 1, parts)
    out, a = [], lo
    for i in range(parts):
        b = a + step + (1 if i < extra else 0) - 1
        out.append((a, b))
        a = b + 1
    return out


def _segments(lo: int, hi: int, size: int) -> Iterator[tuple[int, int]]:
    a = lo
    while a <= hi:
        b = min(hi, a + size - 1)
        yield a, b
        a = b + 1


def build_sieve(
    lo: int,
    hi: int,
    segment_size: int = DEFAULT_SEGMENT,
    shards: int = 1,
    max_entries: int = MAX_TABLE_ENTRIES,
) -> SieveTable:
    """Sieve [lo, hi] and return its immutable table.

    The range is cut into ``shards`` pieces, each sieved segment by segment;
    the records do not depend on either partition.
    """
    _check_range(lo, hi)
    if hi - lo + 1 > max_entries:
        raise BudgetError(f"range of {hi - lo + 1} entries exceeds table budget {max_entries}")
    primes = base_primes(math.isqrt(hi))
    pieces = [seg for a, b in split_range(lo, hi, shards) for seg in _segments(a, b, segment_size)]
    if shards > 1:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            parts = list(pool.map(lambda ab: _sieve_segment(ab[0], ab[1], primes), pieces))
    else:
        parts = [_sieve_segment(a, b, primes) for a, b in pieces]
    arrays = [np.concatenate([part[i] for part in parts]) for i in range(4)]
    for arr in arrays:
        arr.setflags(write=False)
    spf, mu, is_prime, lam = arrays
    return SieveTable(lo, hi, spf, mu, is_prime, lam)


def rfree_segments(lo: int, hi: int, r: int = 2, segment_size: int = DEFAULT_SEGMENT) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start, mask) pairs where mask[i] says whether start + i is r-free."""
    if r < 2:
        raise ValueError("r must be >= 2")
    if lo < 1 or lo > hi:
        raise ValueError(f"bad range [{lo}, {hi}]")
    primes = base_primes(math.isqrt(hi) if r == 2 else int(hi ** (1.0 / r)) + 1).tolist()
    powers = [p ** r for p in primes if p ** r <= hi]
    for a, b in _segments(lo, hi, segment_size):
        mask = np.ones(b - a + 1, dtype=bool)
        for q in powers:
            if q > b:
                break
            mask[(-a) % q::q] = False
        yield a, mask


def rfree_mask(lo: int, hi: int, r: int = 2) -> np.ndarray:
    """Boolean r-free indicator over [lo, hi] as one array."""
    return np.concatenate([m for _, m in rfree_segments(lo, hi, r)])


def count_rfree(lo: int, hi: int, r: int = 2, shards: int = 1, segment_size: int = DEFAULT_SEGMENT) -> int:
    """Number of r-free integers in [lo, hi], streamed segment by segment."""
    def work(ab):
        return sum(int(np.count_nonzero(m)) for _, m in rfree_segments(ab[0], ab[1], r, segment_size))

    pieces = split_range(lo, hi, shards)
    if shards > 1:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            return sum(pool.map(work, pieces))
    return sum(map(work, pieces))


# ---------------------------------------------------------------------------
# single-integer functions


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (exact for n < 3.3e24)."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f, step = 5, 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += step
        step = 6 - step
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def mu_r(n: int, r: int) -> int:
    """Indicator of r-free integers."""
    if r < 2:
        raise ValueError("r must be >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    return int(all(e < r for e in factorize(n).values()))


def tau_k(n: int, k: int) -> int:
    """Number of ordered k-tuples of positive integers with product n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    out = 1
    for e in factorize(n).values():
        out *= math.comb(e + k - 1, k - 1)
    return out


def von_mangoldt_pair(n: int) -> tuple[int, int] | None:
    """(p, k) when n = p^k with k >= 1, otherwise None."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return None
    fac = factorize(n)
    if len(fac) != 1:
        return None
    ((p, k),) = fac.items()
    return p, k


def von_mangoldt(n: int) -> float:
    pair = von_mangoldt_pair(n)
    return math.log(pair[0]) if pair else 0.0


def nu_p(n: int, p: int) -> int:
    """Exponent of the prime p in n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


_PI_CACHE: dict[str, np.ndarray] = {}
PI_TABLE_MAX = 1 << 25


def prime_pi_table(limit: int) -> np.ndarray:
    """Cumulative prime counts: table[x] = pi(x) for 0 <= x <= limit."""
    table = _PI_CACHE.get("pi")
    if table is None or len(table) <= limit:
        if limit > PI_TABLE_MAX:
            raise BudgetError(f"pi table up to {limit} exceeds {PI_TABLE_MAX}")
        size = min(PI_TABLE_MAX, max(limit, 1 << 16) * 2)
        flags = np.zeros(size + 1, dtype=np.int32)
        flags[_primes_upto(size)] = 1
        table = np.cumsum(flags, dtype=np.int32)
        table.setflags(write=False)
        _PI_CACHE["pi"] = table
    return table[: limit + 1]


def prime_pi(x: int) -> int:
    """Number of primes <= x."""
    x = int(x)
    if x < 2:
        return 0
    if x <= PI_TABLE_MAX:
        return int(prime_pi_table(x)[x])
    total = int(prime_pi_table(PI_TABLE_MAX)[-1])
    primes = base_primes(math.isqrt(x))
    for a, b in _segments(PI_TABLE_MAX + 1, x, DEFAULT_SEGMENT):
        flags = np.ones(b - a + 1, dtype=bool)
        for p in primes.tolist():
            if p * p > b:
                break
            start = max(p * p, ((a + p - 1) // p) * p)
            flags[start - a::p] = False
        total += int(np.count_nonzero(flags))
    return total
