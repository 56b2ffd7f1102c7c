"""High-precision arithmetic on alpha mod 1 and the qualifying-prime search.

Every irrational is reduced to a fixed-point approximation N / 2^B with a
known integer error radius, so ||alpha * p + beta|| is obtained by one
integer multiply and a reduction mod 2^B.  Quadratic surds can be expanded
to any precision; digit streams and bit strings carry the precision they
were given and raise :class:`PrecisionError` when asked for more.
"""

from __future__ import annotations

import math
import os
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import islice
from typing import Iterable, Iterator, Sequence

import mpmath
import numpy as np

from .arith_core import build_sieve, split_range
from .errors import PrecisionError
from .shift_system import ShiftSystem, is_admissible

MIN_BITS = 96
MAX_BITS = 256
# Absolute error target for frac_norm.
TARGET_ERROR_BITS = 80
SEARCH_CHUNK = 1 << 22


def default_bits() -> int:
    """Working precision, overridable with SQFREE_PRECISION_BITS."""
    bits = int(os.environ.get("SQFREE_PRECISION_BITS", "128"))
    if not MIN_BITS <= bits <= MAX_BITS:
        raise ValueError(f"SQFREE_PRECISION_BITS must lie in [{MIN_BITS}, {MAX_BITS}]")
    return bits


# ---------------------------------------------------------------------------
# irrational specifications


class IrrationalSpec:
    """Base class: a real number known through fixed-point approximations."""

    def fixed(self, bits: int) -> tuple[int, int]:
        """(N, err) with |alpha * 2^bits - N| <= err."""
        raise NotImplementedError

    def digits(self) -> Iterator[int]:
        """Continued-fraction partial quotients that are certified correct."""
        raise NotImplementedError

    @property
    def max_bits(self) -> int:
        return MAX_BITS

    def __float__(self) -> float:
        n, _ = self.fixed(64)
        return n / 2.0 ** 64


@dataclass(frozen=True)
class QuadraticSurd(IrrationalSpec):
    """alpha = (p + sqrt(d)) / q with d > 0 not a perfect square."""

    p: int
    q: int
    d: int

    def __post_init__(self):
        if self.q == 0:
            raise ValueError("surd denominator must be non-zero")
        if self.d <= 0 or math.isqrt(self.d) ** 2 == self.d:
            raise ValueError(f"d={self.d} must be a positive non-square")

    def fixed(self, bits):
        root = math.isqrt(self.d << (2 * bits))  # floor(sqrt(d) * 2^bits)
        top = self.p << bits
        if self.q > 0:
            n = (top + root) // self.q
        else:
            n = (-top - root - 1) // (-self.q)
        return n, 2

    def digits(self):
        # normalise so that Q divides D - P^2
        P, Q, D = self.p, self.q, self.d
        if (D - P * P) % Q:
            P, Q, D = P * abs(Q), Q * abs(Q), D * Q * Q
        r = math.isqrt(D)
        while True:
            a = (P + r) // Q if Q > 0 else _floor_surd(P, Q, r)
            yield a
            P = a * Q - P
            Q = (D - P * P) // Q


def _floor_surd(P: int, Q: int, r: int) -> int:
    # floor((P + sqrt(D)) / Q) for Q < 0, r = isqrt(D), D non-square
    return (-P - r - 1) // (-Q)


@dataclass(frozen=True)
class ContinuedFractionDigits(IrrationalSpec):
    """alpha given by a finite prefix [d0; d1, ..., d_{n-1}] of its expansion."""

    terms: tuple[int, ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("empty digit stream")
        if any(t < 1 for t in self.terms[1:]):
            raise ValueError("partial quotients after the first must be >= 1")
        object.__setattr__(self, "terms", tuple(int(t) for t in self.terms))

    def _bracket(self) -> tuple[Fraction, Fraction]:
        (p1, q1), (p2, q2) = _last_two(self.terms)
        # alpha = (p1 x + p2)/(q1 x + q2) with x in (1, inf)
        return Fraction(p1, q1), Fraction(p1 + p2, q1 + q2)

    @property
    def max_bits(self) -> int:
        lo, hi = self._bracket()
        width = abs(hi - lo)
        return min(MAX_BITS, int(-math.log2(width)) if width else MAX_BITS)

    def fixed(self, bits):
        lo, hi = self._bracket()
        mid = (lo + hi) / 2
        scale = 1 << bits
        n = math.floor(mid * scale)
        err = math.ceil(abs(hi - lo) / 2 * scale) + 1
        return n, err

    def digits(self):
        return iter(self.terms)


@dataclass(frozen=True)
class FractionalBits(IrrationalSpec):
    """alpha in [0, 1) known to ``nbits`` fractional bits: value / 2^nbits."""

    value: int
    nbits: int

    def __post_init__(self):
        if self.nbits < MIN_BITS:
            raise ValueError(f"need at least {MIN_BITS} fractional bits, got {self.nbits}")
        if not 0 <= self.value < (1 << self.nbits):
            raise ValueError("bit string value out of range")

    @property
    def max_bits(self) -> int:
        return self.nbits

    def fixed(self, bits):
        if bits <= self.nbits:
            return self.value >> (self.nbits - bits), 1
        return self.value << (bits - self.nbits), 1 << (bits - self.nbits)

    def digits(self):
        lo = Fraction(self.value, 1 << self.nbits)
        hi = Fraction(self.value + 1, 1 << self.nbits)
        a, b = _cf_of_fraction(lo), _cf_of_fraction(hi)
        for i in range(min(len(a), len(b)) - 1):
            if a[i] != b[i]:
                return
            yield a[i]


@dataclass(frozen=True)
class RationalValue(IrrationalSpec):
    """Exact rational stand-in, used to exercise degenerate cases in tests."""

    value: Fraction

    def fixed(self, bits):
        return math.floor(self.value * (1 << bits)), 1

    def digits(self):
        return iter(_cf_of_fraction(self.value))


def _cf_of_fraction(x: Fraction) -> list[int]:
    out = []
    num, den = x.numerator, x.denominator
    while den:
        a, rem = divmod(num, den)
        out.append(a)
        num, den = den, rem
    return out


def _last_two(terms: Sequence[int]) -> tuple[tuple[int, int], tuple[int, int]]:
    p1, q1, p2, q2 = 1, 0, 0, 1
    for t in terms:
        p1, q1, p2, q2 = t * p1 + p2, t * q1 + q2, p1, q1
    return (p1, q1), (p2, q2)


def sqrt_spec(d: int) -> QuadraticSurd:
    return QuadraticSurd(0, 1, d)


def golden_ratio() -> QuadraticSurd:
    return QuadraticSurd(1, 2, 5)


def parse_alpha(text: str) -> IrrationalSpec:
    """Parse ``sqrt:D``, ``surd:p,q,D``, ``golden``, ``cf:d0,d1,...``, ``bits:<hex>`` or ``rat:a/q``."""
    if text == "golden":
        return golden_ratio()
    kind, _, body = text.partition(":")
    try:
        if kind == "sqrt":
            return sqrt_spec(int(body))
        if kind == "surd":
            p, q, d = (int(v) for v in body.split(","))
            return QuadraticSurd(p, q, d)
        if kind == "cf":
            return ContinuedFractionDigits(tuple(int(v) for v in body.split(",")))
        if kind == "bits":
            hexstr = body.lower().removeprefix("0x")
            if not re.fullmatch(r"[0-9a-f]+", hexstr):
                raise ValueError("bad hex digits")
            return FractionalBits(int(hexstr, 16), 4 * len(hexstr))
        if kind == "rat":
            return RationalValue(Fraction(body))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed alpha spec {text!r}: {exc}") from exc
    raise ValueError(f"unknown alpha spec {text!r}")


def parse_beta(text: str | float | Fraction) -> Fraction:
    """beta as an exact rational from a decimal, ``p/q`` or a number."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, (int, float)):
        return Fraction(text)
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed beta {text!r}") from exc


# ---------------------------------------------------------------------------
# convergents


@dataclass(frozen=True)
class Convergent:
    a: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("convergent denominator must be >= 1")
        if math.gcd(self.a, self.q) != 1:
            raise ValueError(f"{self.a}/{self.q} not in lowest terms")

    def __str__(self) -> str:
        return f"{self.a}/{self.q}"


def iter_convergents(alpha: IrrationalSpec) -> Iterator[Convergent]:
    p1, q1, p2, q2 = 1, 0, 0, 1
    for t in alpha.digits():
        p1, q1, p2, q2 = t * p1 + p2, t * q1 + q2, p1, q1
        yield Convergent(p1, q1)


def convergents(alpha: IrrationalSpec, n: int) -> list[Convergent]:
    """The first n convergents of alpha."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = list(islice(iter_convergents(alpha), n))
    if len(out) < n:
        raise PrecisionError(f"digit stream exhausted after {len(out)} convergents")
    return out


def convergent_near(alpha: IrrationalSpec, target: float) -> Convergent:
    """The convergent with the largest denominator q <= max(target, 1)."""
    best = None
    for c in iter_convergents(alpha):
        if c.q > max(target, 1):
            break
        best = c
    if best is None:
        raise PrecisionError("no convergent available")
    return best


# ---------------------------------------------------------------------------
# distance to the nearest integer


def _fixed_at(alpha: IrrationalSpec, bits: int) -> tuple[int, int]:
    if bits > alpha.max_bits:
        raise PrecisionError(f"alpha carries only {alpha.max_bits} bits, {bits} requested")
    return alpha.fixed(bits)


def _bits_for(alpha: IrrationalSpec, pmax: int, bits: int | None) -> int:
    """Smallest working precision keeping the error of alpha*p below 2^-80."""
    bits = default_bits() if bits is None else bits
    bits = min(bits, alpha.max_bits)
    while True:
        _, err = alpha.fixed(bits)
        if (err * pmax + 2) < (1 << (bits - TARGET_ERROR_BITS)):
            return bits
        if bits >= min(MAX_BITS, alpha.max_bits):
            raise PrecisionError(
                f"cannot reach 2^-{TARGET_ERROR_BITS} accuracy for p={pmax} within {alpha.max_bits} bits"
            )
        bits = min(bits + 32, MAX_BITS, alpha.max_bits)


def _norm_fixed(alpha_n: int, beta: Fraction, p: int, bits: int) -> int:
    scale = 1 << bits
    v = (alpha_n * p + (beta.numerator << bits) // beta.denominator) % scale
    return min(v, scale - v)


def frac_norm(alpha: IrrationalSpec, p: int, beta=Fraction(0), bits: int | None = None) -> float:
    """||alpha * p + beta|| with absolute error below 2^-80."""
    if p < 1:
        raise ValueError("p must be >= 1")
    beta = parse_beta(beta)
    if isinstance(alpha, RationalValue):
        v = (alpha.value * p + beta) % 1
        return float(min(v, 1 - v))
    b = _bits_for(alpha, p, bits)
    n, _ = alpha.fixed(b)
    return _norm_fixed(n, beta, p, b) / 2.0 ** b


def frac_parts(alpha: IrrationalSpec, ns: Iterable[int], bits: int | None = None) -> np.ndarray:
    """frac(alpha * n) as float64 for every n, reduced exactly before rounding."""
    ns = [int(v) for v in ns]
    if not ns:
        return np.zeros(0)
    if isinstance(alpha, RationalValue):
        return np.array([float((alpha.value * n) % 1) for n in ns])
    b = _bits_for(alpha, max(abs(v) for v in ns) or 1, bits)
    a_n, _ = alpha.fixed(b)
    mask = (1 << b) - 1
    shift = b - 53
    return np.array([((a_n * n) & mask) >> shift for n in ns], dtype=np.float64) / 2.0 ** 53


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class SearchParams:
    theta: float
    x: float
    delta: float
    K: float

    @property
    def k_max(self) -> int:
        return int(math.floor(self.K))


def params_for(x: float, theta: float) -> SearchParams:
    """Delta = x^-theta and K = Delta^-1 (ln x)^2."""
    if x < math.e:
        raise ValueError("x must be >= e")
    if not 0 < theta < 1:
        raise ValueError(f"theta={theta} outside (0, 1)")
    if theta >= 0.1:
        warnings.warn(f"theta={theta} >= 1/10: no guarantee of infinitely many primes", stacklevel=2)
    delta = x ** -theta
    return SearchParams(theta, x, delta, math.log(x) ** 2 / delta)


def x_schedule(q_list: Sequence[int]) -> list[int]:
    """x_j = round(q_j^(20/7)) for an increasing list of denominators >= 2."""
    qs = [int(q) for q in q_list]
    if any(q < 2 for q in qs):
        raise ValueError("denominators must be >= 2")
    if any(a >= b for a, b in zip(qs, qs[1:])):
        raise ValueError("denominators must be strictly increasing")
    xs = [round(q ** (20 / 7)) for q in qs]
    if any(a >= b for a, b in zip(xs, xs[1:])):
        raise ValueError("schedule is not strictly increasing")
    return xs


# ---------------------------------------------------------------------------
# search


def _below_threshold(dist_fixed: int, bits: int, p: int, theta: float) -> bool:
    """Strict test dist < p^-theta, escalating to 256-bit arithmetic near ties."""
    if theta == 0:
        return True
    dist = dist_fixed / 2.0 ** bits
    thr = p ** -theta
    if abs(dist - thr) > 1e-12 * thr + 2.0 ** -TARGET_ERROR_BITS:
        return dist < thr
    with mpmath.workprec(MAX_BITS):
        exact = mpmath.mpf(dist_fixed) / mpmath.mpf(2) ** bits
        return exact < mpmath.power(p, -mpmath.mpf(theta))


def _squarefree_primes(lo: int, hi: int, A: ShiftSystem, shards: int) -> list[int]:
    out: list[int] = []
    for a, b in split_range(lo + 1, hi, shards):
        for c, d in split_range(a, b, max(1, -(-(b - a + 1) // SEARCH_CHUNK))):
            table = build_sieve(c, d + A.a[-1])
            ns = np.arange(c, d + 1, dtype=np.int64)
            keep = table.is_prime[: d - c + 1].copy()
            for v in A.a:
                keep &= table.mu[v: v + d - c + 1] != 0
            out.extend(ns[keep].tolist())
    return out


def search_primes(
    lo: int,
    hi: int,
    alpha: IrrationalSpec,
    beta,
    theta: float,
    A: ShiftSystem,
    shards: int = 1,
    bits: int | None = None,
) -> list[int]:
    """Primes p in (lo, hi] with ||alpha p + beta|| < p^-theta and every p + a_i square-free."""
    if lo < 0 or lo >= hi:
        raise ValueError(f"need 0 <= lo < hi, got ({lo}, {hi}]")
    if theta < 0:
        raise ValueError("theta must be >= 0")
    if not is_admissible(A):
        warnings.warn(f"shift system {A} is not admissible: expected density 0", stacklevel=2)
    beta = parse_beta(beta)
    candidates = _squarefree_primes(lo, hi, A, shards)
    if not candidates or theta == 0:
        return candidates
    if isinstance(alpha, RationalValue):
        return [p for p in candidates if frac_norm(alpha, p, beta) < p ** -theta]
    b = _bits_for(alpha, candidates[-1], bits)
    n, _ = alpha.fixed(b)
    return [p for p in candidates if _below_threshold(_norm_fixed(n, beta, p, b), b, p, theta)]
