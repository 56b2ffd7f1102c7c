"""Two-sided enclosures of the Euler products attached to a shift system.

Mirsky product:  prod_p (1 - nu(p^r) / p^r)
Changa product:  prod_p (1 - nu*(p^2) / (p(p-1)))

Factors up to the cutoff P are multiplied exactly (P <= 1000) or in
outward-rounded floating point.  Beyond P every factor equals 1 - s*c_p with
0 < c_p, and prod(1 - s*c_p) >= 1 - s*sum(c_p), which gives the tail bracket
[1 - s*T(P), 1] with

    sum_{p>P} 1/(p(p-1)) < sum_{n>P} 1/(n(n-1)) = 1/P
    sum_{p>P} p^-r       < P^(1-r) / (r-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .arith_core import base_primes
from .shift_system import ShiftSystem, nu, nu_star

EXACT_CUTOFF = 1000


@dataclass(frozen=True)
class SeriesEnclosure:
    lower: float
    upper: float
    cutoff: int
    exact_zero: bool

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def as_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "P": self.cutoff, "exact_zero": self.exact_zero}


def _down(v: float) -> float:
    return math.nextafter(v, -math.inf)


def _up(v: float) -> float:
    return math.nextafter(v, math.inf)


def _frac_down(q: Fraction) -> float:
    v = float(q)
    return v if Fraction(v) <= q else _down(v)


def _frac_up(q: Fraction) -> float:
    v = float(q)
    return v if Fraction(v) >= q else _up(v)


def _enclose(factors: list[Fraction], tail_lower: Fraction, cutoff: int) -> SeriesEnclosure:
    if any(fac == 0 for fac in factors):
        return SeriesEnclosure(0.0, 0.0, cutoff, True)
    tail_lower = max(tail_lower, Fraction(0))
    if cutoff <= EXACT_CUTOFF:
        part = math.prod(factors, start=Fraction(1))
        return SeriesEnclosure(max(0.0, _frac_down(part * tail_lower)), min(1.0, _frac_up(part)), cutoff, False)
    lo = hi = 1.0
    for fac in factors:
        lo = _down(lo * _frac_down(fac))
        hi = _up(hi * _frac_up(fac))
    lo = _down(lo * _frac_down(tail_lower))
    return SeriesEnclosure(max(0.0, lo), min(1.0, hi), cutoff, False)


def mirsky_factor(A: ShiftSystem, p: int, r: int) -> Fraction:
    m = p ** r
    return 1 - Fraction(nu(A, p, r), m)


def changa_factor(A: ShiftSystem, p: int) -> Fraction:
    return 1 - Fraction(nu_star(A, p, 2), p * (p - 1))


def mirsky_product(A: ShiftSystem, r: int, cutoff: int) -> SeriesEnclosure:
    """Enclosure of prod_p (1 - nu(p^r)/p^r)."""
    if r < 2:
        raise ValueError("r must be >= 2")
    if cutoff < A.a[-1] or cutoff ** r <= A.span:
        raise ValueError(f"cutoff {cutoff} too small for shifts {A} (need P >= a_s and P^r > a_s - a_1)")
    factors = [mirsky_factor(A, p, r) for p in base_primes(cutoff).tolist()]
    tail = 1 - A.s * Fraction(1, (r - 1) * cutoff ** (r - 1))
    return _enclose(factors, tail, cutoff)


def changa_product(A: ShiftSystem, cutoff: int) -> SeriesEnclosure:
    """Enclosure of the singular series prod_p (1 - nu*(p^2)/(p(p-1)))."""
    if cutoff < A.a[-1] or cutoff ** 2 <= A.span:
        raise ValueError(f"cutoff {cutoff} too small for shifts {A} (need P >= a_s and P^2 > a_s - a_1)")
    factors = [changa_factor(A, p) for p in base_primes(cutoff).tolist()]
    tail = 1 - Fraction(A.s, cutoff)
    return _enclose(factors, tail, cutoff)
