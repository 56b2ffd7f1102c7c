"""Exponential sums, bound audits and the Heath-Brown identity.

The lemma bounds carry unspecified implied constants, so the audits here
compute the left-hand side exactly and report its ratio to the envelope.
Only the arithmetic-progression sum has a sharp constant-explicit form
(|S| <= min(X/d + 1, 1/(2||gamma d||))) that is checked as a hard invariant.
"""

from __future__ import annotations

import cmath
import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .arith_core import base_primes, build_sieve, factorize, mobius, rfree_mask
from .diophantine import IrrationalSpec, frac_parts

EPSILON = 0.05
DEFAULT_CEILING = 10.0


def _reduce(gamma, n: int) -> float:
    """frac(gamma * n) for float, Fraction or IrrationalSpec gamma."""
    if isinstance(gamma, IrrationalSpec):
        return float(frac_parts(gamma, [n])[0]) if n else 0.0
    if isinstance(gamma, Fraction):
        return float((gamma * n) % 1)
    return math.fmod(gamma * n, 1.0)


def _norm(x: float) -> float:
    x = x % 1.0
    return min(x, 1.0 - x)


def _sinc(x: float) -> float:
    y = math.pi * x
    return 1.0 - y * y / 6.0 if abs(y) < 1e-5 else math.sin(y) / y


def ap_exp_sum(X: int, a: int, d: int, gamma) -> complex:
    """sum_{n <= X, n = a (mod d)} e(gamma n) in closed form."""
    if X < 1 or d < 1 or not 1 <= a <= d:
        raise ValueError("need X >= 1, d >= 1, 1 <= a <= d")
    if a > X:
        return 0j
    count = (X - a) // d + 1
    step = _reduce(gamma, d)
    step = step - round(step)  # in [-1/2, 1/2]
    if step == 0:
        return count * cmath.exp(2j * math.pi * _reduce(gamma, a))
    # e(gamma (a + (count-1) d / 2)) * sin(pi count step) / sin(pi step), in sinc form so
    # that tiny steps do not lose the ratio to underflow
    centre = _reduce(gamma, a) + (count - 1) * step / 2.0
    amp = count * _sinc(count * step) / _sinc(step)
    return amp * cmath.exp(2j * math.pi * centre)


def ap_bound(X: int, d: int, gamma) -> float:
    """min(X/d + 1, 1/(2 ||gamma d||))."""
    dist = _norm(_reduce(gamma, d))
    return X / d + 1 if dist == 0 else min(X / d + 1, 0.5 / dist)


@dataclass
class AuditRecord:
    name: str
    params: dict
    lhs: float
    envelope: float
    ratio: float
    flagged: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _min_sum(weights: np.ndarray, big: np.ndarray, dist: np.ndarray) -> float:
    with np.errstate(divide="ignore"):
        inv = np.where(dist > 0, 1.0 / dist, np.inf)
    return math.fsum((weights * np.minimum(big, inv)).tolist())


def _dists(alpha: IrrationalSpec, ns) -> np.ndarray:
    fr = frac_parts(alpha, ns)
    return np.minimum(fr, 1.0 - fr)


def vaughan_audit(X: int, Y: float, q, alpha: IrrationalSpec, ceiling: float = DEFAULT_CEILING) -> AuditRecord:
    """Ratio of sum_{n<=X} min(XY/n, 1/||alpha n||) to XY(1/q + 1/Y + q/(XY)) log(2Xq).

    ``q`` is a denominator or a :class:`Convergent`.
    """
    q = getattr(q, "q", q)
    if X < 1 or Y < 1 or q < 1:
        raise ValueError("need X, Y, q >= 1")
    n = np.arange(1, X + 1)
    lhs = _min_sum(np.ones(X), X * Y / n, _dists(alpha, n.tolist()))
    env = X * Y * (1 / q + 1 / Y + q / (X * Y)) * math.log(2 * X * q)
    ratio = lhs / env
    return AuditRecord("vaughan", {"X": X, "Y": Y, "q": q}, lhs, env, ratio, ratio > ceiling)


def _tau_range(lo: int, hi: int, k: int) -> np.ndarray:
    """tau_k(n) for lo <= n <= hi via the smallest-prime-factor table."""
    spf = build_sieve(1, max(hi, 2)).spf
    out = []
    for n in range(lo, hi + 1):
        val, m = 1, n
        while m > 1:
            p, e = int(spf[m - 1]), 0
            while m % p == 0:
                m //= p
                e += 1
            val *= math.comb(e + k - 1, k - 1)
        out.append(val)
    return np.array(out, dtype=np.float64)


def quadratic_sum_envelope(M: float, J: float, x: float, q: int, power: int, eps: float = EPSILON) -> float:
    if power == 2:
        core = M * J + x / M ** 1.5 + x / (M * q ** 0.5) + x ** 0.5 * q ** 0.5 / M
    elif power == 4:
        core = M * J + x / M ** (25 / 8) + x / (M ** 3 * q ** (1 / 8)) + x ** (7 / 8) * q ** (1 / 8) / M ** 3
    else:
        raise ValueError("power must be 2 or 4")
    return x ** eps * core


def quadratic_sum_lhs(M: int, J: int, x: int, alpha: IrrationalSpec, power: int, mu_k: int = 2, zeta_k: int = 2) -> float:
    """sum_{m~M} tau_mu(m) sum_{j~J} tau_zeta(j) min(x/(m^power j), 1/||alpha m^power j||); m~M is M < m <= 2M."""
    if M < 1 or J < 1:
        raise ValueError("need M, J >= 1")
    if power not in (2, 4):
        raise ValueError("power must be 2 or 4")
    ms = np.arange(M + 1, 2 * M + 1)
    js = np.arange(J + 1, 2 * J + 1)
    if (2 * M) ** power * 2 * J > 1 << 62:
        raise OverflowError("m^power * j exceeds 62 bits")
    tm = _tau_range(M + 1, 2 * M, mu_k)
    tj = _tau_range(J + 1, 2 * J, zeta_k)
    prods = np.outer(ms ** power, js).ravel()
    weights = np.outer(tm, tj).ravel()
    return _min_sum(weights, x / prods.astype(np.float64), _dists(alpha, prods.tolist()))


def quadratic_sum_audit(M: int, J: int, x: int, alpha: IrrationalSpec, q: int, power: int,
                        ceiling: float = DEFAULT_CEILING, mu_k: int = 2, zeta_k: int = 2) -> AuditRecord:
    lhs = quadratic_sum_lhs(M, J, x, alpha, power, mu_k, zeta_k)
    env = quadratic_sum_envelope(M, J, x, q, power)
    ratio = lhs / env
    name = "matomaki" if power == 2 else "fourth_power"
    return AuditRecord(name, {"M": M, "J": J, "x": x, "q": q, "power": power}, lhs, env, ratio, ratio > ceiling)


# ---------------------------------------------------------------------------
# Heath-Brown identity


def _divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p ** i for d in divs for i in range(e + 1)]
    return sorted(divs)


def _convolve(f: dict[int, int], g: dict[int, int], divs: list[int], n: int) -> dict[int, int]:
    out = {d: 0 for d in divs}
    for d in divs:
        fd = f[d]
        if fd:
            for e in divs:
                if e * d > n:
                    break
                if n % (d * e) == 0 and g[e]:
                    out[d * e] += fd * g[e]
    return out


def hb_decompose(n: int, z: int, J: int) -> float:
    """Right-hand side of the Heath-Brown identity for Lambda(n).

    sum_{j=1}^{J} (-1)^(j-1) C(J, j) sum_{m_1..m_j n_1..n_j = n, m_i <= z}
    mu(m_1)...mu(m_j) log n_1, valid for n <= z^J.
    """
    if J < 1 or z < 1:
        raise ValueError("need J >= 1 and z >= 1")
    if n == 1:
        return 0.0
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > z ** J:
        raise ValueError(f"n={n} exceeds z^J={z ** J}: identity not valid")
    divs = _divisors(n)
    mu_z = {d: (mobius(d) if d <= z else 0) for d in divs}
    one = {d: 1 for d in divs}
    # coefficient of log(n_1) for each n_1 | n, accumulated exactly
    weights: dict[int, int] = defaultdict(int)
    conv = {d: int(d == 1) for d in divs}
    for j in range(1, J + 1):
        conv = _convolve(conv, mu_z, divs, n)  # mu_z^{*j}
        rest = conv
        for _ in range(j - 1):
            rest = _convolve(rest, one, divs, n)
        sign = (-1) ** (j - 1) * math.comb(J, j)
        for d in divs:
            if rest[d]:
                weights[n // d] += sign * rest[d]
    return math.fsum(c * math.log(m) for m, c in weights.items() if c and m > 1)


def integer_root_ceil(n: int, J: int) -> int:
    """Smallest z with z^J >= n."""
    z = max(1, int(round(n ** (1.0 / J))))
    while z ** J < n:
        z += 1
    while z > 1 and (z - 1) ** J >= n:
        z -= 1
    return z


def hb_parameters(y: float) -> dict:
    """Heath-Brown cut points used for the Type I/II split at scale y."""
    return {"u": 2.0 ** -7 * y ** 0.2, "v": 2.0 ** 7 * y ** (1 / 3), "hb_w": y ** 0.4}


def dyadic_split(lo: int, hi: int) -> list[tuple[int, int]]:
    """Blocks (a, b] = (2^k, 2^(k+1)] cut to [lo, hi]; every integer is covered once.

    The integer 1 sits in the block (1/2, 1], reported as (0, 1].
    """
    if not 1 <= lo <= hi:
        raise ValueError("need 1 <= lo <= hi")
    blocks = []
    start = lo - 1
    while start < hi:
        top = 1 if start == 0 else min(hi, 2 << (start.bit_length() - 1))
        blocks.append((start, top))
        start = top
    return blocks


# ---------------------------------------------------------------------------
# Mennema divisor-sum audits


@dataclass
class MennemaPoint:
    k: int
    x: int
    lemma1_sum: float
    lemma1_ratio: float
    lemma1_root: float
    lemma2_tail: float
    lemma2_ratio: float
    lemma2_root: float

    def as_dict(self) -> dict:
        return asdict(self)


def _omega_squarefree(limit: int) -> tuple[np.ndarray, np.ndarray]:
    """(omega(n), squarefree flag) for 0 <= n <= limit."""
    omega = np.zeros(limit + 1, dtype=np.int8)
    for p in base_primes(limit).tolist():
        omega[p::p] += 1
    sf = np.zeros(limit + 1, dtype=bool)
    sf[1:] = rfree_mask(1, limit, 2)
    return omega, sf


def _euler_total(k: int, limit: int = 10 ** 7) -> tuple[float, float]:
    """Enclosure of sum_d mu^2(d) tau_k(d)/d^2 = prod_p (1 + k/p^2).

    The tail over p > limit is bracketed with sum_{p>N} 1/p^2 < 1.52/(N log N).
    """
    primes = base_primes(limit).astype(np.float64)
    log_head = math.fsum(np.log1p(k / primes ** 2).tolist())
    head = math.exp(log_head)
    tail = k * 1.52 / (limit * math.log(limit))
    return head, head * math.exp(tail)


def mennema_audit(ks=(2, 3, 4, 5), xs=(10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6)) -> list[MennemaPoint]:
    """Normalised divisor sums over square-free n.

    lemma1_ratio = sum_{n<=x} mu^2 tau_k / (x (log x)^(k-1)),
    lemma2_ratio = (sum_{d>x} mu^2 tau_k / d^2) * x / (2k - 2 + log x)^(k-1),
    and the *_root fields are their k-th roots (the C_1, C_2 of the lemmas).
    """
    top = max(xs)
    omega, sf = _omega_squarefree(top)
    n = np.arange(top + 1, dtype=np.float64)
    out = []
    for k in ks:
        vals = np.where(sf, float(k) ** omega.astype(np.float64), 0.0)
        vals[0] = 0.0
        cum1 = np.cumsum(vals)
        with np.errstate(divide="ignore"):
            terms = np.where(n > 0, vals / np.maximum(n, 1) ** 2, 0.0)
        total_lo, total_hi = _euler_total(k)
        for x in xs:
            s1 = float(cum1[x])
            r1 = s1 / (x * math.log(x) ** (k - 1))
            head = math.fsum(terms[: x + 1].tolist())
            tail = total_hi - head
            r2 = tail * x / (2 * k - 2 + math.log(x)) ** (k - 1)
            out.append(MennemaPoint(k, x, s1, r1, r1 ** (1 / k), tail, r2, r2 ** (1 / k)))
    return out


# ---------------------------------------------------------------------------
# randomized arithmetic-progression audit


def ap_exp_sum_direct(X: int, a: int, d: int, gamma: float) -> complex:
    n = np.arange(a, X + 1, d, dtype=np.float64)
    return complex(np.sum(np.exp(2j * np.pi * np.mod(gamma * n, 1.0))))


def ap_random_audit(cases: int = 10_000, seed: int = 0, max_x: int = 10_000, max_d: int = 100) -> dict:
    """Closed form vs direct summation, and the sharp bound, on random cases."""
    rng = np.random.default_rng(seed)
    violations, max_err = 0, 0.0
    for _ in range(cases):
        X = int(rng.integers(1, max_x + 1))
        d = int(rng.integers(1, max_d + 1))
        a = int(rng.integers(1, d + 1))
        gamma = float(rng.random())
        s = ap_exp_sum(X, a, d, gamma)
        max_err = max(max_err, abs(s - ap_exp_sum_direct(X, a, d, gamma)))
        if abs(s) > ap_bound(X, d, gamma) * (1 + 1e-12):
            violations += 1
    return {"cases": cases, "seed": seed, "violations": violations, "max_abs_error": max_err}
