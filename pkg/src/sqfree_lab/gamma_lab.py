"""The smoothed prime sums Gamma, Gamma_1, Gamma_2, Gamma_3 and their audits.

``p ~ x`` always means x < p <= 2x.  Gamma_2 and Gamma_3 are evaluated
directly from their defining finite Fourier sums; the kernel truncation
remainder is bounded by :func:`sqfree_lab.kernel.fourier_tail` instead of
an O(1).

Two routes to Gamma_3 are kept deliberately separate:
:func:`gamma3` weights n by the sieved mu^2(n + a_i), while
:func:`u_decomposition` rebuilds the same number from f(t) over residues
mod w^2 and Mobius-weighted square divisors d_i^2 | n + a_i coprime to w.
"""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .arith_core import base_primes, build_sieve, prime_pi, prime_pi_table, rfree_mask, split_range
from .diophantine import (
    IrrationalSpec,
    _squarefree_primes,
    convergent_near,
    frac_parts,
    params_for,
    parse_beta,
)
from .kernel import SmoothKernel, build_kernel, coeff_c, eval_chi, fourier_tail
from .shift_system import ShiftSystem, f, is_admissible
from .singular_series import changa_product, mirsky_product

EPSILON = 0.05
ROSSER_MIN_X = 20.5
K_CHUNK = 64


# ---------------------------------------------------------------------------
# counts


def _shifted_rfree(lo: int, hi: int, A: ShiftSystem, r: int) -> np.ndarray:
    """mask[i] = prod_j mu_r(lo + i + a_j) for lo <= lo + i <= hi."""
    base = rfree_mask(lo + A.a[0], hi + A.a[-1], r)
    size = hi - lo + 1
    out = np.ones(size, dtype=bool)
    for v in A.a:
        off = v - A.a[0]
        out &= base[off: off + size]
    return out


def mirsky_count(x: int, A: ShiftSystem, r: int = 2, shards: int = 1) -> int:
    """#{n <= x : n + a_1, ..., n + a_s all r-free}."""
    if x < 1:
        raise ValueError("x must be >= 1")
    return sum(int(np.count_nonzero(_shifted_rfree(a, b, A, r))) for a, b in split_range(1, x, shards))


def changa_count(x: int, A: ShiftSystem, r: int = 2) -> int:
    """#{p <= x prime : p + a_1, ..., p + a_s all r-free}."""
    if x < 1:
        raise ValueError("x must be >= 1")
    primes = base_primes(x)
    if len(primes) == 0:
        return 0
    mask = _shifted_rfree(1, x, A, r)
    return int(np.count_nonzero(mask[primes - 1]))


def mirsky_report(x: int, A: ShiftSystem, r: int = 2, cutoff: int = 10 ** 5) -> dict:
    """Exact count against (series midpoint) * x, scaled by x^(2/(r+1) + eps)."""
    count = mirsky_count(x, A, r)
    enc = mirsky_product(A, r, max(cutoff, A.a[-1]))
    err = abs(count - enc.mid * x)
    return {
        "x": x, "r": r, "count": count, "series_mid": enc.mid, "series_width": enc.width,
        "error": err, "scaled_error": err / x ** (2 / (r + 1) + EPSILON),
    }


def changa_report(x: int, A: ShiftSystem, r: int = 2, cutoff: int = 10 ** 5) -> dict:
    count = changa_count(x, A, r)
    pi_x = prime_pi(x)
    out = {"x": x, "r": r, "count": count, "pi": pi_x}
    if r == 2:
        enc = changa_product(A, max(cutoff, A.a[-1]))
        out.update(series_mid=enc.mid, expected=enc.mid * pi_x, error=abs(count - enc.mid * pi_x))
    return out


# ---------------------------------------------------------------------------
# Gamma


@dataclass
class GammaReport:
    x: int
    gamma: float
    gamma1: int
    gamma2: complex
    residual: float
    tail_bound: float
    delta: float
    K: float
    k_max: int
    mean: float
    order: int
    delta_clamped: bool
    flags: dict = field(default_factory=dict)
    gamma3_samples: dict = field(default_factory=dict)
    u_split: dict = field(default_factory=dict)  # y -> [|U1|, |U2|, |U3|]

    def as_dict(self) -> dict:
        return asdict(self)


def kernel_for(delta: float, order: int = 2) -> tuple[SmoothKernel, bool]:
    """Kernel with the requested Delta, clamped to the supported maximum 1/2."""
    clamped = delta > 0.5
    return build_kernel(min(delta, 0.5), order), clamped


def _resolve_kernel(delta: float, kernel: SmoothKernel | None, order: int) -> tuple[SmoothKernel, bool]:
    if kernel is None:
        kern, clamped = kernel_for(delta, order)
        if clamped:
            warnings.warn(f"Delta={delta:.6g} > 1/2; kernel built with Delta = 1/2", stacklevel=3)
        return kern, clamped
    want = min(delta, 0.5)
    if abs(kernel.delta - want) > 1e-12 * want:
        raise ValueError(f"kernel Delta={kernel.delta} does not match params Delta={want}")
    return kernel, delta > 0.5


def _beta_float(beta: Fraction) -> float:
    return float(beta % 1)


def _exp_sums(phases: np.ndarray, weights: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """S(k) = sum_n weights[n] e(k * phases[n]) for every k in ks."""
    out = np.empty(len(ks), dtype=np.complex128)
    for i in range(0, len(ks), K_CHUNK):
        kk = ks[i: i + K_CHUNK]
        arg = np.mod(np.outer(kk, phases), 1.0)
        out[i: i + K_CHUNK] = np.exp(2j * np.pi * arg) @ weights
    return out


def gamma(
    x: int,
    alpha: IrrationalSpec,
    beta,
    theta: float,
    A: ShiftSystem,
    kernel: SmoothKernel | None = None,
    order: int = 2,
    shards: int = 1,
    gamma3_at=(),
    k0: int | None = None,
) -> GammaReport:
    """Gamma(x) directly and through its Fourier split Delta_eff (Gamma_1 + Gamma_2)."""
    beta = parse_beta(beta)
    params = params_for(x, theta)
    kern, clamped = _resolve_kernel(params.delta, kernel, order)
    K = params.k_max
    ps = _squarefree_primes(x, 2 * x, A, shards)
    fr = frac_parts(alpha, ps)
    shifted = np.mod(fr + _beta_float(beta), 1.0)
    chi = eval_chi(kern, shifted) if len(ps) else np.zeros(0)
    g_val = math.fsum(np.atleast_1d(chi).tolist())
    g1 = len(ps)
    if K >= 1 and g1:
        ks = np.arange(1, K + 1)
        sums = _exp_sums(fr, np.ones(g1), ks)
        cs = np.array([coeff_c(kern, int(k), beta) for k in ks])
        g2 = complex(np.sum(cs * sums) + np.sum(np.conj(cs) * np.conj(sums)))
    else:
        g2 = 0j
    tail = fourier_tail(kern, max(K, 1)) * g1
    residual = abs(g_val - kern.mean * (g1 + g2.real))
    flags = {
        "gamma_nonnegative": g_val >= 0,
        "identity_within_tail": residual <= tail + 1e-9 * max(1.0, g_val),
        "gamma2_real": abs(g2.imag) <= 1e-8 * max(1.0, abs(g2)),
    }
    report = GammaReport(x, g_val, g1, g2, residual, tail, params.delta, params.K, K, kern.mean,
                         kern.order, clamped, flags)
    for y in gamma3_at:
        y, cap = int(y), min(k0 or K, K)
        report.gamma3_samples[y] = gamma3(y, alpha, beta, theta, A, kern, k0=cap)
        dec = u_decomposition(y, alpha, beta, theta, A, kern, k0=cap)
        report.u_split[y] = [abs(dec.u1), abs(dec.u2), abs(dec.u3)]
    return report


def _lambda_weights(y: int, A: ShiftSystem):
    """n in (y, 2y], Lambda(n) * prod mu^2(n + a_i) from one sieve table."""
    table = build_sieve(y + 1, 2 * y + A.a[-1])
    size = y
    lam = table.lambda_log()[:size]
    sq = np.ones(size, dtype=bool)
    for v in A.a:
        sq &= table.mu[v: v + size] != 0
    ns = np.arange(y + 1, 2 * y + 1, dtype=np.int64)
    keep = (lam > 0) & sq
    return ns[keep], lam[keep], table


def _check_k0(y: int, theta: float, k0: int | None) -> int:
    K = params_for(y, theta).k_max
    if k0 is None:
        return K
    if k0 < 0 or k0 > K:
        raise ValueError(f"K0={k0} outside [0, K={K}]")
    return k0


def _coeffs(kern: SmoothKernel, k0: int, beta: Fraction) -> tuple[np.ndarray, np.ndarray]:
    ks = np.array([k for k in range(-k0, k0 + 1) if k], dtype=np.int64)
    return ks, np.array([coeff_c(kern, int(k), beta) for k in ks], dtype=np.complex128)


def gamma3(
    y: int,
    alpha: IrrationalSpec,
    beta,
    theta: float,
    A: ShiftSystem,
    kernel: SmoothKernel | None = None,
    k0: int | None = None,
    order: int = 2,
) -> complex:
    """sum_{0<|k|<=K0} c(k) sum_{n~y} Lambda(n) mu^2(n+a_1)...mu^2(n+a_s) e(alpha k n)."""
    beta = parse_beta(beta)
    k0 = _check_k0(y, theta, k0)
    if k0 == 0:
        return 0j
    kern = kernel or kernel_for(params_for(y, theta).delta, order)[0]
    ns, lam, _ = _lambda_weights(y, A)
    if len(ns) == 0:
        return 0j
    ks, cs = _coeffs(kern, k0, beta)
    fr = frac_parts(alpha, ns.tolist())
    return complex(np.sum(cs * _exp_sums(fr, lam, ks.astype(np.float64))))


# ---------------------------------------------------------------------------
# U_d decomposition


@dataclass
class UDecomposition:
    y: int
    k0: int
    q: int
    total: complex
    u1: complex
    u2: complex
    u3: complex
    env1: float
    env2: float
    env3: float
    u_d: dict
    u1_unclassified: int

    @property
    def ratios(self) -> tuple[float, float, float]:
        return (abs(self.u1) / self.env1, abs(self.u2) / self.env2, abs(self.u3) / self.env3)

    def as_dict(self, with_terms: bool = False) -> dict:
        out = asdict(self)
        out["ratios"] = list(self.ratios)
        if not with_terms:
            out.pop("u_d")
            out["support_size"] = len(self.u_d)
        return out


def _factor_spf(spf: np.ndarray, lo: int, m: int) -> dict[int, int]:
    out: dict[int, int] = {}
    while m > 1:
        p = int(spf[m - lo]) if m >= lo else _smallest_factor(m)
        while m % p == 0:
            m //= p
            out[p] = out.get(p, 0) + 1
    return out


def _smallest_factor(m: int) -> int:
    p = 2
    while p * p <= m:
        if m % p == 0:
            return p
        p += 1
    return m


def root_divisors(fac: dict[int, int], w: int) -> list[tuple[int, int]]:
    """(d, mu(d)) over square-free d with d^2 | m and gcd(d, w) = 1."""
    out = [(1, 1)]
    for p, e in fac.items():
        if e >= 2 and w % p:
            out += [(d * p, -s) for d, s in out]
    return out


def mennema_levels(s: int, y: float) -> dict[int, tuple[float, float]]:
    """r -> (alpha_r, A_r) for 2 <= r <= s, with A_r = y^((s-r+1)/(2s-2r+3))."""
    return {r: ((s - r + 2) / (s - r + 1), y ** ((s - r + 1) / (2 * s - 2 * r + 3))) for r in range(2, s + 1)}


def mennema_class(ds, y: float) -> int | None:
    """The r with sorted ds in D_r: d_r...d_s <= A_r and d_{r-1}...d_s > A_{r-1}."""
    ds = sorted(ds)
    s = len(ds)

    def level(r):
        return y ** ((s - r + 1) / (2 * s - 2 * r + 3))

    for r in range(2, s + 1):
        tail = math.prod(ds[r - 1:])
        if tail <= level(r) and tail * ds[r - 2] > level(r - 1):
            return r
    return None


def u_decomposition(
    y: int,
    alpha: IrrationalSpec,
    beta,
    theta: float,
    A: ShiftSystem,
    kernel: SmoothKernel | None = None,
    k0: int | None = None,
    q: int | None = None,
    order: int = 2,
) -> UDecomposition:
    """Gamma_3(y) = sum_d U_d, split at d = y^(1/2) and d = y^(1/5)."""
    beta = parse_beta(beta)
    k0 = _check_k0(y, theta, k0)
    kern = kernel or kernel_for(params_for(y, theta).delta, order)[0]
    if q is None:
        q = convergent_near(alpha, y ** 0.35).q
    w, w2 = A.w, A.w * A.w
    # Lambda(n) only; square-freeness comes from f and the divisor expansion
    table = build_sieve(y + 1, 2 * y + A.a[-1])
    lam = table.lambda_log()[:y]
    ns = [y + 1 + i for i in np.flatnonzero(lam > 0).tolist()]
    ks, cs = _coeffs(kern, k0, beta)
    u_d: dict[int, complex] = defaultdict(complex)
    if k0 and ns:
        fr = frac_parts(alpha, ns)
        for n, phase in zip(ns, fr.tolist()):
            t = (n - 1) % w2 + 1
            if not f(A, t):
                continue
            lam_n = float(lam[n - y - 1])
            e_n = complex(np.sum(cs * np.exp(2j * np.pi * np.mod(ks * phase, 1.0))))
            tuples = [(1, 1)]
            for v in A.a:
                divs = root_divisors(_factor_spf(table.spf, table.lo, n + v), w)
                tuples = [(d * e, s * t_) for d, s in tuples for e, t_ in divs]
            for d, sign in tuples:
                u_d[d] += sign * lam_n * e_n
    u_d = dict(sorted(u_d.items()))
    Y = math.prod(math.sqrt(2 * y + v) for v in A.a)

    def total(keys):
        keys = list(keys)
        return complex(math.fsum(u_d[d].real for d in keys), math.fsum(u_d[d].imag for d in keys))

    big = [d for d in u_d if d * d > y and d <= Y]
    mid = [d for d in u_d if d ** 5 > y and d * d <= y]
    small = [d for d in u_d if d ** 5 <= y]
    kf = max(k0, 1)
    env1 = y ** (2 / 3 + EPSILON) * kf
    env2 = y ** (4 / 5 + EPSILON) * kf
    env3 = gamma3_envelope(y, kf, q)
    unclassified = _count_unclassified(ns, A, table, y) if big else 0
    return UDecomposition(y, k0, q, total(u_d), total(big), total(mid), total(small), env1, env2, env3,
                          u_d, unclassified)


def _count_unclassified(ns, A: ShiftSystem, table, y: int) -> int:
    """Tuples with d >= y^(1/2) that fall in no D_r."""
    count = 0
    for n in ns:
        if not f(A, n):
            continue
        tuples = [()]
        for v in A.a:
            divs = root_divisors(_factor_spf(table.spf, table.lo, n + v), A.w)
            tuples = [tp + (d,) for tp in tuples for d, _ in divs]
        for tp in tuples:
            if math.prod(tp) ** 2 >= y and mennema_class(tp, y) is None:
                count += 1
    return count


def gamma3_envelope(y: float, K: float, q: int, eps: float = EPSILON) -> float:
    """y^eps (y^(9/10) K + y^(43/40) K q^(-1/2) + y^(17/20) K q^(-1/16)
    + y^(23/40) K^(1/2) q^(1/2) + y^(63/80) K^(15/16) q^(1/16) + q)."""
    return y ** eps * (
        y ** 0.9 * K + y ** (43 / 40) * K / q ** 0.5 + y ** (17 / 20) * K / q ** (1 / 16)
        + y ** (23 / 40) * K ** 0.5 * q ** 0.5 + y ** (63 / 80) * K ** (15 / 16) * q ** (1 / 16) + q
    )


# ---------------------------------------------------------------------------
# audits


def rosser_check(x: float) -> bool:
    """pi(2x) - pi(x) > 3x / (5 ln x), counted directly."""
    if x < ROSSER_MIN_X:
        raise ValueError(f"x={x} below {ROSSER_MIN_X}")
    return prime_pi(math.floor(2 * x)) - prime_pi(math.floor(x)) > 3 * x / (5 * math.log(x))


def rosser_grid(xs) -> list[bool]:
    """rosser_check over many x with one cumulative prime table."""
    xs = [float(v) for v in xs]
    if any(v < ROSSER_MIN_X for v in xs):
        raise ValueError(f"grid must lie above {ROSSER_MIN_X}")
    table = prime_pi_table(math.floor(2 * max(xs)))
    return [int(table[math.floor(2 * v)]) - int(table[math.floor(v)]) > 3 * v / (5 * math.log(v)) for v in xs]


@dataclass
class LowerBoundAudit:
    x: int
    skipped: bool
    notice: str = ""
    passed: bool = False
    gamma: float = 0.0
    gamma_bound: float = 0.0
    margin: float = 0.0
    gamma1: int = 0
    gamma1_bound: float = 0.0
    gamma1_passed: bool = False
    series_lower: float = 0.0
    mean: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def lower_bound_audit(
    x: int,
    alpha: IrrationalSpec,
    beta,
    theta: float,
    A: ShiftSystem,
    kernel: SmoothKernel | None = None,
    order: int = 2,
    cutoff: int = 10 ** 4,
    shards: int = 1,
) -> LowerBoundAudit:
    """Gamma(x) >= (S_lower/4) m x / ln x and Gamma_1(x) > S_lower x / (2 ln x)."""
    if not is_admissible(A):
        raise ValueError(f"shift system {A} is not admissible: singular series vanishes")
    if x < ROSSER_MIN_X:
        return LowerBoundAudit(x, True, f"x < {ROSSER_MIN_X}: prime-gap bound not applicable")
    enc = changa_product(A, max(cutoff, A.a[-1]))
    if enc.lower <= 0:
        raise ValueError("singular series lower bound is not positive; raise the cutoff")
    rep = gamma(x, alpha, beta, theta, A, kernel=kernel, order=order, shards=shards)
    log_x = math.log(x)
    bound = enc.lower / 4 * rep.mean * x / log_x
    g1_bound = enc.lower * x / (2 * log_x)
    return LowerBoundAudit(
        x, False, "", rep.gamma >= bound, rep.gamma, bound, rep.gamma - bound,
        rep.gamma1, g1_bound, rep.gamma1 > g1_bound, enc.lower, rep.mean,
    )
