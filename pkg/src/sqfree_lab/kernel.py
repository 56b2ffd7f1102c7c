"""Periodic smoothing kernel with support ||t|| < Delta and explicit Fourier data.

The kernel is the r-fold self-convolution of a box of width h = 2*Delta/r
(an Irwin-Hall density rescaled onto (-Delta, Delta)), normalised so that its
peak value is 1.  With mean m it expands as

    chi(t) = m * (1 + sum_{k != 0} g(k) e(kt)),   g(k) = sinc(pi k h)^r.

For r = 2 this is the triangle 1 - |t|/Delta with m = Delta exactly; for
larger r the mean drops below Delta and callers should use ``kernel.mean``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


def _irwin_hall_exact(r: int, x: Fraction) -> Fraction:
    total = Fraction(0)
    for j in range(int(math.floor(x)) + 1):
        total += (-1) ** j * math.comb(r, j) * (x - j) ** (r - 1)
    return total / math.factorial(r - 1)


@dataclass(frozen=True)
class SmoothKernel:
    delta: float
    order: int
    peak: float  # Irwin-Hall density at its centre, r/2

    @property
    def width(self) -> float:
        """Width h of the box being convolved."""
        return 2.0 * self.delta / self.order

    @property
    def mean(self) -> float:
        return self.width / self.peak

    def g(self, k):
        """Normalised Fourier coefficient g(k); g(0) = 1."""
        k = np.asarray(k, dtype=np.float64)
        return np.sinc(k * self.width) ** self.order


def build_kernel(delta: float, order: int = 2) -> SmoothKernel:
    if not 0 < delta <= 0.5:
        raise ValueError(f"delta={delta} outside (0, 1/2]")
    if order < 2 or order % 2:
        raise ValueError(f"order must be an even integer >= 2, got {order}")
    peak = float(_irwin_hall_exact(order, Fraction(order, 2)))
    return SmoothKernel(float(delta), int(order), peak)


def _irwin_hall(r: int, x: np.ndarray) -> np.ndarray:
    # symmetric about r/2; evaluating on the short side keeps the sum stable
    x = np.minimum(x, r - x)
    out = np.zeros_like(x)
    for j in range(r // 2 + 1):
        out += np.where(x > j, (-1) ** j * math.comb(r, j) * np.clip(x - j, 0, None) ** (r - 1), 0.0)
    return np.where(x > 0, out, 0.0) / math.factorial(r - 1)


def eval_chi(kernel: SmoothKernel, t):
    """chi(t) for scalar or array t (period 1)."""
    arr = np.asarray(t, dtype=np.float64)
    u = np.abs(arr - np.round(arr))  # ||t||
    if kernel.order == 2:
        val = np.clip(1.0 - u / kernel.delta, 0.0, None)
    else:
        x = u / kernel.width + kernel.order / 2
        val = np.where(u < kernel.delta, _irwin_hall(kernel.order, x) / kernel.peak, 0.0)
        val = np.minimum(val, 1.0)
    return float(val) if np.ndim(t) == 0 else val


def coeff_c(kernel: SmoothKernel, k: int, beta=0) -> complex:
    """c(k) = g(k) e(beta k) for k != 0."""
    if k == 0:
        raise ValueError("c(k) is defined for k != 0 only")
    if isinstance(beta, Fraction):
        phase = float((beta * k) % 1)
    else:
        phase = math.fmod(float(beta) * k, 1.0)
    return float(kernel.g(k)) * cmath.exp(2j * math.pi * phase)


def coeff_table(kernel: SmoothKernel, kmax: int, beta=0) -> np.ndarray:
    """c(1), ..., c(kmax) as a complex array; c(-k) is the conjugate."""
    return np.array([coeff_c(kernel, k, beta) for k in range(1, kmax + 1)], dtype=np.complex128)


def fourier_tail(kernel: SmoothKernel, cutoff: int) -> float:
    """Upper bound for Delta * sum_{|k| > cutoff} |g(k)|.

    Uses |g(k)| <= min(1, (pi h k)^-r) and sum_{k > N} k^-r < N^(1-r)/(r-1).
    Since mean <= Delta it also bounds the truncation error of the expansion.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    r, c = kernel.order, math.pi * kernel.width
    # below k0 the trivial bound 1 is the better one
    k0 = max(cutoff, math.ceil(1.0 / c))
    head = sum(min(1.0, (c * k) ** -r) for k in range(cutoff + 1, k0 + 1))
    tail = c ** -r * k0 ** (1 - r) / (r - 1)
    return 2.0 * kernel.delta * (head + tail)


def partial_fourier(kernel: SmoothKernel, t, nterms: int):
    """m * (1 + sum_{0 < |k| <= nterms} g(k) e(kt)) at t (real, since g is even)."""
    arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    k = np.arange(1, nterms + 1, dtype=np.float64)
    g = kernel.g(k)
    out = kernel.mean * (1.0 + 2.0 * np.cos(2 * np.pi * np.outer(arr, k)) @ g)
    return float(out[0]) if np.ndim(t) == 0 else out
