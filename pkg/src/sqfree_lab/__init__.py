"""Primes in Diophantine neighbourhoods whose shifts are square-free."""

from .arith_core import build_sieve, count_rfree, factorize, is_prime, mobius, prime_pi, tau_k, von_mangoldt
from .diophantine import convergents, frac_norm, golden_ratio, params_for, parse_alpha, search_primes, sqrt_spec
from .errors import BudgetError, PrecisionError
from .expsum_lab import ap_exp_sum, dyadic_split, hb_decompose, mennema_audit
from .gamma_lab import gamma, gamma3, lower_bound_audit, mirsky_count, changa_count, rosser_check, u_decomposition
from .kernel import build_kernel, eval_chi, fourier_tail
from .shift_system import ShiftSystem, is_admissible, new_shift_system, parse_shifts
from .singular_series import changa_product, mirsky_product

__all__ = [
    "BudgetError", "PrecisionError", "ShiftSystem",
    "ap_exp_sum", "build_kernel", "build_sieve", "changa_count", "changa_product", "convergents",
    "count_rfree", "dyadic_split", "eval_chi", "factorize", "fourier_tail", "frac_norm", "gamma",
    "gamma3", "golden_ratio", "hb_decompose", "is_admissible", "is_prime", "lower_bound_audit",
    "mennema_audit", "mirsky_count", "mirsky_product", "mobius", "new_shift_system", "params_for",
    "parse_alpha", "parse_shifts", "prime_pi", "rosser_check", "search_primes", "sqrt_spec",
    "tau_k", "u_decomposition", "von_mangoldt",
]
