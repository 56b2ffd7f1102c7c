"""Command-line front end.

Every laboratory operation is reachable from one subcommand.  Output is JSON
(stable key order, 12 significant digits) unless ``--format csv`` is given.
Exit codes: 0 success, 1 budget/precision failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import arith_core, diophantine, expsum_lab, gamma_lab, kernel, shift_system, singular_series
from .errors import BudgetError, PrecisionError

MAX_RANGE = 10 ** 8


@dataclass(frozen=True)
class RunConfig:
    command: str
    fmt: str
    shards: int
    seed: int

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        shards = getattr(ns, "shards", 1)
        if shards < 1:
            raise ValueError("--shards must be >= 1")
        return cls(ns.command, getattr(ns, "format", None), shards, getattr(ns, "seed", 0))


def _clean(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if not math.isfinite(v) else float(f"{v:.12g}")
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "as_dict"):
        return _clean(obj.as_dict())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit_json(obj, out) -> None:
    out.write(json.dumps(_clean(obj)) + "\n")


def _emit_csv(rows: list[dict], out) -> None:
    rows = [_flatten(_clean(r)) for r in rows]
    if not rows:
        return
    fields = list(rows[0])
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    out.write(buf.getvalue())


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[f"{prefix}{k}"] = v
    return out


def _range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    lo_i, hi_i = int(lo), int(hi)
    if hi_i - lo_i > MAX_RANGE:
        raise BudgetError(f"range length {hi_i - lo_i} exceeds {MAX_RANGE}")
    return lo_i, hi_i


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _gamma_value(text: str):
    """An exponential-sum frequency: a float, a rational p/q, or an alpha spec."""
    if ":" in text:
        return diophantine.parse_alpha(text)
    if "/" in text:
        return Fraction(text)
    return float(text)


# ---------------------------------------------------------------------------
# handlers; each returns (payload, csv_rows or None)


def cmd_sieve(ns, cfg):
    lo, hi = _range(ns.range)
    if ns.count_squarefree:
        return {"lo": lo, "hi": hi, "r": ns.r, "count": arith_core.count_rfree(lo, hi, ns.r, cfg.shards)}, None
    table = arith_core.build_sieve(lo, hi, shards=cfg.shards)
    rows = [{"n": n, "spf": s, "mu": m, "prime": p, "lambda_prime": l}
            for n, (s, m, p, l) in ((n, table.records(n)) for n in range(lo, hi + 1))]
    return rows, rows


def cmd_arith(ns, cfg):
    n = ns.n
    out = {"n": n, "mu": arith_core.mobius(n), "mu_r": arith_core.mu_r(n, ns.r), "tau_k": arith_core.tau_k(n, ns.k),
           "lambda": arith_core.von_mangoldt(n), "pi": arith_core.prime_pi(n)}
    if ns.p is not None:
        out["nu_p"] = arith_core.nu_p(n, ns.p)
    return out, None


def cmd_shifts(ns, cfg):
    A = shift_system.parse_shifts(ns.shifts)
    out = {"a": list(A.a), "w": A.w, "w_primes": list(A.w_primes), "admissible": shift_system.is_admissible(A)}
    if ns.p is not None:
        out["nu"] = shift_system.nu(A, ns.p, ns.r)
        out["nu_star"] = shift_system.nu_star(A, ns.p, ns.r)
    if ns.n is not None:
        out["mu_w"] = shift_system.mu_w(A, ns.n)
        out["mu_tilde"] = shift_system.mu_tilde(A, ns.n)
        out["f"] = shift_system.f(A, ns.n)
    return out, None


def cmd_cf(ns, cfg):
    alpha = diophantine.parse_alpha(ns.alpha)
    out = {"convergents": [[c.a, c.q] for c in diophantine.convergents(alpha, ns.terms)]}
    if ns.p is not None:
        out["frac_norm"] = diophantine.frac_norm(alpha, ns.p, diophantine.parse_beta(ns.beta))
    if ns.x is not None:
        prm = diophantine.params_for(ns.x, ns.theta)
        out["params"] = {"theta": prm.theta, "x": prm.x, "delta": prm.delta, "K": prm.K}
    if ns.schedule:
        out["schedule"] = diophantine.x_schedule(_ints(ns.schedule))
    return out, None


def cmd_search(ns, cfg):
    lo, hi = _range(ns.range)
    primes = diophantine.search_primes(lo, hi, diophantine.parse_alpha(ns.alpha), diophantine.parse_beta(ns.beta),
                                       ns.theta, shift_system.parse_shifts(ns.shifts), shards=cfg.shards)
    return primes, [{"p": p} for p in primes]


def cmd_series(ns, cfg):
    A = shift_system.parse_shifts(ns.shifts)
    if ns.kind == "changa":
        enc = singular_series.changa_product(A, ns.cutoff)
    else:
        enc = singular_series.mirsky_product(A, ns.r, ns.cutoff)
    return enc.as_dict(), [enc.as_dict()]


def cmd_count(ns, cfg):
    A = shift_system.parse_shifts(ns.shifts)
    if ns.kind == "mirsky":
        out = gamma_lab.mirsky_report(ns.x, A, ns.r) if ns.report else {"count": gamma_lab.mirsky_count(ns.x, A, ns.r, cfg.shards)}
    else:
        out = gamma_lab.changa_report(ns.x, A, ns.r) if ns.report else {"count": gamma_lab.changa_count(ns.x, A, ns.r)}
    return out, [out]


def _common(ns):
    return (diophantine.parse_alpha(ns.alpha), diophantine.parse_beta(ns.beta), ns.theta,
            shift_system.parse_shifts(ns.shifts))


def cmd_gamma(ns, cfg):
    alpha, beta, theta, A = _common(ns)
    rep = gamma_lab.gamma(ns.x, alpha, beta, theta, A, order=ns.order, shards=cfg.shards,
                          gamma3_at=_ints(ns.gamma3_at) if ns.gamma3_at else (), k0=ns.k0)
    return rep, [rep.as_dict()]


def cmd_gamma3(ns, cfg):
    alpha, beta, theta, A = _common(ns)
    val = gamma_lab.gamma3(ns.y, alpha, beta, theta, A, k0=ns.k0, order=ns.order)
    out = {"y": ns.y, "k0": ns.k0, "gamma3": val}
    return out, [out]


def cmd_udecomp(ns, cfg):
    alpha, beta, theta, A = _common(ns)
    dec = gamma_lab.u_decomposition(ns.y, alpha, beta, theta, A, k0=ns.k0, q=ns.q, order=ns.order)
    out = dec.as_dict(with_terms=ns.terms)
    return out, [dec.as_dict()]


def cmd_kernel(ns, cfg):
    kern = kernel.build_kernel(ns.delta, ns.order)
    ts = np.linspace(-0.5, 0.5, ns.samples + 1)
    samples = [{"t": float(t), "chi": float(kernel.eval_chi(kern, t))} for t in ts]
    coeffs = [{"k": k, "g": float(kern.g(k))} for k in range(0, ns.coeffs + 1)]
    out = {"delta": kern.delta, "order": kern.order, "mean": kern.mean,
           "samples": samples, "coefficients": coeffs}
    if ns.tail is not None:
        out["fourier_tail"] = kernel.fourier_tail(kern, ns.tail)
    return out, None


def _kernel_csv(payload, out) -> None:
    _emit_csv(payload["samples"], out)
    out.write("\n")
    _emit_csv(payload["coefficients"], out)


def cmd_expsum(ns, cfg):
    mode = ns.mode
    if mode == "ap":
        g = _gamma_value(ns.gamma)
        rows = []
        for X in _ints(ns.X):
            for d in _ints(ns.d):
                a = ns.a if ns.a is not None else 1
                s = expsum_lab.ap_exp_sum(X, a, d, g)
                bound = expsum_lab.ap_bound(X, d, g)
                rows.append({"X": X, "a": a, "d": d, "lhs": abs(s), "envelope": bound, "ratio": abs(s) / bound})
        return rows, rows
    if mode == "ap-random":
        out = expsum_lab.ap_random_audit(ns.cases, cfg.seed)
        return out, [out]
    if mode == "mennema":
        pts = expsum_lab.mennema_audit(tuple(_ints(ns.ks)), tuple(_ints(ns.xs)))
        rows = [p.as_dict() for p in pts]
        return rows, rows
    alpha = diophantine.parse_alpha(ns.alpha)
    rows = []
    if mode == "vaughan":
        for X in _ints(ns.X):
            for Y in _floats(ns.Y):
                q = ns.q or diophantine.convergent_near(alpha, X).q
                rows.append(_audit_row(expsum_lab.vaughan_audit(X, Y, q, alpha, ns.ceiling)))
    else:
        power = 2 if mode == "matomaki" else 4
        for M in _ints(ns.M):
            for J in _ints(ns.J):
                q = ns.q or diophantine.convergent_near(alpha, ns.x ** 0.35).q
                rows.append(_audit_row(expsum_lab.quadratic_sum_audit(M, J, ns.x, alpha, q, power, ns.ceiling)))
    return rows, rows


def _audit_row(rec) -> dict:
    return {**rec.params, "lhs": rec.lhs, "envelope": rec.envelope, "ratio": rec.ratio, "flagged": rec.flagged}


def cmd_hb(ns, cfg):
    if ns.dyadic:
        lo, hi = _range(ns.dyadic)
        blocks = expsum_lab.dyadic_split(lo, hi)
        return {"blocks": [list(b) for b in blocks]}, [{"after": a, "upto": b} for a, b in blocks]
    if ns.params is not None:
        return expsum_lab.hb_parameters(ns.params), None
    lo, hi = _range(ns.n_range)
    rows, worst = [], 0.0
    for n in range(max(lo, 2), hi + 1):
        z = ns.z or expsum_lab.integer_root_ceil(n, ns.J)
        val = expsum_lab.hb_decompose(n, z, ns.J)
        err = abs(val - arith_core.von_mangoldt(n))
        worst = max(worst, err)
        rows.append({"n": n, "z": z, "J": ns.J, "hb": val, "lambda": arith_core.von_mangoldt(n), "error": err})
    summary = {"J": ns.J, "range": [lo, hi], "max_error": worst, "count": len(rows)}
    return (rows if ns.all else summary), rows


def cmd_audit(ns, cfg):
    if ns.kind == "mirsky-error":
        A = shift_system.parse_shifts(ns.shifts)
        rows = [gamma_lab.mirsky_report(x, A, ns.r) for x in _ints(ns.xs)]
        return rows, rows
    alpha, beta, theta, A = _common(ns)
    rows = [gamma_lab.lower_bound_audit(x, alpha, beta, theta, A, order=ns.order, shards=cfg.shards).as_dict()
            for x in _ints(ns.xs)]
    return rows, rows


def cmd_rosser(ns, cfg):
    if ns.grid:
        lo, _, rest = ns.grid.partition(":")
        hi, _, count = rest.partition(":")
        xs = np.linspace(float(lo), float(hi), int(count or 1000)).tolist()
        res = gamma_lab.rosser_grid(xs)
        return {"points": len(xs), "all_true": all(res), "failures": [x for x, ok in zip(xs, res) if not ok]}, None
    out = {"x": ns.x, "holds": gamma_lab.rosser_check(ns.x)}
    return out, [out]


# ---------------------------------------------------------------------------
# parser


def _add_dioph(p, need_x: str | None = None):
    p.add_argument("--alpha", default="sqrt:2", help="sqrt:D | surd:p,q,D | cf:d0,d1,... | bits:<hex> | rat:a/q")
    p.add_argument("--beta", default="0", help="decimal or p/q")
    p.add_argument("--theta", type=float, default=0.1)
    p.add_argument("--shifts", default="1,2", help="comma-separated shifts a_1,...,a_s")
    p.add_argument("--order", type=int, default=2, help="kernel order r (even)")


def build_parser() -> argparse.ArgumentParser:
    # global options are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    common.add_argument("--shards", type=int, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="sqfree-lab", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    _sub_add = sub.add_parser
    sub.add_parser = lambda name, **kw: _sub_add(name, parents=[common], **kw)

    p = sub.add_parser("sieve", help="per-integer records or r-free counts")
    p.add_argument("--range", required=True, help="lo:hi inclusive")
    p.add_argument("--count-squarefree", action="store_true")
    p.add_argument("--r", type=int, default=2)
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("arith", help="mu, mu_r, tau_k, Lambda, nu_p, pi at one integer")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--p", type=int)
    p.set_defaults(func=cmd_arith)

    p = sub.add_parser("shifts", help="w, admissibility, nu, nu*, mu_w, mu_tilde, f")
    p.add_argument("--shifts", required=True)
    p.add_argument("--p", type=int)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_shifts)

    p = sub.add_parser("cf", help="convergents, ||alpha p + beta||, Delta/K, x schedule")
    p.add_argument("--alpha", required=True)
    p.add_argument("--terms", type=int, default=8)
    p.add_argument("--p", type=int)
    p.add_argument("--beta", default="0")
    p.add_argument("--x", type=float)
    p.add_argument("--theta", type=float, default=0.1)
    p.add_argument("--schedule", help="comma-separated q values")
    p.set_defaults(func=cmd_cf)

    p = sub.add_parser("search", help="qualifying primes in (lo, hi]")
    _add_dioph(p)
    p.add_argument("--range", required=True, help="lo:hi")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("series", help="singular-series enclosure")
    p.add_argument("--shifts", required=True)
    p.add_argument("--cutoff", type=int, default=10 ** 4)
    p.add_argument("--kind", choices=("changa", "mirsky"), default="changa")
    p.add_argument("--r", type=int, default=2)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("count", help="exact shifted r-free counts")
    p.add_argument("kind", choices=("mirsky", "changa"))
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--shifts", required=True)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--report", action="store_true", help="include series comparison")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("gamma", help="Gamma, Gamma_1, Gamma_2 at x")
    _add_dioph(p)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--gamma3-at", help="comma-separated y values")
    p.add_argument("--k0", type=int)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("gamma3", help="direct Gamma_3(y)")
    _add_dioph(p)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--k0", type=int)
    p.set_defaults(func=cmd_gamma3)

    p = sub.add_parser("udecomp", help="Gamma_3(y) as sum of U_d with the three-range split")
    _add_dioph(p)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--k0", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--terms", action="store_true", help="include every U_d")
    p.set_defaults(func=cmd_udecomp)

    p = sub.add_parser("kernel", help="smoothing kernel samples and coefficients")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--coeffs", type=int, default=20)
    p.add_argument("--tail", type=int, help="cutoff for the Fourier tail bound")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("expsum", help="exponential-sum evaluations and bound audits (CSV)")
    p.add_argument("mode", choices=("ap", "ap-random", "vaughan", "matomaki", "fourth-power", "mennema"))
    p.add_argument("--alpha", default="sqrt:2")
    p.add_argument("--gamma", default="sqrt:2", help="frequency for ap mode")
    p.add_argument("--X", default="100")
    p.add_argument("--Y", default="10")
    p.add_argument("--a", type=int)
    p.add_argument("--d", default="1")
    p.add_argument("--M", default="8")
    p.add_argument("--J", default="8")
    p.add_argument("--x", type=int, default=10 ** 4)
    p.add_argument("--q", type=int)
    p.add_argument("--ceiling", type=float, default=expsum_lab.DEFAULT_CEILING)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--ks", default="2,3,4,5")
    p.add_argument("--xs", default="1000,10000,100000,1000000")
    p.set_defaults(func=cmd_expsum)

    p = sub.add_parser("hb", help="Heath-Brown identity, its parameters, dyadic blocks")
    p.add_argument("--n-range", default="2:100")
    p.add_argument("--J", type=int, default=2)
    p.add_argument("--z", type=int)
    p.add_argument("--all", action="store_true", help="emit every n, not just the summary")
    p.add_argument("--params", type=float, metavar="Y", help="print u, v, w cut points at scale Y")
    p.add_argument("--dyadic", metavar="LO:HI", help="print the dyadic blocks of [LO, HI]")
    p.set_defaults(func=cmd_hb)

    p = sub.add_parser("audit", help="lower-bound or Mirsky error audits")
    p.add_argument("kind", choices=("lower-bound", "mirsky-error"))
    _add_dioph(p)
    p.add_argument("--xs", default="10000,100000")
    p.add_argument("--r", type=int, default=2)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("rosser", help="pi(2x) - pi(x) > 3x/(5 log x)")
    p.add_argument("--x", type=float, default=100.0)
    p.add_argument("--grid", metavar="LO:HI:N")
    p.set_defaults(func=cmd_rosser)
    return parser


CSV_DEFAULT = {"expsum"}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(ns)
        fmt = cfg.fmt or ("csv" if cfg.command in CSV_DEFAULT else "json")
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: print(f"warning: {msg}", file=sys.stderr)
            payload, rows = ns.func(ns, cfg)
    except (BudgetError, PrecisionError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if fmt == "csv":
        if cfg.command == "kernel":
            _kernel_csv(payload, out)
        else:
            _emit_csv(rows if rows is not None else [payload], out)
    else:
        _emit_json(payload, out)
    return 0


def main() -> None:
    sys.exit(run())
