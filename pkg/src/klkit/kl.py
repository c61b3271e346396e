"""Kullback-Leibler divergence by adaptive quadrature, plus convergence studies.

The integrand f ln(f/g) is formed from log densities so that neither side
under- or overflows.  Panels are split where ln(f/g) changes sign and, for
unbounded supports, the domain is cut into a core interval and mapped
tails whose contribution is reported separately.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .density import DensitySpec, MixtureDensity, _BOUNDS
from .parallel import ordered_map
from .quadrature import QuadratureError, integrate, integrate_mapped
from .special_fn import DomainError

LOG_TINY = math.log(1e-300)
F_SIGNIFICANT = 1e-12
SINGULAR_PANELS = 3


class KLConvergenceError(QuadratureError):
    pass


@dataclass
class KLResult:
    value: float
    abs_error_bound: float
    split_points: list = field(default_factory=list)
    tail_contribution: float = 0.0
    converged: bool = True
    infinite: bool = False

    @property
    def certified_negative(self):
        return self.value < -self.abs_error_bound


def log_evaluator(obj):
    """Vectorised log-density for a DensitySpec, MixtureDensity or callable."""
    if isinstance(obj, DensitySpec):
        return obj.log_eval
    if isinstance(obj, MixtureDensity):
        return obj.log

    def _log(x):
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(obj(x), dtype=float))
    return _log


def _kl_integrand(lf, lg, linear_g):
    # With a log evaluator for g, only an exact zero (log g = -inf) counts as
    # singular; a plain callable cannot tell underflow from zero.
    def h(x):
        a = np.asarray(lf(x), dtype=float)
        b = np.asarray(lg(x), dtype=float)
        f = np.exp(a)
        out = np.zeros(np.shape(a))
        live = f > 0
        tiny_g = b < LOG_TINY
        zero_g = tiny_g if linear_g else np.isneginf(b)
        sing = live & zero_g & (f > F_SIGNIFICANT)
        ok = live & ~zero_g
        out[ok] = f[ok] * (a[ok] - b[ok])
        weak = live & zero_g & ~sing
        out[weak] = f[weak] * (a[weak] - LOG_TINY)
        out[sing] = np.nan
        return out
    return h


def _sign_changes(diff, lo, hi, scale, n=257):
    """Roots of ln f - ln g located by a pre-scan and Brent refinement."""
    if math.isfinite(lo) and math.isfinite(hi):
        xs = np.linspace(lo, hi, n)[1:-1]
    else:
        t = np.linspace(-1.0, 1.0, n)[1:-1]
        if math.isfinite(lo):
            t = 0.5 * (t + 1.0)
            xs = lo + scale * t / (1.0 - t * t)
        elif math.isfinite(hi):
            t = 0.5 * (t - 1.0)
            xs = hi + scale * t / (1.0 - t * t)
        else:
            xs = scale * t / (1.0 - t * t)
    with np.errstate(invalid="ignore"):
        d = diff(xs)
    good = np.isfinite(d)
    xs, d = xs[good], d[good]
    s = np.sign(d)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    roots = []
    if idx.size > 64:
        return xs[idx].tolist()
    for i in idx:
        try:
            roots.append(brentq(lambda u: float(diff(np.array([u]))[0]),
                                xs[i], xs[i + 1], xtol=1e-14))
        except ValueError:
            roots.append(0.5 * (xs[i] + xs[i + 1]))
    return roots


def kl_divergence(f, g, support=None, tol=1e-8, points=(), scale=None,
                  strict=True, core=None):
    """K(f; g) = int f ln(f/g) over the common support.

    ``support`` is a support name or an (lo, hi) pair; it defaults to that
    of ``f``.  ``core`` sets the half-width of the central interval on
    unbounded supports (default 8 * scale).  With ``strict`` a
    non-converged integral raises; otherwise the result is flagged.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if support is None:
        support = getattr(f, "support", None)
        if support is None:
            raise DomainError("support is required for plain callables")
    lo, hi = _BOUNDS[support] if isinstance(support, str) else map(float, support)
    if scale is None:
        scale = getattr(f, "scale", 1.0)
    pts = sorted(set(float(p) for p in tuple(points) + tuple(getattr(f, "points", ()))
                     if lo < p < hi))
    lf, lg = log_evaluator(f), log_evaluator(g)
    linear_g = not isinstance(g, (DensitySpec, MixtureDensity))
    h = _kl_integrand(lf, lg, linear_g)

    def diff(x):
        a, b = lf(x), lg(x)
        return np.where(np.exp(a) > 0, a - b, np.nan)

    pts = sorted(set(pts + _sign_changes(diff, lo, hi, scale)))

    half = (8.0 * scale) if core is None else float(core)
    c_lo = lo if math.isfinite(lo) else min(-half, hi - half)
    c_hi = hi if math.isfinite(hi) else max(half, lo + half)
    pieces = [(c_lo, c_hi, False)]
    if not math.isfinite(lo):
        pieces.append((lo, c_lo, True))
    if not math.isfinite(hi):
        pieces.append((c_hi, hi, True))
    share = tol / len(pieces)

    value, err, tail = [], [], []
    converged, infinite = True, False
    panels = []
    for a, b, is_tail in pieces:
        inner = [p for p in pts if a < p < b]
        if is_tail:
            res = integrate_mapped(h, a, b, tol=share, points=inner,
                                   scale=scale, singular_limit=SINGULAR_PANELS)
        else:
            res = integrate(h, a, b, tol=share, points=inner,
                            singular_limit=SINGULAR_PANELS)
        if not math.isfinite(res.value):
            infinite = True
        converged &= res.converged
        value.append(res.value)
        err.append(res.error)
        if is_tail:
            tail.append(res.value)
        panels.extend(res.panels)

    if infinite:
        return KLResult(math.inf, math.inf, pts, math.inf, False, True)
    total = math.fsum(value)
    bound = math.fsum(err)
    result = KLResult(total, bound, pts, math.fsum(tail), converged, False)
    if strict and not converged:
        raise KLConvergenceError(
            f"KL quadrature stopped with residual {bound:.3g} > {tol:.3g}",
            total, bound)
    return result


# --- floor transform -----------------------------------------------------

def floor_transform(f0, m):
    """Floor a [0, 1] density at m and renormalise.

    Returns the new DensitySpec and the normaliser c = int max(f0, m).
    """
    if f0.support != "unit_interval":
        raise DomainError("floor transform is defined for [0, 1] densities")
    if m <= 0:
        raise DomainError("floor level must be positive")
    cross = _sign_changes(lambda x: f0.eval(x) - m, 0.0, 1.0, 1.0, n=1025)
    knots = tuple(sorted(set(cross) | set(f0.points)))

    def floored(x):
        return np.maximum(f0.eval(x), m)
    res = integrate(floored, 0.0, 1.0, tol=1e-13, points=knots)
    c = res.value

    def pdf(x):
        return floored(x) / c
    f1 = DensitySpec(f"floor({f0.name},{m:g})", pdf, "unit_interval",
                     points=knots, params={"base": f0.name, "m": m, "c": c})
    return f1, c


@dataclass
class Lemma4Check:
    lhs: float
    rhs: float
    verdict: str
    c: float
    kl_floor: float
    slack: float


def lemma4_bound_check(f0, f, m, tol=1e-9):
    """Compare K(f0; f) with (c + 1) ln c + K(f1; f) + sqrt(K(f1; f))."""
    f1, c = floor_transform(f0, m)
    left = kl_divergence(f0, f, "unit_interval", tol=tol, strict=False)
    k1 = kl_divergence(f1, f, "unit_interval", tol=tol, strict=False)
    if left.infinite or k1.infinite:
        return Lemma4Check(left.value, math.inf, "indeterminate", c, k1.value,
                           math.inf)
    k1v = max(k1.value, 0.0)
    rhs = (c + 1.0) * math.log(c) + k1v + math.sqrt(k1v)
    # sqrt is not Lipschitz at 0; bound its error by sqrt of the error
    slack = 2.0 * (left.abs_error_bound + k1.abs_error_bound
                   + math.sqrt(k1.abs_error_bound))
    verdict = "pass" if left.value <= rhs + slack else "fail"
    return Lemma4Check(left.value, rhs, verdict, c, k1.value, slack)


# --- convergence studies -------------------------------------------------

@dataclass
class StudyRow:
    index: int
    result: KLResult
    runtime_ms: float
    error: str = ""


@dataclass
class ConvergenceStudy:
    family: str
    f0_name: str
    rows: list
    eps_target: float
    converged: bool


def convergence_study(seq, ladder, tol=1e-7, eps_target=None, threads=None):
    """KL from ``seq.f0`` to ``seq.at(k)`` for every k in the ladder.

    The study is flagged converged when the final value is below the
    target and the last three values are non-increasing up to their error
    bounds.  Ladder entries run concurrently; row order follows the ladder.
    """
    target = eps_target if eps_target is not None else seq.eps_target

    def one(k):
        t0 = time.perf_counter()
        try:
            approx = seq.at(k)
            res = kl_divergence(seq.f0, approx, tol=tol, strict=False,
                                **seq.kl_options(k))
            msg = "" if res.converged else "quadrature residual above tolerance"
            if res.infinite:
                msg = "infinite KL"
        except (QuadratureError, DomainError, FloatingPointError) as exc:
            res = KLResult(math.nan, math.inf, converged=False)
            msg = str(exc)
        return StudyRow(int(k), res, 1e3 * (time.perf_counter() - t0), msg)

    rows = ordered_map(one, list(ladder), threads)
    vals = [r.result for r in rows]
    ok = bool(vals) and math.isfinite(vals[-1].value) and vals[-1].value < target
    tail = vals[-3:]
    for a, b in zip(tail, tail[1:]):
        if not (b.value <= a.value + a.abs_error_bound + b.abs_error_bound):
            ok = False
    return ConvergenceStudy(seq.family, seq.f0.name, rows, target, ok)
