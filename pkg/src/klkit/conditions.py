"""Numeric checks of the hypotheses placed on a (target, kernel) pair.

Integrability is decided by a tail rule rather than by a single quadrature:
the log of the integrand is fitted against the log of the distance to each
end of the support on [T, 2T] (or [s, 2s] at a finite end).  A slope that
clears the critical value -1 by ``margin`` certifies convergence, a slope on
the wrong side by ``margin`` certifies divergence and is reported as the
witness exponent, and anything in between is indeterminate.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .density import (DensitySpec, MixtureDensity, _golden_min, log_transform,
                      phi_delta, survival)
from .kernels import (KernelSpec, LocationScaleView, NonDifferentiableError,
                      kernel_eval, kernel_log_eval, make_kernel, score_ratio,
                      to_location_scale)
from .quadrature import integrate_mapped
from .special_fn import DomainError

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"
EVIDENCE, DECLARED = "evidence", "declared"
_INFORMATIONAL = (EVIDENCE, DECLARED)

ETA_SWEEP = (0.25, 0.5, 1.0)
DELTA_SWEEP = (0.5, 0.1, 0.02)
SEARCH_RADIUS = 100.0
MARGIN = 0.1

# worked examples: (theorem, kernel family, kernel hyper, target, target params)
REFERENCE_PAIRINGS = (
    (4, "skew_normal", {"lam": 1.0}, "normal", {}),
    (8, "t", {"nu": 1.0}, "cauchy", {}),
    (6, "double_exponential", {}, "laplace", {}),
    (14, "gamma", {}, "gamma", {"shape": 2.0, "scale": 1.0}),
    (16, "exponential", {}, "pareto", {"shape": 2.0}),
    (17, "scaled_uniform", {}, "exp", {"rate": 1.0}),
    (9, "histogram", {}, "beta_poly", {}),
    (10, "triangular", {}, "beta_poly", {}),
    (11, "bernstein", {}, "beta_poly", {}),
)


@dataclass
class ConditionItem:
    tag: str
    verdict: str
    value: float = math.nan
    detail: str = ""
    witness: object = None


@dataclass
class ConditionReport:
    theorem_id: object
    items: list = field(default_factory=list)
    radii: dict = field(default_factory=dict)
    eta_used: float = None
    delta_used: float = None

    @property
    def verdict(self):
        checked = [i.verdict for i in self.items if i.verdict not in _INFORMATIONAL]
        if any(v == FAIL for v in checked):
            return FAIL
        if any(v == INDETERMINATE for v in checked):
            return INDETERMINATE
        return PASS

    @property
    def passed(self):
        return self.verdict == PASS

    def item(self, tag):
        for it in self.items:
            if it.tag == tag:
                return it
        raise KeyError(tag)

    def rows(self):
        """Flat (theorem, tag, verdict, value, detail) tuples."""
        return [(self.theorem_id, i.tag, i.verdict, i.value, i.detail)
                for i in self.items]


# --- weights and moment checks -------------------------------------------

@dataclass(frozen=True)
class Weight:
    """An integrand builder: ``integrand(f0)`` returns x -> w(x) f0(x) >= 0."""

    name: str
    build: object
    rtol: float = 1e-9

    def integrand(self, f0):
        return self.build(f0)


def _times_f0(name, w, rtol=1e-9):
    def build(f0):
        def u(x):
            f = f0.eval(x)
            with np.errstate(all="ignore"):
                v = w(np.asarray(x, dtype=float)) * f
            return np.where(f > 0, v, 0.0)
        return u
    return Weight(name, build, rtol)


def abs_power(p):
    return _times_f0(f"abs_power({p:g})", lambda x: np.abs(x) ** p)


def log_plus_abs():
    return _times_f0("log_plus_abs", lambda x: np.log(np.maximum(np.abs(x), 1.0)))


def abs_log_power(p):
    return _times_f0(f"abs_log_power({p:g})", lambda x: np.abs(np.log(x)) ** p)


def exp_log_power(eta):
    return _times_f0(f"exp_log_power({eta:g})",
                     lambda x: np.exp(2.0 * np.abs(np.log(x)) ** (1.0 + eta)))


def minmax_power(eta):
    return _times_f0(f"minmax_power({eta:g})",
                     lambda x: np.maximum(x ** (-eta - 2.0), x ** (eta + 2.0)))


def entropy():
    """f0 |ln f0|, the absolute entropy integrand."""
    def build(f0):
        def u(x):
            lf = f0.log_eval(x)
            with np.errstate(all="ignore"):
                v = np.exp(lf) * np.abs(lf)
            return np.where(np.isfinite(lf), v, 0.0)
        return u
    return Weight("entropy", build)


def log_x_f():
    """f0 |ln(x f0)| for half-line targets."""
    def build(f0):
        def u(x):
            x = np.asarray(x, dtype=float)
            lf = f0.log_eval(x)
            with np.errstate(all="ignore"):
                v = np.exp(lf) * np.abs(np.log(x) + lf)
            return np.where(np.isfinite(lf), v, 0.0)
        return u
    return Weight("log_x_f", build)


def local_ratio(delta, variant="two_sided"):
    """f0 ln(f0 / phi_delta), the local-infimum integrand."""
    def build(f0):
        def u(x):
            x = np.asarray(x, dtype=float)
            f = f0.eval(x)
            low = np.asarray(phi_delta(f0, x, delta, variant, n_grid=64), float)
            with np.errstate(all="ignore"):
                v = f * (np.log(f) - np.log(low))
            return np.where((f > 0) & np.isfinite(v), v,
                            np.where(f > 0, np.inf, 0.0))
        return u
    # the local infimum is only piecewise smooth; a loose tolerance suffices
    return Weight(f"local_ratio({delta:g},{variant})", build, 1e-5)


def custom(name, fn):
    """Weight from an arbitrary vectorised x -> w(x) >= 0."""
    return _times_f0(name, fn)


_NAMED = {
    "log_plus_abs": lambda eta: log_plus_abs(),
    "exp_log_power": exp_log_power,
    "minmax_power": minmax_power,
    "entropy": lambda eta: entropy(),
    "log_x_f": lambda eta: log_x_f(),
    "abs_power": lambda eta: abs_power(2.0 * (1.0 + eta)),
    "abs_log_power": lambda eta: abs_log_power(2.0 * (1.0 + eta)),
    "local_ratio": lambda eta: local_ratio(0.1),
}


@dataclass
class MomentResult:
    value: float
    verdict: str
    detail: str = ""
    witness: object = None
    slopes: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.value, self.verdict))


def _fit_slope(u, xs, dist):
    """(slope, state) with state one of fit, zero, infinite."""
    vals = np.asarray(u(xs), dtype=float)
    if np.any(~np.isfinite(vals)):
        return math.nan, "infinite"
    if np.any(vals <= 0.0):
        # vanishing inside the window: the integrand has run out
        return math.nan, "zero"
    return float(np.polyfit(np.log(dist), np.log(vals), 1)[0]), "fit"


def _radial(f0, u):
    area = 2.0 * math.pi ** (f0.dim / 2) / math.gamma(f0.dim / 2)
    return lambda r: u(r) * area * np.asarray(r, dtype=float) ** (f0.dim - 1)


def _radial_view(f0):
    """Density of the norm, seen as a one-dimensional target on [0, inf)."""
    return DensitySpec(f"|{f0.name}|", f0.radial_pdf, "positive_half_line",
                       scale=f0.scale, check=False)


def check_moment(f0, weight, eta=None, truncation=SEARCH_RADIUS,
                 near_end=1e-6, margin=MARGIN):
    """Certified integrability of w f0 over the support.

    ``weight`` is a Weight or one of the names entropy, log_plus_abs,
    exp_log_power, minmax_power, abs_power, abs_log_power, log_x_f,
    local_ratio (parameterised through ``eta`` where relevant).
    Returns a MomentResult, which also unpacks as (value, verdict).
    """
    if isinstance(weight, str):
        try:
            weight = _NAMED[weight](eta)
        except KeyError:
            raise DomainError(f"unknown weight {weight!r}") from None
    if f0.dim > 1:
        target = _radial_view(f0)
        u = _radial(f0, weight.integrand(target))
    else:
        target = f0
        u = weight.integrand(f0)
    lo, hi = target.bounds
    s = target.scale
    T = truncation * s
    probe = np.geomspace(1.0, 2.0, 9)

    slopes, witness, details = {}, None, []
    verdicts = []
    tails = 0.0
    c_lo, c_hi = lo, hi
    ends = []
    if math.isinf(hi):
        ends.append(("+inf", T * probe, T * probe, +1))
        c_hi = T
    else:
        ends.append((f"{hi:g}", hi - near_end * probe, near_end * probe, -1))
    if math.isinf(lo):
        ends.append(("-inf", -T * probe, T * probe, -1))
        c_lo = -T
    else:
        ends.append((f"{lo:g}", lo + near_end * probe, near_end * probe, +1))

    for label, xs, dist, _ in ends:
        k, state = _fit_slope(u, xs, dist)
        slopes[label] = k
        if state == "infinite":
            verdicts.append(FAIL)
            witness = {"end": label, "exponent": math.nan}
            details.append(f"integrand infinite near {label}")
            continue
        if state == "zero":
            verdicts.append(PASS)
            continue
        if label in ("+inf", "-inf"):
            ok, bad = k < -1.0 - margin, k > -1.0 + margin
        else:
            ok, bad = k > -1.0 + margin, k < -1.0 - margin
        if ok:
            verdicts.append(PASS)
            u0 = float(np.ravel(u(xs[0]))[0])
            if u0 > 0:
                # power-law extrapolation of the remainder
                tails += u0 * dist[0] / abs(k + 1.0)
        elif bad:
            verdicts.append(FAIL)
            witness = {"end": label, "exponent": k}
            details.append(f"integrand ~ dist^{k:.3g} at {label}")
        else:
            verdicts.append(INDETERMINATE)
            details.append(f"slope {k:.3g} within margin at {label}")

    if FAIL in verdicts:
        return MomentResult(math.inf, FAIL, "; ".join(details), witness, slopes)

    verdict = INDETERMINATE if INDETERMINATE in verdicts else PASS
    pts = [p for p in target.points if lo < p < hi]
    res = integrate_mapped(u, lo, hi, tol=1e-10, rtol=weight.rtol, points=pts,
                           scale=s, max_panels=4000)
    value = res.value
    if not (res.converged and math.isfinite(value)):
        a = c_lo if math.isinf(lo) else lo + near_end
        b = c_hi if math.isinf(hi) else hi - near_end
        res = integrate_mapped(u, a, b, tol=1e-10, rtol=max(weight.rtol, 1e-8),
                               points=[p for p in pts if a < p < b], scale=s,
                               max_panels=4000)
        value = res.value + tails
    if not math.isfinite(res.value):
        verdict = FAIL
        witness = {"end": "interior", "exponent": math.nan}
        details.append("integrand not finite inside the support")
    elif not res.converged and res.error > 1e-3 * max(abs(res.value), 1.0):
        verdict = INDETERMINATE
        details.append(f"core quadrature residual {res.error:.3g}")
    return MomentResult(value, verdict, "; ".join(details) or weight.name,
                        witness, slopes)


def _sweep(f0, make_weight, values, **kw):
    """First parameter value whose moment check passes, else the best failure."""
    results = []
    for v in values:
        r = check_moment(f0, make_weight(v), **kw)
        results.append((v, r))
        if r.verdict == PASS:
            return v, r
    for v, r in results:
        if r.verdict == INDETERMINATE:
            return v, r
    return results[0]


def _moment_item(tag, result, param=None, pname="eta"):
    detail = result.detail
    if param is not None:
        detail = f"{pname}={param:g}: {detail}"
    return ConditionItem(tag, result.verdict, result.value, detail,
                         result.witness)


# --- location-scale base checks -------------------------------------------

def _rays(dim):
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    dirs = [np.eye(dim)[i] * s for i in range(dim) for s in (1.0, -1.0)]
    diag = np.ones(dim) / math.sqrt(dim)
    dirs += [diag, -diag]
    return np.array(dirs)


def _base_on_ray(view, ray, r):
    z = r[:, None] * ray[None, :]
    if view.dimension == 1:
        z = z[:, 0]
    return z, np.asarray(view.log_base(z), dtype=float)


def _b1(view, radius):
    r = np.linspace(0.0, radius, 4001)
    worst_jump = []
    for n in (1024, 4096, 16384):
        rr = np.linspace(-radius, radius, n) if view.dimension == 1 else np.linspace(0, radius, n)
        ray = _rays(view.dimension)[0]
        _, lb = _base_on_ray(view, ray, rr)
        worst_jump.append(float(np.max(np.abs(np.diff(np.exp(lb))))))
    positive, bounded = True, -math.inf
    for ray in _rays(view.dimension):
        _, lb = _base_on_ray(view, ray, r)
        if not np.all(np.isfinite(lb)):
            positive = False
        bounded = max(bounded, float(np.max(lb)))
    continuous = worst_jump[-1] <= 0.5 * worst_jump[0] or worst_jump[-1] < 1e-12
    ok = positive and math.isfinite(bounded) and continuous
    detail = (f"log-positive={positive}, max={math.exp(bounded):.6g}, "
              f"jumps={worst_jump[0]:.3g}->{worst_jump[-1]:.3g}")
    return ConditionItem("B1", PASS if ok else FAIL, math.exp(bounded), detail)


def _b2(view, radius):
    r = np.linspace(0.0, radius, 20001)
    l1 = 0.0
    witness = None
    for ray in _rays(view.dimension):
        _, lb = _base_on_ray(view, ray, r)
        up = np.nonzero(np.diff(lb) > 1e-13 * np.maximum(1.0, np.abs(lb[:-1])))[0]
        if up.size:
            l1 = max(l1, float(r[up[-1] + 1]))
            witness = float(r[up[-1]])
    ok = l1 < radius
    return ConditionItem("B2", PASS if ok else FAIL, l1,
                         f"non-increasing beyond l1={l1:.4g}",
                         None if ok else witness)


def _b3(view, radius):
    r = np.concatenate([np.linspace(1e-9 + 1e-6, radius, 20001)])
    l2 = 0.0
    witness = None
    for ray in _rays(view.dimension):
        z, _ = _base_on_ray(view, ray, r)
        try:
            sc = np.asarray(score_ratio(view, z), dtype=float)
        except NonDifferentiableError as exc:
            return ConditionItem("B3", INDETERMINATE, math.nan,
                                 f"score undefined at {exc}")
        if view.dimension == 1:
            total = z * sc
        else:
            total = np.sum(z * sc, axis=-1)
        bad = np.nonzero(~(total < -1.0))[0]
        if bad.size:
            l2 = max(l2, float(r[min(bad[-1] + 1, r.size - 1)]))
            witness = float(r[bad[-1]])
    ok = l2 < radius
    return ConditionItem("B3", PASS if ok else FAIL, l2,
                         f"sum z_i score_i < -1 beyond l2={l2:.4g} (summed form)",
                         None if ok else witness)


def _b9(view, radius, margin=MARGIN):
    d = view.dimension
    if d < 2:
        return ConditionItem("B9", PASS, math.nan, "not required for d = 1")
    r = np.geomspace(radius / 2, radius, 9)
    worst = -math.inf
    for ray in _rays(d):
        _, lb = _base_on_ray(view, ray, r)
        if np.all(np.isneginf(lb)):
            k = -math.inf
        else:
            k = float(np.polyfit(np.log(r), lb, 1)[0])
        worst = max(worst, k)
    ok = worst < -d - margin
    return ConditionItem("B9", PASS if ok else FAIL, worst,
                         f"tail exponent {worst:.3g} vs -{d}")


def _b4(f0):
    lo, hi = f0.bounds
    grid = f0.grid(4096)
    if f0.dim > 1:
        grid = np.linspace(0.0, 20.0 * f0.scale, 4096)
        vals = np.asarray(f0.radial_pdf(grid))
        with np.errstate(divide="ignore"):
            logs = np.log(np.maximum(vals, 0.0))
    else:
        inner = grid[(grid > lo) & (grid < hi)] if f0.support != "unit_interval" else grid
        logs = f0.log_eval(inner)
        vals = np.exp(logs)
    bound = f0.upper_bound
    how = "declared bound"
    if bound is None:
        bound = float(np.max(vals))
        how = "grid maximum"
        for end in (lo, hi):
            if math.isfinite(end):
                dist = np.geomspace(1e-9, 1e-6, 7)
                xe = end + dist if end == lo else end - dist
                k = float(np.polyfit(np.log(dist), f0.log_eval(xe), 1)[0])
                if k < -MARGIN:
                    return ConditionItem("B4", FAIL, math.inf,
                                         f"density ~ dist^{k:.3g} near {end:g}",
                                         {"end": end, "exponent": k})
    positive = bool(np.all(np.isfinite(logs)))
    bounded = bool(np.all(vals <= bound * (1 + 1e-12)))
    ok = positive and bounded
    witness = None
    if not positive:
        witness = float(np.asarray(inner if f0.dim == 1 else grid)[np.argmax(~np.isfinite(logs))])
    return ConditionItem("B4", PASS if ok else FAIL, bound,
                         f"positive={positive}, bounded={bounded} ({how})", witness)


def _b7_weights(view, f0, eta):
    """|log chi(2 x |x|^eta)| and |log chi((x - a)/b)| for sample (a, b)."""
    d = view.dimension

    def lead(x):
        x = np.asarray(x, dtype=float)
        if d == 1:
            z = 2.0 * x * np.abs(x) ** eta
        else:
            z = np.zeros(x.shape + (d,))
            z[..., 0] = 2.0 * x * np.abs(x) ** eta
        return np.abs(view.log_base(z))

    shifted = []
    for a, b in ((0.0, 1.0), (1.0, 0.5), (-2.0, 3.0)):
        if d > 1 and a != 0.0:
            continue

        def w(x, a=a, b=b):
            x = np.asarray(x, dtype=float)
            if d == 1:
                z = (x - a) / b
            else:
                z = np.zeros(x.shape + (d,))
                z[..., 0] = (x - a) / b
            return np.abs(view.log_base(z))
        shifted.append(((a, b), w))
    return lead, shifted


def _b7(view, f0, etas):
    def make(eta):
        lead, _ = _b7_weights(view, f0, eta)
        return custom(f"|log chi(2x|x|^{eta:g})|", lead)
    eta, res = _sweep(f0, make, etas)
    items = [_moment_item("B7", res, eta)]
    _, shifted = _b7_weights(view, f0, eta)
    for (a, b), w in shifted:
        r = check_moment(f0, custom(f"|log chi((x-{a:g})/{b:g})|", w))
        it = _moment_item(f"B7[a={a:g},b={b:g}]", r)
        items.append(it)
    return eta, items


def _b8(declared):
    if declared:
        return ConditionItem("B8", DECLARED, math.nan,
                             "prior weak support declared in configuration; not verified")
    return ConditionItem("B8", FAIL, math.nan, "prior weak support not declared")


def check_location_scale(f0, view, eta=None, delta=None, declared_b8=True,
                         radius=SEARCH_RADIUS):
    """Conditions B1-B9 for a target on R^d and a location-scale base."""
    if isinstance(view, KernelSpec):
        view = to_location_scale(view)
    if f0.support != "real_line":
        raise DomainError("location-scale conditions need a target on R^d")
    if f0.dim != view.dimension:
        raise DomainError("target and kernel dimensions differ")
    etas = ETA_SWEEP if eta is None else (eta,)
    deltas = DELTA_SWEEP if delta is None else (delta,)
    rep = ConditionReport("location_scale")
    b1 = _b1(view, radius)
    b2 = _b2(view, radius)
    b3 = _b3(view, radius)
    rep.items += [b1, b2, b3, _b4(f0)]
    rep.radii = {"l1": b2.value, "l2": b3.value}
    rep.items.append(_moment_item("B5", check_moment(f0, entropy())))
    d_used, r6 = _sweep(f0, lambda d: local_ratio(d), deltas)
    rep.items.append(_moment_item("B6", r6, d_used, "delta"))
    rep.delta_used = d_used
    eta_used, b7 = _b7(view, f0, etas)
    rep.items += b7
    rep.eta_used = eta_used
    rep.items.append(_b8(declared_b8))
    rep.items.append(_b9(view, radius))
    return rep


# --- shape properties ----------------------------------------------------

def check_completely_monotone(f0, max_order=6, grid=None, rel_tol=None):
    """Falsification test of complete monotonicity of the survival function.

    Checks (-1)^n Delta_h^n S(x) >= -tol for n = 0..max_order with step
    h = x/4 at every grid point; ``tol`` covers rounding in the differences.
    Returns a ConditionItem whose witness is (x, order, value) on failure.
    """
    if f0.support != "positive_half_line":
        raise DomainError("complete monotonicity is checked on the half line")
    if not 0 <= max_order <= 8:
        raise DomainError("max_order must lie in 0..8")
    if grid is None:
        grid = np.geomspace(1e-3, 1e2, 64) * f0.scale
    grid = np.asarray(grid, dtype=float)
    eps = np.finfo(float).eps
    for x in grid:
        h = 0.25 * x
        pts = x + h * np.arange(max_order + 1)
        s = np.asarray(survival(f0, pts), dtype=float)
        diffs = s.copy()
        for n in range(max_order + 1):
            if n:
                diffs = np.diff(diffs)
            val = (-1) ** n * diffs[0]
            tol = rel_tol if rel_tol is not None else 2.0 ** n * 64 * eps * max(s[0], 1e-300)
            if val < -tol:
                return ConditionItem(
                    "completely_monotone", FAIL, float(val),
                    f"order {n} difference negative at x={x:.6g}",
                    (float(x), n, float(val)))
    return ConditionItem("completely_monotone", PASS, 0.0,
                         f"orders 0..{max_order} on {grid.size} points "
                         "(finite falsification test)")


def _window(f0):
    lo, hi = f0.bounds
    if f0.support == "unit_interval":
        return 0.0, 1.0
    if f0.support == "positive_half_line":
        return 1e-6 * f0.scale, 50.0 * f0.scale
    return -50.0 * f0.scale, 50.0 * f0.scale


def check_continuity(f0):
    """Max jump on refining grids must shrink; a jump discontinuity does not."""
    a, b = _window(f0)
    jumps, where = [], []
    for n in (1024, 4096, 16384):
        x = np.linspace(a, b, n)
        d = np.abs(np.diff(f0.eval(x)))
        k = int(np.argmax(d))
        jumps.append(float(d[k]))
        where.append(float(x[k]))
    ok = jumps[-1] <= 0.5 * jumps[0] or jumps[-1] < 1e-12
    return ConditionItem("continuous", PASS if ok else FAIL, jumps[-1],
                         f"max jump {jumps[0]:.3g} -> {jumps[-1]:.3g}",
                         None if ok else where[-1])


def check_decreasing(f0, n=4096):
    a, b = _window(f0)
    x = np.concatenate([np.linspace(a, min(b, 10 * f0.scale), n), np.geomspace(max(a, 1e-9), b, n)])
    x = np.unique(x)
    v = f0.eval(x)
    up = np.nonzero(np.diff(v) > 1e-14 * np.maximum(v[:-1], 1e-300))[0]
    if up.size:
        return ConditionItem("decreasing", FAIL, float(v[up[0] + 1] - v[up[0]]),
                             f"increases at x={x[up[0]]:.6g}", float(x[up[0]]))
    return ConditionItem("decreasing", PASS, 0.0, f"non-increasing on {x.size} points")


def check_positive(f0):
    """Nowhere zero on the open support (grid check in log space)."""
    lo, hi = f0.bounds
    a, b = _window(f0)
    x = np.geomspace(max(a, 1e-6), b, 4096) if lo == 0 else np.linspace(a, b, 4096)
    lf = f0.log_eval(x)
    bad = ~np.isfinite(lf)
    if np.any(bad):
        return ConditionItem("positive", FAIL, 0.0, "density vanishes",
                             float(x[np.argmax(bad)]))
    return ConditionItem("positive", PASS, float(np.min(lf)), "log-density finite on grid")


# --- theorem dispatcher ------------------------------------------------------

THEOREM_KERNEL = {
    4: "skew_normal", 5: "mv_normal", 6: "double_exponential", 7: "logistic",
    8: "t", 9: "histogram", 10: "triangular", 11: "bernstein",
    12: "lognormal", 13: "weibull", 14: "gamma", 15: "inverse_gamma",
    16: "exponential", 17: "scaled_uniform",
}
THEOREM_FOR_FAMILY = {v: k for k, v in THEOREM_KERNEL.items()}


def _kernel_side(view, radius=SEARCH_RADIUS):
    return [_b1(view, radius), _b2(view, radius), _b3(view, radius)]


def check_theorem(theorem_id, f0, kernel, eta=None, delta=None,
                  declared_support=True, cm_order=6):
    """One report per theorem hypothesis list.

    ``eta`` and ``delta`` fix the free hypothesis parameters; by default the
    checker sweeps them and passes with the first value that works.
    """
    if isinstance(kernel, str):
        kernel = make_kernel(kernel)
    tid = int(theorem_id)
    if tid in (2, 3):
        if kernel.family not in THEOREM_FOR_FAMILY or THEOREM_FOR_FAMILY[kernel.family] > 8:
            raise DomainError(f"theorem {tid} needs a location-scale kernel")
        rep = check_location_scale(f0, kernel, eta, delta, declared_support)
        rep.theorem_id = tid
        return rep
    expected = THEOREM_KERNEL.get(tid)
    if expected is None:
        raise DomainError(f"no hypothesis list for theorem {theorem_id}")
    if kernel.family != expected:
        raise DomainError(f"theorem {tid} concerns the {expected} kernel, "
                          f"not {kernel.family}")
    etas = ETA_SWEEP if eta is None else (eta,)
    deltas = DELTA_SWEEP if delta is None else (delta,)
    rep = ConditionReport(tid)

    def need_support(name):
        if f0.support != name:
            raise DomainError(f"theorem {tid} needs a target on {name}")

    if tid <= 8:
        need_support("real_line")
        view = to_location_scale(kernel)
        if f0.dim != view.dimension:
            raise DomainError("target and kernel dimensions differ")
        rep.items += _kernel_side(view)
        rep.radii = {"l1": rep.items[1].value, "l2": rep.items[2].value}
        if f0.dim == 1:
            rep.items.append(check_continuity(f0))
        rep.items.append(_b4(f0))
        rep.items.append(_moment_item("B5", check_moment(f0, entropy())))
        d_used, r6 = _sweep(f0, lambda d: local_ratio(d), deltas)
        rep.items.append(_moment_item("B6", r6, d_used, "delta"))
        rep.delta_used = d_used
        if tid in (4, 5):
            e, r = _sweep(f0, lambda e: abs_power(2.0 * (1.0 + e)), etas)
            rep.items.append(_moment_item("moment", r, e))
            rep.eta_used = e
        elif tid in (6, 7):
            e, r = _sweep(f0, lambda e: abs_power(1.0 + e), etas)
            rep.items.append(_moment_item("moment", r, e))
            rep.eta_used = e
        else:
            rep.items.append(_moment_item("moment", check_moment(f0, log_plus_abs())))
        if tid == 5:
            rep.items.append(_b9(view, SEARCH_RADIUS))
        rep.items.append(_b8(declared_support))
        return rep

    if tid <= 11:
        need_support("unit_interval")
        rep.items.append(check_continuity(f0))
        rep.items.append(_b8(declared_support))
        return rep

    need_support("positive_half_line")
    rep.items.append(check_continuity(f0))
    if tid in (12, 13):
        view = to_location_scale(kernel)
        rep.items += _kernel_side(view)
        rep.radii = {"l1": rep.items[2].value, "l2": rep.items[3].value}
        rep.items.append(check_positive(f0))
        rep.items.append(_b4(f0))
        if tid == 12:
            rep.items.append(_moment_item("log_x_f", check_moment(f0, log_x_f())))
        else:
            rep.items.append(_moment_item("B5", check_moment(f0, entropy())))
        # the local-infimum condition is needed for the log-scale density;
        # on the x-scale it fails for every target vanishing at 0
        g0 = log_transform(f0)
        d_used, r6 = _sweep(g0, lambda d: local_ratio(d), deltas)
        rep.items.append(_moment_item("B6", r6, d_used, "delta"))
        rep.delta_used = d_used
        if tid == 12:
            e, r = _sweep(f0, lambda e: abs_log_power(2.0 * (1.0 + e)), etas)
        else:
            e, r = _sweep(f0, exp_log_power, etas)
        rep.items.append(_moment_item("moment", r, e))
        rep.eta_used = e
        rep.items.append(_b8(declared_support))
        return rep

    if tid in (14, 15):
        rep.items.append(_b4(f0))
        rep.items.append(_moment_item("B5", check_moment(f0, entropy())))
        d_used, r6 = _sweep(f0, lambda d: local_ratio(d, "one_sided"),
                            tuple(d for d in deltas if d < 1.0))
        rep.items.append(_moment_item("B6*", r6, d_used, "delta"))
        rep.delta_used = d_used
        e, r = _sweep(f0, minmax_power, etas)
        rep.items.append(_moment_item("B7*", r, e))
        rep.eta_used = e
        rep.items.append(_b8(declared_support))
        return rep

    if tid == 16:
        rep.items.append(_moment_item("mean", check_moment(f0, abs_power(1.0))))
        rep.items.append(_moment_item("abs_log_f", check_moment(f0, entropy())))
        rep.items.append(check_completely_monotone(f0, cm_order))
        rep.items.append(_b8(declared_support))
        return rep

    rep.items.append(check_decreasing(f0))
    rep.items.append(_moment_item("abs_log_f", check_moment(f0, entropy())))
    rep.items.append(_b8(declared_support))
    return rep


# --- mixing-measure conditions A4-A9 ------------------------------------------

def _kernel_log(kernel, x, theta, phi):
    if isinstance(kernel, LocationScaleView):
        return kernel.kernel_log(x, theta, phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        return kernel_log_eval(kernel, x, theta, phi)


def _theta_envelope(kernel, x, box, phi, n=65, rounds=3, m=33):
    """(inf, sup) over theta in ``box`` of log K(x; theta, phi), per x.

    A coarse grid followed by vectorised zoom rounds around the extremes.
    """
    lo, hi = box
    grid = np.linspace(lo, hi, n)
    lk = np.asarray(_kernel_log(kernel, x[:, None], grid[None, :], phi), float)
    out = []
    for pick in (np.argmin, np.argmax):
        ref = pick(lk, axis=1)
        best = lk[np.arange(x.size), ref]
        centre = grid[ref]
        half = (hi - lo) / (n - 1)
        for _ in range(rounds):
            t = np.clip(centre[:, None] + np.linspace(-half, half, m)[None, :], lo, hi)
            v = np.asarray(_kernel_log(kernel, x[:, None], t, phi), float)
            j = pick(v, axis=1)
            cand = v[np.arange(x.size), j]
            better = cand < best if pick is np.argmin else cand > best
            best = np.where(better, cand, best)
            centre = np.where(better, t[np.arange(x.size), j], centre)
            half = 2.0 * half / (m - 1)
        out.append(best)
    return out[0], out[1]


def _envelope(kernel, x, theta_box, phis):
    """Envelope over theta_box x phis (phis: a list of hyper values)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    inf = np.full(x.shape, np.inf)
    sup = np.full(x.shape, -np.inf)
    for p in phis:
        i, s = _theta_envelope(kernel, x, theta_box, p)
        inf = np.minimum(inf, i)
        sup = np.maximum(sup, s)
    return inf, sup


def _mixing_range(p):
    if p.kind == "discrete":
        a = np.asarray(p.atoms)[np.asarray(p.weights) > 0]
        return float(a.min()), float(a.max())
    return float(p.lo), float(p.hi)


def _parse_box(D):
    D = tuple(D)
    if len(D) == 2 and np.ndim(D[0]) == 0:
        return (float(D[0]), float(D[1])), None
    if len(D) == 2 and all(len(b) == 2 for b in D):
        t, p = D
        return (float(t[0]), float(t[1])), (float(p[0]), float(p[1]))
    raise DomainError("D must be (lo, hi) or ((theta_lo, theta_hi), (phi_lo, phi_hi))")


def check_A_conditions(f0, kernel, p_eps, phi_eps=None, D=None, C=None,
                       phi_spread=0.1):
    """Conditions A4-A9 for a compactly supported mixing measure.

    ``D`` is a theta interval, or a theta interval times a hyper-parameter
    interval.  It must contain the support of ``p_eps`` (and ``phi_eps``).
    ``C`` is the compact x-set for the positivity check.  A4 and A9 are
    sampled and reported as evidence only.
    """
    if isinstance(kernel, str):
        kernel = make_kernel(kernel)
    if D is None:
        raise DomainError("a compact parameter set D is required")
    t_box, p_box = _parse_box(D)
    if not (t_box[0] <= t_box[1]) or (p_box and not p_box[0] <= p_box[1]):
        raise DomainError("D must be a non-empty box")
    s_lo, s_hi = _mixing_range(p_eps)
    if s_lo < t_box[0] - 1e-12 or s_hi > t_box[1] + 1e-12:
        raise DomainError(f"D does not contain the mixing support [{s_lo:g}, {s_hi:g}]")
    phi = phi_eps if phi_eps is not None else p_eps.point_mass
    if p_box is not None:
        if phi is None:
            phi = 0.5 * (p_box[0] + p_box[1])
        if not p_box[0] <= phi <= p_box[1]:
            raise DomainError("phi_eps lies outside the hyper-parameter range of D")
    vacuous = phi is None
    if C is None:
        a, b = _window(f0)
        C = (max(a, -3.0 * f0.scale), min(b, 3.0 * f0.scale))
    d_phis = [phi] if p_box is None else list(np.linspace(*p_box, 5))
    near = [phi] if vacuous else [phi * (1 - phi_spread), phi, phi * (1 + phi_spread)]
    rep = ConditionReport("A")

    # A4: phi -> K continuous, sampled
    if vacuous:
        rep.items.append(ConditionItem("A4", PASS, 0.0, "hyper-parameter unused"))
    else:
        xs = np.linspace(*C, 7)
        ts = np.linspace(*t_box, 5)
        moduli = []
        for h in (1e-2, 1e-4, 1e-6):
            k0 = kernel_eval(kernel, xs[:, None], ts[None, :], phi)
            k1 = kernel_eval(kernel, xs[:, None], ts[None, :], phi * (1 + h))
            moduli.append(float(np.max(np.abs(k1 - k0))))
        rep.items.append(ConditionItem(
            "A4", EVIDENCE, moduli[-1],
            "sampled modulus " + ", ".join(f"{m:.2g}" for m in moduli)))

    # A5: envelope ratios over D for hyper values near phi
    def a5_weight(x):
        inf_e, sup_e = _envelope(kernel, x, t_box, [phi])
        inf_n, sup_n = _envelope(kernel, x, t_box, near)
        with np.errstate(invalid="ignore"):
            return np.abs(sup_e - inf_n) + np.abs(sup_n - inf_e)
    rep.items.append(_moment_item("A5", check_moment(f0, custom("A5", a5_weight))))

    # A6: a dominating function over the hyper-parameter neighbourhood
    xs = np.linspace(*C, 9)
    _, sup_n = _envelope(kernel, xs, t_box, near)
    dom = float(np.exp(np.max(sup_n)))
    rep.items.append(ConditionItem("A6", PASS if math.isfinite(dom) else FAIL, dom,
                                   "sup of the kernel over D and nearby hyper values on C"))

    # A7: log(f_P / inf_D K) f0-integrable
    mix = MixtureDensity(kernel, p_eps, hyper=phi)

    def a7_weight(x):
        x = np.asarray(x, dtype=float)
        lf = mix.log(x)
        inf_e, _ = _envelope(kernel, x, t_box, [phi])
        with np.errstate(invalid="ignore"):
            return np.abs(lf - inf_e)
    rep.items.append(_moment_item("A7", check_moment(f0, custom("A7", a7_weight))))

    # A8: positivity on C x D
    xs = np.linspace(*C, 129)
    inf_c, _ = _envelope(kernel, xs, t_box, d_phis)
    low = float(np.min(inf_c))
    if low > -math.inf and math.exp(low) > 0:
        rep.items.append(ConditionItem("A8", PASS, math.exp(low),
                                       f"inf over C x D = {math.exp(low):.6g}"))
    else:
        w = float(xs[int(np.argmin(inf_c))])
        rep.items.append(ConditionItem("A8", FAIL, 0.0, f"kernel vanishes at x={w:.6g}", w))

    # A9: equicontinuity in theta on an enlarged set E, sampled
    width = max(t_box[1] - t_box[0], 1e-3)
    E = (t_box[0] - 0.25 * width, t_box[1] + 0.25 * width)
    if t_box[0] > 0:
        E = (max(E[0], 0.5 * t_box[0]), E[1])
    xs = np.linspace(*C, 9)
    moduli = []
    for h in (1e-2, 1e-4, 1e-6):
        t = np.linspace(E[0], E[1] - h, 33)
        k0 = kernel_eval(kernel, xs[:, None], t[None, :], phi)
        k1 = kernel_eval(kernel, xs[:, None], t[None, :] + h, phi)
        moduli.append(float(np.max(np.abs(k1 - k0))))
    rep.items.append(ConditionItem(
        "A9", EVIDENCE, moduli[-1],
        "sampled theta-modulus " + ", ".join(f"{m:.2g}" for m in moduli)
        + f" on E=[{E[0]:.4g}, {E[1]:.4g}] (non-exhaustive)"))
    return rep
