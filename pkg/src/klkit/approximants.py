"""Constructive approximating mixtures for each kernel family.

Each constructor returns a MixtureDensity whose mixing measure has compact
support.  ``ApproximantSequence`` bundles a constructor with its target so
that a convergence study can walk an index ladder.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .density import (DensitySpec, MixingDistribution, MixtureDensity,
                      phi_delta, survival)
from .kernels import (KernelSpec, LocationScaleView, make_kernel,
                      to_location_scale)
from .quadrature import integrate, quad
from .special_fn import (DomainError, EnvelopeParams, lemma8_envelope,
                         log_gamma, std_normal_cdf)

FAMILIES = ("location_scale", "histogram", "triangular", "bernstein",
            "gamma_eq15", "inverse_gamma", "exponential_truncated",
            "scaled_uniform")

EPS_TARGET = {
    "location_scale": 0.01, "histogram": 0.01, "triangular": 0.01,
    "bernstein": 0.01, "exponential_truncated": 0.01,
    "gamma_eq15": 0.05, "inverse_gamma": 0.05, "scaled_uniform": 0.05,
}

DEFAULT_LADDER = (2, 4, 8, 16, 32, 64, 128, 256)


def _mass(f0, lo, hi):
    return f0.integrate(f0.eval, tol=1e-13, rtol=1e-13, lo=lo, hi=hi).value


def _dedupe(points, lo, hi):
    return sorted({float(p) for p in points if lo < p < hi})


# --- real line ------------------------------------------------------------

def location_scale_approximant(f0, view, m, eta):
    """Truncate f0 to (-m, m), renormalise, and smooth at bandwidth m^-eta."""
    if f0.support != "real_line" or f0.dim != 1:
        raise DomainError("location-scale approximant needs a density on R")
    if m < 1 or eta <= 0:
        raise DomainError("need m >= 1 and eta > 0")
    if isinstance(view, KernelSpec):
        view = to_location_scale(view)
    mass = _mass(f0, -m, m)
    if not mass > 0:
        raise DomainError(f"target has no mass in (-{m}, {m})")
    h = float(m) ** (-eta)
    mixing = MixingDistribution.continuous(
        f0.eval, -m, m, normalizer=1.0 / mass, point_mass=h,
        points=f0.points, check=False, log_pdf=f0.log_eval)
    offsets = np.array([-40.0, -10.0, -3.0, 0.0, 3.0, 10.0, 40.0]) * h
    kinks = np.asarray(view.kinks, dtype=float) * h

    def theta_points(x):
        # the kernel at x peaks at theta = x; kinks of the base move with it
        return np.concatenate([x - offsets, x - kinks])

    return MixtureDensity(view, mixing, hyper=h, theta_points=theta_points,
                          label=f"location_scale(m={m}, h={h:.6g})")


# --- unit interval --------------------------------------------------------

def _check_weights(raw, what):
    raw = np.asarray(raw, dtype=float)
    total = math.fsum(raw)
    if not total > 0:
        raise DomainError(f"{what}: target vanishes on every grid point")
    return raw / total


def histogram_weights(f0, m):
    """Bin weights proportional to f0 at the two ends of each bin."""
    m = int(m)
    if m < 1:
        raise DomainError("m must be >= 1")
    g = f0.eval(np.arange(m + 1) / m)
    return _check_weights(g[:-1] + g[1:], "histogram weights")


def histogram_approximant(f0, m):
    w = histogram_weights(f0, m)
    atoms = (np.arange(1, m + 1) - 0.5) / m
    return MixtureDensity(make_kernel("histogram"),
                          MixingDistribution.discrete(atoms, w, point_mass=m),
                          label=f"histogram(m={m})")


def triangular_weights(f0, n):
    """Node weights proportional to f0 at i/n, i = 0..n."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    return _check_weights(f0.eval(np.arange(n + 1) / n), "triangular weights")


def triangular_approximant(f0, n):
    w = triangular_weights(f0, n)
    return MixtureDensity(make_kernel("triangular"),
                          MixingDistribution.discrete(np.arange(n + 1.0), w,
                                                      point_mass=n),
                          label=f"triangular(n={n})")


def bernstein_weights(f0, k):
    """Probabilities of the k + 1 equal cells of [0, 1] under f0."""
    k = int(k)
    if k < 0:
        raise DomainError("k must be >= 0")
    edges = np.arange(k + 2) / (k + 1)
    if f0.cdf is not None:
        w = np.diff(np.asarray(f0.cdf(edges), dtype=float))
    else:
        w = np.array([quad(f0.eval, a, b) for a, b in zip(edges[:-1], edges[1:])])
    w = np.maximum(w, 0.0)
    return w / math.fsum(w)


def bernstein_approximant(f0, k):
    if f0.support != "unit_interval":
        raise DomainError("Bernstein approximant needs a [0, 1] target")
    w = bernstein_weights(f0, k)
    return MixtureDensity(make_kernel("bernstein"),
                          MixingDistribution.discrete(np.arange(k + 1.0), w,
                                                      point_mass=k),
                          label=f"bernstein(k={k})")


# --- positive half line -----------------------------------------------------

def _require_half_line(f0):
    if f0.support != "positive_half_line":
        raise DomainError("target must live on the positive half line")


def gamma_eq15_approximant(f0, m):
    """Gamma mixture over shapes in [2, 1 + m^2] at scale 1/m.

    The mixing density is m^-1 f0((alpha - 1)/m), renormalised by the f0
    mass of [1/m, m].  The shape integral is split around the mode of the
    integrand, which sits near alpha = m x + 1/2.
    """
    _require_half_line(f0)
    m = int(m)
    if m < 2:
        raise DomainError("m must be >= 2")
    mass = _mass(f0, 1.0 / m, float(m))
    if not mass > 0:
        raise DomainError("target has no mass in [1/m, m]")
    inv_m = 1.0 / m

    def mix_pdf(alpha):
        return inv_m * f0.eval((np.asarray(alpha) - 1.0) * inv_m)

    lo, hi = 2.0, 1.0 + m * m
    pts = [1.0 + m * p for p in f0.points]
    mixing = MixingDistribution.continuous(mix_pdf, lo, hi, normalizer=1.0 / mass,
                                           point_mass=inv_m, points=pts,
                                           check=False)
    widths = np.array([-12.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 12.0])

    def theta_points(x):
        mode = m * x + 0.5
        return _dedupe(mode + widths * math.sqrt(max(mode, 1.0)), lo, hi)

    return MixtureDensity(make_kernel("gamma"), mixing, hyper=inv_m,
                          theta_points=theta_points, rtol=1e-10,
                          label=f"gamma_eq15(m={m})")


def inverse_gamma_approximant(f0, m):
    """Inverse-gamma mixture with shape m over locations z in [1/m, m]."""
    _require_half_line(f0)
    m = int(m)
    if m < 2:
        raise DomainError("m must be >= 2")
    mass = _mass(f0, 1.0 / m, float(m))
    if not mass > 0:
        raise DomainError("target has no mass in [1/m, m]")
    lo, hi = 1.0 / m, float(m)
    mixing = MixingDistribution.continuous(f0.eval, lo, hi, normalizer=1.0 / mass,
                                           point_mass=float(m), points=f0.points,
                                           check=False)
    widths = np.array([-12.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 12.0])

    def theta_points(x):
        # as a function of z the kernel is a Gamma(m + 1, x/m) density
        return _dedupe(x + widths * x / math.sqrt(m), lo, hi)

    return MixtureDensity(make_kernel("inverse_gamma"), mixing, hyper=float(m),
                          theta_points=theta_points, rtol=1e-10,
                          label=f"inverse_gamma(m={m})")


def exponential_truncation(p0, a):
    """Restrict the rate measure p0 to [1/a, a] and renormalise."""
    if not a > 1:
        raise DomainError("a must exceed 1")
    lo, hi = 1.0 / a, float(a)
    if p0.kind == "discrete":
        keep = (p0.atoms >= lo) & (p0.atoms <= hi)
        w = p0.weights[keep]
        if not math.fsum(w) > 0:
            raise DomainError("truncation removes all mass")
        mixing = MixingDistribution.discrete(p0.atoms[keep], w / math.fsum(w))
    else:
        a_lo, a_hi = max(lo, p0.lo), min(hi, p0.hi)
        if not a_hi > a_lo:
            raise DomainError("truncation removes all mass")
        mass = quad(p0.pdf, a_lo, a_hi, points=p0.points)
        if not mass > 0:
            raise DomainError("truncation removes all mass")
        mixing = MixingDistribution.continuous(p0.pdf, a_lo, a_hi,
                                               normalizer=1.0 / mass,
                                               points=p0.points, check=False)

    def theta_points(x):
        # theta e^{-theta x} peaks at theta = 1/x
        return [1.0 / x] if x > 0 else []

    return MixtureDensity(make_kernel("exponential"), mixing,
                          theta_points=theta_points, rtol=1e-10,
                          label=f"exponential_truncated(a={a:g})")


def gamma_rate_measure(shape=2.0):
    """Gamma(shape, 1) rate measure; shape 2 mixes to 2 (1 + x)^-3."""
    lc = -float(log_gamma(shape))

    def pdf(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return np.exp(lc + (shape - 1.0) * np.log(t) - t)
    return MixingDistribution.continuous(pdf, 0.0, math.inf, normalizer=1.0)


def _solve_level(f0, level, start=1e-6):
    """x > start with f0(x) = level for a decreasing f0."""
    hi = max(start * 2, 1.0)
    while f0.eval(hi) > level:
        hi *= 2.0
        if hi > 1e8:
            raise DomainError("level not reached")
    return brentq(lambda x: float(f0.eval(x)) - level, start, hi, xtol=1e-14)


def scaled_uniform_weights(f0, m, x1=None, x2=None, residual=1e-12):
    """Atoms i/m and weights of the decreasing-density staircase.

    Weights come from differences of f0 on the grid i/m, with f0(x1)
    inserted between the two nodes around x1.  The block of atoms between
    x1 and x2 is rescaled so the weights sum to one; the atom ladder is cut
    where the untouched tail carries less than ``residual`` mass.
    """
    _require_half_line(f0)
    m = int(m)
    f_top = float(f0.eval(1e-6))
    if x1 is None:
        x1 = _solve_level(f0, 0.9 * f_top)
    if x2 is None:
        x2 = _solve_level(f0, min(0.01, 0.5 * float(f0.eval(x1))))
    if not 0 < x1 < x2:
        raise DomainError("need 0 < x1 < x2")
    a = float(f0.eval(x1))
    m1, m2 = int(math.floor(x1 * m)), int(math.floor(x2 * m))
    if m1 < 1 or m2 <= m1 + 1:
        raise DomainError(f"m = {m} too small to separate x1 and x2 on the grid")

    # ladder length: stop once x f0(x) + survival(x) is below the residual
    n = m2 + 2
    while True:
        x = n / m
        if x * float(f0.eval(x)) + float(survival(f0, x)) < residual:
            break
        n = int(n * 1.25) + 1
        if n > 10_000_000:
            raise DomainError("tail too heavy to truncate the atom ladder")
    i = np.arange(1, n + 1)
    grid = f0.eval(np.arange(0, n + 2) / m)
    if np.any(np.diff(grid[1:]) > 1e-14 * max(grid[1], 1.0)):
        raise DomainError("target is not decreasing on the grid")
    w = np.empty(n)
    fwd = grid[i] - grid[i + 1]
    bwd = grid[i - 1] - grid[i]
    w[:] = np.where(i < m1, fwd, bwd)
    w[m1 - 1] = grid[m1] - a
    w[m1] = a - grid[m1 + 1]
    w *= i / m
    w = np.maximum(w, 0.0)

    block = slice(m1 - 1, m2)
    outside = math.fsum(w[: m1 - 1]) + math.fsum(w[m2:])
    inside = math.fsum(w[block])
    w[block] *= (1.0 - outside) / inside
    return i / m, w


def scaled_uniform_approximant(f0, m, x1=None, x2=None):
    atoms, w = scaled_uniform_weights(f0, m, x1, x2)
    keep = w > 0
    w = w[keep] / math.fsum(w[keep])
    return MixtureDensity(make_kernel("scaled_uniform"),
                          MixingDistribution.discrete(atoms[keep], w),
                          label=f"scaled_uniform(m={m})")


# --- sequences ------------------------------------------------------------

@dataclass
class ApproximantSequence:
    """An approximant family bound to its target, indexed by m (or n, k, a)."""

    family: str
    f0: DensitySpec
    kernel: object = None
    eta: float = 0.5
    p0: MixingDistribution = None
    eps_target: float = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown approximant family {self.family!r}")
        if self.eps_target is None:
            self.eps_target = EPS_TARGET[self.family]
        if self.family == "exponential_truncated" and self.p0 is None:
            raise DomainError("exponential truncation needs a rate measure p0")
        if self.family == "location_scale" and self.kernel is None:
            raise DomainError("location-scale approximant needs a kernel")

    def at(self, index):
        fam = self.family
        if fam == "location_scale":
            return location_scale_approximant(self.f0, self.kernel, index,
                                              self.eta)
        if fam == "histogram":
            return histogram_approximant(self.f0, index)
        if fam == "triangular":
            return triangular_approximant(self.f0, index)
        if fam == "bernstein":
            return bernstein_approximant(self.f0, index)
        if fam == "gamma_eq15":
            return gamma_eq15_approximant(self.f0, index)
        if fam == "inverse_gamma":
            return inverse_gamma_approximant(self.f0, index)
        if fam == "exponential_truncated":
            return exponential_truncation(self.p0, index)
        return scaled_uniform_approximant(self.f0, index, **self.options)

    def kl_options(self, index):
        """Break points for the outer KL integral at this index."""
        fam = self.family
        if fam == "histogram":
            return {"points": tuple(np.arange(1, index) / index)}
        if fam == "triangular":
            return {"points": tuple(np.arange(1, index) / index)}
        if fam == "scaled_uniform":
            atoms, _ = scaled_uniform_weights(self.f0, index, **self.options)
            return {"points": tuple(atoms)}
        return {}


# --- lower-bound verification ----------------------------------------------

@dataclass
class BoundViolation:
    bound: str
    x: float
    value: float
    floor: float


@dataclass
class BoundReport:
    family: str
    m: int
    checked: dict
    violations: list
    skipped: list

    @property
    def ok(self):
        return not self.violations


def gamma_floor_small_x(x, m):
    """x^(m^2) e^(-x m) m^(m^2+1) / Gamma(m^2 + 1): the shape-(1+m^2) kernel."""
    x = np.asarray(x, dtype=float)
    k = m * m
    return np.exp(k * np.log(x) - x * m + (k + 1) * math.log(m) - log_gamma(k + 1.0))


def gamma_floor_large_x(x, m):
    """x e^(-x m) m^2: the shape-2 kernel."""
    x = np.asarray(x, dtype=float)
    return x * np.exp(-x * m) * m * m


def gamma_floor_small_x_uniform(x):
    """1 / (e x Gamma(1/x^2 + 1)), free of m."""
    x = np.asarray(x, dtype=float)
    return np.exp(-1.0 - np.log(x) - log_gamma(x ** -2 + 1.0))


def gamma_floor_large_x_uniform(x):
    """e^(-x^2) x^3, free of m."""
    x = np.asarray(x, dtype=float)
    return np.exp(-x * x) * x ** 3


def inverse_gamma_floor_large_x(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-(x + 1.0) * np.log(x) - 1.0 / x - log_gamma(x))


def inverse_gamma_floor_small_x(x):
    x = np.asarray(x, dtype=float)
    lx = np.log(x)
    return np.exp(-(2.0 / x) * lx - (1.0 / x + 1.0) * lx - x ** -3
                  - log_gamma(1.0 / x))


def inverse_gamma_window_floor(x, delta):
    """Normal-CDF lower bound on the kernel mass of the one-sided window."""
    x = np.asarray(x, dtype=float)
    return np.where(x < 1.0,
                    0.5 * (std_normal_cdf(1.0 + delta / x) - std_normal_cdf(1.0)),
                    0.5 * (std_normal_cdf(1.0) - std_normal_cdf(1.0 - delta / x)))


def gamma_window_mass(x, m, delta):
    """Integral of m^(mv+1) x^(mv) e^(-mx) / Gamma(mv+1) over the window in v.

    The window is [max(1/m, x), x + delta] below 1 and
    [x - delta, min(m, x)] from 1 upward.
    """
    if x < 1.0:
        a, b = max(1.0 / m, x), x + delta
    else:
        a, b = x - delta, min(float(m), x)
    if b <= a:
        return 0.0
    return gamma_shape_mass(x, m, a, b)


def gamma_shape_mass(x, m, a, b, tol=1e-14):
    """Integral over v in [a, b] of the gamma density with shape mv + 1."""
    lx, lm = math.log(x), math.log(m)

    def g(v):
        v = np.asarray(v, dtype=float)
        return np.exp((m * v + 1.0) * lm + m * v * lx - m * x
                      - log_gamma(m * v + 1.0))
    mode = x - 0.5 / m
    sd = math.sqrt(max(x, 1.0 / m) / m)
    pts = _dedupe(mode + sd * np.array([-12, -6, -3, -1, 0, 1, 3, 6, 12]), a, b)
    return integrate(g, a, b, tol=tol, rtol=1e-12, points=pts).value


def gamma_kernel_concentration(x=1.0, m=100, delta=0.5):
    """Total kernel mass over [1/m, m] and the mass farther than delta from x."""
    total = gamma_shape_mass(x, m, 1.0 / m, float(m))
    left = gamma_shape_mass(x, m, 1.0 / m, x - delta) if x - delta > 1.0 / m else 0.0
    right = gamma_shape_mass(x, m, x + delta, float(m)) if x + delta < m else 0.0
    return total, left + right


def verify_lower_bounds(seq, m, grid, delta=0.25, envelope=None, rtol=1e-9):
    """Compare the index-m approximant with its analytic floors on a grid.

    Points outside a floor's validity range are skipped for that floor.
    """
    if seq.family not in ("gamma_eq15", "inverse_gamma"):
        raise DomainError("lower bounds exist for gamma_eq15 and inverse_gamma")
    approx = seq.at(m)
    grid = np.asarray(grid, dtype=float)
    vals = approx(grid)
    lo, hi = 1.0 / m, m + 1.0 / m
    floors = {}
    if seq.family == "gamma_eq15":
        env = envelope or EnvelopeParams(delta=delta)
        floors["small_x_sharp"] = (grid < lo, lambda x: gamma_floor_small_x(x, m))
        floors["large_x_sharp"] = (grid > hi, lambda x: gamma_floor_large_x(x, m))
        floors["small_x_uniform"] = (grid < lo, gamma_floor_small_x_uniform)
        floors["large_x_uniform"] = (grid > hi, gamma_floor_large_x_uniform)
        floors["window"] = (
            (grid > lo) & (grid <= hi),
            lambda x: lemma8_envelope(x, env) * phi_delta(seq.f0, x, env.delta,
                                                          "one_sided"))
    else:
        floors["large_x"] = (grid > m, inverse_gamma_floor_large_x)
        floors["small_x"] = (grid < 1.0 / m, inverse_gamma_floor_small_x)
        floors["window"] = (
            (grid >= lo) & (grid <= hi),
            lambda x: inverse_gamma_window_floor(x, delta)
            * phi_delta(seq.f0, x, delta, "one_sided"))

    checked, violations, skipped = {}, [], []
    for name, (valid, floor_fn) in floors.items():
        xs = grid[valid]
        skipped.extend((name, float(x)) for x in grid[~valid])
        checked[name] = int(xs.size)
        if not xs.size:
            continue
        with np.errstate(all="ignore"):
            fl = np.asarray(floor_fn(xs), dtype=float)
        got = vals[valid]
        bad = got < fl * (1.0 - rtol)
        violations.extend(BoundViolation(name, float(x), float(v), float(f))
                          for x, v, f in zip(xs[bad], got[bad], fl[bad]))
    return BoundReport(seq.family, m, checked, violations, skipped)
