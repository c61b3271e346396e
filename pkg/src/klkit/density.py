"""Target densities, mixing distributions and kernel mixtures."""
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special as _sp

from .kernels import (KernelSpec, LocationScaleView, kernel_eval,
                      kernel_log_eval)
from .quadrature import QuadratureError, integrate_mapped, quad
from .special_fn import (DomainError, HALF_LOG_2PI, gamma_cdf, log_gamma,
                         std_normal_cdf)

SUPPORTS = ("real_line", "unit_interval", "positive_half_line")
_BOUNDS = {"real_line": (-math.inf, math.inf), "unit_interval": (0.0, 1.0),
           "positive_half_line": (0.0, math.inf)}


class NormalizationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DensitySpec:
    """A target density on one of three supports.

    ``pdf`` must be vectorised.  ``points`` lists kinks or jumps that the
    quadrature should split at; ``scale`` is the typical length scale used
    when mapping infinite ranges.  For ``dim > 1`` only spherically
    symmetric densities are supported and ``radial_pdf(r)`` gives the
    density value at radius r.
    """

    name: str
    pdf: object
    support: str = "real_line"
    dim: int = 1
    upper_bound: float = None
    cdf: object = None
    logpdf: object = None
    points: tuple = ()
    scale: float = 1.0
    radial_pdf: object = None
    params: dict = field(default_factory=dict)
    check: bool = True

    def __post_init__(self):
        if self.support not in SUPPORTS:
            raise DomainError(f"unknown support {self.support!r}")
        if self.dim > 1 and self.radial_pdf is None:
            raise DomainError("multivariate targets need a radial density")
        if self.check:
            mass = self.total_mass()
            if abs(mass - 1.0) > 1e-6:
                raise NormalizationError(
                    f"{self.name}: density integrates to {mass:.10g}")
            if self.upper_bound is not None:
                grid = self.grid(10_000)
                vals = self.eval(grid)
                if np.any(vals > self.upper_bound * (1 + 1e-12)):
                    raise NormalizationError(
                        f"{self.name}: exceeds declared bound {self.upper_bound}")

    @property
    def bounds(self):
        return _BOUNDS[self.support]

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.bounds
        with np.errstate(all="ignore"):
            v = np.asarray(self.pdf(x), dtype=float)
        if self.dim == 1:
            v = np.where((x >= lo) & (x <= hi), v, 0.0)
        return v

    def log_eval(self, x):
        x = np.asarray(x, dtype=float)
        if self.logpdf is not None:
            lo, hi = self.bounds
            with np.errstate(all="ignore"):
                v = np.asarray(self.logpdf(x), dtype=float)
            return np.where((x >= lo) & (x <= hi), v, -np.inf)
        with np.errstate(divide="ignore"):
            return np.log(self.eval(x))

    def grid(self, n):
        lo, hi = self.bounds
        if self.support == "unit_interval":
            return np.linspace(0.0, 1.0, n)
        if self.support == "positive_half_line":
            return np.concatenate([[0.0], np.geomspace(1e-6, 1e3, n - 1)]) * self.scale
        half = np.geomspace(1e-6, 1e3, n // 2) * self.scale
        return np.sort(np.concatenate([-half, half]))

    def integrate(self, g, tol=1e-10, rtol=1e-10, lo=None, hi=None):
        """Adaptive integral of a vectorised g over the support."""
        a, b = self.bounds
        a = a if lo is None else max(a, lo)
        b = b if hi is None else min(b, hi)
        if self.dim > 1:
            area = 2.0 * math.pi ** (self.dim / 2) / math.gamma(self.dim / 2)
            return integrate_mapped(
                lambda r: g(r) * r ** (self.dim - 1) * area, 0.0, math.inf,
                tol=tol, rtol=rtol, scale=self.scale)
        return integrate_mapped(g, a, b, tol=tol, rtol=rtol,
                                points=self.points, scale=self.scale)

    def total_mass(self):
        if self.dim > 1:
            return self.integrate(self.radial_pdf).value
        return self.integrate(self.eval).value

    def with_name(self, name):
        return DensitySpec(name, self.pdf, self.support, self.dim,
                           self.upper_bound, self.cdf, self.logpdf,
                           self.points, self.scale, self.radial_pdf,
                           self.params, check=False)


# --- built-in targets ------------------------------------------------------

def normal(mu=0.0, sigma=1.0):
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    return DensitySpec(
        "normal", lambda x: np.exp(-0.5 * ((x - mu) / sigma) ** 2 - HALF_LOG_2PI) / sigma,
        "real_line", upper_bound=1.0 / (sigma * math.sqrt(2 * math.pi)),
        cdf=lambda x: std_normal_cdf((np.asarray(x) - mu) / sigma),
        logpdf=lambda x: -0.5 * ((x - mu) / sigma) ** 2 - HALF_LOG_2PI - math.log(sigma),
        scale=sigma, params={"mu": mu, "sigma": sigma})


def mv_normal(d=2):
    d = int(d)
    c = -0.5 * d * math.log(2 * math.pi)

    def pdf(x):
        x = np.asarray(x, dtype=float)
        return np.exp(c - 0.5 * np.sum(x * x, axis=-1))
    return DensitySpec("mv_normal", pdf, "real_line", dim=d,
                       upper_bound=math.exp(c),
                       radial_pdf=lambda r: np.exp(c - 0.5 * r * r),
                       params={"d": d})


def cauchy(loc=0.0, scale=1.0):
    return DensitySpec(
        "cauchy", lambda x: 1.0 / (math.pi * scale * (1.0 + ((x - loc) / scale) ** 2)),
        "real_line", upper_bound=1.0 / (math.pi * scale),
        cdf=lambda x: 0.5 + np.arctan((np.asarray(x) - loc) / scale) / math.pi,
        logpdf=lambda x: -math.log(math.pi * scale) - np.log1p(((x - loc) / scale) ** 2),
        scale=scale, params={"loc": loc, "scale": scale})


def laplace(loc=0.0, scale=1.0):
    def cdf(x):
        z = (np.asarray(x, dtype=float) - loc) / scale
        return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0)),
                        1.0 - 0.5 * np.exp(-np.maximum(z, 0)))
    return DensitySpec(
        "laplace", lambda x: 0.5 / scale * np.exp(-np.abs(x - loc) / scale),
        "real_line", upper_bound=0.5 / scale, cdf=cdf,
        logpdf=lambda x: -math.log(2 * scale) - np.abs(x - loc) / scale,
        points=(loc,), scale=scale, params={"loc": loc, "scale": scale})


def student_t(nu=3.0):
    c = float(log_gamma(0.5 * (nu + 1)) - log_gamma(0.5 * nu)) - 0.5 * math.log(nu * math.pi)
    return DensitySpec(
        "student_t", lambda x: np.exp(c - 0.5 * (nu + 1) * np.log1p(x * x / nu)),
        "real_line", upper_bound=math.exp(c),
        logpdf=lambda x: c - 0.5 * (nu + 1) * np.log1p(x * x / nu),
        params={"nu": nu})


def normal_mixture(weight=0.5, mu1=-1.0, sigma1=1.0, mu2=1.0, sigma2=1.0):
    a, b = normal(mu1, sigma1), normal(mu2, sigma2)
    return DensitySpec(
        "normal_mixture", lambda x: weight * a.pdf(x) + (1 - weight) * b.pdf(x),
        "real_line",
        upper_bound=weight * a.upper_bound + (1 - weight) * b.upper_bound,
        cdf=lambda x: weight * a.cdf(x) + (1 - weight) * b.cdf(x),
        scale=max(sigma1, sigma2),
        params={"weight": weight, "mu1": mu1, "sigma1": sigma1,
                "mu2": mu2, "sigma2": sigma2})


def uniform():
    return DensitySpec("uniform", lambda x: np.ones_like(np.asarray(x, dtype=float)),
                       "unit_interval", upper_bound=1.0,
                       cdf=lambda x: np.clip(x, 0.0, 1.0))


def beta_poly(a=2, b=2):
    """Beta(a, b) density with integer exponents, e.g. 6x(1-x) for (2, 2)."""
    a, b = int(a), int(b)
    if a < 1 or b < 1:
        raise DomainError("beta_poly needs integer a, b >= 1")
    lc = float(log_gamma(a + b) - log_gamma(a) - log_gamma(b))
    c = math.exp(lc)

    def pdf(x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return c * x ** (a - 1) * (1.0 - x) ** (b - 1)
    mode = (a - 1) / (a + b - 2) if a + b > 2 else 0.5
    return DensitySpec(f"beta_poly({a},{b})", pdf, "unit_interval",
                       upper_bound=float(pdf(mode)) * (1 + 1e-12),
                       cdf=lambda x: _sp.betainc(a, b, np.clip(x, 0.0, 1.0)),
                       params={"a": a, "b": b})


def exponential(rate=1.0):
    return DensitySpec(
        "exp", lambda x: rate * np.exp(-rate * np.maximum(x, 0.0)),
        "positive_half_line", upper_bound=rate,
        cdf=lambda x: -np.expm1(-rate * np.maximum(x, 0.0)),
        logpdf=lambda x: math.log(rate) - rate * x, scale=1.0 / rate,
        params={"rate": rate})


def gamma(shape=2.0, scale=1.0):
    if shape <= 0 or scale <= 0:
        raise DomainError("gamma needs shape, scale > 0")
    lc = -float(log_gamma(shape)) - shape * math.log(scale)

    def logpdf(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return lc + _sp.xlogy(shape - 1.0, x) - x / scale
    mode = (shape - 1) * scale if shape >= 1 else None
    ub = float(np.exp(logpdf(mode))) * (1 + 1e-12) if mode is not None else None
    return DensitySpec(
        "gamma", lambda x: np.exp(logpdf(np.maximum(x, 0.0))),
        "positive_half_line", upper_bound=ub,
        cdf=lambda x: gamma_cdf(np.maximum(np.asarray(x, float), 0) / scale, shape),
        logpdf=logpdf, scale=scale * max(shape, 1.0),
        params={"shape": shape, "scale": scale})


def lognormal(mu=0.0, sigma=1.0):
    def logpdf(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lx = np.log(x)
            return np.where(x > 0, -0.5 * ((lx - mu) / sigma) ** 2 - lx
                            - math.log(sigma) - HALF_LOG_2PI, -np.inf)
    return DensitySpec(
        "lognormal", lambda x: np.exp(logpdf(x)), "positive_half_line",
        cdf=lambda x: std_normal_cdf((np.log(np.maximum(x, 1e-300)) - mu) / sigma),
        logpdf=logpdf, scale=math.exp(mu), params={"mu": mu, "sigma": sigma})


def pareto(shape=2.0):
    """Lomax density a (1 + x)^-(a+1); shape 2 gives 2 (1 + x)^-3."""
    a = float(shape)
    return DensitySpec(
        "pareto", lambda x: a * (1.0 + np.maximum(x, 0.0)) ** (-a - 1.0),
        "positive_half_line", upper_bound=a,
        cdf=lambda x: 1.0 - (1.0 + np.maximum(x, 0.0)) ** (-a),
        logpdf=lambda x: math.log(a) - (a + 1.0) * np.log1p(x),
        params={"shape": a})


def rayleigh():
    """Density 2x exp(-x^2), whose survival function is exp(-x^2)."""
    return DensitySpec(
        "rayleigh", lambda x: 2.0 * np.maximum(x, 0.0) * np.exp(-np.square(x)),
        "positive_half_line", upper_bound=math.sqrt(2.0) * math.exp(-0.5) * (1 + 1e-12),
        cdf=lambda x: -np.expm1(-np.square(np.maximum(x, 0.0))))


def piecewise_polynomial(breaks, coeffs, support=None, normalize=True):
    """Density from a table of polynomial pieces.

    ``coeffs[i]`` holds ascending-power coefficients in (x - breaks[i]) for
    the piece [breaks[i], breaks[i+1]].  Outside the table the density is 0.
    """
    breaks = np.asarray(breaks, dtype=float)
    coeffs = [np.asarray(c, dtype=float) for c in coeffs]
    if len(coeffs) != breaks.size - 1 or np.any(np.diff(breaks) <= 0):
        raise DomainError("need len(breaks) - 1 increasing pieces")
    if support is None:
        support = ("unit_interval" if breaks[0] >= 0 and breaks[-1] <= 1
                   else "positive_half_line" if breaks[0] >= 0 else "real_line")

    def raw(x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(breaks, x, side="right") - 1, 0,
                      len(coeffs) - 1)
        out = np.zeros(x.shape)
        for i, c in enumerate(coeffs):
            sel = idx == i
            if np.any(sel):
                out[sel] = np.polynomial.polynomial.polyval(x[sel] - breaks[i], c)
        inside = (x >= breaks[0]) & (x <= breaks[-1])
        return np.where(inside, np.maximum(out, 0.0), 0.0)

    mass = 1.0
    if normalize:
        mass = sum(quad(raw, breaks[i], breaks[i + 1])
                   for i in range(len(coeffs)))
    return DensitySpec("piecewise_polynomial", lambda x: raw(x) / mass,
                       support, points=tuple(breaks.tolist()),
                       params={"breaks": breaks.tolist(),
                               "coeffs": [c.tolist() for c in coeffs]})


BUILTINS = {
    "normal": normal,
    "mv_normal": mv_normal,
    "cauchy": cauchy,
    "laplace": laplace,
    "student_t": student_t,
    "normal_mixture": normal_mixture,
    "uniform": uniform,
    "beta_poly": beta_poly,
    "exp": exponential,
    "gamma": gamma,
    "lognormal": lognormal,
    "pareto": pareto,
    "rayleigh": rayleigh,
    "piecewise_polynomial": piecewise_polynomial,
}


def make_density(name, **params):
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise DomainError(f"unknown density {name!r}") from None
    return factory(**params)


# --- mixing distributions and mixtures ---------------------------------------

@dataclass(frozen=True, eq=False)
class MixingDistribution:
    """Discrete (atoms, weights) or continuous mixing measure.

    Discrete atoms are an array of shape (n,) for one mixed parameter, or
    (n, 2) for mixed (theta, phi) pairs.  A continuous measure has density
    ``normalizer * pdf(theta)`` on [lo, hi]; an optional ``log_pdf`` keeps
    far tails from underflowing in log-space evaluation.  ``point_mass``
    fixes the second kernel parameter, i.e. the measure is P x
    delta(point_mass).
    """

    kind: str
    atoms: np.ndarray = None
    weights: np.ndarray = None
    lo: float = None
    hi: float = None
    pdf: object = None
    normalizer: float = 1.0
    point_mass: float = None
    points: tuple = ()
    log_pdf: object = None

    @classmethod
    def discrete(cls, atoms, weights, point_mass=None):
        atoms = np.asarray(atoms, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if atoms.shape[0] != weights.size:
            raise DomainError("atoms and weights differ in length")
        if np.any(weights < 0) or not np.any(weights > 0):
            raise DomainError("weights must be non-negative and not all zero")
        if abs(math.fsum(weights) - 1.0) > 1e-12:
            raise DomainError(f"weights sum to {math.fsum(weights)!r}, not 1")
        return cls("discrete", atoms=atoms, weights=weights,
                   point_mass=point_mass)

    @classmethod
    def point(cls, theta, point_mass=None):
        return cls.discrete([theta], [1.0], point_mass)

    @classmethod
    def continuous(cls, pdf, lo, hi, normalizer=None, point_mass=None,
                   points=(), check=True, log_pdf=None):
        if normalizer is None:
            normalizer = 1.0 / quad(pdf, lo, hi, points=points)
        dist = cls("density", lo=float(lo), hi=float(hi), pdf=pdf,
                   normalizer=float(normalizer), point_mass=point_mass,
                   points=tuple(points), log_pdf=log_pdf)
        if check:
            mass = dist.normalizer * quad(pdf, lo, hi, points=points)
            if abs(mass - 1.0) > 1e-8:
                raise NormalizationError(f"mixing density has mass {mass!r}")
        return dist

    @property
    def support(self):
        if self.kind == "discrete":
            a = self.atoms[self.weights > 0]
            col = a if a.ndim == 1 else a[:, 0]
            return float(col.min()), float(col.max())
        return self.lo, self.hi


@dataclass(frozen=True, eq=False)
class MixtureDensity:
    """Kernel mixture f_P(x) = int K(x; theta, phi) dP(theta).

    ``kernel`` is a KernelSpec or a LocationScaleView; a view is evaluated
    in its own coordinate with theta as location and phi as scale.
    ``theta_points(x)`` may return break points for the inner integral of
    a continuous mixing measure (kernel peaks, window edges).
    """

    kernel: KernelSpec
    mixing: MixingDistribution
    hyper: float = None
    theta_points: object = None
    rtol: float = 1e-8
    label: str = ""

    def _phi(self):
        return self.mixing.point_mass if self.mixing.point_mass is not None else self.hyper

    def __call__(self, x):
        return mixture_eval(self, x)

    def log(self, x):
        return mixture_log_eval(self, x)

    @property
    def support(self):
        if isinstance(self.kernel, LocationScaleView):
            return "real_line"
        return self.kernel.support

    @property
    def family(self):
        return getattr(self.kernel, "family", None)

    @cached_property
    def _step_table(self):
        # scaled-uniform ladders: f(x) = sum over theta >= x of w / theta
        order = np.argsort(self.mixing.atoms)
        theta = self.mixing.atoms[order]
        dens = self.mixing.weights[order] / theta
        suffix = np.concatenate([np.cumsum(dens[::-1])[::-1], [0.0]])
        return theta, suffix


def _discrete_terms(m, x):
    mix = m.mixing
    atoms = mix.atoms
    x = np.asarray(x, dtype=float)
    if atoms.ndim == 2 and m.family != "mv_normal":
        theta, phi = atoms[:, 0], atoms[:, 1]
    else:
        theta, phi = atoms, m._phi()
    xs = x[..., None]
    if m.family in ("histogram", "triangular"):
        return xs, theta, phi, None
    with np.errstate(divide="ignore"):
        return xs, theta, phi, np.log(mix.weights)


def mixture_eval(m, x):
    """Density of a kernel mixture at x (vectorised over x)."""
    x = np.asarray(x, dtype=float)
    mix = m.mixing
    if mix.kind == "discrete" and m.family == "scaled_uniform":
        theta, suffix = m._step_table
        idx = np.searchsorted(theta, x, side="left")
        return np.where(x >= 0, suffix[idx], 0.0)
    if mix.kind == "discrete" and isinstance(m.kernel, LocationScaleView):
        return np.exp(mixture_log_eval(m, x))
    if mix.kind == "discrete":
        xs, theta, phi, _ = _discrete_terms(m, x)
        if m.family == "mv_normal" and m.kernel.dim > 1:
            k = kernel_eval(m.kernel, x[..., None, :], theta, phi)
        else:
            k = kernel_eval(m.kernel, xs, theta, phi)
        return k @ mix.weights
    return np.exp(mixture_log_eval(m, x))


def mixture_log_eval(m, x):
    """Log mixture density.

    Discrete mixing uses log-sum-exp.  For continuous mixing the inner
    integrand is shifted by its largest sampled log value before
    exponentiation, so the result stays finite far below the underflow
    threshold of the density itself.
    """
    x = np.asarray(x, dtype=float)
    mix = m.mixing
    if mix.kind == "discrete":
        if m.family in ("histogram", "triangular", "scaled_uniform"):
            with np.errstate(divide="ignore"):
                return np.log(mixture_eval(m, x))
        xs, theta, phi, lw = _discrete_terms(m, x)
        if m.family == "mv_normal" and m.kernel.dim > 1:
            lk = kernel_log_eval(m.kernel, x[..., None, :], theta, phi)
        else:
            lk = _kernel_log_values(m.kernel, xs, theta, phi)
        with np.errstate(divide="ignore"):
            return _sp.logsumexp(lk + lw, axis=-1)
    flat = x.ravel()
    out = np.empty(flat.size)
    for i, xi in enumerate(flat):
        out[i] = _continuous_log_at(m, xi)
    return out.reshape(x.shape)


def _kernel_log_values(kernel, x, theta, phi):
    if isinstance(kernel, LocationScaleView):
        return kernel.kernel_log(x, theta, phi)
    return kernel_log_eval(kernel, x, theta, phi)


def _probe_grid(lo, hi, pts):
    if math.isfinite(lo) and math.isfinite(hi):
        base = np.linspace(lo, hi, 65)
    elif math.isfinite(lo):
        base = lo + np.concatenate([[0.0], np.geomspace(1e-4, 1e4, 64)])
    else:
        base = np.concatenate([-np.geomspace(1e4, 1e-4, 32), [0.0],
                               np.geomspace(1e-4, 1e4, 32)])
    probe = np.concatenate([base, np.asarray(pts, dtype=float)])
    return probe[(probe >= lo) & (probe <= hi)]


def _continuous_log_at(m, xi):
    mix = m.mixing
    phi = m._phi()

    def log_integrand(theta):
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = (mix.log_pdf(theta) if mix.log_pdf is not None
                  else np.log(mix.pdf(theta)))
            v = _kernel_log_values(m.kernel, xi, theta, phi) + lp
        return np.where(np.isnan(v), -np.inf, v)

    pts = list(mix.points)
    if m.theta_points is not None:
        pts += [float(p) for p in m.theta_points(xi)]
    grid = _probe_grid(mix.lo, mix.hi, pts)
    probe = log_integrand(grid)
    shift = float(np.max(probe)) if probe.size else -np.inf
    if not math.isfinite(shift):
        shift = 0.0
    else:
        # a peak squeezed against the probe maximum needs resolving panels
        top = float(grid[int(np.argmax(probe))])
        width = (mix.hi - mix.lo) if math.isfinite(mix.hi - mix.lo) else abs(top) + 1.0
        steps = width * 10.0 ** -np.arange(2.0, 12.0, 2.0)
        pts += list(top - steps) + list(top + steps)

    seen = [shift]

    def integrand(theta):
        v = log_integrand(theta)
        if v.size:
            seen[0] = max(seen[0], float(np.max(v)))
        # clipped so a missed peak cannot overflow; the loop below retries
        return np.exp(np.minimum(v - shift, 600.0))

    for _ in range(8):
        res = integrate_mapped(integrand, mix.lo, mix.hi, tol=1e-300,
                               rtol=m.rtol, points=pts)
        # the probe can miss a narrow peak; shift to the largest value seen
        if not seen[0] > shift + 600.0:
            break
        shift = seen[0]
    if not res.converged and res.error > 1e-6 * max(abs(res.value), 1e-300):
        raise QuadratureError(f"mixture integral did not converge at x={xi}",
                              res.value, res.error)
    if res.value <= 0:
        return -math.inf
    return shift + math.log(res.value) + math.log(mix.normalizer)


# --- functionals of the target -------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, a, b, tol=1e-10, max_iter=200):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) < tol * (1.0 + abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return min(fc, fd)


def phi_delta(f0, x, delta, variant="two_sided", n_grid=256):
    """Infimum of f0 over a window of half-width delta around x.

    ``two_sided`` uses [x - delta, x + delta]; ``one_sided`` (half-line
    targets only) looks right of x when x < 1 and left of x otherwise.
    Windows are clipped to the support.
    """
    if delta <= 0:
        raise DomainError("delta must be positive")
    if variant not in ("two_sided", "one_sided"):
        raise DomainError(f"unknown variant {variant!r}")
    if variant == "one_sided" and f0.support != "positive_half_line":
        raise DomainError("one-sided window needs a half-line target")
    x = np.asarray(x, dtype=float)
    lo_s, hi_s = f0.bounds
    out = np.empty(x.size)
    for i, xi in enumerate(x.ravel()):
        if variant == "two_sided":
            a, b = xi - delta, xi + delta
        elif xi < 1.0:
            a, b = xi, xi + delta
        else:
            a, b = xi - delta, xi
        a, b = max(a, lo_s), min(b, hi_s)
        grid = np.linspace(a, b, n_grid)
        vals = f0.eval(grid)
        k = int(np.argmin(vals))
        best = float(vals[k])
        ga, gb = grid[max(k - 1, 0)], grid[min(k + 1, n_grid - 1)]
        if gb > ga:
            best = min(best, _golden_min(lambda t: float(f0.eval(t)), ga, gb))
        out[i] = min(best, float(f0.eval(xi)))
    return out.reshape(x.shape) if x.ndim else float(out[0])


def log_transform(f0):
    """Density of y = log X: g0(y) = e^y f0(e^y)."""
    if f0.support != "positive_half_line":
        raise DomainError("log transform needs a half-line target")

    def logpdf(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = y + f0.log_eval(np.exp(y))
        return np.where(np.isnan(out), -np.inf, out)

    def pdf(y):
        return np.exp(logpdf(y))
    cdf = None
    if f0.cdf is not None:
        cdf = lambda y: f0.cdf(np.exp(np.asarray(y, dtype=float)))  # noqa: E731
    return DensitySpec(f"log({f0.name})", pdf, "real_line", cdf=cdf,
                       logpdf=logpdf, params={"base": f0.name})


def survival(f0, x):
    """1 - F0(x)."""
    x = np.asarray(x, dtype=float)
    if f0.cdf is not None:
        return 1.0 - np.asarray(f0.cdf(x), dtype=float)
    lo, hi = f0.bounds
    out = np.empty(x.size)
    for i, xi in enumerate(x.ravel()):
        if xi <= lo:
            out[i] = 1.0
        else:
            out[i] = f0.integrate(f0.eval, lo=xi).value
    return out.reshape(x.shape) if x.ndim else float(out[0])
