"""Catalog of the fourteen mixture kernels.

Each family is addressed by a stable string name.  Parameters follow one
convention throughout: ``theta`` is the mixed parameter and ``phi`` the
second (scale, shape or resolution) parameter.

=================== ==================== ===================== ===========
family              theta                phi                   support
=================== ==================== ===================== ===========
skew_normal         location             scale h > 0           R
mv_normal           location (d-vector)  scale h > 0           R^d
double_exponential  location             scale h > 0           R
logistic            location             scale h > 0           R
t                   location             scale h > 0           R
histogram           bin point in [0, 1]  bins m (int >= 1)     [0, 1]
triangular          node i in 0..n       nodes n (int >= 1)    [0, 1]
bernstein           index j in 0..k      degree k (int >= 0)   [0, 1]
lognormal           log-location         log-scale > 0         (0, inf)
weibull             shape > 0            scale > 0             (0, inf)
gamma               shape alpha > 0      scale beta > 0        (0, inf)
inverse_gamma       location z > 0       shape k > 0           (0, inf)
exponential         rate > 0             unused                [0, inf)
scaled_uniform      upper end > 0        unused                [0, inf)
=================== ==================== ===================== ===========
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import special as _sp

from .special_fn import DomainError, HALF_LOG_2PI, log_gamma

FAMILIES = (
    "skew_normal",
    "mv_normal",
    "double_exponential",
    "logistic",
    "t",
    "histogram",
    "triangular",
    "bernstein",
    "lognormal",
    "weibull",
    "gamma",
    "inverse_gamma",
    "exponential",
    "scaled_uniform",
)

LOCATION_SCALE = ("skew_normal", "mv_normal", "double_exponential",
                  "logistic", "t")
UNIT_INTERVAL = ("histogram", "triangular", "bernstein")
HALF_LINE = ("lognormal", "weibull", "gamma", "inverse_gamma", "exponential",
             "scaled_uniform")

_DEFAULT_HYPER = {"skew_normal": {"lam": 0.0}, "mv_normal": {"d": 1},
                  "t": {"nu": 1.0}}


class UnsupportedFamilyError(ValueError):
    pass


class NonDifferentiableError(ValueError):
    """Score requested at a point where the base density has a kink."""

    def __init__(self, point):
        super().__init__(f"base density is not differentiable at {point!r}")
        self.point = point


@dataclass(frozen=True)
class KernelSpec:
    family: str
    hyper: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UnsupportedFamilyError(f"unknown kernel family {self.family!r}")
        merged = dict(_DEFAULT_HYPER.get(self.family, {}))
        merged.update(self.hyper or {})
        object.__setattr__(self, "hyper", merged)
        if self.family == "t" and not merged["nu"] > 0:
            raise DomainError("t kernel needs nu > 0")
        if self.family == "mv_normal" and not (int(merged["d"]) >= 1):
            raise DomainError("mv_normal needs d >= 1")
        if self.family == "skew_normal" and not np.isfinite(merged["lam"]):
            raise DomainError("skewness must be finite")

    def __hash__(self):
        return hash((self.family, tuple(sorted(self.hyper.items()))))

    @property
    def dim(self):
        return int(self.hyper["d"]) if self.family == "mv_normal" else 1

    @property
    def support(self):
        if self.family in UNIT_INTERVAL:
            return (0.0, 1.0)
        if self.family in HALF_LINE:
            return (0.0, np.inf)
        return (-np.inf, np.inf)

    @property
    def theta_space(self):
        return _THETA_SPACE[self.family]

    @property
    def phi_space(self):
        return _PHI_SPACE[self.family]


_THETA_SPACE = {
    "skew_normal": "real", "mv_normal": "real^d", "double_exponential": "real",
    "logistic": "real", "t": "real", "histogram": "[0, 1]",
    "triangular": "integer 0..n", "bernstein": "integer 0..k",
    "lognormal": "real", "weibull": "positive", "gamma": "positive",
    "inverse_gamma": "positive", "exponential": "positive",
    "scaled_uniform": "positive",
}
_PHI_SPACE = {
    "skew_normal": "positive", "mv_normal": "positive",
    "double_exponential": "positive", "logistic": "positive", "t": "positive",
    "histogram": "integer >= 1", "triangular": "integer >= 1",
    "bernstein": "integer >= 0", "lognormal": "positive", "weibull": "positive",
    "gamma": "positive", "inverse_gamma": "positive", "exponential": "vacuous",
    "scaled_uniform": "vacuous",
}


ALIASES = {"normal": ("skew_normal", {"lam": 0.0})}


def make_kernel(family, **hyper):
    """KernelSpec by name; ``normal`` is the skew-normal kernel with lam = 0."""
    if family in ALIASES:
        family, fixed = ALIASES[family]
        hyper = {**fixed, **hyper}
    return KernelSpec(family, hyper)


# --- base densities in log form -------------------------------------------

def _log_skew_normal(z, lam):
    return np.log(2.0) - 0.5 * z * z - HALF_LOG_2PI + _sp.log_ndtr(lam * z)


def _log_logistic(z):
    a = np.abs(z)
    return -a - 2.0 * np.log1p(np.exp(-a))


def _log_t(z, nu):
    c = (log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu)
         - 0.5 * np.log(nu * np.pi))
    return c - 0.5 * (nu + 1.0) * np.log1p(z * z / nu)


def _log_gumbel_min(z):
    return z - np.exp(z)


def _check(cond, msg):
    if not np.all(cond):
        raise DomainError(msg)


def _as_int(v, name, minimum):
    arr = np.asarray(v, dtype=float)
    _check(np.isfinite(arr) & (arr == np.round(arr)) & (arr >= minimum),
           f"{name} must be an integer >= {minimum}")
    return arr


def kernel_log_eval(spec, x, theta, phi=None):
    """Log kernel density, -inf outside the support.

    Arguments broadcast against each other.  For ``mv_normal`` the last axis
    of ``x`` and ``theta`` is the coordinate axis.
    """
    fam = spec.family
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if fam in LOCATION_SCALE:
        h = np.asarray(1.0 if phi is None else phi, dtype=float)
        _check(h > 0, "scale must be positive")
        if fam == "mv_normal":
            d = spec.dim
            if d == 1:
                z = (x - theta) / h
                return -0.5 * z * z - HALF_LOG_2PI - np.log(h)
            z = (x - theta) / np.expand_dims(h, -1)
            if z.shape[-1] != d:
                raise DomainError(f"expected points of dimension {d}")
            return (-0.5 * np.sum(z * z, axis=-1) - d * HALF_LOG_2PI
                    - d * np.log(h))
        z = (x - theta) / h
        if fam == "skew_normal":
            lz = _log_skew_normal(z, spec.hyper["lam"])
        elif fam == "double_exponential":
            lz = -np.abs(z) - np.log(2.0)
        elif fam == "logistic":
            lz = _log_logistic(z)
        else:
            lz = _log_t(z, float(spec.hyper["nu"]))
        return lz - np.log(h)

    with np.errstate(divide="ignore", invalid="ignore"):
        if fam == "histogram":
            m = _as_int(phi, "bin count", 1)
            _check((theta >= 0) & (theta <= 1), "bin point must lie in [0, 1]")
            bx = np.maximum(np.ceil(x * m), 1.0)
            bt = np.maximum(np.ceil(theta * m), 1.0)
            inside = (x >= 0) & (x <= 1) & (bx == bt)
            return np.where(inside, np.log(m), -np.inf)

        if fam == "triangular":
            n = _as_int(phi, "node count", 1)
            i = _as_int(theta, "node index", 0)
            _check(i <= n, "node index must not exceed node count")
            val = _triangular(x, i, n)
            return np.where(val > 0, np.log(val), -np.inf)

        if fam == "bernstein":
            k = _as_int(phi, "degree", 0)
            j = _as_int(theta, "index", 0)
            _check(j <= k, "index must not exceed degree")
            inside = (x >= 0) & (x <= 1)
            xc = np.clip(x, 0.0, 1.0)
            lb = (np.log(k + 1.0) + log_gamma(k + 1.0) - log_gamma(j + 1.0)
                  - log_gamma(k - j + 1.0))
            val = lb + _sp.xlogy(j, xc) + _sp.xlog1py(k - j, -xc)
            return np.where(inside, val, -np.inf)

        inside = x > 0
        xp = np.where(inside, x, 1.0)
        if fam == "lognormal":
            s = np.asarray(phi, dtype=float)
            _check(s > 0, "log-scale must be positive")
            lx = np.log(xp)
            val = -0.5 * ((lx - theta) / s) ** 2 - lx - np.log(s) - HALF_LOG_2PI
        elif fam == "weibull":
            s = np.asarray(phi, dtype=float)
            _check((theta > 0) & (s > 0), "weibull needs shape, scale > 0")
            with np.errstate(over="ignore"):
                val = (np.log(theta) - np.log(s) + (theta - 1.0) * np.log(xp)
                       - xp ** theta / s)
        elif fam == "gamma":
            b = np.asarray(phi, dtype=float)
            _check((theta > 0) & (b > 0), "gamma needs shape, scale > 0")
            val = ((theta - 1.0) * np.log(xp) - xp / b - log_gamma(theta)
                   - theta * np.log(b))
        elif fam == "inverse_gamma":
            k = np.asarray(phi, dtype=float)
            _check((theta > 0) & (k > 0), "inverse gamma needs z, k > 0")
            b = k * theta
            val = (k * np.log(b) - (k + 1.0) * np.log(xp) - b / xp
                   - log_gamma(k))
        elif fam == "exponential":
            _check(theta > 0, "rate must be positive")
            inside = x >= 0
            val = np.log(theta) - theta * np.where(inside, x, 0.0)
        else:  # scaled_uniform
            _check(theta > 0, "upper end must be positive")
            inside = (x >= 0) & (x <= theta)
            val = -np.log(theta) + 0.0 * x
        return np.where(inside, val, -np.inf)


def _triangular(x, i, n):
    x, i, n = np.broadcast_arrays(x, i, n)
    out = np.zeros(x.shape)
    nx = n * x
    first = i == 0
    last = (i == n) & ~first
    mid = ~(first | last)
    # end nodes carry a half hat with doubled height so they integrate to 1
    out = np.where(first & (x > 0) & (nx < 1), 2.0 * n - 2.0 * n * nx, out)
    out = np.where(last & (nx > n - 1) & (x < 1),
                   2.0 * n + 2.0 * n * n * (x - 1.0), out)
    up = mid & (nx > i - 1) & (nx <= i)
    down = mid & (nx > i) & (nx < i + 1)
    out = np.where(up, n * n * (x - i / n) + n, out)
    out = np.where(down, -n * n * (x - i / n) + n, out)
    return out


def kernel_eval(spec, x, theta, phi=None):
    """Kernel density value; zero outside the sample space."""
    if spec.family == "triangular":
        n = _as_int(phi, "node count", 1)
        i = _as_int(theta, "node index", 0)
        _check(i <= n, "node index must not exceed node count")
        return _triangular(np.asarray(x, dtype=float), i, n)
    if spec.family == "histogram":
        m = _as_int(phi, "bin count", 1)
        lv = kernel_log_eval(spec, x, theta, phi)
        # exact bin height, not exp(log m)
        return np.where(np.isfinite(lv), np.broadcast_to(m, lv.shape), 0.0)
    return np.exp(kernel_log_eval(spec, x, theta, phi))


# --- location-scale reductions --------------------------------------------

@dataclass(frozen=True)
class LocationScaleView:
    """Base density of a location-scale family together with its score.

    ``location``/``scale`` map the original family's parameters (theta, phi)
    to the location and scale in the transformed coordinate; ``transform``
    is the coordinate change applied to the data (identity or log).
    """

    name: str
    dimension: int
    log_base: object
    score: object
    kinks: tuple = ()
    transform: str = "identity"
    location: object = None
    scale: object = None

    def base(self, z):
        return np.exp(self.log_base(z))

    def kernel_log(self, x, theta, h):
        """Log of h^-d base((x - theta)/h) in the transformed coordinate."""
        x = np.asarray(x, dtype=float)
        if self.dimension == 1:
            return self.log_base((x - theta) / h) - np.log(h)
        z = (x - theta) / h
        return self.log_base(z) - self.dimension * np.log(h)


def _score_skew(lam):
    def score(z):
        z = np.asarray(z, dtype=float)
        ratio = np.exp(-0.5 * (lam * z) ** 2 - HALF_LOG_2PI
                       - _sp.log_ndtr(lam * z))
        return -z + lam * ratio
    return score


def _score_double_exp(z):
    z = np.asarray(z, dtype=float)
    if np.any(z == 0):
        raise NonDifferentiableError(0.0)
    return -np.sign(z)


def _score_logistic(z):
    return -np.tanh(0.5 * np.asarray(z, dtype=float))


def _score_t(nu):
    def score(z):
        z = np.asarray(z, dtype=float)
        return -(nu + 1.0) * z / (nu + z * z)
    return score


def _score_normal(z):
    return -np.asarray(z, dtype=float)


def _score_gumbel_min(z):
    return 1.0 - np.exp(np.asarray(z, dtype=float))


def to_location_scale(spec):
    """Location-scale view of a kernel, after a log transform if needed."""
    fam = spec.family
    if fam == "skew_normal":
        lam = float(spec.hyper["lam"])
        return LocationScaleView(f"skew_normal(lam={lam:g})", 1,
                                 lambda z: _log_skew_normal(np.asarray(z, float), lam),
                                 _score_skew(lam))
    if fam == "mv_normal":
        d = spec.dim

        def log_base(z):
            z = np.asarray(z, dtype=float)
            if d == 1:
                return -0.5 * z * z - HALF_LOG_2PI
            return -0.5 * np.sum(z * z, axis=-1) - d * HALF_LOG_2PI
        return LocationScaleView(f"mv_normal(d={d})", d, log_base, _score_normal)
    if fam == "double_exponential":
        return LocationScaleView("double_exponential", 1,
                                 lambda z: -np.abs(np.asarray(z, float)) - np.log(2.0),
                                 _score_double_exp, kinks=(0.0,))
    if fam == "logistic":
        return LocationScaleView("logistic", 1,
                                 lambda z: _log_logistic(np.asarray(z, float)),
                                 _score_logistic)
    if fam == "t":
        nu = float(spec.hyper["nu"])
        return LocationScaleView(f"t(nu={nu:g})", 1,
                                 lambda z: _log_t(np.asarray(z, float), nu),
                                 _score_t(nu))
    if fam == "lognormal":
        return LocationScaleView(
            "lognormal->normal", 1,
            lambda z: -0.5 * np.asarray(z, float) ** 2 - HALF_LOG_2PI,
            _score_normal, transform="log",
            location=lambda theta, phi: theta, scale=lambda theta, phi: phi)
    if fam == "weibull":
        return LocationScaleView(
            "weibull->gumbel_min", 1,
            lambda z: _log_gumbel_min(np.asarray(z, float)),
            _score_gumbel_min, transform="log",
            location=lambda theta, phi: np.log(phi) / theta,
            scale=lambda theta, phi: 1.0 / theta)
    raise UnsupportedFamilyError(
        f"{fam} kernels have no location-scale reduction")


def score_ratio(view, z):
    """Logarithmic gradient chi'_i(z) / chi(z) of the base density.

    For d = 1 the result is shaped like ``z``; for d >= 2 the last axis
    holds the coordinates.
    """
    z = np.asarray(z, dtype=float)
    for k in view.kinks:
        if np.any(np.abs(z - k) == 0):
            raise NonDifferentiableError(k)
    return view.score(z)
