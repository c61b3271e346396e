"""Monte-Carlo estimates of the prior mass of KL neighbourhoods.

Mixing distributions are drawn from a Dirichlet process by stick breaking.
Every draw gets its own counter-based random stream, derived from the seed
and the draw index, so results do not depend on the number of threads.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .density import MixingDistribution, MixtureDensity
from .kl import kl_divergence
from .parallel import ordered_map
from .quadrature import QuadratureError
from .special_fn import DomainError

log = logging.getLogger(__name__)

WILSON_Z = 1.959963984540054
COARSE_TOL = 1e-4
FINE_TOL = 1e-7
RESIDUAL_LIMIT = 1e-6

# stream layers within one draw
_DP, _HYPER, _XI = 0, 1, 2


def draw_rng(seed, index, layer):
    """Generator for (seed, draw index, layer); independent of execution order."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index), int(layer)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class BaseMeasure:
    """A named sampling distribution for atoms or hyper-parameters."""

    name: str
    params: dict = field(default_factory=dict)

    _SAMPLERS = {
        "point": lambda g, n, p: np.full(n, float(p["value"])),
        "normal": lambda g, n, p: g.normal(p.get("mu", 0.0), p.get("sigma", 1.0), n),
        "lognormal": lambda g, n, p: g.lognormal(p.get("mu", 0.0), p.get("sigma", 1.0), n),
        "uniform": lambda g, n, p: g.uniform(p.get("lo", 0.0), p.get("hi", 1.0), n),
        "gamma": lambda g, n, p: g.gamma(p.get("shape", 1.0), p.get("scale", 1.0), n),
        "exponential": lambda g, n, p: g.exponential(p.get("scale", 1.0), n),
        "inverse_gamma": lambda g, n, p: 1.0 / g.gamma(p.get("shape", 2.0),
                                                       1.0 / p.get("scale", 1.0), n),
        "discrete": lambda g, n, p: g.choice(np.asarray(p["values"], float), n,
                                             p=np.asarray(p["probs"], float)),
    }

    def __post_init__(self):
        if self.name not in self._SAMPLERS:
            raise DomainError(f"unknown base measure {self.name!r}")
        if self.name == "point" and "value" not in self.params:
            raise DomainError("point base measure needs a value")
        if self.name == "discrete":
            probs = np.asarray(self.params.get("probs", ()), float)
            if probs.size != len(self.params.get("values", ())) or probs.size == 0:
                raise DomainError("discrete base measure needs matching values and probs")
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
                raise DomainError("discrete probabilities must be a distribution")

    def sample(self, rng, n):
        return np.asarray(self._SAMPLERS[self.name](rng, n, self.params), dtype=float)


@dataclass(frozen=True)
class DPSpec:
    base_measure: BaseMeasure
    concentration: float
    truncation: int = 500

    def __post_init__(self):
        if not self.concentration > 0:
            raise DomainError("concentration must be positive")
        if int(self.truncation) < 1:
            raise DomainError("truncation must be at least 1")
        # expected leftover stick mass after the truncation
        c = self.concentration
        if self.truncation * math.log(c / (1.0 + c)) > math.log(RESIDUAL_LIMIT):
            raise DomainError(
                f"truncation {self.truncation} leaves expected residual mass "
                f"above {RESIDUAL_LIMIT:g} at concentration {c:g}")


def stick_breaking_sample(dp, seed, index=0, with_residual=False):
    """One truncated DP draw, the leftover stick lumped onto a final atom.

    The final weight is 1 minus the (exactly rounded) sum of the others, so
    the weights sum to 1 under math.fsum.
    """
    rng = draw_rng(seed, index, _DP) if not isinstance(seed, np.random.Generator) else seed
    n = int(dp.truncation)
    v = rng.beta(1.0, dp.concentration, n)
    remain = np.concatenate([[1.0], np.cumprod(1.0 - v)])
    w = v * remain[:-1]
    atoms = dp.base_measure.sample(rng, n + 1)
    head = math.fsum(w)
    while head > 1.0:
        # rounding overshoot: take the excess off the largest weight
        k = int(np.argmax(w))
        w[k] -= head - 1.0
        head = math.fsum(w)
    weights = np.append(w, 1.0 - head)
    mix = MixingDistribution.discrete(atoms, weights)
    return (mix, float(remain[-1])) if with_residual else mix


def wilson_interval(hits, draws, z=WILSON_Z):
    if draws <= 0:
        raise DomainError("need at least one draw")
    p = hits / draws
    denom = 1.0 + z * z / draws
    centre = (p + z * z / (2 * draws)) / denom
    half = z * math.sqrt(p * (1 - p) / draws + z * z / (4 * draws * draws)) / denom
    # rounding can push an endpoint past p when p is 0 or 1
    return max(0.0, min(centre - half, p)), min(1.0, max(centre + half, p))


@dataclass
class DrawRecord:
    index: int
    kl: float
    hit: bool
    hyper: float = None
    xi: object = None
    refined: bool = False
    error: str = ""


@dataclass
class MassEstimate:
    epsilon: float
    hits: int
    draws: int
    fraction: float
    wilson_interval: tuple
    records: list = field(default_factory=list, repr=False)

    @property
    def half_width(self):
        lo, hi = self.wilson_interval
        return 0.5 * (hi - lo)


def _kl_of(f0, mixture, tol):
    return kl_divergence(f0, mixture, tol=tol, strict=False)


def _evaluate(f0, kernel, mixing, hyper, epsilon):
    """(kl, hit, refined, error) for one mixing draw."""
    try:
        mix = MixtureDensity(kernel, mixing, hyper=hyper)
        res = _kl_of(f0, mix, COARSE_TOL)
        refined = False
        if math.isfinite(res.value) and abs(res.value - epsilon) <= 10 * COARSE_TOL:
            res = _kl_of(f0, mix, FINE_TOL)
            refined = True
        if res.infinite:
            return math.inf, False, refined, ""
        if not res.converged:
            log.warning("KL quadrature residual %.3g above tolerance", res.abs_error_bound)
        return res.value, bool(res.value < epsilon), refined, ""
    except (QuadratureError, DomainError, FloatingPointError, ValueError) as exc:
        log.warning("draw failed: %s", exc)
        return math.nan, False, False, str(exc)


def _summarise(records, epsilon):
    hits = sum(r.hit for r in records)
    n = len(records)
    return MassEstimate(float(epsilon), hits, n, hits / n, wilson_interval(hits, n), records)


def _check_args(epsilon, n_draws):
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    if int(n_draws) < 1:
        raise DomainError("n_draws must be at least 1")


def kl_mass_estimate(f0, kernel, dp, epsilon, n_draws, seed, hyper=None,
                     hyper_prior=None, threads=None):
    """Fraction of prior draws whose mixture is within KL ``epsilon`` of f0.

    The hyper-parameter is ``hyper`` if fixed, otherwise drawn from
    ``hyper_prior`` independently of the mixing distribution.
    """
    _check_args(epsilon, n_draws)

    def one(i):
        mixing = stick_breaking_sample(dp, seed, i)
        phi = hyper
        if hyper_prior is not None:
            phi = float(hyper_prior.sample(draw_rng(seed, i, _HYPER), 1)[0])
        kl, hit, refined, err = _evaluate(f0, kernel, mixing, phi, epsilon)
        return DrawRecord(i, kl, hit, phi, None, refined, err)

    return _summarise(ordered_map(one, range(int(n_draws)), threads), epsilon)


def hierarchical_mass_estimate(xi_prior, dp_family, f0, kernel, epsilon,
                               n_draws, seed, hyper=None, hyper_family=None,
                               threads=None):
    """As kl_mass_estimate, with an index xi drawn first.

    ``dp_family(xi)`` returns the DPSpec and ``hyper_family(xi)``, if given,
    the hyper-parameter sampler for that xi.
    """
    _check_args(epsilon, n_draws)

    def one(i):
        xi = xi_prior.sample(draw_rng(seed, i, _XI), 1)[0]
        xi = float(xi)
        dp = dp_family(xi)
        mixing = stick_breaking_sample(dp, seed, i)
        phi = hyper
        if hyper_family is not None:
            phi = float(hyper_family(xi).sample(draw_rng(seed, i, _HYPER), 1)[0])
        kl, hit, refined, err = _evaluate(f0, kernel, mixing, phi, epsilon)
        return DrawRecord(i, kl, hit, phi, xi, refined, err)

    return _summarise(ordered_map(one, range(int(n_draws)), threads), epsilon)

