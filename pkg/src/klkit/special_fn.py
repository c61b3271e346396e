"""Special functions and analytic envelopes used by the bound checks.

Everything here is vectorised over numpy arrays and has no shared state.
"""
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

__all__ = [
    "DomainError",
    "EnvelopeParams",
    "log_gamma",
    "digamma",
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_sf",
    "std_normal_logcdf",
    "gamma_cdf",
    "lemma8_envelope",
]

EULER_GAMMA = 0.57721566490153286061
HALF_LOG_2PI = 0.91893853320467274178

# B_{2k} for k = 1..9
_BERNOULLI = np.array([
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
])


class DomainError(ValueError):
    """Argument outside the domain of a function or parameter space."""


def _zeta_minus_one(k, n_terms=40):
    # Euler-Maclaurin tail after a direct partial sum.
    n = np.arange(2, n_terms, dtype=float)
    head = np.sum(n ** (-k))
    N = float(n_terms)
    tail = N ** (1 - k) / (k - 1) + 0.5 * N ** (-k)
    rising = 1.0
    fact = 1.0
    for j in range(1, 6):
        rising *= (k + 2 * j - 3) * (k + 2 * j - 2) if j > 1 else k
        fact *= (2 * j - 1) * (2 * j)
        tail += _BERNOULLI[j - 1] / fact * rising * N ** (-k - 2 * j + 1)
    return head + tail


_ZETA_M1 = np.array([_zeta_minus_one(k) for k in range(2, 40)])
_SERIES_K = np.arange(2, 40, dtype=float)


def _lgamma_near_two(eps):
    """ln Gamma(2 + eps) for |eps| <= 0.5 by its Taylor series."""
    eps = np.asarray(eps, dtype=float)
    powers = np.power.outer(-eps, _SERIES_K)
    return eps * (1.0 - EULER_GAMMA) + powers @ (_ZETA_M1 / _SERIES_K)


def _lgamma_near_one(eps):
    """ln Gamma(1 + eps) for |eps| <= 0.2, free of cancellation at eps = 0."""
    eps = np.asarray(eps, dtype=float)
    powers = np.power.outer(-eps, _SERIES_K)
    return -EULER_GAMMA * eps + powers @ ((1.0 + _ZETA_M1) / _SERIES_K)


def _stirling(z):
    zz = 1.0 / (z * z)
    corr = np.zeros_like(z)
    for k in range(len(_BERNOULLI) - 1, -1, -1):
        corr = corr * zz + _BERNOULLI[k] / ((2 * k + 2) * (2 * k + 1))
    return (z - 0.5) * np.log(z) - z + HALF_LOG_2PI + corr / z


def log_gamma(x):
    """Natural log of the gamma function for positive arguments.

    Uses a Taylor expansion about 1 and 2 (where the result vanishes) and
    the Stirling series with upward shifting elsewhere.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(~(x > 0)):
        raise DomainError("log_gamma requires x > 0")
    out = np.empty_like(x)

    near1 = (x >= 0.5) & (x < 1.5)
    near2 = (x >= 1.5) & (x <= 2.5)
    rest = ~(near1 | near2)
    if near1.any():
        e = x[near1] - 1.0
        out[near1] = np.where(np.abs(e) < 0.2, _lgamma_near_one(e),
                              _lgamma_near_two(e) - np.log1p(e))
    if near2.any():
        out[near2] = _lgamma_near_two(x[near2] - 2.0)
    if rest.any():
        z = x[rest].copy()
        shift = np.zeros_like(z)
        small = z < 15.0
        # ln prod (z+k) accumulated in chunks to keep the product finite
        prod = np.ones_like(z)
        while small.any():
            prod[small] *= z[small]
            z[small] += 1.0
            if np.any(prod > 1e280) or np.any(prod < 1e-280):
                shift += np.log(prod)
                prod[:] = 1.0
            small = z < 15.0
        shift += np.log(prod)
        out[rest] = _stirling(z) - shift
    return out[0] if scalar else out


def digamma(x):
    """Logarithmic derivative of the gamma function, x > 0."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(~(x > 0)):
        raise DomainError("digamma requires x > 0")
    z = x.copy()
    acc = np.zeros_like(z)
    low = z < 6.0
    while low.any():
        acc[low] -= 1.0 / z[low]
        z[low] += 1.0
        low = z < 6.0
    zz = 1.0 / (z * z)
    series = np.zeros_like(z)
    for k in range(len(_BERNOULLI) - 2, -1, -1):
        series = series * zz + _BERNOULLI[k] / (2 * k + 2)
    out = np.log(z) - 0.5 / z - series * zz + acc
    return out[0] if scalar else out


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x - HALF_LOG_2PI)


def std_normal_cdf(x):
    return _sp.ndtr(x)


def std_normal_sf(x):
    """Upper tail 1 - Phi(x) without cancellation."""
    return _sp.ndtr(-np.asarray(x, dtype=float))


def std_normal_logcdf(x):
    return _sp.log_ndtr(x)


def _gamma_p_series(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * np.exp(-x + a * np.log(x) - log_gamma(a))


def _gamma_q_cf(a, x):
    # modified Lentz
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return np.exp(-x + a * np.log(x) - log_gamma(a)) * h


def _gamma_cdf_scalar(x, shape):
    if shape <= 0 or x < 0 or np.isnan(x) or np.isnan(shape):
        raise DomainError("gamma_cdf requires x >= 0 and shape > 0")
    if x == 0:
        return 0.0
    if np.isinf(x):
        return 1.0
    if x < shape + 1.0:
        return float(min(1.0, _gamma_p_series(shape, x)))
    return float(max(0.0, 1.0 - _gamma_q_cf(shape, x)))


def gamma_cdf(x, shape):
    """P(G <= x) for G ~ Gamma(shape, rate 1)."""
    x, shape = np.broadcast_arrays(np.asarray(x, dtype=float),
                                   np.asarray(shape, dtype=float))
    if x.ndim == 0:
        return _gamma_cdf_scalar(float(x), float(shape))
    out = np.empty(x.shape)
    for idx in np.ndindex(x.shape):
        out[idx] = _gamma_cdf_scalar(float(x[idx]), float(shape[idx]))
    return out


@dataclass(frozen=True)
class EnvelopeParams:
    """Window half-width and exponent variant for the gamma-kernel floor."""

    delta: float = 0.25
    exponent_variant: str = "consistent_with_35"

    def __post_init__(self):
        if not (0.0 < self.delta < 0.5):
            raise DomainError("delta must lie in (0, 1/2)")
        if self.exponent_variant not in ("as_printed", "consistent_with_35"):
            raise DomainError(
                f"unknown exponent_variant {self.exponent_variant!r}")


ENVELOPE_CAP = 0.99


def log_window_envelope(x, params=None):
    """Natural log of the gamma-kernel window-mass envelope (no underflow).

    Below 1 the envelope is a Gaussian-tail bound that vanishes like
    exp(-c / x**2) at the origin; from 1 upward it decays like x**-1/2.
    ``exponent_variant='as_printed'`` uses 12/x in the Stirling correction
    instead of 1/(12 x).  For small delta the closed form exceeds 1 near
    x = 1, so it is capped at ENVELOPE_CAP; a smaller envelope is still a
    valid lower bound.
    """
    params = params or EnvelopeParams()
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("envelope requires x > 0")
    d = params.delta
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        xs = np.where(x < 1.0, x, 1.0)
        low = (2.0 * np.log(xs) - np.log(2.0 * d * (1.0 + d) * np.sqrt(2.0 + d))
               - 1.0 / (12.0 * xs) - 2.0 * (1.0 + d) * d * d / (xs * xs))
        xl = np.where(x >= 1.0, x, 1.0)
        if params.exponent_variant == "as_printed":
            expo = 1.5 - 12.0 / xl
        else:
            expo = 1.5 - 1.0 / (12.0 * xl)
        high = (np.log(d) + expo - np.log(2.0 * np.sqrt(2.0 * np.pi * (xl + d)))
                - xl * d * d / (8.0 * (xl - d) ** 2))
    return np.minimum(np.where(x < 1.0, low, high), np.log(ENVELOPE_CAP))


def lemma8_envelope(x, params=None):
    """The envelope itself; underflows to 0 for x below about 0.02."""
    return np.exp(log_window_envelope(x, params))
