import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from klkit.approximants import gamma_eq15_approximant, location_scale_approximant
from klkit.density import (DensitySpec, MixingDistribution, MixtureDensity,
                           NormalizationError, log_transform, make_density,
                           mixture_eval, mixture_log_eval, phi_delta, piecewise_polynomial,
                           survival)
from klkit.kernels import kernel_eval, make_kernel, to_location_scale
from klkit.kl import kl_divergence
from klkit.special_fn import DomainError

PHI_01 = 0.39695254747701177  # standard normal density at 0.1 (mpmath)


@pytest.mark.parametrize("name", ["normal", "cauchy", "laplace", "student_t",
                                  "normal_mixture", "uniform", "beta_poly", "exp",
                                  "gamma", "lognormal", "pareto", "rayleigh"])
def test_builtins_normalised(name):
    f0 = make_density(name)
    assert f0.total_mass() == pytest.approx(1.0, abs=1e-8)
    assert np.all(f0.eval(f0.grid(200)) >= 0)


def test_mv_normal_radial_mass():
    for d in (2, 3):
        assert make_density("mv_normal", d=d).total_mass() == pytest.approx(1.0, abs=1e-8)


def test_unnormalised_density_rejected():
    with pytest.raises(NormalizationError):
        DensitySpec("twice", lambda x: 2.0 * np.ones_like(x), "unit_interval")
    with pytest.raises(NormalizationError):
        DensitySpec("unif", lambda x: np.ones_like(x), "unit_interval", upper_bound=0.5)


def test_piecewise_polynomial_normalises():
    f0 = piecewise_polynomial([0.0, 0.5, 1.0], [[1.0, 2.0], [3.0]])
    assert f0.total_mass() == pytest.approx(1.0, abs=1e-12)


def test_discrete_mixture_examples():
    hist = MixtureDensity(make_kernel("histogram"),
                          MixingDistribution.discrete((np.arange(4) + 0.5) / 4,
                                                      np.full(4, 0.25)), hyper=4)
    assert mixture_eval(hist, 0.6) == 1.0
    expo = MixtureDensity(make_kernel("exponential"), MixingDistribution.point(2.0))
    assert mixture_eval(expo, 0.0) == 2.0


def test_discrete_mixture_equals_brute_force(rng):
    atoms, w = rng.uniform(-2, 2, 7), rng.dirichlet(np.ones(7))
    w[-1] = 1.0 - math.fsum(w[:-1])
    spec = make_kernel("logistic")
    mix = MixtureDensity(spec, MixingDistribution.discrete(atoms, w), hyper=0.7)
    x = np.linspace(-5, 5, 41)
    brute = sum(wi * kernel_eval(spec, x, a, 0.7) for a, wi in zip(atoms, w))
    assert np.max(np.abs(mix(x) - brute)) < 1e-14


def test_zero_weight_atoms_allowed():
    mix = MixingDistribution.discrete([1.0, 2.0], [1.0, 0.0])
    assert mix.support == (1.0, 1.0)
    with pytest.raises(DomainError):
        MixingDistribution.discrete([1.0, 2.0], [0.6, 0.6])


def test_continuous_mixture_integrates_to_one():
    mixing = MixingDistribution.continuous(lambda t: np.exp(-0.5 * t * t), -4, 4,
                                           point_mass=0.5)
    mix = MixtureDensity(make_kernel("mv_normal", d=1), mixing)
    f = make_density("normal")
    assert f.integrate(lambda x: mix(x)).value == pytest.approx(1.0, abs=1e-7)


def test_gamma_approximant_pointwise():
    approx = gamma_eq15_approximant(make_density("exp"), 20)
    assert float(approx(1.0)) == pytest.approx(math.exp(-1), abs=0.05)


def test_phi_delta_examples():
    assert phi_delta(make_density("uniform"), 0.5, 0.1) == 1.0
    assert phi_delta(make_density("normal"), 0.0, 0.1) == pytest.approx(PHI_01, abs=1e-8)
    f0 = make_density("exp")
    x = np.array([1.0, 2.0, 5.0])
    assert np.array_equal(phi_delta(f0, x, 0.3, "one_sided"), f0.eval(x))


def test_phi_delta_errors():
    with pytest.raises(DomainError):
        phi_delta(make_density("normal"), 0.0, 0.0)
    with pytest.raises(DomainError):
        phi_delta(make_density("normal"), 0.0, 0.1, "one_sided")


@given(st.floats(-4, 4), st.floats(0.01, 1.0), st.floats(1.1, 3.0))
def test_phi_delta_bounded_and_monotone(x, d, k):
    f0 = make_density("normal_mixture")
    small = phi_delta(f0, x, d)
    big = phi_delta(f0, x, d * k)
    assert small <= float(f0.eval(x)) and big <= small + 1e-15


def test_log_transform_examples():
    g = log_transform(make_density("lognormal"))
    y = np.linspace(-4, 4, 17)
    assert np.allclose(g.eval(y), np.exp(-0.5 * y * y) / math.sqrt(2 * math.pi), atol=1e-14)
    w = log_transform(make_density("exp"))
    assert np.allclose(w.eval(y), np.exp(y - np.exp(y)), atol=1e-14)
    assert log_transform(make_density("gamma")).total_mass() == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(DomainError):
        log_transform(make_density("normal"))


def test_log_transform_preserves_kl():
    f0 = make_density("gamma")
    atoms = np.array([-0.5, 0.2, 0.9])
    mixing = MixingDistribution.discrete(atoms, [0.3, 0.4, 0.3])
    tol = 1e-9
    x_side = kl_divergence(f0, MixtureDensity(make_kernel("lognormal"), mixing, hyper=0.6),
                           tol=tol)
    view = to_location_scale(make_kernel("lognormal"))
    y_side = kl_divergence(log_transform(f0), MixtureDensity(view, mixing, hyper=0.6),
                           tol=tol)
    assert abs(x_side.value - y_side.value) <= 2 * (x_side.abs_error_bound
                                                    + y_side.abs_error_bound + tol)


def test_survival_examples():
    assert survival(make_density("exp"), 1.0) == pytest.approx(math.exp(-1), abs=1e-14)
    assert survival(make_density("pareto"), 1.0) == pytest.approx(0.25, abs=1e-10)
    assert survival(make_density("gamma"), 0.0) == 1.0
    # no analytic cdf: quadrature of the tail
    f0 = piecewise_polynomial([0.0, 1.0], [[0.0, 2.0]])
    assert survival(f0, 0.5) == pytest.approx(0.75, abs=1e-10)


@pytest.mark.parametrize("x", [1.0, 30.0, 63.75])
def test_location_scale_log_density_far_from_origin(x):
    # truncation at +-64 is invisible here: N(0,1) smoothed by N(0,h^2) is N(0, 1+h^2)
    h2 = 1.0 / 64
    mix = location_scale_approximant(make_density("normal"),
                                     to_location_scale(make_kernel("normal")), 64, 0.5)
    exact = -x * x / (2 * (1 + h2)) - 0.5 * math.log(2 * math.pi * (1 + h2))
    assert float(mixture_log_eval(mix, x)) == pytest.approx(exact, rel=1e-10)
