import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from klkit.approximants import (ApproximantSequence, MixingDistribution,
                                bernstein_approximant, bernstein_weights,
                                exponential_truncation, gamma_eq15_approximant,
                                gamma_kernel_concentration, gamma_rate_measure,
                                gamma_window_mass, histogram_approximant,
                                histogram_weights, inverse_gamma_approximant,
                                location_scale_approximant,
                                scaled_uniform_approximant,
                                scaled_uniform_weights, triangular_approximant,
                                triangular_weights, verify_lower_bounds)
from klkit.density import make_density, piecewise_polynomial
from klkit.kernels import make_kernel
from klkit.quadrature import quad
from klkit.special_fn import DomainError, EnvelopeParams, lemma8_envelope

# frozen from mpmath
T1_NORMAL = 1.4647947734915441     # 1 / (Phi(1) - Phi(-1))
T2_EXP = 2.122261910714844         # 1 / (e^-1/2 - e^-2)


@pytest.fixture(scope="module")
def beta22():
    return make_density("beta_poly")


def _sup_err(approx, f0, n=2001):
    x = np.linspace(0.0005, 0.9995, n)
    return float(np.max(np.abs(approx(x) - f0.eval(x))))


def test_location_scale_normaliser_and_bound():
    f0 = make_density("normal")
    approx = location_scale_approximant(f0, make_kernel("normal"), 1, 0.5)
    assert approx.mixing.normalizer == pytest.approx(T1_NORMAL, rel=1e-12)
    x = np.linspace(-4, 4, 33)
    bound = float(f0.eval(0.0)) * T1_NORMAL
    for m in (1, 2, 4):
        a = location_scale_approximant(f0, make_kernel("normal"), m, 0.5)
        assert np.all(a(x) <= bound * (1 + 1e-9))


def test_location_scale_pointwise_limit():
    f0 = make_density("normal")
    errs = [abs(float(location_scale_approximant(f0, make_kernel("normal"), m, 0.5)(0.0))
                - float(f0.eval(0.0))) for m in (2, 4, 8, 16)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_location_scale_needs_mass():
    f0 = piecewise_polynomial([5.0, 6.0], [[1.0]], support="real_line")
    with pytest.raises(DomainError):
        location_scale_approximant(f0, make_kernel("normal"), 2, 0.5)


def test_histogram_weights_examples(beta22):
    assert np.allclose(histogram_weights(make_density("uniform"), 4), 0.25)
    lin = piecewise_polynomial([0.0, 1.0], [[0.0, 2.0]])
    assert np.allclose(histogram_weights(lin, 2), [0.25, 0.75])
    errs = [_sup_err(histogram_approximant(beta22, m), beta22) for m in (8, 32, 128)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 0.1


def test_zero_target_weights_rejected():
    spike = piecewise_polynomial([0.0, 0.3, 0.4, 1.0], [[0.0], [10.0], [0.0]])
    with pytest.raises(DomainError):
        histogram_weights(spike, 2)


def test_triangular_examples(beta22):
    assert np.allclose(triangular_weights(make_density("uniform"), 3), 0.25)
    w = triangular_weights(beta22, 10)
    assert np.all(w >= 0) and math.fsum(w) == pytest.approx(1.0, abs=1e-15)
    errs = [abs(float(triangular_approximant(beta22, n)(0.5)) - 1.5) for n in (8, 32, 128)]
    assert errs[0] > errs[1] > errs[2]


def test_bernstein_examples(beta22):
    x = np.linspace(0, 1, 101)
    for k in (1, 5, 17):
        assert np.allclose(bernstein_approximant(make_density("uniform"), k)(x), 1.0,
                           atol=1e-12)
    a = bernstein_approximant(beta22, 10)
    assert quad(a, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    errs = [_sup_err(bernstein_approximant(beta22, k), beta22) for k in (5, 20, 80)]
    assert errs[0] > errs[1] > errs[2]


@given(st.integers(0, 60))
def test_bernstein_weights_distribution(k):
    w = bernstein_weights(make_density("beta_poly"), k)
    assert w.size == k + 1 and np.all(w >= 0)
    assert math.fsum(w) == pytest.approx(1.0, abs=1e-14)


def test_gamma_eq15_normaliser_and_mass():
    a = gamma_eq15_approximant(make_density("exp"), 2)
    assert a.mixing.normalizer == pytest.approx(T2_EXP, rel=1e-12)
    g = gamma_eq15_approximant(make_density("gamma"), 10)
    assert quad(g, 0.0, np.inf, tol=1e-8) == pytest.approx(1.0, abs=1e-6)
    assert g.mixing.support == (2.0, 101.0) and g.mixing.point_mass == 0.1


def test_inverse_gamma_mass_and_limit():
    f0 = make_density("gamma")
    g = inverse_gamma_approximant(f0, 10)
    assert quad(g, 0.0, np.inf, tol=1e-8) == pytest.approx(1.0, abs=1e-6)
    assert g.mixing.support == (0.1, 10.0) and g.mixing.point_mass == 10.0
    errs = [abs(float(inverse_gamma_approximant(f0, m)(1.0)) - math.exp(-1))
            for m in (10, 40, 160)]
    assert errs[0] > errs[1] > errs[2]


def test_exponential_truncation_examples():
    p0 = gamma_rate_measure(2.0)
    target = make_density("pareto")
    x = np.array([0.5, 1.0, 3.0])
    # untruncated Laplace mixture reproduces 2 (1 + x)^-3
    full = [quad(lambda t: t * np.exp(-t * xi) * t * np.exp(-t), 0, np.inf) for xi in x]
    assert np.allclose(full, target.eval(x), atol=1e-10)
    errs = [abs(float(exponential_truncation(p0, a)(1.0)) - 0.25) for a in (2, 4, 16)]
    assert errs[0] > errs[1] > errs[2]
    point = exponential_truncation(MixingDistribution.point(1.0), 3.0)
    assert np.allclose(point(x), np.exp(-x), rtol=1e-15)
    with pytest.raises(DomainError):
        exponential_truncation(MixingDistribution.point(10.0), 3.0)
    with pytest.raises(DomainError):
        exponential_truncation(p0, 1.0)


def test_scaled_uniform_weights():
    f0 = make_density("exp")
    atoms, w = scaled_uniform_weights(f0, 20)
    assert math.fsum(w) == pytest.approx(1.0, abs=1e-12) and np.all(w >= 0)
    assert np.allclose(atoms, np.arange(1, atoms.size + 1) / 20)
    errs = [abs(float(scaled_uniform_approximant(f0, m)(1.0)) - math.exp(-1))
            for m in (20, 80, 320)]
    assert errs[0] > errs[1] > errs[2]


def test_scaled_uniform_rejects_increasing_target():
    with pytest.raises(DomainError):
        scaled_uniform_weights(make_density("gamma"), 20, x1=1.5, x2=4.0)


def test_sequence_dispatch_and_errors():
    f0 = make_density("uniform")
    seq = ApproximantSequence("histogram", f0)
    assert seq.eps_target == 0.01 and seq.at(4).mixing.weights.size == 4
    assert len(seq.kl_options(4)["points"]) == 3
    with pytest.raises(DomainError):
        ApproximantSequence("spline", f0)
    with pytest.raises(DomainError):
        ApproximantSequence("exponential_truncated", make_density("pareto"))
    with pytest.raises(DomainError):
        ApproximantSequence("location_scale", make_density("normal"))


@pytest.mark.parametrize("m", [5, 10])
def test_gamma_floors_hold(m):
    seq = ApproximantSequence("gamma_eq15", make_density("exp"))
    grid = np.concatenate([np.geomspace(0.01, 1.0 / m, 6, endpoint=False),
                           np.linspace(1.0 / m + 0.01, m, 8),
                           np.linspace(m + 1.0 / m + 0.05, m + 8, 6)])
    rep = verify_lower_bounds(seq, m, grid)
    assert rep.ok, rep.violations
    assert rep.checked["small_x_uniform"] == 6 and rep.checked["large_x_uniform"] == 6


def test_gamma_floor_examples():
    seq = ApproximantSequence("gamma_eq15", make_density("exp"))
    rep = verify_lower_bounds(seq, 10, [0.05, 12.0])
    assert rep.ok and rep.checked["small_x_uniform"] == 1 and rep.checked["large_x_uniform"] == 1
    assert ("small_x_sharp", 12.0) in rep.skipped


def test_inverse_gamma_window_floor():
    seq = ApproximantSequence("inverse_gamma", make_density("gamma"))
    rep = verify_lower_bounds(seq, 100, np.linspace(0.05, 8.0, 12), delta=0.25)
    assert rep.ok and rep.checked["window"] == 12


def test_verify_bounds_family_guard():
    with pytest.raises(DomainError):
        verify_lower_bounds(ApproximantSequence("histogram", make_density("uniform")),
                            5, [0.5])


def test_window_envelope_below_kernel_mass():
    c = float(lemma8_envelope(0.5, EnvelopeParams(0.25)))
    assert 0 < c <= gamma_window_mass(0.5, 100, 0.25)


def test_gamma_kernel_concentration_at_m100():
    total, tail = gamma_kernel_concentration(1.0, 100, 0.5)
    assert abs(total - 1.0) < 0.02 and tail < 1e-3
