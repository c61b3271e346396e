import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from klkit.density import make_density
from klkit.kernels import make_kernel
from klkit.prior_mc import (BaseMeasure, DPSpec, MassEstimate,
                            hierarchical_mass_estimate, kl_mass_estimate,
                            stick_breaking_sample, wilson_interval)
from klkit.special_fn import DomainError

NORMAL = make_kernel("normal")
GAUSS_DP = DPSpec(BaseMeasure("normal", {"mu": 0.0, "sigma": 1.0}), 1.0)
SCALE_PRIOR = BaseMeasure("lognormal", {"mu": 0.0, "sigma": 0.5})


def test_small_concentration_gives_single_atom():
    dp = DPSpec(BaseMeasure("normal"), 1e-6, truncation=2)
    mix = stick_breaking_sample(dp, seed=3)
    assert mix.weights[0] > 1 - 1e-5


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.1, 10.0))
def test_weights_sum_to_one(seed, c):
    mix, resid = stick_breaking_sample(DPSpec(BaseMeasure("normal"), c), seed,
                                       with_residual=True)
    assert math.fsum(mix.weights) == 1.0 and np.all(mix.weights >= 0)
    assert resid < 1e-6


def test_sample_bit_reproducible():
    a = stick_breaking_sample(GAUSS_DP, 11, index=4)
    b = stick_breaking_sample(GAUSS_DP, 11, index=4)
    c = stick_breaking_sample(GAUSS_DP, 11, index=5)
    assert np.array_equal(a.atoms, b.atoms) and np.array_equal(a.weights, b.weights)
    assert not np.array_equal(a.atoms, c.atoms)


def test_truncation_guard():
    with pytest.raises(DomainError):
        DPSpec(BaseMeasure("normal"), 10.0, truncation=50)
    with pytest.raises(DomainError):
        DPSpec(BaseMeasure("normal"), 0.0)
    DPSpec(BaseMeasure("normal"), 10.0, truncation=500)


def test_base_measure_validation():
    with pytest.raises(DomainError):
        BaseMeasure("cauchy")
    with pytest.raises(DomainError):
        BaseMeasure("point")
    with pytest.raises(DomainError):
        BaseMeasure("discrete", {"values": [1, 2], "probs": [0.5, 0.6]})


def test_wilson_interval():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0.0 and 0 < hi < 0.35
    lo, hi = wilson_interval(10, 10)
    assert hi == 1.0 and lo < 1.0
    lo, hi = wilson_interval(37, 100)
    assert lo < 0.37 < hi
    with pytest.raises(DomainError):
        wilson_interval(0, 0)


@given(st.integers(0, 200), st.integers(1, 200))
def test_wilson_contains_fraction(hits, extra):
    n = hits + extra
    lo, hi = wilson_interval(hits, n)
    assert 0.0 <= lo <= hits / n <= hi <= 1.0


def test_point_mass_base_reproduces_target():
    f0 = make_density("normal", mu=0.5, sigma=1.0)
    dp = DPSpec(BaseMeasure("point", {"value": 0.5}), 1.0)
    est = kl_mass_estimate(f0, NORMAL, dp, 0.01, 8, seed=1, hyper=1.0)
    assert isinstance(est, MassEstimate)
    assert est.fraction == 1.0 and est.hits == est.draws == 8


def test_reproducible_across_threads():
    f0 = make_density("normal")
    runs = [kl_mass_estimate(f0, NORMAL, GAUSS_DP, 0.5, 12, seed=42,
                             hyper_prior=SCALE_PRIOR, threads=t) for t in (1, 3)]
    assert [r.kl for r in runs[0].records] == [r.kl for r in runs[1].records]
    assert runs[0].wilson_interval == runs[1].wilson_interval


def test_monotone_in_epsilon():
    f0 = make_density("normal")
    fr = [kl_mass_estimate(f0, NORMAL, GAUSS_DP, eps, 30, seed=7,
                           hyper_prior=SCALE_PRIOR).fraction for eps in (0.1, 0.5, 1.0)]
    assert fr[0] <= fr[1] <= fr[2]


def test_degenerate_xi_matches_flat():
    f0 = make_density("normal")
    xi = BaseMeasure("point", {"value": 1.0})
    flat = kl_mass_estimate(f0, NORMAL, GAUSS_DP, 0.5, 10, seed=5, hyper=1.0)
    hier = hierarchical_mass_estimate(xi, lambda c: DPSpec(GAUSS_DP.base_measure, c),
                                      f0, NORMAL, 0.5, 10, seed=5, hyper=1.0)
    assert [r.kl for r in flat.records] == [r.kl for r in hier.records]


def test_two_point_xi_mixture_bound():
    f0 = make_density("normal")
    values = (0.5, 3.0)
    xi = BaseMeasure("discrete", {"values": list(values), "probs": [0.5, 0.5]})
    family = lambda c: DPSpec(GAUSS_DP.base_measure, c)
    n = 60
    mix = hierarchical_mass_estimate(xi, family, f0, NORMAL, 0.5, n, seed=9,
                                     hyper_family=lambda c: SCALE_PRIOR)
    parts = [kl_mass_estimate(f0, NORMAL, family(c), 0.5, n, seed=100 + i,
                              hyper_prior=SCALE_PRIOR) for i, c in enumerate(values)]
    slack = 3 * (mix.half_width + max(p.half_width for p in parts))
    assert mix.fraction >= min(p.fraction for p in parts) - slack
    assert 0.0 <= mix.fraction <= 1.0


def test_argument_guards():
    f0 = make_density("normal")
    with pytest.raises(DomainError):
        kl_mass_estimate(f0, NORMAL, GAUSS_DP, 0.0, 5, seed=1)
    with pytest.raises(DomainError):
        kl_mass_estimate(f0, NORMAL, GAUSS_DP, 0.5, 0, seed=1)
