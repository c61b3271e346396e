import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from klkit.approximants import ApproximantSequence, bernstein_approximant
from klkit.density import (MixingDistribution, MixtureDensity, make_density)
from klkit.kernels import make_kernel
from klkit.kl import (KLConvergenceError, convergence_study, floor_transform,
                      kl_divergence, lemma4_bound_check)
from klkit.special_fn import DomainError

# closed forms evaluated with mpmath
FLOOR_C_BETA22 = 1.0443310539518174     # int max(6x(1-x), 1/2) over [0, 1]
HIST_14_34 = 0.14384103622589046         # (ln 2 - ln 1.5) / 2


def _hist(weights):
    m = len(weights)
    atoms = (np.arange(m) + 0.5) / m
    return MixtureDensity(make_kernel("histogram"),
                          MixingDistribution.discrete(atoms, weights), hyper=m)


def _gauss_kl(m1, s1, m2, s2):
    return math.log(s2 / s1) + (s1 ** 2 + (m1 - m2) ** 2) / (2 * s2 ** 2) - 0.5


ORACLE_PAIRS = [
    ("normal", {}, "normal", {}, 0.0),
    ("normal", {}, "normal", {"mu": 1.0}, 0.5),
    ("normal", {}, "normal", {"sigma": 2.0}, 0.31814718055994531),
    ("normal", {"mu": 0.5, "sigma": 2.0}, "normal", {"mu": -1.0, "sigma": 0.7},
     4.8277288959094867),
    ("exp", {"rate": 1.0}, "exp", {"rate": 2.0}, 0.30685281944005469),
    ("exp", {"rate": 2.0}, "exp", {"rate": 1.0}, 0.19314718055994531),
    ("exp", {"rate": 1.0}, "exp", {"rate": 0.3}, 0.50397280432593603),
    ("laplace", {}, "laplace", {"scale": 2.0}, 0.19314718055994531),
]


@pytest.mark.parametrize("fn,fp,gn,gp,expected", ORACLE_PAIRS)
def test_analytic_pairs(fn, fp, gn, gp, expected):
    res = kl_divergence(make_density(fn, **fp), make_density(gn, **gp), tol=1e-9)
    assert abs(res.value - expected) < 1e-6
    assert res.abs_error_bound <= 1e-9 and res.converged


def test_gaussian_oracle_formula_agrees():
    assert _gauss_kl(0.5, 2.0, -1.0, 0.7) == pytest.approx(4.8277288959094867, rel=1e-15)


def test_uniform_against_histograms():
    u = make_density("uniform")
    res = kl_divergence(u, _hist([0.25, 0.75]), points=[0.5])
    assert abs(res.value - HIST_14_34) < 1e-6
    w = [0.1, 0.2, 0.3, 0.4]
    exact = -0.25 * sum(math.log(4 * wi) for wi in w)
    res = kl_divergence(u, _hist(w), points=[0.25, 0.5, 0.75])
    assert abs(res.value - exact) < 1e-6


def test_infinite_kl_flagged():
    res = kl_divergence(make_density("uniform"), _hist([1.0, 0.0]), points=[0.5])
    assert res.infinite and res.value == math.inf


def test_plain_callable_needs_support():
    f = lambda x: np.ones_like(np.asarray(x, float))
    with pytest.raises(DomainError):
        kl_divergence(f, f)
    assert kl_divergence(f, f, support=(0.0, 1.0)).value == 0.0
    with pytest.raises(DomainError):
        kl_divergence(make_density("uniform"), f, tol=0.0)


def test_non_convergence_raises_when_strict():
    f0 = make_density("normal")
    g = make_density("cauchy")
    with pytest.raises(KLConvergenceError):
        kl_divergence(f0, g, tol=1e-17)
    loose = kl_divergence(f0, g, tol=1e-17, strict=False)
    assert not loose.converged and math.isfinite(loose.value)


@given(st.floats(-2, 2), st.floats(0.3, 3), st.floats(-2, 2), st.floats(0.3, 3))
def test_nonnegative_and_matches_closed_form(m1, s1, m2, s2):
    res = kl_divergence(make_density("normal", mu=m1, sigma=s1),
                        make_density("normal", mu=m2, sigma=s2), tol=1e-9)
    assert res.value >= -res.abs_error_bound
    assert res.value == pytest.approx(_gauss_kl(m1, s1, m2, s2), abs=1e-6)


def test_floor_transform_examples():
    _, c = floor_transform(make_density("uniform"), 0.5)
    assert c == pytest.approx(1.0, abs=1e-13)
    f1, c = floor_transform(make_density("beta_poly"), 0.5)
    assert c == pytest.approx(FLOOR_C_BETA22, abs=1e-10)
    x = np.linspace(0, 1, 101)
    assert np.all(f1.eval(x) >= 0.5 / c - 1e-15)
    cs = [floor_transform(make_density("beta_poly"), m)[1] for m in (0.1, 0.01, 0.001)]
    assert cs[0] > cs[1] > cs[2] > 1.0 and cs[2] - 1.0 < 1e-5


def test_floor_transform_guards():
    with pytest.raises(DomainError):
        floor_transform(make_density("normal"), 0.5)
    with pytest.raises(DomainError):
        floor_transform(make_density("uniform"), 0.0)


@pytest.mark.parametrize("f0,f,m", [
    ("uniform", "uniform", 0.5),
    ("beta_poly", "uniform", 0.5),
    ("beta_poly", "bernstein10", 0.1),
])
def test_floor_bound_triples(f0, f, m):
    target = make_density(f0)
    approx = (bernstein_approximant(make_density("beta_poly"), 10)
              if f == "bernstein10" else make_density(f))
    chk = lemma4_bound_check(target, approx, m)
    assert chk.verdict == "pass" and chk.lhs <= chk.rhs + chk.slack


def test_histogram_study_exact_zero():
    seq = ApproximantSequence("histogram", make_density("uniform"))
    study = convergence_study(seq, (2, 4, 8))
    assert all(r.result.value == 0.0 for r in study.rows) and study.converged


def test_study_rows_follow_ladder_order():
    seq = ApproximantSequence("bernstein", make_density("beta_poly"))
    study = convergence_study(seq, (20, 5, 10), threads=2)
    assert [r.index for r in study.rows] == [20, 5, 10]
    assert not study.converged  # 20, 5, 10 is not non-increasing
