import math

import numpy as np
import pytest

from celab.backward import Scale
from celab.cover import (TCEParams, ce2ce_check, expshrink_estimate, fibonacci_sphere, fit_shrink_rate,
                         fixed_points, julia_sample, lemma_constants, near_julia,
                         repelling_fixed_points, sup_spherical_derivative, tce_check)
from celab.errors import DomainError
from celab.ratmap import RationalMap
from celab.sphere import INF, chordal_dist, is_inf


def test_fixed_points(cheb, sq):
    pts = fixed_points(cheb)
    finite = sorted(p.real for p in pts if not is_inf(p))
    np.testing.assert_allclose(finite, [-1, 2], atol=1e-12)
    assert any(is_inf(p) for p in pts)
    rep = repelling_fixed_points(cheb)
    assert any(abs(p - 2) < 1e-12 for p in rep) and any(abs(p + 1) < 1e-12 for p in rep)
    assert not any(is_inf(p) for p in repelling_fixed_points(sq))


def test_julia_sample_on_circle(sq):
    js = julia_sample(sq, 500, np.random.default_rng(3))
    np.testing.assert_allclose(np.abs(js), 1, atol=1e-9)


def test_julia_sample_chebyshev_interval(cheb):
    js = np.array(julia_sample(cheb, 500, np.random.default_rng(4)))
    assert np.all(np.abs(js.imag) < 1e-9) and np.all(np.abs(js.real) <= 2 + 1e-9)


def test_near_julia(sq):
    assert near_julia(sq, 1j)
    assert not near_julia(sq, 0.5)
    assert not near_julia(sq, 3)


def test_fit_shrink_rate_exact():
    d = [0.1 * 3.0**-k for k in range(11)]
    assert fit_shrink_rate(d, 10) == pytest.approx(3.0, rel=1e-10)


def test_expshrink_fixed_branch_chebyshev(cheb):
    est = expshrink_estimate(cheb, 0.1, 10, anchor=2, branch="fixed")
    assert est.lambda_exp == pytest.approx(4, rel=0.01)
    assert all(3.5 <= q <= 4.5 for q in est.ratios[1:])
    assert est.failures == 0 and not est.unreliable


def test_expshrink_square(sq):
    est = expshrink_estimate(sq, 0.3, 10, seed=1)
    assert 1.9 <= est.lambda_exp <= 2.1
    assert len(est.per_n_max_diam) == 11


def test_expshrink_random_deterministic(cheb):
    a = expshrink_estimate(cheb, 0.1, 6, seed=7)
    b = expshrink_estimate(cheb, 0.1, 6, seed=7, threads=4)
    assert a.per_n_max_diam == b.per_n_max_diam
    assert a.lambda_exp > 1


def test_expshrink_errors(cheb):
    with pytest.raises(DomainError):
        expshrink_estimate(cheb, 0.1, 1)
    with pytest.raises(DomainError):
        expshrink_estimate(cheb, 2.5, 5)
    with pytest.raises(DomainError):
        expshrink_estimate(cheb, 0.1, 5, branch="other")


def test_tce_examples(cheb, sq):
    res = tce_check(cheb, 2, TCEParams(0, 1, 0.3), 8)
    assert res.passed and all(v == 0 for v in res.counts.values())
    assert res.chosen == list(range(1, 9))
    res = tce_check(sq, 1j, TCEParams(0, 1, 0.3), 8)
    assert res.passed


def test_tce_params_validation():
    with pytest.raises(DomainError):
        TCEParams(-1, 1, 0.3)
    with pytest.raises(DomainError):
        TCEParams(0, 0, 0.3)
    with pytest.raises(DomainError):
        TCEParams(0, 1, 0.0)


def test_tce_rejects_fatou_point(sq):
    with pytest.raises(DomainError):
        tce_check(sq, 0.5, TCEParams(0, 1, 0.3), 4)


def test_tce_counts_critical_components(cheb):
    # orbit of 0 lands on 2 after two steps; a disk of radius 0.3 about f^n(0)
    # pulls back to components containing the critical point 0 at the start
    res = tce_check(cheb, 0, TCEParams(0, 1, 0.3), 4)
    assert any(v and v > 0 for v in res.counts.values())


def test_ce2ce_whole_sphere():
    f = RationalMap.from_coeffs([1j, 0, 1])
    rec = ce2ce_check(f, 0, 10, 1.5)
    assert rec.m == 1 and rec.whole_sphere
    assert rec.r == pytest.approx(2 * math.sqrt(2), rel=1e-12)
    assert rec.C_K == pytest.approx(math.sqrt(2), rel=1e-12)


def test_ce2ce_koebe_constant(cheb, misi):
    for f in (cheb, misi):
        for e in f.critical_set.points:
            if is_inf(e):
                continue
            rec = ce2ce_check(f, e, 20, Scale(0.5, 0.01))
            if rec.vacuous:
                continue
            assert 0 < rec.C_K < 100
            assert rec.const > 0


def test_lemma_constants():
    assert lemma_constants(0.5, 0.0, 10, 2.0, 2.0) == (2, 2)
    assert lemma_constants(1.0, 0.1, 10, 2.0, 2.0) == (3, 2)
    assert lemma_constants(1.0, 0.0, 7, 3.0, 2.0)[0] == 1
    assert lemma_constants(math.exp(-1), 0.5, 10, math.e, 2.0)[0] == 12
    assert lemma_constants(1.0, 0.0, 1, math.e, math.e**2)[1] == 3
    s, M = lemma_constants(1e-3, 0.0, 1, 2.0, 4.0)
    assert s == math.floor(-math.log(1e-3) / math.log(2)) + 1 and M == 3
    with pytest.raises(DomainError):
        lemma_constants(0.0, 0.0, 1, 2.0, 2.0)
    with pytest.raises(DomainError):
        lemma_constants(0.5, 0.0, 1, 1.0, 2.0)


def test_fibonacci_sphere_uniform():
    z = fibonacci_sphere(4000)
    north = np.sum(np.abs(z) > 1)
    assert abs(north - 2000) < 10


def test_sup_spherical_derivative(sq, cheb):
    assert sup_spherical_derivative(sq, grid=20000) == pytest.approx(2.0, rel=1e-6)
    s = sup_spherical_derivative(cheb, grid=20000)
    grid = fibonacci_sphere(200000)
    assert s >= float(np.max(np.exp(cheb.log_sderiv(grid)))) - 1e-9
    assert s == pytest.approx(9.185, abs=0.01)
