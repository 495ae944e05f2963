import math

import numpy as np
import pytest

from celab.errors import DomainError, SRViolation
from celab.orbit import (ce_exponent, first_return_bound, fit_exponent, forward_orbit, sr_alpha_fit,
                         sr_distances)
from celab.ratmap import RationalMap
from celab.sphere import chordal_dist

LOG4 = math.log(4)


def test_forward_orbit_examples(cheb, misi):
    assert forward_orbit(cheb, -2, 3).points == [-2, 2, 2, 2]
    pts = forward_orbit(misi, 1j, 4).points
    np.testing.assert_allclose(pts, [1j, -1 + 1j, -1j, -1 + 1j, -1j], atol=1e-15)
    assert len(forward_orbit(misi, 0.3, 1).points) == 2
    with pytest.raises(DomainError):
        forward_orbit(misi, 0, 0)


def test_orbit_consistency_and_prefix(misi, rng):
    z0 = complex(*rng.normal(size=2)) * 0.3
    orb = forward_orbit(misi, z0, 50)
    for k in range(50):
        assert chordal_dist(misi(orb.points[k]), orb.points[k + 1]) < 1e-9
    # this start escapes to the superattracting critical point at infinity
    assert orb.critical_hit is not None and len(orb.log_deriv_prefix) == orb.critical_hit + 1
    steps = [misi.log_sderiv(z) for z in orb.points[:orb.critical_hit]]
    np.testing.assert_allclose(np.diff(orb.log_deriv_prefix), steps, atol=1e-12)


def test_prefix_matches_single_steps_on_julia(misi):
    orb = forward_orbit(misi, -1 + 1j, 60)
    steps = [misi.log_sderiv(z) for z in orb.points[:60]]
    np.testing.assert_allclose(orb.log_deriv_prefix, np.concatenate([[0], np.cumsum(steps)]), atol=1e-9)


def test_critical_hit_flagged(misi):
    orb = forward_orbit(misi, 0, 5)
    assert orb.critical_hit == 0 and orb.log_deriv_prefix == [0.0]


def test_ce_chebyshev_exact(cheb):
    est = ce_exponent(cheb, 0, 200)
    np.testing.assert_allclose(est.per_n_exponents, LOG4, atol=1e-12)
    assert est.lambda1 == pytest.approx(4, rel=1e-12)
    assert est.C1 == pytest.approx(1, rel=1e-10)
    assert est.observed


def test_ce_misiurewicz_limit(misi):
    est = ce_exponent(misi, 0, 200)
    target = 0.5 * math.log(4 * math.sqrt(2))
    assert target == pytest.approx(1.25 * math.log(2))
    assert abs(est.per_n_exponents[-1] - target) < 1e-3
    errs = [abs(a - target) * n for n, a in enumerate(est.per_n_exponents, 1)]
    assert max(errs[20:]) < 2 * max(errs[:20]) + 1  # O(1/n)


def test_ce_prefix_rescaling_and_fit_bound(misi):
    est = ce_exponent(misi, 0, 100)
    prefix = forward_orbit(misi, misi(0), 100).log_deriv_prefix
    a = np.asarray(est.per_n_exponents)
    np.testing.assert_allclose(a * np.arange(1, 101), prefix[1:], rtol=1e-14)
    n = np.arange(0, 101)
    assert np.all(np.asarray(prefix) >= math.log(est.C1) + n * math.log(est.lambda1) - 1e-9)


def test_ce_domain_errors(sq, cheb):
    with pytest.raises(DomainError):
        ce_exponent(sq, 0, 10)
    with pytest.raises(DomainError):
        ce_exponent(cheb, 1.0, 10)


def test_sr_distances_examples(misi, cheb):
    d = sr_distances(misi, 0, 9)
    np.testing.assert_allclose(d[:3], [math.sqrt(2), 4 / math.sqrt(6), math.sqrt(2)], rtol=1e-14)
    assert min(d) == pytest.approx(math.sqrt(2), abs=1e-12)
    d = sr_distances(cheb, 0, 20)
    np.testing.assert_allclose(d, 4 / math.sqrt(5), rtol=1e-14)


def test_sr_alpha_fit_examples():
    assert sr_alpha_fit([0.5] * 10, 0.5).alpha == 0
    d = 0.5 * np.exp(-0.1 * np.arange(1, 21))
    est = sr_alpha_fit(d, 0.5)
    assert est.alpha == pytest.approx(0.1, rel=1e-12)
    with pytest.raises(SRViolation):
        sr_alpha_fit([0.3, 0.0, 0.2])


def test_sr_fit_invariant(misi, rng):
    d = sr_distances(misi, 0, 40)
    est = sr_alpha_fit(d, math.sqrt(2))
    assert est.alpha == 0
    for C in [0.5, 1.0, 3.0]:
        d = rng.uniform(0.01, 1.0, 30)
        e = sr_alpha_fit(d, C)
        n = np.arange(1, 31)
        assert np.all(np.log(d) >= math.log(C) - e.alpha * n - 1e-12)
        k = e.witness_n
        assert math.log(d[k - 1]) == pytest.approx(math.log(C) - e.alpha * k, abs=1e-12) or e.alpha == 0


def test_sr_exact_hit_is_violation():
    # z^2 - 2 composed so that a critical point maps to another: f(z) = z^3 - 3z has crit +-1,
    # f(1) = -2, f(-2) = -2: not a hit; use a map where f(c1) = c2 exactly: z^2 + c with c = -1 has 0 -> -1 -> 0
    f = RationalMap.from_coeffs([-1, 0, 1])
    d = [chordal_dist(z, 0) for z in forward_orbit(f, 0, 4).points[1:]]
    assert 0.0 in d
    with pytest.raises(SRViolation):
        sr_alpha_fit(d)


def test_first_return_examples(misi, cheb):
    fr = first_return_bound(misi, 1.5, 20)
    assert fr.returns[0][1] == 1 and fr.K == 1
    fr = first_return_bound(misi, 1.2, 20)
    assert fr.returns[0][1] is None and fr.K is None
    assert fr.to_json()["returns"][0]["status"] == "no return <= N"
    fr = first_return_bound(cheb, 1.8, 20)
    assert fr.returns[0][1] == 1 and fr.K == 1


def test_fit_exponent_tail_window():
    logs = np.concatenate([[0.0], np.cumsum([0.1] * 5 + [1.0] * 5)])
    lam, C, a = fit_exponent(logs)
    assert math.log(lam) == pytest.approx(min(a[4:]))
