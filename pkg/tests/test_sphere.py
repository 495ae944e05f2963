import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from celab.errors import DomainError, WholeSphereError
from celab.ratmap import RationalMap
from celab.sphere import (INF, ChordalDisk, antipode, as_point, chart_radius, chordal_dist,
                          chordal_radius, invert, point_to_json, rotation, spherical_deriv,
                          to_unit_sphere)

finite = st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False)
points = st.one_of(finite, st.just(INF))


def test_dist_examples():
    assert chordal_dist(1 + 2j, 1 + 2j) == 0
    assert chordal_dist(0, INF) == pytest.approx(2, abs=1e-15)
    assert chordal_dist(1j, 0) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert chordal_dist(INF, INF) == 0


def test_dist_matches_unit_sphere_embedding(rng):
    z = rng.normal(size=200) * 10 ** rng.uniform(-3, 3, 200) + 1j * rng.normal(size=200)
    w = rng.normal(size=200) + 1j * rng.normal(size=200) * 10 ** rng.uniform(-3, 3, 200)
    X, Y = to_unit_sphere(z), to_unit_sphere(w)
    np.testing.assert_allclose(chordal_dist(z, w), np.linalg.norm(X - Y, axis=1), rtol=1e-12, atol=1e-14)


@given(points, points, points)
@settings(max_examples=300, deadline=None)
def test_metric_axioms(a, b, c):
    ab, ba = chordal_dist(a, b), chordal_dist(b, a)
    assert ab == pytest.approx(ba, abs=1e-15)
    assert 0 <= ab <= 2 + 1e-15
    assert ab <= chordal_dist(a, c) + chordal_dist(c, b) + 1e-12


@given(finite)
@settings(max_examples=200, deadline=None)
def test_antipode_at_distance_two(z):
    assert chordal_dist(z, antipode(z)) == pytest.approx(2, abs=1e-12)


def test_distance_two_only_at_antipode(rng):
    z = complex(*rng.normal(size=2))
    for w in rng.normal(size=(100, 2)) @ [1, 1j]:
        if abs(w - antipode(z)) > 1e-3:
            assert chordal_dist(z, w) < 2 - 1e-9


def test_as_point_parsing():
    assert as_point("inf") is INF or cmath.isinf(as_point("inf"))
    assert as_point([1, -2]) == 1 - 2j
    assert as_point("0.5+1j") == 0.5 + 1j
    assert point_to_json(INF) == "inf"
    with pytest.raises(DomainError):
        as_point(complex("nan"))


def test_rotation_is_isometry(rng):
    for a in [0.3 + 2j, -5, INF, 1e-3j]:
        T, Ti = rotation(a)
        assert chordal_dist(T(a), 0) < 1e-12
        z = rng.normal(size=50) + 1j * rng.normal(size=50)
        w = rng.normal(size=50) * 3 + 1j * rng.normal(size=50)
        np.testing.assert_allclose(chordal_dist(T(z), T(w)), chordal_dist(z, w), atol=1e-12)
        np.testing.assert_allclose(Ti(T(z)), z, rtol=1e-10)


def test_chart_radius_roundtrip():
    for r in [1e-6, 0.1, 1.0, 1.9]:
        assert chordal_radius(chart_radius(r)) == pytest.approx(r, rel=1e-13)
        assert chordal_dist(0, chart_radius(r)) == pytest.approx(r, rel=1e-13)


def test_sderiv_examples(cheb, misi, sq):
    assert spherical_deriv(misi, 0) == 0
    assert spherical_deriv(cheb, 2) == pytest.approx(4, rel=1e-15)
    assert spherical_deriv(sq, INF) == 0
    assert spherical_deriv(cheb, math.sqrt(2)) == pytest.approx(6 * math.sqrt(2), rel=1e-14)


def _inverted(f: RationalMap) -> RationalMap:
    # conjugate by u = 1/z: g(u) = 1 / f(1/u), computed with reversed coefficients
    d = f.degree
    return RationalMap.from_coeffs(f.Q.padded(d)[::-1], f.P.padded(d)[::-1])


def test_sderiv_chart_invariance(rng):
    from tests.conftest import random_map

    for _ in range(50):
        f = random_map(rng)
        g = _inverted(f)
        for z in rng.normal(size=5) + 1j * rng.normal(size=5):
            if min(abs(z), abs(1 / z)) < 1e-3:
                continue
            assert g.sderiv(1 / z) == pytest.approx(f.sderiv(z), rel=1e-10)


def test_sderiv_euclidean_formula(rng, misi):
    for z in rng.normal(size=20) + 1j * rng.normal(size=20):
        expect = abs(misi.deriv(z)) * (1 + abs(z) ** 2) / (1 + abs(misi(z)) ** 2)
        assert misi.sderiv(z) == pytest.approx(expect, rel=1e-12)


def test_to_chart_examples():
    c, rho, chart = ChordalDisk(0, 2 / math.sqrt(1.25)).to_chart()
    assert (c, chart) == (0, "standard")
    # chordal radius 2/sqrt(1.25) is the image of the Euclidean radius 2
    assert rho == pytest.approx(2.0, rel=1e-12)
    c, rho, chart = ChordalDisk(0, 1 / math.sqrt(1.25)).to_chart()
    assert rho == pytest.approx(0.5, rel=1e-12)
    assert chordal_dist(0, rho) == pytest.approx(1 / math.sqrt(1.25), rel=1e-12)
    for r in [0.01, 0.7, 1.99]:
        c, _, _ = ChordalDisk(0, r).to_chart()
        assert c == 0 and isinstance(c, complex)
    c, rho, chart = ChordalDisk(INF, 1.0).to_chart()
    assert chart == "inverted" and c == 0
    assert rho == pytest.approx(chart_radius(1.0), rel=1e-12)


def test_to_chart_whole_sphere():
    with pytest.raises(WholeSphereError):
        ChordalDisk(0, 2).to_chart()
    with pytest.raises(DomainError):
        ChordalDisk(0, 2.5)


@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       st.floats(0.01, 1.9))
@settings(max_examples=200, deadline=None)
def test_to_chart_roundtrip(center, r):
    d = ChordalDisk(center, r)
    try:
        c, rho, chart = d.to_chart()
    except WholeSphereError:
        return
    back = ChordalDisk.from_chart(c, rho, chart)
    assert chordal_dist(back.center, d.center) < 1e-9
    assert back.radius == pytest.approx(r, abs=1e-12)
    # boundary points of the Euclidean disk lie at chordal distance r from the center
    bd = c + rho * np.exp(1j * np.linspace(0, 2 * np.pi, 7))
    if chart == "inverted":
        bd = invert(bd)
    np.testing.assert_allclose(chordal_dist(bd, d.center), r, atol=1e-9)


def test_boundary_points_on_circle():
    d = ChordalDisk(3 - 1j, 0.4)
    np.testing.assert_allclose(chordal_dist(d.boundary(np.linspace(0, 6, 25)), d.center), 0.4, atol=1e-12)
