import math

import numpy as np
import pytest

from celab.errors import BoundaryAmbiguityError, DomainError
from celab.lift import (LiftedCurve, curve_diameter, lift_circle, lift_tower, membership_oracle,
                        point_in_component, polyline_distance)
from celab.ratmap import RationalMap, preimages
from celab.sphere import INF, ChordalDisk, chordal_dist, rotation


def euclid_disk(center, radius):
    return ChordalDisk.from_chart(center, radius)


def pushes_to_circle(f, curve, tol=1e-6):
    v = curve.vertices
    for _ in range(curve.level):
        v = f(v)
    return np.abs(chordal_dist(v, curve.base.center) - curve.base.radius) < tol


def oracle_diameter(f, curve, grid=317):
    T, _ = rotation(curve.w)
    ext = 1.25 * float(np.max(np.abs(T(curve.vertices))))
    return membership_oracle(f, curve.base, curve.w, curve.level, grid=grid, extent=ext)[0]


def test_centered_disk_square(sq):
    c = lift_circle(sq, euclid_disk(0, 0.25), 0.5, 1)
    assert c.loops == 2
    np.testing.assert_allclose(np.abs(c.vertices), 0.5, atol=1e-12)
    assert curve_diameter(c) == pytest.approx(1.6, abs=1e-3)
    assert curve_diameter(c) <= 1.6 + 1e-12
    assert point_in_component(c, 0)
    assert not point_in_component(c, 1)
    assert not point_in_component(c, INF)


def test_off_center_disk_square(sq):
    c = lift_circle(sq, euclid_disk(1, 0.25), 1, 1)
    assert c.loops == 1
    re = c.vertices.real
    assert re.max() - re.min() == pytest.approx(math.sqrt(1.25) - math.sqrt(0.75), rel=1e-3)
    assert curve_diameter(c) == pytest.approx(oracle_diameter(sq, c), rel=0.01)


def test_level_zero_is_base_circle(cheb):
    d = ChordalDisk(0.3, 0.2)
    c = lift_circle(cheb, d, 0.3, 0)
    assert c.loops == 1
    np.testing.assert_allclose(chordal_dist(c.vertices, 0.3), 0.2, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_covering_count_power_map(d):
    f = RationalMap.from_coeffs([0] * d + [1])
    tl = lift_tower(f, ChordalDisk(0, 0.3), [0j] * 4)
    assert [c.loops for c in tl.curves] == [d**j for j in range(4)]


def test_single_loop_away_from_critical_values(cheb):
    tl = lift_tower(cheb, ChordalDisk(2, 0.1), [2, 2, 2, 2])
    assert [c.loops for c in tl.curves] == [1, 1, 1, 1]


def test_push_forward_and_closure(cheb, misi):
    for f, center, r in [(cheb, 2, 0.1), (misi, -1 + 1j, 0.2), (cheb, 0.5, 0.3)]:
        chain = [complex(center)]
        for _ in range(3):
            chain.append(min((w for w, _ in preimages(f, chain[-1])), key=lambda w: abs(w - chain[-1])))
        tl = lift_tower(f, ChordalDisk(center, r), chain)
        for c in tl.curves:
            assert pushes_to_circle(f, c).all()
            assert c.closure_error < 1e-8
            assert 1 <= c.loops <= f.degree**c.level


def test_nesting_in_radius(cheb):
    chain = [2, 2, 2, 2]
    big = lift_tower(cheb, ChordalDisk(2, 0.2), chain).curves
    small = lift_tower(cheb, ChordalDisk(2, 0.1), chain).curves
    for b, s in zip(big, small):
        assert curve_diameter(s) <= curve_diameter(b)


def test_diameter_examples():
    v = 0.5 * np.exp(2j * np.pi * np.arange(400) / 400)
    assert curve_diameter(v) == pytest.approx(1.6, abs=1e-12)
    assert curve_diameter(np.array([0.3 + 1j] * 5)) == 0
    assert curve_diameter(np.array([0.3 + 1j])) == 0


def test_diameter_methods_agree(rng):
    for _ in range(20):
        k = int(rng.integers(5, 1500))
        v = (rng.normal(size=k) + 1j * rng.normal(size=k)) * 10 ** rng.uniform(-2, 2)
        assert curve_diameter(v, "hull") == pytest.approx(curve_diameter(v, "exact"), abs=1e-9)


def _unit_circle_curve(n=200, clockwise=False):
    v = np.exp(2j * np.pi * np.arange(n) / n)
    if clockwise:
        v = v[::-1]
    return LiftedCurve(v, 0, ChordalDisk(0, math.sqrt(2)), 0j, 1)


def test_point_in_component_examples():
    c = _unit_circle_curve()
    assert point_in_component(c, 0)
    assert not point_in_component(c, 2)
    assert not point_in_component(c, INF)
    with pytest.raises(BoundaryAmbiguityError):
        point_in_component(c, 1)


def test_polyline_distance_exact():
    c = _unit_circle_curve(4000)
    assert polyline_distance(c.vertices, 0) == pytest.approx(math.sqrt(2), rel=1e-6)
    assert polyline_distance(c.vertices, INF) == pytest.approx(math.sqrt(2), rel=1e-6)


def test_lift_precondition(cheb):
    with pytest.raises(DomainError):
        lift_circle(cheb, ChordalDisk(2, 0.01), 0.0, 1)
    with pytest.raises(DomainError):
        lift_tower(cheb, ChordalDisk(2, 0.1), [2, 2], samples=16)


def test_diameter_matches_grid_oracle(misi, cheb, rng):
    for f in (misi, cheb):
        for _ in range(3):
            x = complex(*rng.normal(size=2))
            chain = [x]
            for _ in range(2):
                pre = [w for w, _ in preimages(f, chain[-1])]
                chain.append(pre[int(rng.integers(len(pre)))])
            tl = lift_tower(f, ChordalDisk(x, 0.15), chain)
            for c in tl.curves[1:]:
                assert curve_diameter(c) == pytest.approx(oracle_diameter(f, c), rel=0.02)
