import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from celab.errors import DegreeError, RootFindingError
from celab.roots import Polynomial, aberth_batch, expand_roots, poly_roots


def test_polynomial_invariants():
    assert Polynomial([1, 2, 0, 0]).coeffs == (1, 2)
    assert Polynomial([0]).degree == -1
    with pytest.raises(ValueError):
        Polynomial([])
    p = Polynomial([1, 1]) * Polynomial([-1, 1])
    assert p.coeffs == (-1, 0, 1)
    assert (p - p).degree == -1


def test_examples():
    assert poly_roots([-1, 0, 1]) == [(-1, 1), (1, 1)]
    r = poly_roots([1, 0, 1])
    assert [m for _, m in r] == [1, 1]
    assert abs(r[0][0] + 1j) < 1e-15 and abs(r[1][0] - 1j) < 1e-15
    r = poly_roots(Polynomial.from_roots([1, 2, 3]))
    np.testing.assert_allclose([x for x, _ in r], [1, 2, 3], atol=1e-10)


def test_constant_polynomial_rejected():
    with pytest.raises(DegreeError):
        poly_roots([3])


def test_nonconvergence_reports_partial():
    with pytest.raises(RootFindingError) as ei:
        poly_roots(Polynomial.from_roots(np.arange(1, 13)), maxiter=1)
    assert ei.value.partial is not None and len(ei.value.partial) == 12


def test_multiple_roots_merged():
    assert poly_roots([0, 0, 1]) == [(0, 2)]
    r = poly_roots(Polynomial.from_roots([1.5, 1.5, -2]))
    assert [(round(x.real, 7), m) for x, m in r] == [(-2.0, 1), (1.5, 2)]
    r = poly_roots(Polynomial.from_roots([0.5j, 0.5j, 0.5j, 3]))
    assert sorted(m for _, m in r) == [1, 3]


def test_sorted_deterministic(rng):
    c = rng.normal(size=9) + 1j * rng.normal(size=9)
    a, b = poly_roots(c), poly_roots(c)
    assert a == b
    xs = [x for x, _ in a]
    assert xs == sorted(xs, key=lambda z: (round(z.real, 12), round(z.imag, 12), z.real, z.imag))


@st.composite
def separated_roots(draw):
    n = draw(st.integers(1, 12))
    rad = draw(st.lists(st.floats(0.1, 3.0), min_size=n, max_size=n))
    ang = draw(st.lists(st.floats(0, 2 * np.pi), min_size=n, max_size=n))
    pts = [r * complex(np.cos(a), np.sin(a)) for r, a in zip(rad, ang)]
    assume(all(abs(p - q) > 1e-3 for i, p in enumerate(pts) for q in pts[:i]))
    return pts


@given(separated_roots())
@settings(max_examples=150, deadline=None)
def test_recovers_product_roots(rs):
    got = expand_roots(poly_roots(Polynomial.from_roots(rs)))
    assert len(got) == len(rs)
    for r in rs:
        assert min(abs(r - g) for g in got) < 1e-9 * max(1, abs(r)) + 1e-9


def test_against_numpy_oracle(rng):
    for _ in range(200):
        n = int(rng.integers(1, 15))
        c = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
        ours = np.array(expand_roots(poly_roots(c)))
        ref = np.roots(c[::-1])
        assert len(ours) == len(ref) == n
        # match each reference root to its nearest computed root
        for r in ref:
            assert np.min(np.abs(ours - r)) < 1e-8 * max(1, abs(r))


def test_batch_rows_independent(rng):
    c = rng.normal(size=(6, 5)) + 1j * rng.normal(size=(6, 5))
    z_all, ok = aberth_batch(c)
    assert ok.all()
    for i in range(6):
        z_i, _ = aberth_batch(c[i:i + 1])
        np.testing.assert_array_equal(z_i[0], z_all[i])
