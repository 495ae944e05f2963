"""Geometry of the Riemann sphere.

Points are plain Python/numpy complex numbers; the point at infinity is
``INF = complex(inf, 0)``.  NaN is never a valid point.

The metric is the chordal metric with the sphere's diameter normalised to 2,

    sigma(a, b) = 2|a - b| / sqrt((1 + |a|^2)(1 + |b|^2)),

which is the Euclidean distance in R^3 after stereographic projection onto
the unit sphere.  Every formula below switches to the chart ``w = 1/z`` when
both arguments are outside the unit disk, so chart values stay bounded by 1.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, WholeSphereError

INF = complex(math.inf, 0.0)

SpherePoint = complex
ArrayLike = Union[complex, np.ndarray]


def is_inf(z) -> bool | np.ndarray:
    if np.ndim(z) == 0:
        return cmath.isinf(complex(z))
    return np.isinf(z)


def as_point(z) -> complex:
    """Validate and normalise a scalar to a sphere point."""
    if isinstance(z, str):
        if z.strip().lower() in ("inf", "infinity", "oo"):
            return INF
        z = complex(z)
    if isinstance(z, (list, tuple)):
        if len(z) != 2:
            raise DomainError(f"expected [re, im], got {z!r}")
        z = complex(float(z[0]), float(z[1]))
    z = complex(z)
    if cmath.isnan(z):
        raise DomainError("NaN is not a point of the sphere")
    if cmath.isinf(z):
        return INF
    return z


def point_to_json(z: complex):
    """``[re, im]`` or ``"inf"``."""
    z = complex(z)
    if cmath.isinf(z):
        return "inf"
    return [z.real, z.imag]


def invert(z: ArrayLike) -> ArrayLike:
    """The chart change ``z -> 1/z`` with 0 <-> INF handled exactly."""
    if np.ndim(z) == 0:
        z = complex(z)
        if cmath.isinf(z):
            return 0j
        if z == 0:
            return INF
        try:
            w = 1.0 / z
        except OverflowError:
            return INF
        return INF if cmath.isinf(w) or cmath.isnan(w) else w
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    inf = np.isinf(z)
    zero = z == 0
    ok = ~(inf | zero)
    with np.errstate(over="ignore", invalid="ignore"):
        out[ok] = 1.0 / z[ok]
    out[inf] = 0
    out[zero | ~np.isfinite(out)] = INF  # 1/subnormal overflows to infinity
    return out


def chordal_dist(a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """Chordal distance, broadcasting over numpy arrays."""
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return _chordal_scalar(complex(a), complex(b))
    a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    flip = (np.abs(a) > 1) & (np.abs(b) > 1)
    aa = np.where(flip, invert(a), a)
    bb = np.where(flip, invert(b), b)
    a_inf = np.isinf(aa)
    b_inf = np.isinf(bb)
    with np.errstate(invalid="ignore", over="ignore"):
        num = 2.0 * np.abs(aa - bb)
        den = np.hypot(1.0, np.abs(aa)) * np.hypot(1.0, np.abs(bb))
        out = num / den
    both = a_inf & b_inf
    out = np.where(a_inf & ~b_inf, 2.0 / np.hypot(1.0, np.abs(np.where(b_inf, 0, bb))), out)
    out = np.where(b_inf & ~a_inf, 2.0 / np.hypot(1.0, np.abs(np.where(a_inf, 0, aa))), out)
    out = np.where(both, 0.0, out)
    return np.minimum(out, 2.0)


def _chordal_scalar(a: complex, b: complex) -> float:
    if cmath.isinf(a) or cmath.isinf(b):
        if cmath.isinf(a) and cmath.isinf(b):
            return 0.0
        fin = b if cmath.isinf(a) else a
        return 2.0 / math.hypot(1.0, abs(fin))
    if abs(a) > 1 and abs(b) > 1:
        a, b = 1.0 / a, 1.0 / b
    return min(2.0, 2.0 * abs(a - b) / (math.hypot(1.0, abs(a)) * math.hypot(1.0, abs(b))))


def antipode(z: complex) -> complex:
    """The point at chordal distance 2, ``-1/conj(z)``."""
    z = complex(z)
    if cmath.isinf(z):
        return 0j
    if z == 0:
        return INF
    return -1.0 / z.conjugate()


def to_unit_sphere(z: ArrayLike) -> np.ndarray:
    """Inverse stereographic projection onto the unit sphere in R^3 (INF -> north pole)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(z.shape + (3,))
    inf = np.isinf(z)
    big = (np.abs(z) > 1) & ~inf
    small = ~(inf | big)
    zs = z[small]
    s = 1.0 + np.abs(zs) ** 2
    out[small, 0] = 2 * zs.real / s
    out[small, 1] = 2 * zs.imag / s
    out[small, 2] = (np.abs(zs) ** 2 - 1) / s
    # w = 1/z: x + iy = 2 conj(w)/(1+|w|^2), height (1-|w|^2)/(1+|w|^2)
    w = 1.0 / z[big]
    s = 1.0 + np.abs(w) ** 2
    out[big, 0] = 2 * w.real / s
    out[big, 1] = -2 * w.imag / s
    out[big, 2] = (1 - np.abs(w) ** 2) / s
    out[inf] = (0.0, 0.0, 1.0)
    return out


def rotation(a: complex):
    """Return ``(T, T_inv)``: a chordal isometry with ``T(a) = 0`` and its inverse.

    ``T(z) = (z - a) / (1 + conj(a) z)``; for ``a = INF`` it is ``z -> 1/z``.
    Both callables work on scalars and arrays and map INF correctly.
    """
    a = complex(a)
    if cmath.isinf(a):
        return invert, invert
    if a == 0:
        return (lambda z: z), (lambda z: z)
    ac = a.conjugate()

    def mobius(z, p, q, r, s):
        # (p z + q) / (r z + s) on the sphere
        if np.ndim(z) == 0:
            z = complex(z)
            if cmath.isinf(z):
                return p / r
            den = r * z + s
            if den == 0:
                return INF
            return (p * z + q) / den
        z = np.asarray(z, dtype=complex)
        out = np.empty_like(z)
        inf = np.isinf(z)
        den = r * z + s
        pole = (den == 0) & ~inf
        ok = ~(inf | pole)
        out[ok] = (p * z[ok] + q) / den[ok]
        out[inf] = p / r
        out[pole] = INF
        return out

    return (lambda z: mobius(z, 1.0, -a, ac, 1.0)), (lambda z: mobius(z, 1.0, a, -ac, 1.0))


def chart_radius(r: float) -> float:
    """Euclidean radius of the chordal disk B(0, r) in the standard chart."""
    if not 0 < r < 2:
        raise WholeSphereError(f"chordal radius {r} is not in (0, 2)")
    s = r / 2.0
    return s / math.sqrt(1.0 - s * s)


def chordal_radius(rho: float) -> float:
    """Inverse of :func:`chart_radius`."""
    return 2.0 * rho / math.hypot(1.0, rho)


@dataclass(frozen=True)
class ChordalDisk:
    """Open chordal disk ``B(center, radius)``."""

    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not 0 < self.radius <= 2:
            raise DomainError(f"chordal radius must lie in (0, 2], got {self.radius}")

    def contains(self, z) -> bool | np.ndarray:
        return chordal_dist(self.center, z) < self.radius

    def to_chart(self) -> tuple[complex, float, str]:
        """Euclidean ``(center, radius, chart)`` describing the same point set.

        ``chart`` is ``"standard"`` (coordinate z) when the disk is bounded
        there, else ``"inverted"`` (coordinate 1/z).
        """
        if self.radius >= 2:
            raise WholeSphereError("a disk of chordal radius 2 is the whole sphere")
        beta = 2.0 * math.asin(self.radius / 2.0)  # angular radius
        z0 = self.center
        for chart in ("standard", "inverted"):
            c = z0 if chart == "standard" else invert(z0)
            if cmath.isinf(c):
                continue
            phi = 2.0 * math.atan(abs(c))  # angle from the chart origin
            if phi + beta >= math.pi:
                continue
            u = c / abs(c) if c != 0 else 1.0
            x1 = math.tan((phi - beta) / 2.0)
            x2 = math.tan((phi + beta) / 2.0)
            center = u * (x1 + x2) / 2.0
            if c == 0:
                center = 0j
            return complex(center), (x2 - x1) / 2.0, chart
        raise WholeSphereError("disk contains both 0 and infinity; use a rotated chart")

    @classmethod
    def from_chart(cls, center: complex, radius: float, chart: str = "standard") -> "ChordalDisk":
        """Chordal disk equal to the Euclidean disk ``|z - center| < radius`` in ``chart``."""
        if radius <= 0:
            raise DomainError("Euclidean radius must be positive")
        c = complex(center)
        t = abs(c)
        u = c / t if t > 0 else 1.0
        phi1 = 2.0 * math.atan(t - radius)
        phi2 = 2.0 * math.atan(t + radius)
        phic = (phi1 + phi2) / 2.0
        beta = (phi2 - phi1) / 2.0
        zc = u * math.tan(phic / 2.0)
        if chart == "inverted":
            zc = invert(zc)
        elif chart != "standard":
            raise DomainError(f"unknown chart {chart!r}")
        return cls(zc, 2.0 * math.sin(beta / 2.0))

    def boundary(self, theta: ArrayLike) -> ArrayLike:
        """Points of the boundary circle parametrised by angle in the centred chart."""
        _, t_inv = rotation(self.center)
        rho = chart_radius(self.radius)
        return t_inv(rho * np.exp(1j * np.asarray(theta)))


def spherical_deriv(f, z) -> float:
    """Spherical derivative ``|f'(z)| (1+|z|^2) / (1+|f(z)|^2)`` of a rational map.

    Evaluated in homogeneous coordinates, so it is chart independent and
    well defined at poles and at infinity.
    """
    return f.sderiv(z)
