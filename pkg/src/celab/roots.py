"""Polynomials and the simultaneous-iteration root finder.

Coefficients are always stored in ascending order.  Roots are found with the
Aberth-Ehrlich iteration (cubic convergence for simple roots, every root at
once), followed by Newton polishing and merging of clustered roots.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegreeError, RootFindingError

EPS = np.finfo(float).eps
MAX_ITER = 200
CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class Polynomial:
    """Complex polynomial with ascending coefficients, trailing zeros trimmed."""

    coeffs: tuple

    def __init__(self, coeffs: Sequence[complex]):
        c = [complex(x) for x in coeffs]
        if not c:
            raise ValueError("empty coefficient list; use [0] for the zero polynomial")
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        for x in c:
            if cmath.isnan(x) or cmath.isinf(x):
                raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        if len(self.coeffs) == 1 and self.coeffs[0] == 0:
            return -1
        return len(self.coeffs) - 1

    def __call__(self, z):
        return horner(np.asarray(self.coeffs), z)

    def deriv(self) -> "Polynomial":
        if len(self.coeffs) == 1:
            return Polynomial([0])
        return Polynomial([k * a for k, a in enumerate(self.coeffs)][1:])

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, complex)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return Polynomial(a)

    def __neg__(self) -> "Polynomial":
        return Polynomial([-a for a in self.coeffs])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial([a * other for a in self.coeffs])

    __rmul__ = __mul__

    def padded(self, n: int) -> np.ndarray:
        """Coefficients as an array of length ``n + 1`` (zero-padded)."""
        out = np.zeros(n + 1, complex)
        out[: len(self.coeffs)] = self.coeffs
        return out

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> "Polynomial":
        p = np.array([lead], complex)
        for r in roots:
            p = np.convolve(p, [-r, 1.0])
        return cls(p)


def horner(coeffs, z):
    """Evaluate ascending ``coeffs`` at ``z`` (scalar or array)."""
    acc = np.zeros_like(np.asarray(z, dtype=complex))
    for a in coeffs[::-1]:
        acc = acc * z + a
    return acc


def _initial_guesses(coeffs: np.ndarray) -> np.ndarray:
    """Points on a circle of radius (|a_0/a_n|)^(1/n), rotated off the axes.

    ``coeffs`` has shape (M, n+1) with nonzero constant and leading terms.
    """
    n = coeffs.shape[1] - 1
    rho = (np.abs(coeffs[:, 0]) / np.abs(coeffs[:, -1])) ** (1.0 / n)
    ang = 2 * np.pi * np.arange(n) / n + 0.4
    return rho[:, None] * np.exp(1j * ang)[None, :]


def aberth_batch(coeffs: np.ndarray, z0: np.ndarray | None = None,
                 maxiter: int = MAX_ITER) -> tuple[np.ndarray, np.ndarray]:
    """Aberth-Ehrlich iteration for M polynomials of common degree n at once.

    ``coeffs`` has shape (M, n+1), ascending, leading coefficients nonzero.
    Returns ``(roots, converged)`` with shapes (M, n) and (M,).  Each row is
    frozen as soon as it converges, so a row's result does not depend on the
    other rows in the batch.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    M, n1 = coeffs.shape
    n = n1 - 1
    z = _initial_guesses(coeffs) if z0 is None else np.array(z0, dtype=complex, copy=True)
    if n == 1:
        return -coeffs[:, :1] / coeffs[:, 1:], np.ones(M, bool)
    absc = np.abs(coeffs)
    deriv = coeffs[:, 1:] * np.arange(1, n1)
    active = np.arange(M)
    done = np.zeros(M, bool)
    eye = np.eye(n, dtype=bool)
    for _ in range(maxiter):
        if active.size == 0:
            break
        za = z[active]
        ca = coeffs[active]
        p = np.zeros_like(za)
        bound = np.zeros(za.shape)
        az = np.abs(za)
        for k in range(n, -1, -1):
            p = p * za + ca[:, k, None]
            bound = bound * az + absc[active, k, None]
        dp = np.zeros_like(za)
        for k in range(n - 1, -1, -1):
            dp = dp * za + deriv[active, k, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = za[:, :, None] - za[:, None, :]
            diff[:, eye] = 1.0
            inv = 1.0 / diff
            inv[:, eye] = 0.0
            s = inv.sum(axis=2)
            step = ratio / (1.0 - ratio * s)
        on_root = np.abs(p) <= 4 * EPS * bound
        step = np.where(on_root | ~np.isfinite(step), 0.0, step)
        za = za - step
        z[active] = za
        small = np.abs(step) <= 4 * EPS * np.maximum(np.abs(za), EPS)
        fin = np.all(on_root | small, axis=1)
        done[active[fin]] = True
        active = active[~fin]
    return z, done


def aberth_warm(coeffs: Sequence[complex], z0: Sequence[complex], maxiter: int = 60) -> list[complex]:
    """Scalar Aberth iteration from good initial guesses (pure Python; small degree).

    Used for continuation, where the previous step's roots are already close.
    """
    c = list(coeffs)
    n = len(c) - 1
    if n == 1:
        return [-c[0] / c[1]]
    absc = [abs(a) for a in c]
    z = list(z0)
    for _ in range(maxiter):
        moved = False
        for i in range(n):
            zi = z[i]
            p = 0j
            dp = 0j
            bound = 0.0
            azi = abs(zi)
            for k in range(n, -1, -1):
                dp = dp * zi + p
                p = p * zi + c[k]
                bound = bound * azi + absc[k]
            if abs(p) <= 4 * EPS * bound:
                continue
            s = 0j
            for j in range(n):
                if j != i:
                    dz = zi - z[j]
                    if dz != 0:
                        s += 1.0 / dz
            if dp == 0:
                step = 1e-8 * (1 + azi)
            else:
                ratio = p / dp
                den = 1.0 - ratio * s
                step = ratio / den if den != 0 else ratio
            z[i] = zi - step
            if abs(step) > 4 * EPS * max(azi, EPS):
                moved = True
        if not moved:
            return z
    raise RootFindingError("warm-started Aberth iteration did not converge", partial=z,
                           iterations=maxiter)


def newton_polish(coeffs: np.ndarray, z: complex, steps: int = 3) -> complex:
    """A few Newton steps, each accepted only if it reduces |p|."""
    c = np.asarray(coeffs)
    d = c[1:] * np.arange(1, len(c))
    p = complex(horner(c, z))
    for _ in range(steps):
        dp = complex(horner(d, z))
        if dp == 0 or p == 0:
            break
        z_new = z - p / dp
        p_new = complex(horner(c, z_new))
        if abs(p_new) >= abs(p):
            break
        z, p = z_new, p_new
    return z


def _groups(points: list[complex], tol: float) -> list[list[int]]:
    """Single-linkage groups of indices whose points are within ``tol`` (relative above 1)."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(points[i] - points[j]) < tol * max(1.0, abs(points[i])):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _cluster(roots: list[complex], tol: float) -> list[tuple[complex, int]]:
    return [(complex(sum(roots[i] for i in g) / len(g)), len(g)) for g in _groups(roots, tol)]


def _merge_multiple(c: np.ndarray, items: list[tuple[complex, int]],
                    wide_tol: float = 1e-4) -> list[tuple[complex, int]]:
    """Merge near-coincident roots that are numerically a single multiple root.

    In double precision an m-fold root splits into m roots about eps^(1/m)
    apart, wider than the fixed cluster tolerance.  A candidate group within
    ``wide_tol`` is merged when the root of the (m-1)-th derivative near its
    mean is also a root of ``c`` up to rounding (backward-error test).
    """
    if len(items) < 2:
        return items
    out = []
    absc = np.abs(c)
    for g in _groups([r for r, _ in items], wide_tol):
        members = [items[i] for i in g]
        if len(members) < 2:
            out.extend(members)
            continue
        m = sum(k for _, k in members)
        center = sum(r * k for r, k in members) / m
        d = np.array(c, complex)
        for _ in range(m - 1):
            d = d[1:] * np.arange(1, len(d))
        zeta = newton_polish(d, center, steps=8)
        bound = float(horner(absc, abs(zeta)).real)
        if abs(complex(horner(c, zeta))) <= 16 * EPS * bound:
            out.append((complex(zeta), m))
        else:
            out.extend(members)
    return out


def sort_key(z: complex):
    return (round(z.real, 12), round(z.imag, 12), z.real, z.imag)


def poly_roots(p: Polynomial | Sequence[complex], cluster_tol: float = CLUSTER_TOL,
               maxiter: int = MAX_ITER) -> list[tuple[complex, int]]:
    """All roots of ``p`` with multiplicities, sorted by real then imaginary part.

    Exact zero roots (vanishing low-order coefficients) are split off before
    iterating, so roots at the origin are reported exactly.
    """
    if not isinstance(p, Polynomial):
        p = Polynomial(p)
    n = p.degree
    if n < 1:
        raise DegreeError(f"polynomial of degree {n} has no roots to find")
    c = np.array(p.coeffs, complex)
    k0 = 0
    while c[k0] == 0:
        k0 += 1
    c = c[k0:]
    roots: list[complex] = []
    m = len(c) - 1
    if m >= 1:
        scale = np.max(np.abs(c))
        z, ok = aberth_batch((c / scale)[None, :], maxiter=maxiter)
        if not ok[0]:
            raise RootFindingError(f"Aberth iteration did not converge in {maxiter} steps",
                                   partial=list(z[0]), iterations=maxiter)
        for r in z[0]:
            r = complex(r)
            if abs(r) > 1:
                # polish in the reversed chart where |1/r| < 1
                u = newton_polish(c[::-1], 1.0 / r)
                r = 1.0 / u if u != 0 else r
            else:
                r = newton_polish(c, r)
            roots.append(r)
    out = _merge_multiple(c, _cluster(roots, cluster_tol))
    if k0:
        out.append((0j, k0))
        out = _merge_zero(out, cluster_tol)
    return sorted(out, key=lambda rm: sort_key(rm[0]))


def _merge_zero(items, tol):
    zero = [(r, m) for r, m in items if r == 0 or abs(r) < tol]
    rest = [(r, m) for r, m in items if not (r == 0 or abs(r) < tol)]
    if len(zero) > 1:
        return rest + [(0j, sum(m for _, m in zero))]
    return rest + [(0j, m) for _, m in zero]


def expand_roots(roots: list[tuple[complex, int]]) -> list[complex]:
    out = []
    for r, m in roots:
        out.extend([r] * m)
    return out
