"""Rational maps of the Riemann sphere: evaluation, critical data, preimages.

A map ``f = P/Q`` of degree ``d = max(deg P, deg Q)`` is evaluated through
its homogeneous lift ``(z : 1) -> (P : Q)``.  Points with ``|z| > 1``
(including infinity) use the chart ``u = 1/z``, in which the lift reads
``(u^d P(1/u) : u^d Q(1/u))``, i.e. the padded coefficient lists reversed.
The spherical derivative is then

    |p' q - p q'| (1 + |t|^2) / (|p|^2 + |q|^2)

for the chart coordinate ``t``, which makes it chart independent and finite
everywhere, including at poles and at infinity.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DegreeError, DomainError
from .roots import EPS, Polynomial, aberth_batch, horner, poly_roots, sort_key
from .sphere import INF, as_point, chordal_dist, invert

log = logging.getLogger(__name__)

REDUCED_TOL = 1e-10
DROP_TOL = 4 * EPS


@dataclass(frozen=True, eq=False)
class RationalMap:
    """Reduced rational map ``P/Q`` of degree at least 2."""

    P: Polynomial
    Q: Polynomial
    name: str = ""

    def __post_init__(self):
        P = self.P if isinstance(self.P, Polynomial) else Polynomial(self.P)
        Q = self.Q if isinstance(self.Q, Polynomial) else Polynomial(self.Q)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)
        if Q.degree < 0:
            raise DomainError("denominator is the zero polynomial")
        if P.degree < 0:
            raise DegreeError("numerator is the zero polynomial (constant map)")
        if self.degree < 2:
            raise DegreeError(f"degree >= 2 required, got {self.degree}")
        if P.degree >= 1 and Q.degree >= 1:
            qr = [r for r, _ in poly_roots(Q)]
            for r, _ in poly_roots(P):
                if any(abs(r - s) < REDUCED_TOL * max(1.0, abs(r)) for s in qr):
                    raise DomainError(f"P and Q share the root {r}; map is not reduced")

    @classmethod
    def from_coeffs(cls, numerator: Sequence[complex], denominator: Sequence[complex] = (1,),
                    name: str = "") -> "RationalMap":
        return cls(Polynomial(numerator), Polynomial(denominator), name)

    @property
    def degree(self) -> int:
        return max(self.P.degree, self.Q.degree)

    @cached_property
    def _charts(self):
        d = self.degree
        Pd, Qd = self.P.padded(d), self.Q.padded(d)
        Pr, Qr = Pd[::-1].copy(), Qd[::-1].copy()

        def der(c):
            return c[1:] * np.arange(1, len(c))

        return {
            "std": (Pd, Qd, der(Pd), der(Qd)),
            "inv": (Pr, Qr, der(Pr), der(Qr)),
        }

    def _lift(self, z):
        """Return ``(p, q, wronskian, t)`` arrays for points ``z`` (any shape)."""
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = z.ravel()
        inv = ~(np.abs(z) <= 1)
        t = np.where(inv, invert(z) if z.size else z, z)
        p = np.empty_like(t)
        q = np.empty_like(t)
        w = np.empty_like(t)
        for key, mask in (("std", ~inv), ("inv", inv)):
            if not mask.any():
                continue
            Pc, Qc, dP, dQ = self._charts[key]
            tt = t[mask]
            pp, qq = horner(Pc, tt), horner(Qc, tt)
            p[mask], q[mask] = pp, qq
            w[mask] = horner(dP, tt) * qq - pp * horner(dQ, tt)
        return p.reshape(shape), q.reshape(shape), w.reshape(shape), t.reshape(shape)

    def __call__(self, z):
        if np.ndim(z) == 0:
            return self._eval_scalar(complex(z))
        p, q, _, _ = self._lift(z)
        out = np.empty_like(p)
        pole = q == 0
        with np.errstate(all="ignore"):
            out[~pole] = p[~pole] / q[~pole]
        out[pole] = INF
        out[np.isinf(out)] = INF
        return out

    def _eval_scalar(self, z: complex) -> complex:
        p, q, _, _ = self._lift(z)
        p, q = complex(p), complex(q)
        if q == 0:
            return INF
        v = p / q
        return INF if cmath.isinf(v) else v

    def sderiv(self, z):
        """Spherical derivative (chart independent)."""
        p, q, w, t = self._lift(z)
        out = np.abs(w) * (1.0 + np.abs(t) ** 2) / (np.abs(p) ** 2 + np.abs(q) ** 2)
        return float(out) if np.ndim(out) == 0 else out

    def log_sderiv(self, z):
        """``log`` of the spherical derivative; ``-inf`` exactly at critical points."""
        p, q, w, t = self._lift(z)
        with np.errstate(divide="ignore"):
            out = (np.log(np.abs(w)) + np.log1p(np.abs(t) ** 2)
                   - np.log(np.abs(p) ** 2 + np.abs(q) ** 2))
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, z: complex) -> complex:
        """Euclidean derivative ``f'(z)`` at a finite point with finite image."""
        z = complex(z)
        if cmath.isinf(z):
            raise DomainError("Euclidean derivative is undefined at infinity")
        Pd, Qd, dP, dQ = self._charts["std"]
        p, q = complex(horner(Pd, z)), complex(horner(Qd, z))
        if q == 0:
            raise DomainError("Euclidean derivative is undefined at a pole")
        return complex((horner(dP, z) * q - p * horner(dQ, z)) / (q * q))

    def iterate(self, z, n: int):
        for _ in range(n):
            z = self(z)
        return z

    def wronskian(self) -> Polynomial:
        """``P'Q - PQ'``; its roots are the finite critical points."""
        return self.P.deriv() * self.Q - self.P * self.Q.deriv()

    @cached_property
    def critical_set(self) -> "CriticalSet":
        return critical_points(self)

    def to_json(self) -> dict:
        return {
            "numerator": [[c.real, c.imag] for c in self.P.coeffs],
            "denominator": [[c.real, c.imag] for c in self.Q.coeffs],
        }

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<RationalMap{label} degree={self.degree} P={list(self.P.coeffs)} Q={list(self.Q.coeffs)}>"


@dataclass(frozen=True)
class CriticalPoint:
    point: complex
    mu: int
    in_julia: bool = True
    reason: str = "unclassified"

    def to_json(self) -> dict:
        from .sphere import point_to_json

        return {"point": point_to_json(self.point), "mu": self.mu,
                "in_julia": self.in_julia, "reason": self.reason}


@dataclass(frozen=True)
class CriticalSet:
    """Critical points with local degrees and Julia membership flags."""

    entries: tuple[CriticalPoint, ...]
    degree: int
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def points(self) -> list[complex]:
        return [e.point for e in self.entries]

    @property
    def crit_prime(self) -> list[CriticalPoint]:
        """Critical points in the Julia set."""
        return [e for e in self.entries if e.in_julia]

    @property
    def mu_max(self) -> int | None:
        cp = self.crit_prime
        return max(e.mu for e in cp) if cp else None

    def riemann_hurwitz_ok(self) -> bool:
        return sum(e.mu - 1 for e in self.entries) == 2 * self.degree - 2

    def find(self, z, tol: float = 1e-8) -> CriticalPoint:
        z = as_point(z)
        for e in self.entries:
            if chordal_dist(e.point, z) < tol:
                return e
        raise DomainError(f"{z} is not a critical point")

    def to_json(self) -> dict:
        return {"entries": [e.to_json() for e in self.entries], "mu_max": self.mu_max,
                "warnings": list(self.warnings)}


def critical_points(f: RationalMap) -> CriticalSet:
    """Critical points with local degree ``mu = (order of vanishing of f') + 1``.

    Finite ones are roots of the Wronskian; the order at infinity is the
    degree deficit ``2d - 2 - deg W``.  Julia flags start unclassified (True).
    """
    d = f.degree
    W = f.wronskian()
    entries = []
    if W.degree >= 1:
        entries = [CriticalPoint(r, m + 1) for r, m in poly_roots(W)]
    deficit = 2 * d - 2 - max(W.degree, 0)
    if deficit > 0:
        entries.append(CriticalPoint(INF, deficit + 1))
    return CriticalSet(tuple(entries), d)


@dataclass(frozen=True)
class CycleInfo:
    period: int
    points: tuple
    multiplier_abs: float
    multiplier: complex | None


def find_cycle(f: RationalMap, orbit: Sequence[complex], max_period: int = 64,
               tol: float = 1e-7) -> CycleInfo | None:
    """Detect a cycle that the tail of ``orbit`` sits on (or converges to).

    The modulus of the multiplier is the product of spherical derivatives
    around the cycle (the chart factors telescope).
    """
    H = len(orbit) - 1
    for p in range(1, min(max_period, H // 2) + 1):
        if (chordal_dist(orbit[H], orbit[H - p]) < tol
                and chordal_dist(orbit[H - 1], orbit[H - 1 - p]) < tol):
            pts = tuple(orbit[H - p + 1: H + 1])
            logs = [f.log_sderiv(z) for z in pts]
            mult_abs = math.exp(sum(logs)) if all(math.isfinite(x) for x in logs) else 0.0
            mult = None
            if all(not cmath.isinf(z) and not cmath.isinf(f(z)) for z in pts):
                mult = complex(np.prod([f.deriv(z) for z in pts]))
            return CycleInfo(p, pts, mult_abs, mult)
    return None


def julia_classify(f: RationalMap, cs: CriticalSet | None = None, horizon: int = 1000,
                   overrides: Sequence[tuple[complex, bool]] = ()) -> CriticalSet:
    """Heuristic decision of which critical points lie in the Julia set.

    A critical point is placed in the Fatou set when its orbit converges to a
    cycle with multiplier modulus below ``1 - 1e-9`` within ``horizon``
    steps (escape to a superattracting infinity is the polynomial case of
    this).  Orbits with no detectable cycle default to the Julia set with a
    warning.  ``overrides`` (point, flag) pairs always win.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    cs = cs or critical_points(f)
    entries = []
    warnings = list(cs.warnings)
    for e in cs.entries:
        over = [flag for z, flag in overrides if chordal_dist(as_point(z), e.point) < 1e-8]
        if over:
            entries.append(replace(e, in_julia=bool(over[0]), reason="override"))
            continue
        orbit = [e.point]
        z = e.point
        for _ in range(horizon):
            z = f(z)
            orbit.append(z)
        cyc = find_cycle(f, orbit)
        if cyc is None:
            warnings.append(f"critical point {e.point}: no cycle detected within {horizon} steps; "
                            "assumed in the Julia set")
            entries.append(replace(e, in_julia=True, reason="undecided"))
            continue
        m = cyc.multiplier_abs
        if abs(m - 1.0) < 1e-6:
            warnings.append(f"critical point {e.point}: indifferent cycle suspected "
                            f"(|multiplier| = {m:.9g}); parabolic points are not excluded")
        if m < 1 - 1e-9:
            kind = "superattracting" if m < 1e-12 else "attracting"
            entries.append(replace(e, in_julia=False,
                                   reason=f"{kind} cycle of period {cyc.period}, |multiplier|={m:.6g}"))
        else:
            entries.append(replace(e, in_julia=True,
                                   reason=f"lands on cycle of period {cyc.period}, |multiplier|={m:.6g}"))
    for w in warnings[len(cs.warnings):]:
        log.warning(w)
    return CriticalSet(tuple(entries), cs.degree, tuple(warnings))


def _preimage_coeffs(f: RationalMap, z: complex) -> np.ndarray:
    """Ascending coefficients of the degree-d polynomial whose roots are f^{-1}(z)."""
    Pd, Qd, _, _ = f._charts["std"]
    if cmath.isinf(z):
        return Qd.copy()
    if abs(z) <= 1:
        return Pd - z * Qd
    return Pd / z - Qd


def preimages(f: RationalMap, z) -> list[tuple[complex, int]]:
    """All solutions of ``f(w) = z`` with multiplicities (total ``d``).

    A drop of the polynomial degree below ``d`` means the missing roots
    are at infinity.
    """
    z = as_point(z)
    c = _preimage_coeffs(f, z)
    d = f.degree
    scale = np.max(np.abs(c))
    c = np.where(np.abs(c) <= DROP_TOL * scale, 0, c)
    m = d
    while m > 0 and c[m] == 0:
        m -= 1
    out = poly_roots(c[: m + 1]) if m >= 1 else []
    if m < d:
        out.append((INF, d - m))
    return out


def preimages_batch(f: RationalMap, targets) -> np.ndarray:
    """Preimages of many points at once, shape (M, d), multiplicities repeated.

    Each row is sorted like :func:`preimages` (real part, then imaginary part,
    infinity last) so tree enumeration is deterministic.
    """
    t = np.atleast_1d(np.asarray(targets, dtype=complex))
    M, d = t.size, f.degree
    Pd, Qd, _, _ = f._charts["std"]
    inf = np.isinf(t)
    big = (np.abs(t) > 1) & ~inf
    coeffs = np.empty((M, d + 1), complex)
    small = ~(inf | big)
    coeffs[small] = Pd[None, :] - t[small, None] * Qd[None, :]
    coeffs[big] = Pd[None, :] / t[big, None] - Qd[None, :]
    coeffs[inf] = Qd[None, :]
    scale = np.max(np.abs(coeffs), axis=1)
    irregular = (np.abs(coeffs[:, -1]) <= DROP_TOL * scale) | (coeffs[:, 0] == 0)
    out = np.empty((M, d), complex)
    reg = np.flatnonzero(~irregular)
    if reg.size:
        c = coeffs[reg] / scale[reg, None]
        z, ok = aberth_batch(c)
        if not ok.all():
            # fall back to the scalar path with its clustering for stubborn rows
            for k in np.flatnonzero(~ok):
                irregular[reg[k]] = True
        z = _polish_batch(c, z)
        out[reg] = z
    for i in np.flatnonzero(irregular):
        ws = [w for w, m in preimages(f, t[i]) for _ in range(m)]
        out[i] = ws
    return _sort_rows(out)


def _polish_batch(c: np.ndarray, z: np.ndarray, steps: int = 2) -> np.ndarray:
    n = c.shape[1] - 1
    dc = c[:, 1:] * np.arange(1, n + 1)
    for _ in range(steps):
        p = np.zeros_like(z)
        dp = np.zeros_like(z)
        for k in range(n, -1, -1):
            p = p * z + c[:, k, None]
        for k in range(n - 1, -1, -1):
            dp = dp * z + dc[:, k, None]
        with np.errstate(all="ignore"):
            zn = z - p / dp
        pn = np.zeros_like(z)
        for k in range(n, -1, -1):
            pn = pn * zn + c[:, k, None]
        better = np.isfinite(zn) & (np.abs(pn) < np.abs(p))
        z = np.where(better, zn, z)
    return z


def _sort_rows(w: np.ndarray) -> np.ndarray:
    inf = np.isinf(w)
    re = np.where(inf, np.inf, np.round(w.real, 12))
    im = np.where(inf, np.inf, np.round(w.imag, 12))
    order = np.lexsort((im, re), axis=-1)
    return np.take_along_axis(w, order, axis=-1)


def sort_points(ws: Sequence[complex]) -> list[complex]:
    return sorted(ws, key=lambda z: (1, 0, 0, 0, 0) if cmath.isinf(z) else (0,) + sort_key(z))
