"""Forward orbits: CE exponents, slow-recurrence distances, first returns.

Derivative products are accumulated as sums of log spherical derivatives,
so they neither overflow nor underflow at long horizons.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SRViolation
from .ratmap import CriticalSet, RationalMap, julia_classify
from .sphere import as_point, chordal_dist

ALPHA_TOL = 1e-12


@dataclass
class OrbitSeries:
    points: list
    log_deriv_prefix: list
    critical_hit: int | None = None

    @property
    def N(self) -> int:
        return len(self.points) - 1


@dataclass
class CEEstimate:
    critical_point: complex
    lambda1: float
    C1: float
    per_n_exponents: list
    observed: bool
    regression_rate: float | None = None
    note: str = ""

    def to_json(self) -> dict:
        from .sphere import point_to_json

        return {
            "critical_point": point_to_json(self.critical_point),
            "lambda1": self.lambda1,
            "log_lambda1": math.log(self.lambda1) if self.lambda1 > 0 else None,
            "C1": self.C1,
            "observed": self.observed,
            "regression_rate": self.regression_rate,
            "per_n_exponents": list(self.per_n_exponents),
            "note": self.note,
        }


@dataclass
class SREstimate:
    alpha: float
    C: float
    distance_series: list
    witness_n: int
    frontier: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "C": self.C,
            "witness_n": self.witness_n,
            "min_distance": min(self.distance_series) if self.distance_series else None,
            "distance_series": list(self.distance_series),
            "frontier": [list(p) for p in self.frontier],
        }


def forward_orbit(f: RationalMap, z0, N: int) -> OrbitSeries:
    """``f^k(z0)`` for k = 0..N with prefix sums of log spherical derivatives.

    The prefix stops (and ``critical_hit`` records the index) at the first
    exact critical point on the orbit.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    z = as_point(z0)
    points = [z]
    prefix = [0.0]
    hit = None
    acc = 0.0
    for k in range(N):
        if hit is None:
            ld = f.log_sderiv(z)
            if math.isinf(ld) and ld < 0:
                hit = k
            else:
                acc += ld
                prefix.append(acc)
        z = f(z)
        points.append(z)
    return OrbitSeries(points, prefix, hit)


def ensure_classified(f: RationalMap, cs: CriticalSet | None) -> CriticalSet:
    if cs is None:
        return julia_classify(f)
    return cs


def _require_crit_prime(cs: CriticalSet):
    if not cs.crit_prime:
        raise DomainError("Crit'(f) is empty: no critical point in the Julia set (CE is vacuous)")


def _member(cs: CriticalSet, c):
    c = as_point(c)
    for e in cs.crit_prime:
        if chordal_dist(e.point, c) < 1e-8:
            return e
    raise DomainError(f"{c} is not a critical point in the Julia set")


def fit_exponent(log_values: np.ndarray, include_zero: bool = True) -> tuple[float, float, np.ndarray]:
    """Fit ``value_n >= C lam^n`` from ``log_values[n]``, n = 0..N (entry 0 may be 0).

    ``lam`` is exp of the minimum of ``log_values[n]/n`` over the tail window
    ``n in [N/2, N]``; ``C`` is the largest constant making the bound hold
    for every computed n (n >= 1 only if ``include_zero`` is false).
    Returns ``(lam, C, a_n)`` with ``a_n`` for n >= 1.
    """
    lv = np.asarray(log_values, dtype=float)
    N = len(lv) - 1
    n = np.arange(1, N + 1)
    a = lv[1:] / n
    lo = max(1, math.ceil(N / 2))
    log_lam = float(np.min(a[lo - 1:]))
    all_n = np.arange(0, N + 1)
    start = 0 if include_zero else 1
    log_C = float(np.min((lv - all_n * log_lam)[start:]))
    return math.exp(log_lam), math.exp(log_C), a


def ce_exponent(f: RationalMap, c, N: int, cs: CriticalSet | None = None) -> CEEstimate:
    """Growth rate of ``|(f^n)'(f(c))|`` along the orbit of a critical value."""
    cs = ensure_classified(f, cs)
    _require_crit_prime(cs)
    e = _member(cs, c)
    orb = forward_orbit(f, f(e.point), N)
    prefix = np.asarray(orb.log_deriv_prefix)
    note = ""
    if orb.critical_hit is not None:
        note = f"orbit of f(c) hits a critical point at step {orb.critical_hit}; derivative vanishes"
        if len(prefix) < 2:
            return CEEstimate(e.point, 0.0, 0.0, [], False, None, note)
    lam, C1, a = fit_exponent(prefix)
    n = np.arange(len(prefix))
    slope = float(np.polyfit(n[len(n) // 2:], prefix[len(n) // 2:], 1)[0]) if len(n) > 4 else None
    observed = lam > 1 and orb.critical_hit is None
    if not observed and not note:
        note = "CE not observed (fitted lambda1 <= 1)"
    return CEEstimate(e.point, lam, C1, [float(x) for x in a], observed,
                      math.exp(slope) if slope is not None else None, note)


def sr_distances(f: RationalMap, c, N: int, cs: CriticalSet | None = None) -> list[float]:
    """``d_n = dist(f^n(c), Crit'(f))`` for n = 1..N (0 on an exact critical hit)."""
    if N < 1:
        raise DomainError("N must be >= 1")
    cs = ensure_classified(f, cs)
    _require_crit_prime(cs)
    c = as_point(c)
    targets = np.array([e.point for e in cs.crit_prime])
    out = []
    z = c
    for _ in range(N):
        z = f(z)
        out.append(float(np.min(chordal_dist(z, targets))))
    return out


def sr_alpha_fit(d, C: float | None = None) -> SREstimate:
    """Smallest ``alpha >= 0`` with ``d_n >= C exp(-alpha n)`` for all n.

    ``C`` defaults to ``min d_n``, which gives ``alpha = 0`` whenever the
    distances are bounded below on the horizon.  Rates below ``ALPHA_TOL``
    (log-space rounding) are reported as 0.
    """
    d = np.asarray(d, dtype=float)
    if d.size == 0:
        raise DomainError("empty distance series")
    if np.any(d <= 0):
        k = int(np.argmax(d <= 0)) + 1
        raise SRViolation(f"critical orbit hits the critical set at n = {k}", witness=k)
    if C is None:
        C = float(d.min())
    if C <= 0:
        raise DomainError("C must be positive")
    n = np.arange(1, d.size + 1)
    rates = np.log(C / d) / n
    k = int(np.argmax(rates))
    alpha = float(rates[k]) if rates[k] > ALPHA_TOL else 0.0
    witness = k + 1 if alpha > 0 else int(np.argmin(d)) + 1
    return SREstimate(alpha, float(C), [float(x) for x in d], witness, sr_frontier(d))


def sr_frontier(d, points: int = 8) -> list[tuple[float, float]]:
    """Finite-horizon (C, alpha) trade-off: alpha needed for a few choices of C."""
    d = np.asarray(d, dtype=float)
    if d.size == 0 or np.any(d <= 0):
        return []
    n = np.arange(1, d.size + 1)
    lo = float(d.min())
    out = []
    for C in lo * np.exp(np.linspace(0.0, 2.0, points)):
        out.append((float(C), max(0.0, float(np.max(np.log(C / d) / n)))))
    return out


@dataclass
class FirstReturn:
    K: float | None
    returns: list  # (critical point, m or None, derivative)

    def to_json(self) -> dict:
        from .sphere import point_to_json

        return {
            "K": self.K,
            "returns": [
                {"critical_point": point_to_json(c), "m": m, "derivative": dv,
                 "status": "ok" if m is not None else "no return <= N"}
                for c, m, dv in self.returns
            ],
        }


def first_return_bound(f: RationalMap, R: float, N: int, cs: CriticalSet | None = None) -> FirstReturn:
    """``m(c, R)``: first time the orbit of c enters B(c'', R), c'' in Crit'; and
    ``K = max_c |(f^{m-1})'(f(c))|`` over the critical points that return."""
    if R <= 0 or N < 1:
        raise DomainError("need R > 0 and N >= 1")
    cs = ensure_classified(f, cs)
    _require_crit_prime(cs)
    targets = np.array([e.point for e in cs.crit_prime])
    returns = []
    K = None
    for e in cs.crit_prime:
        orb = forward_orbit(f, e.point, N)
        m = None
        for k in range(1, N + 1):
            if float(np.min(chordal_dist(orb.points[k], targets))) < R:
                m = k
                break
        if m is None:
            returns.append((e.point, None, None))
            continue
        # |(f^{m-1})'(f(c))| = prod of f# over f(c), ..., f^{m-1}(c)
        tail = forward_orbit(f, orb.points[1], max(m - 1, 1)) if m > 1 else None
        logd = tail.log_deriv_prefix[m - 1] if tail is not None else 0.0
        dv = math.exp(logd)
        returns.append((e.point, m, dv))
        K = dv if K is None else max(K, dv)
    return FirstReturn(K, returns)
