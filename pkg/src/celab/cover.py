"""Component geometry under backward iteration.

ExpShrink estimation, the TCE counting test, the CE2CE/Koebe diagnostic and
the integer constants used to pass from ExpShrink to TCE.  Curve lifting
itself lives in :mod:`celab.lift` and is re-exported here.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, LiftingError, RootFindingError
from .lift import (LiftedCurve, curve_diameter, lift_circle, lift_tower,  # noqa: F401
                   point_in_component, polyline_distance)
from .orbit import _member, _require_crit_prime, ce_exponent, ensure_classified, forward_orbit
from .ratmap import CriticalSet, RationalMap, find_cycle, preimages
from .roots import Polynomial, poly_roots
from .sphere import INF, ChordalDisk, as_point, chordal_dist, is_inf, point_to_json
from .backward import Scale

log = logging.getLogger(__name__)

UNRELIABLE_FRACTION = 0.2


# -- Julia-set sampling -------------------------------------------------------

def fixed_points(f: RationalMap) -> list[complex]:
    """Fixed points of f (roots of P - zQ, plus infinity when it is fixed)."""
    P, Q = f.P, f.Q
    g = P - Polynomial([0, 1]) * Q
    pts = [r for r, _ in poly_roots(g)] if g.degree >= 1 else []
    if is_inf(f(INF)):
        pts.append(INF)
    return pts


def repelling_fixed_points(f: RationalMap) -> list[complex]:
    return [p for p in fixed_points(f) if f.sderiv(p) > 1 + 1e-9]


def _expand(f, z):
    out = []
    for w, m in preimages(f, z):
        out.extend([w] * m)
    return out


def julia_sample(f: RationalMap, count: int, rng: np.random.Generator | None = None,
                 start=None) -> list[complex]:
    """Approximate sample of J(f) by random inverse iteration.

    Starts from ``start`` or the first repelling fixed point, which lies in
    J(f); J is backward invariant, so every sampled point is in J up to
    rounding.  The sample is an approximation of J, not a certificate.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if start is None:
        rep = repelling_fixed_points(f)
        if not rep:
            raise DomainError("no repelling fixed point found to seed inverse iteration")
        start = rep[0]
    z = as_point(start)
    out = [z]
    while len(out) < count:
        pre = _expand(f, z)
        z = pre[int(rng.integers(len(pre)))]
        out.append(z)
    return out


def near_julia(f: RationalMap, z, sample=None, tol: float = 1e-6, horizon: int = 2000) -> bool:
    """Heuristic membership of z in J(f).

    True if z is within ``tol`` of the inverse-iteration sample; otherwise
    the forward orbit is checked for convergence to an attracting cycle.
    """
    z = as_point(z)
    if sample is None:
        sample = julia_sample(f, 4096)
    if float(np.min(chordal_dist(z, np.asarray(sample)))) < tol:
        return True
    orb = forward_orbit(f, z, horizon).points
    cyc = find_cycle(f, orb)
    return not (cyc is not None and cyc.multiplier_abs < 1 - 1e-9)


# -- ExpShrink ----------------------------------------------------------------

@dataclass
class ExpShrinkEstimate:
    lambda_exp: float
    r_exp: float
    per_n_max_diam: list  # index n = 0..N
    attempts: int = 0
    failures: int = 0
    unreliable: bool = False
    base_points: list = field(default_factory=list)
    note: str = "base points sampled from an approximation of J(f)"

    @property
    def ratios(self) -> list:
        d = self.per_n_max_diam
        return [d[i - 1] / d[i] if d[i] > 0 else math.inf for i in range(1, len(d))]

    def to_json(self) -> dict:
        return {
            "lambda_exp": self.lambda_exp,
            "log_lambda_exp": math.log(self.lambda_exp) if self.lambda_exp > 0 else None,
            "r_exp": self.r_exp,
            "per_n_max_diam": list(self.per_n_max_diam),
            "attempts": self.attempts,
            "failures": self.failures,
            "unreliable": self.unreliable,
            "base_points": [point_to_json(z) for z in self.base_points],
            "note": self.note,
        }


def _random_chain(f, x, N, rng):
    chain = [x]
    for _ in range(N):
        pre = _expand(f, chain[-1])
        chain.append(pre[int(rng.integers(len(pre)))])
    return chain


def _fixed_chain(f, x, N):
    """Backward chain choosing at each step the preimage nearest the previous point."""
    chain = [x]
    for _ in range(N):
        pre = _expand(f, chain[-1])
        chain.append(min(pre, key=lambda w: chordal_dist(w, chain[-1])))
    return chain


def fit_shrink_rate(diams, N: int) -> float:
    """exp of the regression slope of ``-log diam`` against n over ``[N/2, N]``."""
    n = np.arange(len(diams))
    lo = max(1, math.ceil(N / 2))
    sel = n[lo:N + 1]
    y = -np.log(np.asarray(diams, float)[lo:N + 1])
    if len(sel) < 2:
        sel = n[max(0, N - 1):N + 1]
        y = -np.log(np.asarray(diams, float)[max(0, N - 1):N + 1])
    return float(math.exp(np.polyfit(sel, y, 1)[0]))


def expshrink_estimate(f: RationalMap, r: float, N: int, base_samples: int = 4,
                       branch_samples: int = 4, anchor=None, branch: str = "random",
                       seed: int = 0, samples: int = 64, threads: int = 1) -> ExpShrinkEstimate:
    """Estimate ``lambda_Exp`` from the largest component diameter at each depth.

    Base points are ``anchor`` if given, otherwise an inverse-iteration
    sample of J(f).  ``branch="random"`` picks a uniformly random preimage at
    each level; ``branch="fixed"`` follows the preimage nearest the previous
    point (for a fixed-point anchor it stays at the anchor).
    """
    if N < 2:
        raise DomainError("depth N must be >= 2")
    if not 0 < r < 2:
        raise DomainError("need 0 < r < 2")
    if branch not in ("random", "fixed"):
        raise DomainError(f"unknown branch mode {branch!r}")
    ss = np.random.SeedSequence(seed)
    if anchor is not None:
        bases = [as_point(anchor)] * base_samples if branch == "random" else [as_point(anchor)]
    else:
        js = julia_sample(f, 64 * base_samples + 1, np.random.default_rng(ss.spawn(1)[0]))
        bases = js[1::64][:base_samples]
    per_base = branch_samples if branch == "random" else 1
    jobs = [(i, j) for i in range(len(bases)) for j in range(per_base)]
    seeds = ss.spawn(len(jobs) + 1)[1:]

    def run(idx):
        i, _ = jobs[idx]
        x = bases[i]
        if branch == "fixed":
            chain = _fixed_chain(f, x, N)
        else:
            chain = _random_chain(f, x, N, np.random.default_rng(seeds[idx]))
        try:
            tl = lift_tower(f, ChordalDisk(x, r), chain, samples)
        except (LiftingError, RootFindingError) as e:
            log.warning("lift failed at base %s: %s", x, e)
            return None
        return [curve_diameter(c) for c in tl.curves]

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run, range(len(jobs))))
    else:
        results = [run(k) for k in range(len(jobs))]
    ok = [res for res in results if res is not None]
    failures = len(results) - len(ok)
    if not ok:
        raise LiftingError("every lift failed", level=N, diagnostics={"attempts": len(results)})
    diam = np.max(np.array(ok), axis=0)
    lam = fit_shrink_rate(diam, N)
    return ExpShrinkEstimate(lam, r, [float(x) for x in diam], len(results), failures,
                             failures > UNRELIABLE_FRACTION * len(results), list(bases))


# -- TCE ----------------------------------------------------------------------

@dataclass(frozen=True)
class TCEParams:
    M: int
    P: int
    r: float

    def __post_init__(self):
        if self.M < 0:
            raise DomainError("M must be >= 0")
        if self.P < 1:
            raise DomainError("P must be >= 1")
        if not 0 < self.r < 2:
            raise DomainError("need 0 < r < 2")


@dataclass
class TCEResult:
    passed: bool
    counts: dict  # candidate n -> number of critical components (None if skipped)
    chosen: list
    required: int
    params: TCEParams
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "M": self.params.M, "P": self.params.P, "r": self.params.r,
            "required": self.required,
            "chosen": list(self.chosen),
            "counts": {str(k): v for k, v in self.counts.items()},
            "warnings": list(self.warnings),
        }


def critical_component_count(f: RationalMap, orbit: list, n: int, r: float, samples: int = 64) -> int:
    """``#{k < n : Comp_{f^k(z)} f^{-(n-k)}(B(f^n(z), r)) meets Crit}``."""
    chain = orbit[: n + 1][::-1]
    tl = lift_tower(f, ChordalDisk(orbit[n], r), chain, samples)
    crit = f.critical_set.points
    count = 0
    for level in range(1, n + 1):
        curve = tl.curves[level]
        if any(_inside(curve, c) for c in crit):
            count += 1
    return count


def _inside(curve, c) -> bool:
    if polyline_distance(curve.vertices, c) <= 1e-9:
        return True  # a critical point on the boundary is in the closed component
    return point_in_component(curve, c)


def tce_check(f: RationalMap, z, params: TCEParams, N: int, samples: int = 64,
              check_julia: bool = True) -> TCEResult:
    """Greedy first-fit search for times ``n_1 < n_2 < ...`` with ``n_j <= P j``
    at which at most M pulled-back components along the orbit of z meet Crit."""
    if N < params.P:
        raise DomainError("horizon N must be >= P")
    z = as_point(z)
    if check_julia and not near_julia(f, z):
        raise DomainError(f"{z} does not appear to lie in the Julia set")
    orbit = forward_orbit(f, z, N).points
    counts: dict = {}
    chosen: list = []
    warnings: list = []
    for n in range(1, N + 1):
        try:
            cnt = critical_component_count(f, orbit, n, params.r, samples)
        except (LiftingError, RootFindingError) as e:
            counts[n] = None
            warnings.append(f"n={n}: lifting failed ({e}); candidate skipped")
            continue
        counts[n] = cnt
        if cnt <= params.M and n <= params.P * (len(chosen) + 1):
            chosen.append(n)
    required = N // params.P
    return TCEResult(len(chosen) >= required, counts, chosen, required, params, warnings)


# -- CE2CE and Koebe ----------------------------------------------------------

@dataclass
class CE2CERecord:
    critical_point: complex
    m: int | None
    c_prime: complex | None
    r: float | None
    r_half_below_R: bool | None
    whole_sphere: bool = False
    diam_U_m: float | None = None
    deriv_m1: float | None = None
    koebe_lower: float | None = None  # r |(f^{m-1})'(f(c))|^{-1}
    C_K: float | None = None
    lam: float | None = None
    mu_gap: int = 0
    lhs: list = field(default_factory=list)
    rhs_template: list = field(default_factory=list)
    const: float | None = None
    vacuous: bool = False
    note: str = ""

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["critical_point"] = point_to_json(self.critical_point)
        d["c_prime"] = point_to_json(self.c_prime) if self.c_prime is not None else None
        return d


def ce2ce_check(f: RationalMap, c, n: int, scale: Scale | float, cs: CriticalSet | None = None,
                samples: int = 64) -> CE2CERecord:
    """``|(f^k)'(f(c))| >= const lam^k diam(U_m)^(mu_max - mu(c))`` and the Koebe
    lower bound ``diam(U_m) >= r |(f^{m-1})'(f(c))|^{-1} / C_K``.

    m is the first time the orbit of c enters ``B(c', R)``, ``r`` is twice that
    distance and ``U_m`` is the component of ``f^{-(m-1)}(B(f^m(c), r))``
    containing ``f(c)``.  ``scale`` may be a bare return radius R, which is
    then not required to be below 1.
    """
    R = scale.R if isinstance(scale, Scale) else float(scale)
    if R <= 0:
        raise DomainError("R must be positive")
    cs = ensure_classified(f, cs)
    _require_crit_prime(cs)
    e = _member(cs, c)
    targets = [t.point for t in cs.crit_prime]
    orb = forward_orbit(f, e.point, n)
    m = cp = None
    for k in range(1, n + 1):
        dists = [chordal_dist(orb.points[k], t) for t in targets]
        i = int(np.argmin(dists))
        if dists[i] < R:
            m, cp = k, targets[i]
            break
    if m is None:
        return CE2CERecord(e.point, None, None, None, None, vacuous=True,
                           note=f"no close return to B(Crit', R) within n = {n}; check is vacuous")
    dist = chordal_dist(orb.points[m], cp)
    r = 2 * dist
    whole = r >= 2
    after = forward_orbit(f, orb.points[1], max(m - 1, 1))
    deriv = math.exp(after.log_deriv_prefix[m - 1]) if m > 1 else 1.0
    if whole:
        diam = 2.0
        note = "r >= 2: the disk is the whole sphere, diameter taken as 2"
    else:
        chain = orb.points[1: m + 1][::-1]
        tl = lift_tower(f, ChordalDisk(orb.points[m], r), chain, samples)
        diam = curve_diameter(tl.curves[m - 1])
        note = ""
    koebe = r / deriv
    C_K = koebe / diam if diam > 0 else math.inf
    ce = ce_exponent(f, e.point, n, cs)
    lam = ce.lambda1
    gap = cs.mu_max - e.mu
    prefix = forward_orbit(f, orb.points[1], n).log_deriv_prefix
    lhs = [math.exp(x) for x in prefix[1:]]
    rhs = [lam**k * diam**gap for k in range(1, len(lhs) + 1)]
    const = min(a / b for a, b in zip(lhs, rhs)) if lhs else None
    return CE2CERecord(e.point, m, cp, r, dist < R, whole, diam, deriv, koebe, C_K,
                       lam, gap, lhs, rhs, const, False, note)


# -- constants ----------------------------------------------------------------

def _ipart(x: float) -> int:
    # integral part, robust to rounding just below an integer
    return int(math.floor(x + 1e-9))


def lemma_constants(epsilon: float, alpha: float, n: int, lambda_exp: float,
                    sup_deriv: float) -> tuple[int, int]:
    """``s = [-log eps / log lam + 2 alpha n / log lam] + 1`` and
    ``M = [log sup|f'| / log lam] + 1``."""
    if not 0 < epsilon <= 1:
        raise DomainError("epsilon must lie in (0, 1]")
    if lambda_exp <= 1:
        raise DomainError("lambda_exp must be > 1")
    if sup_deriv < 1:
        raise DomainError("sup_deriv must be >= 1")
    ll = math.log(lambda_exp)
    s = _ipart(-math.log(epsilon) / ll + 2 * alpha * n / ll) + 1
    M = _ipart(math.log(sup_deriv) / ll) + 1
    return s, M


def fibonacci_sphere(n: int) -> np.ndarray:
    """n nearly uniform points on the Riemann sphere (as complex numbers)."""
    i = np.arange(n) + 0.5
    zc = 1 - 2 * i / n  # height on the unit sphere
    phi = math.pi * (3 - math.sqrt(5)) * i
    rad = np.sqrt(np.maximum(0.0, 1 - zc * zc))
    with np.errstate(divide="ignore", invalid="ignore"):
        return rad * np.exp(1j * phi) / (1 - zc)


def sup_spherical_derivative(f: RationalMap, grid: int = 1_000_000, refine: int = 8) -> float:
    """``sup |f^#|`` over the sphere: grid maximization, then local refinement."""
    pts = fibonacci_sphere(grid)
    vals = np.exp(np.asarray(f.log_sderiv(pts)))
    best = float(np.max(vals))
    order = np.argsort(vals)[::-1][:refine]
    for idx in order:
        z0 = complex(pts[idx])
        inv = abs(z0) > 1
        u0 = 1 / z0 if inv else z0

        def neg(x, inv=inv):
            u = complex(x[0], x[1])
            z = (1 / u if u != 0 else INF) if inv else u
            return -f.sderiv(z)

        res = minimize(neg, [u0.real, u0.imag], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14})
        best = max(best, -float(res.fun))
    return best
