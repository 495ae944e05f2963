"""Backward orbits: preimage trees, CE2 estimation, shrinking neighbourhoods,
type-1 orbit detection and the CE => CE2 diagnostic."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceError, SRViolation
from .lift import LiftedCurve, curve_diameter, lift_tower, point_in_component, polyline_distance
from .orbit import _member, _require_crit_prime, ensure_classified, fit_exponent
from .ratmap import CriticalSet, RationalMap, preimages_batch
from .sphere import ChordalDisk, as_point, chordal_dist, point_to_json

BRANCH_CAP = 2_000_000


@dataclass(frozen=True)
class Scale:
    """The two radii ``R' << R << 1`` fixing the local analysis."""

    R: float = 0.1
    R_prime: float = 0.01

    def __post_init__(self):
        if not (0 < self.R_prime < self.R < 1):
            raise DomainError(f"need 0 < R' < R < 1, got R={self.R}, R'={self.R_prime}")


@dataclass(frozen=True)
class ShrinkingSchedule:
    deltas: np.ndarray
    Deltas: np.ndarray  # Deltas[k] = prod_{i<k} (1 - deltas[i]), k = 0..n

    @property
    def tail_bound(self) -> float:
        """Lower bound for the infinite product: computed part times (1 - remaining sum)."""
        n = len(self.deltas)
        return float(self.Deltas[-1] * (1 - 2.0 ** -(n + 1)))


def shrinking_schedule(n: int) -> ShrinkingSchedule:
    """``delta_k = 2^-(k+2)``; the infinite product is at least ``1 - sum delta_k = 1/2``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    deltas = 2.0 ** -(np.arange(n) + 2.0)
    Deltas = np.concatenate([[1.0], np.cumprod(1.0 - deltas)])
    return ShrinkingSchedule(deltas, Deltas)


@dataclass
class BranchLevel:
    k: int
    diam_U: float
    diam_U_prime: float
    critical_free: bool
    univalent: bool
    log_deriv: float
    curve_U: LiftedCurve = field(repr=False, default=None)
    curve_U_prime: LiftedCurve = field(repr=False, default=None)


@dataclass
class BackwardBranch:
    """Consecutive preimages ``points[k] = z_{-k}`` with ``f(z_{-k}) = z_{-k+1}``."""

    base: complex
    points: list
    log_prefix: list
    radius: float | None = None
    levels: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.points) - 1


class PreimageTree:
    """All ``d^n`` branches of consecutive preimages, stored level by level.

    ``nodes[k]`` holds the ``d^k`` points of level k; the parent of node i at
    level k is node ``i // d`` at level k - 1.  Indexing yields branches.
    """

    def __init__(self, f: RationalMap, base: complex, nodes: list, log_prefix: list):
        self.f = f
        self.base = base
        self.nodes = nodes
        self.log_prefix = log_prefix

    @property
    def depth(self) -> int:
        return len(self.nodes) - 1

    def __len__(self):
        return len(self.nodes[-1])

    def __getitem__(self, i: int) -> BackwardBranch:
        if not -len(self) <= i < len(self):
            raise IndexError(i)
        i %= len(self)
        d = self.f.degree
        idx = []
        for _ in range(self.depth + 1):
            idx.append(i)
            i //= d
        idx.reverse()
        pts = [complex(self.nodes[k][idx[k]]) for k in range(self.depth + 1)]
        lp = [float(self.log_prefix[k][idx[k]]) for k in range(self.depth + 1)]
        return BackwardBranch(self.base, pts, lp)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def _batch(f, pts, threads):
    if threads and threads > 1 and len(pts) >= 4096:
        chunks = np.array_split(pts, threads)
        with ThreadPoolExecutor(threads) as ex:
            return np.concatenate(list(ex.map(lambda c: preimages_batch(f, c), chunks)))
    return preimages_batch(f, pts)


def preimage_tree(f: RationalMap, c, n: int, cap: int = BRANCH_CAP, threads: int = 0) -> PreimageTree:
    """Enumerate every backward branch of length n from ``c`` (with multiplicity).

    Children are in the root-finder's sort order, so the enumeration is the
    same for any ``threads``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    d = f.degree
    if d**n > cap:
        nmax = int(math.floor(math.log(cap) / math.log(d) + 1e-12))
        raise ResourceError(f"{d}^{n} branches exceed the cap {cap}; largest feasible n is {nmax}",
                            max_feasible=nmax)
    c = as_point(c)
    nodes = [np.array([c])]
    logs = [np.zeros(1)]
    for _ in range(n):
        kids = _batch(f, nodes[-1], threads).ravel()
        nodes.append(kids)
        logs.append(np.repeat(logs[-1], d) + np.asarray(f.log_sderiv(kids)))
    return PreimageTree(f, c, nodes, logs)


@dataclass
class CE2Estimate:
    critical_point: complex
    lambda2: float
    C2: float
    per_n_min: list
    observed: bool
    note: str = ""

    def to_json(self) -> dict:
        return {
            "critical_point": point_to_json(self.critical_point),
            "lambda2": self.lambda2,
            "log_lambda2": math.log(self.lambda2) if self.lambda2 > 0 else None,
            "C2": self.C2,
            "observed": self.observed,
            "per_n_min": list(self.per_n_min),
            "note": self.note,
        }


def check_not_in_other_orbits(f: RationalMap, cs: CriticalSet, c, horizon: int = 200, tol: float = 1e-12):
    """Raise :class:`SRViolation` if another critical point's orbit hits ``c``."""
    c = as_point(c)
    for e in cs.entries:
        if chordal_dist(e.point, c) < 1e-8:
            continue
        z = e.point
        for k in range(1, horizon + 1):
            z = f(z)
            if chordal_dist(z, c) < tol:
                raise SRViolation(f"critical point {c} is f^{k} of the critical point {e.point}",
                                  witness=(e.point, k))


def ce2_min_derivative(f: RationalMap, c, n: int, cs: CriticalSet | None = None,
                       threads: int = 0, tree: PreimageTree | None = None) -> CE2Estimate:
    """``min |(f^k)'(w)|`` over all ``w in f^{-k}(c)``, k = 1..n, and the fitted rate."""
    cs = ensure_classified(f, cs)
    _require_crit_prime(cs)
    e = _member(cs, c)
    check_not_in_other_orbits(f, cs, e.point)
    tree = tree or preimage_tree(f, e.point, n, threads=threads)
    mins = [0.0]
    for k in range(1, n + 1):
        lp = tree.log_prefix[k]
        if np.isneginf(lp).any():
            i = int(np.argmax(np.isneginf(lp)))
            branch = tree[i * f.degree ** (n - k)]
            raise SRViolation(f"a level-{k} preimage of {e.point} is a critical point",
                              witness=branch.points[: k + 1])
        mins.append(float(lp.min()))
    lam, C2, _ = fit_exponent(np.array(mins), include_zero=False)
    return CE2Estimate(e.point, lam, C2, [math.exp(x) for x in mins[1:]], lam > 1,
                       "" if lam > 1 else "CE2 not observed (fitted lambda2 <= 1)")


def branch_pullback(f: RationalMap, branch: BackwardBranch, r: float,
                    schedule: ShrinkingSchedule | None = None, samples: int = 64,
                    keep_curves: bool = True) -> BackwardBranch:
    """Fill the shrinking neighbourhoods ``U_k``, ``U_k'`` along ``branch``.

    ``U_k`` is the component of ``f^{-k}(B(z, r Delta_k))`` containing
    ``z_{-k}`` and ``U_k'`` uses ``r Delta_{k+1}``.
    """
    if not 0 < r < 2:
        raise DomainError("need 0 < r < 2")
    n = branch.n
    if n < 1:
        raise DomainError("branch must have length >= 1")
    schedule = schedule or shrinking_schedule(n + 1)
    if len(schedule.Deltas) < n + 2:
        raise DomainError("schedule shorter than the branch")
    crit = f.critical_set.points
    levels = []
    univalent = True
    for k in range(1, n + 1):
        chain = branch.points[: k + 1]
        U = lift_tower(f, ChordalDisk(branch.base, r * schedule.Deltas[k]), chain, samples).curves[k]
        Up = lift_tower(f, ChordalDisk(branch.base, r * schedule.Deltas[k + 1]), chain, samples).curves[k]
        free = not any(point_in_component(U, c) for c in crit if polyline_distance(U.vertices, c) > 1e-9)
        univalent = univalent and free
        levels.append(BranchLevel(k, curve_diameter(U), curve_diameter(Up), free, univalent,
                                  branch.log_prefix[k] if branch.log_prefix else float("nan"),
                                  U if keep_curves else None, Up if keep_curves else None))
    return BackwardBranch(branch.base, branch.points, branch.log_prefix, r, levels)


@dataclass
class Type1Result:
    is_type1: bool
    c_prime: complex | None
    c_double_prime: complex | None
    conditions: tuple  # (avoid critical points, c'' on boundary, critical value close)


def type1_detect(f: RationalMap, branch: BackwardBranch, scale: Scale, tol: float | None = None) -> Type1Result:
    """Is the filled ``branch`` of the first type with respect to some c', c''?

    (1) no ``U_k`` (1 <= k <= n) contains a critical point, (2) a critical
    point lies within ``tol`` of the boundary of ``U_n``, (3) some critical
    value is within R of ``f(z)``.  ``tol`` defaults to ``1e-3 diam U_n``.
    """
    if branch.radius is None or not branch.levels:
        raise DomainError("branch has no shrinking-neighbourhood data; run branch_pullback first")
    if branch.radius >= 2 * scale.R_prime:
        raise DomainError(f"radius {branch.radius} must be < 2 R' = {2 * scale.R_prime}")
    last = branch.levels[-1]
    if last.curve_U is None:
        raise DomainError("boundary curve of U_n was not kept")
    if tol is None:
        tol = 1e-3 * last.diam_U
    crit = f.critical_set.points
    avoid = all(lv.critical_free for lv in branch.levels)
    c2 = None
    for c in crit:
        if polyline_distance(last.curve_U.vertices, c) < tol:
            c2 = c
            break
    fz = f(branch.base)
    c1 = None
    for c in crit:
        if chordal_dist(f(c), fz) < scale.R:
            c1 = c
            break
    ok = avoid and c2 is not None and c1 is not None
    return Type1Result(ok, c1, c2, (avoid, c2 is not None, c1 is not None))


def cece2_template(lam: float, n: int, C: float, alpha: float, mu_max: int, mu_c: int) -> float:
    """Right-hand side ``lam^n (C e^{-alpha n})^(mu_max - mu_c)`` without its constant."""
    return lam**n * (C * math.exp(-alpha * n)) ** (mu_max - mu_c)


@dataclass
class CECE2Record:
    critical_point: complex
    mu_c: int
    mu_max: int
    lam: float
    lhs: list
    rhs_template: list
    const: float
    const_by_n: list
    implied_lambda2: float
    implied_C2: float
    r1_factor: float
    r1_admissible: bool

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["critical_point"] = point_to_json(self.critical_point)
        return d


def cece2_check(f: RationalMap, c, n: int, r1: float, alpha: float, C: float,
                cs: CriticalSet | None = None, ce2: CE2Estimate | None = None) -> CECE2Record:
    """Evaluate ``|(f^k)'(c_{-k})|^mu_max >= const lam^k (C e^{-alpha k})^(mu_max - mu(c))``.

    ``lam`` is the CE2 rate raised to ``mu_max`` (the left side is a
    ``mu_max``-th power).  ``const`` is the largest constant for which the
    inequality holds for all k <= n; ``const_by_n[m]`` is the same over k <= m.
    The implied CE2 rate is ``(lam e^{-alpha (mu_max - mu(c))})^(1/mu_max)``.
    """
    cs = ensure_classified(f, cs)
    _require_crit_prime(cs)
    e = _member(cs, c)
    mu_max = cs.mu_max
    ce2 = ce2 or ce2_min_derivative(f, e.point, n, cs)
    dmu = mu_max - e.mu
    lam = ce2.lambda2**mu_max
    lhs = [m**mu_max for m in ce2.per_n_min[:n]]
    rhs = [cece2_template(lam, k, C, alpha, mu_max, e.mu) for k in range(1, n + 1)]
    ratios = [math.log(a) - math.log(b) for a, b in zip(lhs, rhs)]
    running = np.minimum.accumulate(ratios)
    const = float(math.exp(running[-1]))
    implied_lam2 = (lam * math.exp(-alpha * dmu)) ** (1.0 / mu_max)
    implied_C2 = (const * C**dmu) ** (1.0 / mu_max)
    return CECE2Record(e.point, e.mu, mu_max, lam, lhs, rhs, const,
                       [float(math.exp(x)) for x in running], implied_lam2, implied_C2,
                       r1**dmu, r1 >= C * math.exp(-alpha * n))
