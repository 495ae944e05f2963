"""Inverse-branch continuation of circles: boundaries of pullback components.

Given a chordal disk ``B`` and a backward chain ``y_0 in B, y_1, ..., y_n``
with ``f(y_j) = y_{j-1}``, the boundary of ``Comp_{y_j} f^{-j}(B)`` is traced
for every level j at once.  The state is a *tower* of points, one per
level; moving the level-0 point along a path, each level is continued by
choosing, among all preimages of the new point one level down, the one
nearest its previous position.  The step is halved whenever the nearest
and second-nearest candidates are within a factor 3 of each other, which is
what happens close to critical values.

The tower first follows the chart segment from ``y_0`` to the boundary,
then runs around the boundary circle until every level closes.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (BoundaryAmbiguityError, DegenerateBoundaryError, DomainError,
                     LiftingError, RootFindingError)
from .ratmap import RationalMap, preimages
from .roots import aberth_warm
from .sphere import (INF, ChordalDisk, as_point, chart_radius, chordal_dist, invert,
                     rotation, to_unit_sphere)

CLOSURE_TOL = 1e-8
AMBIGUITY_RATIO = 1.0 / 3.0
MIN_STEP = 2 * math.pi / 2**20
EXACT_DIAMETER_MAX = 4096
# directions (relative to the radial one) for the approach from chain[0] to the circle
_APPROACH_ANGLES = (0.0, 0.7, -0.7, 1.3, -1.3, 2.1)


@dataclass
class LiftedCurve:
    """Closed polyline on the sphere bounding one pullback component.

    ``vertices`` are listed once around the curve (the closing vertex is not
    repeated); ``params`` holds the base-circle angle of each vertex.
    """

    vertices: np.ndarray
    level: int
    base: ChordalDisk
    w: complex
    loops: int
    params: np.ndarray = field(repr=False, default=None)
    closure_error: float = 0.0

    def __len__(self):
        return len(self.vertices)


@dataclass
class TowerLift:
    """All levels of one continuation run; ``curves[j]`` is the level-j boundary."""

    base: ChordalDisk
    chain: list
    curves: list
    steps: int
    halvings: int


def _solve_coeffs(f: RationalMap, t: complex) -> np.ndarray:
    Pd, Qd, _, _ = f._charts["std"]
    if cmath.isinf(t):
        return Qd
    if abs(t) <= 1:
        return Pd - t * Qd
    return Pd / t - Qd


def _all_preimages(f: RationalMap, t: complex, warm: list[complex] | None) -> list[complex]:
    """All d preimages of ``t`` (with repetition), warm-started when possible."""
    c = _solve_coeffs(f, t)
    d = f.degree
    if warm is not None:
        # solve in the chart where the warm roots are moderate
        use_inv = any(cmath.isinf(w) or abs(w) > 1e3 for w in warm)
        cc = c[::-1] if use_inv else c
        scale = max(abs(x) for x in cc)
        lead_ok = abs(cc[-1]) > 1e-10 * scale
        if lead_ok:
            z0 = [invert(w) if use_inv else w for w in warm]
            if not any(cmath.isinf(z) for z in z0):
                try:
                    r = aberth_warm(list(cc / scale), z0)
                    return [invert(x) if use_inv else x for x in r]
                except RootFindingError:
                    pass
    return [w for w, m in preimages(f, t) for _ in range(m)]


class _Tower:
    def __init__(self, f: RationalMap, chain: list[complex]):
        self.f = f
        self.state = list(chain)
        self.sets = [None] + [_all_preimages(f, chain[j - 1], None) for j in range(1, len(chain))]

    @property
    def depth(self) -> int:
        return len(self.state) - 1

    def try_advance(self, t_new: complex):
        """New ``(state, sets)`` after moving level 0 to ``t_new``, or ``None`` if ambiguous."""
        state = [t_new]
        sets = [None]
        for j in range(1, self.depth + 1):
            cands = _all_preimages(self.f, state[j - 1], self.sets[j])
            old = self.state[j]
            dist = np.asarray(chordal_dist(old, np.array(cands)))
            order = np.argsort(dist, kind="stable")
            d1 = float(dist[order[0]])
            if len(cands) > 1:
                d2 = float(dist[order[1]])
                if d1 > AMBIGUITY_RATIO * d2:
                    # a multiple point of the previous set is not an ambiguity
                    olds = np.asarray(chordal_dist(old, np.array(self.sets[j])))
                    if np.count_nonzero(olds < 1e-10) < 2:
                        return None
            state.append(cands[order[0]])
            sets.append(cands)
        return state, sets

    def commit(self, new):
        self.state, self.sets = new


def _run(tower: _Tower, point_at, s0: float, s1: float, h0: float, record, counters):
    s = s0
    h = h0
    while s < s1:
        step = min(h, s1 - s)
        last = step >= s1 - s
        target = s1 if last else s + step
        new = tower.try_advance(point_at(target))
        if new is None:
            counters["halvings"] += 1
            h = step / 2
            if h < MIN_STEP * (s1 - s0) / (2 * math.pi) or h < 1e-300:
                raise DegenerateBoundaryError(
                    "step underflow: a critical value lies on (or extremely near) the lifted circle",
                    diagnostics={"param": s, "step": h})
            continue
        tower.commit(new)
        counters["steps"] += 1
        s = target
        if record is not None:
            record(s, tower.state)
        h = min(2 * step, h0)


def lift_tower(f: RationalMap, disk: ChordalDisk, chain, samples: int = 64,
               max_loops: int | None = None) -> TowerLift:
    """Trace the boundaries of ``Comp_{chain[j]} f^{-j}(disk)`` for j = 0..n.

    ``chain[0]`` must lie in the closed disk and ``f(chain[j]) = chain[j-1]``.
    """
    if samples < 64:
        raise DomainError("samples must be >= 64")
    chain = [as_point(z) for z in chain]
    n = len(chain) - 1
    if chordal_dist(chain[0], disk.center) > disk.radius * (1 + 1e-9):
        raise DomainError("chain[0] is not in the disk")
    for j in range(1, n + 1):
        if chordal_dist(f(chain[j]), chain[j - 1]) > 1e-9:
            raise DomainError(f"chain[{j}] is not a preimage of chain[{j - 1}]")
    d = f.degree
    max_loops = max_loops or d**n
    T, T_inv = rotation(disk.center)
    rho = chart_radius(disk.radius)
    zeta0 = complex(T(chain[0]))
    counters = {"steps": 0, "halvings": 0}
    # The approach segment may pass exactly through a critical value of some
    # level (real maps on the real axis); then another direction is tried.
    for attempt in range(len(_APPROACH_ANGLES)):
        theta0 = (cmath.phase(zeta0) if abs(zeta0) > 0 else 0.0) + _APPROACH_ANGLES[attempt]
        zb = rho * cmath.exp(1j * theta0)
        tower = _Tower(f, chain)
        try:
            _run(tower, lambda s: complex(T_inv(zeta0 + s * (zb - zeta0))), 0.0, 1.0, 1.0 / 8,
                 None, counters)
            break
        except DegenerateBoundaryError:
            if attempt == len(_APPROACH_ANGLES) - 1:
                raise
    start = list(tower.state)

    verts: list[list] = [[] for _ in range(n + 1)]
    params: list[float] = []

    def record(theta, state):
        params.append(theta)
        for j in range(n + 1):
            verts[j].append(state[j])

    record(theta0, start)
    closed_at = [None] * (n + 1)
    closure_err = [0.0] * (n + 1)
    h0 = 2 * math.pi / samples
    loop = 0
    while closed_at[n] is None:
        if loop >= max_loops:
            raise LiftingError(f"lift did not close after {loop} loops", level=n,
                               diagnostics={"loops": loop})
        a = theta0 + 2 * math.pi * loop
        _run(tower, lambda th: complex(T_inv(rho * cmath.exp(1j * th))), a, a + 2 * math.pi, h0,
             record, counters)
        loop += 1
        for j in range(n + 1):
            if closed_at[j] is None:
                err = chordal_dist(tower.state[j], start[j])
                if err < CLOSURE_TOL:
                    closed_at[j] = (loop, len(params) - 1)
                    closure_err[j] = err
    th = np.array(params)
    curves = []
    for j in range(n + 1):
        loops_j, end = closed_at[j]
        curves.append(LiftedCurve(np.array(verts[j][:end], dtype=complex), j, disk, chain[j],
                                  loops_j, th[:end], closure_err[j]))
    return TowerLift(disk, chain, curves, counters["steps"], counters["halvings"])


def lift_circle(f: RationalMap, disk: ChordalDisk, w, n: int, samples: int = 64) -> LiftedCurve:
    """Boundary of ``Comp_w f^{-n}(disk)``; requires ``f^n(w)`` in the disk."""
    if n < 0:
        raise DomainError("n must be >= 0")
    w = as_point(w)
    chain = [w]
    for _ in range(n):
        chain.append(f(chain[-1]))
    chain.reverse()
    if chordal_dist(chain[0], disk.center) > disk.radius * (1 + 1e-9):
        raise DomainError("f^n(w) is not in the disk")
    return lift_tower(f, disk, chain, samples).curves[n]


def curve_diameter(curve: LiftedCurve | np.ndarray, method: str = "auto") -> float:
    """Chordal diameter of the vertex set (max pairwise distance).

    ``"exact"`` is the chunked O(V^2) scan; ``"hull"`` reduces to the vertices
    of the convex hull of the points on the unit sphere in R^3 first (chordal
    distance is Euclidean distance there).  ``"auto"`` uses exact up to 4096
    vertices.
    """
    v = curve.vertices if isinstance(curve, LiftedCurve) else np.asarray(curve, complex)
    if len(v) < 2:
        return 0.0
    X = to_unit_sphere(v)
    if method == "auto":
        method = "exact" if len(v) <= EXACT_DIAMETER_MAX else "hull"
    if method == "hull":
        from scipy.spatial import ConvexHull, QhullError

        try:
            X = X[ConvexHull(X).vertices]
        except (QhullError, ValueError):
            pass
    elif method != "exact":
        raise ValueError(f"unknown method {method!r}")
    return _max_pairwise(X)


def _max_pairwise(X: np.ndarray, chunk: int = 1024) -> float:
    best = 0.0
    for i in range(0, len(X), chunk):
        block = X[i:i + chunk]
        d2 = np.sum((block[:, None, :] - X[None, :, :]) ** 2, axis=2)
        best = max(best, float(d2.max()))
    return math.sqrt(best)


def polyline_distance(vertices: np.ndarray, p: complex) -> float:
    """Chordal distance from ``p`` to the closed polyline drawn in the chart centred at ``p``.

    In that chart chordal distance from the origin is increasing in modulus,
    so the Euclidean nearest point of each segment is the chordal nearest.
    """
    T, _ = rotation(as_point(p))
    v = np.asarray(T(np.asarray(vertices, complex)))
    if np.any(np.isinf(v)):
        v = v[~np.isinf(v)]
    a = v
    b = np.roll(v, -1)
    ab = b - a
    denom = np.abs(ab) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.clip(np.where(denom > 0, -(np.conj(ab) * a).real / denom, 0.0), 0.0, 1.0)
    r = np.min(np.abs(a + t * ab))
    return 2 * r / math.hypot(1.0, r)


def winding_number(vertices: np.ndarray, p: complex) -> float:
    """Winding number of the closed chart polyline around the chart point ``p``."""
    v = np.asarray(vertices, complex) - p
    ang = np.angle(np.roll(v, -1) / v)
    return float(np.sum(ang) / (2 * math.pi))


def signed_area(vertices: np.ndarray) -> float:
    v = np.asarray(vertices, complex)
    nxt = np.roll(v, -1)
    return 0.5 * float(np.sum(v.real * nxt.imag - nxt.real * v.imag))


def point_in_component(curve: LiftedCurve, p, tol: float = 1e-9) -> bool:
    """Is ``p`` in the component bounded by ``curve`` (the one containing ``curve.w``)?

    Works in the chart centred at ``curve.w``.  The lifted boundary keeps the
    component on its left, so a clockwise chart polyline means the component
    is the unbounded side.
    """
    p = as_point(p)
    if len(curve.vertices) < 3:
        raise DomainError("degenerate curve")
    if polyline_distance(curve.vertices, p) < tol:
        raise BoundaryAmbiguityError(f"{p} lies on the curve")
    T, _ = rotation(curve.w)
    v = np.asarray(T(curve.vertices))
    q = complex(T(p))
    area = signed_area(v)
    if cmath.isinf(q):
        return area < 0
    wn = round(winding_number(v, q))
    if area > 0:
        return wn >= 1
    return wn == 0


def membership_mask(f: RationalMap, disk: ChordalDisk, w, n: int, grid: int = 317,
                    extent: float | None = None, offset: complex = 0j):
    """Grid classification of ``Comp_w f^{-n}(disk)`` (test oracle).

    Grid points in the chart centred at ``w`` (window centre ``offset``,
    half-width ``extent``) are pushed forward n times and tested against the
    disk; the connected component of the mask containing the pixel nearest
    ``w`` is extracted with 8-connectivity.  Returns ``(mask, points, xs)``
    with ``points`` the sphere points of the grid and ``xs`` the chart
    coordinates along the x axis (the y axis is ``xs - offset.real + offset.imag``).
    """
    from scipy import ndimage

    w = as_point(w)
    _, T_inv = rotation(w)
    if extent is None:
        raise DomainError("extent (chart half-width of the sampling window) is required")
    offset = complex(offset)
    u = np.linspace(-extent, extent, grid)
    xs = u + offset.real
    Z = xs[None, :] + 1j * (u + offset.imag)[:, None]
    pts = np.asarray(T_inv(Z.ravel())).reshape(Z.shape)
    img = pts.ravel()
    for _ in range(n):
        img = f(img)
    inside = np.asarray(disk.contains(img)).reshape(Z.shape)
    lab, _ = ndimage.label(inside, structure=np.ones((3, 3)))
    h = u[1] - u[0]
    i = int(np.clip(round((-offset.imag + extent) / h), 0, grid - 1))
    j = int(np.clip(round((-offset.real + extent) / h), 0, grid - 1))
    k = lab[i, j]
    mask = (lab == k) if k else np.zeros_like(inside)
    return mask, pts, xs


def membership_oracle(f: RationalMap, disk: ChordalDisk, w, n: int, grid: int = 317,
                      extent: float | None = None, offset: complex = 0j):
    """Brute-force diameter of ``Comp_w f^{-n}(disk)`` from :func:`membership_mask`.

    Returns ``(diameter, boundary_points)``; raises if the component reaches
    the edge of the sampling window.
    """
    from scipy import ndimage

    mask, pts, _ = membership_mask(f, disk, w, n, grid, extent, offset)
    if not mask.any():
        return 0.0, np.array([], complex)
    if mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any():
        raise DomainError("component reaches the edge of the sampling window; enlarge extent")
    boundary = mask & ~ndimage.binary_erosion(mask)
    comp = pts[boundary]
    return _max_pairwise(to_unit_sphere(comp)), comp


__all__ = [
    "INF", "LiftedCurve", "TowerLift", "lift_tower", "lift_circle", "curve_diameter",
    "polyline_distance", "winding_number", "point_in_component", "membership_mask",
    "membership_oracle",
]
