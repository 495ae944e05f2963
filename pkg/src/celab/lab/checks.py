"""Randomized property suites run from the command line (``celab check``).

``metric`` covers the sphere and rational-map invariants: triangle
inequality, chart invariance of the spherical derivative, the chain rule,
the Riemann-Hurwitz count and completeness of preimages.  ``lift`` traces
random pullback components of the benchmark maps and checks them against
forward iteration and a brute-force grid membership estimate.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import CELabError
from ..lift import curve_diameter, lift_tower, membership_oracle
from ..ratmap import RationalMap, preimages
from ..roots import Polynomial
from ..sphere import INF, ChordalDisk, chordal_dist, rotation
from .registry import registry

METRIC_TOL = 1e-12
DERIV_RTOL = 1e-10
PREIMAGE_TOL = 1e-9
PUSH_TOL = 1e-6
DIAM_RTOL = 0.02
ORACLE_GRID = 317  # about 10^5 grid points
MAX_EXAMPLES = 5


def compose(f: RationalMap, g: RationalMap) -> RationalMap:
    """``f o g`` from the homogeneous form: sum_k p_k A^k B^(d-k) over sum_k q_k A^k B^(d-k)."""
    A, B = g.P, g.Q
    d = f.degree

    def hom(coeffs):
        acc = Polynomial([0])
        for k in range(d + 1):
            ck = coeffs[k] if k < len(coeffs) else 0
            if ck == 0:
                continue
            term = Polynomial([ck])
            for _ in range(k):
                term = term * A
            for _ in range(d - k):
                term = term * B
            acc = acc + term
        return acc

    return RationalMap(hom(f.P.coeffs), hom(f.Q.coeffs))


def inverted(f: RationalMap) -> RationalMap:
    """``1/f(1/z)``: f seen in the chart at infinity."""
    d = f.degree
    return RationalMap.from_coeffs(f.Q.padded(d)[::-1], f.P.padded(d)[::-1])


def random_map(rng: np.random.Generator, dmin: int = 2, dmax: int = 4) -> RationalMap:
    d = int(rng.integers(dmin, dmax + 1))
    rational = rng.random() < 0.5
    while True:
        num = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        den = rng.normal(size=d) + 1j * rng.normal(size=d) if rational else [1.0]
        try:
            return RationalMap.from_coeffs(num, den)
        except (CELabError, ValueError):
            continue


def random_point(rng: np.random.Generator, p_inf: float = 0.0) -> complex:
    if rng.random() < p_inf:
        return INF
    return complex(*rng.normal(size=2)) * 10 ** rng.uniform(-2, 2)


class _Tally:
    def __init__(self, names):
        self.cases = {k: 0 for k in names}
        self.failures = {k: 0 for k in names}
        self.examples: list = []

    def add(self, name, ok, detail):
        self.cases[name] += 1
        if not ok:
            self.failures[name] += 1
            if len(self.examples) < MAX_EXAMPLES:
                self.examples.append({"property": name, **detail})

    def to_json(self, **extra):
        return {"cases": sum(self.cases.values()), "failures": sum(self.failures.values()),
                "per_property": {k: {"cases": self.cases[k], "failures": self.failures[k]}
                                 for k in self.cases},
                "examples": self.examples, **extra}


def _rel(a, b):
    m = max(abs(a), abs(b))
    return 0.0 if m == 0 else abs(a - b) / m


METRIC_PROPERTIES = ("triangle", "chart_invariance", "chain_rule", "riemann_hurwitz",
                     "preimage_completeness")


def metric_suite(cases: int = 10_000, seed: int = 0) -> dict:
    """Run ``cases`` randomized cases split evenly over the five properties."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    t = _Tally(METRIC_PROPERTIES)
    for i in range(cases):
        name = METRIC_PROPERTIES[i % len(METRIC_PROPERTIES)]
        if name == "triangle":
            a, b, c = (random_point(rng, 0.05) for _ in range(3))
            ab, bc, ac, ba = (chordal_dist(a, b), chordal_dist(b, c), chordal_dist(a, c),
                              chordal_dist(b, a))
            ok = ac <= ab + bc + METRIC_TOL and abs(ab - ba) <= METRIC_TOL and 0 <= ab <= 2 + METRIC_TOL
            t.add(name, ok, {"points": [str(a), str(b), str(c)]})
        elif name == "chart_invariance":
            f = random_map(rng)
            z = random_point(rng)
            while min(abs(z), abs(1 / z)) < 1e-3:
                z = random_point(rng)
            a, b = f.sderiv(z), inverted(f).sderiv(1 / z)
            t.add(name, _rel(a, b) <= DERIV_RTOL, {"z": str(z), "values": [a, b]})
        elif name == "chain_rule":
            f, g = random_map(rng, 2, 3), random_map(rng, 2, 3)
            z = random_point(rng)
            a = compose(f, g).sderiv(z)
            b = f.sderiv(g(z)) * g.sderiv(z)
            t.add(name, _rel(a, b) <= DERIV_RTOL, {"z": str(z), "values": [a, b]})
        elif name == "riemann_hurwitz":
            f = random_map(rng, 2, 6)
            cs = f.critical_set
            t.add(name, cs.riemann_hurwitz_ok(),
                  {"degree": f.degree, "mu": [e.mu for e in cs.entries]})
        else:
            f = random_map(rng, 2, 6)
            z = random_point(rng, 0.05)
            pre = preimages(f, z)
            ok = sum(m for _, m in pre) == f.degree and all(
                chordal_dist(f(w), z) < PREIMAGE_TOL for w, _ in pre)
            t.add(name, ok, {"z": str(z), "degree": f.degree, "count": sum(m for _, m in pre)})
    return t.to_json(seed=seed)


LIFT_PROPERTIES = ("push_forward", "diameter_oracle")


def _oracle_diameter(f, curve):
    T, _ = rotation(curve.w)
    v = np.asarray(T(curve.vertices))
    lo, hi = v.real.min() + 1j * v.imag.min(), v.real.max() + 1j * v.imag.max()
    centre = (lo + hi) / 2
    half = 0.5 * max(hi.real - lo.real, hi.imag - lo.imag)
    for scale in (1.1, 1.5, 2.5):
        try:
            return membership_oracle(f, curve.base, curve.w, curve.level, grid=ORACLE_GRID,
                                     extent=scale * half, offset=centre)[0]
        except CELabError:
            continue
    return math.nan


def lift_suite(cases: int = 1000, seed: int = 0, max_level: int = 4, samples: int = 64) -> dict:
    """Random lifts on the benchmark maps, n <= ``max_level``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    maps = [b.make() for b in registry()]
    t = _Tally(LIFT_PROPERTIES + ("lift_error",))
    for _ in range(cases):
        f = maps[int(rng.integers(len(maps)))]
        n = int(rng.integers(1, max_level + 1))
        r = float(rng.uniform(0.05, 0.25))
        x = complex(*rng.normal(size=2))
        chain = [x]
        for _ in range(n):
            pre = [w for w, m in preimages(f, chain[-1])]
            chain.append(pre[int(rng.integers(len(pre)))])
        info = {"map": f.name, "n": n, "r": r, "x": str(x), "w": str(chain[-1])}
        try:
            curve = lift_tower(f, ChordalDisk(x, r), chain, samples).curves[n]
        except CELabError as e:
            t.add("lift_error", False, {**info, "error": f"{type(e).__name__}: {e}"})
            continue
        t.cases["lift_error"] += 1
        v = curve.vertices
        for _ in range(n):
            v = f(v)
        push = float(np.max(np.abs(chordal_dist(v, x) - r)))
        t.add("push_forward", push < PUSH_TOL, {**info, "max_error": push})
        d, ref = curve_diameter(curve), _oracle_diameter(f, curve)
        t.add("diameter_oracle", _rel(d, ref) <= DIAM_RTOL, {**info, "diameter": d, "oracle": ref})
    return t.to_json(seed=seed, instances=cases)


SUITES = {"metric": metric_suite, "lift": lift_suite}
