"""Run every estimator on one map and compare the fitted exponents.

The conditions CE, CE2 and ExpShrink (hence TCE) are equivalent for maps
without parabolic points; at a finite horizon this shows up as comparable
fitted rates.  The report states the rates and their pairwise gaps; it does
not prove anything.
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..backward import ce2_min_derivative
from ..cover import expshrink_estimate
from ..errors import CELabError
from ..orbit import ce_exponent, sr_alpha_fit, sr_distances
from ..sphere import point_to_json
from .config import RunConfig

log = logging.getLogger(__name__)

GAP_THRESHOLD = 0.15
RATES = ("log_lambda1", "log_lambda2", "log_lambda_exp")


@dataclass
class EquivalenceReport:
    config: dict
    critical_set: dict
    vacuous: bool
    ce: dict | None = None
    ce2: dict | None = None
    exps: dict | None = None
    sr: dict | None = None
    consistency: dict = field(default_factory=dict)
    verdict: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)

    def rate(self, key: str) -> float | None:
        src = {"log_lambda1": self.ce, "log_lambda2": self.ce2, "log_lambda_exp": self.exps}[key]
        return None if src is None else src.get(key)


def relative_gap(a: float, b: float) -> float:
    """``|a - b| / max(|a|, |b|)``; symmetric, 0 for equal values."""
    m = max(abs(a), abs(b))
    return 0.0 if m == 0 else abs(a - b) / m


def _log(x):
    return math.log(x) if x is not None and x > 0 else None


def _ce(cfg, cs):
    ests = [ce_exponent(cfg.f, e.point, cfg.horizons["forward"], cs) for e in cs.crit_prime]
    lam = min(e.lambda1 for e in ests)
    return {"lambda1": lam, "log_lambda1": _log(lam), "C1": min(e.C1 for e in ests),
            "observed": all(e.observed for e in ests),
            "per_critical_point": [e.to_json() for e in ests]}


def _ce2(cfg, cs, threads):
    ests = [ce2_min_derivative(cfg.f, e.point, cfg.horizons["backward"], cs, threads=threads)
            for e in cs.crit_prime]
    lam = min(e.lambda2 for e in ests)
    return {"lambda2": lam, "log_lambda2": _log(lam), "C2": min(e.C2 for e in ests),
            "observed": all(e.observed for e in ests),
            "per_critical_point": [e.to_json() for e in ests]}


def _exps(cfg, threads):
    ex = cfg.expshrink
    est = expshrink_estimate(cfg.f, cfg.radii["expshrink"], cfg.horizons["cover"],
                             cfg.samples["base"], cfg.samples["branch"], anchor=ex["anchor"],
                             branch=ex["branch"], seed=cfg.seed, samples=cfg.samples["lift"],
                             threads=threads)
    out = est.to_json()
    out["observed"] = est.lambda_exp > 1 and not est.unreliable
    return out


def _sr(cfg, cs):
    per = []
    for e in cs.crit_prime:
        fit = sr_alpha_fit(sr_distances(cfg.f, e.point, cfg.horizons["forward"], cs))
        per.append({"critical_point": point_to_json(e.point), **fit.to_json()})
    return {"alpha": max(p["alpha"] for p in per), "C": min(p["C"] for p in per),
            "min_distance": min(p["min_distance"] for p in per),
            "observed": all(p["min_distance"] > 0 for p in per),
            "per_critical_point": per}


def run_equivalence(cfg: RunConfig, threads: int = 0) -> EquivalenceReport:
    """Run CE, CE2, ExpShrink and SR; a failing estimator is reported as absent."""
    cs = cfg.classified()
    rep = EquivalenceReport(cfg.to_json(), cs.to_json(), not cs.crit_prime)
    if rep.vacuous:
        rep.verdict = {"summary": "hyperbolic: vacuous", "ce_observed": None, "ce2_observed": None,
                       "expshrink_observed": None, "sr_observed": None}
        return rep

    jobs = {
        "ce": lambda: _ce(cfg, cs),
        "ce2": lambda: _ce2(cfg, cs, threads),
        "exps": lambda: _exps(cfg, threads),
        "sr": lambda: _sr(cfg, cs),
    }

    def guarded(name):
        try:
            return name, jobs[name](), None
        except CELabError as e:
            log.warning("estimator %s failed: %s", name, e)
            return name, None, f"{type(e).__name__}: {e}"

    if threads and threads > 1:
        with ThreadPoolExecutor(min(threads, len(jobs))) as ex:
            results = list(ex.map(guarded, jobs))
    else:
        results = [guarded(n) for n in jobs]
    for name, value, err in results:
        setattr(rep, name, value)
        if err is not None:
            rep.errors[name] = err

    gaps = {}
    for a, b in itertools.combinations(RATES, 2):
        ra, rb = rep.rate(a), rep.rate(b)
        gaps[f"{a}|{b}"] = None if ra is None or rb is None else relative_gap(ra, rb)
    rep.consistency = {"relative_gaps": gaps, "threshold": GAP_THRESHOLD,
                       "all_within": all(g is not None and g < GAP_THRESHOLD for g in gaps.values())}
    flags = {f"{k}_observed": (None if getattr(rep, attr) is None else getattr(rep, attr)["observed"])
             for k, attr in (("ce", "ce"), ("ce2", "ce2"), ("expshrink", "exps"), ("sr", "sr"))}
    if any(v is None for v in flags.values()):
        summary = "incomplete"
    elif all(flags.values()) and rep.consistency["all_within"]:
        summary = "consistent"
    elif all(flags.values()):
        summary = "all observed; rates differ"
    else:
        summary = "not all observed"
    rep.verdict = {"summary": summary, **flags}
    rep.series = _series(rep, cfg)
    return rep


def _series(rep: EquivalenceReport, cfg: RunConfig) -> dict:
    """Per-n columns for the first critical point in Crit' (and ExpShrink)."""
    n_max = max(cfg.horizons["forward"], cfg.horizons["backward"], cfg.horizons["cover"])
    a_n = rep.ce["per_critical_point"][0]["per_n_exponents"] if rep.ce else []
    ce2 = [_log(x) for x in rep.ce2["per_critical_point"][0]["per_n_min"]] if rep.ce2 else []
    exps = [_log(x) for x in rep.exps["per_n_max_diam"][1:]] if rep.exps else []
    sr = rep.sr["per_critical_point"][0]["distance_series"] if rep.sr else []

    def col(xs):
        return [xs[i] if i < len(xs) else None for i in range(n_max)]

    return {"n": list(range(1, n_max + 1)), "a_n": col(a_n), "ce2_min_log": col(ce2),
            "expshrink_max_log_diam": col(exps), "sr_dist": col(sr)}
