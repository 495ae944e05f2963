"""Command line interface: ``celab [global flags] <command> [options]``.

Every command prints its result as JSON on stdout; with ``--out DIR`` the
same document is written to ``DIR/<command>.json`` (``equiv`` writes
report.json, series.csv and plots.svg instead; ``check`` writes
check_<suite>.json).

Exit codes: 0 success, 1 configuration error, 2 numerical or resource
error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from ..backward import ce2_min_derivative
from ..cover import TCEParams, expshrink_estimate, tce_check
from ..errors import CELabError, ConfigError
from ..orbit import ce_exponent, forward_orbit, sr_alpha_fit, sr_distances
from ..sphere import as_point, point_to_json
from .checks import SUITES
from .config import load_config
from .equivalence import run_equivalence
from .registry import coeffs_json, registry
from .report import dumps, emit_report, sanitize

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def _point(text: str) -> complex:
    try:
        return as_point(text.replace(" ", ""))
    except (ValueError, CELabError) as e:
        raise argparse.ArgumentTypeError(f"not a point: {text!r}") from e


def _param(text: str) -> tuple[str, float]:
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected KEY=VALUE")
    return key, float(val)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="celab", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", type=int, help="random seed (overrides the config)")
    ap.add_argument("--threads", type=int, default=0, help="worker threads (0 = sequential)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_map(p):
        p.add_argument("--map", help="registry map name (overrides the config)")
        p.add_argument("--map-param", action="append", type=_param, default=[],
                       metavar="KEY=VALUE", help="registry map parameter, e.g. c=1.5")
        return p

    p = with_map(sub.add_parser("orbit", help="forward orbit and log-derivative prefix"))
    p.add_argument("-z", type=_point, required=True, help="start point (e.g. 0.5+1j or inf)")
    p.add_argument("-N", type=int, default=None)

    p = with_map(sub.add_parser("ce", help="CE exponent along each critical orbit"))
    p.add_argument("-N", type=int, default=None)
    p.add_argument("-c", type=_point, default=None, help="one critical point (default: all of Crit')")

    p = with_map(sub.add_parser("ce2", help="minimal backward derivative (CE2)"))
    p.add_argument("-n", type=int, default=None)
    p.add_argument("-c", type=_point, default=None)

    p = with_map(sub.add_parser("sr", help="slow-recurrence distances and alpha"))
    p.add_argument("-N", type=int, default=None)
    p.add_argument("-C", type=float, default=None, help="constant C (default: min distance)")
    p.add_argument("-c", type=_point, default=None)

    p = with_map(sub.add_parser("expshrink", help="exponential shrinking of components"))
    p.add_argument("-r", type=float, default=None)
    p.add_argument("-N", type=int, default=None)
    p.add_argument("--anchor", type=_point, default=None)
    p.add_argument("--branch", choices=("random", "fixed"), default=None)
    p.add_argument("--base-samples", type=int, default=None)
    p.add_argument("--branch-samples", type=int, default=None)

    p = with_map(sub.add_parser("tce", help="topological Collet-Eckmann counting test"))
    p.add_argument("-z", type=_point, default=None)
    p.add_argument("-r", type=float, default=None)
    p.add_argument("-M", type=int, default=None)
    p.add_argument("-P", type=int, default=None)
    p.add_argument("-N", type=int, default=None)

    with_map(sub.add_parser("equiv", help="all estimators and their consistency report"))
    sub.add_parser("registry", help="list the built-in benchmark maps")
    p = sub.add_parser("check", help="randomized property suites (metric or lift)")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--cases", type=int, default=None,
                   help="number of cases (default 10000 for metric, 1000 for lift)")
    return ap


def _pick(value, default):
    return default if value is None else value


def _selected(cs, c):
    if c is None:
        return cs.crit_prime
    e = cs.find(c)
    return [e]


def _cmd_orbit(a, cfg):
    orb = forward_orbit(cfg.f, a.z, _pick(a.N, cfg.horizons["forward"]))
    return {"points": [point_to_json(z) for z in orb.points],
            "log_deriv_prefix": orb.log_deriv_prefix, "critical_hit": orb.critical_hit}


def _cmd_ce(a, cfg):
    cs = cfg.classified()
    N = _pick(a.N, cfg.horizons["forward"])
    ests = [ce_exponent(cfg.f, e.point, N, cs) for e in _selected(cs, a.c)] if cs.crit_prime else []
    return {"N": N, "vacuous": not cs.crit_prime, "critical_set": cs.to_json(),
            "estimates": [e.to_json() for e in ests]}


def _cmd_ce2(a, cfg):
    cs = cfg.classified()
    n = _pick(a.n, cfg.horizons["backward"])
    ests = ([ce2_min_derivative(cfg.f, e.point, n, cs, threads=a.threads) for e in _selected(cs, a.c)]
            if cs.crit_prime else [])
    return {"n": n, "vacuous": not cs.crit_prime, "critical_set": cs.to_json(),
            "estimates": [e.to_json() for e in ests]}


def _cmd_sr(a, cfg):
    cs = cfg.classified()
    N = _pick(a.N, cfg.horizons["forward"])
    out = []
    for e in (_selected(cs, a.c) if cs.crit_prime else []):
        fit = sr_alpha_fit(sr_distances(cfg.f, e.point, N, cs), a.C)
        out.append({"critical_point": point_to_json(e.point), **fit.to_json()})
    return {"N": N, "vacuous": not cs.crit_prime, "critical_set": cs.to_json(), "estimates": out}


def _cmd_expshrink(a, cfg):
    anchor = a.anchor if a.anchor is not None else cfg.expshrink["anchor"]
    est = expshrink_estimate(cfg.f, _pick(a.r, cfg.radii["expshrink"]), _pick(a.N, cfg.horizons["cover"]),
                             _pick(a.base_samples, cfg.samples["base"]),
                             _pick(a.branch_samples, cfg.samples["branch"]),
                             anchor=anchor, branch=_pick(a.branch, cfg.expshrink["branch"]),
                             seed=cfg.seed, samples=cfg.samples["lift"], threads=a.threads)
    return {"estimate": est.to_json(), "ratios": est.ratios}


def _cmd_tce(a, cfg):
    z = a.z if a.z is not None else cfg.tce["z"]
    if z is None:
        raise ConfigError("tce needs a point: pass -z or set tce.z", path="tce/z")
    params = TCEParams(_pick(a.M, cfg.tce["M"]), _pick(a.P, cfg.tce["P"]), _pick(a.r, cfg.radii["tce"]))
    res = tce_check(cfg.f, as_point(z), params, _pick(a.N, cfg.horizons["cover"]),
                    samples=cfg.samples["lift"])
    return {"z": point_to_json(as_point(z)), "N": _pick(a.N, cfg.horizons["cover"]), **res.to_json()}


COMMANDS = {"orbit": _cmd_orbit, "ce": _cmd_ce, "ce2": _cmd_ce2, "sr": _cmd_sr,
            "expshrink": _cmd_expshrink, "tce": _cmd_tce}


def _registry_doc():
    out = []
    for b in registry():
        num, den = b.coeffs()
        out.append({"name": b.name, "description": b.description, "params": b.params,
                    "numerator": coeffs_json(num), "denominator": coeffs_json(den)})
    return {"maps": out}


def _check(a, stdout) -> int:
    seed = 0 if a.seed is None else a.seed
    if seed < 0:
        raise ConfigError("seed must be >= 0", path="seed")
    kw = {} if a.cases is None else {"cases": a.cases}
    doc = sanitize({"command": "check", "suite": a.suite, **SUITES[a.suite](seed=seed, **kw)})
    text = dumps(doc)
    if a.out:
        os.makedirs(a.out, exist_ok=True)
        with open(os.path.join(a.out, f"check_{a.suite}.json"), "w", encoding="utf-8") as fh:
            fh.write(text)
    stdout.write(text)
    return EXIT_OK


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if a.command == "registry":
            stdout.write(dumps(sanitize(_registry_doc())))
            return EXIT_OK
        if a.command == "check":
            return _check(a, stdout)
        cfg = load_config(a.config, map_override=a.map,
                          map_params=dict(a.map_param) if a.map_param else None)
        if a.seed is not None:
            if a.seed < 0:
                raise ConfigError("seed must be >= 0", path="seed")
            cfg.seed = a.seed
        out_dir = a.out or cfg.output.get("dir")
        if a.command == "equiv":
            rep = run_equivalence(cfg, threads=a.threads)
            if out_dir:
                emit_report(rep, out_dir)
            from .report import report_dict
            stdout.write(dumps(report_dict(rep)))
            return EXIT_OK
        doc = sanitize({"command": a.command, "map": cfg.map_spec, "seed": cfg.seed,
                        **COMMANDS[a.command](a, cfg)})
        text = dumps(doc)
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
            with open(os.path.join(out_dir, f"{a.command}.json"), "w", encoding="utf-8") as fh:
                fh.write(text)
        stdout.write(text)
        return EXIT_OK
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (CELabError, ArithmeticError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
