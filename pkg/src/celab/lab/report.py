"""Byte-stable report files: report.json, series.csv and plots.svg."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from importlib import resources

import jsonschema

from ..sphere import point_to_json
from .equivalence import EquivalenceReport

SCHEMA_VERSION = "1.0"
SERIES_COLUMNS = ("n", "a_n", "ce2_min_log", "expshrink_max_log_diam", "sr_dist")
NOTES = [
    "Julia membership of critical points is decided heuristically from their orbits",
    "ExpShrink base points come from an inverse-iteration approximation of the Julia set",
    "all rates and constants are finite-horizon fits, not certified bounds",
]


def sanitize(obj):
    """JSON-safe copy: non-finite floats become null, complex numbers [re, im]."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, complex):
        return point_to_json(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return int(obj)
    try:
        x = float(obj)
    except (TypeError, ValueError):
        return str(obj)
    return x if math.isfinite(x) else None


def report_dict(rep: EquivalenceReport) -> dict:
    return sanitize({
        "schema_version": SCHEMA_VERSION,
        "seed": rep.config["seed"],
        "config": rep.config,
        "critical_set": rep.critical_set,
        "vacuous": rep.vacuous,
        "estimators": {"ce": rep.ce, "ce2": rep.ce2, "expshrink": rep.exps, "sr": rep.sr},
        "consistency": rep.consistency,
        "verdict": rep.verdict,
        "errors": rep.errors,
        "notes": NOTES,
    })


def validate_report(doc: dict):
    schema = json.loads(resources.files("celab.lab").joinpath("schemas/report.schema.json").read_text())
    jsonschema.validate(doc, schema)


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    return repr(float(x)) if not isinstance(x, int) else str(x)


def series_csv(rep: EquivalenceReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(SERIES_COLUMNS)
    s = rep.series
    for i in range(len(s.get("n", []))):
        w.writerow([_fmt(s[c][i]) for c in SERIES_COLUMNS])
    return buf.getvalue()


def plots_svg(rep: EquivalenceReport) -> str:
    """Four static panels of the per-n series (log scale values as given)."""
    W, H, pad = 360, 220, 36
    panels = [c for c in SERIES_COLUMNS[1:]]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{2 * W}" height="{2 * H}" '
           f'font-family="sans-serif" font-size="11">']
    s = rep.series
    for k, name in enumerate(panels):
        x0, y0 = (k % 2) * W, (k // 2) * H
        out.append(f'<g transform="translate({x0},{y0})">')
        out.append(f'<text x="{pad}" y="16">{name}</text>')
        out.append(f'<line x1="{pad}" y1="{H - pad}" x2="{W - 10}" y2="{H - pad}" stroke="black"/>')
        out.append(f'<line x1="{pad}" y1="24" x2="{pad}" y2="{H - pad}" stroke="black"/>')
        pts = [(n, v) for n, v in zip(s.get("n", []), s.get(name, []))
               if v is not None and math.isfinite(v)]
        if pts:
            nmin, nmax = pts[0][0], pts[-1][0]
            vmin, vmax = min(v for _, v in pts), max(v for _, v in pts)
            if vmax == vmin:
                vmin, vmax = vmin - 1, vmax + 1
            if nmax == nmin:
                nmax = nmin + 1

            def px(n, v):
                return (pad + (n - nmin) / (nmax - nmin) * (W - pad - 10),
                        H - pad - (v - vmin) / (vmax - vmin) * (H - pad - 24))

            path = " ".join(f"{a:.2f},{b:.2f}" for a, b in (px(n, v) for n, v in pts))
            out.append(f'<polyline fill="none" stroke="steelblue" points="{path}"/>')
            out.append(f'<text x="2" y="28">{vmax:.4g}</text>')
            out.append(f'<text x="2" y="{H - pad}">{vmin:.4g}</text>')
            out.append(f'<text x="{pad}" y="{H - pad + 14}">{nmin}</text>')
            out.append(f'<text x="{W - 30}" y="{H - pad + 14}">{nmax}</text>')
        else:
            out.append(f'<text x="{pad + 10}" y="{H // 2}">no data</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def emit_report(rep: EquivalenceReport, out_dir: str) -> dict:
    """Write the three files into ``out_dir``; returns their paths."""
    doc = report_dict(rep)
    validate_report(doc)
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, name) for name in ("report.json", "series.csv", "plots.svg")}
    _write(paths["report.json"], dumps(doc))
    _write(paths["series.csv"], series_csv(rep))
    _write(paths["plots.svg"], plots_svg(rep))
    return paths
