"""Run configuration: JSON in, validated dataclass out, defaults filled in."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from ..backward import Scale
from ..errors import CELabError, ConfigError
from ..ratmap import RationalMap, julia_classify
from ..sphere import as_point, point_to_json
from .registry import lookup

DEFAULTS = {
    "horizons": {"forward": 200, "backward": 10, "cover": 10, "classify": 1000},
    "scale": {"R": 0.1, "R_prime": 0.01},
    "radii": {"tce": 0.3, "expshrink": 0.1},
    "tce": {"M": 0, "P": 1, "z": None},
    "expshrink": {"anchor": None, "branch": "random"},
    "samples": {"base": 4, "branch": 4, "lift": 64},
    "seed": 0,
    "output": {"dir": None},
}


def _schema() -> dict:
    text = resources.files("celab.lab").joinpath("schemas/config.schema.json").read_text()
    return json.loads(text)


def _coeff(c) -> complex:
    if isinstance(c, list):
        return complex(c[0], c[1])
    return complex(c)


@dataclass
class RunConfig:
    f: RationalMap
    map_spec: dict
    julia_overrides: list
    horizons: dict
    scale: Scale
    radii: dict
    tce: dict
    expshrink: dict
    samples: dict
    seed: int
    output: dict
    raw: dict = field(repr=False, default_factory=dict)

    def classified(self):
        return julia_classify(self.f, horizon=self.horizons["classify"], overrides=self.julia_overrides)

    def to_json(self) -> dict:
        """Everything that determines a run, defaults included."""
        return {
            "map": self.map_spec,
            "julia_overrides": [{"point": point_to_json(z), "in_julia": b} for z, b in self.julia_overrides],
            "horizons": dict(self.horizons),
            "scale": {"R": self.scale.R, "R_prime": self.scale.R_prime},
            "radii": dict(self.radii),
            "tce": {**self.tce, "z": None if self.tce["z"] is None else point_to_json(as_point(self.tce["z"]))},
            "expshrink": {**self.expshrink,
                          "anchor": None if self.expshrink["anchor"] is None
                          else point_to_json(as_point(self.expshrink["anchor"]))},
            "samples": dict(self.samples),
            "seed": self.seed,
        }


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = {**out[k], **v}
        else:
            out[k] = v
    return out


def parse_config(text: str | dict, map_override: str | None = None,
                 map_params: dict | None = None) -> RunConfig:
    """Validate a JSON configuration and fill in defaults.

    The map is either ``"map": <registry name>`` (with optional
    ``"map_params"``) or explicit ``"numerator"``/``"denominator"`` arrays of
    ``[re, im]`` pairs in ascending degree.
    """
    if isinstance(text, str):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed JSON: {e.msg} (line {e.lineno}, column {e.colno})") from e
    else:
        data = copy.deepcopy(text)
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    errors = sorted(jsonschema.Draft202012Validator(_schema()).iter_errors(data),
                    key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(e.message, path=path)
    if map_override is not None:
        for k in ("numerator", "denominator", "name"):
            data.pop(k, None)
        data["map"] = map_override
        if map_params is not None:
            data["map_params"] = map_params
    cfg = _merge(DEFAULTS, data)

    if "map" in cfg:
        if "numerator" in cfg or "denominator" in cfg:
            raise ConfigError("give either a registry map name or numerator/denominator, not both",
                              path="map")
        bench = lookup(cfg["map"])
        params = cfg.get("map_params", {})
        try:
            f = bench.make(**params)
        except CELabError as e:
            raise ConfigError(str(e), path="map_params") from e
        map_spec = {"name": bench.name, "params": {**bench.params, **params}, **f.to_json()}
    elif "numerator" in cfg:
        num = [_coeff(c) for c in cfg["numerator"]]
        den = [_coeff(c) for c in cfg.get("denominator", [1])]
        try:
            f = RationalMap.from_coeffs(num, den, name=cfg.get("name", ""))
        except CELabError as e:
            raise ConfigError(str(e), path="numerator") from e
        map_spec = {"name": cfg.get("name", ""), "params": {}, **f.to_json()}
    else:
        raise ConfigError("no map given: set 'map' or 'numerator'/'denominator'", path="map")

    try:
        scale = Scale(cfg["scale"]["R"], cfg["scale"]["R_prime"])
    except CELabError as e:
        raise ConfigError(str(e), path="scale") from e
    overrides = [(as_point(o["point"]), bool(o["in_julia"])) for o in cfg.get("julia_overrides", [])]
    return RunConfig(f, map_spec, overrides, cfg["horizons"], scale, cfg["radii"], cfg["tce"],
                     cfg["expshrink"], cfg["samples"], int(cfg["seed"]), cfg["output"], data)


def load_config(path: str | None, **kw) -> RunConfig:
    if path is None:
        return parse_config({}, **kw)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, **kw)
