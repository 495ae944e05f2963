"""Named benchmark maps."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..errors import ConfigError
from ..ratmap import RationalMap


@dataclass(frozen=True)
class Benchmark:
    name: str
    description: str
    build: Callable[..., tuple[list, list]]
    params: dict = field(default_factory=dict)

    def coeffs(self, **params) -> tuple[list, list]:
        p = {**self.params, **params}
        unknown = set(params) - set(self.params)
        if unknown:
            raise ConfigError(f"unknown parameter(s) {sorted(unknown)} for map {self.name!r}",
                              path="map_params")
        return self.build(**p)

    def make(self, **params) -> RationalMap:
        num, den = self.coeffs(**params)
        return RationalMap.from_coeffs(num, den, name=self.name)


_BENCHMARKS = [
    Benchmark("chebyshev", "z^2 - 2, Julia set [-2, 2], critical orbit 0 -> -2 -> 2 (repelling fixed point)",
              lambda: ([-2, 0, 1], [1])),
    Benchmark("misiurewicz_i", "z^2 + i, critical orbit lands on a repelling 2-cycle",
              lambda: ([1j, 0, 1], [1])),
    Benchmark("power2", "z^2, hyperbolic (no critical point in J)",
              lambda: ([0, 0, 1], [1])),
    Benchmark("basilica", "z^2 - 1, critical point in a superattracting 2-cycle",
              lambda: ([-1, 0, 1], [1])),
    Benchmark("multicrit", "3z^4 - 4z^3 + c, critical points of local degree 3 and 2",
              lambda c: ([c, 0, 0, -4, 3], [1]), {"c": 4.0 / 3.0}),
]


def registry() -> list[Benchmark]:
    return list(_BENCHMARKS)


def lookup(name: str) -> Benchmark:
    for b in _BENCHMARKS:
        if b.name == name:
            return b
    raise ConfigError(f"unknown map {name!r}; known: {[b.name for b in _BENCHMARKS]}", path="map")


def coeffs_json(coeffs) -> list:
    return [[complex(c).real, complex(c).imag] for c in coeffs]
