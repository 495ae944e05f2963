"""Configuration, benchmark registry, estimator orchestration and reports."""
from .config import RunConfig, parse_config
from .equivalence import EquivalenceReport, run_equivalence
from .registry import lookup, registry
from .report import emit_report

__all__ = ["RunConfig", "parse_config", "EquivalenceReport", "run_equivalence", "registry",
           "lookup", "emit_report"]
