"""Estimates lab: null-form symbols, the product rule engine and wave-Sobolev norms."""

from .products import (
    CONDITION_TEXT,
    CheckReport,
    ConditionResult,
    ExponentMatrix,
    FixtureEntry,
    bundled_fixture,
    is_product,
    load_fixture,
    parse_fixture_text,
    parse_matrix,
)
from .symbols import (
    SymbolSample,
    angle_probe,
    angle_probe_experiment,
    check_symbol_bounds,
    symbol_a,
    symbol_b,
    symbol_c,
)
from .wave_sobolev import bilinear_probe, comparability_ratio, hsb_norm, single_mode_ratio, xsb_norm

__all__ = [
    "CONDITION_TEXT",
    "CheckReport",
    "ConditionResult",
    "ExponentMatrix",
    "FixtureEntry",
    "bundled_fixture",
    "is_product",
    "load_fixture",
    "parse_fixture_text",
    "parse_matrix",
    "SymbolSample",
    "angle_probe",
    "angle_probe_experiment",
    "check_symbol_bounds",
    "symbol_a",
    "symbol_b",
    "symbol_c",
    "bilinear_probe",
    "comparability_ratio",
    "hsb_norm",
    "single_mode_ratio",
    "xsb_norm",
]
