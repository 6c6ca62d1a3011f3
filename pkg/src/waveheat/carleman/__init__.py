"""Carleman weights, conjugated symbols, bracket checks and the inequality probe."""
from .bracket import PhasePoint, check_h2, characteristic_samples, h2_threshold, poisson_bracket
from .probe import Bump, Grid2D, carleman_probe, probe_sweep, random_bumps
from .select import CompactSet, choose_weight
from .symbols import (E_MINUS, E_PLUS, ZERO, SymbolPoint, check_root_signs, classify_region,
                      interface_identities, symbol_roots, tangential_symbols)
from .weights import WeightConfig, check_h1, eval_weights

__all__ = [
    "Bump", "CompactSet", "E_MINUS", "E_PLUS", "Grid2D", "PhasePoint", "SymbolPoint",
    "WeightConfig", "ZERO", "carleman_probe", "characteristic_samples", "check_h1",
    "check_h2", "check_root_signs", "choose_weight", "classify_region", "eval_weights",
    "h2_threshold", "interface_identities", "poisson_bracket", "probe_sweep",
    "random_bumps", "symbol_roots", "tangential_symbols",
]
