"""Doubling coverings: punctured-cube ball covers, level-set chart atlases,
p-valent doubling constants, and chain-propagated doubling inequalities."""

from .polyalg import PolyC, parse_poly, poly_from_records, l1_norm, eval_grad

__all__ = ["PolyC", "parse_poly", "poly_from_records", "l1_norm", "eval_grad"]
__version__ = "0.1.0"
