"""Foliated qLDPC codes on fusion networks: lattice construction, noise, decoding."""

__version__ = "0.1.0"

from .codes import CssCode, build_bb_code, build_toric_code, named_code, validate
from .decoder import UnionFindDecoder, logical_flip, lost_logicals
from .foliation import DecodingProblem, FoliatedLattice, build_decoding_problem, foliate

__all__ = [
    "CssCode",
    "DecodingProblem",
    "FoliatedLattice",
    "UnionFindDecoder",
    "build_bb_code",
    "build_decoding_problem",
    "build_toric_code",
    "foliate",
    "logical_flip",
    "lost_logicals",
    "named_code",
    "validate",
]
