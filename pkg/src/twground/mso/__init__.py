from .ground import InvalidTD, ground_to_qbf, mc_to_sat, preserve_alternation, structure_td
from .oracle import brute_mc_mso, expand_mc_mso, witness_sets
from .parser import MsoSyntaxError, parse_mso
from .structure import RelationalStructure, gaifman_graph, parse_structure, structure, write_structure
from .syntax import (FIRST, SECOND, ArityError, Atom, MsoError, MsoFormula, Quant, UnboundVariable,
                     VocabularyMismatch, eq, format_mso, mem, rel)

__all__ = [
    "ArityError", "Atom", "FIRST", "InvalidTD", "MsoError", "MsoFormula", "MsoSyntaxError", "Quant",
    "RelationalStructure", "SECOND", "UnboundVariable", "VocabularyMismatch", "brute_mc_mso", "eq",
    "expand_mc_mso", "format_mso", "gaifman_graph", "ground_to_qbf", "mc_to_sat", "mem", "parse_mso",
    "parse_structure", "preserve_alternation", "rel", "structure", "structure_td", "witness_sets",
    "write_structure",
]
