"""Treewidth-aware grounding of MSO, QBF and counting problems into SAT."""

from .formula import Block, Cnf, Dnf, EXISTS, FORALL, Qbf, Wcnf, condition, evaluate, make_qbf, primal_graph, qa
from .graph import Graph, graph_from_edges
from .treedec import (LabeledTreeDecomposition, TreeDecomposition, label, min_fill, normalize,
                      validate)

__version__ = "0.1.0"
