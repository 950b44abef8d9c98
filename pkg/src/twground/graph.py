from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph; edges are stored as (u, v) with u < v."""

    vertices: tuple
    edges: frozenset = frozenset()

    def __post_init__(self):
        vs = tuple(self.vertices)
        norm = set()
        vset = set(vs)
        for u, v in self.edges:
            if u == v:
                continue
            if u not in vset or v not in vset:
                raise ValueError(f"edge {(u, v)} has endpoint outside vertex set")
            norm.add((u, v) if u < v else (v, u))
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", frozenset(norm))

    @cached_property
    def adj(self) -> dict:
        a = {v: set() for v in self.vertices}
        for u, v in self.edges:
            a[u].add(v)
            a[v].add(u)
        return a

    def __len__(self):
        return len(self.vertices)


def graph_from_edges(edges, vertices=None) -> Graph:
    edges = [tuple(e) for e in edges]
    if vertices is None:
        vertices = sorted({x for e in edges for x in e})
    return Graph(tuple(vertices), frozenset(edges))
