"""Rooted tree decompositions: construction, validation, normalization, labeling.

Nodes are the integers 0..n-1 and node 0 is always the root.  Every
transformation that adds nodes hands the new id to the lower copy, so
the root id never changes.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .graph import Graph


class InvalidInput(ValueError):
    pass


class Uncoverable(ValueError):
    pass


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple
    parent: tuple  # parent[0] is None

    def __post_init__(self):
        bags = tuple(frozenset(b) for b in self.bags)
        parent = tuple(self.parent)
        if not bags:
            raise InvalidInput("a tree decomposition needs at least one node")
        if len(parent) != len(bags) or parent[0] is not None:
            raise InvalidInput("node 0 must be the root")
        for t in range(1, len(bags)):
            p = parent[t]
            if p is None or not 0 <= p < len(bags) or p == t:
                raise InvalidInput(f"node {t} has bad parent {p}")
        object.__setattr__(self, "bags", bags)
        object.__setattr__(self, "parent", parent)
        if len(self.postorder) != len(bags):
            raise InvalidInput("parent links do not form a tree")

    root = 0

    def __len__(self):
        return len(self.bags)

    @cached_property
    def children(self) -> tuple:
        ch = [[] for _ in self.bags]
        for t, p in enumerate(self.parent):
            if p is not None:
                ch[p].append(t)
        return tuple(tuple(c) for c in ch)

    @cached_property
    def postorder(self) -> tuple:
        """Children before parents; siblings in id order."""
        ch = [[] for _ in self.bags]
        for t, p in enumerate(self.parent):
            if p is not None:
                ch[p].append(t)
        out, stack = [], [(0, False)]
        while stack:
            t, done = stack.pop()
            if done:
                out.append(t)
                continue
            stack.append((t, True))
            for c in reversed(ch[t]):
                stack.append((c, False))
        return tuple(out)

    @cached_property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1

    def vertices(self) -> set:
        return set().union(*self.bags)


@dataclass(frozen=True)
class LabeledTreeDecomposition(TreeDecomposition):
    labels: tuple = ()

    def __post_init__(self):
        super().__post_init__()
        labels = tuple(tuple(x) for x in self.labels)
        if len(labels) != len(self.bags):
            raise InvalidInput("one label list per node required")
        object.__setattr__(self, "labels", labels)

    @cached_property
    def node_of(self) -> dict:
        return {i: t for t, ls in enumerate(self.labels) for i in ls}

    def plain(self) -> TreeDecomposition:
        return TreeDecomposition(self.bags, self.parent)


def width(td: TreeDecomposition) -> int:
    return td.width


@dataclass
class ValidationReport:
    valid: bool
    width: int
    missing_vertices: list = field(default_factory=list)
    disconnected_vertices: list = field(default_factory=list)
    uncovered_edges: list = field(default_factory=list)
    unknown_vertices: list = field(default_factory=list)

    def __bool__(self):
        return self.valid


def validate(g: Graph, td: TreeDecomposition) -> ValidationReport:
    occ: dict = {}
    for t, b in enumerate(td.bags):
        for v in b:
            occ.setdefault(v, []).append(t)
    vset = set(g.vertices)
    missing, disconnected = [], []
    for v in g.vertices:
        nodes = occ.get(v)
        if not nodes:
            missing.append(v)
            continue
        # connected iff exactly one occurrence has a parent without v
        tops = sum(1 for t in nodes if t == 0 or v not in td.bags[td.parent[t]])
        if tops != 1:
            disconnected.append(v)
    unknown = sorted(v for v in occ if v not in vset)
    uncovered = []
    occ_sets = {v: set(ns) for v, ns in occ.items()}
    for u, v in sorted(g.edges):
        a, b = occ_sets.get(u), occ_sets.get(v)
        if not a or not b or a.isdisjoint(b):
            uncovered.append((u, v))
    ok = not (missing or disconnected or uncovered or unknown)
    return ValidationReport(ok, td.width, missing, disconnected, uncovered, unknown)


class _Builder:
    """Mutable scratch copy used by the transformations below."""

    def __init__(self, td: TreeDecomposition, labels=None):
        self.bags = [set(b) for b in td.bags]
        self.parent = list(td.parent)
        self.children = [list(c) for c in td.children]
        self.labels = [list(x) for x in labels] if labels is not None else None

    def split(self, t: int) -> int:
        """Give t a single new child with the same bag that adopts t's children."""
        n = len(self.bags)
        self.bags.append(set(self.bags[t]))
        self.parent.append(t)
        self.children.append(self.children[t])
        for c in self.children[t]:
            self.parent[c] = n
        self.children[t] = [n]
        if self.labels is not None:
            self.labels.append([])
        return n

    def add_child(self, t: int, bag) -> int:
        n = len(self.bags)
        self.bags.append(set(bag))
        self.parent.append(t)
        self.children.append([])
        self.children[t].append(n)
        if self.labels is not None:
            self.labels.append([])
        return n

    def freeze(self):
        td = TreeDecomposition(tuple(self.bags), tuple(self.parent))
        if self.labels is None:
            return td
        return LabeledTreeDecomposition(td.bags, td.parent, tuple(tuple(x) for x in self.labels))


def _check_tree_connectivity(td: TreeDecomposition):
    tops: dict = {}
    for t, b in enumerate(td.bags):
        up = td.bags[td.parent[t]] if t else ()
        for v in b:
            if v not in up:
                tops[v] = tops.get(v, 0) + 1
    bad = [v for v, n in tops.items() if n != 1]
    if bad:
        raise InvalidInput(f"occurrences of vertex {min(bad)} are not connected")


def normalize(td: TreeDecomposition, g: Graph | None = None) -> TreeDecomposition:
    """Binary version of td: nodes with more than two children become chains."""
    if g is not None:
        rep = validate(g, td)
        if not rep.valid:
            raise InvalidInput(f"invalid tree decomposition: {rep}")
    else:
        _check_tree_connectivity(td)
    if all(len(c) <= 2 for c in td.children):
        return td
    labels = td.labels if isinstance(td, LabeledTreeDecomposition) else None
    b = _Builder(td, labels)
    for t in range(len(td.bags)):
        cur = t
        while len(b.children[cur]) > 2:
            kids = b.children[cur]
            first, rest = kids[0], kids[1:]
            n = len(b.bags)
            b.bags.append(set(b.bags[cur]))
            b.parent.append(cur)
            b.children.append(rest)
            if b.labels is not None:
                b.labels.append([])
            for c in rest:
                b.parent[c] = n
            b.children[cur] = [first, n]
            cur = n
    return b.freeze()


def _item_vars(item) -> frozenset:
    return frozenset(abs(l) for l in item)


def label(td: TreeDecomposition, f) -> LabeledTreeDecomposition:
    """Assign every clause/term to one covering node, one item per node.

    `f` is a formula (anything with `.items`) or a plain sequence of
    clauses.  Items go to the covering node with the smallest id; extra
    items on a node are moved to fresh single-child copies of it.
    """
    items = f.items if hasattr(f, "items") else tuple(f)
    occ: dict = {}
    for t, bag in enumerate(td.bags):
        for v in bag:
            occ.setdefault(v, set()).add(t)
    per_node = [[] for _ in td.bags]
    for i, it in enumerate(items):
        vs = _item_vars(it)
        if not vs:
            per_node[0].append(i)
            continue
        cand = None
        for v in sorted(vs, key=lambda v: len(occ.get(v, ()))):
            s = occ.get(v)
            if not s:
                cand = set()
                break
            cand = set(s) if cand is None else cand & s
            if not cand:
                break
        if not cand:
            raise Uncoverable(f"clause {i} {tuple(it)} is not covered by any bag")
        per_node[min(cand)].append(i)
    b = _Builder(td, [[] for _ in td.bags])
    for t in range(len(td.bags)):
        ls = per_node[t]
        if not ls:
            continue
        b.labels[t] = [ls[0]]
        cur = t
        for i in ls[1:]:
            cur = b.split(cur)
            b.labels[cur] = [i]
    return b.freeze()


def prepare(td: TreeDecomposition, f) -> LabeledTreeDecomposition:
    """Binary and labeled with at most one item per node."""
    return label(normalize(td), f)


def add_empty_leaves(td: TreeDecomposition) -> TreeDecomposition:
    """Hang an empty-bag child under every leaf whose bag is non-empty."""
    labels = td.labels if isinstance(td, LabeledTreeDecomposition) else None
    b = _Builder(td, labels)
    for t in range(len(td.bags)):
        if not td.children[t] and td.bags[t]:
            b.add_child(t, ())
    return b.freeze()


def cover_vertices(td: TreeDecomposition, vertices: Iterable) -> TreeDecomposition:
    """Add a singleton leaf under the root for every vertex missing from td."""
    have = td.vertices()
    extra = [v for v in sorted(set(vertices)) if v not in have]
    if not extra:
        return td
    labels = td.labels if isinstance(td, LabeledTreeDecomposition) else None
    b = _Builder(td, labels)
    for v in extra:
        b.add_child(0, (v,))
    return b.freeze()


def restrict(td: TreeDecomposition, keep) -> TreeDecomposition:
    keep = set(keep)
    bags = tuple(frozenset(v for v in b if v in keep) for b in td.bags)
    if isinstance(td, LabeledTreeDecomposition):
        return LabeledTreeDecomposition(bags, td.parent, td.labels)
    return TreeDecomposition(bags, td.parent)


def rename(td: TreeDecomposition, mapping: dict) -> TreeDecomposition:
    bags = tuple(frozenset(mapping[v] for v in b if v in mapping) for b in td.bags)
    return TreeDecomposition(bags, td.parent)


def from_tree(bags: Sequence, edges: Iterable, root: int = 0) -> TreeDecomposition:
    """Build a rooted decomposition from an undirected tree on bag indices.

    Nodes are renumbered in breadth-first order from `root`.
    """
    n = len(bags)
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    order, par, seen = [root], {root: None}, {root}
    i = 0
    while i < len(order):
        t = order[i]
        i += 1
        for c in sorted(adj[t]):
            if c not in seen:
                seen.add(c)
                par[c] = t
                order.append(c)
    if len(order) != n:
        # forest: hang remaining components under the root
        for s in range(n):
            if s in seen:
                continue
            seen.add(s)
            par[s] = root
            order.append(s)
            j = len(order) - 1
            while j < len(order):
                t = order[j]
                j += 1
                for c in sorted(adj[t]):
                    if c not in seen:
                        seen.add(c)
                        par[c] = t
                        order.append(c)
    new = {old: k for k, old in enumerate(order)}
    return TreeDecomposition(tuple(bags[o] for o in order),
                             tuple(None if par[o] is None else new[par[o]] for o in order))


def elimination_td(g: Graph, order: Sequence) -> TreeDecomposition:
    """Decomposition induced by eliminating vertices in the given order."""
    if not g.vertices:
        return TreeDecomposition((frozenset(),), (None,))
    adj = {v: set(n) for v, n in g.adj.items()}
    pos = {v: i for i, v in enumerate(order)}
    bags, up = [], []
    for v in order:
        nb = adj[v]
        bags.append(frozenset(nb | {v}))
        up.append(min(nb, key=pos.__getitem__) if nb else None)
        for a in nb:
            adj[a] |= nb
            adj[a].discard(a)
            adj[a].discard(v)
        del adj[v]
    return _tree_from_elimination(order, bags, up)


def _tree_from_elimination(order, bags, up) -> TreeDecomposition:
    pos = {v: i for i, v in enumerate(order)}
    n = len(order)
    parent = [pos[u] if u is not None else None for u in up]
    # components end in a node without parent; chain them under the last one
    roots = [i for i in range(n) if parent[i] is None]
    top = roots[-1]
    for r in roots[:-1]:
        parent[r] = top
    edges = [(i, p) for i, p in enumerate(parent) if p is not None]
    return compact(from_tree([bags[i] for i in range(n)], edges, root=top))


def compact(td: TreeDecomposition) -> TreeDecomposition:
    """Contract every tree edge whose one bag is a subset of the other."""
    if len(td.bags) == 1:
        return td
    bags = {t: set(b) for t, b in enumerate(td.bags)}
    adj = {t: set() for t in bags}
    for t, p in enumerate(td.parent):
        if p is not None:
            adj[t].add(p)
            adj[p].add(t)
    changed = True
    while changed:
        changed = False
        for t in sorted(bags):
            for u in sorted(adj[t]):
                if bags[t] <= bags[u]:
                    for w in adj[t]:
                        if w != u:
                            adj[w].discard(t)
                            adj[w].add(u)
                            adj[u].add(w)
                    adj[u].discard(t)
                    del adj[t], bags[t]
                    changed = True
                    break
    ids = sorted(bags)
    idx = {t: i for i, t in enumerate(ids)}
    edges = {(min(idx[a], idx[b]), max(idx[a], idx[b])) for a in ids for b in adj[a]}
    return from_tree([bags[t] for t in ids], sorted(edges), root=0)


def matching_path(td: TreeDecomposition, pairs: dict) -> TreeDecomposition:
    """Interleave a path of bags above every node t listed in `pairs`.

    pairs[t] holds (a, b) with a in the parent's bag and b in bag(t).  The
    path starts from the a's and, pair by pair, adds b and then drops a, so
    each pair shares a bag and no bag exceeds (number of pairs) + 1.
    """
    bags = list(td.bags)
    parent = list(td.parent)
    for t in sorted(pairs):
        up = parent[t]
        cur = frozenset(a for a, _ in pairs[t])
        for a, b in pairs[t]:
            for nb in (cur | {b}, (cur - {a}) | {b}):
                bags.append(nb)
                parent.append(up)
                up = len(bags) - 1
            cur = (cur - {a}) | {b}
        parent[t] = up
    return TreeDecomposition(tuple(bags), tuple(parent))


def min_fill_order(g: Graph) -> list:
    """Greedy min-fill elimination order, ties broken by smallest vertex id."""
    adj = {v: set(n) for v, n in g.adj.items()}

    def fill(v):
        nb = list(adj[v])
        c = 0
        for i, a in enumerate(nb):
            na = adj[a]
            for b in nb[i + 1:]:
                if b not in na:
                    c += 1
        return c

    score = {v: fill(v) for v in adj}
    heap = [(s, v) for v, s in score.items()]
    heapq.heapify(heap)
    order = []
    while heap:
        s, v = heapq.heappop(heap)
        if v not in adj or score[v] != s:
            continue
        order.append(v)
        nb = adj.pop(v)
        del score[v]
        for a in nb:
            adj[a].discard(v)
        for a in nb:
            adj[a] |= nb - {a}
        touched = set(nb)
        for a in nb:
            touched |= adj[a]
        for w in touched:
            if w in adj:
                s2 = fill(w)
                if s2 != score[w]:
                    score[w] = s2
                    heapq.heappush(heap, (s2, w))
    return order


def min_fill(g: Graph) -> TreeDecomposition:
    return elimination_td(g, min_fill_order(g))


def read_gr(text: str) -> Graph:
    n = None
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) < 4 or parts[1] != "tw":
                raise ValueError(f"bad header: {line}")
            n = int(parts[2])
            continue
        if n is None:
            raise ValueError("edge before header")
        u, v = int(parts[0]), int(parts[1])
        edges.append((u, v))
    if n is None:
        raise ValueError("missing 'p tw' header")
    return Graph(tuple(range(1, n + 1)), frozenset(edges))


def write_gr(g: Graph) -> str:
    vs = sorted(g.vertices)
    if vs != list(range(1, len(vs) + 1)):
        raise ValueError("PACE graphs need vertices 1..n")
    lines = [f"p tw {len(vs)} {len(g.edges)}"]
    lines += [f"{u} {v}" for u, v in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def write_td(td: TreeDecomposition, num_vertices: int) -> str:
    maxb = max(len(b) for b in td.bags)
    lines = [f"s td {len(td.bags)} {maxb} {num_vertices}"]
    if isinstance(td, LabeledTreeDecomposition):
        for t, ls in enumerate(td.labels):
            for i in ls:
                lines.append(f"c label {t + 1} {i + 1}")
    for t, b in enumerate(td.bags):
        lines.append(" ".join(["b", str(t + 1)] + [str(v) for v in sorted(b)]))
    for t, p in enumerate(td.parent):
        if p is not None:
            lines.append(f"{p + 1} {t + 1}")
    return "\n".join(lines) + "\n"


def read_td(text: str):
    """Parse PACE .td text; returns (td, num_vertices).  Root is bag 1."""
    header = None
    bags: dict = {}
    edges = []
    labels: dict = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "c":
            if len(parts) == 4 and parts[1] == "label":
                labels.setdefault(int(parts[2]) - 1, []).append(int(parts[3]) - 1)
            continue
        if parts[0] == "s":
            if len(parts) != 5 or parts[1] != "td":
                raise ValueError(f"bad header: {line}")
            header = tuple(int(x) for x in parts[2:])
            continue
        if header is None:
            raise ValueError("content before 's td' header")
        if parts[0] == "b":
            bags[int(parts[1]) - 1] = frozenset(int(x) for x in parts[2:])
        else:
            edges.append((int(parts[0]) - 1, int(parts[1]) - 1))
    if header is None:
        raise ValueError("missing 's td' header")
    nb, _, nv = header
    if sorted(bags) != list(range(nb)):
        raise ValueError("bag ids must be 1..N")
    if len(edges) != nb - 1:
        raise ValueError("decomposition is not a tree")
    order_bags = [bags[i] for i in range(nb)]
    # keep PACE ids when the edges already point parent->child from bag 1
    td = _rooted_keep_ids(order_bags, edges)
    if labels:
        lab = tuple(tuple(labels.get(t, ())) for t in range(nb))
        td = LabeledTreeDecomposition(td.bags, td.parent, lab)
    return td, nv


def _rooted_keep_ids(bags, edges) -> TreeDecomposition:
    n = len(bags)
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    parent = [None] * n
    seen = {0}
    stack = [0]
    while stack:
        t = stack.pop()
        for c in adj[t]:
            if c not in seen:
                seen.add(c)
                parent[c] = t
                stack.append(c)
    if len(seen) != n:
        raise ValueError("decomposition is not connected")
    return TreeDecomposition(tuple(bags), tuple(parent))
