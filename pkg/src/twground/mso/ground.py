"""Grounding MSO model checking over a tree decomposition into QBF.

Every quantified variable V gets one indicator V_u per element u, quantified
like V.  The auxiliary block E' (innermost, existential) holds per node t:

  c^x_t   x is chosen somewhere below t (OR over introduced indicators and
          the children's c^x)
  w^x_t   two or more of c^x_t's inputs are true       (universal x only)
  W^x_t   some w^x below t is true                     (universal x only)
  p^a_t   atom a is witnessed inside bag(t)
  pl^a_t  atom a is witnessed somewhere below t

plus one variable per atom equal to pl^a at the root.  Existential
first-order variables are forced to pick exactly one element by hard
clauses.  A universal one cannot be forced (the opponent would simply
violate the constraint), so every matrix clause is relaxed by
"x picked nothing" or "x picked two or more" instead.
"""

from __future__ import annotations

from ..cnf2dnf import cnf_to_dnf
from ..common import Reduction, check_bound
from ..encode import iff_and, iff_atleast2, iff_dnf_factored, iff_or
from ..formula import Block, Cnf, Dnf, EXISTS, FORALL, Qbf, VarPool, make_qbf
from ..qelim import DEFAULT_MAX_CLAUSES, qsat_to_sat
from ..treedec import InvalidInput, TreeDecomposition, min_fill, normalize, validate
from .structure import RelationalStructure, gaifman_graph
from .syntax import FIRST, MsoError, MsoFormula, VocabularyMismatch


class InvalidTD(InvalidInput):
    pass


def check_vocabulary(phi: MsoFormula, s: RelationalStructure):
    for a in phi.atoms():
        if a.kind != "rel":
            continue
        if a.name not in s.arities:
            raise VocabularyMismatch(f"relation {a.name} is not in the structure")
        if s.arities[a.name] != len(a.args):
            raise VocabularyMismatch(f"{a.name} has arity {s.arities[a.name]} in the structure, "
                                     f"{len(a.args)} in the formula")


def structure_td(s: RelationalStructure, td: TreeDecomposition | None) -> TreeDecomposition:
    """Validated binary decomposition of the Gaifman graph (min-fill if td is None)."""
    g = gaifman_graph(s)
    if td is None:
        td = min_fill(g)
    rep = validate(g, td)
    if not rep.valid:
        raise InvalidTD(f"decomposition is not valid for the structure: {rep}")
    return normalize(td)


def _atom_terms(a, bag, s, ind):
    if a.kind == "eq":
        x, y = a.args
        return [(ind[x][u], ind[y][u]) for u in sorted(bag)]
    if a.kind == "mem":
        X, (x,) = a.name, a.args
        return [(ind[X][u], ind[x][u]) for u in sorted(bag)]
    out = []
    for tup in sorted(s.relations[a.name]):
        if all(u in bag for u in tup):
            out.append(tuple(ind[x][u] for x, u in zip(a.args, tup)))
    return out


def ground_to_qbf(phi: MsoFormula, s: RelationalStructure, td: TreeDecomposition | None = None) -> Reduction:
    """Returns Reduction(qbf, td) with S |= phi iff qbf is valid.

    extra: 'def' (indices of definitional clauses), 'aux' (the E' block),
    'indicators' (var -> element -> id), 'atoms' (atom -> id), 'size'.
    """
    if phi.free_set_vars:
        raise MsoError("formula has free set variables; close it first")
    if s.size < 1:
        raise MsoError("the universe must not be empty")
    check_vocabulary(phi, s)
    k_in = (td.width if td is not None else None)
    std = structure_td(s, td)
    k = std.width if k_in is None else k_in
    n_nodes = len(std.bags)
    kids = std.children
    intro = [sorted(b - (std.bags[std.parent[t]] if t else frozenset())) for t, b in enumerate(std.bags)]

    pool = VarPool(0)
    ind = {}
    for q in phi.prefix:
        ind[q.var] = {u: pool.new() for u in s.universe}
    fo = [q for q in phi.prefix if q.order == FIRST]
    atoms = phi.atoms()
    aux_start = pool.top + 1
    c, w, W, p, pl = {}, {}, {}, {}, {}
    for t in range(n_nodes):
        for q in fo:
            c[q.var, t] = pool.new()
            if q.kind == FORALL:
                w[q.var, t] = pool.new()
                W[q.var, t] = pool.new()
        for a in atoms:
            p[a, t] = pool.new()
            pl[a, t] = pool.new()
    iota = {a: pool.new() for a in atoms}
    aux = list(range(aux_start, pool.top + 1))

    clauses: list = []
    defs: list = []

    def add(cls, definitional):
        start = len(clauses)
        clauses.extend(cls)
        if definitional:
            defs.extend(range(start, len(clauses)))

    for t in std.postorder:
        for q in fo:
            x = q.var
            items = [ind[x][u] for u in intro[t]] + [c[x, ch] for ch in kids[t]]
            add(iff_or(c[x, t], items), True)
            if q.kind == FORALL:
                add(iff_atleast2(w[x, t], items), True)
                add(iff_or(W[x, t], [w[x, t]] + [W[x, ch] for ch in kids[t]]), True)
            else:
                if t == 0:
                    add([(c[x, 0],)], False)
                bag = sorted(std.bags[t])
                add([(-ind[x][u], -ind[x][v]) for i, u in enumerate(bag) for v in bag[i + 1:]], False)
                add([(-ind[x][u], -c[x, ch]) for u in intro[t] for ch in kids[t]], False)
                add([(-c[x, a], -c[x, b]) for i, a in enumerate(kids[t]) for b in kids[t][i + 1:]], False)
        for a in atoms:
            add(iff_dnf_factored(p[a, t], _atom_terms(a, std.bags[t], s, ind)), True)
            add(iff_or(pl[a, t], [p[a, t]] + [pl[a, ch] for ch in kids[t]]), True)
    for a in atoms:
        add(iff_and(iota[a], [pl[a, 0]]), True)
    escape = []
    for q in fo:
        if q.kind == FORALL:
            escape += [-c[q.var, 0], W[q.var, 0]]
    for cl in phi.matrix:
        body = tuple(iota[a] if pos else -iota[a] for pos, a in cl)
        add([body + tuple(escape)], False)

    prefix = [Block(q.kind, tuple(ind[q.var][u] for u in s.universe)) for q in phi.prefix]
    prefix.append(Block(EXISTS, tuple(aux)))
    qbf = make_qbf(prefix, Cnf(pool.top, tuple(clauses)))

    bags = []
    for t, bag in enumerate(std.bags):
        nb = {ind[q.var][u] for q in phi.prefix for u in bag}
        for q in fo:
            for tt in (t,) + kids[t]:
                nb.add(c[q.var, tt])
                if q.kind == FORALL:
                    nb |= {w[q.var, tt], W[q.var, tt]}
        for a in atoms:
            nb |= {p[a, t], pl[a, t]} | {pl[a, ch] for ch in kids[t]}
        if t == 0:
            nb |= set(iota.values())
        bags.append(frozenset(nb))
    out_td = TreeDecomposition(tuple(bags), std.parent)
    bound = (9 + k) * phi.size
    check_bound(out_td.width, bound, "mso grounding")
    log = [{"stage": "ground", "width_in": k, "width_out": out_td.width, "bound": bound,
            "vars": pool.top, "clauses": len(clauses), "ok": True}]
    return Reduction(qbf, out_td, log, extra={
        "def": defs, "aux": aux, "indicators": ind, "atoms": iota, "size": phi.size,
        "innermost": phi.prefix[-1].kind if phi.prefix else None})


def preserve_alternation(q: Qbf, def_part, aux, td: TreeDecomposition | None = None,
                         innermost: str | None = FORALL) -> Reduction:
    """Turn the trailing existential E' block into a universal one.

    Applies when the formula's innermost original quantifier is universal:
    E' is uniquely determined by the definitional clauses, so
    Q... EXISTS E'. def AND rest  ==  Q... FORALL E' F'. NOT def OR dnf(rest),
    with dnf(rest) from the CNF-to-DNF conversion.  Otherwise q is returned
    unchanged.
    """
    aux = set(aux)
    if innermost != FORALL or not q.prefix or set(q.prefix[-1].vars) != aux or isinstance(q.matrix, Dnf):
        return Reduction(q, td, [{"stage": "alternation", "changed": False}])
    if td is None:
        from ..formula import primal_graph
        td = min_fill(primal_graph(q.matrix))
    def_part = set(def_part)
    cl = q.matrix.clauses
    neg_def = [tuple(-l for l in cl[i]) for i in sorted(def_part)]
    rest = Cnf(q.num_vars, tuple(c for i, c in enumerate(cl) if i not in def_part))
    d, dtd = cnf_to_dnf(rest, td)
    fresh = list(range(q.num_vars + 1, d.num_vars + 1))
    terms = tuple(neg_def) + d.terms
    prefix = list(q.prefix[:-1]) + [Block(FORALL, tuple(sorted(aux)) + tuple(fresh))]
    out = make_qbf(prefix, Dnf(d.num_vars, terms))
    log = [{"stage": "alternation", "changed": True, "width_in": td.width, "width_out": dtd.width,
            "bound": td.width + 4, "vars": d.num_vars, "terms": len(terms), "ok": dtd.width <= td.width + 4}]
    return Reduction(out, dtd, log)


def mc_to_sat(phi: MsoFormula, s: RelationalStructure, td: TreeDecomposition | None = None,
              max_clauses: int = DEFAULT_MAX_CLAUSES, max_width: int | None = None, keep_vars=()) -> Reduction:
    """CNF satisfiable iff S |= phi; log holds one entry per stage/round.

    `keep_vars` names outermost set variables whose indicators are reported
    in varmap as (name, element) -> CNF variable.
    """
    g = ground_to_qbf(phi, s, td)
    ext = g.extra
    pa = preserve_alternation(g.formula, ext["def"], ext["aux"], g.td, ext["innermost"])
    keep = [ext["indicators"][X][u] for X in keep_vars for u in s.universe]
    r = qsat_to_sat(pa.formula, pa.td, max_clauses=max_clauses, max_width=max_width, keep=keep)
    varmap = {}
    for X in keep_vars:
        for u in s.universe:
            v = ext["indicators"][X][u]
            if v in r.varmap:
                varmap[X, u] = r.varmap[v]
    log = g.log + pa.log + r.log
    return Reduction(r.formula, r.td, log, varmap=varmap,
                     extra={"rounds": len(r.log), "ground": g, "last_fresh": r.extra["last_fresh"]})
