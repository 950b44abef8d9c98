"""Concrete syntax for MSO formulas.

    formula := decl* quant* '.' expr
    decl    := 'free2' NAME (',' NAME)* ';'
    quant   := ('exists' | 'forall' | 'exists2' | 'forall2') NAME (','? NAME)*
    expr    := imp ('<->' imp)*
    imp     := disj ('->' imp)?
    disj    := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | '(' expr ')' | 'true' | 'false' | atom
    atom    := NAME '(' NAME (',' NAME)* ')' | NAME '=' NAME | NAME '!=' NAME

`#` starts a comment.  The matrix may be any propositional combination of
atoms; it is converted to CNF by distribution.  A unary symbol that is
neither a declared set variable nor in the supplied vocabulary becomes a
free set variable.
"""

from __future__ import annotations

import re
from itertools import product

from ..formula import EXISTS, FORALL
from .syntax import (ArityError, Atom, FIRST, MsoError, MsoFormula, Quant, SECOND, UnboundVariable,
                     VocabularyMismatch)


class MsoSyntaxError(MsoError):
    def __init__(self, msg, line, col):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


_TOKEN = re.compile(r"\s*(?:(#[^\n]*)|(<->|->|!=|[()!&|,.;=])|([A-Za-z_][A-Za-z0-9_']*))")
_KEYWORDS = {"exists": (EXISTS, FIRST), "forall": (FORALL, FIRST),
             "exists2": (EXISTS, SECOND), "forall2": (FORALL, SECOND)}


def _tokenize(text):
    toks = []
    pos = 0
    line_starts = [0] + [m.end() for m in re.finditer(r"\n", text)]

    def where(p):
        ln = max(i for i, s in enumerate(line_starts) if s <= p)
        return ln + 1, p - line_starts[ln] + 1

    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            ws = len(text[pos:]) - len(text[pos:].lstrip())
            raise MsoSyntaxError(f"unexpected character {text[pos + ws]!r}", *where(pos + ws))
        if m.group(1) is None:
            start = m.start(2) if m.group(2) else m.start(3)
            toks.append((m.group(2) or m.group(3), *where(start)))
        pos = m.end()
    toks.append(("<eof>", *where(len(text))))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def take(self, want=None):
        tok, ln, col = self.toks[self.i]
        if want is not None and tok != want:
            raise MsoSyntaxError(f"expected {want!r}, found {tok!r}", ln, col)
        self.i += 1
        return tok

    def error(self, msg):
        _, ln, col = self.toks[self.i]
        raise MsoSyntaxError(msg, ln, col)

    def name(self):
        tok = self.peek()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok) or tok in _KEYWORDS or tok in (
                "free2", "true", "false"):
            self.error(f"expected a name, found {tok!r}")
        return self.take()

    def names(self):
        out = [self.name()]
        while True:
            if self.peek() == ",":
                self.take()
                out.append(self.name())
            elif re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", self.peek()) and self.peek() not in _KEYWORDS \
                    and self.peek() not in ("free2", "true", "false") and self.toks[self.i + 1][0] in (
                    ",", ".", "exists", "forall", "exists2", "forall2") and self.prefix_mode:
                out.append(self.name())
            else:
                return out

    def header(self):
        self.prefix_mode = True
        free, prefix = [], []
        while self.peek() == "free2":
            self.take()
            free += self.names()
            if self.peek() == ";":
                self.take()
        while self.peek() in _KEYWORDS:
            kind, order = _KEYWORDS[self.take()]
            prefix += [Quant(kind, v, order) for v in self.names()]
        if prefix or self.peek() == ".":
            self.take(".")
        self.prefix_mode = False
        return free, prefix

    def expr(self):
        left = self.imp()
        while self.peek() == "<->":
            self.take()
            right = self.imp()
            left = ("and", [("or", [("not", left), right]), ("or", [left, ("not", right)])])
        return left

    def imp(self):
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return ("or", [("not", left), self.imp()])
        return left

    def disj(self):
        parts = [self.conj()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else ("or", parts)

    def conj(self):
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else ("and", parts)

    def unary(self):
        tok = self.peek()
        if tok == "!":
            self.take()
            return ("not", self.unary())
        if tok == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if tok in ("true", "false"):
            self.take()
            return ("const", tok == "true")
        _, ln, col = self.toks[self.i]
        n = self.name()
        if self.peek() == "(":
            self.take()
            args = [self.name()]
            while self.peek() == ",":
                self.take()
                args.append(self.name())
            self.take(")")
            return ("atom", ("app", n, tuple(args), ln, col))
        if self.peek() in ("=", "!="):
            op = self.take()
            other = self.name()
            a = ("atom", ("eq", "", (n, other), ln, col))
            return a if op == "=" else ("not", a)
        self.error(f"expected an atom after {n!r}")


def _nnf(e, neg=False):
    tag = e[0]
    if tag == "not":
        return _nnf(e[1], not neg)
    if tag == "const":
        return ("const", e[1] != neg)
    if tag == "atom":
        return ("lit", not neg, e[1])
    sub = [_nnf(x, neg) for x in e[1]]
    if neg:
        tag = "or" if tag == "and" else "and"
    return (tag, sub)


def _cnf(e):
    tag = e[0]
    if tag == "const":
        return [] if e[1] else [()]
    if tag == "lit":
        return [((e[1], e[2]),)]
    parts = [_cnf(x) for x in e[1]]
    if tag == "and":
        return [c for p in parts for c in p]
    out = []
    for pick in product(*parts):
        c = []
        for cl in pick:
            for l in cl:
                if l not in c:
                    c.append(l)
        out.append(tuple(c))
    return out


def _tidy(clauses):
    out, seen = [], set()
    for c in clauses:
        atoms = {}
        taut = False
        lits = []
        for p, a in c:
            if a in atoms and atoms[a] != p:
                taut = True
                break
            if a not in atoms:
                atoms[a] = p
                lits.append((p, a))
        if taut:
            continue
        key = frozenset(lits)
        if key not in seen:
            seen.add(key)
            out.append(tuple(lits))
    return out


def parse_mso(text: str, vocabulary: dict | None = None) -> MsoFormula:
    """Parse a formula; `vocabulary` maps relation names to arities."""
    p = _Parser(text)
    free, prefix = p.header()
    e = p.expr()
    if p.peek() != "<eof>":
        p.error(f"unexpected {p.peek()!r}")
    order = {v: SECOND for v in free}
    for q in prefix:
        if q.var in order:
            raise MsoError(f"variable {q.var} is bound twice")
        order[q.var] = q.order
    voc = dict(vocabulary or {})
    free = list(free)

    def resolve(node):
        kind, n, args, ln, col = node
        if kind == "eq":
            return Atom("eq", "", args)
        if order.get(n) == SECOND:
            if len(args) != 1:
                raise ArityError(f"{ln}:{col}: set variable {n} applied to {len(args)} arguments")
            return Atom("mem", n, args)
        if order.get(n) == FIRST:
            raise MsoError(f"{ln}:{col}: first-order variable {n} used as a predicate")
        if vocabulary is not None and n not in voc:
            if len(args) == 1:
                free.append(n)
                order[n] = SECOND
                return Atom("mem", n, args)
            raise VocabularyMismatch(f"{ln}:{col}: unknown relation {n}")
        if n in voc and voc[n] != len(args):
            raise ArityError(f"{ln}:{col}: {n} has arity {voc[n]}, used with {len(args)}")
        voc.setdefault(n, len(args))
        return Atom("rel", n, args)

    def walk(x):
        if x[0] == "atom":
            return ("atom", resolve(x[1]))
        if x[0] in ("and", "or"):
            return (x[0], [walk(y) for y in x[1]])
        if x[0] == "not":
            return ("not", walk(x[1]))
        return x

    e = walk(e)
    clauses = _tidy(_cnf(_nnf(e)))
    for c in clauses:
        for _, a in c:
            for x in a.args:
                if x not in order:
                    raise UnboundVariable(f"variable {x} in {a} is not bound")
    return MsoFormula(tuple(prefix), tuple(clauses), tuple(free), voc)
