"""Command-line front end: one subcommand per encoder plus solvers and td tools.

Encoders write <out>.<ext>, <out>.td and <out>.report.json, where <out>
defaults to the first input path without its suffix, followed by the
subcommand name.  Exit codes: 0 ok, 1 usage, 2 unreadable input,
3 failed width assertion or invalid decomposition, 4 resource cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import dimacs
from .card import Cmp, encode_cardinality
from .cnf2dnf import cnf_to_dnf
from .common import BoundViolation, ResourceLimit
from .compress import qsat_to_mso, qsat_to_mso_compressed, sat_to_mso_compressed
from .fagin import count_fd_to_sharpsat, fd_to_maxsat, parse_weights, uniform_weights
from .formula import Cnf, Wcnf, primal_graph
from .mso import format_mso, ground_to_qbf, mc_to_sat, parse_mso, parse_structure, write_structure
from .mso.structure import gaifman_graph
from .pmc import pmc_to_sharpsat
from .qelim import DEFAULT_MAX_CLAUSES, eliminate, qsat_to_sat
from .solver import HardUnsat, TooLarge, sat_solve, td_count, td_maxsat, td_sat
from .treedec import cover_vertices, min_fill, read_gr, read_td, validate, write_td

EXIT_USAGE, EXIT_PARSE, EXIT_BOUND, EXIT_RESOURCE = 1, 2, 3, 4


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _color(text, code):
    if os.environ.get("NO_COLOR") or not sys.stderr.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _say(msg):
    print(msg, file=sys.stderr)


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _graph_of(text: str):
    """Graph behind any supported input: PACE .gr, (Q)DIMACS, WCNF or structure."""
    for line in text.splitlines():
        t = line.split()
        if not t or t[0] == "c":
            continue
        if t[:2] == ["p", "tw"]:
            return read_gr(text)
        if t[:2] == ["p", "struct"]:
            return gaifman_graph(parse_structure(text))
        if t[:2] in (["p", "cnf"], ["p", "dnf"]):
            return primal_graph(dimacs.read_qdimacs(text).matrix)
        break
    return primal_graph(dimacs.read_wcnf(text))


def _td_for(source, graph, vertices=()):
    """min-fill for `auto`, else the file's decomposition after validation."""
    if source in (None, "auto"):
        td = min_fill(graph)
    else:
        try:
            td, _ = read_td(_read(source))
        except ValueError as e:
            raise InputError(f"{source}: {e}") from None
        rep = validate(graph, td)
        if not rep.valid:
            raise BoundViolation(f"{source} is not a valid decomposition of the input: {rep}")
    return cover_vertices(td, vertices)


def _lits(text):
    try:
        return [int(x) for x in text.replace(",", " ").split() if x != "0"]
    except ValueError:
        raise UsageError(f"bad literal list {text!r}") from None


def _prefix(args):
    if args.out:
        return args.out
    first = Path(args.inputs[0])
    return str(first.with_suffix("")) + "." + args.cmd


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (set, frozenset, tuple)):
        return sorted(x) if isinstance(x, (set, frozenset)) else list(x)
    return str(x)


class _Run:
    """Collects artifacts and the report for one invocation."""

    def __init__(self, args):
        self.args = args
        self.prefix = _prefix(args)
        self.report = {
            "command": args.cmd,
            "inputs": list(args.inputs),
            "flags": {k: getattr(args, k) for k in sorted(vars(args))
                      if k not in ("cmd", "inputs", "out", "func")},
            "stages": [],
            "artifacts": [],
            "status": "ok",
        }

    def write(self, ext, text):
        path = f"{self.prefix}.{ext}"
        Path(path).write_text(text)
        self.report["artifacts"].append(path)

    def stages(self, log):
        self.report["stages"].extend(log)

    def finish(self, status="ok", error=None):
        self.report["status"] = status
        if error:
            self.report["error"] = error
        self.report["bounds_ok"] = all(s.get("ok", True) for s in self.report["stages"])
        path = f"{self.prefix}.report.json"
        Path(path).write_text(json.dumps(self.report, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _emit_cnf(run, f, td, ext="cnf"):
    if isinstance(f, Wcnf):
        run.write("wcnf", dimacs.write_wcnf(f))
    elif ext == "qdimacs":
        run.write(ext, dimacs.write_qdimacs(f))
    elif ext == "dnf":
        run.write(ext, dimacs.write_dnf(f))
    else:
        run.write(ext, dimacs.write_cnf(f))
    run.write("td", write_td(td, f.num_vars))
    run.report["output"] = {"vars": f.num_vars, "width": td.width}


def _parse(fn, text, what):
    try:
        return fn(text)
    except (ValueError, dimacs.ParseError) as e:
        raise InputError(f"{what}: {e}") from None


def _cnf(path):
    return _parse(dimacs.read_cnf, _read(path), path)


def _qbf(path):
    return _parse(dimacs.read_qdimacs, _read(path), path)


def _mso_inputs(args):
    s = _parse(parse_structure, _read(args.inputs[1]), args.inputs[1])
    phi = _parse(lambda t: parse_mso(t, s.arities), _read(args.inputs[0]), args.inputs[0])
    td = None if args.td in (None, "auto") else _td_for(args.td, gaifman_graph(s), s.universe)
    return phi, s, td


# ------------------------------------------------------------------ commands

def cmd_card(args, run):
    if len(args.inputs) != 1:
        raise UsageError("card takes one CNF file")
    f = _cnf(args.inputs[0])
    X = _lits(args.lits)
    td = _td_for(args.td, primal_graph(f), set(f.variables()) | {abs(l) for l in X})
    red = encode_cardinality(f, X, args.bound, Cmp(args.cmp), td)
    run.stages(red.log)
    _emit_cnf(run, red.formula, red.td)


def cmd_cnf2dnf(args, run):
    f = _cnf(args.inputs[0])
    td = _td_for(args.td, primal_graph(f), f.variables())
    red = cnf_to_dnf(f, td)
    run.stages(red.log)
    _emit_cnf(run, red.formula, red.td, "dnf")


def cmd_eliminate(args, run):
    q = _qbf(args.inputs[0])
    td = _td_for(args.td, primal_graph(q.matrix), range(1, q.num_vars + 1))
    if args.max_width is not None and td.width > args.max_width:
        raise ResourceLimit(f"width {td.width} exceeds cap {args.max_width}")
    red = eliminate(q, td, args.max_clauses)
    run.stages(red.log)
    _emit_cnf(run, red.formula, red.td, "qdimacs")


def cmd_qsat2sat(args, run):
    q = _qbf(args.inputs[0])
    td = None if args.td in (None, "auto") else _td_for(args.td, primal_graph(q.matrix))
    red = qsat_to_sat(q, td, max_clauses=args.max_clauses, max_width=args.max_width)
    run.stages(red.log)
    _emit_cnf(run, red.formula, red.td)


def cmd_pmc2sharp(args, run):
    text = _read(args.inputs[0])
    f = _parse(dimacs.read_cnf, text, args.inputs[0])
    X = _lits(args.show) if args.show else dimacs.read_projection(text)
    if X is None:
        raise UsageError("no projection set: give --show or a `c p show` line")
    td = _td_for(args.td, primal_graph(f), range(1, f.num_vars + 1))
    red = pmc_to_sharpsat(f, X, td, max_clauses=args.max_clauses)
    run.stages(red.log)
    _emit_cnf(run, red.formula, red.td)


def cmd_ground(args, run):
    phi, s, td = _mso_inputs(args)
    red = ground_to_qbf(phi, s, td)
    run.stages(red.log)
    _emit_cnf(run, red.formula, red.td, "qdimacs")


def _maybe_solve(args, run, f):
    if not args.solve:
        return
    ok, _ = sat_solve(f)
    run.report["verdict"] = "SAT" if ok else "UNSAT"
    _say(_color("SATISFIABLE", 32) if ok else _color("UNSATISFIABLE", 31))


def cmd_mc2sat(args, run):
    phi, s, td = _mso_inputs(args)
    red = mc_to_sat(phi, s, td, max_clauses=args.max_clauses, max_width=args.max_width)
    run.stages(red.log)
    _emit_cnf(run, red.formula, red.td)
    _maybe_solve(args, run, red.formula)


def cmd_fd2maxsat(args, run):
    phi, s, td = _mso_inputs(args)
    if args.weights:
        weights = _parse(parse_weights, _read(args.weights), args.weights)
    else:
        weights = uniform_weights(phi, s, Fraction(args.uniform))
    red = fd_to_maxsat(phi, weights, s, td, max_clauses=args.max_clauses, max_width=args.max_width)
    run.stages(red.log)
    run.report["varmap"] = {f"{X}:{u}": v for (X, u), v in sorted(red.varmap.items())}
    _emit_cnf(run, red.formula, red.td)
    if args.solve:
        try:
            opt, _ = td_maxsat(red.formula, red.td)
        except HardUnsat:
            run.report["optimum"] = None
            _say("no solution")
            return
        run.report["optimum"] = str(opt)
        uniform = {w for m in weights.values() for w in m.values()}
        if uniform == {Fraction(-1)}:
            # weight -1 everywhere: the maximum is minus the smallest solution size
            run.report["min_cardinality"] = str(-opt)
        _say(f"optimum {opt}")


def cmd_fdcount2sharp(args, run):
    phi, s, td = _mso_inputs(args)
    red = count_fd_to_sharpsat(phi, s, td, max_clauses=args.max_clauses, max_width=args.max_width)
    run.stages(red.log)
    run.report["varmap"] = {f"{X}:{u}": v for (X, u), v in sorted(red.varmap.items())}
    _emit_cnf(run, red.formula, red.td)
    if args.solve:
        n = td_count(red.formula, red.td)
        run.report["count"] = n
        _say(f"count {n}")


def cmd_compress(args, run):
    text = _read(args.inputs[0])
    q = _parse(dimacs.read_qdimacs, text, args.inputs[0])
    td = None if args.td in (None, "auto") else _td_for(args.td, primal_graph(q.matrix))
    quantified = len(q.prefix) > 1 or (q.prefix and q.prefix[0].kind != "e")
    if args.plain:
        inst = qsat_to_mso(q, td)
    elif quantified:
        inst = qsat_to_mso_compressed(q, td, args.group_size)
    else:
        inst = sat_to_mso_compressed(q.matrix, td, args.group_size)
    run.stages(inst.log)
    run.write("struct", write_structure(inst.structure))
    run.write("mso", format_mso(inst.formula) + "\n")
    run.write("td", write_td(inst.td, inst.structure.size))
    run.report["output"] = {"elements": inst.structure.size, "width": inst.td.width,
                            "qa": inst.formula.qa, "bs": inst.formula.bs}


def cmd_solve(args, run):
    f = _cnf(args.inputs[0])
    td = _td_for(args.td, primal_graph(f), range(1, f.num_vars + 1))
    ok = td_sat(f, td)
    print("s SATISFIABLE" if ok else "s UNSATISFIABLE")
    return 0


def cmd_count(args, run):
    f = _cnf(args.inputs[0])
    td = _td_for(args.td, primal_graph(f), range(1, f.num_vars + 1))
    print(f"s mc {td_count(f, td)}")
    return 0


def cmd_maxsat(args, run):
    w = _parse(dimacs.read_wcnf, _read(args.inputs[0]), args.inputs[0])
    td = _td_for(args.td, primal_graph(w), range(1, w.num_vars + 1))
    try:
        opt, witness = td_maxsat(w, td)
    except HardUnsat:
        print("s UNSATISFIABLE")
        return 0
    print(f"o {opt}")
    print("v " + " ".join(map(str, witness)) + " 0")
    return 0


def cmd_td(args, run):
    if args.action == "min_fill":
        if len(args.inputs) != 1:
            raise UsageError("td min_fill takes one input")
        g = _parse(_graph_of, _read(args.inputs[0]), args.inputs[0])
        td = min_fill(g)
        n = max(g.vertices, default=0)
        text = write_td(td, n)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        _say(f"width {td.width}")
        return 0
    if len(args.inputs) != 2:
        raise UsageError("td validate takes a graph or formula and a .td file")
    g = _parse(_graph_of, _read(args.inputs[0]), args.inputs[0])
    try:
        td, _ = read_td(_read(args.inputs[1]))
    except ValueError as e:
        raise InputError(f"{args.inputs[1]}: {e}") from None
    rep = validate(g, td)
    if rep.valid:
        print(f"valid width {rep.width}")
        return 0
    print(f"invalid: missing {rep.missing_vertices} disconnected {rep.disconnected_vertices} "
          f"uncovered {rep.uncovered_edges} unknown {rep.unknown_vertices}")
    return EXIT_BOUND


COMMANDS = {
    "ground": (cmd_ground, "MSO sentence + structure -> QDIMACS", 2),
    "mc2sat": (cmd_mc2sat, "MSO sentence + structure -> CNF", 2),
    "fd2maxsat": (cmd_fd2maxsat, "Fagin optimization -> WCNF", 2),
    "fdcount2sharp": (cmd_fdcount2sharp, "Fagin counting -> CNF for #SAT", 2),
    "qsat2sat": (cmd_qsat2sat, "QDIMACS -> CNF by eliminating every block", 1),
    "eliminate": (cmd_eliminate, "QDIMACS -> QDIMACS with the innermost block removed", 1),
    "pmc2sharp": (cmd_pmc2sharp, "projected counting -> plain counting", 1),
    "card": (cmd_card, "CNF + cardinality constraint -> CNF", 1),
    "cnf2dnf": (cmd_cnf2dnf, "CNF -> DNF over fresh variables", 1),
    "compress": (cmd_compress, "(Q)DIMACS -> structure + MSO sentence", 1),
    "solve": (cmd_solve, "decide a CNF by tree-decomposition DP", 1),
    "count": (cmd_count, "count models of a CNF by tree-decomposition DP", 1),
    "maxsat": (cmd_maxsat, "optimize a WCNF by tree-decomposition DP", 1),
    "td": (cmd_td, "min_fill or validate decompositions", None),
}

ENCODERS = {"ground", "mc2sat", "fd2maxsat", "fdcount2sharp", "qsat2sat", "eliminate",
            "pmc2sharp", "card", "cnf2dnf", "compress"}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="twground", description="Treewidth-aware grounding and reductions.")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser, required=True)
    for name, (fn, help_text, n_in) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        if name == "td":
            sp.add_argument("action", choices=["min_fill", "validate"])
        if name == "fd2maxsat":
            sp.add_argument("inputs", nargs=2, metavar="INPUT", help="formula.mso structure.struct")
            sp.add_argument("weights", nargs="?", help="lines `w <var> <element> <num>/<den>`")
            sp.add_argument("--uniform", default="1", help="weight for every element (default 1)")
        elif n_in is None:
            sp.add_argument("inputs", nargs="+", metavar="INPUT")
        else:
            sp.add_argument("inputs", nargs=n_in, metavar="INPUT")
        sp.add_argument("-o", "--out", help="output prefix (td: output file)")
        sp.add_argument("--td", default="auto", help="`auto` (min-fill) or a PACE .td file")
        sp.add_argument("--max-width", type=int, default=None)
        sp.add_argument("--max-clauses", type=int, default=DEFAULT_MAX_CLAUSES)
        sp.add_argument("--seed", type=int, default=0, help="recorded only; encoders are deterministic")
        if name == "card":
            sp.add_argument("--lits", required=True, help="literals of X, e.g. 1,-2,3")
            sp.add_argument("--bound", type=int, required=True)
            sp.add_argument("--cmp", choices=["le", "eq", "ge"], default="le")
        if name == "pmc2sharp":
            sp.add_argument("--show", help="projection variables (default: `c p show` line)")
        if name == "compress":
            sp.add_argument("--group-size", type=int, default=1)
            sp.add_argument("--plain", action="store_true", help="one element per variable, no grouping")
        if name in ("mc2sat", "fd2maxsat", "fdcount2sharp"):
            sp.add_argument("--solve", action="store_true", help="also solve the output")
        sp.set_defaults(func=fn)
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "compress" and args.group_size < 1:
        _say("twground compress: error: --group-size must be at least 1")
        return EXIT_USAGE
    enc = args.cmd in ENCODERS
    rec = _Run(args) if enc else None
    code, status, err = 0, "ok", None
    try:
        out = args.func(args, rec)
        code = out or 0
    except UsageError as e:
        return _fail(EXIT_USAGE, str(e))
    except InputError as e:
        code, status, err = EXIT_PARSE, "input_error", str(e)
    except BoundViolation as e:
        code, status, err = EXIT_BOUND, "bound_violation", str(e)
    except (ResourceLimit, TooLarge) as e:
        code, status, err = EXIT_RESOURCE, "resource_limit", str(e)
    except ValueError as e:
        # semantic input problems: vocabulary, arity, uncovered clauses
        code, status, err = EXIT_PARSE, "input_error", str(e)
    if err:
        _fail(code, err)
    if enc:
        rec.finish(status, err)
        if not err:
            _say(_color("ok", 32) + f" {rec.prefix}.report.json")
    return code


def _fail(code, msg):
    _say(_color("error", 31) + f": {msg}")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
