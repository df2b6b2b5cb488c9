"""System-description language parser, subcommand dispatch, and report
emission for the ``involutor`` command.

Grammar (eq coefficients are rational expressions in the independents)::

    system NAME {
      indep: x1 x2 x3;
      dep: u1 u2;
      eq: d(u1,1,2) - x2^2*d(u2,3) + u2 = 0;
    }

Derivative terms repeat axis indices for higher derivatives.  ``#`` starts
a comment.  Exit codes: 0 success, 1 computation error, 2 usage error,
3 invariant violation.  The environment variable INVOLUTOR_BUDGET overrides
the prolongation/retry headroom.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .errors import InvariantViolationError, InvolutorError, MalformedInputError
from .geometry import (
    ConstMetric,
    make_conformal_killing,
    make_einstein,
    make_killing,
)
from .involution import complete
from .jets import JetSystem, LinForm, coord_key
from .kernel import RatFunc, mi_len, mi_str
from .ore import DiffOp, OpMatrix

JSON_SCHEMA_VERSION = "1"


class ParseError(MalformedInputError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_PUNCT = ("{", "}", "(", ")", ",", ";", ":", "=", "+", "-", "*", "/", "^")


@dataclass
class Token:
    kind: str       # ident | number | punct | end
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    out = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c in _PUNCT:
            out.append(Token("punct", c, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    out.append(Token("end", "", line, col))
    return out


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

@dataclass
class SystemFile:
    name: str
    indep: list[str]
    dep: list[str]
    equations: list[LinForm]

    @property
    def n(self) -> int:
        return len(self.indep)

    @property
    def m(self) -> int:
        return len(self.dep)

    def jet_system(self) -> JetSystem:
        return JetSystem(self.n, self.m, self.equations)

    def opmatrix(self) -> OpMatrix:
        return _forms_to_opmatrix(self.n, self.m, self.equations)


def _forms_to_opmatrix(n: int, m: int, forms: Sequence[LinForm]) -> OpMatrix:
    rows = []
    for f in forms:
        cols: dict[int, dict] = {}
        for (k, mu), c in f.terms.items():
            cols.setdefault(k, {})[mu] = c
        rows.append([DiffOp(n, cols.get(k)) for k in range(m)])
    if not rows:
        return OpMatrix.zero(n, 0, m)
    return OpMatrix.from_rows(n, m, rows)


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.indep: list[str] = []
        self.dep: list[str] = []

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t

    def expect_ident(self) -> Token:
        t = self.next()
        if t.kind != "ident":
            raise ParseError(f"expected identifier, found {t.text!r}", t.line, t.col)
        return t

    # -- grammar -------------------------------------------------------------

    def parse_system(self) -> SystemFile:
        kw = self.expect_ident()
        if kw.text != "system":
            raise ParseError("input must start with 'system'", kw.line, kw.col)
        name = self.expect_ident().text
        self.expect("{")
        equations: list[LinForm] = []
        while True:
            t = self.peek()
            if t.text == "}":
                self.next()
                break
            key = self.expect_ident()
            self.expect(":")
            if key.text == "indep":
                while self.peek().kind == "ident":
                    self.indep.append(self.next().text)
                self.expect(";")
            elif key.text == "dep":
                while self.peek().kind == "ident":
                    self.dep.append(self.next().text)
                self.expect(";")
            elif key.text == "eq":
                if not self.indep or not self.dep:
                    raise ParseError("declare indep and dep before equations",
                                     key.line, key.col)
                equations.append(self.parse_equation())
            else:
                raise ParseError(f"unknown section {key.text!r}", key.line, key.col)
        t = self.next()
        if t.kind != "end":
            raise ParseError("trailing input after system block", t.line, t.col)
        return SystemFile(name, self.indep, self.dep, equations)

    def parse_equation(self) -> LinForm:
        coeff, linear = self.parse_expr()
        t = self.expect("=")
        z = self.next()
        if z.text != "0":
            raise ParseError("right-hand side must be 0", z.line, z.col)
        self.expect(";")
        if not coeff.is_zero():
            raise ParseError("equation has a coefficient-only (inhomogeneous) term",
                             t.line, t.col)
        n = len(self.indep)
        f = LinForm(n)
        for coord, c in linear.items():
            f = f.axpy(RatFunc.const(n, 1), LinForm(n, {coord: c}))
        return f

    # values are (pure coefficient, linear part over (dep index, multi-index))
    def parse_expr(self):
        coeff, linear = self.parse_term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            c2, l2 = self.parse_term()
            if op == "-":
                c2 = -c2
                l2 = {k: -v for k, v in l2.items()}
            coeff = coeff + c2
            for k, v in l2.items():
                s = linear.get(k)
                s = v if s is None else s + v
                if s.is_zero():
                    linear.pop(k, None)
                else:
                    linear[k] = s
        return coeff, linear

    def parse_term(self):
        coeff, linear = self.parse_factor()
        while self.peek().text in ("*", "/"):
            op = self.next()
            c2, l2 = self.parse_factor()
            if op.text == "*":
                if linear and l2:
                    raise ParseError("nonlinear product of dependents",
                                     op.line, op.col)
                if l2:
                    coeff, linear = c2, {k: coeff * v for k, v in l2.items()}
                    continue
                coeff = coeff * c2
                linear = {k: c2 * v for k, v in linear.items()}
            else:
                if l2:
                    raise ParseError("division by a dependent", op.line, op.col)
                if c2.is_zero():
                    raise ParseError("division by zero", op.line, op.col)
                coeff = coeff / c2
                linear = {k: v / c2 for k, v in linear.items()}
        return coeff, linear

    def parse_factor(self):
        n = len(self.indep)
        t = self.next()
        neg = False
        while t.text in ("+", "-"):
            if t.text == "-":
                neg = not neg
            t = self.next()
        if t.text == "(":
            coeff, linear = self.parse_expr()
            self.expect(")")
        elif t.kind == "number":
            coeff, linear = RatFunc.const(n, int(t.text)), {}
        elif t.kind == "ident" and t.text == "d":
            coeff, linear = self.parse_derivative()
        elif t.kind == "ident":
            coeff, linear = self.parse_symbol(t)
        else:
            raise ParseError(f"unexpected token {t.text!r}", t.line, t.col)
        if self.peek().text == "^":
            op = self.next()
            e = self.next()
            if e.kind != "number":
                raise ParseError("exponent must be a number", e.line, e.col)
            if linear:
                raise ParseError("cannot raise a dependent to a power",
                                 op.line, op.col)
            coeff = _rf_pow(coeff, int(e.text))
        if neg:
            coeff = -coeff
            linear = {k: -v for k, v in linear.items()}
        return coeff, linear

    def parse_symbol(self, t: Token):
        n = len(self.indep)
        if t.text in self.indep:
            return RatFunc.var(n, self.indep.index(t.text) + 1), {}
        if t.text in self.dep:
            k = self.dep.index(t.text)
            return RatFunc.const(n, 0), {(k, (0,) * n): RatFunc.const(n, 1)}
        raise ParseError(f"undeclared symbol {t.text!r}", t.line, t.col)

    def parse_derivative(self):
        n = len(self.indep)
        self.expect("(")
        dep = self.expect_ident()
        if dep.text not in self.dep:
            raise ParseError(f"undeclared dependent {dep.text!r}", dep.line, dep.col)
        k = self.dep.index(dep.text)
        mu = [0] * n
        while self.peek().text == ",":
            self.next()
            ax = self.next()
            if ax.kind != "number":
                raise ParseError("axis index expected", ax.line, ax.col)
            i = int(ax.text)
            if not 1 <= i <= n:
                raise ParseError(f"axis {i} out of range 1..{n}", ax.line, ax.col)
            mu[i - 1] += 1
        self.expect(")")
        if not sum(mu):
            raise ParseError("derivative needs at least one axis",
                             dep.line, dep.col)
        return RatFunc.const(n, 0), {(k, tuple(mu)): RatFunc.const(n, 1)}


def _rf_pow(c: RatFunc, e: int) -> RatFunc:
    out = RatFunc.const(c.n, 1)
    for _ in range(e):
        out = out * c
    return out


def parse_system(text: str) -> SystemFile:
    return _Parser(text).parse_system()


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def render_system(name: str, D: OpMatrix, indep: Optional[Sequence[str]] = None,
                  dep: Optional[Sequence[str]] = None) -> str:
    n, m = D.n, D.m
    indep = list(indep) if indep else [f"x{i + 1}" for i in range(n)]
    dep = list(dep) if dep else [f"u{k + 1}" for k in range(m)]
    lines = [f"system {name} {{",
             "  indep: " + " ".join(indep) + ";",
             "  dep: " + " ".join(dep) + ";"]
    for row in D.rows:
        parts = []
        for k, op in enumerate(row):
            for mu in sorted(op.terms, key=lambda mm: (mi_len(mm), mm), reverse=True):
                c = op.terms[mu]
                if mi_len(mu):
                    axes = ",".join(str(i + 1) for i, p in enumerate(mu) for _ in range(p))
                    atom = f"d({dep[k]},{axes})"
                else:
                    atom = dep[k]
                cs = str(c)
                if cs == "1":
                    parts.append("+ " + atom)
                elif cs == "-1":
                    parts.append("- " + atom)
                else:
                    sign = "+"
                    if cs.startswith("-"):
                        sign, cs = "-", cs[1:]
                    if "+" in cs or "-" in cs[1:]:
                        cs = f"({cs})"
                    parts.append(f"{sign} {cs}*{atom}")
        if not parts:
            continue
        expr = " ".join(parts)
        if expr.startswith("+ "):
            expr = expr[2:]
        elif expr.startswith("- "):
            expr = "-" + expr[2:]
        lines.append(f"  eq: {expr} = 0;")
    lines.append("}")
    return "\n".join(lines)


def _op_entry_json(op: DiffOp) -> dict:
    out = {}
    for mu in sorted(op.terms, key=lambda mm: (mi_len(mm), mm)):
        key = mi_str(mu) if mi_len(mu) else "0"
        out[key] = str(op.terms[mu])
    return out


def _opmatrix_json(D: OpMatrix) -> list[list[dict]]:
    return [[_op_entry_json(e) for e in row] for row in D.rows]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _load_operator(args) -> tuple[OpMatrix, str]:
    if getattr(args, "gen", None):
        n = args.n
        if n is None:
            raise MalformedInputError("--gen requires --n")
        metric = (ConstMetric.minkowski(n) if args.metric == "minkowski"
                  else ConstMetric.euclidean(n))
        maker = {"killing": make_killing,
                 "conformal-killing": make_conformal_killing,
                 "einstein": make_einstein}[args.gen]
        D = maker(metric)
        src = f"gen:{args.gen}:n={n}:metric={args.metric}"
        return D, src
    if not getattr(args, "file", None):
        raise MalformedInputError("an input file or --gen is required")
    with open(args.file, "r", encoding="utf-8") as fh:
        text = fh.read()
    sf = parse_system(text)
    return sf.opmatrix(), text


def _input_hash(src: str) -> str:
    return hashlib.sha256(src.encode()).hexdigest()[:16]


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(human)


def _board_json(sol) -> list[int]:
    return [r.cls for r in sol.board()]


def _characters_json(ch) -> dict:
    return {"q": ch.q, "beta": list(ch.beta), "alpha": list(ch.alpha),
            "involutive": ch.involutive}


def cmd_complete(args) -> int:
    D, src = _load_operator(args)
    res = complete(JetSystem.from_opmatrix(D))
    sol = res.involutive
    ch = sol.characters(involutive=True)
    payload = {
        "version": JSON_SCHEMA_VERSION,
        "command": "complete",
        "input_hash": _input_hash(src),
        "order": res.order,
        "formally_integrable": res.formally_integrable,
        "change": [[str(v) for v in row] for row in res.change],
        "boards": _board_json(sol),
        "characters": _characters_json(ch),
        "operators": _opmatrix_json(sol.to_opmatrix()),
        "dims": [len(sol.eqs)],
        "orders": [res.order],
    }
    lines = [f"completion order: {res.order}",
             f"formally integrable: {res.formally_integrable}",
             f"equations: {len(sol.eqs)}"]
    if not res.is_identity_change:
        lines.append("coordinate change rows: "
                     + "; ".join(",".join(str(v) for v in row) for row in res.change))
    lines.append("board:")
    lines.append(sol.render_board())
    lines.append(f"characters beta: {list(ch.beta)} alpha: {list(ch.alpha)}")
    lines.append("note: ranks are taken over the rational-function field; "
                 "pointwise rank drops are out of scope")
    for f in sol.eqs:
        lines.append("  " + f.render())
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_cc(args) -> int:
    from .sequences import compatibility_conditions
    D, src = _load_operator(args)
    cc = compatibility_conditions(D)
    sol = JetSystem.from_opmatrix(cc).autoreduce()
    payload = {
        "version": JSON_SCHEMA_VERSION,
        "command": "cc",
        "input_hash": _input_hash(src),
        "dims": [cc.p],
        "orders": [cc.order()] if cc.p else [],
        "boards": _board_json(sol),
        "operators": _opmatrix_json(cc),
    }
    lines = [f"compatibility conditions: {cc.p} of order {cc.order()}"]
    names = [f"nu{i + 1}" for i in range(cc.m)]
    for f in sol.eqs:
        lines.append("  " + f.render(names))
    lines.append("board:")
    lines.append(sol.render_board())
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_sequence(args) -> int:
    from .sequences import euler_check, janet_sequence
    D, src = _load_operator(args)
    if args.complete_first:
        res = complete(JetSystem.from_opmatrix(D))
        D = res.involutive.to_opmatrix()
    rep = janet_sequence(D, length=args.length)
    verdict = euler_check(rep)
    payload = {
        "version": JSON_SCHEMA_VERSION,
        "command": "sequence",
        "input_hash": _input_hash(src),
        "dims": rep.dims,
        "orders": rep.orders,
        "euler": {"janet_sum": verdict.janet_sum, "beta": verdict.beta,
                  "spencer_sum": verdict.spencer_sum, "alpha": verdict.alpha},
        "strictly_exact": rep.strictly_exact,
        "operators": _opmatrix_json(rep.operators[-1]),
    }
    human = (f"dims: {rep.dims}\norders: {rep.orders}\n"
             f"euler: {verdict.janet_sum} = beta {verdict.beta}; "
             f"spencer {verdict.spencer_sum} = alpha {verdict.alpha}")
    _emit(args, payload, human)
    return 0


def cmd_adjoint(args) -> int:
    D, src = _load_operator(args)
    A = D.adjoint()
    payload = {
        "version": JSON_SCHEMA_VERSION,
        "command": "adjoint",
        "input_hash": _input_hash(src),
        "dims": [A.p, A.m],
        "orders": [A.order()],
        "operators": _opmatrix_json(A),
    }
    _emit(args, payload, render_system("adjoint", A))
    return 0


def cmd_paramtest(args) -> int:
    from .duality import double_duality_test
    D, src = _load_operator(args)
    rep = double_duality_test(D)
    torsion = [{"residue": g.residue.render(),
                "annihilator": str(g.annihilator)} for g in rep.torsion]
    payload = {
        "version": JSON_SCHEMA_VERSION,
        "command": "paramtest",
        "input_hash": _input_hash(src),
        "verdict": "parametrizable" if rep.parametrizable else "not-parametrizable",
        "dims": [rep.candidate.p, rep.candidate.m],
        "orders": [rep.candidate.order()],
        "rank": rep.rank_operator,
        "torsion": torsion,
        "operators": _opmatrix_json(rep.candidate),
        "cc_rows": rep.cc_of_candidate.p,
        "cc_order": rep.cc_of_candidate.order(),
    }
    lines = [f"verdict: {payload['verdict']}",
             f"rank of presented module: {rep.rank_operator}",
             f"candidate parametrization: {rep.candidate.p} rows, "
             f"{rep.candidate.m} potentials, order {rep.candidate.order()}"]
    if rep.torsion:
        lines.append("torsion generators:")
        for g in rep.torsion:
            lines.append(f"  {g.residue.render()}   [annihilated by {g.annihilator}]")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_minparam(args) -> int:
    from .duality import minimal_parametrizations
    D, src = _load_operator(args)
    found = minimal_parametrizations(D, stop_at=args.count)
    payload = {
        "version": JSON_SCHEMA_VERSION,
        "command": "minparam",
        "input_hash": _input_hash(src),
        "dims": [f.operator.m for f in found],
        "orders": [f.operator.order() for f in found],
        "columns": [list(f.columns) for f in found],
        "operators": _opmatrix_json(found[0].operator) if found else [],
    }
    lines = []
    for f in found:
        lines.append(f"columns {f.columns}: {f.operator.m} potentials, "
                     f"order {f.operator.order()}")
        lines.append(render_system("minimal", f.operator))
    _emit(args, payload, "\n".join(lines) if lines else "none found")
    return 0


def cmd_cohomology(args) -> int:
    from .delta import cohomology
    D, src = _load_operator(args)
    S = JetSystem.from_opmatrix(D)
    rep = cohomology(S, args.form, args.order)
    cells = {f"s={s},r={r}": {"dim": c.dim_total, "B": c.dim_B,
                              "Z": c.dim_Z, "H": c.dim_H}
             for (s, r), c in rep.cells.items()}
    payload = {
        "version": JSON_SCHEMA_VERSION,
        "command": "cohomology",
        "input_hash": _input_hash(src),
        "q": rep.q,
        "g_dims": {str(r): d for r, d in rep.g_dims.items() if r >= 0},
        "cells": cells,
        "dims": [rep.g_dims.get(r, 0) for r in range(args.order + 1)],
        "orders": [],
    }
    lines = [f"symbol dims g_(q+r): "
             f"{[rep.g_dims.get(r) for r in range(args.order + 1)]}"]
    for (s, r), c in sorted(rep.cells.items()):
        lines.append(f"  s={s} r={r}: dim={c.dim_total} B={c.dim_B} "
                     f"Z={c.dim_Z} H={c.dim_H}")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_rank(args) -> int:
    from .duality import rank
    D, src = _load_operator(args)
    r = rank(D)
    payload = {
        "version": JSON_SCHEMA_VERSION,
        "command": "rank",
        "input_hash": _input_hash(src),
        "rank": r,
        "dims": [r],
        "orders": [],
    }
    _emit(args, payload, f"differential rank: {r}")
    return 0


def cmd_sections(args) -> int:
    from .inverse_systems import modular_equation, section_basis
    D, src = _load_operator(args)
    S = JetSystem.from_opmatrix(D)
    basis = section_basis(S, args.order)
    payload = {
        "version": JSON_SCHEMA_VERSION,
        "command": "sections",
        "input_hash": _input_hash(src),
        "dims": [len(basis)],
        "orders": [args.order],
        "modular_equations": [modular_equation(f) for f in basis],
    }
    lines = [f"sections at order {args.order}: {len(basis)}"]
    for f in basis:
        lines.append("  E == " + modular_equation(f) + " = 0")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_reduce(args) -> int:
    from .sequences import ModuleBasis
    D, src = _load_operator(args)
    with open(args.by, "r", encoding="utf-8") as fh:
        by_text = fh.read()
    byop = parse_system(by_text).opmatrix()
    mb = ModuleBasis(byop)
    rows_out = []
    lines = []
    for i, row in enumerate(D.rows):
        rem, cert = mb.reduce_row(row)
        rows_out.append({"remainder": rem.render(),
                         "zero": rem.is_zero(),
                         "certificate": cert.render()})
        lines.append(f"row {i}: remainder {rem.render()}")
    payload = {
        "version": JSON_SCHEMA_VERSION,
        "command": "reduce",
        "input_hash": _input_hash(src + by_text),
        "rows": rows_out,
        "dims": [len(rows_out)],
        "orders": [],
    }
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_gen(args) -> int:
    D, src = _load_operator(args)
    payload = {
        "version": JSON_SCHEMA_VERSION,
        "command": "gen",
        "input_hash": _input_hash(src),
        "dims": [D.p, D.m],
        "orders": [D.order()],
        "operators": _opmatrix_json(D),
    }
    name = f"{args.gen.replace('-', '_')}_n{args.n}"
    _emit(args, payload, render_system(name, D))
    return 0


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _add_source_args(p, gen_required=False):
    if not gen_required:
        p.add_argument("file", nargs="?", help="system description file")
    p.add_argument("--gen", choices=["killing", "conformal-killing", "einstein"],
                   help="use a built-in generator instead of a file")
    p.add_argument("--n", type=int, help="dimension for --gen")
    p.add_argument("--metric", choices=["euclidean", "minkowski"],
                   default="euclidean")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="involutor",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complete", help="involutive completion")
    _add_source_args(p)
    p.set_defaults(fn=cmd_complete)

    p = sub.add_parser("cc", help="generating compatibility conditions")
    _add_source_args(p)
    p.set_defaults(fn=cmd_cc)

    p = sub.add_parser("sequence", help="iterate compatibility conditions")
    _add_source_args(p)
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--complete-first", action="store_true",
                   help="complete the system before building the sequence")
    p.set_defaults(fn=cmd_sequence)

    p = sub.add_parser("adjoint", help="formal adjoint")
    _add_source_args(p)
    p.set_defaults(fn=cmd_adjoint)

    p = sub.add_parser("paramtest", help="double-duality parametrizability test")
    _add_source_args(p)
    p.set_defaults(fn=cmd_paramtest)

    p = sub.add_parser("minparam", help="minimal parametrizations")
    _add_source_args(p)
    p.add_argument("--count", type=int, default=None,
                   help="stop after this many minimal parametrizations")
    p.set_defaults(fn=cmd_minparam)

    p = sub.add_parser("cohomology", help="delta-cohomology dimensions")
    _add_source_args(p)
    p.add_argument("--form", type=int, default=2, help="max form degree s")
    p.add_argument("--order", type=int, default=2, help="max prolongation r")
    p.set_defaults(fn=cmd_cohomology)

    p = sub.add_parser("rank", help="differential rank of the presented module")
    _add_source_args(p)
    p.set_defaults(fn=cmd_rank)

    p = sub.add_parser("sections", help="inverse-system sections")
    _add_source_args(p)
    p.add_argument("--order", type=int, required=True)
    p.set_defaults(fn=cmd_sections)

    p = sub.add_parser("reduce", help="normal forms modulo a tracked basis")
    _add_source_args(p)
    p.add_argument("--by", required=True, help="system file for the basis")
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("gen", help="emit a built-in generator as a system file")
    p.add_argument("gen", choices=["killing", "conformal-killing", "einstein"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--metric", choices=["euclidean", "minkowski"],
                   default="euclidean")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_gen)

    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except InvariantViolationError as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 3
    except (MalformedInputError, FileNotFoundError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except InvolutorError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
