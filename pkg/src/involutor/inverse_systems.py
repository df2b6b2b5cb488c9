"""Macaulay-style inverse systems: truncated sections of the solution
functor, the Spencer operator acting on sections, and modular-equation
rendering.

A section at order q assigns a value in K to every jet coordinate of order
at most q so that every equation of the system (and every prolongation up
to that order) contracts to zero -- no differentiation involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import PreconditionError
from .jets import Coord, Echelon, JetSystem, LinForm, all_coords, coord_key
from .kernel import RatFunc, mi_len, mi_plus1, mi_str, mi_up_to


@dataclass
class Section:
    n: int
    m: int
    order: int
    values: dict[Coord, RatFunc] = field(default_factory=dict)

    def value(self, coord: Coord) -> RatFunc:
        v = self.values.get(coord)
        return v if v is not None else RatFunc.const(self.n, 0)

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values.values())

    def truncate(self, order: int) -> "Section":
        if order > self.order:
            raise PreconditionError("cannot extend a section by truncation")
        vals = {c: v for c, v in self.values.items() if mi_len(c[1]) <= order}
        return Section(self.n, self.m, order, vals)

    def contract(self, form: LinForm) -> RatFunc:
        """Pair the section against a linear form on jet coordinates."""
        s = RatFunc.const(self.n, 0)
        for coord, a in form.terms.items():
            v = self.values.get(coord)
            if v is not None:
                s = s + a * v
        return s


def spencer_apply(f: Section) -> list[Section]:
    """The n components (d_i f)^k_mu = del_i f^k_mu - f^k_{mu+1_i}, each a
    section one order lower; for sections of R_{q+1} they land in R_q."""
    if f.order < 1:
        raise PreconditionError("Spencer operator needs a section of order >= 1")
    out = []
    for i in range(1, f.n + 1):
        vals: dict[Coord, RatFunc] = {}
        for mu in mi_up_to(f.n, f.order - 1):
            for k in range(f.m):
                v = f.value((k, mu)).derive(i) - f.value((k, mi_plus1(mu, i)))
                if not v.is_zero():
                    vals[(k, mu)] = v
        out.append(Section(f.n, f.m, f.order - 1, vals))
    return out


def section_basis(S: JetSystem, q: int) -> list[Section]:
    """K-basis of the sections at order q: one per parametric jet, with the
    principal jets filled in by back-substitution."""
    ech = Echelon(S.n)
    for fset in S.equations:
        gap = q - fset.order()
        if gap < 0:
            continue
        for nu in mi_up_to(S.n, gap):
            ech.add(fset.prolong_mi(nu))
    par = [c for c in all_coords(S.n, S.m, q) if c not in ech.pivots]
    par.sort(key=coord_key, reverse=True)
    one = RatFunc.const(S.n, 1)
    out = []
    for p in par:
        vals = {p: one}
        for row, _ in ech.rows:
            c = row.terms.get(p)
            if c is not None:
                vals[row.leader()] = -c
        out.append(Section(S.n, S.m, q, vals))
    return out


def generating_section(S: JetSystem, depth: Optional[int] = None) -> Section:
    """For finite-type systems: the section dual to the greatest parametric
    jet at saturation, the natural single generator of the inverse system."""
    from .involution import complete
    res = complete(S)
    T = res.involutive.system()
    if depth is None:
        depth = res.order + 4
    basis = section_basis(T, depth)
    if not basis:
        raise PreconditionError("the inverse system is trivial")
    # basis is ordered by parametric jet, greatest first
    return basis[0]


def modular_equation(f: Section, names: Optional[Sequence[str]] = None) -> str:
    """Render sum f^k_mu a^mu_k with nonzero terms only, Macaulay style."""
    terms = [c for c in f.values if not f.values[c].is_zero()]
    if not terms:
        return "0"
    terms.sort(key=coord_key)
    parts = []
    for (k, mu) in terms:
        v = f.values[(k, mu)]
        sub = "" if f.m == 1 else (f"_{names[k]}" if names else f"_{k + 1}")
        base = f"a^{{{mi_str(mu) if mi_len(mu) else '0'}}}{sub}"
        cs = str(v)
        if cs == "1":
            parts.append(base)
        elif cs == "-1":
            parts.append("-" + base)
        else:
            if "+" in cs or cs[1:].count("-") or "/" in cs:
                cs = f"({cs})"
            parts.append(f"{cs}*{base}")
    s = parts[0]
    for p in parts[1:]:
        s += " - " + p[1:] if p.startswith("-") else " + " + p
    return s
