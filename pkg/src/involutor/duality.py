"""The double-duality test for torsion-freeness / parametrizability,
torsion generators with annihilator certificates, canonical and minimal
parametrizations, and the differential rank of a presented module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InvariantViolationError, PreconditionError
from .involution import complete
from .jets import Echelon, JetSystem, LinForm, coord_key
from .kernel import RatFunc, mi_all, mi_up_to, mi_zero
from .ore import DiffOp, OpMatrix
from .sequences import (
    ModuleBasis,
    _form_to_oprow,
    compatibility_conditions,
)

ANNIHILATOR_ORDER_BUDGET = 4
SUBSET_BUDGET = 512


def rank(D: OpMatrix, max_order: Optional[int] = None) -> int:
    """Differential rank of the module presented by the rows of D: the last
    character of the involutive completion, cross-checked against the
    generic symbol rank of the involutive form."""
    if D.p == 0 or D.is_zero():
        return D.m
    res = complete(JetSystem.from_opmatrix(D), max_order=max_order)
    ch = res.involutive.characters(involutive=True)
    alpha = ch.rank_witness
    sym = res.involutive.to_opmatrix().generic_symbol_rank()
    if D.m - sym != alpha:
        raise InvariantViolationError(
            f"rank disagreement: characters give {alpha}, symbol gives {D.m - sym}")
    return alpha


@dataclass
class TorsionGenerator:
    residue: LinForm            # normal form over jet coordinates of the unknowns
    annihilator: DiffOp         # nonzero operator sending the residue into the module

    def residue_row(self, width: int) -> list[DiffOp]:
        return _form_to_oprow(self.residue, width)


@dataclass
class ParamReport:
    operator: OpMatrix          # D1, the operator under test
    ad_operator: OpMatrix
    cc_of_adjoint: OpMatrix     # B with ad(D) = B in the five-step diagram
    candidate: OpMatrix         # D = ad(B), the canonical parametrization
    cc_of_candidate: OpMatrix   # D1' = CC(D)
    parametrizable: bool
    torsion: list[TorsionGenerator]
    rank_operator: int

    @property
    def parametrization(self) -> Optional[OpMatrix]:
        return self.candidate if self.parametrizable else None


def double_duality_test(D1: OpMatrix, max_order: Optional[int] = None) -> ParamReport:
    """Five steps: ad, CC, ad, CC, then mutual reduction of D1' against D1."""
    adD1 = D1.adjoint()
    B = compatibility_conditions(adD1, max_order=max_order)
    Dcan = B.adjoint()
    D1p = compatibility_conditions(Dcan, max_order=max_order)
    basis1 = ModuleBasis(D1, max_order=max_order)
    extra_rows = [row for row in D1p.rows if not basis1.contains_row(row)]
    ok = not extra_rows
    if ok:
        if not D1.compose(Dcan).is_zero():
            raise InvariantViolationError("positive verdict but D1 o D is nonzero")
        if not ModuleBasis(D1p, max_order=max_order).contains(D1):
            raise InvariantViolationError("candidate CC do not recover the operator")
    torsion = []
    if not ok:
        torsion = _torsion_from_rows(D1, basis1, extra_rows, max_order=max_order)
    return ParamReport(D1, adD1, B, Dcan, D1p, ok, torsion, rank(D1, max_order=max_order))


def _torsion_from_rows(D1: OpMatrix, basis1: ModuleBasis,
                       rows: Sequence[Sequence[DiffOp]],
                       max_order: Optional[int] = None) -> list[TorsionGenerator]:
    residues = []
    for row in rows:
        rem, _ = basis1.reduce_row(row)
        if not rem.is_zero():
            residues.append(rem)
    residues.sort(key=lambda f: (f.order(), coord_key(f.leader()), f.render()))
    # trim inside the quotient: a residue is redundant when it lies in the
    # span of the reduced prolongations of the ones already kept
    top = max(f.order() for f in residues)
    kept: list[LinForm] = []
    span = Echelon(D1.n, reduced=False)
    for rem in residues:
        red, _ = span.reduce(rem)
        if red.is_zero():
            continue
        kept.append(rem)
        row = _form_to_oprow(rem, D1.m)
        for s in range(top - rem.order() + 1):
            for nu in mi_all(D1.n, s):
                prem, _ = basis1.reduce_row(_prolong_row(row, nu, D1.n))
                if not prem.is_zero():
                    span.add(prem)
    out = []
    for g in kept:
        ann = _annihilator(basis1, g, D1.m)
        if ann is None:
            raise InvariantViolationError("claimed torsion residue has no annihilator "
                                          f"within order {ANNIHILATOR_ORDER_BUDGET}")
        out.append(TorsionGenerator(g, ann))
    return out


def _annihilator(basis: ModuleBasis, residue: LinForm, width: int) -> Optional[DiffOp]:
    """Nonzero P with P(residue) in the module, found by linear algebra on
    reduced prolongations of the residue."""
    n = basis.n
    row = _form_to_oprow(residue, width)
    ech = Echelon(n, track=True, reduced=False)
    for s in range(ANNIHILATOR_ORDER_BUDGET + 1):
        for nu in mi_all(n, s):
            prol = _prolong_row(row, nu, n)
            rem, _ = basis.reduce_row(prol)
            marker = LinForm.unit(n, (0, nu))
            red, combo = ech.reduce(rem, marker)
            if red.is_zero():
                # dependency found: combo holds the operator coefficients
                terms = {mu: c for (_, mu), c in combo.terms.items()}
                P = DiffOp(n, terms)
                if not P.is_zero():
                    return P
            else:
                ech.add(red, combo)
    return None


def _prolong_row(row: Sequence[DiffOp], nu, n: int) -> list[DiffOp]:
    d = DiffOp(n, {tuple(nu): RatFunc.const(n, 1)})
    return [d * op for op in row]


def torsion_generators(D1: OpMatrix, max_order: Optional[int] = None) -> list[TorsionGenerator]:
    """Generators of the torsion submodule, each with a certified nonzero
    annihilating operator; empty when the module is torsion-free."""
    rep = double_duality_test(D1, max_order=max_order)
    return rep.torsion


@dataclass
class MinimalParametrization:
    columns: tuple[int, ...]
    operator: OpMatrix


def _restrict_columns(D: OpMatrix, cols: Sequence[int]) -> OpMatrix:
    rows = [[r[c] for c in cols] for r in D.rows]
    return OpMatrix(D.n, D.p, len(cols), rows)


def modules_equal(A: OpMatrix, B: OpMatrix, max_order: Optional[int] = None) -> bool:
    """Mutual reduction: the rows of each generate the rows of the other."""
    if A.m != B.m:
        return False
    return (ModuleBasis(A, max_order=max_order).contains(B)
            and ModuleBasis(B, max_order=max_order).contains(A))


def parametrization_check(D1: OpMatrix, cand: OpMatrix,
                          max_order: Optional[int] = None) -> bool:
    """cand parametrizes D1 iff CC(cand) and D1 generate the same module."""
    cc = compatibility_conditions(cand, max_order=max_order)
    return modules_equal(cc, D1, max_order=max_order)


def minimal_parametrizations(D1: OpMatrix, canonical: Optional[OpMatrix] = None,
                             subset_budget: int = SUBSET_BUDGET,
                             max_order: Optional[int] = None,
                             stop_at: Optional[int] = None) -> list[MinimalParametrization]:
    """Column-subset restrictions of the canonical parametrization with
    exactly rk_D(M) potentials whose CC still generate D1."""
    if canonical is None:
        rep = double_duality_test(D1, max_order=max_order)
        if not rep.parametrizable:
            raise PreconditionError("operator is not parametrizable")
        canonical = rep.candidate
    rk = rank(D1, max_order=max_order)
    found = []
    tried = 0
    for cols in itertools.combinations(range(canonical.m), rk):
        if tried >= subset_budget:
            break
        tried += 1
        cand = _restrict_columns(canonical, cols)
        if cand.is_zero():
            continue
        if parametrization_check(D1, cand, max_order=max_order):
            found.append(MinimalParametrization(cols, cand))
            if stop_at is not None and len(found) >= stop_at:
                return found
    if found:
        return found
    # greedy fallback: drop columns while the CC stay equal to D1
    cols = list(range(canonical.m))
    changed = True
    while changed and len(cols) > rk:
        changed = False
        for c in list(cols):
            trial = [x for x in cols if x != c]
            cand = _restrict_columns(canonical, trial)
            if parametrization_check(D1, cand, max_order=max_order):
                cols = trial
                changed = True
                break
    if len(cols) == rk:
        return [MinimalParametrization(tuple(cols), _restrict_columns(canonical, cols))]
    return []


def minimal_parametrization(D1: OpMatrix, **kw) -> OpMatrix:
    found = minimal_parametrizations(D1, stop_at=1, **kw)
    if not found:
        raise PreconditionError("no minimal parametrization found within budget")
    return found[0].operator
