"""Generating compatibility conditions (the direct problem), sequence and
free-resolution construction, Spencer/Janet bundle dimensions, and the
Euler-Poincare cross-checks.

Syzygies come from the involutive completion with transformation tracking:
every non-multiplicative prolongation of a basis equation reduces to zero
through multiplicative prolongations, and the recorded combination, pushed
back through the tracking to the original rows, is a syzygy.  Those
syzygies generate the whole syzygy module; a per-order linear trimming
extracts a generating set, certified by reducing every raw syzygy against
the completion of the kept ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

from .delta import SymbolFamily, delta_matrix
from .errors import InvariantViolationError, NotInvolutiveError
from .involution import CompletionResult, complete
from .jets import (
    Coord,
    Echelon,
    JetSystem,
    LinForm,
    SolvedSystem,
    coord_key,
    jet_count,
)
from .kernel import RatFunc, mi_all, mi_len, mi_zero
from .ore import DiffOp, OpMatrix, matrix_rank


def _rows_to_forms(D: OpMatrix):
    """LinForms of the nonzero rows, with their row indices."""
    forms = []
    labels = []
    for tau, row in enumerate(D.rows):
        f = LinForm(D.n)
        for k, op in enumerate(row):
            for mu, c in op.terms.items():
                f = f.axpy(RatFunc.const(D.n, 1), LinForm(D.n, {(k, mu): c}))
        if f.is_zero():
            continue
        forms.append(f)
        labels.append(tau)
    return forms, labels


def _form_to_oprow(f: LinForm, width: int) -> list[DiffOp]:
    cols: dict[int, dict] = {}
    for (k, mu), c in f.terms.items():
        cols.setdefault(k, {})[mu] = c
    return [DiffOp(f.n, cols.get(k)) for k in range(width)]


def _oprow_to_form(row: Sequence[DiffOp], n: int) -> LinForm:
    f = LinForm(n)
    for k, op in enumerate(row):
        for mu, c in op.terms.items():
            f = f.axpy(RatFunc.const(n, 1), LinForm(n, {(k, mu): c}))
    return f


class ModuleBasis:
    """Involutive basis of the row module of an operator, with tracking.

    Rows of the operator present a module; the basis supports normal-form
    reduction of arbitrary rows with membership certificates expressed as
    operator combinations of the original rows.
    """

    def __init__(self, D: OpMatrix, max_order: Optional[int] = None):
        self.D = D
        self.n = D.n
        self.width = D.m
        forms, labels = _rows_to_forms(D)
        self.labels = labels
        origins = [LinForm.unit(D.n, (tau, mi_zero(D.n))) for tau in labels]
        S = JetSystem(D.n, D.m, forms)
        if forms:
            self.res: CompletionResult = complete(S, max_order=max_order, origins=origins)
        else:
            self.res = complete(JetSystem(D.n, D.m, [], order=0), max_order=max_order)
        self.sol: SolvedSystem = self.res.involutive
        self.identity_change = self.res.is_identity_change

    # -- coordinate plumbing ---------------------------------------------------

    def _push(self, row: Sequence[DiffOp]) -> LinForm:
        """External row (original coordinates) -> form in basis coordinates."""
        if self.identity_change:
            return _oprow_to_form(row, self.n)
        ops = OpMatrix(self.n, 1, self.width, [list(row)])
        moved = ops.transform(self.res.change, self.res.change_inv)
        return _oprow_to_form(moved.rows[0], self.n)

    def _pull_form(self, f: LinForm) -> LinForm:
        if self.identity_change or f.is_zero():
            return f
        ops = OpMatrix(self.n, 1, self.width, [_form_to_oprow(f, self.width)])
        back = ops.transform(self.res.change_inv, self.res.change)
        return _oprow_to_form(back.rows[0], self.n)

    def _pull_origin(self, org: LinForm) -> LinForm:
        """Pull a combination over (row label, derivative) back to original
        coordinates; the label plays the role of the unknown index."""
        if self.identity_change or org.is_zero():
            return org
        p = self.D.p
        ops = OpMatrix(self.n, 1, p, [_form_to_oprow(org, p)])
        back = ops.transform(self.res.change_inv, self.res.change)
        return _oprow_to_form(back.rows[0], self.n)

    # -- reduction ----------------------------------------------------------------

    def reduce_row(self, row: Sequence[DiffOp]):
        """Normal form of a row modulo the module, with certificate.

        Returns (remainder form, certificate) in original coordinates, where
        certificate is a LinForm over (row label tau, nu) meaning the
        combination sum c . d_nu(row_tau) with row = combination + remainder.
        """
        f = self._push(row)
        rem, combo = self.sol.reduce_form(f, track=True)
        cert = LinForm(self.n)
        for (h, nu), c in combo.terms.items():
            cert = cert.axpy(c, self.sol.origins[h].prolong_mi(nu))
        return self._pull_form(rem), self._pull_origin(cert)

    def contains_row(self, row: Sequence[DiffOp]) -> bool:
        f = self._push(row)
        rem = self.sol.reduce_form(f)
        return rem.is_zero()

    def contains(self, other: OpMatrix) -> bool:
        return all(self.contains_row(r) for r in other.rows)

    # -- syzygies -------------------------------------------------------------------

    def raw_syzygies(self) -> list[LinForm]:
        """Generators of the syzygy module of the original rows, as forms
        over coordinates (row label, derivative multi-index), in original
        coordinates."""
        n = self.n
        out: list[LinForm] = []
        sol = self.sol
        # one syzygy per non-multiplicative prolongation of a basis equation
        for idx, j in sol.dots():
            g = sol.eqs[idx].prolong(j)
            rem, combo = sol.reduce_form(g, track=True)
            if not rem.is_zero():
                raise NotInvolutiveError("completed basis failed a dot reduction")
            org = sol.origins[idx].prolong(j)
            for (h, nu), c in combo.terms.items():
                org = org.axpy(-c, sol.origins[h].prolong_mi(nu))
            if not org.is_zero():
                out.append(self._pull_origin(org))
        # rows dependent on the others yield syzygies of order zero lead
        forms, labels = _rows_to_forms(self.D if self.identity_change
                                       else self.D.transform(self.res.change,
                                                             self.res.change_inv))
        for f, tau in zip(forms, labels):
            rem, combo = sol.reduce_form(f, track=True)
            if not rem.is_zero():
                raise InvariantViolationError("original row escaped its own module")
            org = LinForm.unit(n, (tau, mi_zero(n)))
            for (h, nu), c in combo.terms.items():
                org = org.axpy(-c, sol.origins[h].prolong_mi(nu))
            if not org.is_zero():
                out.append(self._pull_origin(org))
        # zero rows are annihilated by the unit operator
        nonzero = set(self.labels)
        for tau in range(self.D.p):
            if tau not in nonzero:
                out.append(LinForm.unit(n, (tau, mi_zero(n))))
        return out


def _trim_generators(n: int, p: int, raw: list[LinForm], max_order: Optional[int] = None):
    """Per-order linear trimming plus a generation certificate."""
    cands = [g for g in raw if not g.is_zero()]
    cands.sort(key=lambda g: (g.order(), coord_key(g.leader()), g.render()))
    kept: list[LinForm] = []
    for attempt in range(4):
        kept = []
        V = Echelon(n, reduced=False)
        by_order: dict[int, list[LinForm]] = {}
        for g in cands:
            by_order.setdefault(g.order(), []).append(g)
        top = max(by_order) if by_order else 0
        for s in range(top + 1):
            # prolongations of earlier generators up to order s
            for g in kept:
                gap = s - g.order()
                if gap > 0:
                    for nu in mi_all(n, gap):
                        V.add(g.prolong_mi(nu))
            for g in by_order.get(s, []):
                rem, _ = V.reduce(g)
                if rem.is_zero():
                    continue
                kept.append(g)
                V.add(g)
        # certificate: every raw syzygy reduces to zero against the module
        # generated by the kept ones
        if not kept:
            return kept
        K = OpMatrix(n, len(kept), p, [_form_to_oprow(g, p) for g in kept])
        MB = ModuleBasis(K, max_order=max_order)
        missing = [g for g in cands
                   if not MB.contains_row(_form_to_oprow(g, p))]
        if not missing:
            return kept
        cands = sorted(kept + missing,
                       key=lambda g: (g.order(), coord_key(g.leader()), g.render()))
    raise InvariantViolationError("generator trimming failed to certify")


def compatibility_conditions(D: OpMatrix, max_order: Optional[int] = None) -> OpMatrix:
    """A minimized generating set of compatibility conditions of D.

    Module-wise: generators of the syzygy module of the rows of D, returned
    as an operator on p = rows(D) new unknowns with compose(result, D) = 0.
    """
    basis = ModuleBasis(D, max_order=max_order)
    raw = basis.raw_syzygies()
    kept = _trim_generators(D.n, D.p, raw, max_order=max_order)
    kept.sort(key=lambda g: coord_key(g.leader()), reverse=True)
    rows = [_form_to_oprow(g, D.p) for g in kept]
    if not rows:
        return OpMatrix.zero(D.n, 0, D.p)
    return OpMatrix(D.n, len(rows), D.p, rows)


# ---------------------------------------------------------------------------
# sequences
# ---------------------------------------------------------------------------

@dataclass
class SequenceReport:
    operators: list[OpMatrix]      # D, D1, D2, ...
    dims: list[int]                # [m, p0, p1, ...]
    orders: list[int]              # per operator
    involutive: bool               # whether the first operator's system is involutive
    strictly_exact: bool           # each stage formally integrable

    @property
    def euler_sum(self) -> int:
        s = 0
        for r, d in enumerate(self.dims[1:]):
            s += d if r % 2 == 0 else -d
        return s


def janet_sequence(D: OpMatrix, length: Optional[int] = None,
                   max_order: Optional[int] = None) -> SequenceReport:
    """Iterate generating compatibility conditions until a zero operator."""
    from .involution import formally_integrable
    if length is None:
        length = D.n + 1
    ops = [D]
    dims = [D.m, D.p]
    orders = [D.order()]
    S0 = JetSystem.from_opmatrix(D)
    involutive = S0.autoreduce().is_involutive() if D.p else False
    strict = True
    for _ in range(length):
        cur = ops[-1]
        cc = compatibility_conditions(cur, max_order=max_order)
        if cc.p == 0:
            break
        ops.append(cc)
        dims.append(cc.p)
        orders.append(cc.order())
    for op in ops[1:]:
        if not formally_integrable(JetSystem.from_opmatrix(op)):
            strict = False
            break
    return SequenceReport(ops, dims, orders, involutive, strict)


def resolution(D: OpMatrix, length: Optional[int] = None,
               max_order: Optional[int] = None) -> SequenceReport:
    """Free resolution ... -> D^{m2} -> D^{m1} -> D^{m0} -> M -> 0, read from
    the same chain of operators module-wise."""
    return janet_sequence(D, length=length, max_order=max_order)


def spencer_bundle_dims(sol: SolvedSystem) -> list[int]:
    """dim C_r for r = 0..n via the splitting
    C_r ~ delta(Lambda^r T* x g_q) + Lambda^r T* x R_{q-1}."""
    ok, _ = sol.involution_certificate()
    if not ok:
        raise NotInvolutiveError("Spencer bundles require an involutive system")
    S = sol.system()
    n, q = sol.n, sol.q
    dimRq = jet_count(n, sol.m, q) - len(sol.eqs)
    fam = SymbolFamily(S)
    g_q = fam.at(q).dim
    dimRqm1 = dimRq - g_q
    out = [dimRq]
    for r in range(1, n + 1):
        if g_q == 0:
            rank = 0
        else:
            rows, dd, td = delta_matrix(fam, r, q - 1)
            rank = matrix_rank(rows) if (dd and td) else 0
        out.append(rank + comb(n, r) * dimRqm1)
    return out


def janet_bundle_dims(sol: SolvedSystem) -> list[int]:
    """Fiber dimensions of the Janet bundles, computed inductively from the
    board: each non-multiplicative pair (row of class c, column j > c)
    produces one compatibility condition of class j at the next stage."""
    ok, _ = sol.involution_certificate()
    if not ok:
        raise NotInvolutiveError("Janet bundles require an involutive system")
    n = sol.n
    classes = [r.cls for r in sol.board()]
    dims = []
    while classes:
        dims.append(len(classes))
        classes = [j for c in classes for j in range(c + 1, n + 1)]
    return dims


@dataclass
class EulerVerdict:
    janet_sum: int
    beta: int
    spencer_sum: int
    alpha: int

    @property
    def ok(self) -> bool:
        return self.janet_sum == self.beta and self.spencer_sum == self.alpha


def euler_check(rep: SequenceReport, max_order: Optional[int] = None) -> EulerVerdict:
    """Both alternating-sum identities: the Janet side equals m - alpha and
    the Spencer side equals alpha, with alpha from the involutive completion
    of the first operator's system."""
    D = rep.operators[0]
    res = complete(JetSystem.from_opmatrix(D), max_order=max_order)
    ch = res.involutive.characters(involutive=True)
    alpha = ch.rank_witness
    beta = D.m - alpha
    spencer = spencer_bundle_dims(res.involutive)
    ssum = 0
    for r, d in enumerate(spencer):
        ssum += d if r % 2 == 0 else -d
    verdict = EulerVerdict(rep.euler_sum, beta, ssum, alpha)
    if not verdict.ok:
        raise InvariantViolationError(
            f"Euler check failed: Janet {verdict.janet_sum} vs beta {beta}, "
            f"Spencer {ssum} vs alpha {alpha}")
    return verdict
