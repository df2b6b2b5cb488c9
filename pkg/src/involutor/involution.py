"""Completion of a system to involutive form, formal-integrability testing,
and delta-regular coordinate changes.

Completion repeatedly solves the system, prolongs every equation with
respect to its non-multiplicative variables, reduces against multiplicative
prolongations, and adjoins what does not reduce.  In delta-regular
coordinates this terminates; when the order budget runs out the search
moves on to coordinate permutations and then to seeded random unimodular
changes.
"""

from __future__ import annotations

import hashlib
import itertools
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import BudgetExceededError, DeltaRegularityError
from .jets import Echelon, JetSystem, LinForm, SolvedSystem, coord_key
from .kernel import mi_len

DEFAULT_ORDER_HEADROOM = 6
MAX_RANDOM_RETRIES = 32
_SWEEP_CAP = 400


def order_headroom() -> int:
    env = os.environ.get("INVOLUTOR_BUDGET")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return DEFAULT_ORDER_HEADROOM


@dataclass
class CompletionResult:
    involutive: SolvedSystem
    change: list[list[Fraction]]          # x_new = change . x_old
    change_inv: list[list[Fraction]]
    trace: list[tuple[int, int, int]]     # (equation index, axis, remainder order)
    order: int
    formally_integrable: bool

    @property
    def is_identity_change(self) -> bool:
        return self.change == _identity(len(self.change))


def tracked_solve(n: int, m: int, pairs, declared_order: int = 0) -> SolvedSystem:
    """Reduced echelon of (form, origin) pairs; origins follow row operations."""
    ech = Echelon(n, track=True)
    for f, o in pairs:
        ech.add(f, o)
    return SolvedSystem(n, m, ech, declared_order=declared_order)


def _complete_fixed(n: int, m: int, pairs, declared_order: int, max_order: int):
    """Completion in fixed coordinates; raises BudgetExceededError on ascent
    past max_order.  Returns (solved, trace, saw_subtop_drop)."""
    pairs = list(pairs)
    trace: list[tuple[int, int, int]] = []
    saw_drop = False
    for _ in range(_SWEEP_CAP):
        sol = tracked_solve(n, m, pairs, declared_order)
        found: list[tuple[int, int, LinForm, LinForm]] = []
        for idx, j in sol.dots():
            g = sol.eqs[idx].prolong(j)
            rem, combo = sol.reduce_form(g, track=True)
            if rem.is_zero():
                continue
            org = sol.origins[idx].prolong(j)
            for (h, nu), c in combo.terms.items():
                org = org.axpy(-c, sol.origins[h].prolong_mi(nu))
            found.append((idx, j, rem, org))
        if not found:
            return sol, trace, saw_drop
        # integrability conditions first: adjoin only the lowest-order
        # remainders, then re-solve; higher ones are recomputed next sweep
        omin = min(rem.order() for _, _, rem, _ in found)
        if omin <= sol.q:
            saw_drop = True
        if omin > max_order:
            raise BudgetExceededError(f"completion ascended past order {max_order}")
        new_pairs = []
        seen = Echelon(n)
        for idx, j, rem, org in found:
            if rem.order() == omin and seen.add(rem):
                trace.append((idx, j, omin))
                new_pairs.append((rem, org))
        pairs = list(zip(sol.eqs, sol.origins)) + new_pairs
    raise BudgetExceededError("completion sweep cap exceeded")


def _identity(n: int) -> list[list[Fraction]]:
    return [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]


def _perm_matrix(perm) -> list[list[Fraction]]:
    n = len(perm)
    A = [[Fraction(0)] * n for _ in range(n)]
    for i, p in enumerate(perm):
        A[p][i] = Fraction(1)
    return A


def _mat_inv(A: list[list[Fraction]]) -> Optional[list[list[Fraction]]]:
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(1 if i == j else 0) for j in range(n)]
         for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col]), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def _system_key(S: JetSystem) -> str:
    return ";".join(sorted(str(f) for f in S.equations)) + f"|{S.n}|{S.m}|{S.q}"


def _system_seed(S: JetSystem) -> int:
    return int.from_bytes(hashlib.sha256(_system_key(S).encode()).digest()[:8], "big")


_completion_memo: dict[tuple[str, int], CompletionResult] = {}
_MEMO_CAP = 256


def _random_unimodular(rng: random.Random, n: int) -> Optional[list[list[Fraction]]]:
    A = [[Fraction(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
    inv = _mat_inv(A)
    return A if inv is not None else None


def _board_key(sol: SolvedSystem):
    ch = sol.characters(involutive=True)
    return (sol.q, tuple(-b for b in reversed(ch.beta)))


def complete(S: JetSystem, max_order: Optional[int] = None,
             origins: Optional[list[LinForm]] = None) -> CompletionResult:
    """Involutive completion with delta-regular coordinate search.

    The returned system lives in the transformed coordinates recorded by
    ``change`` (identity when none was needed).  Origins, when given, must
    align with ``S.equations``; they are carried through the completion so
    each solved equation records its expression in the original equations.
    """
    n, m = S.n, S.m
    if max_order is None:
        max_order = S.q + order_headroom()
    if origins is None:
        origins = [LinForm.unit(n, (i, (0,) * n)) for i in range(len(S.equations))]
    memo_key = (";".join(str(f) for f in S.equations), f"{S.n}|{S.m}|{S.q}",
                ";".join(str(o) for o in origins), max_order)
    hit = _completion_memo.get(memo_key)
    if hit is not None:
        return hit

    def _remember(res: CompletionResult) -> CompletionResult:
        if len(_completion_memo) >= _MEMO_CAP:
            _completion_memo.clear()
        _completion_memo[memo_key] = res
        return res

    ident = _identity(n)
    try:
        sol, trace, drop = _complete_fixed(n, m, list(zip(S.equations, origins)),
                                           S.q, max_order)
        return _remember(CompletionResult(sol, ident, ident, trace, sol.q, not drop))
    except BudgetExceededError:
        pass

    def attempt_all(changes, first_success=False):
        best = None
        for pos, (A, Ainv) in enumerate(changes):
            T = S.transform(A, Ainv)
            try:
                sol, trace, drop = _complete_fixed(n, m, list(zip(T.equations, origins)),
                                                   T.q, max_order)
            except BudgetExceededError:
                continue
            key = _board_key(sol) + (pos,)
            if best is None or key < best[0]:
                best = (key, sol, A, Ainv, trace, drop)
            if first_success:
                break
        return best

    # least-disruptive changes first: transpositions, then longer cycles
    ordered = sorted((p for p in itertools.permutations(range(n)) if p != tuple(range(n))),
                     key=lambda p: (sum(1 for i, v in enumerate(p) if i != v), p))
    perms = []
    for perm in ordered:
        A = _perm_matrix(perm)
        perms.append((A, _mat_inv(A)))
    best = attempt_all(perms)
    if best is None:
        rng = random.Random(_system_seed(S))
        randoms = []
        tries = 0
        while tries < MAX_RANDOM_RETRIES:
            A = _random_unimodular(rng, n)
            if A is None:
                continue
            randoms.append((A, _mat_inv(A)))
            tries += 1
        best = attempt_all(randoms, first_success=True)
    if best is None:
        raise DeltaRegularityError(
            f"no delta-regular coordinates found within {MAX_RANDOM_RETRIES} random retries")
    _, sol, A, Ainv, trace, drop = best
    return _remember(CompletionResult(sol, A, Ainv, trace, sol.q, not drop))


def involution_check(sol: SolvedSystem):
    """(flag, certificate) for a solved system; the certificate lists the
    failing prolongations as (equation index, axis, remainder)."""
    return sol.involution_certificate()


def formally_integrable(S: JetSystem, max_order: Optional[int] = None) -> bool:
    """True iff prolongation never reveals equations of lower order, checked
    up to the completion order plus one."""
    res = complete(S, max_order=max_order)
    # the check is intrinsic, so run it in the coordinates completion chose
    T = S if res.is_identity_change else S.transform(res.change, res.change_inv)
    r_max = max(res.order - T.q, 0) + 1
    ech = Echelon(T.n, reduced=False)
    from .kernel import mi_all, mi_up_to
    for r in range(r_max + 1):
        for f in T.equations:
            gap = T.q + r - f.order()
            nus = mi_all(T.n, gap) if (r > 0 and gap > 0) else mi_up_to(T.n, gap)
            for nu in nus:
                lead = ech.add(f.prolong_mi(nu))
                if lead:
                    newest = max(len(ech.rows) - 1, 0)
                    pv = ech.rows[newest][0].leader()
                    if r > max(0, mi_len(pv[1]) - T.q):
                        return False
    return True


def delta_regular_change(S: JetSystem, max_order: Optional[int] = None) -> list[list[Fraction]]:
    """Invertible integer change realizing the maximal Janet board
    (beta^n first, then beta^{n-1}, ...) among the search candidates."""
    res = complete(S, max_order=max_order)
    return res.change
