"""Symbol spaces g_{q+r}, the Spencer delta-map on form-valued symbols,
cohomology dimensions, acyclicity detection, and the bound on the order of
generating compatibility conditions.

Sign convention: (delta w)^k_mu = sum_i dx^i wedge w^k_{mu+1_i}, with skew
bases ordered lexicographically on strictly increasing index tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Optional

from .errors import BudgetExceededError, NotFormallyIntegrableError
from .jets import Coord, Echelon, JetSystem, coord_key
from .kernel import RatFunc, class_of, mi_all, mi_len
from .ore import matrix_rank

DEFAULT_R_BUDGET = 6


@dataclass
class SymbolSpace:
    """The symbol at one order: solutions of the pure top-order equations."""

    n: int
    m: int
    order: int
    ech: Echelon                     # reduced echelon of the defining rows
    _basis: Optional[list[dict[Coord, RatFunc]]] = field(default=None, repr=False)

    @property
    def total_coords(self) -> int:
        return self.m * comb(self.order + self.n - 1, self.n - 1) if self.order > 0 else self.m

    @property
    def dim(self) -> int:
        return self.total_coords - len(self.ech.rows)

    def coords(self) -> list[Coord]:
        return [(k, mu) for mu in mi_all(self.n, self.order) for k in range(self.m)]

    def parametric(self) -> list[Coord]:
        out = [c for c in self.coords() if c not in self.ech.pivots]
        out.sort(key=coord_key, reverse=True)
        return out

    def basis(self) -> list[dict[Coord, RatFunc]]:
        """One vector per parametric coordinate (that coordinate set to 1)."""
        if self._basis is not None:
            return self._basis
        one = RatFunc.const(self.n, 1)
        vecs = []
        for p in self.parametric():
            v: dict[Coord, RatFunc] = {p: one}
            for f, _ in self.ech.rows:
                c = f.terms.get(p)
                if c is not None:
                    lead = f.leader()
                    v[lead] = -c
            vecs.append(v)
        self._basis = vecs
        return vecs

    def contains(self, vec: dict[Coord, RatFunc]) -> bool:
        from .jets import LinForm
        f = LinForm(self.n, dict(vec))
        for row, _ in self.ech.rows:
            # residual after substituting the vector into the defining row
            s = RatFunc.const(self.n, 0)
            for c, a in row.terms.items():
                v = vec.get(c)
                if v is not None:
                    s = s + a * v
            if not s.is_zero():
                return False
        return True


def symbol_at_order(S: JetSystem, N: int) -> SymbolSpace:
    """Symbol of the prolonged system at jet order N (pure top parts)."""
    ech = Echelon(S.n)
    for f in S.equations:
        qe = f.order()
        if qe > N:
            continue
        top = {(k, mu): c for (k, mu), c in f.terms.items() if mi_len(mu) == qe}
        for nu in mi_all(S.n, N - qe):
            from .jets import LinForm
            shifted = LinForm(S.n, {(k, _mi_add(mu, nu)): c for (k, mu), c in top.items()})
            ech.add(shifted)
    return SymbolSpace(S.n, S.m, N, ech)


def _mi_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def symbol_space(S: JetSystem, r: int) -> SymbolSpace:
    """g_{q+r} for the system's own order q."""
    return symbol_at_order(S, S.q + r)


class SymbolFamily:
    """Cache of the symbols of one system at consecutive orders."""

    def __init__(self, S: JetSystem):
        self.S = S
        self._spaces: dict[int, SymbolSpace] = {}

    def at(self, N: int) -> SymbolSpace:
        if N < 0:
            return SymbolSpace(self.S.n, 0, 0, Echelon(self.S.n))
        sp = self._spaces.get(N)
        if sp is None:
            sp = symbol_at_order(self.S, N)
            self._spaces[N] = sp
        return sp


def _wedge_sign(i: int, I: tuple[int, ...]) -> int:
    """Sign of dx^i ^ dx^I relative to the sorted tuple; 0 if i in I."""
    if i in I:
        return 0
    before = sum(1 for j in I if j < i)
    return -1 if before % 2 else 1


def delta_matrix(fam: SymbolFamily, s: int, N: int):
    """Matrix of delta: Lambda^s T* x g_{N+1} -> Lambda^{s+1} T* x g_N.

    Returns (matrix rows over K, domain dimension, target dimension).
    Rows are indexed by (J, parametric coordinate of g_N).
    """
    n = fam.S.n
    g_hi = fam.at(N + 1)
    g_lo = fam.at(N)
    dom_forms = list(itertools.combinations(range(1, n + 1), s))
    tgt_forms = list(itertools.combinations(range(1, n + 1), s + 1))
    hi_basis = g_hi.basis()
    lo_par = g_lo.parametric()
    lo_index = {p: t for t, p in enumerate(lo_par)}
    dom_dim = len(dom_forms) * len(hi_basis)
    tgt_dim = len(tgt_forms) * len(lo_par)
    zero = RatFunc.const(n, 0)
    cols = []
    for I in dom_forms:
        for b in hi_basis:
            col = {}
            for i in range(1, n + 1):
                sign = _wedge_sign(i, I)
                if not sign:
                    continue
                J = tuple(sorted(I + (i,)))
                jpos = tgt_forms.index(J)
                for (k, mu), val in b.items():
                    # shift: component at mu' with mu = mu' + 1_i
                    if mu[i - 1] == 0:
                        continue
                    mup = mu[: i - 1] + (mu[i - 1] - 1,) + mu[i:]
                    t = lo_index.get((k, mup))
                    if t is None:
                        continue   # principal coordinate: implied by the basis
                    key = jpos * len(lo_par) + t
                    cur = col.get(key, zero)
                    cur = cur + (val if sign > 0 else -val)
                    if cur.is_zero():
                        col.pop(key, None)
                    else:
                        col[key] = cur
            cols.append(col)
    rows = [[zero] * dom_dim for _ in range(tgt_dim)]
    for cidx, col in enumerate(cols):
        for ridx, v in col.items():
            rows[ridx][cidx] = v
    return rows, dom_dim, tgt_dim


@dataclass
class DeltaCell:
    dim_total: int    # dim Lambda^s T* x g_{q+r}
    dim_B: int
    dim_Z: int

    @property
    def dim_H(self) -> int:
        return self.dim_Z - self.dim_B


@dataclass
class DeltaReport:
    q: int
    g_dims: dict[int, int]                 # r -> dim g_{q+r}
    cells: dict[tuple[int, int], DeltaCell]  # (s, r) -> cell

    def H(self, s: int, r: int) -> int:
        return self.cells[(s, r)].dim_H


def cohomology(S: JetSystem, s_max: int, r_max: int) -> DeltaReport:
    """All delta-cohomology dimensions for 0 <= s <= s_max, 0 <= r <= r_max."""
    fam = SymbolFamily(S)
    q = S.q
    n = S.n
    g_dims = {}
    for r in range(-1, r_max + 2):
        if q + r >= 0:
            g_dims[r] = fam.at(q + r).dim
    rank_cache: dict[tuple[int, int], int] = {}

    def rank_of(s: int, N: int) -> int:
        # rank of delta: Lambda^s x g_{N+1} -> Lambda^{s+1} x g_N
        key = (s, N)
        v = rank_cache.get(key)
        if v is None:
            if s >= n or N + 1 < 0 or fam.at(N + 1).dim == 0:
                v = 0
            else:
                rows, dd, td = delta_matrix(fam, s, N)
                v = matrix_rank(rows) if (dd and td) else 0
            rank_cache[key] = v
        return v

    cells = {}
    for r in range(r_max + 1):
        N = q + r
        gdim = fam.at(N).dim
        for s in range(s_max + 1):
            total = comb(n, s) * gdim
            dim_B = rank_of(s - 1, N) if s >= 1 else 0
            out_rank = rank_of(s, N - 1) if s <= n else 0
            dim_Z = total - out_rank
            cells[(s, r)] = DeltaCell(total, dim_B, dim_Z)
    return DeltaReport(q, g_dims, cells)


def delta_squared_is_zero(S: JetSystem, s: int, N: int) -> bool:
    """Certify delta o delta = 0 at one spot (matrix product vanishes)."""
    fam = SymbolFamily(S)
    A, da, ta = delta_matrix(fam, s, N)          # Lambda^s x g_{N+1} -> ...
    B, db, tb = delta_matrix(fam, s + 1, N - 1)  # target of A -> Lambda^{s+2} x g_{N-1}
    if not da or not tb:
        return True
    zero = RatFunc.const(S.n, 0)
    # need columns of A expressed in the domain basis of B: both are
    # (form, parametric-coordinate) bases of Lambda^{s+1} x g_N, built the
    # same way, so the composite is the plain matrix product
    for j in range(da):
        colv = [A[i][j] for i in range(ta)]
        for i2 in range(tb):
            siv = zero
            for t in range(ta):
                if not B[i2][t].is_zero() and not colv[t].is_zero():
                    siv = siv + B[i2][t] * colv[t]
            if not siv.is_zero():
                return False
    return True


def symbol_is_involutive(fam: SymbolFamily, N: int) -> bool:
    """Cartan test: dim g_{N+1} equals the multiplicative prolongation count."""
    sp = fam.at(N)
    if sp.dim == 0:
        return True
    if N == 0:
        # full zero-order symbol: involutive by convention
        return fam.at(1).dim == sp.dim * fam.S.n
    predicted = 0
    for (k, mu) in sp.parametric():
        predicted += class_of(mu)
    return fam.at(N + 1).dim == predicted


@dataclass
class AcyclicityResult:
    least_r: int
    finite_type: bool
    stabilized_at: int    # prolongation level where the symbol became involutive/zero


def acyclicity(S: JetSystem, s: int, r_budget: Optional[int] = None) -> AcyclicityResult:
    """Least r with g_{q+r'} s-acyclic for all r' >= r, via stabilization."""
    if r_budget is None:
        r_budget = DEFAULT_R_BUDGET
    fam = SymbolFamily(S)
    q = S.q
    stab = None
    for r in range(r_budget + 1):
        if symbol_is_involutive(fam, q + r):
            stab = r
            break
    if stab is None:
        raise BudgetExceededError(
            f"symbol did not become involutive within {r_budget} prolongations")
    finite = fam.at(q + stab).dim == 0
    rep = cohomology(S, min(s, S.n), stab)
    least = stab
    for r0 in range(stab, -1, -1):
        ok = all(rep.H(sig, r) == 0
                 for r in range(r0, stab + 1) for sig in range(1, min(s, S.n) + 1))
        if ok:
            least = r0
        else:
            break
    return AcyclicityResult(least, finite, stab)


def cc_order_bound(S: JetSystem, r_budget: Optional[int] = None) -> int:
    """Order of the generating compatibility conditions: s + 1 where s is the
    least number of prolongations making the symbol 2-acyclic."""
    from .involution import formally_integrable
    if not formally_integrable(S):
        raise NotFormallyIntegrableError(
            "system is not formally integrable; complete it first")
    res = acyclicity(S, 2, r_budget=r_budget)
    return res.least_r + 1
