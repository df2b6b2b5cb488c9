"""Linear differential operators over K = Q(x1,...,xn) in normal form
(coefficients standing to the left of the derivations), operator matrices,
composition, formal adjoints, and symbol/rank computations at covectors.
"""

from __future__ import annotations

from typing import Sequence

from .errors import ContextMismatchError, ShapeError
from .kernel import RatFunc, mi_add, mi_len, mi_str, mi_zero


class DiffOp:
    """Scalar operator P = sum_mu a^mu(x) d_mu in normal form."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        t = {}
        if terms:
            for mu, c in terms.items():
                if not c.is_zero():
                    t[mu] = c
        self.terms = t

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(n: int) -> "DiffOp":
        return DiffOp(n)

    @staticmethod
    def one(n: int) -> "DiffOp":
        return DiffOp(n, {mi_zero(n): RatFunc.const(n, 1)})

    @staticmethod
    def d(n: int, *axes: int) -> "DiffOp":
        """d_{i1 i2 ...}: product of first-order derivations along the axes."""
        mu = [0] * n
        for i in axes:
            mu[i - 1] += 1
        return DiffOp(n, {tuple(mu): RatFunc.const(n, 1)})

    @staticmethod
    def mono(n: int, mu: tuple[int, ...], coeff: RatFunc) -> "DiffOp":
        return DiffOp(n, {mu: coeff})

    @staticmethod
    def from_coeff(c: RatFunc) -> "DiffOp":
        return DiffOp(c.n, {mi_zero(c.n): c})

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        """Order of the operator; the zero operator reports -1."""
        if not self.terms:
            return -1
        return max(mi_len(mu) for mu in self.terms)

    def _chk(self, other: "DiffOp"):
        if self.n != other.n:
            raise ContextMismatchError("operators from different contexts")

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._chk(other)
        t = dict(self.terms)
        for mu, c in other.terms.items():
            s = t.get(mu)
            s = c if s is None else s + c
            if s.is_zero():
                t.pop(mu, None)
            else:
                t[mu] = s
        return DiffOp(self.n, t)

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.n, {mu: -c for mu, c in self.terms.items()})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def lscale(self, c: RatFunc) -> "DiffOp":
        """Left multiplication by a coefficient function."""
        if c.is_zero():
            return DiffOp(self.n)
        return DiffOp(self.n, {mu: c * v for mu, v in self.terms.items()})

    # -- multiplication ------------------------------------------------------

    def __mul__(self, other: "DiffOp") -> "DiffOp":
        """Composition P o Q in normal form via d_i a = a d_i + (d_i a)."""
        self._chk(other)
        out: dict = {}
        for mu, a in self.terms.items():
            for nu, b in other.terms.items():
                # d_mu o (b d_nu) = sum_{s <= mu} binom(mu,s) (d^{mu-s} b) d_{s+nu}
                for sig, db in _leibniz(mu, b):
                    key = mi_add(sig, nu)
                    c = a * db
                    s = out.get(key)
                    s = c if s is None else s + c
                    if s.is_zero():
                        out.pop(key, None)
                    else:
                        out[key] = s
        return DiffOp(self.n, out)

    def adjoint(self) -> "DiffOp":
        """ad(P) = sum_mu (-1)^{|mu|} d_mu o a^mu, expanded to normal form."""
        out = DiffOp(self.n)
        for mu, a in self.terms.items():
            sign = RatFunc.const(self.n, -1 if mi_len(mu) % 2 else 1)
            expanded = DiffOp(self.n,
                              {sig: sign * db for sig, db in _leibniz(mu, a)})
            out = out + expanded
        return out

    def apply(self, f: RatFunc) -> RatFunc:
        """Action on a function: P(f) = sum a^mu d^mu f."""
        out = RatFunc.const(self.n, 0)
        for mu, a in self.terms.items():
            g = f
            for i, p in enumerate(mu):
                for _ in range(p):
                    g = g.derive(i + 1)
            out = out + a * g
        return out

    def top_part(self, q: int) -> dict:
        return {mu: c for mu, c in self.terms.items() if mi_len(mu) == q}

    def extend(self, n: int) -> "DiffOp":
        pad = (0,) * (n - self.n)
        return DiffOp(n, {mu + pad: c.extend(n) for mu, c in self.terms.items()})

    def subst_linear(self, rows, inv_rows) -> "DiffOp":
        """Coordinate change x_new = A x: d_i -> sum_j A[j][i] d_j on the
        derivations and x -> A^{-1} x_new inside the coefficients."""
        n = self.n
        lin = []
        for i in range(n):
            op = DiffOp(n)
            for j in range(n):
                if rows[j][i]:
                    op = op + DiffOp.mono(n, tuple(1 if k == j else 0 for k in range(n)),
                                          RatFunc.const(n, rows[j][i]))
            lin.append(op)
        out = DiffOp(n)
        for mu, c in self.terms.items():
            term = DiffOp.from_coeff(c.subst_linear(inv_rows))
            for i, p in enumerate(mu):
                for _ in range(p):
                    term = term * lin[i]
            out = out + term
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, DiffOp) and self.n == other.n and self.terms == other.terms

    def __repr__(self):
        return f"DiffOp({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mu in sorted(self.terms, key=lambda m: (mi_len(m), m), reverse=True):
            c = self.terms[mu]
            dname = "d" + mi_str(mu) if mi_len(mu) else ""
            cs = str(c)
            if not dname:
                parts.append(cs)
            elif cs == "1":
                parts.append(dname)
            elif cs == "-1":
                parts.append("-" + dname)
            else:
                if "+" in cs or (cs.count("-") and not cs.startswith("-")) or cs[1:].count("-"):
                    cs = f"({cs})"
                parts.append(f"{cs}*{dname}")
        s = parts[0]
        for p in parts[1:]:
            s += " - " + p[1:] if p.startswith("-") else " + " + p
        return s


def _leibniz(mu: tuple[int, ...], b: RatFunc):
    """Expand d_mu o b = sum_{s <= mu} binom(mu, s) (d^{mu-s} b) d_s.

    Yields (s, coefficient) pairs with nonzero coefficients.
    """
    n = len(mu)
    if b.is_constant():
        yield mu, b
        return
    # enumerate s <= mu componentwise
    ranges = [range(v + 1) for v in mu]
    stack = [((), b)]
    # iterative product over axes, differentiating as we go
    for axis in range(n):
        new = []
        for prefix, g in stack:
            ders = [g]
            for _ in range(mu[axis]):
                ders.append(ders[-1].derive(axis + 1))
            for s in ranges[axis]:
                coeff = ders[mu[axis] - s]
                if coeff.is_zero():
                    continue
                cnt = _choose(mu[axis], s)
                new.append((prefix + (s,), coeff if cnt == 1 else coeff * RatFunc.const(b.n, cnt)))
        stack = new
    for sig, cval in stack:
        if not cval.is_zero():
            yield sig, cval


def _choose(m: int, k: int) -> int:
    from math import comb
    return comb(m, k)


class OpMatrix:
    """p x m matrix of operators.

    Read as an operator acting on column vectors of unknowns, or as p
    generators of a row submodule of D^m presenting the module
    M = D^m / (row module).
    """

    __slots__ = ("n", "p", "m", "rows")

    def __init__(self, n: int, p: int, m: int, rows: Sequence[Sequence[DiffOp]]):
        if len(rows) != p or any(len(r) != m for r in rows):
            raise ShapeError("row data does not match declared shape")
        for r in rows:
            for e in r:
                if e.n != n:
                    raise ContextMismatchError("matrix entry from wrong context")
        self.n = n
        self.p = p
        self.m = m
        self.rows = [list(r) for r in rows]

    @staticmethod
    def from_rows(n: int, m: int, rows: Sequence[Sequence[DiffOp]]) -> "OpMatrix":
        return OpMatrix(n, len(rows), m, rows)

    @staticmethod
    def zero(n: int, p: int, m: int) -> "OpMatrix":
        return OpMatrix(n, p, m, [[DiffOp.zero(n) for _ in range(m)] for _ in range(p)])

    def order(self) -> int:
        return max((e.order() for r in self.rows for e in r), default=-1)

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.rows for e in r)

    def entry(self, i: int, j: int) -> DiffOp:
        return self.rows[i][j]

    def adjoint(self) -> "OpMatrix":
        """Transposed matrix of entrywise adjoints; an involution."""
        rows = [[self.rows[i][j].adjoint() for i in range(self.p)] for j in range(self.m)]
        return OpMatrix(self.n, self.m, self.p, rows)

    def compose(self, other: "OpMatrix") -> "OpMatrix":
        """self o other (self applied after other)."""
        if self.m != other.p:
            raise ShapeError(f"cannot compose {self.p}x{self.m} with {other.p}x{other.m}")
        rows = []
        for i in range(self.p):
            row = []
            for j in range(other.m):
                s = DiffOp.zero(self.n)
                for k in range(self.m):
                    a = self.rows[i][k]
                    b = other.rows[k][j]
                    if not a.is_zero() and not b.is_zero():
                        s = s + a * b
                row.append(s)
            rows.append(row)
        return OpMatrix(self.n, self.p, other.m, rows)

    def symbol_at(self, chi: Sequence[RatFunc]) -> list[list[RatFunc]]:
        """Matrix of the top-order symbol evaluated at the covector chi.

        Entry (tau, k) = sum_{|mu| = q} a^{tau,mu}_k chi_mu, with q the
        matrix order.  chi entries may live in an extended context.
        """
        q = self.order()
        ctx = chi[0].n if chi else self.n
        zero = RatFunc.const(ctx, 0)
        chi_pow: dict[tuple[int, ...], RatFunc] = {}

        def chim(mu):
            v = chi_pow.get(mu)
            if v is None:
                v = RatFunc.const(ctx, 1)
                for i, p in enumerate(mu):
                    for _ in range(p):
                        v = v * chi[i]
                chi_pow[mu] = v
            return v

        out = []
        for r in self.rows:
            row = []
            for e in r:
                s = zero
                for mu, c in e.terms.items():
                    if mi_len(mu) == q:
                        s = s + c.extend(ctx) * chim(mu)
                row.append(s)
            out.append(row)
        return out

    def generic_symbol_rank(self) -> int:
        """Exact rank of the symbol over K(chi_1,...,chi_n)."""
        if self.is_zero():
            return 0
        ctx = 2 * self.n
        chi = [RatFunc.var(ctx, self.n + i + 1) for i in range(self.n)]
        return matrix_rank(self.symbol_at(chi))

    def transform(self, rows, inv_rows) -> "OpMatrix":
        return OpMatrix(self.n, self.p, self.m,
                        [[e.subst_linear(rows, inv_rows) for e in r] for r in self.rows])

    def __eq__(self, other) -> bool:
        return (isinstance(other, OpMatrix) and self.n == other.n
                and self.p == other.p and self.m == other.m
                and self.rows == other.rows)

    def __repr__(self):
        body = "; ".join(", ".join(str(e) for e in r) for r in self.rows)
        return f"OpMatrix[{self.p}x{self.m}: {body}]"


def op_mul(P: DiffOp, Q: DiffOp) -> DiffOp:
    """Normal-form product P o Q."""
    return P * Q


def adjoint(D: OpMatrix) -> OpMatrix:
    return D.adjoint()


def compose(D1: OpMatrix, D: OpMatrix) -> OpMatrix:
    return D1.compose(D)


def matrix_rank(rows: list[list[RatFunc]]) -> int:
    """Rank of a matrix over the fraction field, by Gaussian elimination."""
    if not rows or not rows[0]:
        return 0
    m = [list(r) for r in rows]
    nrows, ncols = len(m), len(m[0])
    rank = 0
    for col in range(ncols):
        piv = None
        for r in range(rank, nrows):
            if not m[r][col].is_zero():
                piv = r
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pv = m[rank][col]
        for r in range(rank + 1, nrows):
            if not m[r][col].is_zero():
                f = m[r][col] / pv
                for c2 in range(col, ncols):
                    if not m[rank][c2].is_zero():
                        m[r][c2] = m[r][c2] - f * m[rank][c2]
        rank += 1
        if rank == nrows:
            break
    return rank


def generic_covector(n: int) -> list[RatFunc]:
    """Fresh symbols chi_1..chi_n adjoined to K as variables n+1..2n."""
    return [RatFunc.var(2 * n, n + i + 1) for i in range(n)]
