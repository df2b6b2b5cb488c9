"""Generators for the geometric operators at constant metrics (isometry,
conformal, gravitational), weighted adjoints for symmetric-tensor pairings,
and the algebraic curvature component space with its trace and trace-free
splitting maps.

Symmetric unknowns are stored with i <= j; pairings carry weight 2 on the
off-diagonal slots so self-adjointness is well defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from typing import Optional, Sequence

from .errors import MalformedInputError, PreconditionError
from .jets import Echelon, LinForm
from .kernel import RatFunc
from .ore import DiffOp, OpMatrix


@dataclass(frozen=True)
class ConstMetric:
    n: int
    omega: tuple[tuple[Fraction, ...], ...]
    omega_inv: tuple[tuple[Fraction, ...], ...]

    @staticmethod
    def euclidean(n: int) -> "ConstMetric":
        eye = tuple(tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n))
        return ConstMetric(n, eye, eye)

    @staticmethod
    def minkowski(n: int = 4) -> "ConstMetric":
        g = tuple(tuple(Fraction((1 if i < n - 1 else -1) if i == j else 0)
                        for j in range(n)) for i in range(n))
        return ConstMetric(n, g, g)

    @staticmethod
    def from_matrix(rows: Sequence[Sequence]) -> "ConstMetric":
        n = len(rows)
        g = tuple(tuple(Fraction(v) for v in r) for r in rows)
        inv = _invert(g)
        if inv is None:
            raise MalformedInputError("metric is singular")
        return ConstMetric(n, g, inv)


def _invert(g):
    n = len(g)
    M = [list(r) + [Fraction(1 if i == j else 0) for j in range(n)]
         for i, r in enumerate(g)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c]), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        pv = M[c][c]
        M[c] = [v / pv for v in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return tuple(tuple(row[n:]) for row in M)


# ---------------------------------------------------------------------------
# symmetric slot bookkeeping
# ---------------------------------------------------------------------------

def sym_slots(n: int) -> list[tuple[int, int]]:
    """Ordered slots (i, j) with 1 <= i <= j <= n."""
    return [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]


def sym_index(n: int, i: int, j: int) -> int:
    if i > j:
        i, j = j, i
    return sym_slots(n).index((i, j))


def sym_weights(n: int) -> list[int]:
    return [1 if i == j else 2 for (i, j) in sym_slots(n)]


# ---------------------------------------------------------------------------
# operator generators
# ---------------------------------------------------------------------------

def make_killing(metric: ConstMetric) -> OpMatrix:
    """Row (ij): omega_rj d_i xi^r + omega_ir d_j xi^r, for i <= j."""
    n = metric.n
    rows = []
    for (i, j) in sym_slots(n):
        row = [DiffOp.zero(n) for _ in range(n)]
        for r in range(1, n + 1):
            c1 = metric.omega[r - 1][j - 1]
            if c1:
                row[r - 1] = row[r - 1] + DiffOp.d(n, i).lscale(RatFunc.const(n, c1))
            c2 = metric.omega[i - 1][r - 1]
            if c2:
                row[r - 1] = row[r - 1] + DiffOp.d(n, j).lscale(RatFunc.const(n, c2))
        rows.append(row)
    return OpMatrix.from_rows(n, n, rows)


def make_conformal_killing(metric: ConstMetric) -> OpMatrix:
    """Trace-removed rows: Killing(ij) - (2/n) omega_ij d_r xi^r; the slot
    (n, n) is dropped so the rows stay independent."""
    n = metric.n
    if n < 3:
        raise PreconditionError("conformal generator requires n >= 3")
    base = make_killing(metric)
    slots = sym_slots(n)
    rows = []
    for s, (i, j) in enumerate(slots):
        if (i, j) == (n, n):
            continue
        row = list(base.rows[s])
        w = RatFunc.const(n, Fraction(2, n) * metric.omega[i - 1][j - 1])
        if not w.is_zero():
            for r in range(1, n + 1):
                row[r - 1] = row[r - 1] - DiffOp.d(n, r).lscale(w)
        rows.append(row)
    return OpMatrix.from_rows(n, n, rows)


def make_einstein(metric: ConstMetric) -> OpMatrix:
    """Second-order rows E_ij on symmetric Omega, i <= j:

    2 E_ij = omega^{rs} (d_ij O_rs + d_rs O_ij - d_ri O_sj - d_sj O_ri)
             - omega_ij (omega^{rs} omega^{uv} - omega^{ru} omega^{sv}) d_rs O_uv
    """
    n = metric.n
    if n < 3:
        raise PreconditionError("gravitational generator requires n >= 3")
    slots = sym_slots(n)
    half = Fraction(1, 2)
    w = metric.omega
    wi = metric.omega_inv

    def add(acc, u, v, a, b, coeff):
        # coeff * d_ab applied to O_uv (fold uv into its slot)
        if not coeff:
            return
        s = sym_index(n, u, v)
        acc[s] = acc[s] + DiffOp.d(n, a, b).lscale(RatFunc.const(n, coeff))

    rows = []
    for (i, j) in slots:
        acc = [DiffOp.zero(n) for _ in range(len(slots))]
        for r in range(1, n + 1):
            for s in range(1, n + 1):
                c = wi[r - 1][s - 1]
                if not c:
                    continue
                add(acc, r, s, i, j, half * c)          # omega^{rs} d_ij O_rs
                add(acc, i, j, r, s, half * c)          # omega^{rs} d_rs O_ij
                add(acc, s, j, r, i, -half * c)         # -omega^{rs} d_ri O_sj
                add(acc, r, i, s, j, -half * c)         # -omega^{rs} d_sj O_ri
        cij = w[i - 1][j - 1]
        if cij:
            for r in range(1, n + 1):
                for s in range(1, n + 1):
                    for u in range(1, n + 1):
                        for v in range(1, n + 1):
                            c1 = wi[r - 1][s - 1] * wi[u - 1][v - 1]
                            c2 = wi[r - 1][u - 1] * wi[s - 1][v - 1]
                            c = c1 - c2
                            if c:
                                add(acc, u, v, r, s, -half * cij * c)
        rows.append(acc)
    return OpMatrix.from_rows(n, len(slots), rows)


def weighted_adjoint(D: OpMatrix, row_weights: Sequence[int],
                     col_weights: Sequence[int]) -> OpMatrix:
    """Adjoint with respect to weighted pairings on rows and columns:
    entry (j, i) of the result is (row_w[i] / col_w[j]) * ad(D[i][j])."""
    if len(row_weights) != D.p or len(col_weights) != D.m:
        raise MalformedInputError("weight vectors do not match the shape")
    n = D.n
    rows = []
    for j in range(D.m):
        row = []
        for i in range(D.p):
            c = Fraction(row_weights[i], col_weights[j])
            row.append(D.rows[i][j].adjoint().lscale(RatFunc.const(n, c)))
        rows.append(row)
    return OpMatrix(n, D.m, D.p, rows)


def sym_gram(metric: ConstMetric) -> list[list[Fraction]]:
    """Gram matrix of the metric pairing on symmetric slots:
    <A, B> = omega^{ik} omega^{jl} A_ij B_kl (off-diagonal weight 2 built in)."""
    n = metric.n
    slots = sym_slots(n)

    def expand(s):
        i, j = s
        return [(i, j)] if i == j else [(i, j), (j, i)]

    g = metric.omega_inv
    out = []
    for s in slots:
        row = []
        for t in slots:
            v = Fraction(0)
            for (a, b) in expand(s):
                for (c, d) in expand(t):
                    v += g[a - 1][c - 1] * g[b - 1][d - 1]
            row.append(v)
        out.append(row)
    return out


def const_mul_left(M: Sequence[Sequence[Fraction]], D: OpMatrix) -> OpMatrix:
    rows = []
    for i in range(len(M)):
        row = []
        for j in range(D.m):
            s = DiffOp.zero(D.n)
            for k in range(D.p):
                if M[i][k]:
                    s = s + D.rows[k][j].lscale(RatFunc.const(D.n, M[i][k]))
            row.append(s)
        rows.append(row)
    return OpMatrix(D.n, len(M), D.m, rows)


def const_mul_right(D: OpMatrix, M: Sequence[Sequence[Fraction]]) -> OpMatrix:
    rows = []
    for i in range(D.p):
        row = []
        for j in range(len(M[0])):
            s = DiffOp.zero(D.n)
            for k in range(D.m):
                if M[k][j]:
                    s = s + D.rows[i][k].lscale(RatFunc.const(D.n, M[k][j]))
            row.append(s)
        rows.append(row)
    return OpMatrix(D.n, D.p, len(M[0]), rows)


def gram_adjoint(D: OpMatrix, gram_row: Sequence[Sequence[Fraction]],
                 gram_col: Sequence[Sequence[Fraction]]) -> OpMatrix:
    """Adjoint with respect to pairings given by Gram matrices on the row
    (target) and column (source) bundles: Gram_col^{-1} ad(D) Gram_row."""
    inv = _invert(tuple(tuple(v for v in r) for r in gram_col))
    if inv is None:
        raise MalformedInputError("singular pairing on the source bundle")
    return const_mul_left(inv, const_mul_right(D.adjoint(), gram_row))


def sym_adjoint(D: OpMatrix, metric: Optional[ConstMetric] = None) -> OpMatrix:
    """Adjoint for operators between symmetric-tensor bundles, under the
    metric pairing (euclidean by default, giving off-diagonal weight 2)."""
    if metric is None:
        metric = ConstMetric.euclidean(D.n)
    gram = sym_gram(metric)
    if D.p != len(gram) or D.m != len(gram):
        raise MalformedInputError("operator is not square on symmetric slots")
    return gram_adjoint(D, gram, gram)


# ---------------------------------------------------------------------------
# algebraic curvature components
# ---------------------------------------------------------------------------

PairSlot = tuple[tuple[int, int], tuple[int, int]]   # ((k,l),(i,j)) with k<l, i<j


class RiemannComponentSpace:
    """Arrays rho_{kl,ij}, skew in (k,l) and (i,j), with the cyclic
    first-identity relations; dimension n^2(n^2-1)/12."""

    def __init__(self, n: int):
        self.n = n
        self.slots: list[PairSlot] = []
        pairs = [(k, l) for k in range(1, n + 1) for l in range(k + 1, n + 1)]
        for kl in pairs:
            for ij in pairs:
                self.slots.append((kl, ij))
        self.index = {s: t for t, s in enumerate(self.slots)}
        # cyclic relations, echelonized over the slot coordinates
        ech = Echelon(n)
        for k in range(1, n + 1):
            for l in range(1, n + 1):
                for i in range(l + 1, n + 1):
                    for j in range(i + 1, n + 1):
                        f = LinForm(n)
                        for (a, b, c, d) in ((k, l, i, j), (k, i, j, l), (k, j, l, i)):
                            t, sgn = self._resolve(a, b, c, d)
                            if t is not None:
                                f = f.axpy(RatFunc.const(n, sgn),
                                           LinForm(n, {(t, (0,) * n): RatFunc.const(n, 1)}))
                        if not f.is_zero():
                            ech.add(f)
        self.relations = ech
        self.parametric = [t for t in range(len(self.slots))
                           if (t, (0,) * n) not in ech.pivots]

    def _resolve(self, k, l, i, j):
        """Slot index and sign of rho_{kl,ij} in canonical coordinates."""
        sgn = 1
        if k == l or i == j:
            return None, 0
        if k > l:
            k, l = l, k
            sgn = -sgn
        if i > j:
            i, j = j, i
            sgn = -sgn
        return self.index[((k, l), (i, j))], sgn

    @property
    def dim(self) -> int:
        n = self.n
        return n * n * (n * n - 1) // 12

    def check_dim(self) -> bool:
        return len(self.parametric) == self.dim

    def component(self, values: dict[PairSlot, RatFunc], k, l, i, j) -> RatFunc:
        """Value rho_{kl,ij} of an element given by canonical slot values."""
        n = self.n
        t, sgn = self._resolve(k, l, i, j)
        zero = RatFunc.const(n, 0)
        if t is None:
            return zero
        v = values.get(self.slots[t], zero)
        return v if sgn > 0 else -v


def _metric_rf(metric: ConstMetric, i: int, j: int, inv: bool = False) -> Fraction:
    m = metric.omega_inv if inv else metric.omega
    return m[i - 1][j - 1]


def ricci_contract(space: RiemannComponentSpace, metric: ConstMetric,
                   values: dict[PairSlot, RatFunc]) -> dict[tuple[int, int], RatFunc]:
    """rho_ij = omega^{kl} rho_{ki,lj}; symmetric on cocycles."""
    n = space.n
    out = {}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            s = RatFunc.const(n, 0)
            for k in range(1, n + 1):
                for l in range(1, n + 1):
                    c = _metric_rf(metric, k, l, inv=True)
                    if c:
                        s = s + RatFunc.const(n, c) * space.component(values, k, i, l, j)
            out[(i, j)] = s
    return out


def ricci_trace(metric: ConstMetric, ricci: dict[tuple[int, int], RatFunc]) -> RatFunc:
    n = metric.n
    s = RatFunc.const(n, 0)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            c = _metric_rf(metric, i, j, inv=True)
            if c:
                a, b = min(i, j), max(i, j)
                s = s + RatFunc.const(n, c) * ricci[(a, b)]
    return s


def ricci_lift(space: RiemannComponentSpace, metric: ConstMetric,
               tau: dict[tuple[int, int], RatFunc]) -> dict[PairSlot, RatFunc]:
    """Canonical lift of a symmetric 2-tensor into the component space, the
    section of ricci_contract used by the trace-free splitting."""
    n = space.n
    if n < 3:
        raise PreconditionError("splitting requires n >= 3")
    tr = ricci_trace(metric, tau)

    def tau_at(i, j):
        a, b = min(i, j), max(i, j)
        return tau[(a, b)]

    c1 = Fraction(n, n - 2)
    c2 = Fraction(n, 2 * (n - 1) * (n - 2))
    t2 = {}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            t2[(i, j)] = (RatFunc.const(n, c1) * tau_at(i, j)
                          - (RatFunc.const(n, c2 * _metric_rf(metric, i, j)) * tr))

    def t2_at(i, j):
        a, b = min(i, j), max(i, j)
        return t2[(a, b)]

    out = {}
    inv_n = Fraction(1, n)
    for slot in space.slots:
        (k, l), (i, j) = slot
        val = (RatFunc.const(n, inv_n * _metric_rf(metric, k, i)) * t2_at(l, j)
               - RatFunc.const(n, inv_n * _metric_rf(metric, k, j)) * t2_at(l, i)
               - RatFunc.const(n, inv_n * _metric_rf(metric, l, i)) * t2_at(k, j)
               + RatFunc.const(n, inv_n * _metric_rf(metric, l, j)) * t2_at(k, i))
        out[slot] = val
    return out


def weyl_project(space: RiemannComponentSpace, metric: ConstMetric,
                 values: dict[PairSlot, RatFunc]) -> dict[PairSlot, RatFunc]:
    """Trace-free part: subtract the lift of the contraction."""
    ricci = ricci_contract(space, metric, values)
    lifted = ricci_lift(space, metric, ricci)
    n = space.n
    zero = RatFunc.const(n, 0)
    return {slot: values.get(slot, zero) - lifted.get(slot, zero)
            for slot in space.slots}


# ---------------------------------------------------------------------------
# linearized curvature operators at a constant metric
# ---------------------------------------------------------------------------

def _zero_row(n: int, width: int) -> list[DiffOp]:
    return [DiffOp.zero(n) for _ in range(width)]

def _row_axpy(row, c: Fraction, other):
    if not c:
        return row
    cf = RatFunc.const(other[0].n, c)
    return [a + b.lscale(cf) for a, b in zip(row, other)]


def riemann_rows(metric: ConstMetric):
    """Second-order rows R_{kl,ij}(Omega), one per canonical slot of the
    component space: R_{kl,ij} = (d_li O_kj + d_kj O_li - d_ki O_lj - d_lj O_ki)/2."""
    n = metric.n
    space = RiemannComponentSpace(n)
    width = len(sym_slots(n))
    half = Fraction(1, 2)
    rows: dict[PairSlot, list[DiffOp]] = {}
    for slot in space.slots:
        (k, l), (i, j) = slot
        row = _zero_row(n, width)

        def put(row, a, b, u, v, c):
            s = sym_index(n, u, v)
            row[s] = row[s] + DiffOp.d(n, a, b).lscale(RatFunc.const(n, c))
            return row

        row = put(row, l, i, k, j, half)
        row = put(row, k, j, l, i, half)
        row = put(row, k, i, l, j, -half)
        row = put(row, l, j, k, i, -half)
        rows[slot] = row
    return space, rows


def _component_row(space: RiemannComponentSpace, rows, k, l, i, j, n, width):
    t, sgn = space._resolve(k, l, i, j)
    if t is None:
        return _zero_row(n, width)
    row = rows[space.slots[t]]
    return row if sgn > 0 else [(-e) for e in row]


def ricci_rows(metric: ConstMetric, space: RiemannComponentSpace, rows):
    """Contractions rho_ij = omega^{kl} R_{ki,lj} as operator rows, i <= j."""
    n = metric.n
    width = len(sym_slots(n))
    out: dict[tuple[int, int], list[DiffOp]] = {}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            acc = _zero_row(n, width)
            for k in range(1, n + 1):
                for l in range(1, n + 1):
                    c = metric.omega_inv[k - 1][l - 1]
                    if c:
                        acc = _row_axpy(acc, c,
                                        _component_row(space, rows, k, i, l, j, n, width))
            out[(i, j)] = acc
    return out


def weyl_rows(metric: ConstMetric):
    """Trace-free projection of the curvature rows: the linearized fourth-
    index-symmetry-free tensor whose vanishing is conformal flatness."""
    n = metric.n
    if n < 3:
        raise PreconditionError("trace-free splitting requires n >= 3")
    space, rr = riemann_rows(metric)
    width = len(sym_slots(n))
    ricci = ricci_rows(metric, space, rr)

    def ric(i, j):
        a, b = min(i, j), max(i, j)
        return ricci[(a, b)]

    trace = _zero_row(n, width)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            trace = _row_axpy(trace, metric.omega_inv[i - 1][j - 1], ric(i, j))

    c1 = Fraction(n, n - 2)
    c2 = Fraction(n, 2 * (n - 1) * (n - 2))
    t2: dict[tuple[int, int], list[DiffOp]] = {}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            acc = _row_axpy(_zero_row(n, width), c1, ric(i, j))
            acc = _row_axpy(acc, -c2 * metric.omega[i - 1][j - 1], trace)
            t2[(i, j)] = acc

    def t2_at(i, j):
        a, b = min(i, j), max(i, j)
        return t2[(a, b)]

    inv_n = Fraction(1, n)
    out: dict[PairSlot, list[DiffOp]] = {}
    for slot in space.slots:
        (k, l), (i, j) = slot
        lift = _row_axpy(_zero_row(n, width), inv_n * metric.omega[k - 1][i - 1], t2_at(l, j))
        lift = _row_axpy(lift, -inv_n * metric.omega[k - 1][j - 1], t2_at(l, i))
        lift = _row_axpy(lift, -inv_n * metric.omega[l - 1][i - 1], t2_at(k, j))
        lift = _row_axpy(lift, inv_n * metric.omega[l - 1][j - 1], t2_at(k, i))
        out[slot] = [a - b for a, b in zip(rr[slot], lift)]
    return space, out


def riemann_operator(metric: ConstMetric) -> OpMatrix:
    """The curvature rows on the independent component slots only."""
    space, rows = riemann_rows(metric)
    picked = [rows[space.slots[t]] for t in space.parametric]
    return OpMatrix(metric.n, len(picked), len(sym_slots(metric.n)), picked)


def ricci_operator(metric: ConstMetric) -> OpMatrix:
    space, rows = riemann_rows(metric)
    ric = ricci_rows(metric, space, rows)
    slots = sym_slots(metric.n)
    return OpMatrix(metric.n, len(slots), len(slots),
                    [ric[s] for s in slots])


def dalembertian(metric: ConstMetric) -> DiffOp:
    n = metric.n
    out = DiffOp.zero(n)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            c = metric.omega_inv[i - 1][j - 1]
            if c:
                out = out + DiffOp.d(n, i, j).lscale(RatFunc.const(n, c))
    return out
