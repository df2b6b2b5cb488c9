"""Jet-coordinate view of a linear system: solved form, Janet boards,
characters, prolongation, and solution-space dimensions.

A linear form on jet coordinates maps (k, mu) -> coefficient in K, where k
is the unknown index (0-based) and mu a multi-index.  The term order on jet
coordinates puts higher |mu| first, then higher class of mu, then
reverse-lexicographic mu, then higher unknown index.  Solved form is the
unique reduced row echelon form for that order, which makes the class-n
equations come out solved first, as a Janet board expects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Optional, Sequence

from .errors import (
    ContextMismatchError,
    InconsistentSystemError,
    NotSolvedError,
)
from .kernel import (
    RatFunc,
    class_of,
    mi_all,
    mi_len,
    mi_plus1,
    mi_str,
    mi_up_to,
    mi_zero,
)
from .ore import DiffOp, OpMatrix

Coord = tuple[int, tuple[int, ...]]


def coord_key(coord: Coord):
    """Sort key: greater key = greater jet coordinate."""
    k, mu = coord
    length = 0
    cls = 0
    for i, v in enumerate(mu):
        if v and not cls:
            cls = i + 1
        length += v
    return (length, cls, tuple(reversed(mu)), k)


def coord_str(coord: Coord, names: Optional[Sequence[str]] = None) -> str:
    k, mu = coord
    base = names[k] if names else f"y{k + 1}"
    return base if not mi_len(mu) else f"{base}_{mi_str(mu)}"


class LinForm:
    """Linear form sum a_{k,mu} y^k_mu with coefficients in K."""

    __slots__ = ("n", "terms", "_leader")

    def __init__(self, n: int, terms=None):
        self.n = n
        t = {}
        if terms:
            for c, v in terms.items():
                if not v.is_zero():
                    t[c] = v
        self.terms = t
        self._leader = None

    @staticmethod
    def zero(n: int) -> "LinForm":
        return LinForm(n)

    @staticmethod
    def unit(n: int, coord: Coord) -> "LinForm":
        return LinForm(n, {coord: RatFunc.const(n, 1)})

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        if not self.terms:
            return -1
        return max(mi_len(mu) for _, mu in self.terms)

    def leader(self) -> Coord:
        if self._leader is None:
            self._leader = max(self.terms, key=coord_key)
        return self._leader

    def coeff(self, coord: Coord) -> RatFunc:
        v = self.terms.get(coord)
        return v if v is not None else RatFunc.const(self.n, 0)

    def axpy(self, c: RatFunc, other: "LinForm") -> "LinForm":
        """self + c * other."""
        if c.is_zero() or other.is_zero():
            return self
        t = dict(self.terms)
        for coord, v in other.terms.items():
            s = t.get(coord)
            s = c * v if s is None else s + c * v
            if s.is_zero():
                t.pop(coord, None)
            else:
                t[coord] = s
        return LinForm(self.n, t)

    def scale(self, c: RatFunc) -> "LinForm":
        if c.is_zero():
            return LinForm(self.n)
        return LinForm(self.n, {coord: c * v for coord, v in self.terms.items()})

    def __add__(self, other: "LinForm") -> "LinForm":
        return self.axpy(RatFunc.const(self.n, 1), other)

    def __sub__(self, other: "LinForm") -> "LinForm":
        return self.axpy(RatFunc.const(self.n, -1), other)

    def prolong(self, i: int) -> "LinForm":
        """Formal derivative d_i with the Leibniz correction on coefficients."""
        t: dict = {}
        for (k, mu), a in self.terms.items():
            da = a.derive(i)
            if not da.is_zero():
                c0 = (k, mu)
                s = t.get(c0)
                s = da if s is None else s + da
                if s.is_zero():
                    t.pop(c0, None)
                else:
                    t[c0] = s
            c1 = (k, mi_plus1(mu, i))
            s = t.get(c1)
            s = a if s is None else s + a
            if s.is_zero():
                t.pop(c1, None)
            else:
                t[c1] = s
        return LinForm(self.n, t)

    def prolong_mi(self, nu: tuple[int, ...]) -> "LinForm":
        f = self
        for i, p in enumerate(nu):
            for _ in range(p):
                f = f.prolong(i + 1)
        return f

    def __eq__(self, other) -> bool:
        return isinstance(other, LinForm) and self.n == other.n and self.terms == other.terms

    def __repr__(self):
        return f"LinForm({self})"

    def __str__(self):
        return self.render()

    def render(self, names: Optional[Sequence[str]] = None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for coord in sorted(self.terms, key=coord_key, reverse=True):
            c = str(self.terms[coord])
            name = coord_str(coord, names)
            if c == "1":
                parts.append(name)
            elif c == "-1":
                parts.append("-" + name)
            else:
                if "+" in c or c[1:].count("-") or "/" in c:
                    c = f"({c})"
                parts.append(f"{c}*{name}")
        s = parts[0]
        for p in parts[1:]:
            s += " - " + p[1:] if p.startswith("-") else " + " + p
        return s


# ---------------------------------------------------------------------------
# reduced row echelon over jet coordinates
# ---------------------------------------------------------------------------

class Echelon:
    """Row echelon basis of a space of linear forms.

    Rows optionally carry origin forms (same LinForm machinery on bookkeeping
    coordinates) that follow every row operation, so reductions double as
    certificate extraction.  With ``reduced=True`` the basis is kept fully
    inter-reduced (canonical); membership-only uses can skip that.
    """

    __slots__ = ("n", "rows", "pivots", "track", "reduced")

    def __init__(self, n: int, track: bool = False, reduced: bool = True):
        self.n = n
        self.rows: list[tuple[LinForm, Optional[LinForm]]] = []
        self.pivots: dict[Coord, int] = {}
        self.track = track
        self.reduced = reduced

    def reduce(self, form: LinForm, origin: Optional[LinForm] = None):
        """Normal form against the basis; origin follows along."""
        while not form.is_zero():
            hit = None
            best = None
            for coord in form.terms:
                idx = self.pivots.get(coord)
                if idx is not None:
                    key = coord_key(coord)
                    if best is None or key > best:
                        best = key
                        hit = coord
            if hit is None:
                break
            idx = self.pivots[hit]
            c = -form.terms[hit]
            prow, porg = self.rows[idx]
            form = form.axpy(c, prow)
            if origin is not None and porg is not None:
                origin = origin.axpy(c, porg)
        return form, origin

    def add(self, form: LinForm, origin: Optional[LinForm] = None) -> bool:
        """Insert a form; returns True if it enlarged the span."""
        form, origin = self.reduce(form, origin)
        if form.is_zero():
            return False
        lead = form.leader()
        c = form.terms[lead]
        inv = c.inv()
        form = form.scale(inv)
        if origin is not None:
            origin = origin.scale(inv)
        idx = len(self.rows)
        self.rows.append((form, origin))
        self.pivots[lead] = idx
        if self.reduced:
            # back-substitute into earlier rows so tails stay pivot-free
            for j, (rf, ro) in enumerate(self.rows[:-1]):
                v = rf.terms.get(lead)
                if v is not None:
                    nf = rf.axpy(-v, form)
                    no = ro.axpy(-v, origin) if (ro is not None and origin is not None) else ro
                    self.rows[j] = (nf, no)
        return True

    def __len__(self):
        return len(self.rows)


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoardRow:
    leader: Coord
    cls: int            # 0 for equations below the top order (no class)
    mult: tuple[int, ...]
    nonmult: tuple[int, ...]


@dataclass(frozen=True)
class Characters:
    q: int
    beta: tuple[int, ...]   # beta[i-1] = number of class-i leaders of order q
    alpha: tuple[int, ...]
    involutive: bool        # provisional when computed on a non-involutive system

    @property
    def rank_witness(self) -> int:
        """alpha^n_q, the differential rank."""
        return self.alpha[-1]


class JetSystem:
    """Order-q linear system on jet coordinates, m unknowns, n variables."""

    def __init__(self, n: int, m: int, equations: Iterable[LinForm], order: Optional[int] = None):
        self.n = n
        self.m = m
        self.equations = [e for e in equations if not e.is_zero()]
        for e in self.equations:
            if e.n != n:
                raise ContextMismatchError("equation from wrong context")
        eq_order = max((e.order() for e in self.equations), default=0)
        self.q = eq_order if order is None else max(order, eq_order)

    # -- conversions ---------------------------------------------------------

    @staticmethod
    def from_opmatrix(D: OpMatrix, order: Optional[int] = None) -> "JetSystem":
        eqs = []
        for row in D.rows:
            f = LinForm(D.n)
            for k, op in enumerate(row):
                for mu, c in op.terms.items():
                    f = f.axpy(RatFunc.const(D.n, 1), LinForm(D.n, {(k, mu): c}))
            if not f.is_zero():
                eqs.append(f)
        return JetSystem(D.n, D.m, eqs, order=order)

    def to_opmatrix(self) -> OpMatrix:
        rows = []
        for f in self.equations:
            cols: dict[int, dict] = {}
            for (k, mu), c in f.terms.items():
                cols.setdefault(k, {})[mu] = c
            rows.append([DiffOp(self.n, cols.get(k)) for k in range(self.m)])
        if not rows:
            return OpMatrix.zero(self.n, 0, self.m)
        return OpMatrix.from_rows(self.n, self.m, rows)

    # -- prolongation ---------------------------------------------------------

    def prolong(self, r: int) -> "JetSystem":
        """All formal derivatives d_nu, |nu| <= r, of all equations."""
        eqs = []
        for f in self.equations:
            for nu in mi_up_to(self.n, r):
                eqs.append(f.prolong_mi(nu))
        return JetSystem(self.n, self.m, eqs, order=self.q + r)

    # -- solving ---------------------------------------------------------------

    def autoreduce(self, origins: Optional[list[LinForm]] = None) -> "SolvedSystem":
        """Unique reduced echelon (solved) form; tracks origins if given."""
        track = origins is not None
        ech = Echelon(self.n, track=track)
        for i, f in enumerate(self.equations):
            ech.add(f, origins[i] if track else None)
        return SolvedSystem(self.n, self.m, ech, declared_order=self.q)

    def solution_dims(self, r_max: int) -> tuple[list[int], list[list[Coord]]]:
        """dim_K R_{q+r} and the parametric jets, for r = 0..r_max."""
        dims: list[int] = []
        pars: list[list[Coord]] = []
        ech = Echelon(self.n, reduced=False)
        for r in range(r_max + 1):
            for f in self.equations:
                gap = self.q + r - f.order()
                if r > 0 and gap > 0:
                    nus = mi_all(self.n, gap)      # shorter ones added earlier
                else:
                    nus = mi_up_to(self.n, gap)
                for nu in nus:
                    ech.add(f.prolong_mi(nu))
            total = jet_count(self.n, self.m, self.q + r)
            dims.append(total - len(ech))
            par = [c for c in all_coords(self.n, self.m, self.q + r)
                   if c not in ech.pivots]
            par.sort(key=coord_key)
            pars.append(par)
        return dims, pars

    def transform(self, rows, inv_rows) -> "JetSystem":
        """Invertible linear change of the independent variables."""
        D = self.to_opmatrix().transform(rows, inv_rows)
        return JetSystem.from_opmatrix(D, order=self.q)

    def __repr__(self):
        return f"JetSystem(n={self.n}, m={self.m}, q={self.q}, eqs={len(self.equations)})"


def jet_count(n: int, m: int, order: int) -> int:
    return m * comb(n + order, n)


def all_coords(n: int, m: int, order: int) -> list[Coord]:
    return [(k, mu) for mu in mi_up_to(n, order) for k in range(m)]


class SolvedSystem:
    """Reduced echelon system with leaders, classes, and Janet board."""

    def __init__(self, n: int, m: int, ech: Echelon, declared_order: int = 0):
        self.n = n
        self.m = m
        order = [i for i in range(len(ech.rows))]
        order.sort(key=lambda i: coord_key(ech.rows[i][0].leader()), reverse=True)
        self.eqs: list[LinForm] = [ech.rows[i][0] for i in order]
        self.origins: list[Optional[LinForm]] = [ech.rows[i][1] for i in order]
        self.q = max((f.order() for f in self.eqs), default=max(declared_order, 0))
        self._span_cache: dict[int, Echelon] = {}

    @property
    def leaders(self) -> list[Coord]:
        return [f.leader() for f in self.eqs]

    def system(self) -> JetSystem:
        return JetSystem(self.n, self.m, self.eqs, order=self.q)

    def to_opmatrix(self) -> OpMatrix:
        return self.system().to_opmatrix()

    # -- board -----------------------------------------------------------------

    def board(self) -> list[BoardRow]:
        rows = []
        for f in self.eqs:
            k, mu = f.leader()
            if mi_len(mu) == self.q and mi_len(mu) > 0:
                cls = class_of(mu)
            else:
                cls = 0
            mult = tuple(range(1, cls + 1))
            nonmult = tuple(range(cls + 1, self.n + 1))
            rows.append(BoardRow((k, mu), cls, mult, nonmult))
        return rows

    def render_board(self) -> str:
        lines = []
        for row in self.board():
            cells = [str(i) if i <= row.cls else "•" for i in range(1, self.n + 1)]
            lines.append(" ".join(cells))
        return "\n".join(lines)

    def parametric_board(self, order: Optional[int] = None) -> list[BoardRow]:
        """Board of the parametric jets of strict order q (same layout)."""
        q = self.q if order is None else order
        pivots = set(self.leaders)
        rows = []
        for (k, mu) in all_coords(self.n, self.m, q):
            if mi_len(mu) != q or (k, mu) in pivots:
                continue
            cls = class_of(mu) if q > 0 else 0
            rows.append(BoardRow((k, mu), cls, tuple(range(1, cls + 1)),
                                 tuple(range(cls + 1, self.n + 1))))
        rows.sort(key=lambda r: coord_key(r.leader), reverse=True)
        return rows

    # -- characters --------------------------------------------------------------

    def characters(self, involutive: Optional[bool] = None) -> Characters:
        q = self.q
        beta = [0] * self.n
        for f in self.eqs:
            k, mu = f.leader()
            if mi_len(mu) == q and q > 0:
                beta[class_of(mu) - 1] += 1
        alpha = []
        for i in range(1, self.n + 1):
            count = self.m * _class_jet_count(self.n, q, i)
            alpha.append(count - beta[i - 1])
        if involutive is None:
            involutive = self.is_involutive()
        return Characters(q, tuple(beta), tuple(alpha), involutive)

    # -- involutive division machinery ---------------------------------------------

    def mult_axes(self, idx: int) -> tuple[int, ...]:
        f = self.eqs[idx]
        k, mu = f.leader()
        if mi_len(mu) == self.q and mi_len(mu) > 0:
            return tuple(range(1, class_of(mu) + 1))
        return ()

    def dots(self) -> list[tuple[int, int]]:
        """(equation index, non-multiplicative axis) pairs."""
        out = []
        for idx in range(len(self.eqs)):
            mult = set(self.mult_axes(idx))
            for j in range(1, self.n + 1):
                if j not in mult:
                    out.append((idx, j))
        return out

    def mult_span(self, order: int) -> Echelon:
        """Echelonized span of multiplicative prolongations up to the order.

        Rows track coefficients over bookkeeping coordinates (h, nu) meaning
        d_nu applied to solved equation h.
        """
        ech = self._span_cache.get(order)
        if ech is not None:
            return ech
        ech = Echelon(self.n, track=True, reduced=False)
        for h, f in enumerate(self.eqs):
            budget = order - f.order()
            if budget < 0:
                continue
            mult = self.mult_axes(h)
            for nu in _mult_indices(self.n, mult, budget):
                ech.add(f.prolong_mi(nu), LinForm.unit(self.n, (h, nu)))
        self._span_cache[order] = ech
        return ech

    def reduce_form(self, form: LinForm, track: bool = False):
        """Involutive normal form modulo the system at the form's order.

        With track=True also returns the combination over (h, nu) bookkeeping
        coordinates such that form = combination + remainder.
        """
        if form.is_zero():
            return (form, LinForm.zero(self.n)) if track else form
        span = self.mult_span(max(form.order(), self.q))
        rem, neg = span.reduce(form, LinForm.zero(self.n) if track else None)
        if track:
            return rem, neg.scale(RatFunc.const(self.n, -1))
        return rem

    def is_involutive(self) -> bool:
        ok, _ = self.involution_certificate()
        return ok

    def involution_certificate(self):
        """(flag, failures); failures list (eq index, axis, remainder)."""
        failures = []
        for idx, j in self.dots():
            g = self.eqs[idx].prolong(j)
            rem = self.reduce_form(g)
            if not rem.is_zero():
                failures.append((idx, j, rem))
        return (not failures), failures

    def __repr__(self):
        return f"SolvedSystem(n={self.n}, m={self.m}, q={self.q}, eqs={len(self.eqs)})"


def _class_jet_count(n: int, q: int, i: int) -> int:
    """Number of multi-indices of length q and class i (q >= 1)."""
    if q == 0:
        return 1 if i == n else 0
    return comb(q - 1 + n - i, n - i)


def _mult_indices(n: int, mult: tuple[int, ...], budget: int):
    """Multi-indices supported on the multiplicative axes, |nu| <= budget."""
    if not mult or budget <= 0:
        yield mi_zero(n)
        return
    c = len(mult)
    for small in mi_up_to(c, budget):
        nu = [0] * n
        for pos, axis in enumerate(mult):
            nu[axis - 1] = small[pos]
        yield tuple(nu)


# ---------------------------------------------------------------------------
# module-level convenience API
# ---------------------------------------------------------------------------

def from_opmatrix(D: OpMatrix) -> JetSystem:
    return JetSystem.from_opmatrix(D)


def to_opmatrix(S: JetSystem) -> OpMatrix:
    return S.to_opmatrix()


def autoreduce(S: JetSystem) -> SolvedSystem:
    return S.autoreduce()


def prolong(S: JetSystem, r: int) -> JetSystem:
    return S.prolong(r)


def janet_board(S: SolvedSystem) -> list[BoardRow]:
    if not isinstance(S, SolvedSystem):
        raise NotSolvedError("janet_board requires a solved system")
    return S.board()


def characters(S: SolvedSystem) -> Characters:
    return S.characters()


def solution_dims(S: JetSystem, r_max: int):
    return S.solution_dims(r_max)
