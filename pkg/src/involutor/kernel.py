"""Exact arithmetic foundation: rationals, sparse multivariate polynomials,
the rational-function field K = Q(x1,...,xn) with its commuting derivations,
and multi-index combinatorics.

Every value carries the number n of independent variables; mixing values
from different contexts is a hard error.  All values are immutable and all
operations are pure, so everything here is safe to share between tasks.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd
from typing import Iterable, Mapping

from .errors import ContextMismatchError, MalformedInputError, NoClassError

Rat = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


# ---------------------------------------------------------------------------
# multi-indices
# ---------------------------------------------------------------------------

def mi_zero(n: int) -> tuple[int, ...]:
    return (0,) * n


def mi_add(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def mi_sub(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    """Componentwise difference; caller checks nonnegativity if needed."""
    return tuple(x - y for x, y in zip(a, b))


def mi_plus1(mu: tuple[int, ...], i: int) -> tuple[int, ...]:
    """mu + 1_i with axis i in 1..n."""
    return mu[: i - 1] + (mu[i - 1] + 1,) + mu[i:]


def mi_len(mu: tuple[int, ...]) -> int:
    return sum(mu)


def class_of(mu: tuple[int, ...]) -> int:
    """Least axis i (1-based) with mu_i > 0; the zero multi-index has none."""
    for i, v in enumerate(mu):
        if v > 0:
            return i + 1
    raise NoClassError("the zero multi-index has no class")


def mi_all(n: int, length: int) -> list[tuple[int, ...]]:
    """All multi-indices of the given exact length, in a fixed order."""
    if n == 1:
        return [(length,)]
    out = []
    for first in range(length, -1, -1):
        for rest in mi_all(n - 1, length - first):
            out.append((first,) + rest)
    return out


def mi_up_to(n: int, length: int) -> list[tuple[int, ...]]:
    out = []
    for q in range(length + 1):
        out.extend(mi_all(n, q))
    return out


def mi_binom(mu: tuple[int, ...], nu: tuple[int, ...]) -> int:
    """Product of componentwise binomial coefficients binom(mu_i, nu_i)."""
    r = 1
    for m, v in zip(mu, nu):
        if v < 0 or v > m:
            return 0
        r *= _binom(m, v)
    return r


def _binom(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    k = min(k, n - k)
    num = 1
    den = 1
    for i in range(k):
        num *= n - i
        den *= i + 1
    return num // den


def mi_str(mu: tuple[int, ...]) -> str:
    """Digit rendering: (2,0,1) -> "113"."""
    return "".join(str(i + 1) * v for i, v in enumerate(mu))


# ---------------------------------------------------------------------------
# grevlex monomial order with x_n > ... > x_1 (used only for normalization)
# ---------------------------------------------------------------------------

def grevlex_key(e: tuple[int, ...]):
    return (sum(e), tuple(-v for v in e))


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

class Poly:
    """Sparse multivariate polynomial over Q.

    Terms map exponent tuples of length ``n`` to nonzero Fractions.
    """

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Mapping[tuple[int, ...], Fraction] | None = None):
        self.n = n
        t = {}
        if terms:
            for e, c in terms.items():
                if c:
                    t[e] = c
        self.terms = t
        self._hash = None

    # -- constructors -------------------------------------------------------

    @staticmethod
    def const(n: int, c) -> "Poly":
        c = Fraction(c)
        return Poly(n, {mi_zero(n): c} if c else {})

    @staticmethod
    def var(n: int, i: int, power: int = 1) -> "Poly":
        """The monomial x_i^power, i in 1..n."""
        if not 1 <= i <= n:
            raise MalformedInputError(f"variable index {i} out of range 1..{n}")
        e = [0] * n
        e[i - 1] = power
        return Poly(n, {tuple(e): _ONE})

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and mi_zero(self.n) in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return _ZERO
        return self.terms.get(mi_zero(self.n), _ZERO)

    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    # -- arithmetic ---------------------------------------------------------

    def _chk(self, other: "Poly"):
        if self.n != other.n:
            raise ContextMismatchError(f"polynomials over {self.n} and {other.n} variables")

    def __add__(self, other: "Poly") -> "Poly":
        self._chk(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            s = t.get(e, _ZERO) + c
            if s:
                t[e] = s
            else:
                t.pop(e, None)
        return Poly(self.n, t)

    def __neg__(self) -> "Poly":
        return Poly(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        self._chk(other)
        if not self.terms or not other.terms:
            return Poly(self.n)
        if other.is_constant():
            c = other.constant_value()
            return self.scale(c)
        if self.is_constant():
            return other.scale(self.constant_value())
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = mi_add(e1, e2)
                s = t.get(e, _ZERO) + c1 * c2
                if s:
                    t[e] = s
                else:
                    del t[e]
        return Poly(self.n, t)

    def scale(self, c: Fraction) -> "Poly":
        if not c:
            return Poly(self.n)
        return Poly(self.n, {e: c * v for e, v in self.terms.items()})

    def __pow__(self, k: int) -> "Poly":
        r = Poly.const(self.n, 1)
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b
            k >>= 1
        return r

    def derive(self, i: int) -> "Poly":
        """Partial derivative with respect to x_i, i in 1..n."""
        t: dict = {}
        for e, c in self.terms.items():
            k = e[i - 1]
            if k:
                e2 = e[: i - 1] + (k - 1,) + e[i:]
                s = t.get(e2, _ZERO) + c * k
                if s:
                    t[e2] = s
                else:
                    del t[e2]
        return Poly(self.n, t)

    # -- structure ----------------------------------------------------------

    def leading_exp(self) -> tuple[int, ...]:
        return max(self.terms, key=grevlex_key)

    def leading_coeff(self) -> Fraction:
        return self.terms[self.leading_exp()]

    def extend(self, n: int) -> "Poly":
        """Reinterpret in a larger context (new trailing variables)."""
        if n < self.n:
            raise ContextMismatchError("cannot shrink a polynomial context")
        pad = (0,) * (n - self.n)
        return Poly(n, {e + pad: c for e, c in self.terms.items()})

    def subst_linear(self, rows: list[list[Fraction]]) -> "Poly":
        """Substitute x_i -> sum_j rows[i][j] * x_j (square change of variables)."""
        n = self.n
        lin = [Poly(n, {tuple(1 if k == j else 0 for k in range(n)): Fraction(rows[i][j])
                        for j in range(n) if rows[i][j]}) for i in range(n)]
        out = Poly(n)
        for e, c in self.terms.items():
            m = Poly.const(n, c)
            for i, p in enumerate(e):
                if p:
                    m = m * (lin[i] ** p)
            out = out + m
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=grevlex_key, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                f"x{i + 1}" + (f"^{p}" if p > 1 else "")
                for i, p in enumerate(e) if p
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        s = parts[0]
        for p in parts[1:]:
            s += " - " + p[1:] if p.startswith("-") else " + " + p
        return s


# -- gcd machinery -----------------------------------------------------------

def _content(p: Poly) -> Fraction:
    """Positive rational content; leading-term sign carried separately."""
    if not p.terms:
        return _ONE
    num = 0
    den = 1
    for c in p.terms.values():
        num = _int_gcd(num, abs(c.numerator))
        den = den * c.denominator // _int_gcd(den, c.denominator)
    return Fraction(num, den)


def _primitive(p: Poly) -> Poly:
    c = _content(p)
    if c == 1:
        return p
    return p.scale(1 / c)


def _max_var(p: Poly) -> int:
    """Highest 1-based variable index occurring, or 0 for constants."""
    best = 0
    for e in p.terms:
        for i in range(p.n - 1, best - 1, -1):
            if e[i]:
                best = max(best, i + 1)
                break
    return best


def _as_univariate(p: Poly, v: int) -> dict[int, Poly]:
    """Coefficients of p as a polynomial in x_v over the remaining variables."""
    out: dict[int, Poly] = {}
    for e, c in p.terms.items():
        d = e[v - 1]
        e2 = e[: v - 1] + (0,) + e[v:]
        q = out.setdefault(d, Poly(p.n))
        q.terms[e2] = q.terms.get(e2, _ZERO) + c
    return {d: Poly(p.n, q.terms) for d, q in out.items() if any(q.terms.values())}


def _from_univariate(coeffs: dict[int, Poly], v: int, n: int) -> Poly:
    t: dict = {}
    for d, q in coeffs.items():
        for e, c in q.terms.items():
            e2 = e[: v - 1] + (d,) + e[v:]
            t[e2] = t.get(e2, _ZERO) + c
    return Poly(n, t)


def _pseudo_rem(a: dict[int, Poly], b: dict[int, Poly], v: int, n: int) -> dict[int, Poly]:
    da = max(a) if a else -1
    db = max(b)
    lb = b[db]
    r = dict(a)
    while r and max(r) >= db:
        dr = max(r)
        lr = r[dr]
        new: dict[int, Poly] = {}
        for d, q in r.items():
            new[d] = q * lb
        for d, q in b.items():
            dd = d + dr - db
            new[dd] = new.get(dd, Poly(n)) - q * lr
        r = {d: q for d, q in new.items() if not q.is_zero()}
    return r


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Gcd over Q, normalized primitive with positive leading coefficient."""
    if a.n != b.n:
        raise ContextMismatchError("gcd of polynomials from different contexts")
    if a.is_zero():
        g = _primitive(b)
    elif b.is_zero():
        g = _primitive(a)
    else:
        g = _gcd_rec(_primitive(a), _primitive(b))
    if g.is_zero():
        return g
    if g.leading_coeff() < 0:
        g = g.scale(Fraction(-1))
    return g


def _vars_used(p: Poly) -> set[int]:
    used: set[int] = set()
    for e in p.terms:
        for i, v in enumerate(e):
            if v:
                used.add(i + 1)
    return used


def _gcd_univariate(a: Poly, b: Poly, v: int) -> Poly:
    """Monic Euclid in the single variable v; no coefficient swell over Q."""
    ua = {d: q.constant_value() for d, q in _as_univariate(a, v).items()}
    ub = {d: q.constant_value() for d, q in _as_univariate(b, v).items()}

    def monic(u):
        lc = u[max(u)]
        return {d: c / lc for d, c in u.items()}

    def rem(u, w):
        dw = max(w)
        u = dict(u)
        while u and max(u) >= dw:
            du = max(u)
            lc = u[du]
            for d, c in w.items():
                dd = d + du - dw
                s = u.get(dd, _ZERO) - c * lc
                if s:
                    u[dd] = s
                else:
                    u.pop(dd, None)
        return u

    while ub:
        ua, ub = ub, rem(monic(ua), monic(ub))
    g = Poly(a.n, {tuple(d if i == v - 1 else 0 for i in range(a.n)): c
                   for d, c in monic(ua).items()})
    return _primitive(g)


def _gcd_rec(a: Poly, b: Poly) -> Poly:
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    if a.is_constant() or b.is_constant():
        return Poly.const(a.n, 1)
    used = _vars_used(a) | _vars_used(b)
    if len(used) == 1:
        return _gcd_univariate(a, b, next(iter(used)))
    v = max(used)
    pa, ca = _split_content(a, v)
    pb, cb = _split_content(b, v)
    cont = _gcd_rec(ca, cb)
    if max(pa) < max(pb):
        pa, pb = pb, pa
    # primitive PRS with full (polynomial and rational) content removal
    while pb:
        r = _pseudo_rem(pa, pb, v, a.n)
        pa, pb = pb, r
        if pb:
            pb, _ = _split_content(_from_univariate(pb, v, a.n), v)
    g = _from_univariate(pa, v, a.n)
    g, _ = _split_content(g, v)
    return _primitive(_from_univariate(g, v, a.n)) * cont


def _split_content(p: Poly, v: int) -> tuple[dict[int, Poly], Poly]:
    """Write p as content * primitive-part as a polynomial in x_v.

    Returns (primitive part as univariate coefficient map, content).
    The rational content is folded out of the primitive part as well.
    """
    up = _as_univariate(p, v)
    c = _coeff_gcd(list(up.values()))
    if not c.is_constant():
        up = {d: _exact_div_all(q, c) for d, q in up.items()}
    rc = _content(_from_univariate(up, v, p.n))
    if rc != 1:
        up = {d: q.scale(1 / rc) for d, q in up.items()}
    return up, c


def _coeff_gcd(ps: list[Poly]) -> Poly:
    g = Poly(ps[0].n)
    for p in ps:
        g = _gcd_rec(g, _primitive(p))
        if g.is_constant() and not g.is_zero():
            return Poly.const(ps[0].n, 1)
    return g if not g.is_zero() else Poly.const(ps[0].n, 1)


def _exact_div_all(p: Poly, d: Poly) -> Poly:
    q, r = poly_divmod(p, d)
    if not r.is_zero():
        raise MalformedInputError("inexact polynomial division where exact expected")
    return q


def poly_divmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    """Division with remainder under grevlex leading terms (b != 0)."""
    if b.is_zero():
        raise MalformedInputError("polynomial division by zero")
    if b.is_constant():
        return a.scale(1 / b.constant_value()), Poly(a.n)
    q = Poly(a.n)
    r = a
    lb = b.leading_exp()
    cb = b.terms[lb]
    while not r.is_zero():
        reduced = False
        for e in sorted(r.terms, key=grevlex_key, reverse=True):
            d = mi_sub(e, lb)
            if all(x >= 0 for x in d):
                c = r.terms[e] / cb
                m = Poly(a.n, {d: c})
                q = q + m
                r = r - m * b
                reduced = True
                break
        if not reduced:
            break
    return q, r


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------

class RatFunc:
    """Element of K = Q(x1,...,xn), kept normalized: gcd(num, den) = 1 and
    den monic under grevlex with x_n > ... > x_1."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly, _normalized: bool = False):
        if den.is_zero():
            raise MalformedInputError("zero denominator")
        if num.n != den.n:
            raise ContextMismatchError("numerator and denominator contexts differ")
        if not _normalized:
            num, den = _normalize_pair(num, den)
        self.num = num
        self.den = den
        self._hash = None

    # -- constructors -------------------------------------------------------

    @staticmethod
    def const(n: int, c) -> "RatFunc":
        return RatFunc(Poly.const(n, c), Poly.const(n, 1), _normalized=True)

    @staticmethod
    def var(n: int, i: int) -> "RatFunc":
        return RatFunc(Poly.var(n, i), Poly.const(n, 1), _normalized=True)

    @staticmethod
    def from_poly(p: Poly) -> "RatFunc":
        return RatFunc(p, Poly.const(p.n, 1), _normalized=True)

    # -- predicates ---------------------------------------------------------

    @property
    def n(self) -> int:
        return self.num.n

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    # -- arithmetic ---------------------------------------------------------

    def _chk(self, other: "RatFunc"):
        if self.n != other.n:
            raise ContextMismatchError(f"values over {self.n} and {other.n} variables")

    def __add__(self, other: "RatFunc") -> "RatFunc":
        self._chk(other)
        if self.is_constant() and other.is_constant():
            return RatFunc.const(self.n, self.constant_value() + other.constant_value())
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den, _normalized=True)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        self._chk(other)
        if self.is_constant():
            if other.is_constant():
                return RatFunc.const(self.n, self.constant_value() * other.constant_value())
            c = self.constant_value()
            if not c:
                return RatFunc.const(self.n, 0)
            return RatFunc(other.num.scale(c), other.den, _normalized=True)
        if other.is_constant():
            c = other.constant_value()
            if not c:
                return RatFunc.const(self.n, 0)
            return RatFunc(self.num.scale(c), self.den, _normalized=True)
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        self._chk(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        if other.is_constant():
            return self * RatFunc.const(self.n, 1 / other.constant_value())
        return RatFunc(self.num * other.den, self.den * other.num)

    def inv(self) -> "RatFunc":
        return RatFunc.const(self.n, 1) / self

    def derive(self, i: int) -> "RatFunc":
        """d/dx_i by the quotient rule."""
        if self.den.is_constant():
            return RatFunc(self.num.derive(i), self.den, _normalized=True)
        nn = self.num.derive(i) * self.den - self.num * self.den.derive(i)
        return RatFunc(nn, self.den * self.den)

    def extend(self, n: int) -> "RatFunc":
        return RatFunc(self.num.extend(n), self.den.extend(n), _normalized=True)

    def subst_linear(self, rows) -> "RatFunc":
        return RatFunc(self.num.subst_linear(rows), self.den.subst_linear(rows))

    def __eq__(self, other) -> bool:
        return (isinstance(other, RatFunc) and self.num == other.num
                and self.den == other.den)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __repr__(self):
        return f"RatFunc({self})"

    def __str__(self):
        if self.den.is_constant() and self.den.constant_value() == 1:
            return str(self.num)
        ns = str(self.num)
        if len(self.num.terms) > 1 or "/" in ns or "*" in ns:
            ns = f"({ns})"
        ds = str(self.den)
        if len(self.den.terms) > 1 or "/" in ds or "*" in ds:
            ds = f"({ds})"
        return f"{ns}/{ds}"


def _normalize_pair(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if num.is_zero():
        return Poly(num.n), Poly.const(num.n, 1)
    if den.is_constant():
        c = den.constant_value()
        return num.scale(1 / c), Poly.const(num.n, 1)
    if num.is_constant():
        lc = den.leading_coeff()
        return num.scale(1 / lc), den.scale(1 / lc)
    g = poly_gcd(num, den)
    if not g.is_constant():
        num = _exact_div_all(num, g)
        den = _exact_div_all(den, g)
    if den.is_constant():
        c = den.constant_value()
        return num.scale(1 / c), Poly.const(num.n, 1)
    lc = den.leading_coeff()
    if lc != 1:
        num = num.scale(1 / lc)
        den = den.scale(1 / lc)
    return num, den


def normalize(f: RatFunc) -> RatFunc:
    """Canonical representative (idempotent; arithmetic already normalizes)."""
    return RatFunc(f.num, f.den)


def derive(i: int, f: RatFunc) -> RatFunc:
    """Derivation d_i on K; the derivations commute pairwise."""
    if not 1 <= i <= f.n:
        raise MalformedInputError(f"axis {i} out of range 1..{f.n}")
    return f.derive(i)
