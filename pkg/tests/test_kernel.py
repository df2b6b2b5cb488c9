import random

import pytest

from involutor.errors import ContextMismatchError, MalformedInputError, NoClassError
from involutor.kernel import (
    Poly,
    RatFunc,
    class_of,
    derive,
    mi_all,
    mi_binom,
    mi_plus1,
    mi_str,
    normalize,
    poly_gcd,
)


def x(n, i):
    return RatFunc.var(n, i)


def c(n, v):
    return RatFunc.const(n, v)


# --- normalize ---------------------------------------------------------------

def test_normalize_gcd_cancellation():
    # 2*x1 / 4*x1^2 -> 1/(2*x1)
    n = 2
    f = RatFunc(Poly.var(n, 1).scale(2), Poly.var(n, 1, 2).scale(4))
    assert f == c(n, 1) / (x(n, 1) * c(n, 2))
    assert str(f) == "(1/2)/x1"


def test_normalize_zero():
    n = 2
    f = RatFunc(Poly(n), Poly.var(n, 2) + Poly.const(n, 1))
    assert f.is_zero()
    assert f.den == Poly.const(n, 1)


def test_normalize_factor_cancellation():
    # (x1^2 - 1)/(x1 - 1) -> x1 + 1
    n = 1
    f = RatFunc(Poly.var(n, 1, 2) - Poly.const(n, 1), Poly.var(n, 1) - Poly.const(n, 1))
    assert f == x(n, 1) + c(n, 1)


def test_normalize_idempotent():
    n = 2
    f = (x(n, 1) + x(n, 2)) / (x(n, 2) * x(n, 2))
    assert normalize(f) == f


def test_zero_denominator_rejected():
    with pytest.raises(MalformedInputError):
        RatFunc(Poly.const(2, 1), Poly(2))


def test_context_mixing_rejected():
    with pytest.raises(ContextMismatchError):
        x(2, 1) + x(3, 1)


# --- derive ------------------------------------------------------------------

def test_derive_product_of_vars():
    n = 3
    assert derive(1, x(n, 1) * x(n, 2)) == x(n, 2)


def test_derive_quotient_rule():
    n = 2
    f = c(n, 1) / x(n, 2)
    assert derive(2, f) == -(c(n, 1) / (x(n, 2) * x(n, 2)))


def test_derive_independent_axis():
    n = 3
    assert derive(3, x(n, 1)).is_zero()


def _random_ratfunc(rng, n):
    def rand_poly():
        p = Poly(n)
        for _ in range(rng.randint(1, 3)):
            e = tuple(rng.randint(0, 2) for _ in range(n))
            p = p + Poly(n, {e: rng.randint(-3, 3)})
        return p

    num = rand_poly()
    den = rand_poly()
    while den.is_zero():
        den = rand_poly()
    return RatFunc(num, den)


def test_leibniz_and_commutation_randomized():
    rng = random.Random(7)
    n = 2
    for _ in range(60):
        f = _random_ratfunc(rng, n)
        g = _random_ratfunc(rng, n)
        for i in (1, 2):
            lhs = derive(i, f * g)
            rhs = derive(i, f) * g + f * derive(i, g)
            assert lhs == rhs
        assert derive(1, derive(2, f)) == derive(2, derive(1, f))


# --- class_of ----------------------------------------------------------------

def test_class_examples():
    assert class_of((0, 2)) == 2
    assert class_of((1, 1)) == 1
    assert class_of((0, 0, 3)) == 3


def test_class_of_zero_errors():
    with pytest.raises(NoClassError):
        class_of((0, 0))


def test_multiplicative_prolongation_never_raises_class():
    for mu in mi_all(3, 2):
        cls = class_of(mu)
        for i in range(1, cls + 1):
            assert class_of(mi_plus1(mu, i)) <= cls


# --- misc combinatorics --------------------------------------------------------

def test_mi_helpers():
    assert mi_str((2, 0, 1)) == "113"
    assert mi_binom((2, 1), (1, 1)) == 2
    assert len(mi_all(3, 2)) == 6


def test_poly_gcd_basic():
    n = 2
    a = (Poly.var(n, 1) + Poly.var(n, 2)) * Poly.var(n, 1)
    b = (Poly.var(n, 1) + Poly.var(n, 2)) * Poly.var(n, 2, 2)
    g = poly_gcd(a, b)
    assert g == Poly.var(n, 1) + Poly.var(n, 2)
