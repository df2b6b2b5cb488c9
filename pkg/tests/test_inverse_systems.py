import random

from involutor.inverse_systems import (
    Section,
    generating_section,
    modular_equation,
    section_basis,
    spencer_apply,
)
from involutor.jets import JetSystem, LinForm
from involutor.kernel import RatFunc


def form(n, *terms):
    f = LinForm(n)
    for c, k, mu in terms:
        f = f.axpy(RatFunc.const(n, 1), LinForm(n, {(k, mu): RatFunc.const(n, c)}))
    return f


def airy_recurrence_system():
    # y_xx - x y = 0 on the line
    n = 1
    return JetSystem(n, 1, [
        LinForm(n, {(0, (2,)): RatFunc.const(n, 1), (0, (0,)): -RatFunc.var(n, 1)}),
    ])


def finite_type_system():
    n = 3
    return JetSystem(n, 1, [
        form(n, (1, 0, (0, 0, 2))),
        form(n, (1, 0, (0, 1, 1)), (-1, 0, (2, 0, 0))),
        form(n, (1, 0, (0, 2, 0))),
    ])


def janet_system():
    n = 3
    one = RatFunc.const(n, 1)
    return JetSystem(n, 1, [
        LinForm(n, {(0, (0, 0, 2)): one, (0, (2, 0, 0)): -RatFunc.var(n, 2)}),
        form(n, (1, 0, (0, 2, 0))),
    ])


# --- section bases ----------------------------------------------------------------

def test_section_basis_counts():
    assert len(section_basis(finite_type_system(), 3)) == 8
    assert len(section_basis(janet_system(), 7)) == 12 + 6   # six top-of-truncation jets
    assert len(section_basis(JetSystem(1, 1, [], order=0), 2)) == 3


def test_sections_satisfy_equations():
    S = finite_type_system()
    for f in section_basis(S, 4):
        for eq in S.prolong(2).equations:
            assert f.contract(eq).is_zero()


# --- the recurrence example --------------------------------------------------------

def test_airy_like_boards():
    S = airy_recurrence_system()
    n = 1
    x = RatFunc.var(n, 1)
    basis = section_basis(S, 6)
    # basis ordered greatest parametric first: y_x dual, then y dual
    fpp = next(f for f in basis if not f.value((0, (1,))).is_zero())
    fp = next(f for f in basis if not f.value((0, (0,))).is_zero())
    # f' board: 1, 0, x, 1, x^2, 4x, x^3+4
    vals = [fp.value((0, (k,))) for k in range(7)]
    assert [str(v) for v in vals] == ["1", "0", "x1", "1", "x1^2", "4*x1", "x1^3 + 4"]
    # f'' board: 0, 1, 0, x, 2, x^2, 6x
    vals2 = [fpp.value((0, (k,))) for k in range(7)]
    assert [str(v) for v in vals2] == ["0", "1", "0", "x1", "2", "x1^2", "6*x1"]
    # df' = -x f'' and df'' = -f' at truncation order 5
    dfp = spencer_apply(fp)[0]
    dfpp = spencer_apply(fpp)[0]
    for k in range(6):
        assert dfp.value((0, (k,))) == -(x * fpp.value((0, (k,))))
        assert dfpp.value((0, (k,))) == -fp.value((0, (k,)))


def test_orthogonality_of_boards():
    # prolonged equation rows contract to zero against both sections
    S = airy_recurrence_system()
    basis = section_basis(S, 8)
    for f in basis:
        for eq in S.prolong(6).equations:
            assert f.contract(eq).is_zero()


# --- spencer operator properties ------------------------------------------------------

def test_spencer_kills_polynomial_jets():
    # jets of polynomials: f^k_mu = d^mu P evaluated formally -> zero sections
    n = 2
    from involutor.kernel import Poly, mi_up_to
    P = RatFunc.from_poly(Poly(n, {(2, 1): 3, (0, 2): -2, (1, 0): 1}))
    vals = {}
    for mu in mi_up_to(n, 4):
        g = P
        for i, p in enumerate(mu):
            for _ in range(p):
                g = g.derive(i + 1)
        vals[(0, mu)] = g
    f = Section(n, 1, 4, vals)
    for comp in spencer_apply(f):
        assert comp.is_zero()


def test_spencer_components_commute_randomized():
    rng = random.Random(41)
    n = 2
    from involutor.kernel import Poly, mi_up_to
    for _ in range(30):
        vals = {}
        for mu in mi_up_to(n, 3):
            c = rng.randint(-3, 3)
            if c:
                e = tuple(rng.randint(0, 2) for _ in range(n))
                vals[(0, mu)] = RatFunc.from_poly(Poly(n, {e: c}))
        f = Section(n, 1, 3, vals)
        d = spencer_apply(f)
        d12 = spencer_apply(d[0])[1]
        d21 = spencer_apply(d[1])[0]
        assert d12.values == d21.values


def test_sections_map_into_lower_sections():
    S = finite_type_system()
    for f in section_basis(S, 4):
        for comp in spencer_apply(f):
            for eq in S.prolong(1).equations:
                assert comp.contract(eq).is_zero()


# --- modular equations ---------------------------------------------------------------

def test_modular_equation_janet_generator():
    f = generating_section(janet_system())
    assert modular_equation(f) == "a^{1113} + x2*a^{1333} + a^{12333}"


def test_modular_equation_finite_type_generator():
    f = generating_section(finite_type_system())
    assert modular_equation(f) == "a^{111} + a^{123}"


def test_modular_equation_zero():
    assert modular_equation(Section(2, 1, 1, {})) == "0"
