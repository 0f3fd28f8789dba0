from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgtwist.circle import ONE, CircleValue
from kgtwist.cocycles import (
    Approximate,
    Bicharacter,
    Conjugate,
    ExponentialHomotopy,
    GridHomotopy,
    Product,
    RealCoboundary,
    Table,
    Trivial,
    coboundary,
    homotopy_eval,
    is_cohomologous,
    real_rotation_cocycle,
    rotation_cocycle,
    verify_cocycle,
    verify_real_cocycle,
)
from kgtwist.errors import (
    ApproximateModeUnsupported,
    BadNormalization,
    NotComposable,
    OffGrid,
    OutOfRange,
    TableDomainExceeded,
)
from kgtwist.kgraph import flip_flop, nk_graph, two_by_two

THIRD = Fraction(1, 3)


def mor(g, deg):
    return g.lambda_set("v", deg)[0]


def random_b(g, rng, denom=12, upto=None):
    return {lam: (ONE if lam.is_vertex else CircleValue(Fraction(rng.randrange(denom), denom)))
            for lam in g.morphisms(upto)}


def test_rotation_cocycle_values():
    g = nk_graph(2)
    c = rotation_cocycle(g, THIRD)
    assert c(mor(g, (0, 1)), mor(g, (1, 0))) == CircleValue(THIRD)
    assert c(mor(g, (1, 0)), mor(g, (0, 1))) == ONE
    # c((m,n),(j,k)) = theta * n * j
    assert c(mor(g, (1, 2)), mor(g, (2, 1))) == CircleValue(THIRD * 4)
    lam = mor(g, (2, 1))
    assert c(lam, g.vertex("v")) == ONE and c(g.vertex("v"), lam) == ONE


def test_composability_is_enforced():
    g = flip_flop()
    with pytest.raises(NotComposable):
        Trivial(g)(g.edge("a1"), g.edge("b1"))


def test_coboundary_by_hand():
    g = nk_graph(2, (2, 2))
    b = {mor(g, (1, 0)): CircleValue(Fraction(1, 4)), mor(g, (2, 0)): CircleValue(Fraction(1, 8))}
    c = coboundary(g, lambda lam: b.get(lam, ONE))
    # b(e) b(e) / b(ee) = 1/4 + 1/4 - 1/8
    assert c(mor(g, (1, 0)), mor(g, (1, 0))) == CircleValue(Fraction(3, 8))
    assert c(mor(g, (1, 0)), mor(g, (0, 1))) == CircleValue(Fraction(1, 4))


def test_coboundary_normalization():
    g = nk_graph(2, (2, 2))
    with pytest.raises(BadNormalization):
        coboundary(g, lambda lam: CircleValue(Fraction(1, 5)))


def test_multiplicative_b_gives_trivial_cocycle():
    g = two_by_two((2, 2))
    q = (Fraction(1, 7), Fraction(2, 5))
    c = coboundary(g, lambda lam: CircleValue(q[0] * lam.degree[0] + q[1] * lam.degree[1]))
    assert all(c(a, b) == ONE for a, b in g.composable_pairs())


@pytest.mark.parametrize("seed", range(5))
def test_random_coboundaries_are_cocycles(seed):
    g = nk_graph(2, (2, 2))
    c = coboundary(g, random_b(g, random.Random(seed)))
    rep = verify_cocycle(c)
    assert rep.ok and rep.info["triples"] > 0


@pytest.mark.parametrize("theta", [THIRD, Fraction(1, 4), Fraction(2, 7)])
def test_builtin_rules_pass(theta):
    g = nk_graph(2, (3, 3))
    for c in [rotation_cocycle(g, theta), Trivial(g), Bicharacter(g, [[theta, 1 - theta], [theta / 2, 0]])]:
        assert verify_cocycle(c).ok
    assert verify_real_cocycle(real_rotation_cocycle(g, theta)).ok


def test_two_by_two_bicharacter_and_product():
    g = two_by_two((2, 2))
    c = Product(rotation_cocycle(g, THIRD), Conjugate(rotation_cocycle(g, Fraction(1, 6))))
    assert verify_cocycle(c).ok
    assert c(g.edge("b1"), g.edge("a2")) == CircleValue(Fraction(1, 6))


def _net(pair, lam, mu, nu, g):
    left = [(lam, g.compose(mu, nu)), (mu, nu)]
    right = [(g.compose(lam, mu), nu), (lam, mu)]
    return left.count(pair) - right.count(pair)


def test_corrupted_table_flags_exactly_the_affected_triples():
    g = nk_graph(2, (2, 2))
    entries = dict(Table.from_cocycle(rotation_cocycle(g, THIRD)).entries)
    bad = (g.edge("f"), g.edge("e"))
    entries[bad] = CircleValue(Fraction(1, 5))
    rep = verify_cocycle(Table(g, entries))
    flagged = {v.witness for v in rep.of_kind("identity")}
    expected = {t for t in g.composable_triples() if _net(bad, *t, g)}
    assert flagged == expected and flagged
    assert not rep.of_kind("normalization")


def test_table_domain():
    g = nk_graph(2, (2, 2))
    t = Table(g, {})
    assert t(g.vertex("v"), g.edge("e")) == ONE
    with pytest.raises(TableDomainExceeded):
        t(g.edge("e"), g.edge("f"))


def test_cohomologous_with_itself():
    g = nk_graph(2, (2, 2))
    c = rotation_cocycle(g, THIRD)
    res = is_cohomologous(c, c)
    assert res.cohomologous
    assert all(v == ONE for v in res.b.values())


@pytest.mark.parametrize("g", [nk_graph(2, (2, 2)), two_by_two((1, 2))], ids=["N2", "two_by_two"])
def test_cohomologous_recovers_a_coboundary(g):
    c = rotation_cocycle(g, THIRD)
    b0 = random_b(g, random.Random(7))
    c2 = Product(c, coboundary(g, b0))
    res = is_cohomologous(c, c2)
    assert res.cohomologous
    solved = Product(c, coboundary(g, res.b))
    for mu, nu in g.composable_pairs():
        assert solved(mu, nu) == c2(mu, nu)


def test_rotation_half_apart_is_inconsistent():
    g = nk_graph(2, (2, 2))
    c, c2 = rotation_cocycle(g, THIRD), rotation_cocycle(g, Fraction(5, 6))
    res = is_cohomologous(c, c2)
    assert not res.cohomologous
    # the witness is an integer combination of constraints whose left side cancels
    total = Fraction(0)
    lhs: dict = {}
    for coeff, (mu, nu) in res.witness:
        total += coeff * (c2(mu, nu) / c(mu, nu)).angle
        for lam, s in ((mu, 1), (nu, 1), (g.compose(mu, nu), -1)):
            lhs[lam] = lhs.get(lam, 0) + coeff * s
    assert all(v == 0 for v in lhs.values())
    assert total % 1 == res.witness_angle != 0


def test_cohomology_needs_exact_mode():
    g = nk_graph(2, (1, 1))
    c = rotation_cocycle(g, THIRD)
    with pytest.raises(ApproximateModeUnsupported):
        is_cohomologous(c, Approximate(c))


def test_exponential_homotopy():
    g = nk_graph(2, (2, 2))
    h = ExponentialHomotopy(Trivial(g), real_rotation_cocycle(g, THIRD))
    pair = (mor(g, (0, 1)), mor(g, (1, 0)))
    assert homotopy_eval(h, 0)(*pair) == ONE
    assert homotopy_eval(h, Fraction(1, 2))(*pair) == CircleValue(Fraction(1, 6))
    c1 = homotopy_eval(h, 1)
    rot = rotation_cocycle(g, THIRD)
    assert all(c1(a, b) == rot(a, b) for a, b in g.composable_pairs())
    for j in range(11):
        assert verify_cocycle(homotopy_eval(h, Fraction(j, 10))).ok
    with pytest.raises(OutOfRange):
        homotopy_eval(h, Fraction(3, 2))


def test_float_homotopy_points():
    g = nk_graph(2, (1, 1))
    h = ExponentialHomotopy(Trivial(g), real_rotation_cocycle(g, THIRD))
    v = homotopy_eval(h, 0.5)(mor(g, (0, 1)), mor(g, (1, 0)))
    assert not v.exact and v == CircleValue(1 / 6)


def test_grid_homotopy():
    g = nk_graph(2, (2, 2))
    pts = {Fraction(j, 4): rotation_cocycle(g, Fraction(j, 12)) for j in range(5)}
    h = GridHomotopy(pts, lipschitz=Fraction(4, 3))
    assert homotopy_eval(h, Fraction(1, 2)) is pts[Fraction(1, 2)]
    with pytest.raises(OffGrid):
        homotopy_eval(h, Fraction(1, 3))
    assert h.check_continuity().ok
    tight = GridHomotopy(pts, lipschitz=Fraction(1, 10))
    assert not tight.check_continuity().ok


def test_real_coboundary_is_a_real_cocycle():
    g = two_by_two((2, 1))
    rng = random.Random(3)
    b = {lam: Fraction(rng.randrange(-5, 6), 3) for lam in g.morphisms() if not lam.is_vertex}
    assert verify_real_cocycle(RealCoboundary(g, b)).ok


@settings(max_examples=25)
@given(st.fractions(min_value=0, max_value=1, max_denominator=30),
       st.fractions(min_value=0, max_value=1, max_denominator=30))
def test_rotation_products_add_angles(a, b):
    g = nk_graph(2, (2, 2))
    c = Product(rotation_cocycle(g, a), rotation_cocycle(g, b))
    d = rotation_cocycle(g, a + b)
    assert all(c(x, y) == d(x, y) for x, y in g.composable_pairs())
