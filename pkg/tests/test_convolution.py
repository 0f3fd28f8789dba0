from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgtwist.circle import CircleValue, Cyclo
from kgtwist.convolution import (
    FiniteGroupoid,
    GridBundleFunction,
    GroupoidCocycle,
    GroupoidHomotopy,
    associativity_report,
    bundle_convolve,
    bundle_i_norm,
    bundle_involution,
    convolve,
    delta,
    fn_add,
    fn_equal,
    i_norm,
    i_norm_scan,
    involution,
    klein_cocycle,
    module_action,
    q_t,
    real_coboundary,
    support_fiber_bound,
)
from kgtwist.errors import CocycleInvalid, GridMismatch, NotComposable, OffGrid

KLEIN = FiniteGroupoid.klein()
E = (0, 0)
GRID = tuple(Fraction(j, 10) for j in range(11))


def mu3_beta(seed):
    rng = random.Random(seed)
    g = FiniteGroupoid.matrix_units(3)
    return g, {x: Fraction(rng.randrange(12), 12) for x in g.elements}


def le(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a <= b
    return a <= b + 1e-12


coeffs = st.tuples(st.fractions(min_value=-2, max_value=2, max_denominator=6),
                   st.sampled_from([Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1, 3)]))


def functions_on(elements):
    return st.dictionaries(st.sampled_from(list(elements)), coeffs, max_size=4).map(
        lambda d: {a: Cyclo.rational(c) * Cyclo.root_of_unity(ang) for a, (c, ang) in d.items() if c})


def test_groupoids_are_valid():
    for g in (KLEIN, FiniteGroupoid.matrix_units(3), FiniteGroupoid.cyclic(4),
              FiniteGroupoid.bundle(["p", "q"], FiniteGroupoid.cyclic(2))):
        assert g.verify().ok
    g = FiniteGroupoid.matrix_units(3)
    assert g.range_fiber((1, 1)) == [(1, 0), (1, 1), (1, 2)]
    with pytest.raises(NotComposable):
        g.mul((0, 1), (0, 1))


def test_klein_products():
    w = klein_cocycle()
    assert w.verify().ok
    assert fn_equal(convolve(delta((1, 0)), delta((0, 1)), w), delta((1, 1)))
    assert fn_equal(convolve(delta((0, 1)), delta((1, 0)), w), delta((1, 1), -1))


def test_delta_products_collapse():
    g, beta = mu3_beta(1)
    w = GroupoidCocycle.coboundary(g, beta)
    for x in g.elements:
        for y in g.elements:
            got = convolve(delta(x), delta(y), w)
            if g.composable(x, y):
                assert fn_equal(got, {g.mul(x, y): w(x, y).to_scalar()})
            else:
                assert got == {}


def test_trivial_cocycle_gives_group_algebra():
    g = FiniteGroupoid.cyclic(3)
    w = GroupoidCocycle.trivial(g)
    f = {0: Cyclo.rational(2), 1: Cyclo.rational(-1)}
    assert fn_equal(convolve(delta(0), f, w), f) and fn_equal(convolve(f, delta(0), w), f)
    assert fn_equal(convolve(delta(1), delta(2), w), delta(0))


def test_involution_examples():
    w = klein_cocycle()
    for x in KLEIN.elements:
        expected = {KLEIN.inverse(x): w(KLEIN.inverse(x), x).conjugate().to_scalar()}
        assert fn_equal(involution(delta(x), w), expected)
    assert fn_equal(involution(delta(E), w), delta(E))
    assert fn_equal(involution(delta((1, 1)), w), delta((1, 1), -1))


def test_i_norm_examples():
    assert i_norm(delta((1, 0)), KLEIN) == 1
    z2 = FiniteGroupoid.cyclic(2)
    assert i_norm({0: 1, 1: 1}, z2) == 2
    mu = FiniteGroupoid.matrix_units(3)
    # a full row: range-fibre sum 3, each source fibre 1
    assert i_norm({(0, j): 1 for j in range(3)}, mu) == 3
    assert i_norm({}, mu) == 0


@pytest.mark.parametrize("omega", [klein_cocycle(), GroupoidCocycle.coboundary(*mu3_beta(2))], ids=["klein", "mu3"])
def test_associativity_exact(omega):
    rep = associativity_report(omega)
    assert rep.ok and rep.info["triples"] == len(omega.groupoid.elements) ** 3


def test_corrupted_cocycle_breaks_associativity():
    w = klein_cocycle().with_entry((1, 1), (1, 0), CircleValue(Fraction(1, 4)))
    assert not w.verify().ok
    assert not associativity_report(w).ok
    g, beta = mu3_beta(3)
    w = GroupoidCocycle.coboundary(g, beta).with_entry((0, 1), (1, 2), CircleValue(Fraction(1, 3)))
    assert not associativity_report(w).ok


def test_missing_entries_are_invalid():
    w = GroupoidCocycle(KLEIN, {})
    assert w(E, (1, 0)).is_one()
    with pytest.raises(CocycleInvalid):
        w((1, 0), (1, 0))


def _algebra_laws(f, g, h, w, G):
    assert fn_equal(convolve(convolve(f, g, w), h, w), convolve(f, convolve(g, h, w), w))
    assert fn_equal(involution(involution(f, w), w), f)
    assert fn_equal(involution(convolve(f, g, w), w), convolve(involution(g, w), involution(f, w), w))
    nf, ng = i_norm(f, G), i_norm(g, G)
    assert le(i_norm(fn_add(f, g), G), nf + ng)
    assert le(i_norm(convolve(f, g, w), G), nf * ng)
    assert abs(i_norm(involution(f, w), G) - nf) <= (0 if isinstance(nf, Fraction) else 1e-12)


@settings(max_examples=40)
@given(functions_on(KLEIN.elements), functions_on(KLEIN.elements), functions_on(KLEIN.elements))
def test_klein_algebra_laws(f, g, h):
    _algebra_laws(f, g, h, klein_cocycle(), KLEIN)


MU3, BETA3 = mu3_beta(4)


@settings(max_examples=40)
@given(functions_on(MU3.elements), functions_on(MU3.elements), functions_on(MU3.elements))
def test_matrix_unit_algebra_laws(f, g, h):
    _algebra_laws(f, g, h, GroupoidCocycle.coboundary(MU3, BETA3), MU3)


def test_q_t_and_bundle_maps():
    F = GridBundleFunction.from_function(GRID, KLEIN.elements, lambda a, t: t if a == E else 0)
    assert fn_equal(q_t(F, Fraction(1, 2)), delta(E, Fraction(1, 2)))
    assert q_t(F, Fraction(0)) == {}
    with pytest.raises(OffGrid):
        q_t(F, Fraction(1, 3))
    with pytest.raises(GridMismatch):
        GridBundleFunction((Fraction(0), Fraction(1, 2)))


def _homotopy():
    return GroupoidHomotopy(GroupoidCocycle.trivial(KLEIN),
                            real_coboundary(KLEIN, {x: Fraction(x[0] + 2 * x[1], 5) for x in KLEIN.elements}))


def test_bundle_operations_are_slicewise():
    rng = random.Random(5)
    h = _homotopy()
    rand = lambda a, t: Fraction(rng.randrange(-3, 4), 2) * (t + rng.randrange(2))
    F = GridBundleFunction.from_function(GRID, KLEIN.elements, rand)
    H = GridBundleFunction.from_function(GRID, KLEIN.elements, rand)
    FH = bundle_convolve(F, H, h.at)
    Fs = bundle_involution(F, h.at)
    for t in GRID:
        assert h.at(t).verify().ok
        assert fn_equal(q_t(FH, t), convolve(q_t(F, t), q_t(H, t), h.at(t)))
        assert fn_equal(q_t(Fs, t), involution(q_t(F, t), h.at(t)))
    phi = [1 - t for t in GRID]
    left = bundle_convolve(module_action(phi, F), H, h.at)
    right = bundle_convolve(F, module_action(phi, H), h.at)
    assert all(fn_equal(left.slices[t], right.slices[t]) for t in GRID)
    assert all(fn_equal(left.slices[t], module_action(phi, FH).slices[t]) for t in GRID)
    assert bundle_i_norm(module_action(phi, F), KLEIN) <= bundle_i_norm(F, KLEIN)
    assert all(fn_equal(module_action([1] * 11, F).slices[t], F.slices[t]) for t in GRID)
    G1 = GridBundleFunction.from_function(GRID, KLEIN.elements, lambda a, t: 1 if t == Fraction(1, 2) else 0)
    assert module_action({t: t - Fraction(1, 2) for t in GRID}, G1).support() == set()
    with pytest.raises(GridMismatch):
        module_action([1, 2], F)


def test_i_norm_scan_linear():
    F = GridBundleFunction.from_function(GRID, KLEIN.elements, lambda a, t: t if a == E else 0)
    res = i_norm_scan(F, KLEIN)
    assert res.curve == [(t, t) for t in GRID]
    assert res.max_jump == Fraction(1, 10) and res.K == 1 and res.ok


def test_i_norm_scan_constant():
    F = GridBundleFunction.from_function(GRID, KLEIN.elements, lambda a, t: 2 if a in (E, (1, 1)) else 0)
    res = i_norm_scan(F, KLEIN)
    assert {n for _, n in res.curve} == {4} and res.max_jump == 0 and res.ok  # one fibre holds both points


@pytest.mark.parametrize("seed", range(5))
def test_i_norm_scan_lipschitz(seed):
    rng = random.Random(seed)
    grid = [Fraction(0)] + sorted({Fraction(rng.randrange(1, 40), 40) for _ in range(8)}) + [Fraction(1)]
    L = Fraction(rng.randrange(1, 6))
    slopes = {a: Fraction(rng.randrange(-10, 11), 10) * L for a in KLEIN.elements}
    offsets = {a: Fraction(rng.randrange(-5, 6), 3) for a in KLEIN.elements}
    F = GridBundleFunction.from_function(grid, KLEIN.elements, lambda a, t: offsets[a] + slopes[a] * t)
    res = i_norm_scan(F, KLEIN)
    K = support_fiber_bound(F, KLEIN)
    assert res.ok
    for s, t, jump, _, _ in res.steps:
        assert jump <= K * L * (t - s)
    # float mode
    Ff = GridBundleFunction.from_function([float(t) for t in grid], KLEIN.elements,
                                          lambda a, t: float(offsets[a]) + float(slopes[a]) * t)
    resf = i_norm_scan(Ff, KLEIN)
    assert resf.ok
    for s, t, jump, _, _ in resf.steps:
        assert jump <= K * float(L) * (t - s) + 1e-12
