"""Twisted convolution over explicit finite groupoids (counting Haar system),
the sampled product groupoid ``G x [0,1]``, fibre maps and I-norms."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Sequence

from .circle import FLOAT_TOL, CircleValue, Cyclo, Scalar, is_zero
from .errors import CocycleInvalid, GridMismatch, NotComposable, OffGrid
from .kgraph import ValidationReport

Function = dict  # element -> scalar, finite support


def _sorted(xs):
    try:
        return sorted(xs)
    except TypeError:
        return sorted(xs, key=repr)


class FiniteGroupoid:
    """Elements, units, a partial multiplication table and inverses."""

    def __init__(self, elements, units, table: Mapping[tuple, Hashable], inverse: Mapping):
        self.elements = tuple(_sorted(elements))
        self.units = tuple(_sorted(units))
        self.table = dict(table)
        self.inv = dict(inverse)
        eset = set(self.elements)
        if not set(self.units) <= eset or set(self.inv) != eset:
            raise ValueError("units and inverses must cover the element set")
        self._r = {x: self.table[(x, self.inv[x])] for x in self.elements}
        self._s = {x: self.table[(self.inv[x], x)] for x in self.elements}
        self._range_fiber: dict = {u: [] for u in self.units}
        self._source_fiber: dict = {u: [] for u in self.units}
        for x in self.elements:
            self._range_fiber[self._r[x]].append(x)
            self._source_fiber[self._s[x]].append(x)

    # -- structure ---------------------------------------------------------
    def r(self, x):
        return self._r[x]

    def s(self, x):
        return self._s[x]

    def inverse(self, x):
        return self.inv[x]

    def composable(self, x, y) -> bool:
        return self._s[x] == self._r[y]

    def mul(self, x, y):
        if not self.composable(x, y):
            raise NotComposable(f"s({x!r}) != r({y!r})")
        return self.table[(x, y)]

    def range_fiber(self, u) -> list:
        return list(self._range_fiber[u])

    def source_fiber(self, u) -> list:
        return list(self._source_fiber[u])

    def pairs(self):
        return [(x, y) for x in self.elements for y in self._range_fiber[self._s[x]]]

    def triples(self):
        return [(x, y, z) for x, y in self.pairs() for z in self._range_fiber[self._s[y]]]

    def verify(self) -> ValidationReport:
        rep = ValidationReport(info={"elements": len(self.elements), "units": len(self.units)})
        for x, y in self.pairs():
            xy = self.mul(x, y)
            if self.r(xy) != self.r(x) or self.s(xy) != self.s(y):
                rep.add("range-source", (x, y))
        for x, y, z in self.triples():
            if self.mul(self.mul(x, y), z) != self.mul(x, self.mul(y, z)):
                rep.add("associativity", (x, y, z))
        for u in self.units:
            if self.r(u) != u or self.inverse(u) != u:
                rep.add("unit", (u,))
        return rep

    # -- constructors ------------------------------------------------------
    @classmethod
    def group(cls, elements, mul: Callable, inv: Callable, identity) -> FiniteGroupoid:
        elements = list(elements)
        table = {(x, y): mul(x, y) for x in elements for y in elements}
        return cls(elements, [identity], table, {x: inv(x) for x in elements})

    @classmethod
    def cyclic(cls, n: int) -> FiniteGroupoid:
        return cls.group(range(n), lambda a, b: (a + b) % n, lambda a: (-a) % n, 0)

    @classmethod
    def klein(cls) -> FiniteGroupoid:
        """``Z/2 x Z/2`` with elements ``(a1, a2)``."""
        els = list(itertools.product((0, 1), repeat=2))
        return cls.group(els, lambda a, b: ((a[0] + b[0]) % 2, (a[1] + b[1]) % 2), lambda a: a, (0, 0))

    @classmethod
    def matrix_units(cls, n: int) -> FiniteGroupoid:
        """Pair groupoid on ``n`` points: ``(i, j)(j, k) = (i, k)``."""
        els = [(i, j) for i in range(n) for j in range(n)]
        table = {((i, j), (j2, k)): (i, k) for i, j in els for j2, k in els if j == j2}
        return cls(els, [(i, i) for i in range(n)], table, {(i, j): (j, i) for i, j in els})

    @classmethod
    def bundle(cls, units, group: FiniteGroupoid) -> FiniteGroupoid:
        """Trivial group bundle ``units x group``."""
        if len(group.units) != 1:
            raise ValueError("bundle() needs a group")
        e = group.units[0]
        els = [(u, g) for u in units for g in group.elements]
        table = {((u, g), (u, h)): (u, group.table[(g, h)]) for u in units for g in group.elements for h in group.elements}
        return cls(els, [(u, e) for u in units], table, {(u, g): (u, group.inv[g]) for u, g in els})


# ---------------------------------------------------------------------------
# groupoid cocycles
# ---------------------------------------------------------------------------

@dataclass
class GroupoidCocycle:
    """``omega`` on composable pairs; missing pairs default to 1 only when they involve a unit."""

    groupoid: FiniteGroupoid
    table: dict

    def __call__(self, x, y) -> CircleValue:
        try:
            return self.table[(x, y)]
        except KeyError:
            g = self.groupoid
            if not g.composable(x, y):
                raise NotComposable(f"s({x!r}) != r({y!r})") from None
            if x in g.units or y in g.units:
                return CircleValue(Fraction(0))
            raise CocycleInvalid(f"omega is undefined on ({x!r}, {y!r})") from None

    @classmethod
    def from_function(cls, g: FiniteGroupoid, f: Callable) -> GroupoidCocycle:
        return cls(g, {(x, y): f(x, y) for x, y in g.pairs()})

    @classmethod
    def trivial(cls, g: FiniteGroupoid) -> GroupoidCocycle:
        return cls.from_function(g, lambda x, y: CircleValue(Fraction(0)))

    @classmethod
    def coboundary(cls, g: FiniteGroupoid, beta: Mapping) -> GroupoidCocycle:
        """``beta(x) + beta(y) - beta(xy)`` as angles; ``beta`` vanishes on units."""
        b = lambda x: Fraction(0) if x in g.units else beta[x]
        return cls.from_function(g, lambda x, y: CircleValue(b(x) + b(y) - b(g.mul(x, y))))

    @property
    def exact(self) -> bool:
        return all(v.exact for v in self.table.values())

    def with_entry(self, x, y, value: CircleValue) -> GroupoidCocycle:
        t = dict(self.table)
        t[(x, y)] = value
        return GroupoidCocycle(self.groupoid, t)

    def verify(self) -> ValidationReport:
        g = self.groupoid
        rep = ValidationReport(info={"pairs": len(g.pairs()), "triples": 0})
        for x in g.elements:
            if not self(g.r(x), x).is_one() or not self(x, g.s(x)).is_one():
                rep.add("normalization", (x,))
        for x, y, z in g.triples():
            rep.info["triples"] += 1
            if self(x, g.mul(y, z)) * self(y, z) != self(g.mul(x, y), z) * self(x, y):
                rep.add("identity", (x, y, z))
        return rep


def klein_cocycle(g: FiniteGroupoid | None = None) -> GroupoidCocycle:
    """``omega((a1, a2), (b1, b2)) = (-1)^(a2 b1)`` on the Klein group."""
    g = g or FiniteGroupoid.klein()
    return GroupoidCocycle.from_function(g, lambda a, b: CircleValue(Fraction(a[1] * b[0], 2)))


@dataclass
class GroupoidHomotopy:
    """``omega_t = omega_0 * exp(2 pi i t sigma)`` for a real cocycle table ``sigma``."""

    base: GroupoidCocycle
    sigma: dict

    def at(self, t) -> GroupoidCocycle:
        g = self.base.groupoid
        return GroupoidCocycle(g, {p: self.base(*p) * CircleValue(t * self.sigma.get(p, 0)) for p in g.pairs()})


def real_coboundary(g: FiniteGroupoid, beta: Mapping) -> dict:
    b = lambda x: 0 if x in g.units else beta[x]
    return {(x, y): b(x) + b(y) - b(g.mul(x, y)) for x, y in g.pairs()}


# ---------------------------------------------------------------------------
# the convolution algebra
# ---------------------------------------------------------------------------

def scalar(v) -> Scalar:
    """Normalise a coefficient: exact data becomes :class:`Cyclo`, anything else ``complex``."""
    if isinstance(v, Cyclo):
        return v
    if isinstance(v, CircleValue):
        return v.to_scalar()
    if isinstance(v, (int, Fraction)):
        return Cyclo.rational(v)
    return complex(v)


def _clean(f: Mapping) -> Function:
    return {a: v for a, v in f.items() if not is_zero(v)}


def delta(x, coeff=1) -> Function:
    return {x: scalar(coeff)}


def fn_equal(f: Mapping, g: Mapping) -> bool:
    for a in set(f) | set(g):
        if not is_zero(scalar(f.get(a, 0)) - scalar(g.get(a, 0))):
            return False
    return True


def fn_add(f: Mapping, g: Mapping) -> Function:
    out = {a: scalar(v) for a, v in f.items()}
    for a, v in g.items():
        out[a] = out[a] + scalar(v) if a in out else scalar(v)
    return _clean(out)


def fn_scale(c, f: Mapping) -> Function:
    c = scalar(c)
    return _clean({a: c * scalar(v) for a, v in f.items()})


def convolve(f: Mapping, g: Mapping, omega: GroupoidCocycle) -> Function:
    """``(f * g)(a) = sum_{r(b) = s(a)} f(ab) g(b^-1) omega(ab, b^-1)``.

    Evaluated over pairs of support points: ``x = ab``, ``y = b^-1`` contributes
    ``f(x) g(y) omega(x, y)`` at ``a = xy``.
    """
    G = omega.groupoid
    out: dict = {}
    for x, fx in f.items():
        for y, gy in g.items():
            if G.composable(x, y):
                term = scalar(fx) * scalar(gy) * scalar(omega(x, y))
                xy = G.mul(x, y)
                out[xy] = out[xy] + term if xy in out else term
    return _clean(out)


def involution(f: Mapping, omega: GroupoidCocycle) -> Function:
    """``f*(a) = conj(f(a^-1) omega(a, a^-1))``."""
    G = omega.groupoid
    out = {}
    for y, v in f.items():
        a = G.inverse(y)
        out[a] = (scalar(v) * scalar(omega(a, y))).conjugate()
    return _clean(out)


def i_norm(f: Mapping, groupoid) -> Fraction | float:
    """Max over units of range-fibre and source-fibre absolute sums.

    ``groupoid`` only needs ``r`` and ``s``.  The result is exact whenever every
    ``|f(a)|`` is rational.
    """
    rows: dict = {}
    cols: dict = {}
    for a, v in f.items():
        m = abs(scalar(v))
        rows[groupoid.r(a)] = rows.get(groupoid.r(a), 0) + m
        cols[groupoid.s(a)] = cols.get(groupoid.s(a), 0) + m
    return max(list(rows.values()) + list(cols.values()), default=Fraction(0))


def associativity_report(omega: GroupoidCocycle) -> ValidationReport:
    """``(dx * dy) * dz == dx * (dy * dz)`` on every basis triple."""
    G = omega.groupoid
    rep = ValidationReport(info={"triples": 0})
    for x, y, z in itertools.product(G.elements, repeat=3):
        rep.info["triples"] += 1
        fx, fy, fz = delta(x), delta(y), delta(z)
        if not fn_equal(convolve(convolve(fx, fy, omega), fz, omega), convolve(fx, convolve(fy, fz, omega), omega)):
            rep.add("associativity", (x, y, z))
    return rep


# ---------------------------------------------------------------------------
# the sampled product groupoid G x [0,1]
# ---------------------------------------------------------------------------

@dataclass
class GridBundleFunction:
    """``F(., t)`` for each ``t`` in a finite grid containing 0 and 1."""

    grid: tuple
    slices: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = tuple(self.grid)
        if list(self.grid) != sorted(set(self.grid)) or self.grid[0] != 0 or self.grid[-1] != 1:
            raise GridMismatch("grid must be strictly increasing from 0 to 1")
        self.slices = {t: dict(self.slices.get(t, {})) for t in self.grid}

    @classmethod
    def from_function(cls, grid: Sequence, elements, F: Callable) -> GridBundleFunction:
        return cls(tuple(grid), {t: _clean({a: scalar(F(a, t)) for a in elements}) for t in grid})

    def support(self) -> set:
        return set().union(*(set(s) for s in self.slices.values()))


def q_t(F: GridBundleFunction, t) -> Function:
    """Evaluation at the grid point ``t``."""
    if t not in F.slices:
        raise OffGrid(f"t={t} is not a grid point")
    return dict(F.slices[t])


def _same_grid(*fs: GridBundleFunction) -> tuple:
    grid = fs[0].grid
    if any(f.grid != grid for f in fs[1:]):
        raise GridMismatch("functions are sampled on different grids")
    return grid


def bundle_convolve(F: GridBundleFunction, H: GridBundleFunction, omega_t: Callable[[object], GroupoidCocycle]) -> GridBundleFunction:
    grid = _same_grid(F, H)
    return GridBundleFunction(grid, {t: convolve(F.slices[t], H.slices[t], omega_t(t)) for t in grid})


def bundle_involution(F: GridBundleFunction, omega_t: Callable[[object], GroupoidCocycle]) -> GridBundleFunction:
    return GridBundleFunction(F.grid, {t: involution(F.slices[t], omega_t(t)) for t in F.grid})


def module_action(phi, F: GridBundleFunction, grid: Sequence | None = None) -> GridBundleFunction:
    """``(F . phi)(a, t) = phi(t) F(a, t)``; ``phi`` is a mapping or sequence on the grid."""
    if grid is not None and tuple(grid) != F.grid:
        raise GridMismatch("phi is sampled on a different grid")
    if isinstance(phi, Mapping):
        if set(phi) != set(F.grid):
            raise GridMismatch("phi is sampled on a different grid")
        values = phi
    else:
        phi = list(phi)
        if len(phi) != len(F.grid):
            raise GridMismatch("phi is sampled on a different grid")
        values = dict(zip(F.grid, phi))
    return GridBundleFunction(F.grid, {t: fn_scale(values[t], F.slices[t]) for t in F.grid})


def bundle_i_norm(F: GridBundleFunction, groupoid) -> Fraction | float:
    return max(i_norm(F.slices[t], groupoid) for t in F.grid)


@dataclass
class ScanResult:
    curve: list
    max_jump: Fraction | float
    K: int
    steps: list  # (s, t, jump, K * max_a |F(a,s) - F(a,t)|, ok)

    @property
    def ok(self) -> bool:
        return all(step[-1] for step in self.steps)

    def to_dict(self) -> dict:
        fmt = lambda v: str(v) if isinstance(v, Fraction) else float(v)
        return {
            "curve": [[fmt(t), fmt(n)] for t, n in self.curve],
            "max_jump": fmt(self.max_jump),
            "K": self.K,
            "steps": [{"s": fmt(s), "t": fmt(t), "jump": fmt(j), "bound": fmt(b), "ok": ok} for s, t, j, b, ok in self.steps],
            "ok": self.ok,
        }


def support_fiber_bound(F: GridBundleFunction, groupoid) -> int:
    """``K``: the largest number of support points in one range or source fibre."""
    rows: dict = {}
    cols: dict = {}
    for a in F.support():
        rows[groupoid.r(a)] = rows.get(groupoid.r(a), 0) + 1
        cols[groupoid.s(a)] = cols.get(groupoid.s(a), 0) + 1
    return max(list(rows.values()) + list(cols.values()), default=0)


def i_norm_scan(F: GridBundleFunction, groupoid) -> ScanResult:
    """``t -> ||q_t(F)||_I`` with the adjacent-jump modulus check."""
    if len(F.grid) < 2:
        raise GridMismatch("a scan needs at least two grid points")
    curve = [(t, i_norm(F.slices[t], groupoid)) for t in F.grid]
    if any(isinstance(t, float) for t in F.grid):
        curve = [(t, float(n)) for t, n in curve]
    K = support_fiber_bound(F, groupoid)
    steps = []
    for (s, ns), (t, nt) in zip(curve, curve[1:]):
        jump = abs(nt - ns)
        keys = set(F.slices[s]) | set(F.slices[t])
        var = max((abs(scalar(F.slices[t].get(a, 0)) - scalar(F.slices[s].get(a, 0))) for a in keys), default=Fraction(0))
        bound = K * var
        exact = isinstance(jump, Fraction) and isinstance(bound, Fraction)
        steps.append((s, t, jump, bound, jump <= bound if exact else jump <= bound + FLOAT_TOL))
    return ScanResult(curve, max((st[2] for st in steps), default=Fraction(0)), K, steps)
