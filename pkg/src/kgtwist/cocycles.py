"""Circle- and real-valued 2-cocycles on k-graphs, coboundaries, cohomology on a
bounded domain, and homotopies of cocycles."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .circle import ONE, Angle, CircleValue, format_angle
from .errors import (
    ApproximateModeUnsupported,
    BadNormalization,
    CocycleInvalid,
    NotComposable,
    OffGrid,
    OutOfRange,
    TableDomainExceeded,
)
from .intlinalg import smith_normal_form
from .kgraph import KGraph, Morphism, ValidationReport, label


def _dot(theta, a: Sequence[int], b: Sequence[int]):
    return sum(a[i] * theta[i][j] * b[j] for i in range(len(a)) for j in range(len(b)))


# ---------------------------------------------------------------------------
# circle-valued cocycles
# ---------------------------------------------------------------------------

class Cocycle:
    """A T-valued function on composable pairs of ``graph``."""

    graph: KGraph

    def __call__(self, lam: Morphism, mu: Morphism) -> CircleValue:
        if lam.source != mu.range:
            raise NotComposable(f"s({lam}) != r({mu})")
        return self._eval(lam, mu)

    def _eval(self, lam: Morphism, mu: Morphism) -> CircleValue:
        raise NotImplementedError

    def __mul__(self, other: Cocycle) -> Cocycle:
        return Product(self, other)

    def conjugate(self) -> Cocycle:
        return Conjugate(self)


class Trivial(Cocycle):
    def __init__(self, graph: KGraph):
        self.graph = graph

    def _eval(self, lam, mu):
        return ONE


class Bicharacter(Cocycle):
    """``c(lam, mu) = exp(2 pi i d(lam)^T Theta d(mu))``."""

    def __init__(self, graph: KGraph, theta: Sequence[Sequence[Angle]]):
        self.graph = graph
        self.theta = tuple(tuple(row) for row in theta)

    def _eval(self, lam, mu):
        return CircleValue(_dot(self.theta, lam.degree, mu.degree))


def rotation_cocycle(graph: KGraph, theta: Angle) -> Bicharacter:
    """``c_theta((m,n),(j,k)) = exp(2 pi i theta n j)`` on a 2-graph."""
    return Bicharacter(graph, [[0, 0], [theta, 0]])


class Coboundary(Cocycle):
    """``(mu, nu) -> b(mu) b(nu) b(mu nu)^-1``."""

    def __init__(self, graph: KGraph, b: Callable[[Morphism], CircleValue] | Mapping):
        self.graph = graph
        self.b = b

    def value(self, lam: Morphism) -> CircleValue:
        if callable(self.b):
            return self.b(lam)
        if lam.is_vertex:
            return self.b.get(lam, ONE)
        try:
            return self.b[lam]
        except KeyError:
            raise TableDomainExceeded(f"b is not defined on {lam}") from None

    def _eval(self, lam, mu):
        return self.value(lam) * self.value(mu) / self.value(self.graph.compose(lam, mu))


def coboundary(graph: KGraph, b: Callable[[Morphism], CircleValue] | Mapping) -> Coboundary:
    """The coboundary of ``b``; ``b`` must be 1 on every vertex."""
    c = Coboundary(graph, b)
    for v in graph.vertices:
        if not c.value(graph.vertex(v)).is_one():
            raise BadNormalization(f"b({label(v)}) != 1")
    return c


class Table(Cocycle):
    """Explicit values on a bounded set of composable pairs.

    Pairs involving a vertex default to 1 unless listed.
    """

    def __init__(self, graph: KGraph, entries: Mapping[tuple[Morphism, Morphism], CircleValue]):
        self.graph = graph
        self.entries = dict(entries)

    def _eval(self, lam, mu):
        try:
            return self.entries[(lam, mu)]
        except KeyError:
            if lam.is_vertex or mu.is_vertex:
                return ONE
            raise TableDomainExceeded(f"no table entry for ({lam}, {mu})") from None

    @classmethod
    def from_cocycle(cls, c: Cocycle, upto: Sequence[int] | None = None) -> Table:
        g = c.graph
        return cls(g, {(a, b): c(a, b) for a, b in g.composable_pairs(upto)})


class Pullback(Cocycle):
    """``c o phi`` for a degree-preserving functor ``phi`` into ``base.graph``."""

    def __init__(self, graph: KGraph, functor: Callable[[Morphism], Morphism], base: Cocycle):
        self.graph = graph
        self.functor = functor
        self.base = base

    def _eval(self, lam, mu):
        return self.base(self.functor(lam), self.functor(mu))


class Product(Cocycle):
    def __init__(self, *factors: Cocycle):
        if not factors:
            raise ValueError("empty product")
        self.graph = factors[0].graph
        self.factors = factors

    def _eval(self, lam, mu):
        out = self.factors[0](lam, mu)
        for c in self.factors[1:]:
            out = out * c(lam, mu)
        return out


class Conjugate(Cocycle):
    def __init__(self, base: Cocycle):
        self.graph = base.graph
        self.base = base

    def _eval(self, lam, mu):
        return self.base(lam, mu).conjugate()


class Exponential(Cocycle):
    """``exp(2 pi i t sigma)`` for a real cocycle ``sigma``."""

    def __init__(self, sigma: RealCocycle, t):
        self.graph = sigma.graph
        self.sigma = sigma
        self.t = t

    def _eval(self, lam, mu):
        return CircleValue(self.t * self.sigma(lam, mu))


class Approximate(Cocycle):
    """Float-mode view of an exact cocycle."""

    def __init__(self, base: Cocycle):
        self.graph = base.graph
        self.base = base

    def _eval(self, lam, mu):
        v = self.base(lam, mu)
        return v.promote() if v.exact else v


# ---------------------------------------------------------------------------
# real-valued cocycles
# ---------------------------------------------------------------------------

class RealCocycle:
    graph: KGraph

    def __call__(self, lam: Morphism, mu: Morphism):
        if lam.source != mu.range:
            raise NotComposable(f"s({lam}) != r({mu})")
        return self._eval(lam, mu)

    def _eval(self, lam, mu):
        raise NotImplementedError


class RealZero(RealCocycle):
    def __init__(self, graph: KGraph):
        self.graph = graph

    def _eval(self, lam, mu):
        return Fraction(0)


class RealBicharacter(RealCocycle):
    def __init__(self, graph: KGraph, theta):
        self.graph = graph
        self.theta = tuple(tuple(row) for row in theta)

    def _eval(self, lam, mu):
        return _dot(self.theta, lam.degree, mu.degree)


def real_rotation_cocycle(graph: KGraph, theta) -> RealBicharacter:
    """``sigma((m,n),(j,k)) = theta n j``."""
    return RealBicharacter(graph, [[0, 0], [theta, 0]])


class RealCoboundary(RealCocycle):
    def __init__(self, graph: KGraph, b: Callable[[Morphism], Fraction] | Mapping):
        self.graph = graph
        self.b = b

    def value(self, lam):
        if callable(self.b):
            return self.b(lam)
        if lam.is_vertex:
            return self.b.get(lam, Fraction(0))
        try:
            return self.b[lam]
        except KeyError:
            raise TableDomainExceeded(f"b is not defined on {lam}") from None

    def _eval(self, lam, mu):
        return self.value(lam) + self.value(mu) - self.value(self.graph.compose(lam, mu))


class RealTable(RealCocycle):
    def __init__(self, graph: KGraph, entries: Mapping):
        self.graph = graph
        self.entries = dict(entries)

    def _eval(self, lam, mu):
        try:
            return self.entries[(lam, mu)]
        except KeyError:
            if lam.is_vertex or mu.is_vertex:
                return Fraction(0)
            raise TableDomainExceeded(f"no table entry for ({lam}, {mu})") from None


class RealPullback(RealCocycle):
    def __init__(self, graph: KGraph, functor, base: RealCocycle):
        self.graph = graph
        self.functor = functor
        self.base = base

    def _eval(self, lam, mu):
        return self.base(self.functor(lam), self.functor(mu))


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def verify_cocycle(c: Cocycle, bound: Sequence[int] | None = None) -> ValidationReport:
    """Exhaustive check of normalization and the cocycle identity up to ``bound``."""
    g = c.graph
    bound = tuple(bound) if bound is not None else g.bound
    rep = ValidationReport(info={"bound": list(bound), "triples": 0, "morphisms": 0})
    for lam in g.morphisms(bound):
        rep.info["morphisms"] += 1
        if not c(lam, g.vertex(lam.source)).is_one() or not c(g.vertex(lam.range), lam).is_one():
            rep.add("normalization", (lam,), "c(lam, s(lam)) or c(r(lam), lam) is not 1")
    for lam, mu, nu in g.composable_triples(bound):
        rep.info["triples"] += 1
        left = c(lam, g.compose(mu, nu)) * c(mu, nu)
        right = c(g.compose(lam, mu), nu) * c(lam, mu)
        if left != right:
            rep.add("identity", (lam, mu, nu), f"{left!r} != {right!r}")
    return rep


def verify_real_cocycle(sigma: RealCocycle, bound: Sequence[int] | None = None, tol: float = 1e-12) -> ValidationReport:
    g = sigma.graph
    bound = tuple(bound) if bound is not None else g.bound
    rep = ValidationReport(info={"bound": list(bound)})

    def same(x, y):
        if isinstance(x, Fraction) and isinstance(y, Fraction):
            return x == y
        return abs(x - y) <= tol

    for lam in g.morphisms(bound):
        if not same(sigma(lam, g.vertex(lam.source)), 0) or not same(sigma(g.vertex(lam.range), lam), 0):
            rep.add("normalization", (lam,))
    for lam, mu, nu in g.composable_triples(bound):
        left = sigma(lam, g.compose(mu, nu)) + sigma(mu, nu)
        right = sigma(g.compose(lam, mu), nu) + sigma(lam, mu)
        if not same(left, right):
            rep.add("identity", (lam, mu, nu), f"{left} != {right}")
    return rep


# ---------------------------------------------------------------------------
# cohomology on a bounded domain
# ---------------------------------------------------------------------------

@dataclass
class CohomologyResult:
    """Verdict of :func:`is_cohomologous`, valid only on ``bound``."""

    cohomologous: bool
    bound: tuple
    b: dict[Morphism, CircleValue] | None = None
    witness: list[tuple[int, tuple[Morphism, Morphism]]] | None = None
    witness_angle: Fraction | None = None

    def to_dict(self) -> dict:
        out = {"cohomologous": self.cohomologous, "bound": list(self.bound), "domain": "bounded"}
        if self.b is not None:
            out["b"] = {str(k): str(v) for k, v in sorted(self.b.items(), key=lambda kv: (kv[0].degree, kv[0].word))}
        if self.witness is not None:
            out["witness"] = [{"coefficient": c, "pair": [str(p[0]), str(p[1])]} for c, p in self.witness]
            out["witness_angle"] = format_angle(self.witness_angle)
        return out


def is_cohomologous(c: Cocycle, c2: Cocycle, bound: Sequence[int] | None = None) -> CohomologyResult:
    """Solve ``b(mu) b(nu) b(mu nu)^-1 c(mu, nu) = c2(mu, nu)`` for all pairs within ``bound``.

    Unknowns are rational angles ``x_lam`` for the non-vertex morphisms of degree
    <= bound.  The integer system is diagonalised by Smith normal form; a row of
    the left transform that annihilates the system but not the right-hand side
    is returned as an inconsistency witness.
    """
    g = c.graph
    bound = tuple(bound) if bound is not None else g.bound
    unknowns = [lam for lam in g.morphisms(bound) if not lam.is_vertex]
    index = {lam: i for i, lam in enumerate(unknowns)}
    rows, rhs, pairs = [], [], []
    for mu, nu in g.composable_pairs(bound):
        if mu.is_vertex or nu.is_vertex:
            continue
        x, y = c2(mu, nu), c(mu, nu)
        if not (x.exact and y.exact):
            raise ApproximateModeUnsupported("cohomology is decided in exact mode only")
        target = x / y
        row = [0] * len(unknowns)
        row[index[mu]] += 1
        row[index[nu]] += 1
        row[index[g.compose(mu, nu)]] -= 1
        rows.append(row)
        rhs.append(target.angle)
        pairs.append((mu, nu))
    if not rows:
        return CohomologyResult(True, bound, b={})
    snf = smith_normal_form(rows, len(rows), len(unknowns))
    u_rhs = [sum(snf.left[i][j] * rhs[j] for j in range(len(rhs))) for i in range(len(rhs))]
    for i in range(snf.rank, len(rows)):
        if u_rhs[i] % 1 != 0:
            witness = [(snf.left[i][j], pairs[j]) for j in range(len(rows)) if snf.left[i][j]]
            return CohomologyResult(False, bound, witness=witness, witness_angle=u_rhs[i] % 1)
    y = [Fraction(0)] * len(unknowns)
    for i in range(snf.rank):
        y[i] = Fraction(u_rhs[i]) / snf.diag[i][i]
    x = [sum(snf.right[i][j] * y[j] for j in range(len(unknowns))) for i in range(len(unknowns))]
    return CohomologyResult(True, bound, b={lam: CircleValue(x[index[lam]]) for lam in unknowns})


# ---------------------------------------------------------------------------
# homotopies
# ---------------------------------------------------------------------------

class CocycleHomotopy:
    base: Cocycle

    def at(self, t) -> Cocycle:
        raise NotImplementedError


class ExponentialHomotopy(CocycleHomotopy):
    """``c_t = c_0 * exp(2 pi i t sigma)``."""

    def __init__(self, base: Cocycle, sigma: RealCocycle):
        self.base = base
        self.sigma = sigma
        self.graph = base.graph

    def at(self, t) -> Cocycle:
        if t == 0:
            return self.base
        base = Approximate(self.base) if isinstance(t, float) else self.base
        return Product(base, Exponential(self.sigma, t))


@dataclass
class GridHomotopy(CocycleHomotopy):
    """Cocycles sampled on a finite grid, with a declared Lipschitz modulus."""

    points: dict
    lipschitz: Fraction | float | None = None
    graph: KGraph = field(init=False)

    def __post_init__(self):
        self.points = dict(sorted(self.points.items()))
        self.base = next(iter(self.points.values()))
        self.graph = self.base.graph

    def at(self, t) -> Cocycle:
        try:
            return self.points[t]
        except KeyError:
            raise OffGrid(f"t={t} is not a grid point") from None

    def check_continuity(self, bound: Sequence[int] | None = None) -> ValidationReport:
        """Adjacent grid cocycles must differ by at most ``lipschitz * dt`` on the circle."""
        rep = ValidationReport(info={"lipschitz": str(self.lipschitz)})
        if self.lipschitz is None:
            return rep
        ts = list(self.points)
        for s, t in zip(ts, ts[1:]):
            cs, ct = self.points[s], self.points[t]
            for lam, mu in self.graph.composable_pairs(bound):
                a = (ct(lam, mu) / cs(lam, mu)).angle
                dist = min(a, 1 - a)
                if dist > self.lipschitz * (t - s) + (0 if isinstance(a, Fraction) else 1e-12):
                    rep.add("continuity", (s, t, lam, mu), f"jump {dist}")
        return rep


def homotopy_eval(h: CocycleHomotopy, t) -> Cocycle:
    if not 0 <= t <= 1:
        raise OutOfRange(f"t={t} is outside [0, 1]")
    return h.at(t)


def check_valid(c: Cocycle, bound: Sequence[int] | None = None) -> None:
    rep = verify_cocycle(c, bound)
    if not rep.ok:
        raise CocycleInvalid(rep.violations[0].kind + ": " + ", ".join(map(str, rep.violations[0].witness)))


def rational_grid(n: int) -> list[Fraction]:
    """``n`` equally spaced exact points from 0 to 1."""
    if n < 2:
        raise ValueError("a grid needs at least two points")
    return [Fraction(j, n - 1) for j in range(n)]


def angle_distance(a: CircleValue, b: CircleValue):
    x = (a / b).angle
    return min(x, 1 - x)

