"""Windowed skew products ``Lambda x_d Z^k``, pulled-back cocycles, degree
potentials and the translation action."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .cocycles import (
    Cocycle,
    CocycleHomotopy,
    ExponentialHomotopy,
    GridHomotopy,
    Pullback,
    RealCocycle,
    RealPullback,
)
from .errors import EmptyWindow, WindowEscape
from .kgraph import (
    Degree,
    Edge,
    KGraph,
    Morphism,
    Skeleton,
    box,
    label,
    unit_vector,
    vadd,
    vle,
    vsub,
    zero,
)


class SkewProduct:
    """``Lambda x_d Z^k`` restricted to the box ``lo <= n <= hi``.

    Vertices are ``(v, n)``; the edge ``(e, n)`` has range ``(r(e), n)`` and
    source ``(s(e), n + d(e))`` and exists only when both ends lie in the box.
    """

    def __init__(self, base: KGraph, lo: Sequence[int], hi: Sequence[int]):
        lo, hi = tuple(lo), tuple(hi)
        if len(lo) != base.k or len(hi) != base.k:
            raise ValueError("window corners must have length k")
        if not vle(lo, hi):
            raise EmptyWindow(f"window {lo}..{hi} is empty")
        self.base = base
        self.lo, self.hi = lo, hi
        k = base.k
        cells = list(box(lo, hi))
        verts = [(v, n) for v in base.vertices for n in cells]
        edges = []
        for e in base.edges.values():
            de = unit_vector(k, e.color)
            for n in cells:
                if self.contains(vadd(n, de)):
                    edges.append(Edge((e.id, n), e.color, (e.src, vadd(n, de)), (e.dst, n)))
        squares = []
        for p, q in base.skeleton.squares:
            de, df = base.edge(p[0]).degree, base.edge(p[1]).degree
            dq = base.edge(q[0]).degree
            for n in cells:
                if self.contains(vadd(vadd(n, de), df)):
                    squares.append((((p[0], n), (p[1], vadd(n, de))), ((q[0], n), (q[1], vadd(n, dq)))))
        self.graph = KGraph(Skeleton.build(k, verts, edges, squares), vsub(hi, lo))

    def contains(self, n: Sequence[int]) -> bool:
        return vle(self.lo, n) and vle(n, self.hi)

    @property
    def clipped(self) -> list:
        """Vertices that receive no edge of some colour because the window cuts them off."""
        out = []
        for v, n in self.graph.vertices:
            for i in range(1, self.base.k + 1):
                if self.base._incoming[v][i] and not self.contains(vadd(n, unit_vector(self.base.k, i))):
                    out.append((v, n))
                    break
        return out

    def lift(self, lam: Morphism, n: Sequence[int]) -> Morphism:
        """The skew morphism ``(lam, n)``."""
        n = tuple(n)
        if not (self.contains(n) and self.contains(vadd(n, lam.degree))):
            raise WindowEscape(f"({lam}, {n}) leaves the window {self.lo}..{self.hi}")
        if lam.is_vertex:
            return self.graph.vertex((lam.range, n))
        word, pos = [], n
        for x in lam.word:
            word.append((x, pos))
            pos = vadd(pos, self.base.edge(x).degree)
        return Morphism(tuple(word), (lam.range, n), (lam.source, pos), lam.degree)

    def project(self, lam: Morphism) -> tuple[Morphism, Degree]:
        """``(lam, n) -> (lam, n)``; the first coordinate is the functor ``phi``."""
        v, n = lam.range
        if lam.is_vertex:
            return self.base.vertex(v), n
        word = tuple(x for x, _ in lam.word)
        return Morphism(word, v, lam.source[0], lam.degree), n

    def phi(self, lam: Morphism) -> Morphism:
        return self.project(lam)[0]

    def translate(self, m: Sequence[int], gen: Morphism) -> Morphism:
        """``(lam, n) -> (lam, n + m)``."""
        lam, n = self.project(gen)
        return self.lift(lam, vadd(n, m))

    def __repr__(self) -> str:
        return f"SkewProduct({self.base!r}, window={self.lo}..{self.hi})"


def skew(base: KGraph, lo: Sequence[int], hi: Sequence[int]) -> SkewProduct:
    return SkewProduct(base, lo, hi)


def pullback_cocycle(c: Cocycle, sp: SkewProduct) -> Pullback:
    """``c o phi((lam, n), (mu, n + d(lam))) = c(lam, mu)``."""
    return Pullback(sp.graph, sp.phi, c)


def pullback_real(sigma: RealCocycle, sp: SkewProduct) -> RealPullback:
    return RealPullback(sp.graph, sp.phi, sigma)


def pullback_homotopy(h: CocycleHomotopy, sp: SkewProduct) -> CocycleHomotopy:
    if isinstance(h, ExponentialHomotopy):
        return ExponentialHomotopy(pullback_cocycle(h.base, sp), pullback_real(h.sigma, sp))
    if isinstance(h, GridHomotopy):
        return GridHomotopy({t: pullback_cocycle(c, sp) for t, c in h.points.items()}, h.lipschitz)
    raise TypeError(f"cannot pull back {type(h).__name__}")


# ---------------------------------------------------------------------------
# degree potentials
# ---------------------------------------------------------------------------

@dataclass
class DegreePotential:
    """``b: Obj -> Z^k`` with ``d(lam) = b(s(lam)) - b(r(lam))``."""

    b: dict
    roots: list = field(default_factory=list)

    def __call__(self, v) -> Degree:
        return self.b[v]

    def delta(self, lam: Morphism) -> Degree:
        return vsub(self.b[lam.source], self.b[lam.range])

    def check(self, g: KGraph, upto: Sequence[int] | None = None) -> list[Morphism]:
        """Morphisms (up to ``upto``) where ``delta b != d``; empty on success."""
        return [lam for lam in g.morphisms(upto) if self.delta(lam) != lam.degree]

    def to_dict(self) -> dict:
        return {label(v): list(n) for v, n in self.b.items()}


@dataclass
class Obstruction:
    """A closed walk in the skeleton whose signed degree sum is nonzero.

    Each step is ``(edge_id, +1)`` when the edge is traversed from range to
    source and ``(edge_id, -1)`` otherwise.
    """

    cycle: list[tuple]
    total: Degree

    def to_dict(self) -> dict:
        return {"cycle": [[label(e), sign] for e, sign in self.cycle], "total_degree": list(self.total)}


def solve_degree_coboundary(g: KGraph) -> DegreePotential | Obstruction:
    """Spanning-forest potential, rooted at 0 at the least vertex of each component."""
    k = g.k
    adj: dict = {v: [] for v in g.vertices}
    for e in sorted(g.edges.values(), key=lambda e: e.id):
        adj[e.dst].append((e, +1))  # range -> source adds d(e)
        adj[e.src].append((e, -1))
    b: dict = {}
    parent: dict = {}
    roots = []

    def walk_to_root(v) -> list[tuple]:
        steps = []
        while parent[v] is not None:
            u, eid, sign = parent[v]
            steps.append((eid, sign))
            v = u
        return list(reversed(steps))

    for root in g.vertices:
        if root in b:
            continue
        roots.append(root)
        b[root] = zero(k)
        parent[root] = None
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for e, sign in adj[u]:
                de = unit_vector(k, e.color)
                other = e.src if sign > 0 else e.dst
                cand = vadd(b[u], de) if sign > 0 else vsub(b[u], de)
                if other not in b:
                    b[other] = cand
                    parent[other] = (u, e.id, sign)
                    queue.append(other)
                elif b[other] != cand:
                    there = walk_to_root(u) + [(e.id, sign)]
                    back = [(eid, -s) for eid, s in reversed(walk_to_root(other))]
                    return Obstruction(there + back, vsub(cand, b[other]))
    return DegreePotential(b, roots)
