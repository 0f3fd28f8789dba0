"""Finitely presented k-graphs.

A k-graph is given by its coloured 1-skeleton together with a complete set of
factorization squares.  Morphisms are stored as colour-sorted edge words (all
colour-1 edges first, then colour 2, ...), which is the canonical
representative of a path under square rewriting.

Conventions: an edge ``e`` runs from ``e.src`` (its source ``s(e)``) to
``e.dst`` (its range ``r(e)``); a word ``e1 e2 ... en`` is composable when
``s(e_i) == r(e_{i+1})``, and then ``r = r(e1)``, ``s = s(en)``.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Sequence

from .errors import BoundExceeded, DegreeMismatch, MalformedSkeleton, NotComposable

Degree = tuple[int, ...]


# ---------------------------------------------------------------------------
# degree vectors
# ---------------------------------------------------------------------------

def vadd(a: Sequence[int], b: Sequence[int]) -> Degree:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Sequence[int], b: Sequence[int]) -> Degree:
    return tuple(x - y for x, y in zip(a, b))


def vle(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def vmeet(*vs: Sequence[int]) -> Degree:
    return tuple(min(c) for c in zip(*vs))


def vjoin(*vs: Sequence[int]) -> Degree:
    return tuple(max(c) for c in zip(*vs))


def vpos(a: Sequence[int]) -> Degree:
    return tuple(max(x, 0) for x in a)


def vneg(a: Sequence[int]) -> Degree:
    return tuple(max(-x, 0) for x in a)


def zero(k: int) -> Degree:
    return (0,) * k


def ones(k: int, h: int = 1) -> Degree:
    return (h,) * k


def unit_vector(k: int, i: int) -> Degree:
    """Degree of a single edge of colour ``i`` (1-based)."""
    return tuple(int(j == i - 1) for j in range(k))


def box(lo: Sequence[int], hi: Sequence[int]) -> Iterator[Degree]:
    """All integer vectors between ``lo`` and ``hi`` inclusive, lexicographically."""
    return itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi)))


# ---------------------------------------------------------------------------
# presentation data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Edge:
    id: Hashable
    color: int
    src: Hashable
    dst: Hashable


@dataclass(frozen=True)
class Skeleton:
    k: int
    vertices: tuple
    edges: tuple[Edge, ...]
    squares: tuple[tuple[tuple, tuple], ...] = ()

    @classmethod
    def build(cls, k: int, vertices: Iterable, edges: Iterable, squares: Iterable = ()) -> Skeleton:
        edges = tuple(e if isinstance(e, Edge) else Edge(*e) for e in edges)
        squares = tuple((tuple(p), tuple(q)) for p, q in squares)
        return cls(k, tuple(sorted(vertices)), tuple(sorted(edges, key=lambda e: e.id)), squares)


@dataclass(frozen=True)
class Morphism:
    word: tuple
    range: Hashable
    source: Hashable
    degree: Degree

    @property
    def is_vertex(self) -> bool:
        return not self.word

    def __len__(self) -> int:
        return len(self.word)

    def __str__(self) -> str:
        if not self.word:
            return label(self.range)
        return ".".join(label(e) for e in self.word)


def label(x) -> str:
    """Stable human-readable name for vertex and edge ids (including skew ids)."""
    if isinstance(x, tuple) and len(x) == 2 and isinstance(x[1], tuple):
        return f"{label(x[0])}@{','.join(map(str, x[1]))}"
    if isinstance(x, tuple):
        return "(" + ",".join(label(y) for y in x) + ")"
    return str(x)


@dataclass
class Violation:
    kind: str
    witness: tuple
    detail: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "witness": [str(w) for w in self.witness], "detail": self.detail}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, witness: tuple, detail: str = "") -> None:
        self.violations.append(Violation(kind, witness, detail))

    def of_kind(self, kind: str) -> list[Violation]:
        return [v for v in self.violations if v.kind == kind]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations], "info": self.info}


# ---------------------------------------------------------------------------
# the k-graph
# ---------------------------------------------------------------------------

class KGraph:
    """A k-graph generated by a skeleton, with morphism enumeration bounded by ``bound``."""

    def __init__(self, skeleton: Skeleton, bound: Sequence[int]):
        self.skeleton = skeleton
        self.k = skeleton.k
        self.bound: Degree = tuple(bound)
        if len(self.bound) != self.k:
            raise MalformedSkeleton(f"bound {self.bound} does not have length k={self.k}")
        self.vertices = tuple(skeleton.vertices)
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise MalformedSkeleton("duplicate vertex ids")
        self.edges: dict = {}
        for e in skeleton.edges:
            if e.id in self.edges or e.id in vset:
                raise MalformedSkeleton(f"duplicate id {e.id!r}")
            if not isinstance(e.color, int) or not 1 <= e.color <= self.k:
                raise MalformedSkeleton(f"edge {e.id!r} has bad colour {e.color!r}")
            if e.src not in vset or e.dst not in vset:
                raise MalformedSkeleton(f"edge {e.id!r} has a dangling endpoint")
            self.edges[e.id] = e
        self._partner: dict[tuple, tuple] = {}
        self._square_count: Counter = Counter()
        for p, q in skeleton.squares:
            for path in (p, q):
                if len(path) != 2 or any(x not in self.edges for x in path):
                    raise MalformedSkeleton(f"square {p}~{q} refers to unknown edges")
            self._square_count[p] += 1
            self._square_count[q] += 1
            self._partner.setdefault(p, q)
            self._partner.setdefault(q, p)
        # incoming[v][color] = edges with range v of that colour, sorted by id
        self._incoming: dict = {v: {i: [] for i in range(1, self.k + 1)} for v in self.vertices}
        for e in sorted(self.edges.values(), key=lambda e: e.id):
            self._incoming[e.dst][e.color].append(e)
        self._lambda_cache: dict = {}

    # -- basic structure ------------------------------------------------
    def color(self, edge_id) -> int:
        return self.edges[edge_id].color

    def vertex(self, v) -> Morphism:
        if v not in self._incoming:
            raise KeyError(v)
        return Morphism((), v, v, zero(self.k))

    def edge(self, edge_id) -> Morphism:
        e = self.edges[edge_id]
        return Morphism((e.id,), e.dst, e.src, unit_vector(self.k, e.color))

    def path(self, *edge_ids) -> Morphism:
        """The morphism represented by a composable (not necessarily sorted) edge word."""
        if not edge_ids:
            raise ValueError("use vertex() for identity morphisms")
        word = tuple(edge_ids)
        for a, b in zip(word, word[1:]):
            if self.edges[a].src != self.edges[b].dst:
                raise NotComposable(f"{label(a)} then {label(b)}")
        deg = [0] * self.k
        for x in word:
            deg[self.edges[x].color - 1] += 1
        return Morphism(self.normalize(word), self.edges[word[0]].dst, self.edges[word[-1]].src, tuple(deg))

    def r(self, lam: Morphism):
        return lam.range

    def s(self, lam: Morphism):
        return lam.source

    def d(self, lam: Morphism) -> Degree:
        return lam.degree

    # -- rewriting --------------------------------------------------------
    def swap(self, pair: tuple) -> tuple:
        try:
            return self._partner[pair]
        except KeyError:
            raise MalformedSkeleton(f"no factorization square contains {label(pair[0])}.{label(pair[1])}") from None

    def normalize(self, word: Sequence) -> tuple:
        """Colour-sort a composable word by square rewriting (leftmost inversion first)."""
        w = list(word)
        while True:
            for i in range(len(w) - 1):
                if self.edges[w[i]].color > self.edges[w[i + 1]].color:
                    w[i], w[i + 1] = self.swap((w[i], w[i + 1]))
                    break
            else:
                return tuple(w)

    def rearrange(self, word: Sequence, colors: Sequence[int]) -> tuple:
        """Rewrite ``word`` into the representative whose colour sequence is ``colors``."""
        w = list(word)
        if sorted(colors) != sorted(self.edges[x].color for x in w):
            raise DegreeMismatch("colour multiset does not match the word")
        for i, target in enumerate(colors):
            j = next(j for j in range(i, len(w)) if self.edges[w[j]].color == target)
            while j > i:
                w[j - 1], w[j] = self.swap((w[j - 1], w[j]))
                j -= 1
        return tuple(w)

    # -- category operations ---------------------------------------------
    def compose(self, lam: Morphism, mu: Morphism) -> Morphism:
        if lam.source != mu.range:
            raise NotComposable(f"s({lam}) != r({mu})")
        if lam.is_vertex:
            return mu
        if mu.is_vertex:
            return lam
        return Morphism(self.normalize(lam.word + mu.word), lam.range, mu.source, vadd(lam.degree, mu.degree))

    def _from_word(self, word: tuple, at) -> Morphism:
        if not word:
            return self.vertex(at)
        deg = [0] * self.k
        for x in word:
            deg[self.edges[x].color - 1] += 1
        return Morphism(self.normalize(word), self.edges[word[0]].dst, self.edges[word[-1]].src, tuple(deg))

    def factorize(self, lam: Morphism, m: Sequence[int], n: Sequence[int]) -> tuple[Morphism, Morphism]:
        m, n = tuple(m), tuple(n)
        if min(m + n, default=0) < 0 or vadd(m, n) != lam.degree:
            raise DegreeMismatch(f"d({lam})={lam.degree} != {m}+{n}")
        colors = [i + 1 for i in range(self.k) for _ in range(m[i])]
        colors += [i + 1 for i in range(self.k) for _ in range(n[i])]
        w = self.rearrange(lam.word, colors)
        cut = sum(m)
        head, tail = w[:cut], w[cut:]
        mid = self.edges[head[-1]].src if head else lam.range
        return self._from_word(head, lam.range), self._from_word(tail, mid)

    def segment(self, lam: Morphism, a: Sequence[int], b: Sequence[int]) -> Morphism:
        """``lam(a, b)``: the degree-(b-a) piece of ``lam`` between positions a <= b."""
        if not (vle(a, b) and vle(b, lam.degree)):
            raise DegreeMismatch(f"segment ({a},{b}) outside degree {lam.degree}")
        _, rest = self.factorize(lam, a, vsub(lam.degree, a))
        piece, _ = self.factorize(rest, vsub(b, a), vsub(lam.degree, b))
        return piece

    # -- enumeration ------------------------------------------------------
    def _check_bound(self, n: Sequence[int]) -> None:
        if not vle(n, self.bound) or min(n, default=0) < 0:
            raise BoundExceeded(f"degree {tuple(n)} exceeds enumeration bound {self.bound}")

    def lambda_set(self, v, n: Sequence[int]) -> list[Morphism]:
        """``v Lambda^n`` in lexicographic normal-form order."""
        n = tuple(n)
        self._check_bound(n)
        key = (v, n)
        if key not in self._lambda_cache:
            colors = [i + 1 for i in range(self.k) for _ in range(n[i])]
            words: list[tuple] = [()]
            ends = {(): v}
            for c in colors:
                nxt = []
                for w in words:
                    for e in self._incoming[ends[w]][c]:
                        nw = w + (e.id,)
                        ends[nw] = e.src
                        nxt.append(nw)
                words = nxt
            out = [Morphism(w, v, ends[w], n) if w else self.vertex(v) for w in words]
            self._lambda_cache[key] = sorted(out, key=lambda m: m.word)
        return list(self._lambda_cache[key])

    def morphisms(self, upto: Sequence[int] | None = None, ranges: Iterable | None = None) -> Iterator[Morphism]:
        """Every morphism of degree <= ``upto`` (default: the bound)."""
        upto = self.bound if upto is None else tuple(upto)
        self._check_bound(upto)
        for v in (self.vertices if ranges is None else ranges):
            for n in box(zero(self.k), upto):
                yield from self.lambda_set(v, n)

    def composable_pairs(self, upto: Sequence[int] | None = None) -> Iterator[tuple[Morphism, Morphism]]:
        upto = self.bound if upto is None else tuple(upto)
        for lam in self.morphisms(upto):
            rest = vsub(upto, lam.degree)
            for n in box(zero(self.k), rest):
                for mu in self.lambda_set(lam.source, n):
                    yield lam, mu

    def composable_triples(self, upto: Sequence[int] | None = None) -> Iterator[tuple[Morphism, Morphism, Morphism]]:
        upto = self.bound if upto is None else tuple(upto)
        for lam, mu in self.composable_pairs(upto):
            rest = vsub(vsub(upto, lam.degree), mu.degree)
            for n in box(zero(self.k), rest):
                for nu in self.lambda_set(mu.source, n):
                    yield lam, mu, nu

    def has_path(self, v, n: Sequence[int]) -> bool:
        """Whether ``v Lambda^n`` is nonempty (depth-first, no enumeration bound)."""
        colors = [i + 1 for i in range(self.k) for _ in range(n[i])]

        def go(u, i):
            if i == len(colors):
                return True
            return any(go(e.src, i + 1) for e in self._incoming[u][colors[i]])

        return go(v, 0)

    def two_paths(self) -> Iterator[tuple]:
        """Composable two-edge words with distinct colours."""
        for e in sorted(self.edges.values(), key=lambda e: e.id):
            for c in range(1, self.k + 1):
                if c != e.color:
                    for f in self._incoming[e.src][c]:
                        yield (e.id, f.id)

    def __repr__(self) -> str:
        return f"KGraph(k={self.k}, |V|={len(self.vertices)}, |E|={len(self.edges)}, bound={self.bound})"


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate_presentation(skeleton: Skeleton | KGraph, bound: Sequence[int] | None = None) -> ValidationReport:
    """Check squares, cube confluence (k >= 3), row-finiteness and sources.

    Raises :class:`MalformedSkeleton` for dangling endpoints or bad colours;
    everything else is collected in the returned report.
    """
    g = skeleton if isinstance(skeleton, KGraph) else KGraph(skeleton, bound)
    if bound is not None and tuple(bound) != g.bound:
        g = KGraph(g.skeleton, bound)
    rep = ValidationReport(info={"k": g.k, "bound": list(g.bound)})

    for p, q in g.skeleton.squares:
        e, f = (g.edges[x] for x in p)
        f2, e2 = (g.edges[x] for x in q)
        if e.src != f.dst or f2.src != e2.dst:
            rep.add("square-shape", (p, q), "a side of the square is not composable")
        elif e.color == f.color or (e.color, f.color) != (e2.color, f2.color):
            rep.add("square-shape", (p, q), "sides must swap two distinct colours")
        elif e.dst != f2.dst or f.src != e2.src:
            rep.add("square-shape", (p, q), "sides have different range or source")

    for path in g.two_paths():
        count = g._square_count.get(path, 0)
        if count == 0:
            rep.add("completeness", path, "two-coloured path lies in no square")
        elif count > 1:
            rep.add("uniqueness", path, f"path lies in {count} squares")

    if g.k >= 3 and rep.ok:
        for kind, witness, detail in _confluence_failures(g):
            rep.add(kind, witness, detail)

    rows = {}
    sources = []
    for v in g.vertices:
        counts = [len(g._incoming[v][i]) for i in range(1, g.k + 1)]
        rows[label(v)] = counts
        if not all(counts) or not g.has_path(v, g.bound):
            sources.append(label(v))
    rep.info["row_finite"] = True
    rep.info["unit_degree_counts"] = rows
    rep.info["no_sources"] = not sources
    rep.info["sources"] = sources
    return rep


def _confluence_failures(g: KGraph) -> Iterator[tuple]:
    """Compare both braid routes on every three-coloured cube within the bound."""
    for e in sorted(g.edges.values(), key=lambda e: e.id):
        for c2 in range(e.color + 1, g.k + 1):
            for f in g._incoming[e.src][c2]:
                for c3 in range(c2 + 1, g.k + 1):
                    for h in g._incoming[f.src][c3]:
                        deg = vadd(vadd(unit_vector(g.k, e.color), unit_vector(g.k, c2)), unit_vector(g.k, c3))
                        if not vle(deg, g.bound):
                            continue
                        w = (e.id, f.id, h.id)
                        a = _swap_at(g, _swap_at(g, _swap_at(g, w, 0), 1), 0)
                        b = _swap_at(g, _swap_at(g, _swap_at(g, w, 1), 0), 1)
                        if a != b:
                            yield ("confluence", w, f"routes end at {a} and {b}")


def _swap_at(g: KGraph, word: tuple, i: int) -> tuple:
    w = list(word)
    w[i], w[i + 1] = g.swap((w[i], w[i + 1]))
    return tuple(w)


# ---------------------------------------------------------------------------
# builtin graphs
# ---------------------------------------------------------------------------

_NAMES = "efghijklmnop"


def nk_graph(k: int, bound: Sequence[int] | None = None) -> KGraph:
    """N^k: one vertex ``v``, one loop per colour (``e``, ``f``, ...)."""
    names = list(_NAMES[:k]) if k <= len(_NAMES) else [f"e{i}" for i in range(1, k + 1)]
    edges = [Edge(names[i], i + 1, "v", "v") for i in range(k)]
    squares = [((names[i], names[j]), (names[j], names[i])) for i in range(k) for j in range(i + 1, k)]
    return KGraph(Skeleton.build(k, ["v"], edges, squares), bound or ones(k, 3))


def cuntz_graph(n: int, bound: int = 3) -> KGraph:
    """The 1-graph with one vertex and ``n`` loops (``O_n`` graph)."""
    names = [chr(ord("a") + i) for i in range(n)]
    return KGraph(Skeleton.build(1, ["v"], [Edge(x, 1, "v", "v") for x in names]), (bound,))


def omega_k(k: int, window: Sequence[int]) -> KGraph:
    """Omega_k restricted to objects ``m <= window``.

    Objects are degree tuples; the edge ``(m, i)`` is the morphism ``(m, m+e_i)``
    with range ``m`` and source ``m+e_i``.
    """
    window = tuple(window)
    verts = list(box(zero(k), window))
    edges = []
    for m in verts:
        for i in range(1, k + 1):
            top = vadd(m, unit_vector(k, i))
            if vle(top, window):
                edges.append(Edge((m, i), i, top, m))
    squares = []
    for m in verts:
        for i in range(1, k + 1):
            for j in range(i + 1, k + 1):
                mi, mj = vadd(m, unit_vector(k, i)), vadd(m, unit_vector(k, j))
                if vle(vadd(mi, unit_vector(k, j)), window):
                    squares.append((((m, i), (mi, j)), ((m, j), (mj, i))))
    return KGraph(Skeleton.build(k, verts, edges, squares), window)


def omega_morphism(g: KGraph, m: Sequence[int], n: Sequence[int]) -> Morphism:
    """The morphism ``(m, n)`` of a windowed Omega_k."""
    m, n = tuple(m), tuple(n)
    if not vle(m, n):
        raise DegreeMismatch(f"({m},{n}) is not a morphism of Omega_k")
    if m == n:
        return g.vertex(m)
    word, cur = [], m
    for i in range(g.k):
        for _ in range(n[i] - m[i]):
            word.append((cur, i + 1))
            cur = vadd(cur, unit_vector(g.k, i + 1))
    return g.path(*word)


def two_by_two(bound: Sequence[int] = (3, 3)) -> KGraph:
    """One vertex, two loops of each colour, squares given by a non-identity bijection."""
    edges = [Edge(x, 1, "v", "v") for x in ("a1", "a2")] + [Edge(x, 2, "v", "v") for x in ("b1", "b2")]
    squares = [
        (("a1", "b1"), ("b2", "a2")),
        (("a1", "b2"), ("b1", "a1")),
        (("a2", "b1"), ("b1", "a2")),
        (("a2", "b2"), ("b2", "a1")),
    ]
    return KGraph(Skeleton.build(2, ["v"], edges, squares), bound)


def flip_flop(bound: Sequence[int] = (3, 3)) -> KGraph:
    """Two vertices ``u``, ``w``; each colour has one edge in each direction."""
    edges = [
        Edge("a1", 1, "u", "w"), Edge("a2", 1, "w", "u"),
        Edge("b1", 2, "u", "w"), Edge("b2", 2, "w", "u"),
    ]
    squares = [(("a1", "b2"), ("b1", "a2")), (("a2", "b1"), ("b2", "a1"))]
    return KGraph(Skeleton.build(2, ["u", "w"], edges, squares), bound)


def twisted_cube(bound: Sequence[int] = (1, 1, 1)) -> KGraph:
    """A 3-coloured presentation whose squares are complete but not associative.

    Colour 1 has three loops; the (1,2) and (1,3) squares act on them by the
    non-commuting transpositions (0 1) and (1 2).
    """
    e = ["e0", "e1", "e2"]
    edges = [Edge(x, 1, "v", "v") for x in e] + [Edge("f", 2, "v", "v"), Edge("g", 3, "v", "v")]
    pi = {0: 1, 1: 0, 2: 2}
    rho = {0: 0, 1: 2, 2: 1}
    squares = [((e[i], "f"), ("f", e[pi[i]])) for i in range(3)]
    squares += [((e[i], "g"), ("g", e[rho[i]])) for i in range(3)]
    squares += [(("f", "g"), ("g", "f"))]
    return KGraph(Skeleton.build(3, ["v"], edges, squares), bound)
