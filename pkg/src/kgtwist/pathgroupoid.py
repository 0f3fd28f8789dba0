"""Finite-depth model of the path groupoid of a row-finite, source-free k-graph.

An infinite path is stored as ``anchor * z`` where ``z`` is the greedy path out of
``s(anchor)``: repeatedly append the lexicographically least morphism of degree
``(1, ..., 1)``.  Every path carries a *depth*; nothing beyond it is ever used
for a decision, and asking for more raises :class:`InsufficientDepth`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .circle import CircleValue
from .cocycles import Cocycle, CocycleHomotopy, homotopy_eval
from .errors import CertificateMeetError, InsufficientDepth, NotComposable
from .kgraph import (
    Degree,
    KGraph,
    Morphism,
    box,
    ones,
    vadd,
    vjoin,
    vle,
    vmeet,
    vneg,
    vpos,
    vsub,
    zero,
)


def greedy_unit(g: KGraph, v) -> Morphism:
    """The lexicographically least morphism of degree (1,...,1) with range ``v``."""
    word, u = [], v
    for c in range(1, g.k + 1):
        incoming = g._incoming[u][c]
        if not incoming:
            raise InsufficientDepth(f"vertex {v!r} receives no colour-{c} edge; no infinite path")
        e = incoming[0]
        word.append(e.id)
        u = e.src
    return Morphism(tuple(word), v, u, ones(g.k))


class InfPath:
    """``x = anchor * z_{s(anchor)}``, trusted up to degree ``depth``."""

    __slots__ = ("graph", "anchor", "depth", "_long", "_key", "_segments")

    def __init__(self, graph: KGraph, anchor: Morphism, depth: Sequence[int]):
        depth = tuple(depth)
        if len(depth) != graph.k or min(depth) < 0:
            raise ValueError(f"bad depth {depth}")
        self.graph = graph
        self.anchor = anchor
        self.depth = depth
        self._long = anchor
        self._key = None
        self._segments: dict = {}

    @classmethod
    def at_vertex(cls, graph: KGraph, v, depth: Sequence[int]) -> InfPath:
        return cls(graph, graph.vertex(v), depth)

    def _long_prefix(self, n: Sequence[int]) -> Morphism:
        # anchor followed by enough greedy steps to cover degree n
        while not vle(n, self._long.degree):
            self._long = self.graph.compose(self._long, greedy_unit(self.graph, self._long.source))
        return self._long

    def _need(self, n: Sequence[int]) -> None:
        if not vle(n, self.depth):
            raise InsufficientDepth(f"degree {tuple(n)} exceeds stored depth {self.depth}")

    def segment(self, a: Sequence[int], b: Sequence[int]) -> Morphism:
        """``x(a, b)``."""
        a, b = tuple(a), tuple(b)
        got = self._segments.get((a, b))
        if got is None:
            self._need(b)
            got = self._segments[(a, b)] = self.graph.segment(self._long_prefix(b), a, b)
        return got

    def prefix(self, n: Sequence[int]) -> Morphism:
        return self.segment(zero(self.graph.k), n)

    @property
    def range(self):
        return self.anchor.range

    def at(self, n: Sequence[int]):
        """The vertex ``x(n)``."""
        return self.segment(n, n).range

    def shift(self, p: Sequence[int]) -> InfPath:
        """``sigma^p x``."""
        self._need(p)
        lam = self._long_prefix(p)
        return InfPath(self.graph, self.graph.segment(lam, p, lam.degree), vsub(self.depth, p))

    def extend(self, depth: Sequence[int]) -> InfPath:
        """The same path with a larger trusted depth (the extension rule is deterministic)."""
        depth = tuple(depth)
        if not vle(self.depth, depth):
            raise ValueError("extend() cannot reduce depth")
        return InfPath(self.graph, self.anchor, depth)

    def with_depth(self, depth: Sequence[int]) -> InfPath:
        return InfPath(self.graph, self.anchor, depth)

    def key(self) -> tuple:
        if self._key is None:
            # the graph's identity keeps caches from mixing graphs with equal labels
            self._key = (id(self.graph), self.prefix(self.depth).word, self.range, self.depth)
        return self._key

    def agrees(self, other: InfPath) -> bool:
        """Equal on the common trusted depth."""
        d = vmeet(self.depth, other.depth)
        return self.graph is other.graph and self.prefix(d) == other.prefix(d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, InfPath):
            return NotImplemented
        return self.graph is other.graph and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"InfPath({self.prefix(self.depth)}..., depth={self.depth})"


def concat(mu: Morphism, tail: InfPath) -> InfPath:
    """``mu * tail``; the depth grows by ``d(mu)``."""
    g = tail.graph
    return InfPath(g, g.compose(mu, tail.anchor), vadd(mu.degree, tail.depth))


# ---------------------------------------------------------------------------
# groupoid elements
# ---------------------------------------------------------------------------

def certificate_holds(x: InfPath, n: Degree, y: InfPath, m: Degree) -> bool:
    """``sigma^n x = sigma^m y`` on the trusted depth of both paths."""
    span = vmeet(vsub(x.depth, n), vsub(y.depth, m))
    if min(span, default=0) < 0:
        return False
    return x.segment(n, vadd(n, span)) == y.segment(m, vadd(m, span))


@dataclass(frozen=True, eq=False)
class GroupoidElem:
    """``(x, lag, y)`` with a certificate ``(n, m)``: ``sigma^n x = sigma^m y``, ``n - m = lag``."""

    x: InfPath
    lag: Degree
    y: InfPath
    cert: tuple[Degree, Degree]

    def __post_init__(self):
        n, m = self.cert
        if vsub(n, m) != tuple(self.lag):
            raise ValueError(f"certificate {self.cert} does not realise lag {self.lag}")
        if not certificate_holds(self.x, n, self.y, m):
            raise ValueError(f"certificate {self.cert} fails at the stored depth")

    @classmethod
    def find(cls, x: InfPath, lag: Sequence[int], y: InfPath) -> GroupoidElem:
        """Locate the least certificate for ``(x, lag, y)`` within the stored depth."""
        lag = tuple(lag)
        for n in _certificate_candidates(x, lag, y):
            m = vsub(n, lag)
            if certificate_holds(x, n, y, m):
                return cls(x, lag, y, (n, m))
        raise InsufficientDepth(f"no certificate for lag {lag} within depths {x.depth}, {y.depth}")

    @classmethod
    def from_cylinder(cls, mu: Morphism, nu: Morphism, tail: InfPath) -> GroupoidElem:
        """The element ``(mu w, d(mu) - d(nu), nu w)`` of ``Z(mu, nu)``."""
        if mu.source != nu.source or tail.range != mu.source:
            raise NotComposable("cylinder pair and tail do not share a vertex")
        return cls(concat(mu, tail), vsub(mu.degree, nu.degree), concat(nu, tail), (mu.degree, nu.degree))

    @classmethod
    def unit(cls, x: InfPath) -> GroupoidElem:
        z = zero(x.graph.k)
        return cls(x, z, x, (z, z))

    def inverse(self) -> GroupoidElem:
        n, m = self.cert
        return GroupoidElem(self.y, tuple(-a for a in self.lag), self.x, (m, n))

    @property
    def is_unit(self) -> bool:
        return not any(self.lag) and self.x == self.y

    def key(self) -> tuple:
        return (self.x.key(), tuple(self.lag), self.y.key())

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupoidElem):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"({self.x!r}, {self.lag}, {self.y!r})"


def _certificate_candidates(x: InfPath, lag: Degree, y: InfPath) -> Iterable[Degree]:
    # n >= lag_+ so that m = n - lag >= 0; keep one degree of look-ahead in both paths
    lo = vpos(lag)
    hi = vmeet(vsub(x.depth, ones(len(lag))), vadd(vsub(y.depth, ones(len(lag))), lag))
    if not vle(lo, hi):
        return []
    return sorted(box(lo, hi), key=lambda n: (sum(n), n))


def compose_elems(a: GroupoidElem, b: GroupoidElem) -> GroupoidElem:
    """``(x, l, y)(y, m, z) = (x, l + m, z)``."""
    if not a.y.agrees(b.x):
        raise NotComposable("s(a) != r(b) on the stored depth")
    (na, ma), (nb, mb) = a.cert, b.cert
    t = vjoin(ma, nb)
    n, m = vadd(na, vsub(t, ma)), vadd(mb, vsub(t, nb))
    if not (vle(n, a.x.depth) and vle(m, b.y.depth)):
        raise InsufficientDepth(f"product certificate {(n, m)} exceeds the stored depth")
    return GroupoidElem(a.x, vadd(a.lag, b.lag), b.y, (n, m))


@dataclass(frozen=True)
class CylinderPair:
    """``(mu, nu)`` with ``s(mu) = s(nu)``, naming the cylinder ``Z(mu, nu)``."""

    mu: Morphism
    nu: Morphism

    def __post_init__(self):
        if self.mu.source != self.nu.source:
            raise NotComposable(f"s({self.mu}) != s({self.nu})")

    def contains(self, a: GroupoidElem) -> bool:
        if a.lag != vsub(self.mu.degree, self.nu.degree):
            return False
        try:
            return (a.x.prefix(self.mu.degree) == self.mu and a.y.prefix(self.nu.degree) == self.nu
                    and certificate_holds(a.x, self.mu.degree, a.y, self.nu.degree))
        except InsufficientDepth:
            return False

    def __str__(self) -> str:
        return f"Z({self.mu}, {self.nu})"


@lru_cache(maxsize=65536)
def _minimal_certificate(a: GroupoidElem) -> tuple[Degree, Degree]:
    valid = [n for n in _certificate_candidates(a.x, a.lag, a.y)
             if certificate_holds(a.x, n, a.y, vsub(n, a.lag))]
    if not valid:
        raise InsufficientDepth(f"no certificate for lag {a.lag} with one degree of look-ahead "
                                f"inside depths {a.x.depth}, {a.y.depth}")
    n = vmeet(*valid)
    m = vsub(n, a.lag)
    if not certificate_holds(a.x, n, a.y, m):
        raise CertificateMeetError(f"valid certificates {valid} have an invalid meet {(n, m)}")
    return n, m


def minimal_certificate(a: GroupoidElem) -> tuple[Degree, Degree]:
    return _minimal_certificate(a)


def canonical_pair(a: GroupoidElem) -> CylinderPair:
    """``(x(0, n_min), y(0, m_min))`` for the least certificate ``(n_min, m_min)``."""
    n, m = _minimal_certificate(a)
    return CylinderPair(a.x.prefix(n), a.y.prefix(m))


@dataclass(frozen=True)
class Refinement:
    alpha: Morphism
    beta: Morphism
    gamma: Morphism
    tail: InfPath


@lru_cache(maxsize=65536)
def resolve_refinement(a: GroupoidElem, b: GroupoidElem) -> Refinement:
    """Least ``alpha, beta, gamma`` and a common tail ``w`` with

    ``a = (mu_a alpha w, ., nu_a alpha w)``, ``b = (mu_b beta w, ., nu_b beta w)`` and
    ``ab = (mu_ab gamma w, ., nu_ab gamma w)``.
    """
    ab = compose_elems(a, b)
    (na, ma), (nb, mb), (nab, mab) = (_minimal_certificate(e) for e in (a, b, ab))
    lead = vsub(na, ma)
    t = vjoin(na, nab, vadd(lead, nb))
    pb = vsub(vsub(t, lead), nb)
    x, y, z = a.x, b.x, b.y
    alpha = x.segment(na, t)
    beta = y.segment(nb, vadd(nb, pb))
    gamma = x.segment(nab, t)
    tail = x.shift(t)
    g = x.graph
    mu_a, nu_a = x.prefix(na), a.y.prefix(ma)
    mu_b, nu_b = y.prefix(nb), z.prefix(mb)
    mu_ab, nu_ab = x.prefix(nab), z.prefix(mab)
    checks = [
        (x, g.compose(mu_a, alpha)), (a.y, g.compose(nu_a, alpha)),
        (y, g.compose(mu_b, beta)), (z, g.compose(nu_b, beta)),
        (x, g.compose(mu_ab, gamma)), (z, g.compose(nu_ab, gamma)),
    ]
    for path, head in checks:
        if path.prefix(head.degree) != head or not path.shift(head.degree).agrees(tail):
            raise InsufficientDepth("refinement could not be certified at the stored depth")
    return Refinement(alpha, beta, gamma, tail)


@lru_cache(maxsize=65536)
def _sigma_data(a: GroupoidElem, b: GroupoidElem) -> tuple:
    ab = compose_elems(a, b)
    return canonical_pair(a), canonical_pair(b), canonical_pair(ab), resolve_refinement(a, b)


def sigma_c(c: Cocycle, a: GroupoidElem, b: GroupoidElem) -> CircleValue:
    """The groupoid 2-cocycle induced by ``c`` through canonical pairs."""
    pa, pb, pab, ref = _sigma_data(a, b)
    num = c(pa.mu, ref.alpha) * c(pb.mu, ref.beta) * c(pab.nu, ref.gamma)
    den = c(pa.nu, ref.alpha) * c(pb.nu, ref.beta) * c(pab.mu, ref.gamma)
    return num / den


def omega_homotopy(h: CocycleHomotopy, t, a: GroupoidElem, b: GroupoidElem) -> CircleValue:
    """``omega((a, t), (b, t)) = sigma_{c_t}(a, b)``."""
    return sigma_c(homotopy_eval(h, t), a, b)


def lag_element(x: InfPath, lag: Sequence[int]) -> GroupoidElem:
    """``(x, lag, x)`` on a graph where ``x`` is shift-invariant (e.g. ``N^k``)."""
    lag = tuple(lag)
    return GroupoidElem(x, lag, x, (vpos(lag), vneg(lag)))


# ---------------------------------------------------------------------------
# cylinder windows
# ---------------------------------------------------------------------------

class CylinderWindow:
    """The elements of ``Z(mu, nu)`` whose tails are distinguished up to ``depth``.

    Units are identified by their prefix of degree ``d(mu) + depth`` (resp.
    ``d(nu) + depth``); this is the finite shadow used for I-norm computations.
    """

    def __init__(self, g: KGraph, mu: Morphism, nu: Morphism, depth: Sequence[int]):
        self.pair = CylinderPair(mu, nu)
        self.graph = g
        self.depth = tuple(depth)
        self.elements = [
            GroupoidElem.from_cylinder(mu, nu, InfPath(g, beta, self.depth))
            for beta in g.lambda_set(mu.source, self.depth)
        ]

    def r(self, a: GroupoidElem):
        return a.x.key()

    def s(self, a: GroupoidElem):
        return a.y.key()

    def indicator(self) -> dict:
        return {a: 1 for a in self.elements}
