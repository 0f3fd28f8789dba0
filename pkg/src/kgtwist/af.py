"""AF structure of twisted k-graph algebras when the degree map is a coboundary.

Level algebras ``A_n`` are matrix-unit systems ``e_{lam,mu}`` (``s(lam) = s(mu)``,
``b(s(lam)) = n``), truncated to the morphisms enumerated inside the graph's
bound.  Connecting maps and the diagonal unitaries ``U_n`` act on matrix units
by circle phases, so everything here is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .circle import ONE, CircleValue
from .cocycles import Cocycle, CocycleHomotopy, Trivial, homotopy_eval
from .errors import BoundExceeded, NotCoboundaryDegree, WindowEscape
from .intlinalg import SmithForm, smith_normal_form
from .kgraph import Degree, KGraph, Morphism, ValidationReport, box, label, ones, vle, vsub
from .skew import DegreePotential, Obstruction, SkewProduct, solve_degree_coboundary

Unit = tuple  # (lam, mu)


def kappa(c: Cocycle, lam: Morphism, _memo: dict | None = None) -> CircleValue:
    """``kappa(lam) = 1`` unless ``d(lam) >= 1``; then ``kappa(mu) c(mu, alpha)`` with
    ``lam = mu alpha`` and ``d(alpha) = 1``."""
    memo = {} if _memo is None else _memo
    chain = []
    cur = lam
    k = c.graph.k
    while vle(ones(k), cur.degree) and cur not in memo:
        mu, alpha = c.graph.factorize(cur, vsub(cur.degree, ones(k)), ones(k))
        chain.append((cur, mu, alpha))
        cur = mu
    val = memo.get(cur, ONE)
    for node, mu, alpha in reversed(chain):
        val = val * c(mu, alpha)
        memo[node] = val
    return val


class KappaTable:
    """Memoised ``kappa`` for one cocycle, optionally with overridden values."""

    def __init__(self, c: Cocycle, overrides: Mapping[Morphism, CircleValue] | None = None):
        self.c = c
        self.overrides = dict(overrides or {})
        self._memo: dict = {}

    def __call__(self, lam: Morphism) -> CircleValue:
        if lam in self.overrides:
            return self.overrides[lam]
        return kappa(self.c, lam, self._memo)


def _unit_str(u: Unit) -> str:
    return f"e[{u[0]}, {u[1]}]"


@dataclass
class LevelAlgebra:
    level: Degree
    summands: dict  # vertex -> list of labels (morphisms with that source)

    @property
    def units(self) -> list[Unit]:
        return [(lam, mu) for v in self.summands for lam in self.summands[v] for mu in self.summands[v]]

    @property
    def label_count(self) -> int:
        return sum(len(x) for x in self.summands.values())

    def mul(self, u: Unit, w: Unit) -> Unit | None:
        """``e_{lam mu} e_{mu' nu} = delta_{mu mu'} e_{lam nu}``."""
        return (u[0], w[1]) if u[1] == w[0] else None

    def to_dict(self) -> dict:
        return {
            "level": list(self.level),
            "summands": {label(v): len(labs) for v, labs in self.summands.items()},
            "label_count": self.label_count,
        }


@dataclass
class PhaseMatrixUnitMap:
    """Linear map on matrix units: ``u -> sum coeff * u'``."""

    source: Degree
    target: Degree
    images: dict  # unit -> tuple of (unit, CircleValue)

    def apply(self, combo: Mapping[Unit, CircleValue]) -> dict:
        out: dict = {}
        for u, coeff in combo.items():
            for w, phase in self.images[u]:
                out.setdefault(w, []).append(coeff * phase)
        return {w: _single(vals, w) for w, vals in out.items()}

    def __call__(self, u: Unit) -> dict:
        return {w: p for w, p in self.images[u]}

    def after(self, other: PhaseMatrixUnitMap) -> PhaseMatrixUnitMap:
        """``self o other``."""
        if other.target != self.source:
            raise ValueError("maps are not composable")
        return PhaseMatrixUnitMap(other.source, self.target,
                                  {u: tuple(sorted(self.apply(dict(img)).items(), key=_key))
                                   for u, img in other.images.items()})

    def differences(self, other: PhaseMatrixUnitMap) -> list[Unit]:
        return [u for u in self.images if dict(self.images[u]) != dict(other.images.get(u, ()))]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhaseMatrixUnitMap):
            return NotImplemented
        return (self.source, self.target) == (other.source, other.target) and \
            set(self.images) == set(other.images) and not self.differences(other)

    def is_multiplicative(self, algebra: LevelAlgebra) -> list[tuple[Unit, Unit]]:
        """Pairs of units where ``phi(u) phi(w) != phi(uw)`` (empty when multiplicative)."""
        bad = []
        for u in algebra.units:
            for w in algebra.units:
                prod: dict = {}
                for a, pa in self.images[u]:
                    for b, pb in self.images[w]:
                        if a[1] == b[0]:
                            prod.setdefault((a[0], b[1]), []).append(pa * pb)
                uw = algebra.mul(u, w)
                expected = dict(self.images[uw]) if uw is not None else {}
                if {x: _single(v, x) for x, v in prod.items()} != expected:
                    bad.append((u, w))
        return bad


def _single(vals: list, where) -> CircleValue:
    # each matrix unit is hit at most once by a phase map; sums never occur
    if len(vals) != 1:
        raise ValueError(f"matrix unit {_unit_str(where)} received {len(vals)} contributions")
    return vals[0]


def _key(item):
    u = item[0]
    return (u[0].degree, u[0].word, str(u[0].range), u[1].degree, u[1].word, str(u[1].range))


class AFSystem:
    """Level algebras and phase maps for a graph with ``d = delta b``."""

    def __init__(self, g: KGraph, b: DegreePotential | None = None):
        if b is None:
            b = solve_degree_coboundary(g)
        if isinstance(b, Obstruction):
            raise NotCoboundaryDegree(f"d is not a coboundary: cycle of degree {b.total}")
        bad = b.check(g)
        if bad:
            raise NotCoboundaryDegree(f"delta b != d on {bad[0]}")
        self.graph = g
        self.b = b
        self._by_source: dict = {}
        for lam in g.morphisms():
            self._by_source.setdefault(lam.source, []).append(lam)
        for labs in self._by_source.values():
            labs.sort(key=lambda m: (m.degree, m.word, str(m.range)))
        self._levels: dict = {}

    @classmethod
    def of_skew(cls, sp: SkewProduct) -> AFSystem:
        return cls(sp.graph, DegreePotential({v: vsub(v[1], sp.lo) for v in sp.graph.vertices}))

    def diagonal(self, h: int) -> Degree:
        return ones(self.graph.k, h)

    def level(self, n: Sequence[int]) -> LevelAlgebra:
        n = tuple(n)
        if n not in self._levels:
            vs = [v for v in self.graph.vertices if self.b(v) == n]
            if not vs:
                raise WindowEscape(f"no vertex has b(v) = {n}")
            self._levels[n] = LevelAlgebra(n, {v: list(self._by_source.get(v, [])) for v in vs})
        return self._levels[n]

    def _extensions(self, v, d: Degree) -> list[Morphism]:
        try:
            return self.graph.lambda_set(v, d)
        except BoundExceeded as exc:
            raise WindowEscape(str(exc)) from None

    def connecting_map(self, c: Cocycle | None, n: Sequence[int], m: Sequence[int]) -> PhaseMatrixUnitMap:
        """``e_{lam mu} -> sum_alpha c(lam, alpha) conj(c(mu, alpha)) e_{lam alpha, mu alpha}``."""
        n, m = tuple(n), tuple(m)
        if not vle(n, m):
            raise WindowEscape(f"level {m} is not above {n}")
        c = c or Trivial(self.graph)
        src, dst = self.level(n), self.level(m)
        known = {lab for labs in dst.summands.values() for lab in labs}
        g = self.graph
        images = {}
        for v, labs in src.summands.items():
            alphas = self._extensions(v, vsub(m, n))
            ext = {}
            for lam in labs:
                row = []
                for alpha in alphas:
                    la = g.compose(lam, alpha)
                    if la not in known:
                        raise WindowEscape(f"{la} is not a label at level {m}")
                    row.append((alpha, la, c(lam, alpha)))
                ext[lam] = row
            for lam in labs:
                for mu in labs:
                    images[(lam, mu)] = tuple(
                        ((la, ma), cl / cm)
                        for (alpha, la, cl), (_, ma, cm) in zip(ext[lam], ext[mu])
                    )
        return PhaseMatrixUnitMap(n, m, images)

    def ad_U(self, c: Cocycle, n: Sequence[int], kappa_fn: Callable | None = None) -> PhaseMatrixUnitMap:
        """``e_{lam mu} -> kappa(lam) conj(kappa(mu)) e_{lam mu}``."""
        n = tuple(n)
        kf = kappa_fn or KappaTable(c)
        alg = self.level(n)
        return PhaseMatrixUnitMap(n, n, {(lam, mu): (((lam, mu), kf(lam) / kf(mu)),) for lam, mu in alg.units})

    def verify_intertwining(self, c: Cocycle, h: int, kappa_fn: Callable | None = None) -> ValidationReport:
        """``phi^c o Ad U_{h1} == Ad U_{(h+1)1} o phi`` on every matrix unit of level ``h 1``."""
        lo, hi = self.diagonal(h), self.diagonal(h + 1)
        kf = kappa_fn or KappaTable(c)
        left = self.connecting_map(c, lo, hi).after(self.ad_U(c, lo, kf))
        right = self.ad_U(c, hi, kf).after(self.connecting_map(None, lo, hi))
        rep = ValidationReport(info={"h": h, "units": len(left.images), "labels": self.level(lo).label_count})
        for u in left.differences(right):
            rep.add("intertwining", (_unit_str(u),), f"{dict(left.images[u])} != {dict(right.images[u])}")
        return rep

    def generator_phase(self, c: Cocycle, lam: Morphism, mu: Morphism, kappa_fn: Callable | None = None) -> CircleValue:
        """Phase by which the untwisted generator ``s_lam s_mu^*`` maps to the twisted one.

        The unit is pushed to the least diagonal level above ``b(s(lam))``, where
        ``Ad U`` applies; the phase ``kappa(lam a) conj(kappa(mu a)) / (c(lam, a)
        conj(c(mu, a)))`` must agree for every extension ``a``.
        """
        if lam.source != mu.source:
            raise ValueError("matrix units need s(lam) = s(mu)")
        kf = kappa_fn or KappaTable(c)
        n = self.b(lam.source)
        h = max(max(n), 0)
        target = self.diagonal(h)
        if not vle(n, target):
            raise WindowEscape(f"no diagonal level above {n}")
        g = self.graph
        phases = set()
        for alpha in self._extensions(lam.source, vsub(target, n)):
            la, ma = g.compose(lam, alpha), g.compose(mu, alpha)
            phases.add((kf(la) / kf(ma)) / (c(lam, alpha) / c(mu, alpha)))
        if len(phases) != 1:
            raise ValueError(f"generator phase is not well defined: {sorted(map(str, phases))}")
        return phases.pop()


# ---------------------------------------------------------------------------
# Bratteli diagrams and K_0
# ---------------------------------------------------------------------------

@dataclass
class BratteliDatum:
    """Diagonal levels ``0..H``; ``matrices[h][i][j]`` counts degree-1 morphisms from
    ``levels[h+1][i]`` (source) to ``levels[h][j]`` (range)."""

    levels: list[list]
    matrices: list[list[list[int]]]

    @property
    def H(self) -> int:
        return len(self.levels) - 1

    def to_dict(self) -> dict:
        return {
            "H": self.H,
            "levels": [[label(v) for v in vs] for vs in self.levels],
            "multiplicities": self.matrices,
        }

    def to_dot(self) -> str:
        lines = ["digraph bratteli {", "  rankdir=TB;"]
        for h, vs in enumerate(self.levels):
            names = " ".join(json.dumps(f"{h}:{label(v)}") for v in vs)
            lines.append(f"  {{ rank=same; {names} }}")
        for h, mat in enumerate(self.matrices):
            for i, w in enumerate(self.levels[h + 1]):
                for j, v in enumerate(self.levels[h]):
                    if mat[i][j]:
                        a, b = json.dumps(f"{h}:{label(v)}"), json.dumps(f"{h + 1}:{label(w)}")
                        lines.append(f"  {a} -> {b} [label=\"{mat[i][j]}\"];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def bratteli(system: AFSystem, H: int) -> BratteliDatum:
    """Vertices ``{v : b(v) = h 1}`` and degree-1 multiplicities for ``h = 0..H``."""
    if H < 0:
        raise ValueError("H must be nonnegative")
    g = system.graph
    levels = [sorted(system.level(system.diagonal(h)).summands) for h in range(H + 1)]
    mats = []
    for h in range(H):
        index = {w: i for i, w in enumerate(levels[h + 1])}
        mat = [[0] * len(levels[h]) for _ in levels[h + 1]]
        for j, v in enumerate(levels[h]):
            for alpha in system._extensions(v, ones(g.k)):
                mat[index[alpha.source]][j] += 1
        mats.append(mat)
    return BratteliDatum(levels, mats)


def bratteli_from_map(system: AFSystem, c: Cocycle, H: int) -> BratteliDatum:
    """Multiplicities read off the twisted connecting maps on vertex projections."""
    levels = [sorted(system.level(system.diagonal(h)).summands) for h in range(H + 1)]
    g = system.graph
    mats = []
    for h in range(H):
        phi = system.connecting_map(c, system.diagonal(h), system.diagonal(h + 1))
        index = {w: i for i, w in enumerate(levels[h + 1])}
        mat = [[0] * len(levels[h]) for _ in levels[h + 1]]
        for j, v in enumerate(levels[h]):
            pv = g.vertex(v)
            for (lam, _), _ in phi.images[(pv, pv)]:
                mat[index[lam.source]][j] += 1
        mats.append(mat)
    return BratteliDatum(levels, mats)


@dataclass
class FPAbelianGroup:
    """``Z^generators / rowspace(relations)`` with its Smith normal form."""

    generators: list
    relations: list[list[int]]
    snf: SmithForm
    classes: dict = field(default_factory=dict)  # name -> coordinates in the top level
    snf_classes: dict = field(default_factory=dict)  # name -> coordinates after SNF

    @property
    def torsion(self) -> list[int]:
        return [d for d in self.snf.invariant_factors if d != 1]

    @property
    def free_rank(self) -> int:
        return len(self.generators) - self.snf.rank

    def describe(self) -> str:
        parts = [f"Z/{d}" for d in self.torsion] + ["Z"] * self.free_rank
        return " + ".join(parts) or "0"

    def to_dict(self) -> dict:
        return {
            "group": self.describe(),
            "free_rank": self.free_rank,
            "torsion": self.torsion,
            "invariant_factors": self.snf.invariant_factors,
            "classes": {k: v for k, v in self.classes.items()},
            "snf_classes": {k: v for k, v in self.snf_classes.items()},
        }


def k0_truncated(bd: BratteliDatum) -> FPAbelianGroup:
    """Truncated dimension group: generators ``e_{v,h}``, relations ``e_{v,h} = M_h e_v``."""
    gens = [(h, v) for h, vs in enumerate(bd.levels) for v in vs]
    index = {gv: i for i, gv in enumerate(gens)}
    rels = []
    for h, mat in enumerate(bd.matrices):
        for j, v in enumerate(bd.levels[h]):
            row = [0] * len(gens)
            row[index[(h, v)]] += 1
            for i, w in enumerate(bd.levels[h + 1]):
                row[index[(h + 1, w)]] -= mat[i][j]
            rels.append(row)
    snf = smith_normal_form(rels, len(rels), len(gens))
    rank = snf.rank
    diag = snf.invariant_factors
    classes, snf_classes = {}, {}
    for h, vs in enumerate(bd.levels):
        for v in vs:
            name = label(v)
            vec = [int(w == v) for w in bd.levels[h]]
            for mat in bd.matrices[h:]:
                vec = [sum(row[j] * vec[j] for j in range(len(vec))) for row in mat]
            classes[name] = vec
            # row vector e_i V, reduced modulo the invariant factors
            coords = snf.right[index[(h, v)]]
            snf_classes[name] = [coords[j] % diag[j] for j in range(rank) if diag[j] != 1] + list(coords[rank:])
    return FPAbelianGroup([f"{h}:{label(v)}" for h, v in gens], rels, snf, classes, snf_classes)


# ---------------------------------------------------------------------------
# homotopy invariance
# ---------------------------------------------------------------------------

@dataclass
class HomotopyReport:
    H: int
    grid: list
    entries: list[dict]
    bratteli: BratteliDatum
    k0: FPAbelianGroup

    @property
    def intertwining_ok(self) -> bool:
        return all(e["intertwining_violations"] == 0 for e in self.entries)

    @property
    def bratteli_identical(self) -> bool:
        ref = json.dumps(self.bratteli.to_dict(), sort_keys=True)
        return all(json.dumps(e["bratteli"], sort_keys=True) == ref for e in self.entries)

    @property
    def k0_identical(self) -> bool:
        ref = json.dumps(self.k0.to_dict(), sort_keys=True)
        return all(json.dumps(e["k0"], sort_keys=True) == ref for e in self.entries)

    @property
    def ok(self) -> bool:
        return self.intertwining_ok and self.bratteli_identical and self.k0_identical

    def to_dict(self, psi: bool = True) -> dict:
        entries = self.entries if psi else [{k: v for k, v in e.items() if k != "psi"} for e in self.entries]
        return {
            "H": self.H,
            "grid": [str(t) for t in self.grid],
            "ok": self.ok,
            "intertwining_ok": self.intertwining_ok,
            "bratteli_identical": self.bratteli_identical,
            "k0_identical": self.k0_identical,
            "bratteli": self.bratteli.to_dict(),
            "k0": self.k0.to_dict(),
            "per_t": entries,
        }


def homotopy_invariance_report(system: AFSystem, H: int, hty: CocycleHomotopy, grid: Sequence) -> HomotopyReport:
    """Intertwining, Bratteli data, truncated K_0 and ``Psi_t`` phases for each ``t``."""
    ref = bratteli(system, H)
    ref_k0 = k0_truncated(ref)
    top = system.level(system.diagonal(H))
    entries = []
    for t in grid:
        c = homotopy_eval(hty, t)
        kf = KappaTable(c)
        violations = sum(len(system.verify_intertwining(c, h, kf).violations) for h in range(H))
        bd = bratteli_from_map(system, c, H)
        psi = [[str(lam), str(mu), str(kf(lam) / kf(mu))] for lam, mu in top.units]
        entries.append({
            "t": str(t),
            "intertwining_violations": violations,
            "bratteli": bd.to_dict(),
            "k0": k0_truncated(bd).to_dict(),
            "psi": psi,
        })
    return HomotopyReport(H, list(grid), entries, ref, ref_k0)


# ---------------------------------------------------------------------------
# translation and the phase map
# ---------------------------------------------------------------------------

@dataclass
class NonEquivarianceWitness:
    generator: Morphism
    translation: Degree
    translated: Morphism
    phase: CircleValue
    translated_phase: CircleValue
    kappa_equal: bool

    def to_dict(self) -> dict:
        return {
            "generator": str(self.generator),
            "translation": list(self.translation),
            "translated": str(self.translated),
            "phase": str(self.phase),
            "translated_phase": str(self.translated_phase),
            "kappa_equal": self.kappa_equal,
        }


def non_equivariance_witness(sp: SkewProduct, c: Cocycle, system: AFSystem | None = None) -> NonEquivarianceWitness | None:
    """First edge generator ``(e, n)`` and translation ``m`` whose generator phases differ.

    ``c`` is a cocycle on ``sp.graph`` (typically a pullback).
    """
    system = system or AFSystem.of_skew(sp)
    kf = KappaTable(c)
    g = sp.graph
    span = vsub(sp.hi, sp.lo)
    shifts = sorted((m for m in box(tuple(-x for x in span), span) if any(m)), key=lambda m: (sum(map(abs, m)), m))
    for eid in sorted(g.edges):
        lam = g.edge(eid)
        v = g.vertex(lam.source)
        try:
            p0 = system.generator_phase(c, lam, v, kf)
        except WindowEscape:
            continue
        for m in shifts:
            try:
                lam2 = sp.translate(m, lam)
                p1 = system.generator_phase(c, lam2, g.vertex(lam2.source), kf)
            except WindowEscape:
                continue
            if p1 != p0:
                return NonEquivarianceWitness(lam, m, lam2, p0, p1, kf(lam) == kf(lam2))
    return None

