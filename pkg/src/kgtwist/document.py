"""JSON workbench documents: graphs, cocycles, homotopies, groupoids, functions."""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from .circle import CircleValue, parse_angle
from .cocycles import (
    Bicharacter,
    Cocycle,
    Coboundary,
    CocycleHomotopy,
    ExponentialHomotopy,
    GridHomotopy,
    Product,
    RealBicharacter,
    RealCoboundary,
    RealCocycle,
    RealZero,
    Table,
    Trivial,
    real_rotation_cocycle,
    rotation_cocycle,
)
from .convolution import FiniteGroupoid, GridBundleFunction, GroupoidCocycle, klein_cocycle, scalar
from .errors import KGraphError, ParseError
from .kgraph import (
    Edge,
    KGraph,
    Morphism,
    Skeleton,
    cuntz_graph,
    flip_flop,
    nk_graph,
    omega_k,
    twisted_cube,
    two_by_two,
)


def fixture_names() -> list[str]:
    root = resources.files("kgtwist") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_document(source: str) -> dict:
    """Read a document from a path, or ``builtin:NAME`` for a bundled fixture."""
    try:
        if source.startswith("builtin:"):
            name = source.split(":", 1)[1]
            text = (resources.files("kgtwist") / "fixtures" / f"{name}.json").read_text()
        else:
            text = Path(source).read_text()
    except (OSError, FileNotFoundError) as exc:
        raise ParseError(f"cannot read {source}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ParseError("a document must be a JSON object")
    return doc


def _need(spec: dict, key: str, where: str) -> Any:
    if not isinstance(spec, dict) or key not in spec:
        raise ParseError(f"{where}: missing '{key}'")
    return spec[key]


def angle(text, where: str = "angle") -> Fraction:
    try:
        return parse_angle(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ParseError(f"{where}: cannot read angle {text!r}") from None


def int_vector(v, k: int | None = None, where: str = "vector") -> tuple:
    if not isinstance(v, list) or not all(isinstance(x, int) for x in v):
        raise ParseError(f"{where}: expected a list of integers, got {v!r}")
    if k is not None and len(v) != k:
        raise ParseError(f"{where}: expected length {k}")
    return tuple(v)


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

def build_graph(spec: dict, bound: tuple | None = None) -> KGraph:
    if not isinstance(spec, dict):
        raise ParseError("graph: expected an object")
    if "builtin" in spec:
        name = spec["builtin"]
        if name == "N2":
            g = nk_graph(2)
        elif name == "Nk":
            g = nk_graph(_need(spec, "k", "graph"))
        elif name in ("O2", "cuntz"):
            g = cuntz_graph(spec.get("n", 2))
        elif name == "two_by_two":
            g = two_by_two()
        elif name == "flip_flop":
            g = flip_flop()
        elif name == "twisted_cube":
            g = twisted_cube()
        elif name == "omega":
            k = _need(spec, "k", "graph")
            g = omega_k(k, int_vector(_need(spec, "window", "graph"), k, "graph.window"))
        else:
            raise ParseError(f"graph: unknown builtin {name!r}")
    else:
        k = _need(spec, "k", "graph")
        try:
            edges = [Edge(e["id"], e["color"], e["src"], e["dst"]) for e in _need(spec, "edges", "graph")]
            squares = [(tuple(p), tuple(q)) for p, q in spec.get("squares", [])]
            sk = Skeleton.build(k, _need(spec, "vertices", "graph"), edges, squares)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"graph: malformed presentation ({exc})") from None
        g = KGraph(sk, spec.get("bound", [3] * k))
    if bound is not None:
        if len(bound) != g.k:
            raise ParseError(f"bound {bound} does not match k={g.k}")
        g = KGraph(g.skeleton, bound)
    return g


def parse_morphism(g: KGraph, text) -> Morphism:
    """A vertex id, or an edge word ``"e.f"`` (any composable order)."""
    if text in g._incoming:
        return g.vertex(text)
    if not isinstance(text, str):
        raise ParseError(f"cannot read a morphism from {text!r}")
    ids = text.split(".")
    if any(x not in g.edges for x in ids):
        raise ParseError(f"unknown edge in {text!r}")
    try:
        return g.path(*ids)
    except KGraphError as exc:
        raise ParseError(f"{text!r} is not a path: {exc}") from None


def parse_window(spec, k: int) -> tuple[tuple, tuple]:
    if isinstance(spec, dict):
        return int_vector(_need(spec, "lo", "window"), k, "window.lo"), int_vector(_need(spec, "hi", "window"), k, "window.hi")
    return parse_window_flag(spec, k)


def parse_window_flag(text: str, k: int | None = None) -> tuple[tuple, tuple]:
    """``"0..3,0..3"`` -> ``((0, 0), (3, 3))``."""
    try:
        axes = [part.split("..") for part in str(text).split(",")]
        lo = tuple(int(a) for a, _ in axes)
        hi = tuple(int(b) for _, b in axes)
    except ValueError:
        raise ParseError(f"window: expected lo..hi per axis, got {text!r}") from None
    if k is not None and len(lo) != k:
        raise ParseError(f"window has {len(lo)} axes, expected {k}")
    return lo, hi


def parse_int_list(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# cocycles and homotopies
# ---------------------------------------------------------------------------

def _first_edge_value(g: KGraph, weights: dict, lam: Morphism) -> Fraction:
    return Fraction(0) if lam.is_vertex else weights[lam.word[0]]


def build_cocycle(spec: dict, g: KGraph) -> Cocycle:
    kind = _need(spec, "kind", "cocycle")
    if kind == "trivial":
        return Trivial(g)
    if kind == "rotation":
        return rotation_cocycle(g, angle(_need(spec, "theta", "cocycle"), "cocycle.theta"))
    if kind == "bicharacter":
        return Bicharacter(g, [[angle(x) for x in row] for row in _need(spec, "theta", "cocycle")])
    if kind == "table":
        entries = {}
        for item in _need(spec, "entries", "cocycle"):
            a, b = item["pair"]
            entries[(parse_morphism(g, a), parse_morphism(g, b))] = CircleValue(angle(item["angle"]))
        return Table(g, entries)
    if kind == "coboundary":
        b = {parse_morphism(g, m): CircleValue(angle(v)) for m, v in _need(spec, "b", "cocycle").items()}
        return Coboundary(g, b)
    if kind == "first-edge-coboundary":
        w = {e: angle(v) for e, v in _need(spec, "weights", "cocycle").items()}
        return Coboundary(g, lambda lam: CircleValue(_first_edge_value(g, w, lam)))
    if kind == "product":
        return Product(*(build_cocycle(f, g) for f in _need(spec, "factors", "cocycle")))
    raise ParseError(f"cocycle: unknown kind {kind!r}")


def build_real(spec: dict, g: KGraph) -> RealCocycle:
    kind = _need(spec, "kind", "sigma")
    if kind == "zero":
        return RealZero(g)
    if kind == "rotation":
        return real_rotation_cocycle(g, angle(_need(spec, "theta", "sigma")))
    if kind == "bicharacter":
        return RealBicharacter(g, [[angle(x) for x in row] for row in _need(spec, "theta", "sigma")])
    if kind == "coboundary":
        b = {parse_morphism(g, m): angle(v) for m, v in _need(spec, "b", "sigma").items()}
        return RealCoboundary(g, b)
    if kind == "first-edge-coboundary":
        w = {e: angle(v) for e, v in _need(spec, "weights", "sigma").items()}
        return RealCoboundary(g, lambda lam: _first_edge_value(g, w, lam))
    raise ParseError(f"sigma: unknown kind {kind!r}")


def build_homotopy(spec: dict, g: KGraph) -> CocycleHomotopy:
    kind = _need(spec, "kind", "homotopy")
    if kind == "exponential":
        return ExponentialHomotopy(build_cocycle(spec.get("base", {"kind": "trivial"}), g), build_real(_need(spec, "sigma", "homotopy"), g))
    if kind == "grid":
        pts = {angle(p["t"]): build_cocycle(p["cocycle"], g) for p in _need(spec, "points", "homotopy")}
        lip = spec.get("lipschitz")
        return GridHomotopy(pts, angle(lip) if lip is not None else None)
    raise ParseError(f"homotopy: unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# finite groupoids
# ---------------------------------------------------------------------------

def _element(x):
    # JSON has no tuples; lists name tuple-valued elements
    return tuple(_element(y) for y in x) if isinstance(x, list) else x


def build_groupoid(spec: dict) -> FiniteGroupoid:
    if "builtin" in spec:
        name = spec["builtin"]
        if name == "klein":
            return FiniteGroupoid.klein()
        if name == "matrix_units":
            return FiniteGroupoid.matrix_units(_need(spec, "n", "groupoid"))
        if name == "cyclic":
            return FiniteGroupoid.cyclic(_need(spec, "n", "groupoid"))
        raise ParseError(f"groupoid: unknown builtin {name!r}")
    try:
        els = [_element(x) for x in _need(spec, "elements", "groupoid")]
        units = [_element(x) for x in _need(spec, "units", "groupoid")]
        table = {(_element(x), _element(y)): _element(z) for x, y, z in _need(spec, "compose", "groupoid")}
        inv = {_element(x): _element(y) for x, y in _need(spec, "inverse", "groupoid")}
        return FiniteGroupoid(els, units, table, inv)
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"groupoid: malformed table ({exc})") from None


def build_omega(spec: dict | None, G: FiniteGroupoid) -> GroupoidCocycle:
    if spec is None or spec.get("kind") == "trivial":
        return GroupoidCocycle.trivial(G)
    if spec.get("builtin") == "klein":
        return klein_cocycle(G)
    if spec.get("kind") == "coboundary":
        beta = {_element(x): angle(v) for x, v in _need(spec, "beta", "omega")}
        return GroupoidCocycle.coboundary(G, beta)
    entries = {(_element(x), _element(y)): CircleValue(angle(a)) for x, y, a in _need(spec, "entries", "omega")}
    base = GroupoidCocycle.trivial(G)
    base.table.update(entries)
    return base


def _value(v):
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    if isinstance(v, str):
        return scalar(angle(v, "value"))
    if isinstance(v, (int, float)):
        return scalar(Fraction(v) if isinstance(v, int) else v)
    raise ParseError(f"cannot read a scalar from {v!r}")


def build_function(items) -> dict:
    """``[[element, value], ...]`` with values ``"p/q"``, numbers or ``[re, im]``."""
    return {_element(x): _value(v) for x, v in items}


def build_bundle(spec: dict, grid: list, G: FiniteGroupoid) -> GridBundleFunction:
    kind = spec.get("kind", "slices")
    if kind == "t-delta":
        e = _element(_need(spec, "element", "bundle"))
        return GridBundleFunction.from_function(grid, [e], lambda a, t: t)
    if kind == "affine":
        # F(a, t) = f0(a) + t (f1(a) - f0(a))
        f0 = build_function(spec.get("f0", []))
        f1 = build_function(spec.get("f1", []))
        keys = sorted(set(f0) | set(f1), key=repr)
        zero = scalar(0)
        return GridBundleFunction.from_function(
            grid, keys, lambda a, t: f0.get(a, zero) + scalar(t) * (f1.get(a, zero) - f0.get(a, zero)))
    if kind == "slices":
        slices = {angle(t): build_function(items) for t, items in _need(spec, "slices", "bundle").items()}
        return GridBundleFunction(tuple(sorted(slices)), slices)
    raise ParseError(f"bundle: unknown kind {kind!r}")
