"""Command-line entry point: ``kgtwist COMMAND DOCUMENT [flags]``.

Exit codes: 0 all checks pass, 1 violations found (reported), 2 input error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from fractions import Fraction
from typing import Callable

from . import document as docmod
from .af import AFSystem, bratteli, homotopy_invariance_report, k0_truncated, non_equivariance_witness
from .circle import Cyclo, format_angle
from .cocycles import Approximate, is_cohomologous, rational_grid, verify_cocycle
from .convolution import associativity_report, convolve, i_norm, i_norm_scan, involution
from .errors import (
    ApproximateModeUnsupported,
    BoundExceeded,
    CertificateMeetError,
    CocycleInvalid,
    DegreeMismatch,
    EmptyWindow,
    GridMismatch,
    InsufficientDepth,
    KGraphError,
    MalformedSkeleton,
    MixedModeError,
    NotCoboundaryDegree,
    NotComposable,
    OffGrid,
    OutOfRange,
    ParseError,
    TableDomainExceeded,
    WindowEscape,
)
from .kgraph import KGraph, label, validate_presentation
from .pathgroupoid import GroupoidElem, InfPath, canonical_pair, compose_elems, sigma_c
from .skew import DegreePotential, SkewProduct, pullback_cocycle, pullback_homotopy, solve_degree_coboundary

INPUT_ERRORS = (ParseError, MalformedSkeleton, EmptyWindow, GridMismatch, ApproximateModeUnsupported,
                MixedModeError, DegreeMismatch, OffGrid, OutOfRange)
REPORTED_ERRORS = (BoundExceeded, InsufficientDepth, CertificateMeetError, TableDomainExceeded, WindowEscape,
                   CocycleInvalid, NotCoboundaryDegree, NotComposable)


class Context:
    """Parsed document plus command-line overrides."""

    def __init__(self, doc: dict, args: argparse.Namespace):
        self.doc = doc
        self.args = args
        bound = docmod.parse_int_list(args.bound) if args.bound else None
        if bound is None and "bound" in doc:
            bound = docmod.int_vector(doc["bound"], where="bound")
        self.graph: KGraph = docmod.build_graph(docmod._need(doc, "graph", "document"), bound) if "graph" in doc else None
        self.window = None
        if args.window:
            self.window = docmod.parse_window_flag(args.window, self.graph.k if self.graph else None)
        elif "window" in doc and self.graph is not None:
            self.window = docmod.parse_window(doc["window"], self.graph.k)

    @property
    def exact(self) -> bool:
        return not self.args.float

    def need_graph(self) -> KGraph:
        if self.graph is None:
            raise ParseError("document has no 'graph'")
        return self.graph

    def skew(self) -> SkewProduct:
        if self.window is None:
            raise ParseError("this command needs a window (document 'window' or --window)")
        return SkewProduct(self.need_graph(), *self.window)

    def cocycle(self, key: str = "cocycle"):
        spec = self.doc.get(key)
        if spec is None:
            raise ParseError(f"document has no '{key}'")
        c = docmod.build_cocycle(spec, self.need_graph())
        return c if self.exact else Approximate(c)

    def levels(self, default: int = 3) -> int:
        if self.args.levels is not None:
            return self.args.levels
        return int(self.doc.get("levels", default))

    def grid(self, default: int = 11) -> list:
        n = self.args.grid if self.args.grid is not None else int(self.doc.get("grid", default))
        if n < 2:
            raise GridMismatch("a grid needs at least two points")
        pts = rational_grid(n)
        return pts if self.exact else [float(t) for t in pts]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(ctx: Context) -> tuple[dict, bool]:
    rep = validate_presentation(ctx.need_graph())
    return rep.to_dict(), rep.ok


def cmd_check_cocycle(ctx: Context) -> tuple[dict, bool]:
    g = ctx.need_graph()
    c = ctx.cocycle()
    rep = verify_cocycle(c, g.bound)
    out = {"bound": list(g.bound), "mode": "exact" if ctx.exact else "float", "base": rep.to_dict()}
    ok = rep.ok
    if ctx.window is not None:
        sp = ctx.skew()
        prep = verify_cocycle(pullback_cocycle(c, sp), sp.graph.bound)
        out["window"] = {"lo": list(sp.lo), "hi": list(sp.hi)}
        out["pullback"] = prep.to_dict()
        ok = ok and prep.ok
    return out, ok


def cmd_cohomologous(ctx: Context) -> tuple[dict, bool]:
    res = is_cohomologous(ctx.cocycle(), ctx.cocycle("cocycle2"), ctx.need_graph().bound)
    return res.to_dict(), res.cohomologous


def _skew_summary(sp: SkewProduct) -> dict:
    rep = validate_presentation(sp.graph)
    return {
        "window": {"lo": list(sp.lo), "hi": list(sp.hi)},
        "vertices": len(sp.graph.vertices),
        "edges": len(sp.graph.edges),
        "morphisms": sum(1 for _ in sp.graph.morphisms()),
        "clipped": [label(v) for v in sp.clipped],
        "validation": {"ok": rep.ok, "violations": [v.to_dict() for v in rep.violations]},
    }


def cmd_skew(ctx: Context) -> tuple[dict, bool]:
    sp = ctx.skew()
    out = _skew_summary(sp)
    return out, out["validation"]["ok"]


def cmd_solve_db(ctx: Context) -> tuple[dict, bool]:
    if ctx.window is not None:
        g = ctx.skew().graph
        out = {"window": {"lo": list(ctx.window[0]), "hi": list(ctx.window[1])}}
    else:
        g = ctx.need_graph()
        out = {}
    res = solve_degree_coboundary(g)
    if isinstance(res, DegreePotential):
        out.update({"solved": True, "b": res.to_dict(), "failures": [str(m) for m in res.check(g)]})
        return out, not out["failures"]
    out.update({"solved": False, "obstruction": res.to_dict()})
    return out, False


def _element(g: KGraph, spec: dict, depth: tuple) -> GroupoidElem:
    x = InfPath(g, docmod.parse_morphism(g, docmod._need(spec, "x", "element")), depth)
    y = InfPath(g, docmod.parse_morphism(g, docmod._need(spec, "y", "element")), depth)
    return GroupoidElem.find(x, docmod.int_vector(docmod._need(spec, "lag", "element"), g.k, "element.lag"), y)


def cmd_sigma_c(ctx: Context) -> tuple[dict, bool]:
    g = ctx.need_graph()
    spec = ctx.doc.get("sigma_c", {})
    depth = docmod.parse_int_list(ctx.args.depth) if ctx.args.depth else docmod.int_vector(spec.get("depth", [7] * g.k), g.k, "depth")
    c = ctx.cocycle()
    out: dict = {"depth": list(depth), "values": []}
    ok = True
    for pair in spec.get("pairs", []):
        a, b = _element(g, pair["a"], depth), _element(g, pair["b"], depth)
        pa, pb = canonical_pair(a), canonical_pair(b)
        out["values"].append({
            "a": {"lag": list(a.lag), "mu": str(pa.mu), "nu": str(pa.nu)},
            "b": {"lag": list(b.lag), "mu": str(pb.mu), "nu": str(pb.nu)},
            "sigma": str(sigma_c(c, a, b)),
        })
    radius = spec.get("verify_lags")
    if radius is not None:
        x = InfPath.at_vertex(g, g.vertices[0], depth)
        elems = []
        for lag in itertools.product(range(-radius, radius + 1), repeat=g.k):
            try:
                elems.append(GroupoidElem.find(x, lag, x))
            except InsufficientDepth:
                pass
        violations, triples = [], 0
        for a, b, e in itertools.product(elems, repeat=3):
            triples += 1
            ab, be = compose_elems(a, b), compose_elems(b, e)
            if sigma_c(c, a, be) * sigma_c(c, b, e) != sigma_c(c, ab, e) * sigma_c(c, a, b):
                violations.append([list(a.lag), list(b.lag), list(e.lag)])
        norm = [list(a.lag) for a in elems
                if not (sigma_c(c, a, GroupoidElem.unit(a.y)).is_one() and sigma_c(c, GroupoidElem.unit(a.x), a).is_one())]
        out["identity"] = {"lag_radius": radius, "elements": len(elems), "triples": triples,
                           "violations": violations, "normalization_violations": norm}
        ok = not violations and not norm
    return out, ok


def _groupoid(ctx: Context):
    G = docmod.build_groupoid(docmod._need(ctx.doc, "groupoid", "document"))
    omega = docmod.build_omega(ctx.doc.get("omega"), G)
    return G, omega


def _fmt_scalar(v) -> str:
    if isinstance(v, Cyclo):
        q = v.rational_value()
        if q is not None:
            return format_angle(q)
        z = complex(v)
        return f"{z.real:.12g}{z.imag:+.12g}j"
    return f"{v.real:.12g}{v.imag:+.12g}j"


def _fmt_fn(f: dict) -> list:
    return [[label(a), _fmt_scalar(v)] for a, v in sorted(f.items(), key=lambda kv: repr(kv[0]))]


def _fmt_num(x) -> str:
    return format_angle(x) if isinstance(x, Fraction) else f"{float(x):.12g}"


def cmd_convolve(ctx: Context) -> tuple[dict, bool]:
    G, omega = _groupoid(ctx)
    crep = omega.verify()
    if not crep.ok:
        raise CocycleInvalid(f"omega fails the cocycle identity at {crep.violations[0].witness}")
    fns = ctx.doc.get("functions", {})
    f = docmod.build_function(fns.get("f", []))
    g = docmod.build_function(fns.get("g", []))
    fg = convolve(f, g, omega)
    assoc = associativity_report(omega)
    out = {
        "f*g": _fmt_fn(fg),
        "f_star": _fmt_fn(involution(f, omega)),
        "i_norm": {"f": _fmt_num(i_norm(f, G)), "g": _fmt_num(i_norm(g, G)), "f*g": _fmt_num(i_norm(fg, G))},
        "associativity": {"ok": assoc.ok, "triples": assoc.info["triples"]},
    }
    return out, assoc.ok


def cmd_i_norm_scan(ctx: Context) -> tuple[dict, bool]:
    G, _ = _groupoid(ctx)
    spec = docmod._need(ctx.doc, "bundle", "document")
    grid = ctx.grid()
    F = docmod.build_bundle(spec, grid, G)
    res = i_norm_scan(F, G)
    return {"grid_points": len(F.grid), **res.to_dict()}, res.ok


def _af_system(ctx: Context) -> tuple[AFSystem, dict]:
    if ctx.window is not None:
        sp = ctx.skew()
        return AFSystem.of_skew(sp), {"window": {"lo": list(sp.lo), "hi": list(sp.hi)}}
    return AFSystem(ctx.need_graph()), {"bound": list(ctx.need_graph().bound)}


def cmd_bratteli(ctx: Context) -> tuple[dict | str, bool]:
    system, where = _af_system(ctx)
    bd = bratteli(system, ctx.levels())
    if ctx.args.format == "dot":
        return bd.to_dot(), True
    return {**where, **bd.to_dict()}, True


def cmd_k0(ctx: Context) -> tuple[dict, bool]:
    system, where = _af_system(ctx)
    H = ctx.levels()
    k0 = k0_truncated(bratteli(system, H))
    return {**where, "H": H, "label_count_top": system.level(system.diagonal(H)).label_count, **k0.to_dict()}, True


def cmd_homotopy_report(ctx: Context) -> tuple[dict, bool]:
    sp = ctx.skew()
    system = AFSystem.of_skew(sp)
    H = ctx.levels()
    hty = pullback_homotopy(docmod.build_homotopy(docmod._need(ctx.doc, "homotopy", "document"), sp.base), sp)
    grid = ctx.grid()
    rep = homotopy_invariance_report(system, H, hty, grid)
    out = {"window": {"lo": list(sp.lo), "hi": list(sp.hi)}, "mode": "exact" if ctx.exact else "float",
           "label_count_top": system.level(system.diagonal(H)).label_count,
           **rep.to_dict(psi=ctx.args.psi)}
    if ctx.doc.get("equivariance_probe"):
        w = non_equivariance_witness(sp, hty.at(grid[-1]), system)
        out["non_equivariance"] = w.to_dict() if w else None
    return out, rep.ok


COMMANDS: dict[str, Callable[[Context], tuple]] = {
    "validate": cmd_validate,
    "check-cocycle": cmd_check_cocycle,
    "cohomologous": cmd_cohomologous,
    "skew": cmd_skew,
    "solve-db": cmd_solve_db,
    "sigma-c": cmd_sigma_c,
    "convolve": cmd_convolve,
    "i-norm-scan": cmd_i_norm_scan,
    "bratteli": cmd_bratteli,
    "k0": cmd_k0,
    "homotopy-report": cmd_homotopy_report,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def render_text(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.extend(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _flat(v):
                lines.append(f"{pad}-")
                lines.extend(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(v)}")
    else:
        lines.append(f"{pad}{json.dumps(obj)}")
    return lines


def _flat(v) -> bool:
    if isinstance(v, dict):
        return False
    return all(not isinstance(x, (dict, list)) or (isinstance(x, list) and all(not isinstance(y, (dict, list)) for y in x)) for x in v)


def emit(command: str, payload, ok: bool, fmt: str, out) -> None:
    if isinstance(payload, str):
        out.write(payload)
        return
    report = {"command": command, "ok": ok, **payload}
    if fmt == "json":
        out.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    else:
        out.write("\n".join(render_text(report)) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kgtwist", description="Twisted k-graph workbench.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("document", help="JSON document path, or builtin:NAME for a bundled fixture")
    p.add_argument("--bound", help="enumeration bound m,n[,...]")
    p.add_argument("--depth", help="infinite-path depth m,n[,...]")
    p.add_argument("--window", help="skew window lo..hi per axis, e.g. 0..3,0..3")
    p.add_argument("--grid", type=int, help="number of grid points on [0,1]")
    p.add_argument("--levels", type=int, help="truncation level H")
    p.add_argument("--format", choices=("text", "json", "dot"), default="text")
    p.add_argument("--no-psi", dest="psi", action="store_false", help="omit per-t phase data from homotopy reports")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True, help="exact arithmetic (default)")
    mode.add_argument("--float", action="store_true", help="double-precision circle values")
    return p


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.format == "dot" and args.command != "bratteli":
        err.write("error: --format dot is only available for bratteli\n")
        return 2
    try:
        ctx = Context(docmod.load_document(args.document), args)
        payload, ok = COMMANDS[args.command](ctx)
    except INPUT_ERRORS as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    except REPORTED_ERRORS as exc:
        emit(args.command, {"error": {"kind": type(exc).__name__, "message": str(exc)}}, False, args.format, out)
        return 1
    except KGraphError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    emit(args.command, payload, ok, args.format, out)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
