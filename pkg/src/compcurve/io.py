"""Structured-text (JSON) serialization and SVG export.

Every number in a document is a rational string "p/q"; nothing is ever read
back from SVG, which only carries decimal approximations for display.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any

from . import __version__
from .exact import ContractError, Q, fmt_rational, pow2
from .geometry import CompactCover, PathFunction, Point, Polygon, SquareBox

FORMAT = "compcurve/1"
_PAIR = re.compile(r'\[\s+("[^"]*"),\s+("[^"]*")\s+\]')


# ---------------------------------------------------------------- scalars

def rat(q) -> str:
    return fmt_rational(Q(q))


def _pt(p: Point) -> list:
    return [rat(p.x), rat(p.y)]


def _unpt(v) -> Point:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ContractError(f"point must be a pair of rational strings, got {v!r}")
    return Point(Q(_unrat(v[0])), Q(_unrat(v[1])))


def _unrat(v) -> Fraction:
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise ContractError(f"expected a rational string, got {v!r}")
    try:
        return Q(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise ContractError(f"bad rational {v!r}: {exc}") from None


# ---------------------------------------------------------------- geometry

def to_doc(obj) -> Any:
    """Plain-JSON form of a geometry object (recursing through scripts)."""
    if isinstance(obj, Polygon):
        return {"type": "polygon", "vertices": [_pt(p) for p in obj]}
    if isinstance(obj, PathFunction):
        return {"type": "path", "knots": [rat(k) for k in obj.knots],
                "values": [_pt(p) for p in obj.values]}
    if isinstance(obj, SquareBox):
        return {"center": _pt(obj.center), "radius": rat(obj.radius)}
    if isinstance(obj, CompactCover):
        return {"type": "cover", "boxes": [to_doc(b) for b in obj]}
    if isinstance(obj, Point):
        return _pt(obj)
    if isinstance(obj, Fraction):
        return rat(obj)
    if isinstance(obj, dict):
        return {k: to_doc(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_doc(v) for v in obj]
    if obj is None or isinstance(obj, (str, int, bool)):
        return obj
    raise ContractError(f"cannot serialize {type(obj).__name__}")


def from_doc(doc):
    """Inverse of :func:`to_doc` for polygons, paths and covers."""
    if not isinstance(doc, dict) or "type" not in doc:
        raise ContractError("document has no 'type' field")
    kind = doc["type"]
    if kind == "polygon":
        return Polygon([_unpt(v) for v in doc["vertices"]])
    if kind == "path":
        return PathFunction([_unrat(k) for k in doc["knots"]], [_unpt(v) for v in doc["values"]])
    if kind == "cover":
        return CompactCover([SquareBox(_unpt(b["center"]), _unrat(b["radius"])) for b in doc["boxes"]])
    raise ContractError(f"unknown document type {kind!r}")


def dumps(obj) -> str:
    doc = to_doc(obj)
    if isinstance(doc, dict) and "type" in doc:
        doc = {"format": FORMAT, **doc}
    text = json.dumps(doc, indent=1)
    # one point per line
    return _PAIR.sub(r"[\1, \2]", text) + "\n"


def loads(text: str):
    """Decoded geometry object, or the plain document for scripts and scenarios."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ContractError(f"not a JSON document: {exc}") from None
    if isinstance(doc, dict):
        fmt = doc.get("format", FORMAT)
        if fmt != FORMAT:
            raise ContractError(f"unsupported format {fmt!r}")
        if doc.get("type") in ("polygon", "path", "cover"):
            return from_doc(doc)
    return doc


def save(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def load(path: str):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def load_curve(path: str):
    obj = load(path)
    if not isinstance(obj, (Polygon, PathFunction)):
        raise ContractError(f"{path} does not hold a polygon or path")
    return obj


# ---------------------------------------------------------------- names

def length_from_script(script):
    """LeftCEReal from {"table": [...]} or {"builtin": "approach", "limit", "shift"}."""
    from .names import LeftCEReal

    if not isinstance(script, dict):
        raise ContractError("length script must be an object")
    if "table" in script:
        table = [_unrat(v) for v in script["table"]]
        if not table:
            raise ContractError("empty length table")
        return LeftCEReal(lambda n: table[min(n, len(table) - 1)], label="table", script=script)
    if script.get("builtin") == "approach":
        limit, shift = _unrat(script["limit"]), int(script.get("shift", 0))
        return LeftCEReal(lambda n: limit - pow2(-(n + shift)),
                          label=f"{rat(limit)}-2^-(n+{shift})", script=script)
    raise ContractError(f"unknown length script {script!r}")


def name_from_script(script):
    """Rebuild a name from its persisted script."""
    from . import constructors, names

    if not isinstance(script, dict):
        raise ContractError("name script must be an object")
    if "table" in script:
        rule = script.get("extrapolate", "repeat_last")
        if rule != "repeat_last":
            raise ContractError(f"unknown extrapolation rule {rule!r}")
        table = [t if isinstance(t, (Polygon, PathFunction)) else from_doc(t) for t in script["table"]]
        if not table:
            raise ContractError("empty stage table")
        if all(isinstance(t, Polygon) for t in table):
            return names.KName.from_table(table)
        flavor = script.get("flavor", "R")
        return names.ParamName(flavor, lambda n: table[min(n, len(table) - 1)],
                               label="table", script=script)
    if "builtin" in script:
        b = script["builtin"]
        if b == "koch":
            return names.KName(constructors.koch, label="koch", script=script)
        if b == "koch_param":
            return names.ParamName("N", constructors.koch_param, label="koch_param", script=script)
        if b == "fixed":
            return names.KName.fixed(from_doc(script["polygon"]))
        if b == "n_curve":
            return constructors.n_curve(length_from_script(script["length"]))
        raise ContractError(f"unknown built-in name {b!r}")
    if "widen" in script:
        return names.widen(name_from_script(script["source"]), script["widen"])
    if "cover_of" in script:
        return names.kname_to_cover(name_from_script(script["cover_of"]))
    if "skeleton_of" in script:
        return names.cover_to_kname(name_from_script(script["skeleton_of"]))
    raise ContractError(f"unrecognized name script {sorted(script)}")


def load_name(path: str):
    return name_from_script(load(path))


# ---------------------------------------------------------------- scenarios

def scenario_from_doc(doc):
    """(kind, roster, stages, budget) from a scenario document."""
    from . import diagonal

    try:
        kind = doc["kind"]
        stages = int(doc["stages"])
        budget = int(doc["budget"])
        entries = doc["roster"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractError(f"bad scenario: {exc}") from None
    roster = []
    for entry in entries:
        entry = dict(entry)
        name = entry.pop("template", None)
        if name not in diagonal.TEMPLATES:
            raise ContractError(f"unknown opponent template {name!r}")
        kw = {}
        for k, v in entry.items():
            if k in ("a", "b"):
                kw[k] = _unpt(v)
            elif k in ("cost",):
                kw[k] = int(v)
            elif k == "claim":
                kw[k] = str(v)
            else:
                kw[k] = _unrat(v)
        try:
            roster.append(diagonal.TEMPLATES[name](**kw))
        except TypeError as exc:
            raise ContractError(f"template {name}: {exc}") from None
    return kind, roster, stages, budget


def result_doc(res) -> dict:
    w = res.witness
    return {
        "format": FORMAT,
        "kind": res.kind,
        "name": {"table": [to_doc(p if res.kind == "K_vs_R" else c)
                           for p, c in zip(res.polygons, res.curves)],
                 "extrapolate": "repeat_last",
                 **({} if res.kind == "K_vs_R" else {"flavor": "R" if res.kind == "R_vs_M" else "M"})},
        "witness": {
            "z": _pt(w.z),
            "boxes": [{"stage": s, "requirement": e, **to_doc(b)} for s, e, b in w.history],
            "margins": {str(e): (None if m is None else rat(m)) for e, m in w.margins.items()},
        },
        "log": res.log_lines(),
    }


# ---------------------------------------------------------------- SVG

def _dec(q: Fraction, digits: int) -> str:
    """Decimal text of q rounded to ``digits`` places (integer arithmetic only)."""
    scale = 10 ** digits
    v = (q * scale).numerator * 2 + (q * scale).denominator
    v //= 2 * (q * scale).denominator
    sign = "-" if v < 0 else ""
    v = abs(v)
    return f"{sign}{v // scale}.{v % scale:0{digits}d}"


def to_svg(objs, size: int = 512, digits: int = 4, margin=Fraction(1, 20)) -> str:
    """SVG 1.1 drawing of polygons, paths and covers (presentation only)."""
    objs = list(objs)
    pts = []
    for o in objs:
        if isinstance(o, Polygon):
            pts.extend(o)
        elif isinstance(o, PathFunction):
            pts.extend(o.values)
        elif isinstance(o, CompactCover):
            for b in o:
                pts.extend(b.corners())
        else:
            raise ContractError(f"cannot draw {type(o).__name__}")
    if not pts:
        raise ContractError("nothing to draw")
    x0, x1 = min(p.x for p in pts), max(p.x for p in pts)
    y0, y1 = min(p.y for p in pts), max(p.y for p in pts)
    span = max(x1 - x0, y1 - y0) or Fraction(1)
    x0, y1 = x0 - span * margin, y1 + span * margin
    scale = Fraction(size) / (span * (1 + 2 * margin))

    def xy(p):
        return _dec((p.x - x0) * scale, digits), _dec((y1 - p.y) * scale, digits)

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<!-- compcurve {__version__} -->',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
           f'data-precision="{digits}" data-scale="{rat(scale)}">']
    for o in objs:
        if isinstance(o, CompactCover):
            for b in o:
                x, y = xy(Point(b.center.x - b.radius, b.center.y + b.radius))
                w = _dec(2 * b.radius * scale, digits)
                out.append(f'<rect x="{x}" y="{y}" width="{w}" height="{w}" fill="none" stroke="#999"/>')
            continue
        chain = o.values if isinstance(o, PathFunction) else o.vertices
        coords = " ".join(",".join(xy(p)) for p in chain)
        out.append(f'<polyline points="{coords}" fill="none" stroke="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
