"""JSON formats: system files, deformation specs and verification reports.

System file::

    {"version": "polydendrite-system/1",
     "name": "vicsek",
     "polygon": [[x, y], ...],
     "maps": [{"fixed": [x, y], "ratio": q, "rotation": a}
              | {"src": [[x, y], [x, y]], "dst": [[x, y], [x, y]]}, ...]}

Floats are written with ``repr`` (shortest round-trip form), so parsing and
writing again reproduces the same bytes and the same in-memory values.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import PolyDendriteError
from .geometry import Polygon, Similarity, as_point, similarity_from_two_points
from .system import PolygonalSystem

SYSTEM_VERSION = "polydendrite-system/1"
REPORT_VERSION = "polydendrite-report/1"


class InputError(PolyDendriteError):
    """Malformed input file."""


def _pt(p) -> complex:
    if not (isinstance(p, (list, tuple)) and len(p) == 2):
        raise InputError(f"expected a point [x, y], got {p!r}")
    return as_point(p)


def parse_map(d: dict) -> Similarity:
    if "src" in d:
        s1, s2 = (_pt(p) for p in d["src"])
        d1, d2 = (_pt(p) for p in d["dst"])
        return similarity_from_two_points(s1, s2, d1, d2)
    try:
        return Similarity(float(d["ratio"]), float(d["rotation"]), _pt(d["fixed"]))
    except KeyError as exc:
        raise InputError(f"map entry lacks {exc}") from None


def system_from_json(data: dict) -> PolygonalSystem:
    if data.get("version", SYSTEM_VERSION) != SYSTEM_VERSION:
        raise InputError(f"unsupported system version {data.get('version')!r}")
    try:
        poly = Polygon(tuple(_pt(p) for p in data["polygon"]))
        maps = tuple(parse_map(m) for m in data["maps"])
    except KeyError as exc:
        raise InputError(f"system file lacks {exc}") from None
    return PolygonalSystem(poly, maps)


def system_to_json(system: PolygonalSystem, name: Optional[str] = None) -> dict:
    out: dict = {"version": SYSTEM_VERSION}
    if name:
        out["name"] = name
    out["polygon"] = [[z.real, z.imag] for z in system.base.vertices]
    out["maps"] = [{"fixed": [s.fixed.real, s.fixed.imag], "ratio": s.ratio,
                    "rotation": s.rotation} for s in system.maps]
    return out


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def load_system(path) -> PolygonalSystem:
    return system_from_json(load_json(path))


def save_system(system: PolygonalSystem, path, name: Optional[str] = None) -> None:
    Path(path).write_text(dumps(system_to_json(system, name)))


def load_spec(path):
    from .deformation import DeformationSpec
    data = load_json(path)
    if "displacements" not in data:
        raise InputError(f"{path} is not a deformation spec")
    return DeformationSpec.from_json(data)


def jsonable(x: Any) -> Any:
    """Plain JSON types: complex -> [x, y], non-finite floats -> strings."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(x.real), jsonable(x.imag)]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if hasattr(x, "to_json"):
        return jsonable(x.to_json())
    return x


# ---------------------------------------------------------------------------
# Report pieces
# ---------------------------------------------------------------------------

def validation_json(report) -> dict:
    return {"classification": report.classification,
            "D1": report.d1.to_json(), "D2": report.d2.to_json(),
            "D3": report.d3.to_json(), "D4": report.d4.to_json()}


def cyclic_json(system, cvs) -> list:
    from .cyclic import vertex_parameter
    return [{"vertex": c.vertex, "point": c.point, "witness": list(c.witness),
             "order": c.order, "ratio": c.ratio, "rotation": c.rotation,
             "lambda": vertex_parameter(system, c)} for c in cvs]


def matching_json(rep) -> dict:
    return {"verdict": rep.kind, "spread": rep.spread, "tol_lambda": rep.tol_lambda,
            "vertices": [{"point": e.point, "spread": e.spread, "error": e.error,
                          "matched": e.matched,
                          "routes": [{"route": list(w), "cyclic": a, "lambda": lam}
                                     for w, a, lam in e.routes]}
                         for e in rep.entries]}


def verdict_json(v) -> dict:
    out = {"pair": list(v.pair), "verdict": v.kind}
    if v.kind == "CertifiedEqual":
        out["margin"] = v.margin
    elif v.kind == "CertifiedViolation":
        out["witness"] = v.witness
    else:
        out["gap"] = v.gap
    return out


def dendrite_json(d) -> dict:
    out = {"verdict": d.kind}
    if d.kind == "CertifiedDendrite":
        out["depth"] = d.depth
    elif d.kind == "RefutedTree":
        out["level"] = d.level
        out["cycle"] = [list(w) for w in d.witness]
    else:
        out["level"] = d.level
        out["reason"] = d.reason
    out["levels"] = [{"level": g.level, "pieces": len(g.labels),
                      "contact_points": len(g.contacts.points), "tree": g.is_tree}
                     for g in d.graphs]
    verdicts = getattr(d, "verdicts", None) or []
    out["intersections"] = [verdict_json(v) for v in verdicts]
    return out


@dataclass
class VerificationReport:
    command: str
    input: str
    body: dict
    timing: Optional[dict] = None

    def to_json(self) -> dict:
        out = {"schema": REPORT_VERSION, "command": self.command, "input": self.input}
        out.update(self.body)
        if self.timing is not None:
            out["timing"] = self.timing
        return out


def strip_timing(text: str) -> str:
    """The report text without its ``timing`` field, for comparisons."""
    data = json.loads(text)
    data.pop("timing", None)
    return json.dumps(data, indent=2)
