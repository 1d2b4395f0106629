"""JSON instance files.

One self-describing document holds the field, the algebra (preset name or
explicit structure constants), named modules, connections and
hom-connections.  Scalars are integers or ``"p/q"`` strings, never floats.
The layout is documented in ``schema/instance.schema.json``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .algebra import PRESETS, Algebra, ModuleRep, make_algebra, preset, preset_modules
from .errors import NcflatError
from .exactlin import GF, QQ, FieldSpec, Mat, is_prime

FORMAT = "ncflat-instance/1"


class InstanceError(NcflatError):
    """Malformed instance; ``path`` names the offending JSON location."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class MissingObject(InstanceError):
    pass


@dataclass
class Instance:
    field: FieldSpec
    algebra: Algebra
    algebra_source: dict
    modules: dict[str, ModuleRep] = field(default_factory=dict)
    module_sources: dict[str, dict] = field(default_factory=dict)
    connections: dict[str, tuple[str, Mat]] = field(default_factory=dict)
    hom_connections: dict[str, tuple[str, Mat]] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)

    def module(self, name: str, where: str = "modules") -> ModuleRep:
        if name not in self.modules:
            raise MissingObject(where, f"no module named {name!r}")
        return self.modules[name]


# -- scalars and matrices ---------------------------------------------------------------

def mat_json(m: Mat) -> list[list]:
    return [[m.field.format_scalar(x) for x in row] for row in m.to_lists()]


def mat_from_json(F: FieldSpec, rows, path: str, shape: tuple[int, int] | None = None) -> Mat:
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise InstanceError(path, "expected a list of rows")
    try:
        cols = shape[1] if shape is not None and not rows else None
        m = Mat.from_rows(F, rows, cols)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InstanceError(path, str(exc)) from exc
    if shape is not None and m.shape != shape:
        raise InstanceError(path, f"expected shape {list(shape)}, got {list(m.shape)}")
    return m


def field_json(F: FieldSpec) -> dict:
    return {"kind": "rationals"} if F.is_rational else {"kind": "prime", "p": F.p}


def field_from_json(doc, path: str = "field") -> FieldSpec:
    if doc is None:
        return QQ
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InstanceError(path, 'expected {"kind": "rationals"} or {"kind": "prime", "p": P}')
    try:
        if doc["kind"] == "rationals":
            return QQ
        if doc["kind"] == "prime":
            p = doc["p"]
            if not isinstance(p, int) or not is_prime(p):
                raise InstanceError(f"{path}.p", f"{p!r} is not a prime")
            return GF(p)
    except (KeyError, ValueError, TypeError) as exc:
        raise InstanceError(path, str(exc)) from exc
    raise InstanceError(path, f"unknown field kind {doc['kind']!r}")


# -- algebra and modules --------------------------------------------------------------------

def algebra_json(A: Algebra, explicit: bool = False) -> dict:
    if not explicit and A.name in PRESETS:
        return {"preset": A.name}
    F = A.field
    return {
        "name": A.name,
        "names": list(A.names),
        "struct_consts": [[[F.format_scalar(x) for x in row] for row in plane] for plane in A.struct_consts],
        "unit": [F.format_scalar(x) for x in A.unit.flat_list()],
    }


def algebra_from_json(F: FieldSpec, doc, path: str = "algebra") -> Algebra:
    if not isinstance(doc, dict):
        raise InstanceError(path, "expected an object")
    if "preset" in doc:
        return preset(doc["preset"], F)
    for key in ("struct_consts", "unit"):
        if key not in doc:
            raise InstanceError(path, f"missing {key!r}")
    sc = doc["struct_consts"]
    n = len(sc)
    if not isinstance(sc, list) or any(not isinstance(p, list) or len(p) != n for p in sc):
        raise InstanceError(f"{path}.struct_consts", "expected an n x n x n array")
    try:
        return make_algebra(F, sc, doc["unit"], doc.get("names"), name=doc.get("name", "custom"))
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InstanceError(path, str(exc)) from exc


def module_json(M: ModuleRep) -> dict:
    out = {"dim": M.dim}
    if M.left is not None:
        out["left"] = [mat_json(L) for L in M.left]
    if M.right is not None:
        out["right"] = [mat_json(R) for R in M.right]
    return out


def module_from_json(A: Algebra, name: str, doc, path: str) -> ModuleRep:
    if not isinstance(doc, dict):
        raise InstanceError(path, "expected an object")
    if "preset" in doc:
        mods = preset_modules(A)
        if doc["preset"] not in mods:
            raise InstanceError(path, f"unknown preset module {doc['preset']!r}; known: {', '.join(sorted(mods))}")
        M = mods[doc["preset"]]
        return ModuleRep(A, M.dim, M.left, M.right, name)
    if "dim" not in doc:
        raise InstanceError(path, "missing 'dim'")
    m = int(doc["dim"])
    acts = {}
    for side in ("left", "right"):
        if doc.get(side) is None:
            acts[side] = None
            continue
        mats = doc[side]
        if not isinstance(mats, list) or len(mats) != A.dim:
            raise InstanceError(f"{path}.{side}", f"expected {A.dim} matrices")
        acts[side] = tuple(mat_from_json(A.field, x, f"{path}.{side}[{i}]", (m, m)) for i, x in enumerate(mats))
    return ModuleRep(A, m, acts["left"], acts["right"], name)


# -- whole instances --------------------------------------------------------------------------

def load_document(path: str | Path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc


def load_instance(source: str | Path | dict) -> Instance:
    doc = source if isinstance(source, dict) else load_document(source)
    return instance_from_json(doc)


def instance_from_json(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError("$", "expected a JSON object")
    fmt = doc.get("format", FORMAT)
    if fmt != FORMAT:
        raise InstanceError("format", f"unsupported format {fmt!r}")
    F = field_from_json(doc.get("field"))
    if "algebra" not in doc:
        raise InstanceError("algebra", "missing")
    A = algebra_from_json(F, doc["algebra"])
    inst = Instance(F, A, doc["algebra"], options=dict(doc.get("options", {})))
    for name, mdoc in sorted(doc.get("modules", {}).items()):
        inst.modules[name] = module_from_json(A, name, mdoc, f"modules.{name}")
        inst.module_sources[name] = mdoc
    for key, target in (("connections", inst.connections), ("hom_connections", inst.hom_connections)):
        for name, cdoc in sorted(doc.get(key, {}).items()):
            path = f"{key}.{name}"
            if not isinstance(cdoc, dict) or "module" not in cdoc or "matrix" not in cdoc:
                raise InstanceError(path, "expected {module, matrix}")
            mod = inst.module(cdoc["module"], f"{path}.module")
            rows = cdoc["matrix"]
            if key == "connections":
                shape = (A.dim * mod.dim, mod.dim)
            else:
                shape = None  # checked against H^1 when the hom-space is built
            target[name] = (cdoc["module"], mat_from_json(F, rows, f"{path}.matrix", shape))
    return inst


def instance_json(inst: Instance) -> dict:
    doc = {
        "format": FORMAT,
        "field": field_json(inst.field),
        "algebra": inst.algebra_source,
    }
    if inst.options:
        doc["options"] = inst.options
    if inst.modules:
        doc["modules"] = {k: inst.module_sources.get(k) or module_json(M) for k, M in inst.modules.items()}
    if inst.connections:
        doc["connections"] = {k: {"module": m, "matrix": mat_json(x)} for k, (m, x) in inst.connections.items()}
    if inst.hom_connections:
        doc["hom_connections"] = {k: {"module": m, "matrix": mat_json(x)} for k, (m, x) in inst.hom_connections.items()}
    return doc


def dumps(doc: dict) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def digest(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def build_document(
    A: Algebra,
    modules: dict[str, ModuleRep],
    connections: dict[str, tuple[str, Mat]] | None = None,
    hom_connections: dict[str, tuple[str, Mat]] | None = None,
    options: dict | None = None,
) -> dict:
    """Instance document with every module written out explicitly."""
    doc = {"format": FORMAT, "field": field_json(A.field), "algebra": algebra_json(A)}
    if options:
        doc["options"] = dict(options)
    doc["modules"] = {k: module_json(M) for k, M in modules.items()}
    if connections:
        doc["connections"] = {k: {"module": m, "matrix": mat_json(x)} for k, (m, x) in connections.items()}
    if hom_connections:
        doc["hom_connections"] = {k: {"module": m, "matrix": mat_json(x)} for k, (m, x) in hom_connections.items()}
    return doc
