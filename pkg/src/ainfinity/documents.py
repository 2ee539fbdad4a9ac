"""Versioned JSON document format for every structure the engine handles.

One line-diffable text format: JSON with sorted keys and a fixed version
string.  Scalars serialize as ``"num/den"`` (rationals), ``"k mod p"``
(prime fields) and bracketed coefficient lists for polynomial rings.
Parsing validates everything structurally: unknown fields are rejected
and degree-inconsistent operator entries are reported with their JSON
path.  ``parse(serialize(x)) == x`` on canonical documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .algebras import SATURATED, AInfAlgebra, AlgMorphism, ainf_algebra, alg_morphism
from .exceptions import DocumentError, EngineError
from .formality import FormalityCertificate, ObstructionReport
from .graded import (GradedMap, GradedSpace, MultiOp, Vector,
                     graded_map_from_blocks, graded_space, multiop)
from .hochschild import Filtration, HochschildCochain, filtration
from .modules import AInfModule, ModMorphism, ainf_module, mod_morphism
from .polycomplex import PolyComplex, poly_complex
from .rings import (RATIONALS, RingDescriptor, Scalar, fraction_field,
                    poly_ring, prime_field, scalar_from_str, scalar_str,
                    truncated_poly_ring)
from .transfer import Contraction

FORMAT_VERSION = "1.0.0"

KINDS = ("algebra", "module", "morphism", "pair", "contraction",
         "poly_complex", "filtration", "certificate", "report")


@dataclass(frozen=True)
class Document:
    kind: str
    payload: Any


# ---------------------------------------------------------------------------
# helpers

def _expect_keys(obj: Mapping, allowed, required, path: str) -> None:
    if not isinstance(obj, dict):
        raise DocumentError("expected an object", path)
    for k in obj:
        if k not in allowed:
            raise DocumentError(f"unknown field {k!r}", path)
    for k in required:
        if k not in obj:
            raise DocumentError(f"missing field {k!r}", path)


def ring_to_json(ring: RingDescriptor) -> Dict:
    if ring.kind == "rationals":
        return {"kind": "rationals"}
    if ring.kind == "prime_field":
        return {"kind": "prime_field", "p": ring.p}
    if ring.kind == "poly":
        return {"kind": "poly", "var": ring.var, "base": ring_to_json(ring.base)}
    if ring.kind == "truncated_poly":
        return {"kind": "truncated_poly", "var": ring.var, "order": ring.order,
                "base": ring_to_json(ring.base)}
    return {"kind": "fraction_field", "of": ring_to_json(ring.base)}


def ring_from_json(obj, path: str = "$.ring") -> RingDescriptor:
    _expect_keys(obj, {"kind", "p", "var", "order", "base", "of"}, {"kind"}, path)
    kind = obj["kind"]
    try:
        if kind == "rationals":
            return RATIONALS
        if kind == "prime_field":
            return prime_field(int(obj["p"]))
        if kind == "poly":
            return poly_ring(obj["var"], ring_from_json(obj["base"], path + ".base"))
        if kind == "truncated_poly":
            return truncated_poly_ring(obj["var"], int(obj["order"]),
                                       ring_from_json(obj["base"], path + ".base"))
        if kind == "fraction_field":
            return fraction_field(ring_from_json(obj["of"], path + ".of"))
    except (KeyError, EngineError, ValueError) as exc:
        raise DocumentError(f"bad ring: {exc}", path) from exc
    raise DocumentError(f"unknown ring kind {kind!r}", path)


def space_to_json(space: GradedSpace) -> Dict:
    return {str(d): list(ls) for d, ls in space.components}


def space_from_json(ring: RingDescriptor, obj, path: str) -> GradedSpace:
    if not isinstance(obj, dict):
        raise DocumentError("space must be an object of degree -> labels", path)
    comps = {}
    for k, v in obj.items():
        try:
            d = int(k)
        except ValueError:
            raise DocumentError(f"bad degree key {k!r}", path) from None
        if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
            raise DocumentError(f"labels at degree {k} must be strings", path)
        comps[d] = v
    try:
        return graded_space(ring, comps)
    except EngineError as exc:
        raise DocumentError(str(exc), path) from exc


def vector_to_json(v: Vector) -> Dict[str, str]:
    return {lab: scalar_str(c) for lab, c in sorted(v.items())}


def vector_from_json(ring: RingDescriptor, obj, path: str) -> Vector:
    if not isinstance(obj, dict):
        raise DocumentError("vector must be an object label -> scalar", path)
    out = {}
    for lab, s in obj.items():
        try:
            c = scalar_from_str(ring, s)
        except EngineError as exc:
            raise DocumentError(f"bad scalar {s!r}: {exc}", f"{path}.{lab}") from exc
        if not c.is_zero():
            out[lab] = c
    return out


def table_to_json(op: MultiOp) -> List[Dict]:
    entries = []
    for key in sorted(op.table, key=lambda k: tuple(
            sp.position_of(lab) for sp, lab in zip(op.slots, k))):
        entries.append({"args": list(key), "value": vector_to_json(op.table[key])})
    return entries


def op_from_json(slots, target, degree: int, entries, path: str) -> MultiOp:
    if not isinstance(entries, list):
        raise DocumentError("operator table must be a list of entries", path)
    ring = target.ring
    table = {}
    for i, e in enumerate(entries):
        epath = f"{path}[{i}]"
        _expect_keys(e, {"args", "value"}, {"args", "value"}, epath)
        args = e["args"]
        if not isinstance(args, list) or not all(isinstance(a, str) for a in args):
            raise DocumentError("args must be a list of labels", epath)
        table[tuple(args)] = vector_from_json(ring, e["value"], epath + ".value")
    try:
        return multiop(slots, target, degree, table)
    except EngineError as exc:
        raise DocumentError(str(exc), path) from exc


def graded_map_to_json(f: GradedMap) -> Dict:
    return {"degree": f.degree,
            "blocks": {str(d): [[scalar_str(x) for x in row] for row in mat]
                       for d, mat in f.blocks}}


def graded_map_from_json(source: GradedSpace, target: GradedSpace, obj,
                         path: str) -> GradedMap:
    _expect_keys(obj, {"degree", "blocks"}, {"degree", "blocks"}, path)
    ring = source.ring
    blocks = {}
    for k, mat in obj["blocks"].items():
        try:
            d = int(k)
        except ValueError:
            raise DocumentError(f"bad degree key {k!r}", path) from None
        blocks[d] = [[scalar_from_str(ring, x) for x in row] for row in mat]
    try:
        return graded_map_from_blocks(source, target, int(obj["degree"]), blocks)
    except EngineError as exc:
        raise DocumentError(str(exc), path) from exc


def _truncation_to_json(t):
    return t if isinstance(t, int) else SATURATED


def _truncation_from_json(obj, path):
    if obj == SATURATED:
        return SATURATED
    if isinstance(obj, int) and obj >= 1:
        return obj
    raise DocumentError(f"bad truncation {obj!r}", path)


# ---------------------------------------------------------------------------
# structures

def algebra_to_json(alg: AInfAlgebra) -> Dict:
    return {
        "ring": ring_to_json(alg.space.ring),
        "space": space_to_json(alg.space),
        "truncation": _truncation_to_json(alg.truncation),
        "minimal": alg.minimal,
        "unital": alg.unital,
        "unit": alg.unit,
        "ops": {str(k): table_to_json(op) for k, op in sorted(alg.ops.items())},
    }


def algebra_from_json(obj, path: str = "$") -> AInfAlgebra:
    _expect_keys(obj, {"ring", "space", "truncation", "minimal", "unital", "unit", "ops"},
                 {"ring", "space", "ops"}, path)
    ring = ring_from_json(obj["ring"], path + ".ring")
    space = space_from_json(ring, obj["space"], path + ".space")
    ops = {}
    for k, entries in obj.get("ops", {}).items():
        try:
            arity = int(k)
        except ValueError:
            raise DocumentError(f"bad arity key {k!r}", path + ".ops") from None
        ops[arity] = op_from_json((space,) * arity, space, 2 - arity, entries,
                                  f"{path}.ops.{k}")
    try:
        return ainf_algebra(space, ops,
                            truncation=_truncation_from_json(
                                obj.get("truncation", SATURATED), path + ".truncation"),
                            minimal=bool(obj.get("minimal", False)),
                            unital=bool(obj.get("unital", False)),
                            unit=obj.get("unit"))
    except EngineError as exc:
        raise DocumentError(str(exc), path) from exc


def module_to_json(mod: AInfModule) -> Dict:
    return {
        "algebra": algebra_to_json(mod.algebra),
        "space": space_to_json(mod.space),
        "truncation": _truncation_to_json(mod.truncation),
        "minimal": mod.minimal,
        "ops": {str(k): table_to_json(op) for k, op in sorted(mod.ops.items())},
    }


def module_from_json(obj, path: str = "$") -> AInfModule:
    _expect_keys(obj, {"algebra", "space", "truncation", "minimal", "ops"},
                 {"algebra", "space", "ops"}, path)
    alg = algebra_from_json(obj["algebra"], path + ".algebra")
    space = space_from_json(alg.space.ring, obj["space"], path + ".space")
    ops = {}
    for k, entries in obj.get("ops", {}).items():
        try:
            arity = int(k)
        except ValueError:
            raise DocumentError(f"bad arity key {k!r}", path + ".ops") from None
        ops[arity] = op_from_json((space,) + (alg.space,) * (arity - 1), space,
                                  2 - arity, entries, f"{path}.ops.{k}")
    try:
        return ainf_module(alg, space, ops,
                           truncation=_truncation_from_json(
                               obj.get("truncation", SATURATED), path + ".truncation"),
                           minimal=bool(obj.get("minimal", False)))
    except EngineError as exc:
        raise DocumentError(str(exc), path) from exc


def morphism_to_json(f) -> Dict:
    if isinstance(f, AlgMorphism):
        return {
            "morphism_kind": "algebra",
            "source": algebra_to_json(f.source),
            "target": algebra_to_json(f.target),
            "truncation": _truncation_to_json(f.truncation),
            "comps": {str(k): table_to_json(c) for k, c in sorted(f.comps.items())},
        }
    return {
        "morphism_kind": "module",
        "source": module_to_json(f.source),
        "target": module_to_json(f.target),
        "truncation": _truncation_to_json(f.truncation),
        "comps": {str(k): table_to_json(c) for k, c in sorted(f.comps.items())},
    }


def morphism_from_json(obj, path: str = "$"):
    _expect_keys(obj, {"morphism_kind", "source", "target", "truncation", "comps"},
                 {"morphism_kind", "source", "target", "comps"}, path)
    kind = obj["morphism_kind"]
    trunc = _truncation_from_json(obj.get("truncation", SATURATED), path + ".truncation")
    if kind == "algebra":
        src = algebra_from_json(obj["source"], path + ".source")
        tgt = algebra_from_json(obj["target"], path + ".target")
        comps = {}
        for k, entries in obj["comps"].items():
            arity = int(k)
            comps[arity] = op_from_json((src.space,) * arity, tgt.space, 1 - arity,
                                        entries, f"{path}.comps.{k}")
        return alg_morphism(src, tgt, comps, trunc)
    if kind == "module":
        src = module_from_json(obj["source"], path + ".source")
        tgt = module_from_json(obj["target"], path + ".target")
        comps = {}
        for k, entries in obj["comps"].items():
            arity = int(k)
            comps[arity] = op_from_json(
                (src.space,) + (src.algebra.space,) * (arity - 1), tgt.space,
                1 - arity, entries, f"{path}.comps.{k}")
        try:
            return mod_morphism(src, tgt, comps, trunc)
        except EngineError as exc:
            raise DocumentError(str(exc), path) from exc
    raise DocumentError(f"unknown morphism kind {kind!r}", path)


def pair_to_json(p) -> Dict:
    return {"algebra": algebra_to_json(p.algebra), "module": module_to_json(p.module)}


def pair_from_json(obj, path: str = "$"):
    from .modules import Pair
    _expect_keys(obj, {"algebra", "module"}, {"algebra", "module"}, path)
    alg = algebra_from_json(obj["algebra"], path + ".algebra")
    mod = module_from_json(obj["module"], path + ".module")
    try:
        return Pair(alg, mod)
    except EngineError as exc:
        raise DocumentError(str(exc), path) from exc


def contraction_to_json(c: Contraction) -> Dict:
    return {
        "ring": ring_to_json(c.big.ring),
        "space": space_to_json(c.big),
        "differential": graded_map_to_json(c.m1),
        "small": space_to_json(c.small),
        "incl": graded_map_to_json(c.incl),
        "proj": graded_map_to_json(c.proj),
        "htpy": graded_map_to_json(c.htpy),
    }


def contraction_from_json(obj, path: str = "$") -> Contraction:
    _expect_keys(obj, {"ring", "space", "differential", "small", "incl", "proj", "htpy"},
                 {"ring", "space", "differential", "small", "incl", "proj", "htpy"}, path)
    ring = ring_from_json(obj["ring"], path + ".ring")
    big = space_from_json(ring, obj["space"], path + ".space")
    small = space_from_json(ring, obj["small"], path + ".small")
    m1 = graded_map_from_json(big, big, obj["differential"], path + ".differential")
    incl = graded_map_from_json(small, big, obj["incl"], path + ".incl")
    proj = graded_map_from_json(big, small, obj["proj"], path + ".proj")
    htpy = graded_map_from_json(big, big, obj["htpy"], path + ".htpy")
    c = Contraction(big, small, m1, incl, proj, htpy)
    try:
        c.verify()
    except EngineError as exc:
        raise DocumentError(f"contraction identities fail: {exc}", path) from exc
    return c


def poly_complex_to_json(c: PolyComplex) -> Dict:
    return {
        "ring": ring_to_json(c.ring),
        "terms": {str(i): r for i, r in c.terms},
        "differentials": {str(i): [[scalar_str(x) for x in row] for row in mat]
                          for i, mat in c.diffs},
    }


def poly_complex_from_json(obj, path: str = "$") -> PolyComplex:
    _expect_keys(obj, {"ring", "terms", "differentials"}, {"ring", "terms"}, path)
    ring = ring_from_json(obj["ring"], path + ".ring")
    try:
        terms = {int(k): int(v) for k, v in obj["terms"].items()}
        diffs = {int(k): [[scalar_from_str(ring, x) for x in row] for row in mat]
                 for k, mat in obj.get("differentials", {}).items()}
    except ValueError as exc:
        raise DocumentError(f"bad key: {exc}", path) from exc
    try:
        return poly_complex(ring, terms, diffs)
    except EngineError as exc:
        raise DocumentError(str(exc), path) from exc


def filtration_to_json(f: Filtration) -> Dict:
    out = {
        "algebra": algebra_to_json(f.algebra),
        "levels": [{str(d): [vector_to_json(v) for v in vecs]
                    for d, vecs in lv.items()} for lv in f.levels],
    }
    if f.module is not None:
        out["module"] = module_to_json(f.module)
        out["module_levels"] = [{str(d): [vector_to_json(v) for v in vecs]
                                 for d, vecs in lv.items()} for lv in f.module_levels]
    return out


def filtration_from_json(obj, path: str = "$") -> Filtration:
    _expect_keys(obj, {"algebra", "levels", "module", "module_levels"},
                 {"algebra", "levels"}, path)
    alg = algebra_from_json(obj["algebra"], path + ".algebra")
    ring = alg.space.ring

    def levels_from(levels_obj, lpath):
        out = []
        for i, lv in enumerate(levels_obj):
            level = {}
            for k, vecs in lv.items():
                level[int(k)] = tuple(vector_from_json(ring, v, f"{lpath}[{i}].{k}")
                                      for v in vecs)
            out.append(level)
        return out

    mod = None
    mlv = None
    if "module" in obj:
        mod = module_from_json(obj["module"], path + ".module")
        mlv = levels_from(obj.get("module_levels", []), path + ".module_levels")
    try:
        return filtration(alg, levels_from(obj["levels"], path + ".levels"), mod, mlv)
    except EngineError as exc:
        raise DocumentError(str(exc), path) from exc


def certificate_to_json(cert: FormalityCertificate) -> Dict:
    out = {
        "verdict": cert.verdict,
        "algebra": algebra_to_json(cert.algebra),
        "module": module_to_json(cert.module),
        "pieces": {str(s): table_to_json(op) for s, op in cert.pieces},
        "stage": cert.stage,
        "reason": cert.reason,
        "witness_comps": None,
        "obstruction": None,
    }
    if cert.witness is not None:
        out["witness_comps"] = {str(k): table_to_json(c)
                                for k, c in sorted(cert.witness.comps.items())}
    if cert.obstruction is not None:
        rep = cert.obstruction
        out["obstruction"] = {
            "stage": rep.stage,
            "p": rep.cocycle.p,
            "q": rep.cocycle.q,
            "cocycle": table_to_json(rep.cocycle.body),
            "vanished": rep.vanished,
        }
    return out


def certificate_from_json(obj, path: str = "$") -> FormalityCertificate:
    from .formality import ObstructionReport
    from .hochschild import HochschildCochain
    from .modules import truncate_to_M2
    _expect_keys(obj, {"verdict", "algebra", "module", "pieces", "stage", "reason",
                       "witness_comps", "obstruction"},
                 {"verdict", "algebra", "module"}, path)
    alg = algebra_from_json(obj["algebra"], path + ".algebra")
    mod = module_from_json(obj["module"], path + ".module")
    pieces = []
    for k, entries in obj.get("pieces", {}).items():
        s = int(k)
        op = op_from_json((mod.space,) + (alg.space,) * (s - 1), mod.space, 1 - s,
                          entries, f"{path}.pieces.{k}")
        pieces.append((s, op))
    witness = None
    if obj.get("witness_comps"):
        comps = {}
        for k, entries in obj["witness_comps"].items():
            s = int(k)
            comps[s] = op_from_json((mod.space,) + (alg.space,) * (s - 1), mod.space,
                                    1 - s, entries, f"{path}.witness_comps.{k}")
        try:
            witness = mod_morphism(mod, truncate_to_M2(mod), comps)
        except EngineError as exc:
            raise DocumentError(str(exc), path + ".witness_comps") from exc
    obstruction = None
    if obj.get("obstruction"):
        o = obj["obstruction"]
        _expect_keys(o, {"stage", "p", "q", "cocycle", "vanished"},
                     {"stage", "p", "q", "cocycle"}, path + ".obstruction")
        p, q = int(o["p"]), int(o["q"])
        body = op_from_json((mod.space,) + (alg.space,) * p, mod.space, q,
                            o["cocycle"], path + ".obstruction.cocycle")
        flat = truncate_to_M2(mod)
        try:
            c = HochschildCochain(alg, flat, flat, body)
            obstruction = ObstructionReport(int(o["stage"]), c, False, None)
        except EngineError as exc:
            raise DocumentError(str(exc), path + ".obstruction") from exc
    return FormalityCertificate(obj["verdict"], alg, mod, witness=witness,
                                pieces=tuple(sorted(pieces)),
                                stage=obj.get("stage"), obstruction=obstruction,
                                reason=obj.get("reason", ""))


# ---------------------------------------------------------------------------
# top level

_TO_JSON = {
    "algebra": algebra_to_json,
    "module": module_to_json,
    "morphism": morphism_to_json,
    "pair": pair_to_json,
    "contraction": contraction_to_json,
    "poly_complex": poly_complex_to_json,
    "filtration": filtration_to_json,
    "certificate": certificate_to_json,
    "report": lambda payload: payload,
}

_FROM_JSON = {
    "algebra": algebra_from_json,
    "module": module_from_json,
    "morphism": morphism_from_json,
    "pair": pair_from_json,
    "contraction": contraction_from_json,
    "poly_complex": poly_complex_from_json,
    "filtration": filtration_from_json,
    "certificate": certificate_from_json,
    "report": lambda obj, path="$": obj,
}


def serialize(doc: Document) -> str:
    if doc.kind not in KINDS:
        raise DocumentError(f"unknown document kind {doc.kind!r}")
    body = {
        "format_version": FORMAT_VERSION,
        "kind": doc.kind,
        "payload": _TO_JSON[doc.kind](doc.payload),
    }
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def parse(text: str) -> Document:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: "
                            f"{exc.msg}") from exc
    _expect_keys(obj, {"format_version", "kind", "payload"},
                 {"format_version", "kind", "payload"}, "$")
    version = obj["format_version"]
    if version.split(".")[0] != FORMAT_VERSION.split(".")[0]:
        raise DocumentError(f"unsupported format version {version!r}", "$.format_version")
    kind = obj["kind"]
    if kind not in KINDS:
        raise DocumentError(f"unknown document kind {kind!r}", "$.kind")
    payload = _FROM_JSON[kind](obj["payload"], "$.payload")
    return Document(kind, payload)
