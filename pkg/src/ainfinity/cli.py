"""Batch front end.

Every command reads a document, runs one engine operation and emits a
machine-readable report document.  Exit codes: 0 = pass/success, 1 = the
mathematics says no (with a report), 2 = broken input or usage.  Output
bytes are deterministic for identical inputs.
"""

from __future__ import annotations

import argparse
import random
import sys
from typing import Optional

from .algebras import AInfAlgebra, AlgMorphism, check_alg_morphism, check_alg_relations
from .bar import bar_check, module_bar_check
from .documents import Document, parse, serialize
from .exceptions import DocumentError, EngineError
from .formality import (FormalityCertificate, TrivializationResult,
                        normal_cone_deform, normal_cone_fibre,
                        prove_module_formality, verify_certificate)
from .modules import AInfModule, ModMorphism, check_mod_morphism, check_mod_relations
from .rings import (RATIONALS, RingDescriptor, prime_field, poly_ring,
                    scalar_from_str, scalar_str, truncated_poly_ring,
                    fraction_field)


def _read_document(path: str) -> Document:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse(fh.read())
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc


def _emit(doc: Document, output: Optional[str]) -> None:
    text = serialize(doc)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(command: str, status: str, detail: dict) -> Document:
    return Document("report", {"command": command, "status": status, "detail": detail})


def parse_ring_descriptor(text: str) -> RingDescriptor:
    """Parse ``Q``, ``F5``, ``Q[h]``, ``F5[t]``, ``Q[h]/h^4`` and ``Q(h)``."""
    text = text.strip()
    if "/" in text:
        head, tail = text.split("/", 1)
        base = parse_ring_descriptor(head)
        if base.kind != "poly":
            raise DocumentError(f"bad truncated ring {text!r}")
        var, _, power = tail.partition("^")
        if var.strip() != base.var:
            raise DocumentError(f"bad truncated ring {text!r}")
        return truncated_poly_ring(base.var, int(power), base.base)
    if text.endswith("]") and "[" in text:
        head, var = text[:-1].split("[", 1)
        return poly_ring(var.strip(), parse_ring_descriptor(head))
    if text.endswith(")") and "(" in text:
        head, var = text[:-1].split("(", 1)
        return fraction_field(poly_ring(var.strip(), parse_ring_descriptor(head)))
    if text in ("Q", "QQ"):
        return RATIONALS
    if text.startswith("F"):
        return prime_field(int(text[1:]))
    raise DocumentError(f"cannot parse ring descriptor {text!r}")


def _failure_detail(failure) -> dict:
    return {"level": failure.level, "args": list(failure.args),
            "residual": {lab: scalar_str(c) for lab, c in sorted(failure.residual.items())}}


def _expect_kind(doc: Document, *kinds: str) -> None:
    if doc.kind not in kinds:
        raise DocumentError(f"expected a {' or '.join(kinds)} document, got {doc.kind!r}")


# ---------------------------------------------------------------------------
# command handlers: return (exit_code, report_or_output_document)

def cmd_check_algebra(args) -> int:
    doc = _read_document(args.input)
    _expect_kind(doc, "algebra")
    failure = check_alg_relations(doc.payload, up_to=args.up_to)
    if failure is None:
        _emit(_report("check-algebra", "pass", {}), args.output)
        return 0
    _emit(_report("check-algebra", "fail", _failure_detail(failure)), args.output)
    return 1


def cmd_check_module(args) -> int:
    doc = _read_document(args.input)
    _expect_kind(doc, "module")
    failure = check_mod_relations(doc.payload, up_to=args.up_to)
    if failure is None:
        _emit(_report("check-module", "pass", {}), args.output)
        return 0
    _emit(_report("check-module", "fail", _failure_detail(failure)), args.output)
    return 1


def cmd_check_morphism(args) -> int:
    doc = _read_document(args.input)
    _expect_kind(doc, "morphism")
    f = doc.payload
    if isinstance(f, AlgMorphism):
        failure = check_alg_morphism(f, up_to=args.up_to)
    else:
        failure = check_mod_morphism(f, up_to=args.up_to)
    if failure is None:
        _emit(_report("check-morphism", "pass", {}), args.output)
        return 0
    _emit(_report("check-morphism", "fail", _failure_detail(failure)), args.output)
    return 1


def cmd_bar_check(args) -> int:
    doc = _read_document(args.input)
    _expect_kind(doc, "algebra", "module")
    if doc.kind == "algebra":
        ok = bar_check(doc.payload)
    else:
        mod = doc.payload
        if check_alg_relations(mod.algebra) is not None:
            raise DocumentError("module's base algebra is itself invalid")
        ok = module_bar_check(mod)
    _emit(_report("bar-check", "pass" if ok else "fail", {}), args.output)
    return 0 if ok else 1


def cmd_transfer(args) -> int:
    from .transfer import transfer_algebra, transfer_pair
    from .modules import algebra_as_module
    doc = _read_document(args.input)
    _expect_kind(doc, "algebra", "module")
    if doc.kind == "algebra":
        _, f = transfer_algebra(doc.payload, up_to=args.up_to)
        _emit(Document("morphism", f), args.output)
        return 0
    mod = doc.payload
    _, _, pm = transfer_pair(mod.algebra, mod, up_to=args.up_to, mod_up_to=args.up_to)
    _emit(Document("morphism", pm.mod_morphism), args.output)
    return 0


def cmd_cohomology(args) -> int:
    from .algebras import cohomology
    doc = _read_document(args.input)
    _expect_kind(doc, "algebra")
    h = cohomology(doc.payload)
    detail = {"dimensions": {str(d): h.space.dim(d) for d in h.space.degrees()},
              "labels": {str(d): list(h.space.labels(d)) for d in h.space.degrees()}}
    if args.output:
        _emit(Document("contraction", h.contraction), args.output)
        sys.stdout.write(serialize(_report("cohomology", "pass", detail)))
    else:
        _emit(_report("cohomology", "pass", detail), None)
    return 0


def cmd_hochschild(args) -> int:
    from .hochschild import hh_group
    from .modules import truncate_to_M2
    doc = _read_document(args.input)
    _expect_kind(doc, "module")
    mod = doc.payload
    flat = truncate_to_M2(mod) if any(k > 2 for k in mod.ops) else mod
    group = hh_group(mod.algebra, flat, flat, args.p, args.q)
    detail = {"p": args.p, "q": args.q, "dimension": group.dimension}
    _emit(_report("hochschild", "pass", detail), args.output)
    return 0


def cmd_obstruct(args) -> int:
    from .formality import an_formality_check, first_module_obstruction
    doc = _read_document(args.input)
    _expect_kind(doc, "module")
    mod = doc.payload
    if args.stage <= 2:
        report = first_module_obstruction(mod.algebra, mod)
        detail = {"stage": 2, "vanished": report.vanished,
                  "p": report.cocycle.p, "q": report.cocycle.q}
        status = "pass" if report.vanished else "fail"
        _emit(_report("obstruct", status, detail), args.output)
        return 0 if report.vanished else 1
    failing = an_formality_check(mod.algebra, mod, args.stage + 1)
    if failing is None:
        _emit(_report("obstruct", "pass", {"up_to_stage": args.stage}), args.output)
        return 0
    _emit(_report("obstruct", "fail", {"stage": failing}), args.output)
    return 1


def cmd_prove_formality(args) -> int:
    doc = _read_document(args.input)
    if args.verify_only:
        _expect_kind(doc, "certificate")
        problem = verify_certificate(doc.payload)
        status = "pass" if problem is None else "fail"
        _emit(_report("verify-certificate", status,
                      {} if problem is None else {"problem": problem}), args.output)
        return 0 if problem is None else 1
    _expect_kind(doc, "module")
    mod = doc.payload
    cert = prove_module_formality(mod.algebra, mod, max_stage=args.up_to)
    _emit(Document("certificate", cert), args.output)
    return 0 if cert.verdict == "formal" else 1


def cmd_verify_certificate(args) -> int:
    doc = _read_document(args.input)
    _expect_kind(doc, "certificate")
    problem = verify_certificate(doc.payload)
    status = "pass" if problem is None else "fail"
    detail = {} if problem is None else {"problem": problem}
    if args.output:
        _emit(_report("verify-certificate", status, detail), args.output)
    else:
        sys.stdout.write(serialize(_report("verify-certificate", status, detail)))
    return 0 if problem is None else 1


def cmd_normal_cone(args) -> int:
    doc = _read_document(args.input)
    _expect_kind(doc, "module")
    _emit(Document("module", normal_cone_deform(doc.payload)), args.output)
    return 0


def cmd_fibre(args) -> int:
    doc = _read_document(args.input)
    _expect_kind(doc, "module")
    mod = doc.payload
    ring = mod.algebra.space.ring
    if ring.kind != "poly":
        raise DocumentError("fibre needs a module over a polynomial ring")
    point = scalar_from_str(ring.base, args.at)
    _emit(Document("module", normal_cone_fibre(mod, point)), args.output)
    return 0


def cmd_rees(args) -> int:
    from .hochschild import rees_deformation
    doc = _read_document(args.input)
    _expect_kind(doc, "filtration")
    rd = rees_deformation(doc.payload)
    if rd.module is not None:
        _emit(Document("module", rd.module), args.output)
    else:
        _emit(Document("algebra", rd.algebra), args.output)
    return 0


def cmd_snf(args) -> int:
    from .polycomplex import smith_normal_form
    doc = _read_document(args.input)
    _expect_kind(doc, "poly_complex")
    c = doc.payload
    degree = args.degree if args.degree is not None else min(
        (i for i, _ in c.diffs), default=min(c.degrees(), default=0))
    mat = c.diff(degree)
    u, d, v = smith_normal_form(mat, c.ring)

    def as_strings(m):
        return [[scalar_str(x) for x in row] for row in m]

    detail = {"degree": degree, "U": as_strings(u), "D": as_strings(d),
              "V": as_strings(v)}
    _emit(_report("snf", "pass", detail), args.output)
    return 0


def cmd_freeness(args) -> int:
    from .polycomplex import freeness_test
    doc = _read_document(args.input)
    _expect_kind(doc, "poly_complex")
    rep = freeness_test(doc.payload)
    detail = {
        "free": rep.free,
        "ranks": {str(k): v for k, v in sorted(rep.ranks.items())},
        "decomposition": {str(d): {"free": f, "torsion": list(t)}
                          for d, f, t in rep.decomposition.data},
    }
    if not rep.free:
        detail["witness_degree"] = rep.witness_degree
        detail["torsion"] = list(rep.torsion)
    _emit(_report("freeness", "pass" if rep.free else "fail", detail), args.output)
    return 0 if rep.free else 1


COMMANDS = {
    "check-algebra": cmd_check_algebra,
    "check-module": cmd_check_module,
    "check-morphism": cmd_check_morphism,
    "bar-check": cmd_bar_check,
    "transfer": cmd_transfer,
    "cohomology": cmd_cohomology,
    "hochschild": cmd_hochschild,
    "obstruct": cmd_obstruct,
    "prove-formality": cmd_prove_formality,
    "verify-certificate": cmd_verify_certificate,
    "normal-cone": cmd_normal_cone,
    "fibre": cmd_fibre,
    "rees": cmd_rees,
    "snf": cmd_snf,
    "freeness": cmd_freeness,
}


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ainfinity",
        description="exact computations with homotopy-associative structures")
    sub = top.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="input document")
        p.add_argument("--output", help="write the result document here")
        p.add_argument("--up-to", type=int, default=None, dest="up_to",
                       help="relation/stage level bound")
        p.add_argument("--ring", default=None,
                       help="assert the document's coefficient ring, e.g. Q, F5, Q[h]")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for randomized self-tests")
        p.add_argument("--verify-only", action="store_true", dest="verify_only",
                       help="re-verify a stored certificate instead of proving")
        if name == "hochschild":
            p.add_argument("--p", type=int, required=True)
            p.add_argument("--q", type=int, required=True)
        if name == "obstruct":
            p.add_argument("--stage", type=int, default=2)
        if name == "fibre":
            p.add_argument("--at", required=True, help="evaluation point, e.g. 0 or 1")
        if name == "snf":
            p.add_argument("--degree", type=int, default=None)
    return top


def _check_ring_flag(args) -> None:
    if args.ring is None:
        return
    expected = parse_ring_descriptor(args.ring)
    doc = _read_document(args.input)
    payload = doc.payload
    ring = None
    for attr in ("space", "ring"):
        if hasattr(payload, attr):
            got = getattr(payload, attr)
            ring = got.ring if hasattr(got, "ring") else got
            break
    if ring is None and hasattr(payload, "algebra"):
        ring = payload.algebra.space.ring
    if ring is not None and ring != expected:
        raise DocumentError(f"document ring {ring} does not match --ring {expected}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None:
        random.seed(args.seed)
    try:
        _check_ring_flag(args)
        return COMMANDS[args.command](args)
    except EngineError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
