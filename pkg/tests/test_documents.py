"""Document round-trips, validation and the command line."""

import json
import os
import subprocess
import sys

import pytest

from ainfinity.catalog import (formal_module_fixture, heisenberg_dga,
                               massey_module_fixture, torus_algebra)
from ainfinity.documents import (Document, algebra_to_json, parse, serialize)
from ainfinity.exceptions import DocumentError
from ainfinity.formality import prove_module_formality
from ainfinity.modules import algebra_as_module, truncate_to_M2
from ainfinity.polycomplex import poly_complex
from ainfinity.rings import RATIONALS, from_coeffs, poly_ring, variable
from ainfinity.transfer import contraction_from_complex, transfer_algebra

Q = RATIONALS


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "ainfinity.cli", *args],
                          capture_output=True, text=True)


# ---------------------------------------------------------------------------
# round trips

def test_algebra_round_trip():
    for alg in (heisenberg_dga(), torus_algebra()):
        doc = Document("algebra", alg)
        assert parse(serialize(doc)).payload == alg


def test_module_and_morphism_round_trip():
    A, HM = massey_module_fixture()
    assert parse(serialize(Document("module", HM))).payload == HM
    HA, f = transfer_algebra(heisenberg_dga(), up_to=4)
    back = parse(serialize(Document("morphism", f))).payload
    assert back == f


def test_contraction_round_trip():
    A = heisenberg_dga()
    c = contraction_from_complex(A.space, A.differential())
    back = parse(serialize(Document("contraction", c))).payload
    assert back.incl == c.incl and back.htpy == c.htpy


def test_poly_complex_round_trip():
    R = poly_ring("h", Q)
    h = variable(R)
    c = poly_complex(R, {0: 1, 1: 2}, {0: [[h], [h * h]]})
    back = parse(serialize(Document("poly_complex", c))).payload
    assert back == c


def test_certificate_round_trip_formal_and_not():
    A, HM = massey_module_fixture()
    cert = prove_module_formality(A, HM)
    text = serialize(Document("certificate", cert))
    back = parse(text).payload
    assert back.verdict == "not-an-formal" and back.stage == 2
    A2, FM = formal_module_fixture()
    cert2 = prove_module_formality(A2, FM)
    back2 = parse(serialize(Document("certificate", cert2))).payload
    assert back2.verdict == "formal"
    assert back2.witness == cert2.witness


def test_serialization_is_deterministic():
    A, HM = massey_module_fixture()
    assert serialize(Document("module", HM)) == serialize(Document("module", HM))


# ---------------------------------------------------------------------------
# validation

def test_reject_unknown_fields():
    A = torus_algebra()
    body = json.loads(serialize(Document("algebra", A)))
    body["payload"]["extra"] = 1
    with pytest.raises(DocumentError, match="unknown field"):
        parse(json.dumps(body))


def test_reject_version_mismatch():
    A = torus_algebra()
    body = json.loads(serialize(Document("algebra", A)))
    body["format_version"] = "2.0.0"
    with pytest.raises(DocumentError, match="version"):
        parse(json.dumps(body))


def test_reject_degree_violating_entry_citing_it():
    A = torus_algebra()
    body = json.loads(serialize(Document("algebra", A)))
    body["payload"]["ops"]["2"].append({"args": ["e1", "e2"], "value": {"e1": "1"}})
    with pytest.raises(DocumentError) as exc:
        parse(json.dumps(body))
    assert "ops.2" in str(exc.value)
    assert "degree" in str(exc.value)


def test_malformed_json_positions():
    with pytest.raises(DocumentError, match="line"):
        parse("{ not json }")


# ---------------------------------------------------------------------------
# the command line

@pytest.fixture
def workdir(tmp_path):
    A = heisenberg_dga()
    (tmp_path / "heis.json").write_text(serialize(Document("algebra", A)))
    Am, HM = massey_module_fixture()
    (tmp_path / "massey.json").write_text(serialize(Document("module", HM)))
    A2, FM = formal_module_fixture()
    (tmp_path / "formal.json").write_text(serialize(Document("module", FM)))
    R = poly_ring("h", Q)
    h = variable(R)
    (tmp_path / "cx.json").write_text(serialize(Document(
        "poly_complex", poly_complex(R, {0: 1, 1: 1}, {0: [[h]]}))))
    (tmp_path / "cx_free.json").write_text(serialize(Document(
        "poly_complex", poly_complex(R, {0: 1, 1: 1}, {}))))
    return tmp_path


def test_cli_check_algebra(workdir):
    r = run_cli("check-algebra", "--input", str(workdir / "heis.json"))
    assert r.returncode == 0
    report = json.loads(r.stdout)
    assert report["kind"] == "report" and report["payload"]["status"] == "pass"


def test_cli_check_algebra_ring_flag(workdir):
    assert run_cli("check-algebra", "--input", str(workdir / "heis.json"),
                   "--ring", "Q").returncode == 0
    assert run_cli("check-algebra", "--input", str(workdir / "heis.json"),
                   "--ring", "F5").returncode == 2


def test_cli_rejects_broken_input(workdir):
    bad = workdir / "bad.json"
    bad.write_text("{ nope")
    r = run_cli("check-algebra", "--input", str(bad))
    assert r.returncode == 2
    assert "error" in r.stderr


def test_cli_bar_check_and_module(workdir):
    assert run_cli("bar-check", "--input", str(workdir / "heis.json")).returncode == 0
    assert run_cli("check-module", "--input", str(workdir / "massey.json")).returncode == 0


def test_cli_transfer_and_check_morphism(workdir):
    out = workdir / "minimal.json"
    r = run_cli("transfer", "--input", str(workdir / "heis.json"),
                "--up-to", "4", "--output", str(out))
    assert r.returncode == 0
    r2 = run_cli("check-morphism", "--input", str(out))
    assert r2.returncode == 0


def test_cli_cohomology(workdir):
    r = run_cli("cohomology", "--input", str(workdir / "heis.json"))
    assert r.returncode == 0
    report = json.loads(r.stdout)
    assert report["payload"]["detail"]["dimensions"] == \
        {"0": 1, "1": 2, "2": 2, "3": 1}


def test_cli_hochschild(workdir):
    r = run_cli("hochschild", "--input", str(workdir / "massey.json"),
                "--p", "2", "--q", "-1")
    assert r.returncode == 0
    assert json.loads(r.stdout)["payload"]["detail"]["dimension"] == 1


def test_cli_obstruct(workdir):
    r = run_cli("obstruct", "--input", str(workdir / "massey.json"))
    assert r.returncode == 1
    assert json.loads(r.stdout)["payload"]["detail"]["vanished"] is False
    r2 = run_cli("obstruct", "--input", str(workdir / "formal.json"))
    assert r2.returncode == 0


def test_cli_prove_and_verify_formality(workdir):
    cert = workdir / "cert.json"
    r = run_cli("prove-formality", "--input", str(workdir / "massey.json"),
                "--output", str(cert))
    assert r.returncode == 1
    payload = json.loads(cert.read_text())["payload"]
    assert payload["verdict"] == "not-an-formal" and payload["stage"] == 2
    assert run_cli("verify-certificate", "--input", str(cert)).returncode == 0
    # tampering is detected
    body = json.loads(cert.read_text())
    body["payload"]["stage"] = 3
    tampered = workdir / "tampered.json"
    tampered.write_text(json.dumps(body, sort_keys=True, indent=2))
    assert run_cli("verify-certificate", "--input", str(tampered)).returncode == 1

    cert2 = workdir / "cert2.json"
    r = run_cli("prove-formality", "--input", str(workdir / "formal.json"),
                "--output", str(cert2))
    assert r.returncode == 0
    assert run_cli("verify-certificate", "--input", str(cert2)).returncode == 0
    # --verify-only flag routes prove-formality to verification
    assert run_cli("prove-formality", "--verify-only",
                   "--input", str(cert2)).returncode == 0
    # tamper with a witness entry
    body2 = json.loads(cert2.read_text())
    comps = body2["payload"]["witness_comps"]
    top = sorted(comps)[-1]
    if comps[top]:
        comps[top] = comps[top][1:]
        tampered2 = workdir / "tampered2.json"
        tampered2.write_text(json.dumps(body2, sort_keys=True, indent=2))
        assert run_cli("verify-certificate", "--input", str(tampered2)).returncode == 1


def test_cli_normal_cone_and_fibre(workdir):
    cone = workdir / "cone.json"
    assert run_cli("normal-cone", "--input", str(workdir / "massey.json"),
                   "--output", str(cone)).returncode == 0
    fib = workdir / "fib.json"
    assert run_cli("fibre", "--input", str(cone), "--at", "1",
                   "--output", str(fib)).returncode == 0
    back = parse(fib.read_text()).payload
    Am, HM = massey_module_fixture()
    assert {k: v.table for k, v in back.ops.items()} == \
        {k: v.table for k, v in HM.ops.items()}


def test_cli_snf_and_freeness(workdir):
    r = run_cli("snf", "--input", str(workdir / "cx.json"))
    assert r.returncode == 0
    detail = json.loads(r.stdout)["payload"]["detail"]
    assert detail["D"] == [["[0,1]"]]
    assert run_cli("freeness", "--input", str(workdir / "cx.json")).returncode == 1
    assert run_cli("freeness", "--input", str(workdir / "cx_free.json")).returncode == 0


def test_cli_deterministic_bytes(workdir):
    r1 = run_cli("cohomology", "--input", str(workdir / "heis.json"))
    r2 = run_cli("cohomology", "--input", str(workdir / "heis.json"))
    assert r1.stdout == r2.stdout


def test_cli_rees(tmp_path):
    from ainfinity.documents import filtration_to_json
    from ainfinity.hochschild import filtration
    from ainfinity.rings import one
    A = torus_algebra()
    levels = [{d: tuple({lab: one(Q)} for lab in A.space.labels(d))
               for d in A.space.degrees()},
              {2: ({"e12": one(Q)},)}]
    f = filtration(A, levels)
    (tmp_path / "filt.json").write_text(serialize(Document("filtration", f)))
    out = tmp_path / "rees.json"
    assert run_cli("rees", "--input", str(tmp_path / "filt.json"),
                   "--output", str(out)).returncode == 0
    rees = parse(out.read_text()).payload
    assert rees.space.ring.kind == "poly"
