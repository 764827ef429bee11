import json

import numpy as np
import pytest

from upbkit.cli import main
from upbkit.constructions import make_pyramid, make_tiles
from upbkit.serialization import decode_basis, decode_povm, encode_basis


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out) if out.strip() else json.loads(err)


def test_construct_pyramid_is_bit_identical(capsys):
    code, out, _ = run(capsys, "construct", "pyramid")
    assert code == 0
    basis = decode_basis(json.loads(out))
    ref = make_pyramid()
    assert basis.dims == (3, 3) and len(basis) == 5
    for a, b in zip(basis.states, ref.states):
        for x, y in zip(a.locals, b.locals):
            assert np.array_equal(x, y)


def test_construct_bob_povm(capsys):
    code, out, _ = run(capsys, "construct", "bob-povm")
    povm = decode_povm(json.loads(out))
    assert code == 0 and povm.scale == pytest.approx(0.8)
    assert povm.completeness_error() <= 1e-12


def test_construct_shifts_cut(capsys):
    code, out, _ = run(capsys, "construct", "shifts-cut-decomposition", "--cut", "1")
    assert code == 0
    assert json.loads(out)["dims"] == [2, 4]


def test_construct_unknown(capsys):
    code, _, err = run(capsys, "construct", "nonsense")
    assert code == 2 and "nonsense" in err


def test_round_trip_through_file(tmp_path, capsys):
    path = tmp_path / "tiles.json"
    assert main(["construct", "tiles", "--output", str(path)]) == 0
    basis = decode_basis(json.loads(path.read_text()))
    for a, b in zip(basis.states, make_tiles().states):
        for x, y in zip(a.locals, b.locals):
            assert np.array_equal(x, y)
    code, cert = run_json(capsys, "verify", "--input", str(path))
    assert code == 0 and cert["verdict"] == "UPB"


def test_verify_tiles(capsys):
    code, cert = run_json(capsys, "verify", "--construction", "tiles")
    assert code == 0 and cert["passed"]
    assert cert["verdict"] == "UPB"
    assert {c["name"] for c in cert["checks"]} >= {"orthogonal", "partition_oracle_agree"}


def test_verify_dropped_state_is_extendible(capsys):
    code, cert = run_json(capsys, "verify", "--construction", "tiles", "--drop", "4")
    assert code == 0
    assert cert["verdict"] == "extendible"
    assert cert["witness_state"]


def test_verify_human_format(capsys):
    code, out, _ = run(capsys, "verify", "--construction", "pyramid")
    assert code == 0 and "[PASS] orthogonal" in out


def test_verify_non_orthogonal_input(tmp_path, capsys):
    data = encode_basis(make_tiles())
    data["states"][2] = data["states"][0]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, err = run_json(capsys, "verify", "--input", str(path))
    assert code == 2
    assert "states 0 and 2" in err["error"]


def test_verify_malformed_input(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, _ = run(capsys, "verify", "--input", str(path))
    assert code == 2


def test_verify_needs_one_source(capsys):
    assert run(capsys, "verify")[0] == 2
    assert run(capsys, "verify", "--construction", "tiles", "--drop", "9")[0] == 2


def test_certificate_is_reproducible(capsys):
    _, a = run_json(capsys, "verify", "--construction", "shifts", "--seed", "3")
    _, b = run_json(capsys, "verify", "--construction", "shifts", "--seed", "3")
    assert a == b and a["seed"] == 3


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("UPBKIT_SEED", "17")
    _, cert = run_json(capsys, "verify", "--construction", "tiles")
    assert cert["seed"] == 17


def test_boundent_shifts(capsys):
    code, cert = run_json(capsys, "boundent", "--construction", "shifts", "--separability-witness")
    assert code == 0 and cert["passed"]
    names = {c["name"] for c in cert["checks"]}
    assert {"ppt[A|BC]", "entangled"} <= names


def test_boundent_refuses_non_upb(capsys):
    code, _ = run_json(capsys, "boundent", "--construction", "tiles", "--drop", "0")
    assert code == 2


def test_boundent_eof_small_budget(capsys):
    code, cert = run_json(
        capsys, "boundent", "--construction", "tiles", "--eof", "--k-max", "5", "--eof-restarts", "4"
    )
    eof = [c for c in cert["checks"] if c["name"].startswith("eof")]
    assert eof and eof[0]["evidence"]["ebits"] > 0.2


def test_locc_pyramid34(capsys):
    code, cert = run_json(capsys, "locc", "pyramid34")
    assert code == 0 and cert["passed"]


def test_locc_completion_check(capsys):
    code, cert = run_json(capsys, "locc", "completion-check")
    assert code == 0 and cert["passed"]


def test_locc_2xn_demo(capsys):
    code, cert = run_json(capsys, "locc", "2xn-demo", "--n", "3", "--seed", "2")
    assert code == 0 and cert["passed"]


def test_locc_unknown(capsys):
    assert run(capsys, "locc", "teleport")[0] == 2


def test_bad_tolerance(capsys):
    assert run(capsys, "verify", "--construction", "tiles", "--tol-orth", "0")[0] == 2
