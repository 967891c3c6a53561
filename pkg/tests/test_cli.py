import json
import subprocess
import sys

from matcanon.cli import (form_from_json, form_to_json, matrix_from_json,
                          matrix_to_json)
from matcanon import ExactMatrix, canonicalize, prime_field, rationals
from matcanon.unipotent import gamma_matrix


def run_cli(args, tmp_path=None):
    proc = subprocess.run([sys.executable, "-m", "matcanon"] + args,
                          capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


def write_matrix(tmp_path, name, field, rows):
    path = tmp_path / name
    path.write_text(json.dumps({"field": field, "matrix": rows}))
    return str(path)


def test_canon_gamma3(tmp_path):
    p = write_matrix(tmp_path, "g3.json", {"kind": "rational"},
                     [["0", "0", "1"], ["0", "-1", "-1"], ["1", "1", "0"]])
    code, out, err = run_cli(["canon", p, "--machine"])
    assert code == 0
    payload = json.loads(out)
    assert payload["blocks"] == ["A3"]
    assert payload["gabriel"] == []


def test_machine_output_round_trips(tmp_path):
    p = write_matrix(tmp_path, "a.json", {"kind": "rational"},
                     [["0", "2"], ["1", "0"]])
    code, out, _ = run_cli(["canon", p, "--machine"])
    payload = json.loads(out)
    form = form_from_json(payload)
    q = rationals()
    direct, _w = canonicalize(ExactMatrix(q, [[0, 2], [1, 0]]))
    assert form.gabriel == list(direct.gabriel)
    assert form.blocks == direct.blocks
    assert form_to_json(form)["blocks"] == payload["blocks"]


def test_deterministic_output(tmp_path):
    p = write_matrix(tmp_path, "a.json", {"kind": "gfp", "p": 3},
                     [["1", "2"], ["0", "1"]])
    _, out1, _ = run_cli(["canon", p, "--machine"])
    _, out2, _ = run_cli(["canon", p, "--machine"])
    assert out1 == out2


def test_equiv_exit_codes(tmp_path):
    f2 = {"kind": "gfp", "p": 2}
    ident = write_matrix(tmp_path, "i.json", f2, [["1", "0"], ["0", "1"]])
    anti = write_matrix(tmp_path, "e.json", f2, [["0", "1"], ["1", "0"]])
    code, out, _ = run_cli(["equiv", ident, anti, "--machine",
                            "--policy", "strict"])
    assert code == 1
    payload = json.loads(out)
    assert payload["equivalent"] is False
    assert "alternating flag mismatch at m=1" in payload["reason"]

    code, out, _ = run_cli(["equiv", ident, ident, "--machine"])
    assert code == 0
    assert json.loads(out)["equivalent"] is True


def not_split_matrix():
    # ((0, B'), (I, 0)) with B the companion matrix of X^3 - X - 1: the
    # asymmetry eigenvalues are the cubic's roots and their inverses, which
    # quadratic adjunctions cannot reach
    q = rationals()
    b = ExactMatrix(q, [[0, 0, 1], [1, 0, 1], [0, 1, 0]])
    bt = b.transpose()
    z = ExactMatrix.zeros(q, 3, 3)
    i = ExactMatrix.identity(q, 3)
    rows = [list(zr) + list(br) for zr, br in zip(z.rows, bt.rows)]
    rows += [list(ir) + list(zr) for ir, zr in zip(i.rows, z.rows)]
    return ExactMatrix(q, rows)


def test_not_split_exit_code(tmp_path):
    a = not_split_matrix()
    from matcanon import NotSplit
    import pytest as _pytest
    with _pytest.raises(NotSplit):
        canonicalize(a)
    rows = [[str(e.coords[0]) for e in row] for row in a.rows]
    p = write_matrix(tmp_path, "ns.json", {"kind": "rational"}, rows)
    code, _out, err = run_cli(["canon", p])
    assert code == 2


def test_strict_no_root_exit_code(tmp_path):
    f3 = {"kind": "gfp", "p": 3}
    p = write_matrix(tmp_path, "two.json", f3, [["2"]])
    code, _out, err = run_cli(["canon", p, "--policy", "strict"])
    assert code == 3
    code, out, _ = run_cli(["canon", p, "--policy", "extend", "--machine"])
    assert code == 0
    assert json.loads(out)["blocks"] == ["A1"]


def test_input_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _out, err = run_cli(["canon", str(bad)])
    assert code == 4
    code, _out, _err = run_cli(["canon", str(tmp_path / "missing.json")])
    assert code == 4


def test_oracle_cli(tmp_path):
    code, out, _ = run_cli(["oracle", "--partition", "-n", "2",
                            "--prime", "2", "--machine"])
    assert code == 0
    payload = json.loads(out)
    assert payload["classes"] == 6
    f2 = {"kind": "gfp", "p": 2}
    a = write_matrix(tmp_path, "a.json", f2, [["1", "0"], ["0", "1"]])
    b = write_matrix(tmp_path, "b.json", f2, [["0", "1"], ["1", "0"]])
    code, out, _ = run_cli(["oracle", a, b, "--machine"])
    assert code == 1
    assert json.loads(out)["congruent"] is False


def test_block_cli():
    code, out, _ = run_cli(["block", "A3", "--field", "q", "--machine"])
    assert code == 0
    payload = json.loads(out)
    q = rationals()
    expect = gamma_matrix(q, 3)
    got = matrix_from_json({"field": {"kind": "rational"},
                            "matrix": payload["matrix"]})
    assert got == expect


def test_fuzz_cli_deterministic():
    args = ["fuzz", "--field", "gf3", "--count", "25", "--max-dim", "2",
            "--seed", "0", "--machine"]
    code1, out1, _ = run_cli(args)
    code2, out2, _ = run_cli(args)
    assert code1 == code2 == 0
    assert out1 == out2
    payload = json.loads(out1)
    assert payload["failures"] == []


def test_fuzz_gf2_reports_pair_counterexample():
    code, out, _ = run_cli(["fuzz", "--field", "gf2", "--count", "5",
                            "--max-dim", "2", "--seed", "0", "--machine"])
    assert code == 0
    payload = json.loads(out)
    assert payload["pair_counterexample"] == "distinct over GF(2)"


def test_matrix_json_round_trip():
    f2 = prime_field(2)
    a = ExactMatrix(f2, [[0, 1], [1, 1]])
    back = matrix_from_json(matrix_to_json(a))
    assert back == a


def test_non_square_input_exit_code(tmp_path):
    p = write_matrix(tmp_path, "rect.json", {"kind": "rational"},
                     [["1", "2", "3"], ["4", "5", "6"]])
    code, _out, err = run_cli(["canon", str(p)])
    assert code == 4


def test_machine_round_trip_with_tower(tmp_path):
    # the characteristic-2 pair needing an Artin-Schreier extension: the
    # reported field carries a tower and must round-trip
    f2 = {"kind": "gfp", "p": 2}
    p = write_matrix(tmp_path, "c11.json", f2,
                     [["1", "0", "1", "1"], ["0", "0", "0", "1"],
                      ["1", "0", "0", "0"], ["0", "1", "0", "1"]])
    code, out, _ = run_cli(["canon", p, "--machine"])
    assert code == 0
    payload = json.loads(out)
    assert payload["extensions"]
    form = form_from_json(payload)
    assert [repr(b) for b in form.blocks] == payload["blocks"]
    assert form.context.tower  # reconstructed adjunction
