import json

import pytest

from cyclecancel.cli import main
from cyclecancel.matrix import load


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_json(capsys):
    code, out, _ = run(capsys, "solve", "--matrix", "ex34", "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["ap_value"] == 155 and rep["tour_value"] == 161 and rep["certified"] is True
    assert "timings" not in rep


def test_solve_initial_and_timings(capsys):
    code, out, _ = run(capsys, "solve", "--matrix", "ex34", "--initial", "(1 2 3 4 5 6 7 8)", "--json", "--timings")
    rep = json.loads(out)
    assert code == 0 and rep["phase1"]["value"] == 155 and "timings" in rep


def test_no_args_exit_one(capsys):
    assert main([]) == 1


def test_bad_matrix_exit_one(tmp_path, capsys):
    p = tmp_path / "bad.mat"
    p.write_text("2\ninf x\n1 inf\n")
    code, _, err = run(capsys, "solve", "--matrix", str(p))
    assert code == 1 and "row 1" in err
    code, _, _ = run(capsys, "solve", "--matrix", str(tmp_path / "missing.mat"))
    assert code == 1


def test_solve_byte_identical(tmp_path, capsys):
    outs = []
    for k in range(2):
        t = tmp_path / f"t{k}.jsonl"
        code, out, _ = run(capsys, "solve", "--matrix", "ex35", "--seed", "3", "--json", "--trace", str(t))
        assert code == 0
        outs.append((out, t.read_bytes()))
    assert outs[0] == outs[1]


def test_gen_roundtrip(tmp_path, capsys):
    p = tmp_path / "g.mat"
    assert main(["gen", "--n", "6", "--seed", "5", "--out", str(p)]) == 0
    m = load(p)
    assert m.n == 6
    code, out, _ = run(capsys, "gen", "--n", "6", "--seed", "5")
    assert out.split("\n", 1)[1] == p.read_text().split("\n", 1)[1]


def test_detvertex(capsys):
    code, out, _ = run(capsys, "detvertex", "--json", "--", "-5", "2", "-1")
    d = json.loads(out)
    assert code == 0 and d["starts"] == [1, 3] and d["folded"] == 1 and d["total"] == -4


def test_detvertex_none(capsys):
    code, _, err = run(capsys, "detvertex", "--bound", "-1", "--", "-1", "-1")
    assert code == 2 and err


def test_fw_classic(capsys):
    code, out, _ = run(capsys, "fw", "--matrix", "ex32", "--json")
    d = json.loads(out)
    assert code == 0 and d["dist"][0][6] == 3 and d["dist"][0][9] == -2


def test_fw_nvs_on_d7(capsys):
    from cyclecancel.fixtures import EX35_D7
    from cyclecancel.perm import format_cycles

    code, out, _ = run(capsys, "fw", "--matrix", "ex35", "--variant", "nvs", "--perm", format_cycles(EX35_D7), "--json")
    d = json.loads(out)
    c = d["cycle"]
    assert code == 0 and c["cycle"] == [11, 12, 20, 18, 6, 13] and c["value"] == -1 and d["blocks"] == 3


@pytest.mark.parametrize("which, key, expect", [("brute-tsp", "value", 161), ("brute-ap", "value", 155), ("hungarian", "value", 155)])
def test_oracle(capsys, which, key, expect):
    code, out, _ = run(capsys, "oracle", which, "--matrix", "ex34", "--json")
    assert code == 0 and json.loads(out)[key] == expect


def test_fixtures(tmp_path, capsys):
    code, out, _ = run(capsys, "fixtures")
    assert code == 0 and "ex35" in out
    p = tmp_path / "x.mat"
    assert main(["fixtures", "ex34", "--out", str(p)]) == 0
    assert load(p).n == 8
