import json
from pathlib import Path

import pytest

from bssram.cli import main

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"
DOUBLING = str(FIX / "doubling.bss")


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_run_doubling(capsys):
    code, out = run(capsys, "run", DOUBLING, "--input", "3", "--steps", "100")
    assert code == 0
    assert json.loads(out) == {"halted": True, "output": ["6"], "halted_at": 2}
    code, out = run(capsys, "--format", "text", "run", DOUBLING, "--input", "sqrt(2)")
    assert out.strip() == "halted at 2: (2*sqrt(2))"


def test_run_timeout(tmp_path, capsys):
    loop = tmp_path / "loop.bss"
    loop.write_text("1: eq Z1 -> 1, 1\n")
    code, out = run(capsys, "run", str(loop), "--input", "0", "--steps", "50")
    assert code == 1 and json.loads(out)["halted"] is False


def test_index_encode_decode(capsys):
    code, out = run(capsys, "index", DOUBLING)
    k = json.loads(out)["index"]
    assert code == 0 and k == 1928715516517075314
    code, out = run(capsys, "encode", DOUBLING)
    enc = json.loads(out)
    assert enc["length"] == 60 and int(enc["hex"], 16) == k
    code, out = run(capsys, "decode", enc["hex"])
    assert json.loads(out)["program"] == ".indices 1\n1: add Z1 = Z1 + Z1\n2: halt\n"
    code, out = run(capsys, "decode", "00000")
    assert code == 1 and json.loads(out) == {"valid": False}
    code, out = run(capsys, "index", "--of", "1754482")
    assert json.loads(out)["program"] == ".indices 1\n1: halt\n"


def test_trace(capsys):
    code, out = run(capsys, "trace", DOUBLING, "--input", "3")
    recs = [json.loads(ln) for ln in out.splitlines()]
    assert code == 0 and len(recs) == 2 and recs[-1]["output"] == ["6"]


def test_enumerate(capsys):
    code, out = run(capsys, "enumerate", "--dialect", "add1eq", "--count", "3")
    recs = [json.loads(ln) for ln in out.splitlines()]
    assert [r["index"] for r in recs] == [1, 2, 3] and all(r["trivial"] for r in recs)


def test_halting_pairs_csv(capsys):
    code, out = run(capsys, "halting-pairs", DOUBLING, "--budget", "3")
    assert out == "i,n,t\n1,1,2\n2,2,2\n3,3,2\n"


def test_stages_golden(capsys):
    code, out = run(capsys, "stages", "--max", "50", "--synthetic", str(FIX / "w1.json"))
    lines = out.splitlines()
    assert code == 0 and len(lines) == 50
    assert json.loads(lines[0]) == {"s": 1, "I_s": [1], "i_s": 1, "x": 5, "A_size": 1}
    assert json.loads(lines[-1]) == {"A": [5, 6, 28, 50, 100]}
    code2, out2 = run(capsys, "stages", "--max", "50", "--synthetic", str(FIX / "w1.json"))
    assert out2 == out


def test_problems(capsys):
    code, out = run(capsys, "problem", "kappa", "-i", "1", "--point", "3/2")
    assert code == 0 and json.loads(out) == {"verdict": "yes", "witness": [10, 7], "steps": 147}
    code, out = run(capsys, "problem", "kappa", "-i", "1", "--point", "sqrt(2)", "--budget", "500")
    assert code == 1 and json.loads(out)["steps"] == 500
    code, out = run(capsys, "problem", "l_n", "--point", "sqrt(2), 3 + 2*sqrt(2)", "--exact")
    assert json.loads(out)["witness"] == ["3", "2"]
    code, out = run(capsys, "problem", "select", "-k", "2", "-i", "3", "--point", "sqrt(3)")
    assert code == 0 and json.loads(out)["witness"] == 1
    code, out = run(capsys, "problem", "p_i", "-i", "1", "--point", "5")
    assert code == 0
    code, out = run(capsys, "problem", "h_i", "-i", "0", "--point", "1, 7, 1,0,1,0,1, 1,0,0,0,1, 0,1,0,1,1, 1,0,0,1,0")
    assert code == 0 and json.loads(out)["witness"] == "H^{1,=}"
    code, _ = run(capsys, "problem", "select", "-k", "4", "-i", "3", "--point", "sqrt(3)")
    assert code == 2


def test_shadow(capsys):
    code, out = run(capsys, "shadow", str(FIX / "sign_test.bss"), "--target", "sqrt(2)")
    assert code == 0 and json.loads(out) == {"shadow": "1", "atoms": ["1x+0 >= 0"], "same_path": True}


def test_oracle_flag(capsys, tmp_path):
    p = tmp_path / "q.bss"
    p.write_text("1: oracle -> 2, 3\n2: halt\n3: eq Z1 -> 3, 3\n")
    assert run(capsys, "run", str(p), "--input", "sqrt(5)", "--oracle", "sqrt-primes:3")[0] == 0
    assert run(capsys, "run", str(p), "--input", "sqrt(5)", "--oracle", "sqrt-primes:2", "--steps", "20")[0] == 1
    members = tmp_path / "set.txt"
    members.write_text("# one tuple per line\nsqrt(5)\n1, 2\n")
    assert run(capsys, "run", str(p), "--input", "sqrt(5)", "--oracle", str(members))[0] == 0
    assert run(capsys, "run", str(p), "--input", "1/2", "--oracle", "rationals")[0] == 0


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["run", DOUBLING])
    assert e.value.code == 2
    assert main(["run", str(FIX / "missing.bss"), "--input", "1"]) == 2
    assert main(["run", DOUBLING, "--input", "x"]) == 2
    assert main(["run", DOUBLING, "--input", "1", "--oracle", "nope"]) == 2
