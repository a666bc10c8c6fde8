import random

import pytest

from bssram.encoding import godel_index
from bssram.machine import Dialect, finite_set_oracle, parse_program
from bssram.simulation import (NOT_YET, HaltingPair, diagonal_halts, enumerate_halting_pairs,
                               exact_halting_check, nbar_output, snapshot_W)
from programs import random_program

# halts exactly on even inputs, on 2m after 5m + 3 steps
EVEN = parse_program("""
1: set Z2 = 1
2: eq Z1 -> 8, 3
3: sub Z1 = Z1 - Z2
4: eq Z1 -> 7, 5
5: sub Z1 = Z1 - Z2
6: eq Z3 -> 2, 2
7: eq Z3 -> 7, 7
8: halt
""")


def test_even_program_pairs():
    assert EVEN.dialect is Dialect.ADD1EQ
    pairs = enumerate_halting_pairs(EVEN, 30)
    assert pairs == [HaltingPair(2 * m, 5 * m + 3) for m in range(1, 6)]
    for hp in pairs:
        assert exact_halting_check(EVEN, hp.n, hp.t)
        assert not exact_halting_check(EVEN, hp.n, hp.t + 1)


def test_enumeration_extends():
    short = enumerate_halting_pairs(EVEN, 20)
    long = enumerate_halting_pairs(EVEN, 60)
    assert long[:len(short)] == short
    assert len({hp.n for hp in long}) == len(long)


def test_snapshots_monotone():
    prev = frozenset()
    for s in range(0, 80):
        cur = snapshot_W(0, s, EVEN).members
        assert prev <= cur
        prev = cur
    assert prev == {2 * m for m in range(1, 16)}


def test_trivial_machine_enumerates_everything():
    # index 1 is the trivial machine, which halts on every input in one step
    assert enumerate_halting_pairs(parse_program("1: halt\n"), 4) == [HaltingPair(n, 1) for n in range(1, 5)]
    assert snapshot_W(1, 5).members == {1, 2, 3, 4, 5}
    assert nbar_output(1, 3, 10) == 3
    assert nbar_output(1, 30, 10) is NOT_YET
    with pytest.raises(ValueError):
        nbar_output(0, 1, 10)


def test_oracle_programs_rejected():
    with pytest.raises(ValueError):
        enumerate_halting_pairs(parse_program("1: oracle -> 2, 2\n2: halt\n"), 5)


def test_diagonal():
    q = parse_program("1: oracle -> 2, 3\n2: halt\n3: eq Z2 -> 3, 3\n")
    k = godel_index(q)
    assert not diagonal_halts(k, None, 50).halted
    v = diagonal_halts(k, finite_set_oracle([k]), 50)
    assert v.halted and v.steps == 2 and str(v) == "yes_at(2)"
    assert diagonal_halts(1, None, 1).halted


def test_random_pairs_replay():
    rng = random.Random(5)
    for _ in range(20):
        p = random_program(rng, Dialect.ADD1EQ, max_len=10, k=1)
        for hp in enumerate_halting_pairs(p, 40):
            assert exact_halting_check(p, hp.n, hp.t)
