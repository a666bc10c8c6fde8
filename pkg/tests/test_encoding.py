import random

import pytest
from hypothesis import given

from bssram.encoding import (INVALID, SYMBOL_BITS, SYMBOLS, NonBinaryConstant, bits_to_hex,
                             code_to_index, code_values, decode, encode, enumerate_machines,
                             godel_index, hex_to_bits, index_to_code, is_trivial_fill, machine_at,
                             symbols_of)
from bssram.machine import TRIVIAL, Dialect, parse_program
from programs import programs, random_program

TRIVIAL_CODE = "10101100010101110010"  # K D1 HALT SEP


def test_symbol_table_frozen():
    assert len(SYMBOLS) == 21
    assert sorted(SYMBOLS.values()) == list(range(1, 22))
    assert all(len(b) == 5 for b in SYMBOL_BITS.values())
    assert "00000" not in SYMBOL_BITS.values()


def test_trivial_machine_golden():
    assert symbols_of(TRIVIAL) == ["K", "D1", "HALT", "SEP"]
    assert encode(TRIVIAL) == TRIVIAL_CODE
    assert godel_index(TRIVIAL) == 2**20 + int(TRIVIAL_CODE, 2) == 1754482
    assert decode(TRIVIAL_CODE) == TRIVIAL


def test_number_encoding():
    p = parse_program(".indices 1\n1: add Z5 = Z1 + Z2\n2: halt\n")
    syms = symbols_of(p)
    # 5 = 101: two length marks then the digits
    assert syms[2:10] == ["ADD", "Z", "LEN", "LEN", "D1", "D0", "D1", "Z"]


@given(programs(Dialect.ADD1_O, max_len=12, k_max=3))
def test_round_trip(p):
    assert decode(encode(p)) == p
    k = godel_index(p)
    assert machine_at(k, Dialect.ADD1, oracle=True) == p
    assert index_to_code(k) == encode(p)


def test_index_formula_spot_checks():
    rng = random.Random(3)
    for _ in range(20):
        bits = encode(random_program(rng, Dialect.ADD1, k=2))
        assert code_to_index(bits) == 2 ** len(bits) + int(bits, 2)


def test_invalid_strings():
    assert decode("") is INVALID
    assert decode("0" * 20) is INVALID
    assert decode("1010") is INVALID
    assert decode(TRIVIAL_CODE[:-5]) is INVALID           # missing SEP
    assert decode(TRIVIAL_CODE + "10010") is INVALID      # stray SEP
    assert decode("10101" + "01111" + "10000" + "01011" + "10010") is INVALID  # LEN D0: no leading 1
    assert decode("10101" + "10001" + "10000" + "01011" + "10010") is INVALID  # extra digit
    assert decode("11111" * 4) is INVALID                 # unused symbol code
    for k in range(1, 2**13):
        assert is_trivial_fill(k)


def test_machine_at_falls_back_to_trivial():
    assert machine_at(1) == TRIVIAL
    assert machine_at(12345) == TRIVIAL
    ge = parse_program("1: ge Z1 -> 2, 2\n2: halt\n")
    assert machine_at(godel_index(ge), Dialect.ADD1) == ge
    assert machine_at(godel_index(ge), Dialect.ADD1EQ) == TRIVIAL
    orc = parse_program("1: oracle -> 2, 2\n2: halt\n")
    assert machine_at(godel_index(orc), Dialect.ADD1) == TRIVIAL
    assert machine_at(godel_index(orc), Dialect.ADD1, oracle=True) == orc


def test_non_binary_constant_has_no_code():
    with pytest.raises(NonBinaryConstant):
        encode(parse_program("1: set Z1 = 2\n2: halt\n"))


def test_hex_and_values():
    assert hex_to_bits(bits_to_hex(TRIVIAL_CODE)) == TRIVIAL_CODE
    assert bits_to_hex("0001") == "0x11"
    assert [int(v.constant) for v in code_values(TRIVIAL)] == [int(b) for b in TRIVIAL_CODE]


def test_enumerate_machines():
    ms = enumerate_machines(Dialect.ADD1EQ, 5)
    assert [k for k, _ in ms] == [1, 2, 3, 4, 5]
    assert all(p == TRIVIAL for _, p in ms)
    with pytest.raises(ValueError):
        enumerate_machines(Dialect.ADD1, 0)


def test_injective_on_random_set():
    rng = random.Random(11)
    progs = {random_program(rng, Dialect.ADD1_O, k=2) for _ in range(300)}
    assert len({godel_index(p) for p in progs}) == len(progs)
