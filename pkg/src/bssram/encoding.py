"""Bit codes of programs, Goedel indices and the machine enumeration.

A code is a sequence of 5-bit symbols. The symbol table is frozen (see
``SYMBOLS``); code 00000 is never used, so strings of zeros are not codes.

    K <n>                          number of index registers
    then per instruction:
    ADD Z <i> Z <j> Z <k> SEP      SUB likewise
    SET Z <j> C0|C1 SEP
    EQ  Z <j> L <l1> L <l2> SEP    GE likewise
    COPY I <j> I <k> SEP
    IDX I <j> SEP                  INC likewise
    IEQ I <j> I <k> L <l1> L <l2> SEP
    ORACLE L <l1> L <l2> SEP
    HALT SEP

A positive integer with binary expansion b_1..b_m (b_1 = 1) is written as
m-1 LEN symbols followed by m digit symbols D0/D1: a unary length prefix,
then the binary digits. The index of a program is 2**len(code) + value of
the code read as a binary number.
"""

from __future__ import annotations

from .machine import (Add, CopyIndirect, Dialect, EqTest, GeTest, Halt, IndexInc,
                      IndexSet, IndexTest, OracleTest, Program, SetConst, Sub, TRIVIAL,
                      MachineError)
from .reals import ONE, ZERO, make_rational

SYMBOL_WIDTH = 5

# frozen table: symbol -> code value (1..21); 0 and 22..31 are unused
SYMBOLS = {
    "ADD": 1, "SUB": 2, "SET": 3, "EQ": 4, "GE": 5, "COPY": 6, "IDX": 7,
    "INC": 8, "IEQ": 9, "ORACLE": 10, "HALT": 11,
    "Z": 12, "I": 13, "L": 14,
    "LEN": 15, "D0": 16, "D1": 17,
    "SEP": 18, "C0": 19, "C1": 20, "K": 21,
}
CODES = {v: k for k, v in SYMBOLS.items()}
SYMBOL_BITS = {name: format(v, "05b") for name, v in SYMBOLS.items()}


class NonBinaryConstant(MachineError):
    pass


class Invalid:
    """Marker returned by :func:`decode` for strings that are not codes."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Invalid"

    def __bool__(self):
        return False


INVALID = Invalid()


def _number(n: int) -> list[str]:
    if n < 1:
        raise ValueError("subscripts are positive")
    digits = bin(n)[2:]
    return ["LEN"] * (len(digits) - 1) + ["D1" if d == "1" else "D0" for d in digits]


def symbols_of(p: Program) -> list[str]:
    out = ["K", *_number(p.k)]
    for ins in p.instructions:
        if isinstance(ins, (Add, Sub)):
            out += ["ADD" if isinstance(ins, Add) else "SUB",
                    "Z", *_number(ins.i), "Z", *_number(ins.j), "Z", *_number(ins.k)]
        elif isinstance(ins, SetConst):
            if ins.c == ZERO:
                c = "C0"
            elif ins.c == ONE:
                c = "C1"
            else:
                raise NonBinaryConstant(f"constant {ins.c} has no bit code")
            out += ["SET", "Z", *_number(ins.j), c]
        elif isinstance(ins, (EqTest, GeTest)):
            out += ["EQ" if isinstance(ins, EqTest) else "GE",
                    "Z", *_number(ins.j), "L", *_number(ins.l1), "L", *_number(ins.l2)]
        elif isinstance(ins, CopyIndirect):
            out += ["COPY", "I", *_number(ins.j), "I", *_number(ins.k)]
        elif isinstance(ins, (IndexSet, IndexInc)):
            out += ["IDX" if isinstance(ins, IndexSet) else "INC", "I", *_number(ins.j)]
        elif isinstance(ins, IndexTest):
            out += ["IEQ", "I", *_number(ins.j), "I", *_number(ins.k),
                    "L", *_number(ins.l1), "L", *_number(ins.l2)]
        elif isinstance(ins, OracleTest):
            out += ["ORACLE", "L", *_number(ins.l1), "L", *_number(ins.l2)]
        elif isinstance(ins, Halt):
            out += ["HALT"]
        else:
            raise TypeError(f"not an instruction: {ins!r}")
        out.append("SEP")
    return out


def encode(p: Program) -> str:
    """Bit code of ``p`` as a string over {0,1}."""
    return "".join(SYMBOL_BITS[s] for s in symbols_of(p))


class _Reader:
    def __init__(self, syms):
        self.syms = syms
        self.pos = 0

    def peek(self):
        return self.syms[self.pos] if self.pos < len(self.syms) else None

    def take(self, *expected):
        s = self.peek()
        if s is None or (expected and s not in expected):
            raise ValueError
        self.pos += 1
        return s

    def number(self) -> int:
        extra = 0
        while self.peek() == "LEN":
            self.pos += 1
            extra += 1
        if self.take("D1", "D0") != "D1":
            raise ValueError  # leading digit must be 1
        n = 1
        for _ in range(extra):
            n = 2 * n + (1 if self.take("D0", "D1") == "D1" else 0)
        if self.peek() in ("D0", "D1"):
            raise ValueError  # digits must match the length prefix
        return n

    def tagged(self, tag) -> int:
        self.take(tag)
        return self.number()


def decode(bits: str):
    """Inverse of :func:`encode`; returns ``INVALID`` for non-codes."""
    if not bits or len(bits) % SYMBOL_WIDTH or set(bits) - {"0", "1"}:
        return INVALID
    syms = []
    for pos in range(0, len(bits), SYMBOL_WIDTH):
        v = int(bits[pos:pos + SYMBOL_WIDTH], 2)
        if v not in CODES:
            return INVALID
        syms.append(CODES[v])
    r = _Reader(syms)
    try:
        r.take("K")
        k = r.number()
        instructions = []
        while r.peek() is not None:
            op = r.take()
            if op in ("ADD", "SUB"):
                args = (r.tagged("Z"), r.tagged("Z"), r.tagged("Z"))
                ins = Add(*args) if op == "ADD" else Sub(*args)
            elif op == "SET":
                j = r.tagged("Z")
                ins = SetConst(j, 0 if r.take("C0", "C1") == "C0" else 1)
            elif op in ("EQ", "GE"):
                args = (r.tagged("Z"), r.tagged("L"), r.tagged("L"))
                ins = EqTest(*args) if op == "EQ" else GeTest(*args)
            elif op == "COPY":
                ins = CopyIndirect(r.tagged("I"), r.tagged("I"))
            elif op in ("IDX", "INC"):
                j = r.tagged("I")
                ins = IndexSet(j) if op == "IDX" else IndexInc(j)
            elif op == "IEQ":
                ins = IndexTest(r.tagged("I"), r.tagged("I"), r.tagged("L"), r.tagged("L"))
            elif op == "ORACLE":
                ins = OracleTest(r.tagged("L"), r.tagged("L"))
            elif op == "HALT":
                ins = Halt()
            else:
                return INVALID
            r.take("SEP")
            instructions.append(ins)
        return Program(tuple(instructions), k)
    except (ValueError, MachineError):
        return INVALID


def code_to_index(bits: str) -> int:
    """2**len(bits) + int(bits, 2): the bit string with a leading 1 prepended."""
    if set(bits) - {"0", "1"}:
        raise ValueError("not a bit string")
    return int("1" + bits, 2)


def index_to_code(k: int) -> str:
    if k < 1:
        raise ValueError("indices are positive")
    return bin(k)[3:]


def godel_index(p: Program) -> int:
    return code_to_index(encode(p))


def machine_at(k: int, dialect: Dialect = Dialect.ADD1, oracle: bool = False) -> Program:
    """The ``k``-th machine of the class, or the trivial machine ``1: halt``."""
    cls = dialect.with_oracle(oracle or dialect.oracle)
    p = decode(index_to_code(k))
    if p is INVALID or not cls.admits(p.dialect):
        return TRIVIAL
    return p


def is_trivial_fill(k: int, dialect: Dialect = Dialect.ADD1, oracle: bool = False) -> bool:
    cls = dialect.with_oracle(oracle or dialect.oracle)
    p = decode(index_to_code(k))
    return p is INVALID or not cls.admits(p.dialect)


def enumerate_machines(dialect: Dialect, n: int, oracle: bool = False) -> list[tuple[int, Program]]:
    if n < 1:
        raise ValueError("count must be >= 1")
    return [(k, machine_at(k, dialect, oracle)) for k in range(1, n + 1)]


def bits_to_hex(bits: str) -> str:
    """Hex text of a code; the leading-1 convention keeps leading zeros."""
    return hex(code_to_index(bits))


def hex_to_bits(text: str) -> str:
    return index_to_code(int(text, 16))


def code_values(p: Program) -> tuple:
    """The code as a tuple of 0/1 reals, as it appears inside a point."""
    return tuple(make_rational(int(b)) for b in encode(p))
