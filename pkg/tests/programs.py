"""Shared test material: hand-traced programs and random program generators."""

import random
from fractions import Fraction

from hypothesis import strategies as st

from bssram.machine import (Add, CopyIndirect, Dialect, EqTest, GeTest, Halt, IndexInc, IndexSet,
                            IndexTest, OracleTest, Program, SetConst, Sub)
from bssram.reals import parse_value

V = parse_value

# Each entry: assembly, input, oracle name (or None), expected output (or None
# for "still running"), step count. Step counts were traced by hand.
HAND_TRACED = [
    dict(name="doubling", src="1: add Z1 = Z1 + Z1\n2: halt\n",
         input=(3,), oracle=None, output=(6,), steps=2),
    dict(name="trivial", src="1: halt\n", input=(7,), oracle=None, output=(7,), steps=1),
    dict(name="countdown", src="""
1: set Z2 = 1
2: set Z3 = 0
3: eq Z1 -> 7, 4
4: sub Z1 = Z1 - Z2
5: add Z3 = Z3 + Z2
6: eq Z4 -> 3, 3
7: add Z1 = Z3 + Z4
8: halt
""", input=(3,), oracle=None, output=(3,), steps=17),
    dict(name="countdown-zero", src="""
1: set Z2 = 1
2: set Z3 = 0
3: eq Z1 -> 7, 4
4: sub Z1 = Z1 - Z2
5: add Z3 = Z3 + Z2
6: eq Z4 -> 3, 3
7: add Z1 = Z3 + Z4
8: halt
""", input=(0,), oracle=None, output=(0,), steps=5),
]

_CASCADE = """
1: set Z2 = 1
2: eq Z1 -> 9, 3
3: sub Z1 = Z1 - Z2
4: eq Z1 -> 11, 5
5: sub Z1 = Z1 - Z2
6: eq Z1 -> 13, 7
7: set Z1 = 0
8: halt
9: set Z1 = 1
10: halt
11: add Z1 = Z2 + Z2
12: halt
13: add Z1 = Z2 + Z2
14: add Z1 = Z1 + Z2
15: halt
"""
HAND_TRACED += [
    dict(name=f"cascade-{x}", src=_CASCADE, input=(V(x),), oracle=None, output=(out,), steps=n)
    for x, out, n in [("0", 1, 4), ("1", 2, 6), ("2", 3, 9), ("5", 0, 8), ("1/2", 0, 8)]
]

HAND_TRACED += [
    dict(name="index-copy", src="""
.indices 3
1: idx I1 = 1
2: idx I2 = 1
3: inc I2
4: inc I2
5: inc I2
6: copy Z[I2] = Z[I1]
7: ieq I1, I3 -> 11, 8
8: inc I1
9: inc I2
10: ieq I1, I1 -> 6, 6
11: inc I1
12: inc I1
13: inc I1
14: halt
""", input=(2, 5, 7), oracle=None, output=(2, 5, 7, 2, 5, 7), steps=21),
    dict(name="index-sum", src="""
.indices 3
1: add Z10 = Z1 + Z11
2: idx I1 = 1
3: idx I3 = 1
4: ieq I1, I2 -> 9, 5
5: inc I1
6: copy Z[I3] = Z[I1]
7: add Z10 = Z10 + Z1
8: ieq I1, I1 -> 4, 4
9: idx I1 = 1
10: add Z1 = Z10 + Z11
11: halt
""", input=(1, 2, 3, 4), oracle=None, output=(10,), steps=22),
    dict(name="abs-negative", src="1: ge Z1 -> 4, 2\n2: sub Z1 = Z2 - Z1\n3: halt\n4: halt\n",
         input=(-5,), oracle=None, output=(5,), steps=3),
    dict(name="abs-positive", src="1: ge Z1 -> 4, 2\n2: sub Z1 = Z2 - Z1\n3: halt\n4: halt\n",
         input=(2,), oracle=None, output=(2,), steps=2),
    dict(name="abs-irrational", src="1: ge Z1 -> 4, 2\n2: sub Z1 = Z2 - Z1\n3: halt\n4: halt\n",
         input=(V("sqrt(2) - 2"),), oracle=None, output=(V("2 - sqrt(2)"),), steps=3),
]

_MULT = """
1: set Z3 = 0
2: set Z4 = 1
3: eq Z2 -> 7, 4
4: add Z3 = Z3 + Z1
5: sub Z2 = Z2 - Z4
6: eq Z5 -> 3, 3
7: add Z1 = Z3 + Z5
8: halt
"""
_FLOOR = """
1: set Z2 = 1
2: set Z3 = 0
3: add Z4 = Z3 + Z2
4: sub Z5 = Z1 - Z4
5: ge Z5 -> 6, 8
6: add Z3 = Z4 + Z6
7: eq Z6 -> 3, 3
8: add Z1 = Z3 + Z6
9: halt
"""
_ORACLE = "1: oracle -> 2, 4\n2: set Z1 = 1\n3: halt\n4: set Z1 = 0\n5: halt\n"
HAND_TRACED += [
    dict(name="multiply", src=_MULT, input=(V("sqrt(2)"), 3), oracle=None,
         output=(V("3*sqrt(2)"), 0), steps=17),
    dict(name="multiply-zero", src=_MULT, input=(Fraction(1, 3), 0), oracle=None,
         output=(0, 0), steps=5),
    dict(name="floor-rational", src=_FLOOR, input=(Fraction(5, 2),), oracle=None, output=(2,), steps=17),
    dict(name="floor-sqrt2", src=_FLOOR, input=(V("sqrt(2)"),), oracle=None, output=(1,), steps=12),
    dict(name="oracle-in", src=_ORACLE, input=(V("sqrt(3)"),), oracle="sqrt-primes:2", output=(1,), steps=3),
    dict(name="oracle-out", src=_ORACLE, input=(2,), oracle="sqrt-primes:2", output=(0,), steps=3),
    dict(name="loop", src="1: eq Z1 -> 1, 1\n", input=(1,), oracle=None, output=None, steps=1000),
]


# ---------------------------------------------------------------------------
# random programs

def random_instruction(rng: random.Random, n: int, regs: int, k: int, dialect: Dialect):
    kinds = ["add", "sub", "set", "eq"]
    if dialect.level >= 1:
        kinds.append("ge")
    if k > 0:
        kinds += ["copy", "idx", "inc", "ieq"]
    if dialect.oracle:
        kinds.append("oracle")
    kinds.append("halt")
    kind = rng.choice(kinds)
    z = lambda: rng.randint(1, regs)
    lab = lambda: rng.randint(1, n)
    ix = lambda: rng.randint(1, k)
    if kind == "add":
        return Add(z(), z(), z())
    if kind == "sub":
        return Sub(z(), z(), z())
    if kind == "set":
        return SetConst(z(), rng.randint(0, 1))
    if kind == "eq":
        return EqTest(z(), lab(), lab())
    if kind == "ge":
        return GeTest(z(), lab(), lab())
    if kind == "copy":
        return CopyIndirect(ix(), ix())
    if kind == "idx":
        return IndexSet(ix())
    if kind == "inc":
        return IndexInc(ix())
    if kind == "ieq":
        return IndexTest(ix(), ix(), lab(), lab())
    if kind == "oracle":
        return OracleTest(lab(), lab())
    return Halt()


def random_program(rng: random.Random, dialect: Dialect = Dialect.ADD1, max_len: int = 12,
                   regs: int = 4, k: int = 1, use_index: bool = True) -> Program:
    """A well-formed program; the last instruction is a test or ``halt``."""
    n = rng.randint(1, max_len)
    body = [random_instruction(rng, n, regs, k if use_index else 0, dialect) for _ in range(n - 1)]
    tests = [Halt(), EqTest(rng.randint(1, regs), rng.randint(1, n), rng.randint(1, n))]
    if dialect.level >= 1:
        tests.append(GeTest(rng.randint(1, regs), rng.randint(1, n), rng.randint(1, n)))
    body.append(rng.choice(tests))
    return Program(tuple(body), k)


@st.composite
def programs(draw, dialect: Dialect = Dialect.ADD1, max_len: int = 10, k_max: int = 2):
    seed = draw(st.integers(0, 2**32 - 1))
    k = draw(st.integers(1, k_max))
    return random_program(random.Random(seed), dialect, max_len=max_len, k=k)


def halting_on(rng: random.Random, target, t: int, count: int, oracle=None,
               dialect: Dialect = Dialect.ADD1, max_tries: int = 100000):
    """``count`` random single-input programs that halt on ``(target)`` within ``t`` steps."""
    from bssram.machine import Halted, run_bounded
    out = []
    for _ in range(max_tries):
        p = random_program(rng, dialect, max_len=14, regs=4, k=1, use_index=False)
        if isinstance(run_bounded(p, (target,), oracle, t), Halted):
            out.append(p)
            if len(out) == count:
                break
    return out
