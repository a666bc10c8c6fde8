"""Builder for programs with symbolic labels and named registers.

Used to write the fixed machines shipped with the package. Labels are
resolved to positions when :meth:`ProgramBuilder.build` is called.
"""

from __future__ import annotations

from .machine import (Add, CopyIndirect, EqTest, GeTest, Halt, IndexInc, IndexSet,
                      IndexTest, OracleTest, Program, SetConst, Sub)


class ProgramBuilder:
    def __init__(self, k: int = 1, first_free: int = 1):
        self.k = k
        self._ops: list = []
        self._labels: dict[str, int] = {}
        self._regs: dict[str, int] = {}
        self._next_reg = first_free
        self._fresh = 0

    # registers -----------------------------------------------------------
    def reg(self, name: str, number: int | None = None) -> int:
        """Register number for ``name``, allocating one if needed."""
        if name in self._regs:
            return self._regs[name]
        if number is None:
            while self._next_reg in self._regs.values():
                self._next_reg += 1
            number = self._next_reg
            self._next_reg += 1
        self._regs[name] = number
        return number

    def fresh_label(self, stem: str = "L") -> str:
        self._fresh += 1
        return f"{stem}#{self._fresh}"

    # emission --------------------------------------------------------------
    def label(self, name: str) -> None:
        if name in self._labels:
            raise ValueError(f"label {name!r} defined twice")
        self._labels[name] = len(self._ops) + 1

    def _r(self, r) -> int:
        return r if isinstance(r, int) else self.reg(r)

    def add(self, i, j, k):
        self._ops.append(("add", self._r(i), self._r(j), self._r(k)))

    def sub(self, i, j, k):
        self._ops.append(("sub", self._r(i), self._r(j), self._r(k)))

    def set(self, j, c):
        self._ops.append(("set", self._r(j), c))

    def eq(self, j, l1, l2):
        self._ops.append(("eq", self._r(j), l1, l2))

    def ge(self, j, l1, l2):
        self._ops.append(("ge", self._r(j), l1, l2))

    def copy(self, j, k):
        self._ops.append(("copy", j, k))

    def idx(self, j):
        self._ops.append(("idx", j))

    def inc(self, j):
        self._ops.append(("inc", j))

    def ieq(self, j, k, l1, l2):
        self._ops.append(("ieq", j, k, l1, l2))

    def oracle(self, l1, l2):
        self._ops.append(("oracle", l1, l2))

    def halt(self):
        self._ops.append(("halt",))

    # macros ------------------------------------------------------------------
    def goto(self, target: str):
        """Unconditional jump, as an equality test with both branches equal."""
        self._ops.append(("eq", self.reg("__zero"), target, target))

    def const(self, j, n: int):
        """``Z_j := n`` for an integer ``n`` built from 0 and 1 by doubling."""
        one = self.reg("__one")
        j = self._r(j)
        self.set(j, 0)
        if n == 0:
            return
        neg = n < 0
        for bit in bin(abs(n))[2:]:
            self.add(j, j, j)
            if bit == "1":
                self.add(j, j, one)
        if neg:
            tmp = self.reg("__tmp_neg")
            self.set(tmp, 0)
            self.sub(j, tmp, j)

    def move(self, dst, src):
        zero = self.reg("__zero")
        self.add(dst, src, zero)

    def multiply(self, dst, a, n):
        """``dst := a * n`` for a register ``n`` holding a non-negative integer."""
        one = self.reg("__one")
        cnt = self.reg(f"__mul_cnt")
        diff = self.reg(f"__mul_diff")
        loop, done = self.fresh_label("mul"), self.fresh_label("mul_done")
        body = self.fresh_label("mul_body")
        self.set(dst, 0)
        self.set(cnt, 0)
        self.label(loop)
        self.sub(diff, cnt, n)
        self.eq(diff, done, body)
        self.label(body)
        self.add(dst, dst, a)
        self.add(cnt, cnt, one)
        self.goto(loop)
        self.label(done)

    def prologue(self):
        """Initialise the helper constants 0 and 1; call before using macros."""
        self.set(self.reg("__zero"), 0)
        self.set(self.reg("__one"), 1)

    # output ----------------------------------------------------------------
    def build(self) -> Program:
        def lab(x):
            if isinstance(x, int):
                return x
            try:
                return self._labels[x]
            except KeyError:
                raise ValueError(f"undefined label {x!r}") from None

        out = []
        for op in self._ops:
            name = op[0]
            if name == "add":
                out.append(Add(*op[1:]))
            elif name == "sub":
                out.append(Sub(*op[1:]))
            elif name == "set":
                out.append(SetConst(op[1], op[2]))
            elif name == "eq":
                out.append(EqTest(op[1], lab(op[2]), lab(op[3])))
            elif name == "ge":
                out.append(GeTest(op[1], lab(op[2]), lab(op[3])))
            elif name == "copy":
                out.append(CopyIndirect(op[1], op[2]))
            elif name == "idx":
                out.append(IndexSet(op[1]))
            elif name == "inc":
                out.append(IndexInc(op[1]))
            elif name == "ieq":
                out.append(IndexTest(op[1], op[2], lab(op[3]), lab(op[4])))
            elif name == "oracle":
                out.append(OracleTest(lab(op[1]), lab(op[2])))
            else:
                out.append(Halt())
        return Program(tuple(out), self.k)
