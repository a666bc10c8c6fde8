"""Additive BSS RAM programs: instruction set, assembly text, interpreter.

Labels are the positions 1..N of the instructions; a non-jump instruction
falls through to the next label, so the last instruction must be a jump
or ``halt``. Input ``(x_1, ..., x_n)`` is loaded into
``Z_1..Z_n`` and every index register starts at ``n``. A halting machine
outputs ``(Z_1, ..., Z_{I_1})``, the same tuple an oracle instruction asks
about. Unwritten registers read as 0.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, Optional, Sequence, Union

from .reals import ONE, ZERO, RealValue, format_value, make_rational, parse_value, sign


class MachineError(Exception):
    pass


class ProgramSyntaxError(MachineError):
    def __init__(self, msg, line, column=1):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


class UndefinedLabel(MachineError):
    def __init__(self, label, line=None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"undefined label {label}{where}")
        self.label = label


class IndexRegisterOutOfRange(MachineError):
    pass


class EmptyInput(MachineError):
    pass


class OracleMissing(MachineError):
    pass


# ---------------------------------------------------------------------------
# Instructions

@dataclass(frozen=True)
class Add:
    i: int
    j: int
    k: int


@dataclass(frozen=True)
class Sub:
    i: int
    j: int
    k: int


@dataclass(frozen=True)
class SetConst:
    j: int
    c: RealValue = ZERO

    def __post_init__(self):
        if not isinstance(self.c, RealValue):
            object.__setattr__(self, "c", make_rational(self.c))


@dataclass(frozen=True)
class EqTest:
    j: int
    l1: int
    l2: int


@dataclass(frozen=True)
class GeTest:
    j: int
    l1: int
    l2: int


@dataclass(frozen=True)
class CopyIndirect:
    j: int
    k: int


@dataclass(frozen=True)
class IndexSet:
    j: int


@dataclass(frozen=True)
class IndexInc:
    j: int


@dataclass(frozen=True)
class IndexTest:
    j: int
    k: int
    l1: int
    l2: int


@dataclass(frozen=True)
class OracleTest:
    l1: int
    l2: int


@dataclass(frozen=True)
class Halt:
    pass


Instruction = Union[Add, Sub, SetConst, EqTest, GeTest, CopyIndirect, IndexSet,
                    IndexInc, IndexTest, OracleTest, Halt]


def jump_targets(ins) -> tuple[int, ...]:
    if isinstance(ins, (EqTest, GeTest, IndexTest, OracleTest)):
        return (ins.l1, ins.l2)
    return ()


def falls_through(ins) -> bool:
    """Does control pass to the next label after ``ins``?"""
    return not isinstance(ins, (EqTest, GeTest, IndexTest, OracleTest, Halt))


def index_registers_used(ins) -> tuple[int, ...]:
    if isinstance(ins, (CopyIndirect, IndexTest)):
        return (ins.j, ins.k)
    if isinstance(ins, (IndexSet, IndexInc)):
        return (ins.j,)
    return ()


def data_registers_used(ins) -> tuple[int, ...]:
    if isinstance(ins, (Add, Sub)):
        return (ins.i, ins.j, ins.k)
    if isinstance(ins, (SetConst, EqTest, GeTest)):
        return (ins.j,)
    return ()


# ---------------------------------------------------------------------------
# Dialects

class Dialect(enum.Enum):
    """Machine classes, ordered by what they admit.

    ``ADD1EQ`` is M_add^{1,=} (constants 0/1, equality tests only), ``ADD1``
    is M_add^1 (adds order tests), ``ADD`` admits arbitrary constants. The
    ``_O`` variants also admit oracle instructions.
    """

    ADD1EQ = ("M_add^{1,=}", 0, False)
    ADD1 = ("M_add^1", 1, False)
    ADD = ("M_add", 2, False)
    ADD1EQ_O = ("M_add^{1,=}(O)", 0, True)
    ADD1_O = ("M_add^1(O)", 1, True)
    ADD_O = ("M_add(O)", 2, True)

    def __init__(self, label, level, oracle):
        self.label = label
        self.level = level
        self.oracle = oracle

    def admits(self, other: "Dialect") -> bool:
        return other.level <= self.level and (self.oracle or not other.oracle)

    def with_oracle(self, oracle: bool = True) -> "Dialect":
        return _by_level(self.level, oracle)

    @classmethod
    def from_name(cls, name: str) -> "Dialect":
        key = name.strip().lower().replace("-", "_")
        aliases = {
            "add1eq": cls.ADD1EQ, "add1": cls.ADD1, "add": cls.ADD,
            "add1eq_o": cls.ADD1EQ_O, "add1_o": cls.ADD1_O, "add_o": cls.ADD_O,
            "add1eq_oracle": cls.ADD1EQ_O, "add1_oracle": cls.ADD1_O, "add_oracle": cls.ADD_O,
        }
        for d in cls:
            aliases[d.label.lower()] = d
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown dialect {name!r}") from None


def instruction_dialect(ins) -> Dialect:
    level = 0
    if isinstance(ins, GeTest):
        level = 1
    elif isinstance(ins, SetConst) and ins.c not in (ZERO, ONE):
        level = 2
    return _by_level(level, isinstance(ins, OracleTest))


def _by_level(level, oracle) -> Dialect:
    for d in Dialect:
        if d.level == level and d.oracle == oracle:
            return d
    raise AssertionError


# ---------------------------------------------------------------------------
# Programs

@dataclass(frozen=True)
class Program:
    instructions: tuple
    k: int = 1  # number of index registers

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if not self.instructions:
            raise MachineError("a program needs at least one instruction")
        if self.k < 1:
            raise IndexRegisterOutOfRange("a program has at least one index register")
        n = len(self.instructions)
        if falls_through(self.instructions[-1]):
            raise UndefinedLabel(n + 1, n)
        for pos, ins in enumerate(self.instructions, start=1):
            for lab in jump_targets(ins):
                if not 1 <= lab <= n:
                    raise UndefinedLabel(lab, pos)
            for r in index_registers_used(ins):
                if not 1 <= r <= self.k:
                    raise IndexRegisterOutOfRange(
                        f"instruction {pos}: I{r} outside 1..{self.k}")
            for r in data_registers_used(ins):
                if r < 1:
                    raise MachineError(f"instruction {pos}: register Z{r}")

    def __len__(self):
        return len(self.instructions)

    @cached_property
    def dialect(self) -> Dialect:
        level = 0
        oracle = False
        for ins in self.instructions:
            d = instruction_dialect(ins)
            level = max(level, d.level)
            oracle = oracle or d.oracle
        return _by_level(level, oracle)

    def instruction(self, label: int):
        return self.instructions[label - 1]

    @cached_property
    def _compiled(self):
        return _compile(self)


TRIVIAL = Program((Halt(),), 1)


# ---------------------------------------------------------------------------
# Assembly text

_LINE_PATTERNS = [
    ("add", re.compile(r"add\s+Z(\d+)\s*=\s*Z(\d+)\s*\+\s*Z(\d+)$")),
    ("sub", re.compile(r"sub\s+Z(\d+)\s*=\s*Z(\d+)\s*-\s*Z(\d+)$")),
    ("set", re.compile(r"set\s+Z(\d+)\s*=\s*(.+)$")),
    ("eq", re.compile(r"eq\s+Z(\d+)\s*->\s*(\d+)\s*,\s*(\d+)$")),
    ("ge", re.compile(r"ge\s+Z(\d+)\s*->\s*(\d+)\s*,\s*(\d+)$")),
    ("copy", re.compile(r"copy\s+Z\[\s*I(\d+)\s*\]\s*=\s*Z\[\s*I(\d+)\s*\]$")),
    ("idx", re.compile(r"idx\s+I(\d+)\s*=\s*1$")),
    ("inc", re.compile(r"inc\s+I(\d+)$")),
    ("ieq", re.compile(r"ieq\s+I(\d+)\s*,\s*I(\d+)\s*->\s*(\d+)\s*,\s*(\d+)$")),
    ("oracle", re.compile(r"oracle\s*->\s*(\d+)\s*,\s*(\d+)$")),
    ("halt", re.compile(r"halt$")),
]

_BUILD = {
    "add": lambda g: Add(*map(int, g)),
    "sub": lambda g: Sub(*map(int, g)),
    "eq": lambda g: EqTest(*map(int, g)),
    "ge": lambda g: GeTest(*map(int, g)),
    "copy": lambda g: CopyIndirect(*map(int, g)),
    "idx": lambda g: IndexSet(int(g[0])),
    "inc": lambda g: IndexInc(int(g[0])),
    "ieq": lambda g: IndexTest(*map(int, g)),
    "oracle": lambda g: OracleTest(*map(int, g)),
    "halt": lambda g: Halt(),
}

_LABEL_RE = re.compile(r"\s*(\d+)\s*:\s*")
_DIRECTIVE_RE = re.compile(r"\s*\.indices\s+(\d+)\s*$")


def parse_program(text: str) -> Program:
    """Parse assembly text; see the README for the grammar."""
    instructions = []
    lines = []
    k_declared = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        d = _DIRECTIVE_RE.match(line)
        if d:
            if instructions or k_declared is not None:
                raise ProgramSyntaxError(".indices must come first, once", lineno)
            k_declared = int(d.group(1))
            continue
        m = _LABEL_RE.match(line)
        if not m:
            raise ProgramSyntaxError("expected '<label>:'", lineno, len(line) - len(line.lstrip()) + 1)
        label = int(m.group(1))
        if label != len(instructions) + 1:
            raise ProgramSyntaxError(
                f"label {label} out of sequence, expected {len(instructions) + 1}", lineno, m.start(1) + 1)
        body = line[m.end():].strip()
        col = m.end() + 1
        for name, pat in _LINE_PATTERNS:
            pm = pat.match(body)
            if pm:
                if name == "set":
                    try:
                        c = parse_value(pm.group(2))
                    except (ValueError, ZeroDivisionError) as exc:
                        raise ProgramSyntaxError(f"bad constant: {exc}", lineno, col) from None
                    ins = SetConst(int(pm.group(1)), c)
                else:
                    ins = _BUILD[name](pm.groups())
                break
        else:
            raise ProgramSyntaxError(f"unrecognised instruction {body!r}", lineno, col)
        instructions.append(ins)
        lines.append(lineno)
    if not instructions:
        raise ProgramSyntaxError("empty program", 1)
    n = len(instructions)
    if falls_through(instructions[-1]):
        raise UndefinedLabel(n + 1, lines[-1])
    needed = 1
    for pos, ins in enumerate(instructions):
        for lab in jump_targets(ins):
            if not 1 <= lab <= n:
                raise UndefinedLabel(lab, lines[pos])
        for r in index_registers_used(ins):
            if r < 1:
                raise IndexRegisterOutOfRange(f"line {lines[pos]}: I{r}")
            needed = max(needed, r)
            if k_declared is not None and r > k_declared:
                raise IndexRegisterOutOfRange(
                    f"line {lines[pos]}: I{r} exceeds .indices {k_declared}")
        for r in data_registers_used(ins):
            if r < 1:
                raise ProgramSyntaxError(f"register Z{r}", lines[pos])
    return Program(tuple(instructions), k_declared if k_declared is not None else needed)


def format_instruction(ins) -> str:
    if isinstance(ins, Add):
        return f"add Z{ins.i} = Z{ins.j} + Z{ins.k}"
    if isinstance(ins, Sub):
        return f"sub Z{ins.i} = Z{ins.j} - Z{ins.k}"
    if isinstance(ins, SetConst):
        return f"set Z{ins.j} = {format_value(ins.c)}"
    if isinstance(ins, EqTest):
        return f"eq Z{ins.j} -> {ins.l1}, {ins.l2}"
    if isinstance(ins, GeTest):
        return f"ge Z{ins.j} -> {ins.l1}, {ins.l2}"
    if isinstance(ins, CopyIndirect):
        return f"copy Z[I{ins.j}] = Z[I{ins.k}]"
    if isinstance(ins, IndexSet):
        return f"idx I{ins.j} = 1"
    if isinstance(ins, IndexInc):
        return f"inc I{ins.j}"
    if isinstance(ins, IndexTest):
        return f"ieq I{ins.j}, I{ins.k} -> {ins.l1}, {ins.l2}"
    if isinstance(ins, OracleTest):
        return f"oracle -> {ins.l1}, {ins.l2}"
    if isinstance(ins, Halt):
        return "halt"
    raise TypeError(f"not an instruction: {ins!r}")


def emit_program(p: Program) -> str:
    out = [f".indices {p.k}"]
    out.extend(f"{n}: {format_instruction(ins)}" for n, ins in enumerate(p.instructions, start=1))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Oracles

@dataclass(frozen=True)
class OracleSpec:
    name: str
    contains: Callable[[tuple], bool] = field(compare=False)

    def __call__(self, query: tuple) -> bool:
        return bool(self.contains(query))


EMPTY_ORACLE = OracleSpec("empty", lambda q: False)


def finite_set_oracle(members, name="finite") -> OracleSpec:
    """Oracle for a finite set of tuples (or of single values)."""
    table = set()
    for m in members:
        if not isinstance(m, (tuple, list)):
            m = (m,)
        table.add(tuple(v if isinstance(v, RealValue) else make_rational(v) for v in m))
    frozen = frozenset(table)
    return OracleSpec(name, lambda q: tuple(q) in frozen)


class RecordingOracle:
    """Wraps an oracle and keeps every queried tuple."""

    def __init__(self, inner: OracleSpec):
        self.inner = inner
        self.name = inner.name
        self.queries: list[tuple] = []

    def __call__(self, query):
        self.queries.append(query)
        return self.inner(query)


# ---------------------------------------------------------------------------
# Execution

@dataclass
class MachineState:
    pc: int
    Z: dict
    I: list
    steps: int = 0

    def copy(self) -> "MachineState":
        return MachineState(self.pc, dict(self.Z), list(self.I), self.steps)

    def reg(self, r: int) -> RealValue:
        return self.Z.get(r, ZERO)


@dataclass(frozen=True)
class Halted:
    output: tuple
    halted_at: int
    state: MachineState = field(compare=False, repr=False)


@dataclass(frozen=True)
class Running:
    state: MachineState


def init_state(p: Program, inputs: Sequence) -> MachineState:
    inputs = tuple(inputs)
    if not inputs:
        raise EmptyInput("input tuple must be nonempty")
    Z = {}
    for n, x in enumerate(inputs, start=1):
        x = make_rational(x)
        if x != ZERO:
            Z[n] = x
    return MachineState(1, Z, [len(inputs)] * p.k, 0)


# opcodes for the compiled form
_ADD, _SUB, _SET, _EQ, _GE, _COPY, _IDX, _INC, _IEQ, _ORA, _HALT = range(11)


def _compile(p: Program):
    code = [None]
    for ins in p.instructions:
        if isinstance(ins, Add):
            code.append((_ADD, ins.i, ins.j, ins.k))
        elif isinstance(ins, Sub):
            code.append((_SUB, ins.i, ins.j, ins.k))
        elif isinstance(ins, SetConst):
            code.append((_SET, ins.j, ins.c))
        elif isinstance(ins, EqTest):
            code.append((_EQ, ins.j, ins.l1, ins.l2))
        elif isinstance(ins, GeTest):
            code.append((_GE, ins.j, ins.l1, ins.l2))
        elif isinstance(ins, CopyIndirect):
            code.append((_COPY, ins.j - 1, ins.k - 1))
        elif isinstance(ins, IndexSet):
            code.append((_IDX, ins.j - 1))
        elif isinstance(ins, IndexInc):
            code.append((_INC, ins.j - 1))
        elif isinstance(ins, IndexTest):
            code.append((_IEQ, ins.j - 1, ins.k - 1, ins.l1, ins.l2))
        elif isinstance(ins, OracleTest):
            code.append((_ORA, ins.l1, ins.l2))
        else:
            code.append((_HALT,))
    return tuple(code)


def _store(Z, r, v):
    if v.constant == 0 and not v.coeffs:
        Z.pop(r, None)
    else:
        Z[r] = v


def _output(s: MachineState) -> tuple:
    return tuple(s.Z.get(r, ZERO) for r in range(1, s.I[0] + 1))


def _execute(s: MachineState, code, oracle):
    """Run one instruction in place; return the changed cell or the output."""
    op = code[s.pc]
    kind = op[0]
    Z = s.Z
    s.steps += 1
    if kind == _ADD or kind == _SUB:
        a = Z.get(op[2], ZERO)
        b = Z.get(op[3], ZERO)
        if kind == _ADD:
            if not a.coeffs and not b.coeffs:
                v = make_rational(a.constant + b.constant)
            else:
                v = a + b
        else:
            if not a.coeffs and not b.coeffs:
                v = make_rational(a.constant - b.constant)
            else:
                v = a - b
        _store(Z, op[1], v)
        s.pc += 1
        return ("Z", op[1])
    if kind == _SET:
        _store(Z, op[1], op[2])
        s.pc += 1
        return ("Z", op[1])
    if kind == _EQ:
        v = Z.get(op[1], ZERO)
        s.pc = op[2] if (v.constant == 0 and not v.coeffs) else op[3]
        return None
    if kind == _GE:
        v = Z.get(op[1], ZERO)
        if v.coeffs:
            ok = sign(v) >= 0
        else:
            ok = v.constant >= 0
        s.pc = op[2] if ok else op[3]
        return None
    if kind == _COPY:
        src = Z.get(s.I[op[2]], ZERO)
        _store(Z, s.I[op[1]], src)
        s.pc += 1
        return ("Z", s.I[op[1]])
    if kind == _IDX:
        s.I[op[1]] = 1
        s.pc += 1
        return ("I", op[1] + 1)
    if kind == _INC:
        s.I[op[1]] += 1
        s.pc += 1
        return ("I", op[1] + 1)
    if kind == _IEQ:
        s.pc = op[3] if s.I[op[1]] == s.I[op[2]] else op[4]
        return None
    if kind == _ORA:
        if oracle is None:
            s.steps -= 1
            raise OracleMissing(f"oracle instruction at label {s.pc} with no oracle attached")
        s.pc = op[1] if oracle(_output(s)) else op[2]
        return None
    return Halted(_output(s), s.steps, s)


def step(s: MachineState, p: Program, oracle=None):
    """Execute one instruction, advancing ``s`` in place.

    Returns ``s`` or, when the instruction was ``halt``, a :class:`Halted`.
    """
    res = _execute(s, p._compiled, oracle)
    if isinstance(res, Halted):
        return res
    return s


def resume(s: MachineState, p: Program, oracle, t: int):
    """Run at most ``t`` further steps from ``s`` (mutated)."""
    code = p._compiled
    limit = s.steps + t
    while s.steps < limit:
        res = _execute(s, code, oracle)
        if isinstance(res, Halted):
            return res
    return Running(s)


def run_bounded(p: Program, inputs, oracle=None, t: int = 1000):
    """Run ``p`` on ``inputs`` for at most ``t`` steps."""
    if t < 0:
        raise ValueError("step budget must be non-negative")
    return resume(init_state(p, inputs), p, oracle, t)


def trace(p: Program, inputs, oracle=None, t: int = 1000) -> Iterator[dict]:
    """Yield one record per executed step.

    Records hold ``step``, ``label``, ``instr``, ``changed_cell`` and
    ``value`` (text form), plus ``output`` on the halting step.
    """
    s = init_state(p, inputs)
    code = p._compiled
    while s.steps < t:
        label = s.pc
        res = _execute(s, code, oracle)
        rec = {"step": s.steps, "label": label,
               "instr": format_instruction(p.instruction(label)),
               "changed_cell": None, "value": None}
        if isinstance(res, Halted):
            rec["output"] = [format_value(v) for v in res.output]
            yield rec
            return
        if res is not None:
            bank, r = res
            rec["changed_cell"] = f"{bank}{r}"
            rec["value"] = format_value(s.reg(r)) if bank == "Z" else str(s.I[r - 1])
        yield rec


def trace_jsonl(p: Program, inputs, oracle=None, t: int = 1000) -> str:
    return "".join(json.dumps(rec, sort_keys=False) + "\n" for rec in trace(p, inputs, oracle, t))


def branch_sequence(p: Program, inputs, oracle=None, t: int = 1000) -> tuple[list[int], Optional[Halted]]:
    """Labels visited in order (at most ``t`` steps) and the halt record, if any."""
    s = init_state(p, inputs)
    code = p._compiled
    labels = []
    while s.steps < t:
        labels.append(s.pc)
        res = _execute(s, code, oracle)
        if isinstance(res, Halted):
            return labels, res
    return labels, None
