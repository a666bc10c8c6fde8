"""Finite-stage construction of the simple low set A = union of A_s.

At stage ``s`` (starting from ``A_1 = {}``):

* ``a(j, s)`` is the largest integer queried by oracle machine ``j`` on input
  ``j`` with oracle ``A_s`` if it halts within ``s`` steps, else 0;
* ``phi(i, s, x)`` holds when ``2i < x`` and ``a(j, s) < x`` for all ``j <= i``;
* ``I_s`` collects the ``i <= s`` whose snapshot ``W_{i,s}`` misses ``A_s`` and
  has an element satisfying ``phi``;
* if ``I_s`` is nonempty, its least element is the active index and the least
  such element of its snapshot joins ``A``.

The enumerators behind ``W_{i,s}`` and the oracle machines behind ``a(j, s)``
are pluggable, so the combinatorics can be exercised with synthetic lists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Optional, Protocol

from .assembler import ProgramBuilder
from .encoding import machine_at
from .machine import (Dialect, Halted, OracleSpec, Program, RecordingOracle, init_state,
                      parse_program, resume)
from .reals import RealValue
from .simulation import enumerator_for, n_machine


# ---------------------------------------------------------------------------
# enumerator lists

class Enumerators(Protocol):
    def snapshot(self, i: int, s: int) -> frozenset: ...

    def candidates(self, s: int) -> Iterable[int]:
        """Indices ``i <= s`` whose snapshot may be nonempty, ascending."""
        ...


class GenuineEnumerators:
    """``W_i`` from the enumeration of M_add^{1,=} codes."""

    def snapshot(self, i, s):
        return enumerator_for(_n_machine(i)).members_within(s)

    def candidates(self, s):
        return range(1, s + 1)


@lru_cache(maxsize=None)
def _n_machine(i):
    return n_machine(i)


@dataclass(frozen=True)
class Progression:
    """``start + step*m`` emitted at stage ``delay + period*(m+1)``."""

    start: int
    step: int = 1
    delay: int = 0
    period: int = 1
    limit: Optional[int] = None  # number of elements; None means infinite

    def members(self, s):
        m = max(0, (s - self.delay) // self.period)
        if self.limit is not None:
            m = min(m, self.limit)
        return frozenset(self.start + self.step * r for r in range(m))

    @property
    def infinite(self):
        return self.limit is None


@dataclass(frozen=True)
class FiniteList:
    """Listed members emitted one per ``period`` stages after ``delay``."""

    items: tuple
    delay: int = 0
    period: int = 1

    def members(self, s):
        m = max(0, (s - self.delay) // self.period)
        return frozenset(self.items[:m])

    infinite = False


@dataclass(frozen=True)
class ProgramEnumerator:
    """Snapshots of a real M_add^{1,=} program via dovetailing."""

    program: Program

    def members(self, s):
        return enumerator_for(self.program).members_within(s)

    infinite = None  # unknown in general


class SyntheticEnumerators:
    """An injected list: given indices get a known ``W_i``, the rest are empty."""

    def __init__(self, table: Mapping[int, object]):
        self.table = dict(table)
        self._order = sorted(self.table)

    def snapshot(self, i, s):
        e = self.table.get(i)
        return e.members(s) if e is not None else frozenset()

    def candidates(self, s):
        for i in self._order:
            if i > s:
                break
            yield i


def default_machines(j: int) -> Program:
    return machine_at(j, Dialect.ADD1, oracle=True)


class SyntheticMachines:
    """Oracle machines: injected programs at some indices, the real list elsewhere."""

    def __init__(self, table: Mapping[int, Program], fallback: Callable[[int], Program] = default_machines):
        self.table = dict(table)
        self.fallback = fallback

    def __call__(self, j):
        p = self.table.get(j)
        return p if p is not None else self.fallback(j)


def load_synthetic(source) -> tuple[SyntheticEnumerators, SyntheticMachines]:
    """Read a fixture (path, JSON text or dict).

    ``{"enumerators": {"<i>": {"kind": "progression"|"finite"|"program", ...}},
       "machines": {"<j>": "<assembly text>"}}``
    """
    if isinstance(source, Mapping):
        data = source
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            with open(text) as fh:
                text = fh.read()
        data = json.loads(text)
    table = {}
    for key, spec in data.get("enumerators", {}).items():
        kind = spec.get("kind", "progression")
        if kind == "progression":
            table[int(key)] = Progression(int(spec["start"]), int(spec.get("step", 1)),
                                          int(spec.get("delay", 0)), int(spec.get("period", 1)),
                                          spec.get("limit"))
        elif kind == "finite":
            table[int(key)] = FiniteList(tuple(int(v) for v in spec["members"]),
                                         int(spec.get("delay", 0)), int(spec.get("period", 1)))
        elif kind == "program":
            table[int(key)] = ProgramEnumerator(parse_program(spec["program"]))
        else:
            raise ValueError(f"unknown enumerator kind {kind!r}")
    machines = {int(k): parse_program(v) for k, v in data.get("machines", {}).items()}
    return SyntheticEnumerators(table), SyntheticMachines(machines)


# ---------------------------------------------------------------------------
# oracle runs

def set_oracle(A: frozenset) -> OracleSpec:
    """Membership in a finite set of naturals; other tuples answer "out"."""
    def contains(q):
        if len(q) != 1:
            return False
        v = q[0]
        return v.is_integer() and v.constant in A
    return OracleSpec(f"A[{len(A)}]", contains)


def _max_queried_integer(queries) -> int:
    best = 0
    for q in queries:
        for v in q:
            if v.is_integer() and v.constant > best:
                best = v.constant
    return best


@dataclass
class OracleRunResult:
    halted: bool
    steps: int
    output: Optional[tuple]
    queries: tuple


class _OracleRun:
    """Resumable run of one machine on its own index with a fixed oracle set."""

    def __init__(self, program: Program, j: int, A: frozenset):
        self.program = program
        self.A = A
        self.oracle = RecordingOracle(set_oracle(A))
        self.state = init_state(program, (j,))
        self.halt: Optional[Halted] = None

    def upto(self, s: int) -> OracleRunResult:
        if self.halt is None and self.state.steps < s:
            res = resume(self.state, self.program, self.oracle, s - self.state.steps)
            if isinstance(res, Halted):
                self.halt = res
        if self.halt is not None and self.halt.halted_at <= s:
            return OracleRunResult(True, self.halt.halted_at, self.halt.output, tuple(self.oracle.queries))
        return OracleRunResult(False, s, None, ())


class OracleRuns:
    """Cache of runs keyed by machine index; restarted when the oracle set changes."""

    def __init__(self, machines: Callable[[int], Program]):
        self.machines = machines
        self._runs: dict[int, _OracleRun] = {}

    def result(self, j: int, s: int, A: frozenset) -> OracleRunResult:
        run = self._runs.get(j)
        if run is None or run.A != A or (run.halt is None and run.state.steps > s):
            run = self._runs[j] = _OracleRun(self.machines(j), j, A)
        return run.upto(s)


def query_bound(j: int, s: int, A_s: frozenset, machines: Callable[[int], Program] = default_machines,
                runs: Optional[OracleRuns] = None) -> int:
    """``a(j, s)``."""
    if runs is None:
        runs = OracleRuns(machines)
    r = runs.result(j, s, frozenset(A_s))
    return _max_queried_integer(r.queries) if r.halted else 0


def phi(i: int, s: int, x: int, bounds: Mapping[int, int]) -> bool:
    """``2i < x`` and ``a(j, s) < x`` for every ``j <= i``."""
    return 2 * i < x and all(bounds[j] < x for j in range(1, i + 1))


# ---------------------------------------------------------------------------
# stages

@dataclass(frozen=True)
class StageRecord:
    s: int
    A: frozenset
    active_history: tuple = ()          # (stage, i_s, x)
    satisfied: frozenset = frozenset()  # indices whose W met A when last seen
    I_prev: tuple = ()                  # I_{s-1}, for logging


class _LazyBounds(dict):
    def __init__(self, fn):
        super().__init__()
        self.fn = fn

    def __missing__(self, j):
        v = self[j] = self.fn(j)
        return v


class PriorityConstruction:
    def __init__(self, enumerators: Enumerators = None, machines: Callable[[int], Program] = None):
        self.enumerators = enumerators if enumerators is not None else GenuineEnumerators()
        self.machines = machines if machines is not None else default_machines
        self.runs = OracleRuns(self.machines)
        self.records: list[StageRecord] = [StageRecord(1, frozenset())]
        self.stage_log: list[dict] = []

    def bounds(self, s: int, A: frozenset) -> _LazyBounds:
        return _LazyBounds(lambda j: query_bound(j, s, A, self.machines, self.runs))

    def stage_step(self, r: StageRecord) -> StageRecord:
        s, A = r.s, r.A
        bounds = self.bounds(s, A)
        I_s = []
        choice = None
        satisfied = set(r.satisfied)
        for i in self.enumerators.candidates(s):
            if i > s:
                break
            W = self.enumerators.snapshot(i, s)
            if not W:
                continue
            if A & W:
                satisfied.add(i)
                continue
            xs = [x for x in sorted(W) if phi(i, s, x, bounds)]
            if xs:
                I_s.append(i)
                if choice is None:
                    choice = (i, xs[0])
        history = r.active_history
        if choice is not None:
            i_s, x = choice
            A = A | {x}
            history = history + ((s, i_s, x),)
            satisfied.add(i_s)
        self.stage_log.append({"s": s, "I_s": I_s, "i_s": choice[0] if choice else None,
                               "x": choice[1] if choice else None, "A_size": len(A)})
        return StageRecord(s + 1, A, history, frozenset(satisfied), tuple(I_s))

    def record(self, s: int) -> StageRecord:
        """The record at the start of stage ``s`` (holding ``A_s``)."""
        while len(self.records) < s:
            self.records.append(self.stage_step(self.records[-1]))
        return self.records[s - 1]

    def A(self, s: int) -> frozenset:
        return self.record(s).A

    def run(self, S: int) -> tuple[StageRecord, list[StageRecord]]:
        if S < 1:
            raise ValueError("S >= 1")
        self.record(S)
        return self.records[S - 1], list(self.records[:S])

    def verdict(self, n: int, t: int) -> OracleRunResult:
        """Run of machine ``n`` on ``n`` with oracle ``A_t`` for ``t`` steps."""
        return self.runs.result(n, t, self.A(t))


def stage_step(r: StageRecord, construction: PriorityConstruction) -> StageRecord:
    return construction.stage_step(r)


def run_stages(S: int, enumerators: Enumerators = None, machines=None):
    """Stages 1..S from ``A_1 = {}``; returns the final record and the history."""
    return PriorityConstruction(enumerators, machines).run(S)


# ---------------------------------------------------------------------------
# finite-horizon checks

def sparsity_violations(A: frozenset) -> list[int]:
    """Indices ``i >= 1`` with ``|A & {0..2i}| >= i``."""
    bad = []
    top = max(A, default=0)
    elems = sorted(A)
    count = 0
    pos = 0
    for i in range(1, top // 2 + 2):
        while pos < len(elems) and elems[pos] <= 2 * i:
            count += 1
            pos += 1
        if count >= i:
            bad.append(i)
    return bad


def lowness_violations(c: PriorityConstruction, n: int, S: int) -> list[tuple[int, int]]:
    """Stage pairs ``(t, t')`` where a settled halting verdict for ``n`` changes.

    After the last stage whose active index is below ``n``, a halt of machine
    ``n`` on ``n`` with oracle ``A_t`` within ``t`` steps must recur, with the
    same output and step count, at every later computed stage.
    """
    final, _ = c.run(S)
    settled_after = max((st for st, i, _ in final.active_history if i < n), default=0)
    bad = []
    anchor = None
    for t in range(settled_after + 1, S + 1):
        v = c.verdict(n, t)
        if anchor is None:
            if v.halted:
                anchor = (t, v)
            continue
        t0, v0 = anchor
        if not (v.halted and v.steps == v0.steps and v.output == v0.output):
            bad.append((t0, t))
    return bad


def repeated_active_indices(r: StageRecord) -> list[int]:
    seen, dup = set(), []
    for _, i, _ in r.active_history:
        if i in seen:
            dup.append(i)
        seen.add(i)
    return dup


# ---------------------------------------------------------------------------
# lowness witnesses

def stage_membership_hook(c: PriorityConstruction, stage_budget: int) -> OracleSpec:
    """Hook answering ``(x, s) -> x in A_s`` for ``s`` up to the horizon."""
    def contains(q):
        if len(q) != 2 or not all(v.is_integer() for v in q):
            return False
        x, s = q[0].constant, q[1].constant
        if s < 1 or s > stage_budget:
            return False
        return x in c.A(s)
    return OracleSpec("stage-membership", contains)


def stage_simulation_hook(c: PriorityConstruction, stage_budget: int) -> OracleSpec:
    """Hook answering ``(k, j) -> machine k halts on k with oracle A_j within j steps``."""
    def contains(q):
        if len(q) != 2 or not all(v.is_integer() for v in q):
            return False
        k, j = q[0].constant, q[1].constant
        if k < 1 or j < 1 or j > stage_budget:
            return False
        return c.verdict(k, j).halted
    return OracleSpec("stage-simulation", contains)


def _hooked_loop(first: int, second: int) -> Program:
    """Set ``Z1 := first``, ``Z2 := second``; repeat ``Z2 += 1`` until the hook answers "in"."""
    b = ProgramBuilder(k=1, first_free=3)
    b.prologue()
    b.const(1, first)
    b.const(2, second)
    b.idx(1)
    b.inc(1)
    b.label("loop")
    b.add(2, 2, "__one")
    b.oracle("done", "loop")
    b.label("done")
    b.halt()
    return b.build()


def _count_then_halt(n: Optional[int]) -> Program:
    b = ProgramBuilder(k=1, first_free=2)
    b.prologue()
    if n is None:
        b.label("forever")
        b.goto("forever")
        return b.build()
    b.const("c", n)
    b.label("loop")
    b.sub("c", "c", "__one")
    b.eq("c", "done", "loop")
    b.label("done")
    b.halt()
    return b.build()


def build_Lx(x: int, stage_budget: int, construction: PriorityConstruction = None,
             hook: bool = True) -> Program:
    """Machine halting iff ``x`` is enumerated into A (within the horizon).

    With ``hook=True`` the program walks ``s = 1, 2, ...`` and asks the
    stage-membership hook about ``(x, s)``; run it with
    :func:`stage_membership_hook`. With ``hook=False`` the horizon is
    precomputed: the program counts down the stage at which ``x`` entered
    ``A`` and halts, or loops forever when ``x`` is not in ``A_{stage_budget}``.
    """
    if x < 1:
        raise ValueError("x >= 1")
    if hook:
        return _hooked_loop(x, 0)
    c = construction if construction is not None else PriorityConstruction()
    entered = None
    for s in range(1, stage_budget + 1):
        if x in c.A(s):
            entered = s
            break
    return _count_then_halt(entered)


def build_Lik(i: int, k: int) -> Program:
    """Machine halting iff machine ``k`` halts on ``k`` with oracle ``A_j`` within ``j`` steps, some ``j > i``.

    Realised through :func:`stage_simulation_hook`: ``Z1 = k``, ``Z2 = j``
    starting at ``i``; each round increments ``j`` and asks the hook.
    """
    if i < 1 or k < 1:
        raise ValueError("i, k >= 1")
    return _hooked_loop(k, i)
