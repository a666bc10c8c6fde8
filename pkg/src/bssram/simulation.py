"""Bounded universal simulation: halting pairs, enumerators and snapshots.

Halting pairs of a machine are found by dovetailing. In round ``r`` the input
``r`` is started, and every pending input ``n <= r`` is run until it has
used ``r`` steps in total. Exact halts discovered in the round are emitted
ordered by ``(t, n)``. Each input halts at most once, so the emitted inputs
are distinct, and the enumeration after more rounds extends the earlier one.

``W_{i,s}`` is the set of inputs emitted within the first ``s`` rounds for
the ``i``-th machine of M_add^{1,=}; it is monotone in ``s``.
"""

from __future__ import annotations

import threading
from bisect import bisect_right
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional

from .encoding import machine_at
from .machine import (EMPTY_ORACLE, Dialect, Halted, OracleSpec, Program, init_state,
                      resume, run_bounded)


@dataclass(frozen=True)
class HaltingPair:
    n: int
    t: int


@dataclass(frozen=True)
class EnumerationSnapshot:
    i: int
    s: int
    members: frozenset


class NotYet:
    """Marker: the requested output is not reachable within the budget."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NotYet"

    def __bool__(self):
        return False


NOT_YET = NotYet()


class HaltingEnumerator:
    """Incremental dovetailer for one oracle-free program."""

    def __init__(self, program: Program):
        if program.dialect.oracle:
            raise ValueError("halting-pair enumeration needs an oracle-free program")
        self.program = program
        self.rounds = 0
        self.pairs: list[HaltingPair] = []
        self.emitted_in: list[int] = []  # round of each pair
        self._pending: dict[int, object] = {}
        self._members: OrderedDict[int, frozenset] = OrderedDict()
        self._lock = threading.Lock()

    def advance(self, rounds: int) -> None:
        """Run dovetail rounds until ``rounds`` have been completed."""
        with self._lock:
            while self.rounds < rounds:
                self._round()

    def _round(self):
        r = self.rounds + 1
        self._pending[r] = init_state(self.program, (r,))
        found = []
        for n in list(self._pending):
            state = self._pending[n]
            res = resume(state, self.program, None, r - state.steps)
            if isinstance(res, Halted):
                found.append(HaltingPair(n, res.halted_at))
                del self._pending[n]
        found.sort(key=lambda hp: (hp.t, hp.n))
        self.pairs.extend(found)
        self.emitted_in.extend([r] * len(found))
        self.rounds = r

    def pairs_within(self, rounds: int) -> list[HaltingPair]:
        self.advance(rounds)
        return self.pairs[:bisect_right(self.emitted_in, rounds)]

    def members_within(self, rounds: int) -> frozenset:
        hit = self._members.get(rounds)
        if hit is None:
            hit = frozenset(hp.n for hp in self.pairs_within(rounds))
            self._members[rounds] = hit
            if len(self._members) > 8:
                self._members.popitem(last=False)
        return hit


_enumerators: dict[Program, HaltingEnumerator] = {}
_enum_lock = threading.Lock()


def enumerator_for(p: Program) -> HaltingEnumerator:
    """Shared enumerator per program; machines with equal programs share work."""
    with _enum_lock:
        e = _enumerators.get(p)
        if e is None:
            e = _enumerators[p] = HaltingEnumerator(p)
        return e


def enumerate_halting_pairs(p: Program, budget: int) -> list[HaltingPair]:
    """Halting pairs of ``p`` found within ``budget`` dovetail rounds."""
    return list(enumerator_for(p).pairs_within(budget))


def n_machine(i: int) -> Program:
    """The ``i``-th machine of M_add^{1,=}."""
    return machine_at(i, Dialect.ADD1EQ)


def nbar_output(i: int, j: int, budget: int):
    """The ``j``-th enumerated input of machine ``i``, or ``NOT_YET``."""
    if i < 1 or j < 1:
        raise ValueError("i and j are positive")
    pairs = enumerate_halting_pairs(n_machine(i), budget)
    return pairs[j - 1].n if len(pairs) >= j else NOT_YET


def snapshot_W(i: int, s: int, program: Optional[Program] = None) -> EnumerationSnapshot:
    """``W_{i,s}``: inputs enumerated for machine ``i`` within ``s`` rounds."""
    p = program if program is not None else n_machine(i)
    return EnumerationSnapshot(i, s, enumerator_for(p).members_within(max(s, 0)))


@dataclass(frozen=True)
class DiagonalVerdict:
    halted: bool
    steps: int

    def __str__(self):
        return f"yes_at({self.steps})" if self.halted else "not_within_t"


def diagonal_halts(k: int, oracle: OracleSpec = None, t: int = 1000) -> DiagonalVerdict:
    """Does the ``k``-th oracle machine halt on input ``k`` within ``t`` steps?"""
    if k < 1:
        raise ValueError("k is positive")
    p = machine_at(k, Dialect.ADD1, oracle=True)
    res = run_bounded(p, (k,), oracle if oracle is not None else EMPTY_ORACLE, t)
    if isinstance(res, Halted):
        return DiagonalVerdict(True, res.halted_at)
    return DiagonalVerdict(False, t)


def exact_halting_check(p: Program, n: int, t: int) -> bool:
    """``p`` halts on ``(n)`` after exactly ``t`` steps."""
    res = run_bounded(p, (n,), None, t)
    if not isinstance(res, Halted) or res.halted_at != t:
        return False
    return t == 0 or not isinstance(run_bounded(p, (n,), None, t - 1), Halted)
