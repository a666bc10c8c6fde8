"""Decision problems over the reals and their semi-decision procedures.

* rationality and the affine dependence problems ``L_n``: the last component
  is ``q_0 + q_1 x_1 + ... + q_{n-1} x_{n-1}`` for rationals ``q``;
* the machine ``K`` semi-deciding ``x != sqrt(p_i)`` on inputs ``(i, x)``, the
  point sets ``P_i`` built from its code and the halting problems ``H_i``;
* the exclusion procedure selecting ``sqrt(p_k)`` among ``sqrt(p_1..p_i)``;
* path constraints ``k*x + l`` along a single-input computation and the search
  for rational inputs that follow the same path as an irrational one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import product
from typing import Iterator, Optional, Sequence

from .assembler import ProgramBuilder
from .encoding import INVALID, decode, encode
from .machine import (Add, CopyIndirect, Dialect, EqTest, GeTest, Halt, Halted, IndexInc,
                      IndexSet, IndexTest, MachineError, OracleSpec, OracleTest, Program,
                      SetConst, Sub, branch_sequence, init_state, parse_program, resume)
from .reals import (ONE, ZERO, RealValue, enclosure, floor_value, make_rational, sign,
                    sqrt_gen)


class PreconditionViolated(ValueError):
    pass


class SymbolicOverflow(AssertionError):
    pass


# ---------------------------------------------------------------------------
# primes and rationality

def _has_factorisation(p: int) -> bool:
    t = 2
    while t * t <= p:
        if p % t == 0:
            return True
        t += 1
    return False


def nth_prime(j: int) -> int:
    """``p_j`` with ``p_1 = 2``: count up from 2, keeping numbers with no factorisation."""
    if j < 1:
        raise ValueError("j >= 1")
    k, p = 1, 2
    while k < j:
        p += 1
        if not _has_factorisation(p):
            k += 1
    return p


def rationality_decide(x: RealValue) -> bool:
    return x.is_rational()


# ---------------------------------------------------------------------------
# L_n

@dataclass(frozen=True)
class LnVerdict:
    member: bool
    witness: Optional[tuple] = None  # (q_0, ..., q_{n-1})
    used: int = 0                    # candidates tried, for the semi-decision

    def __bool__(self):
        return self.member


def _coordinates(xs: Sequence[RealValue]):
    gens = sorted({g for x in xs for g, _ in x.coeffs})
    return gens, [[Fraction(x.constant)] + [Fraction(x.coeff(g)) for g in gens] for x in xs]


def _solve(columns: list[list[Fraction]], rhs: list[Fraction]) -> Optional[list[Fraction]]:
    """A solution of ``sum_c y_c * columns[c] = rhs`` over Q, free unknowns set to 0."""
    rows = len(rhs)
    ncols = len(columns)
    m = [[columns[c][r] for c in range(ncols)] + [rhs[r]] for r in range(rows)]
    pivots = []
    row = 0
    for col in range(ncols):
        piv = next((r for r in range(row, rows) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        lead = m[row][col]
        m[row] = [v / lead for v in m[row]]
        for r in range(rows):
            if r != row and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[row])]
        pivots.append(col)
        row += 1
        if row == rows:
            break
    for r in range(row, rows):
        if m[r][ncols] != 0:
            return None
    sol = [Fraction(0)] * ncols
    for r, col in enumerate(pivots):
        sol[col] = m[r][ncols]
    return sol


def _norm_q(q: Fraction):
    return q.numerator if q.denominator == 1 else q


def l_n_decide(xs: Sequence[RealValue]) -> LnVerdict:
    """Exact membership of ``xs`` in ``L_n`` with ``n = len(xs)``."""
    xs = tuple(make_rational(x) for x in xs)
    if not xs:
        raise ValueError("L_n needs a nonempty tuple")
    gens, coords = _coordinates(xs)
    dim = 1 + len(gens)
    unit = [Fraction(1)] + [Fraction(0)] * len(gens)
    columns = [unit] + coords[:-1]
    sol = _solve(columns, coords[-1])
    if sol is None:
        return LnVerdict(False)
    assert len(unit) == dim
    return LnVerdict(True, tuple(_norm_q(q) for q in sol))


def check_ln_witness(xs: Sequence[RealValue], witness: Sequence) -> bool:
    """``q_0 + sum q_i x_i == x_n`` by exact substitution."""
    xs = tuple(make_rational(x) for x in xs)
    total = make_rational(witness[0])
    for q, x in zip(witness[1:], xs[:-1]):
        total = total + x.scale(q)
    return total == xs[-1]


def height(q: Fraction) -> int:
    return abs(q.numerator) + q.denominator


def rationals_of_height(h: int) -> list[Fraction]:
    """All rationals ``p/q`` in lowest terms with ``|p| + q == h``, ascending."""
    if h < 1:
        return []
    if h == 1:
        return [Fraction(0)]
    out = []
    for q in range(1, h):
        p = h - q
        if math.gcd(p, q) == 1:
            out.append(Fraction(p, q))
            out.append(Fraction(-p, q))
    return sorted(out)


def rational_tuples(n: int) -> Iterator[tuple]:
    """Every tuple in Q^n exactly once, by increasing maximal height.

    Within a height level ``H`` the tuples come grouped by the first position
    holding a height-``H`` entry.
    """
    lower: list[Fraction] = []
    H = 0
    while True:
        H += 1
        new = rationals_of_height(H)
        upto = lower + new
        for k in range(n):
            for head in product(lower, repeat=k):
                for mid in new:
                    for tail in product(upto, repeat=n - 1 - k):
                        yield head + (mid,) + tail
        lower = upto


def spiral_index(qs: Sequence) -> int:
    """Position (from 0) of the tuple ``qs`` in :func:`rational_tuples`."""
    qs = tuple(Fraction(q) for q in qs)
    n = len(qs)
    H = max(height(q) for q in qs)
    lower = [q for h in range(1, H) for q in rationals_of_height(h)]
    new = rationals_of_height(H)
    upto = lower + new
    L, N, U = len(lower), len(new), len(upto)
    pos = {q: i for i, q in enumerate(upto)}
    k = next(j for j, q in enumerate(qs) if height(q) == H)
    idx = L ** n
    for j in range(k):
        idx += L ** j * N * U ** (n - 1 - j)
    inner = 0
    for q in qs[:k]:
        inner = inner * L + pos[q]
    inner = inner * N + (pos[qs[k]] - L)
    for q in qs[k + 1:]:
        inner = inner * U + pos[q]
    return idx + inner


def l_n_semidecide(xs: Sequence[RealValue], budget: int) -> LnVerdict:
    """Search the rational tuples in canonical order for a witness."""
    xs = tuple(make_rational(x) for x in xs)
    n = len(xs)
    gens, coords = _coordinates(xs)
    target = coords[-1]
    cols = coords[:-1]
    used = 0
    for qs in rational_tuples(n):
        if used >= budget:
            break
        used += 1
        ok = True
        for dim in range(len(target)):
            acc = qs[0] if dim == 0 else 0
            for q, c in zip(qs[1:], cols):
                if c[dim]:
                    acc += q * c[dim]
            if acc != target[dim]:
                ok = False
                break
        if ok:
            return LnVerdict(True, tuple(_norm_q(q) for q in qs), used)
    return LnVerdict(False, None, used)


# ---------------------------------------------------------------------------
# the machine K and the sets P_i, H_i

def rq_pairs() -> Iterator[tuple[int, int]]:
    """``(r, q)`` in N x N_+ by increasing ``r + q``, then increasing ``r``."""
    d = 0
    while True:
        d += 1
        for r in range(d):
            yield r, d - r


class _Comparator:
    """Compare a fixed real with many rationals, refining only near ties."""

    def __init__(self, x: RealValue):
        self.x = x
        self.iv = None if x.is_rational() else enclosure(x, 48)

    def cmp(self, q: Fraction) -> int:
        """sign(x - q)."""
        if self.iv is None:
            c = self.x.constant
            return (c > q) - (c < q)
        if q < self.iv.lo:
            return 1
        if q > self.iv.hi:
            return -1
        return sign(self.x - make_rational(q))


def kappa_condition(p: int, x_cmp: _Comparator, r: int, q: int) -> bool:
    """``(x < r/q and r^2/q^2 < p)`` or ``(x > r/q and r^2/q^2 > p)``."""
    c = x_cmp.cmp(Fraction(r, q))
    sq = r * r - p * q * q
    return (c < 0 and sq < 0) or (c > 0 and sq > 0)


@dataclass(frozen=True)
class KappaVerdict:
    halted: bool
    pair: Optional[tuple] = None
    used: int = 0

    def __bool__(self):
        return self.halted


def kappa_semidecide(i: int, x: RealValue, budget: int) -> KappaVerdict:
    """Native run of K on ``(i, x)``: halts iff some enumerated ``r/q`` separates."""
    if i < 1:
        raise ValueError("i >= 1")
    p = nth_prime(i)
    cmp = _Comparator(make_rational(x))
    used = 0
    for r, q in rq_pairs():
        if used >= budget:
            break
        used += 1
        if kappa_condition(p, cmp, r, q):
            return KappaVerdict(True, (r, q), used)
    return KappaVerdict(False, None, used)


def build_kappa() -> Program:
    """K as an M_add^1 program on input ``(i, x)`` in ``Z1, Z2``.

    It first counts ``n = 1, 2, ...`` until ``n = i`` (so it never halts unless
    ``i`` is a positive integer), computes ``p_i`` by the prime loop testing
    ``p != t*s`` for all ``t, s`` in ``2..p-1``, then walks the pairs ``(r, q)``
    in the order of :func:`rq_pairs`, comparing ``q*x`` with ``r`` and ``r*r``
    with ``p*q*q`` through repeated addition.
    """
    b = ProgramBuilder(k=1, first_free=3)
    b.prologue()
    one = "__one"
    i_reg, x_reg = 1, 2

    b.set("n", 0)
    b.label("find_i")
    b.add("n", "n", one)
    b.sub("d", "n", i_reg)
    b.eq("d", "prime", "find_i")

    b.label("prime")
    b.set("kk", 1)
    b.add("p", one, one)
    b.label("while")
    b.sub("d", i_reg, "kk")
    b.eq("d", "enum", "next_p")
    b.label("next_p")
    b.add("p", "p", one)
    b.add("t", one, one)
    b.label("t_loop")
    b.sub("d", "t", "p")
    b.eq("d", "is_prime", "t_body")
    b.label("t_body")
    b.add("prod", "t", "t")
    b.add("s", one, one)
    b.label("s_loop")
    b.sub("d", "s", "p")
    b.eq("d", "t_next", "s_body")
    b.label("s_body")
    b.sub("d", "prod", "p")
    b.eq("d", "while", "s_next")
    b.label("s_next")
    b.add("prod", "prod", "t")
    b.add("s", "s", one)
    b.goto("s_loop")
    b.label("t_next")
    b.add("t", "t", one)
    b.goto("t_loop")
    b.label("is_prime")
    b.add("kk", "kk", one)
    b.goto("while")

    b.label("enum")
    b.set("dd", 0)
    b.label("d_next")
    b.add("dd", "dd", one)
    b.set("r", 0)
    b.label("pair")
    b.sub("q", "dd", "r")
    b.multiply("qx", x_reg, "q")
    b.multiply("r2", "r", "r")
    b.multiply("q2", "q", "q")
    b.multiply("pq2", "q2", "p")
    b.sub("d1", "qx", "r")
    b.sub("d2", "r2", "pq2")
    b.ge("d1", "d1_nonneg", "below")
    b.label("below")          # x < r/q: need r^2 < p q^2
    b.ge("d2", "pair_next", "accept")
    b.label("d1_nonneg")
    b.eq("d1", "pair_next", "above")
    b.label("above")          # x > r/q: need r^2 > p q^2
    b.ge("d2", "d2_nonneg", "pair_next")
    b.label("d2_nonneg")
    b.eq("d2", "pair_next", "accept")
    b.label("pair_next")
    b.add("r", "r", one)
    b.sub("d", "r", "dd")
    b.eq("d", "d_next", "pair")
    b.label("accept")
    b.halt()
    return b.build()


@lru_cache(maxsize=1)
def kappa_program() -> Program:
    """The shipped program text of K."""
    text = resources.files("bssram").joinpath("programs/kappa.bss").read_text()
    return parse_program(text)


@lru_cache(maxsize=1)
def kappa_code() -> str:
    return encode(kappa_program())


@lru_cache(maxsize=1)
def _kappa_code_values() -> tuple:
    return tuple(ONE if b == "1" else ZERO for b in kappa_code())


def p_point(i: int, x) -> tuple:
    """``(2 . (i, x) . code(K))``."""
    return (make_rational(2), make_rational(i), make_rational(x)) + _kappa_code_values()


def _p_shape(point: Sequence[RealValue]) -> Optional[tuple[int, RealValue]]:
    """``(j, x)`` when ``point`` has the shape ``(2, j, x, code(K))``."""
    tail = _kappa_code_values()
    if len(point) != 3 + len(tail):
        return None
    if point[0] != make_rational(2):
        return None
    j = point[1]
    if not j.is_integer() or j.constant < 1:
        return None
    if tuple(point[3:]) != tail:
        return None
    return j.constant, point[2]


def p_i_member(point: Sequence, i: int) -> bool:
    point = tuple(make_rational(v) for v in point)
    shape = _p_shape(point)
    if shape is None or shape[0] != i:
        return False
    return point[2] != RealValue.generator(sqrt_gen(i))


def split_halting_point(point: Sequence[RealValue]) -> Optional[tuple[tuple, Program]]:
    """Split ``(n . x . code(M))`` using the leading ``n``; None if malformed."""
    point = tuple(make_rational(v) for v in point)
    if not point or not point[0].is_integer():
        return None
    n = point[0].constant
    if n < 1 or len(point) < n + 2:
        return None
    xs = point[1:n + 1]
    bits = []
    for v in point[n + 1:]:
        if v == ZERO:
            bits.append("0")
        elif v == ONE:
            bits.append("1")
        else:
            return None
    prog = decode("".join(bits))
    if prog is INVALID:
        return None
    return xs, prog


def halting_point(xs: Sequence, p: Program) -> tuple:
    xs = tuple(make_rational(x) for x in xs)
    return (make_rational(len(xs)),) + xs + tuple(ONE if b == "1" else ZERO for b in encode(p))


@dataclass(frozen=True)
class HVerdict:
    halted: bool
    via: Optional[str] = None  # "H^{1,=}" or "P_j"
    used: int = 0

    def __bool__(self):
        return self.halted


def h_i_semidecide(point: Sequence, i: int, budget: int) -> HVerdict:
    """Dovetailed semi-decision of ``H_i = H^{1,=} | P_1 | ... | P_i``.

    Each unit of budget runs one step of the decoded M_add^{1,=} machine and
    one ``(r, q)`` pair for every applicable ``P_j``, ``j <= i``.
    """
    if i < 0:
        raise ValueError("i >= 0")
    point = tuple(make_rational(v) for v in point)
    run = None
    split = split_halting_point(point)
    if split is not None:
        xs, prog = split
        if Dialect.ADD1EQ.admits(prog.dialect):
            run = (prog, init_state(prog, xs))
    kappas = []
    shape = _p_shape(point)
    if shape is not None and 1 <= shape[0] <= i:
        j, x = shape
        kappas.append((j, nth_prime(j), _Comparator(x), rq_pairs()))
    if run is None and not kappas:
        return HVerdict(False, None, budget)
    for used in range(1, budget + 1):
        if run is not None:
            prog, state = run
            if isinstance(resume(state, prog, None, 1), Halted):
                return HVerdict(True, "H^{1,=}", used)
        for j, p, cmp, pairs in kappas:
            r, q = next(pairs)
            if kappa_condition(p, cmp, r, q):
                return HVerdict(True, f"P_{j}", used)
    return HVerdict(False, None, budget)


def sqrt_primes_oracle(i: int) -> OracleSpec:
    """``O_i = {sqrt(p_1), ..., sqrt(p_i)}`` on 1-tuples, answered exactly."""
    members = frozenset(RealValue.generator(sqrt_gen(j)) for j in range(1, i + 1))
    return OracleSpec(f"sqrt-primes:{i}", lambda q: len(q) == 1 and q[0] in members)


def sqrt_select_decide(k: int, x: RealValue, i: int) -> int:
    """1 if ``x == sqrt(p_k)``, else 0, using the oracle ``O_i`` and exclusion.

    After a positive oracle answer the candidate set ``{1..i}`` is narrowed by
    running K on ``(j, x)`` for all remaining ``j`` in lockstep; an index is
    deleted once a separating rational is found.
    """
    if not 1 <= k <= i:
        raise PreconditionViolated(f"need 1 <= k <= i, got k={k}, i={i}")
    x = make_rational(x)
    if not sqrt_primes_oracle(i)((x,)):
        return 0
    remaining = set(range(1, i + 1))
    primes = {j: nth_prime(j) for j in remaining}
    cmp = _Comparator(x)
    for r, q in rq_pairs():
        if len(remaining) == 1:
            return 1
        for j in sorted(remaining):
            if kappa_condition(primes[j], cmp, r, q):
                if j == k:
                    return 0
                remaining.discard(j)
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# path constraints

@dataclass(frozen=True)
class Atom:
    """One condition on the input ``x``.

    ``rel`` is one of ``>=``, ``>``, ``=``, ``!=`` for ``k*x + l rel 0``, or
    ``in``/``out`` for an oracle query on the tuple of affine terms ``args``.
    """

    rel: str
    k: int = 0
    l: int = 0
    args: tuple = ()

    def holds(self, x: RealValue, oracle: OracleSpec = None) -> bool:
        if self.rel in ("in", "out"):
            if oracle is None:
                raise ValueError("oracle atom needs an oracle")
            q = tuple(x.scale(a) + b for a, b in self.args)
            return oracle(q) == (self.rel == "in")
        v = sign(x.scale(self.k) + self.l)
        return {">=": v >= 0, ">": v > 0, "=": v == 0, "!=": v != 0}[self.rel]

    def __str__(self):
        if self.rel in ("in", "out"):
            terms = ", ".join(f"{a}x{b:+d}" for a, b in self.args)
            return f"({terms}) {'in' if self.rel == 'in' else 'not in'} O"
        return f"{self.k}x{self.l:+d} {self.rel} 0"


@dataclass(frozen=True)
class ConstraintSystem:
    atoms: tuple
    labels: tuple          # labels visited, in order
    steps: int
    halted: bool
    program: Program = field(repr=False, compare=False)

    def satisfied_by(self, x, oracle: OracleSpec = None) -> bool:
        x = make_rational(x)
        return all(a.holds(x, oracle) for a in self.atoms)


def extract_path_constraints(p: Program, x0, t: int, oracle: OracleSpec = None) -> ConstraintSystem:
    """Run ``p`` on ``(x0)`` for up to ``t`` steps tracking registers as ``k*x + l``."""
    if t < 0:
        raise ValueError("t >= 0")
    x0 = make_rational(x0)
    Z: dict[int, tuple[int, int]] = {1: (1, 0)}
    I = [1] * p.k
    pc = 1
    atoms = []
    labels = []
    steps = 0
    halted = False

    def value(kl):
        k, l = kl
        return x0.scale(k) + l

    while steps < t:
        ins = p.instruction(pc)
        labels.append(pc)
        steps += 1
        nxt = pc + 1
        if isinstance(ins, (Add, Sub)):
            a, b = Z.get(ins.j, (0, 0)), Z.get(ins.k, (0, 0))
            Z[ins.i] = (a[0] + b[0], a[1] + b[1]) if isinstance(ins, Add) else (a[0] - b[0], a[1] - b[1])
        elif isinstance(ins, SetConst):
            if ins.c == ZERO:
                Z[ins.j] = (0, 0)
            elif ins.c == ONE:
                Z[ins.j] = (0, 1)
            else:
                raise SymbolicOverflow(f"constant {ins.c} leaves the integer k*x+l form")
        elif isinstance(ins, EqTest):
            kl = Z.get(ins.j, (0, 0))
            zero = sign(value(kl)) == 0
            atoms.append(Atom("=" if zero else "!=", *kl))
            nxt = ins.l1 if zero else ins.l2
        elif isinstance(ins, GeTest):
            kl = Z.get(ins.j, (0, 0))
            if sign(value(kl)) >= 0:
                atoms.append(Atom(">=", *kl))
                nxt = ins.l1
            else:
                atoms.append(Atom(">", -kl[0], -kl[1]))
                nxt = ins.l2
        elif isinstance(ins, CopyIndirect):
            Z[I[ins.j - 1]] = Z.get(I[ins.k - 1], (0, 0))
        elif isinstance(ins, IndexSet):
            I[ins.j - 1] = 1
        elif isinstance(ins, IndexInc):
            I[ins.j - 1] += 1
        elif isinstance(ins, IndexTest):
            nxt = ins.l1 if I[ins.j - 1] == I[ins.k - 1] else ins.l2
        elif isinstance(ins, OracleTest):
            if oracle is None:
                raise MachineError("oracle instruction with no oracle attached")
            args = tuple(Z.get(r, (0, 0)) for r in range(1, I[0] + 1))
            ans = oracle(tuple(value(kl) for kl in args))
            atoms.append(Atom("in" if ans else "out", args=args))
            nxt = ins.l1 if ans else ins.l2
        elif isinstance(ins, Halt):
            halted = True
            break
        pc = nxt
    return ConstraintSystem(tuple(atoms), tuple(labels), steps, halted, p)


def same_path(p: Program, x, system: ConstraintSystem, oracle: OracleSpec = None) -> bool:
    """Does ``p`` on ``(x)`` visit exactly the labels recorded in ``system``?"""
    labels, halt = branch_sequence(p, (make_rational(x),), oracle, system.steps)
    return tuple(labels) == system.labels and (halt is not None) == system.halted


def _feasible_interval(atoms):
    """Bounds ``(lo, lo_strict, hi, hi_strict)`` and excluded points of the linear atoms."""
    lo = hi = None
    lo_strict = hi_strict = False
    excluded = set()
    roots = set()
    for a in atoms:
        if a.rel in ("in", "out") or a.k == 0:
            continue
        root = Fraction(-a.l, a.k)
        if a.rel == "!=":
            excluded.add(root)
        elif a.rel == "=":
            roots.add(root)
        else:
            strict = a.rel == ">"
            if a.k > 0:   # x >= root
                if lo is None or root > lo or (root == lo and strict):
                    lo, lo_strict = root, strict
            else:         # x <= root
                if hi is None or root < hi or (root == hi and strict):
                    hi, hi_strict = root, strict
    return lo, lo_strict, hi, hi_strict, excluded, roots


def rational_shadow_search(p: Program, target, t: int, denominator_bound: int,
                           oracle: OracleSpec = None) -> Optional[Fraction]:
    """A rational ``q`` (denominator <= bound) following the target's ``t``-step path.

    Candidates are tried by increasing denominator, nearest the target first.
    Every atom of the target's constraint system, oracle atoms included, is
    checked exactly on the candidate.
    """
    target = make_rational(target)
    system = extract_path_constraints(p, target, t, oracle)
    lo, lo_s, hi, hi_s, excluded, roots = _feasible_interval(system.atoms)

    def inside(q):
        if lo is not None and (q < lo or (lo_s and q == lo)):
            return False
        if hi is not None and (q > hi or (hi_s and q == hi)):
            return False
        return q not in excluded

    def accept(q):
        return inside(q) and system.satisfied_by(make_rational(q), oracle)

    if roots:
        # an equality with k != 0 pins x; only a rational target can meet it
        if len(roots) != 1:
            return None
        q = next(iter(roots))
        return q if q.denominator <= denominator_bound and accept(q) else None

    for m in range(1, denominator_bound + 1):
        centre = floor_value(target.scale(m))
        lo_n = math.floor(lo * m) if lo is not None else centre - 2
        hi_n = math.ceil(hi * m) if hi is not None else centre + 3
        cands = sorted(range(max(lo_n, centre - 2), min(hi_n, centre + 3) + 1),
                       key=lambda n: (abs(Fraction(n, m) - _approx(target)), n))
        for n in cands:
            q = Fraction(n, m)
            if q.denominator != m:
                continue
            if accept(q):
                return q
    return None


def _approx(x: RealValue) -> Fraction:
    if x.is_rational():
        return Fraction(x.constant)
    iv = enclosure(x, 40)
    return (iv.lo + iv.hi) / 2
