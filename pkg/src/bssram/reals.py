"""Exact reals in the rational span of 1, square roots of primes, and pi.

Every value an additive machine can compute from such inputs stays in this
span, so registers hold a rational constant plus finitely many rational
multiples of generators. The generators {1, sqrt(p_1), sqrt(p_2), ..., pi}
are taken to be linearly independent over Q (square roots of distinct primes
are; pi is transcendental), which makes equality a coefficient comparison.
Order is decided by refining rational enclosures of the generators until the
enclosure of the value excludes zero; there is no floating point anywhere.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Mapping, Union

Rational = Union[int, Fraction]


def _norm(q) -> Rational:
    """Return ``q`` as an int when integral, else as a Fraction."""
    if isinstance(q, int):
        return q
    q = Fraction(q)
    return q.numerator if q.denominator == 1 else q


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_index(p: int) -> int:
    """Position of the prime ``p`` in 2, 3, 5, 7, ... (1-based)."""
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    return sum(1 for n in range(2, p + 1) if _is_prime(n))


def nth_prime_simple(i: int) -> int:
    if i < 1:
        raise ValueError("prime index must be >= 1")
    n, count = 1, 0
    while count < i:
        n += 1
        if _is_prime(n):
            count += 1
    return n


@total_ordering
@dataclass(frozen=True)
class GeneratorId:
    """Either ``sqrt(p_index)`` (``kind == "sqrt"``) or ``pi``."""

    kind: str
    index: int = 0

    def __post_init__(self):
        if self.kind == "sqrt":
            if self.index < 1:
                raise ValueError("sqrt generator index must be >= 1")
        elif self.kind == "pi":
            if self.index != 0:
                raise ValueError("pi carries no index")
        else:
            raise ValueError(f"unknown generator kind {self.kind!r}")

    @property
    def prime(self) -> int:
        if self.kind != "sqrt":
            raise AttributeError("pi has no prime")
        return nth_prime_simple(self.index)

    def _key(self):
        return (0, self.index) if self.kind == "sqrt" else (1, 0)

    def __lt__(self, other):
        if not isinstance(other, GeneratorId):
            return NotImplemented
        return self._key() < other._key()

    def __str__(self):
        return f"sqrt({self.prime})" if self.kind == "sqrt" else "pi"


def sqrt_gen(i: int) -> GeneratorId:
    """Generator for the square root of the ``i``-th prime."""
    return GeneratorId("sqrt", i)


def sqrt_of_prime(p: int) -> GeneratorId:
    return GeneratorId("sqrt", prime_index(p))


PI = GeneratorId("pi")

DEFAULT_GENERATORS = (sqrt_gen(1), sqrt_gen(2), sqrt_gen(3), sqrt_gen(4), sqrt_gen(5), PI)


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")

    @property
    def width(self) -> Fraction:
        return Fraction(self.hi - self.lo)

    def contains(self, q) -> bool:
        return self.lo <= q <= self.hi

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0


class RealValue:
    """Immutable ``constant + sum(coeff * generator)`` with rational parts.

    Zero coefficients are never stored, so two values are equal exactly when
    their constants and coefficient maps agree.
    """

    __slots__ = ("constant", "coeffs", "_hash")

    def __init__(self, constant: Rational = 0, coeffs: Mapping[GeneratorId, Rational] | Iterable = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        cleaned = tuple(sorted((g, _norm(c)) for g, c in items if c != 0))
        object.__setattr__(self, "constant", _norm(constant))
        object.__setattr__(self, "coeffs", cleaned)
        object.__setattr__(self, "_hash", None)

    @classmethod
    def _raw(cls, constant, coeffs):
        # coeffs already sorted and zero-free
        obj = object.__new__(cls)
        object.__setattr__(obj, "constant", constant)
        object.__setattr__(obj, "coeffs", coeffs)
        object.__setattr__(obj, "_hash", None)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("RealValue is immutable")

    @classmethod
    def generator(cls, g: GeneratorId, coeff: Rational = 1) -> RealValue:
        return cls(0, {g: coeff})

    @property
    def coeff_map(self) -> dict:
        return dict(self.coeffs)

    def coeff(self, g: GeneratorId) -> Rational:
        for h, c in self.coeffs:
            if h == g:
                return c
        return 0

    def is_rational(self) -> bool:
        return not self.coeffs

    def is_integer(self) -> bool:
        return not self.coeffs and isinstance(self.constant, int)

    def as_rational(self) -> Fraction:
        if self.coeffs:
            raise ValueError(f"{self} is irrational")
        return Fraction(self.constant)

    def as_int(self) -> int:
        if not self.is_integer():
            raise ValueError(f"{self} is not an integer")
        return self.constant

    def __add__(self, other):
        if not isinstance(other, RealValue):
            other = make_rational(other)
        return combine(self, other, "+")

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, RealValue):
            other = make_rational(other)
        return combine(self, other, "-")

    def __rsub__(self, other):
        return make_rational(other) - self

    def __neg__(self):
        return RealValue._raw(-self.constant, tuple((g, -c) for g, c in self.coeffs))

    def scale(self, q: Rational) -> RealValue:
        q = _norm(q)
        if q == 0:
            return ZERO
        return RealValue._raw(_norm(self.constant * q), tuple((g, _norm(c * q)) for g, c in self.coeffs))

    def __eq__(self, other):
        if isinstance(other, RealValue):
            return self.constant == other.constant and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return not self.coeffs and self.constant == other
        return NotImplemented

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.constant) if not self.coeffs else hash((self.constant, self.coeffs))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"RealValue({format_value(self)!r})"

    def __str__(self):
        return format_value(self)


ZERO = RealValue._raw(0, ())
ONE = RealValue._raw(1, ())


def make_rational(q) -> RealValue:
    if isinstance(q, RealValue):
        return q
    if isinstance(q, float):
        raise TypeError("floats are not exact; pass a Fraction or a string")
    q = _norm(q)
    if q == 0:
        return ZERO
    if q == 1:
        return ONE
    return RealValue._raw(q, ())


def _merge(a, b, sign):
    if not b:
        return a
    if not a:
        return b if sign > 0 else tuple((g, -c) for g, c in b)
    out = dict(a)
    for g, c in b:
        v = out.get(g, 0) + c * sign
        if v == 0:
            out.pop(g, None)
        else:
            out[g] = _norm(v)
    return tuple(sorted(out.items()))


def combine(a: RealValue, b: RealValue, op: str) -> RealValue:
    """``a + b`` or ``a - b``, exactly."""
    if op == "+":
        c = a.constant + b.constant
        coeffs = _merge(a.coeffs, b.coeffs, 1)
    elif op == "-":
        c = a.constant - b.constant
        coeffs = _merge(a.coeffs, b.coeffs, -1)
    else:
        raise ValueError(f"unsupported operation {op!r}")
    if type(c) is not int:
        c = _norm(c)
    return RealValue._raw(c, coeffs)


# ---------------------------------------------------------------------------
# Generator enclosures

# Proven bounds 333/106 < pi < 355/113 and 223/71 < pi < 22/7.
_PI_TABLE = (
    (Fraction(223, 71), Fraction(22, 7)),
    (Fraction(333, 106), Fraction(355, 113)),
)

_cache_lock = threading.Lock()
_dyadic_cache: dict[tuple[GeneratorId, int], RationalInterval] = {}


def _arctan_inv_bounds(x: int, eps: Fraction) -> tuple[Fraction, Fraction]:
    """Bounds on arctan(1/x) for integer x > 1 with width below ``eps``.

    Alternating series with decreasing terms: consecutive partial sums
    bracket the limit.
    """
    total = Fraction(0)
    n = 0
    x2 = x * x
    power = x
    while True:
        term = Fraction(1, (2 * n + 1) * power)
        nxt = total + term if n % 2 == 0 else total - term
        if term < eps and n > 0:
            return (min(total, nxt), max(total, nxt))
        total = nxt
        n += 1
        power *= x2


def _pi_bounds(eps: Fraction) -> tuple[Fraction, Fraction]:
    # Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    a_lo, a_hi = _arctan_inv_bounds(5, eps / 40)
    b_lo, b_hi = _arctan_inv_bounds(239, eps / 40)
    return 16 * a_lo - 4 * b_hi, 16 * a_hi - 4 * b_lo


def _dyadic_interval(g: GeneratorId, k: int) -> RationalInterval:
    """Enclosure of ``g`` on the grid of step 2**-k, of width at most 2**-k."""
    key = (g, k)
    hit = _dyadic_cache.get(key)
    if hit is not None:
        return hit
    scale = 1 << k
    if g.kind == "sqrt":
        p = g.prime
        # bisection on squares over the dyadic grid, done by integer sqrt
        lo_num = math.isqrt(p * scale * scale)
        iv = RationalInterval(Fraction(lo_num, scale), Fraction(lo_num + 1, scale))
    else:
        lo, hi = _pi_bounds(Fraction(1, 4 * scale))
        lo_num = math.floor(lo * scale)
        if Fraction(lo_num + 1, scale) >= hi:
            iv = RationalInterval(Fraction(lo_num, scale), Fraction(lo_num + 1, scale))
        else:
            # hi crosses a grid point: shift by half a cell and stay within width
            iv = RationalInterval(
                Fraction(2 * lo_num + 1, 2 * scale), Fraction(2 * lo_num + 3, 2 * scale)
            )
    with _cache_lock:
        _dyadic_cache[key] = iv
    return iv


def refine_interval(g: GeneratorId, max_width) -> RationalInterval:
    """A rational interval of width at most ``max_width`` containing ``g``."""
    max_width = Fraction(max_width)
    if max_width <= 0:
        raise ValueError("max_width must be positive")
    if g.kind == "pi":
        for lo, hi in _PI_TABLE:
            if hi - lo <= max_width:
                return RationalInterval(lo, hi)
    k = 0
    while Fraction(1, 1 << k) > max_width:
        k += 1
    return _dyadic_interval(g, k)


def enclosure(a: RealValue, width_exp: int) -> RationalInterval:
    """Interval hull of ``a`` using generator cells of width ``2**-width_exp``."""
    lo = hi = Fraction(a.constant)
    for g, c in a.coeffs:
        iv = _dyadic_interval(g, width_exp)
        if c > 0:
            lo += c * iv.lo
            hi += c * iv.hi
        else:
            lo += c * iv.hi
            hi += c * iv.lo
    return RationalInterval(lo, hi)


def sign(a: RealValue) -> int:
    """Exact sign of ``a``: -1, 0 or +1."""
    if not a.coeffs:
        c = a.constant
        return (c > 0) - (c < 0)
    # nonzero by linear independence; halve the cell width until decided
    k = 0
    while True:
        iv = enclosure(a, k)
        if iv.lo > 0:
            return 1
        if iv.hi < 0:
            return -1
        k += 1


def compare(a: RealValue, b: RealValue) -> int:
    return sign(combine(a, b, "-"))


def floor_value(a: RealValue) -> int:
    """Largest integer not exceeding ``a``."""
    if not a.coeffs:
        return math.floor(a.constant)
    k = 0
    while True:
        iv = enclosure(a, k)
        lo, hi = math.floor(iv.lo), math.floor(iv.hi)
        if lo == hi:
            return lo
        k += 1


# ---------------------------------------------------------------------------
# Text form:  c + q1*sqrt(p) + q2*pi


def _fmt_q(q) -> str:
    q = _norm(q)
    return str(q)


def format_value(a: RealValue) -> str:
    parts: list[tuple[int, str]] = []
    if a.constant != 0 or not a.coeffs:
        c = a.constant
        parts.append((-1 if c < 0 else 1, _fmt_q(abs(c))))
    for g, c in a.coeffs:
        mag = abs(c)
        body = str(g) if mag == 1 else f"{_fmt_q(mag)}*{g}"
        parts.append((-1 if c < 0 else 1, body))
    out = ("-" if parts[0][0] < 0 else "") + parts[0][1]
    for s, body in parts[1:]:
        out += (" - " if s < 0 else " + ") + body
    return out


_TERM_RE = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:
          (?P<coef>\d+(?:/\d+)?)\s*(?:\*\s*(?P<gen1>sqrt\(\s*\d+\s*\)|pi))?
        | (?P<gen2>sqrt\(\s*\d+\s*\)|pi)
        )\s*""",
    re.VERBOSE,
)


def _parse_gen(text: str) -> GeneratorId:
    if text == "pi":
        return PI
    p = int(text[text.index("(") + 1 : text.index(")")])
    return sqrt_of_prime(p)


def parse_value(text: str) -> RealValue:
    """Parse the text form produced by :func:`format_value`."""
    src = text.strip()
    if not src:
        raise ValueError("empty value")
    pos = 0
    constant: Rational = 0
    coeffs: dict[GeneratorId, Rational] = {}
    first = True
    while pos < len(src):
        m = _TERM_RE.match(src, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse value {text!r} at column {pos + 1}")
        if not first and m.group("sign") is None:
            raise ValueError(f"missing operator in {text!r} at column {pos + 1}")
        sgn = -1 if m.group("sign") == "-" else 1
        gen = m.group("gen1") or m.group("gen2")
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if coef.denominator == 0:
            raise ValueError("zero denominator")
        if gen is None:
            constant = constant + sgn * coef
        else:
            g = _parse_gen(gen.replace(" ", ""))
            coeffs[g] = coeffs.get(g, 0) + sgn * coef
        pos = m.end()
        first = False
    return RealValue(constant, coeffs)


def parse_values(text: str) -> tuple[RealValue, ...]:
    """Comma-separated list of values."""
    return tuple(parse_value(part) for part in text.split(","))
