"""Exact rationals and certified dyadic intervals.

Every irrational quantity in the package (square roots of rational squared
lengths, their sums and ratios) is handled as a :class:`DyadicInterval`
whose endpoints are exact rationals. Precision is always an explicit
argument ``n``: a precision-``n`` interval has width at most ``2**-n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Callable, Iterable, Optional, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]


class CurveError(Exception):
    """Base class for errors raised by compcurve."""


class ContractError(CurveError, ValueError):
    """A precondition of an operation was violated."""


class BudgetExceeded(CurveError):
    """A search or refinement loop hit its declared budget."""


def Q(value: RationalLike) -> Fraction:
    """Coerce ``value`` to a Fraction; strings use the "p/q" form."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot make an exact rational from {type(value).__name__}")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        if den.startswith("2^"):
            return Fraction(int(num), 1 << int(den[2:]))
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def fmt_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def fmt_dyadic(q: Fraction) -> str:
    den = q.denominator
    k = den.bit_length() - 1
    if den != 1 << k:
        raise ValueError(f"{q} is not dyadic")
    return f"{q.numerator}/2^{k}"


def is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def floor_dyadic(q: Fraction, m: int) -> Fraction:
    """Largest multiple of 2**-m that is <= q."""
    return Fraction((q.numerator << m) // q.denominator, 1 << m)


def ceil_dyadic(q: Fraction, m: int) -> Fraction:
    return Fraction(-((-q.numerator << m) // q.denominator), 1 << m)


@dataclass(frozen=True)
class DyadicInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, q: RationalLike) -> "DyadicInterval":
        q = Q(q)
        return cls(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, q: RationalLike) -> bool:
        q = Q(q)
        return self.lo <= q <= self.hi

    def contains_interval(self, other: "DyadicInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def has_precision(self, n: int) -> bool:
        return self.width <= Fraction(1, 1 << n) if n >= 0 else True

    def __add__(self, other):
        other = _as_interval(other)
        return DyadicInterval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return DyadicInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        other = _as_interval(other)
        return DyadicInterval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return _as_interval(other) - self

    def __mul__(self, other):
        other = _as_interval(other)
        prods = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return DyadicInterval(min(prods), max(prods))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_interval(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("divisor interval contains 0")
        inv = DyadicInterval(1 / other.hi, 1 / other.lo)
        return self * inv

    def __rtruediv__(self, other):
        return _as_interval(other) / self

    def hull(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def round_out(self, m: int) -> "DyadicInterval":
        """Outward rounding of both endpoints to the grid 2**-m."""
        return DyadicInterval(floor_dyadic(self.lo, m), ceil_dyadic(self.hi, m))

    def __str__(self):
        return f"[{_fmt_end(self.lo)}, {_fmt_end(self.hi)}]"


def _fmt_end(q: Fraction) -> str:
    return fmt_dyadic(q) if is_dyadic(q) else fmt_rational(q)


def _as_interval(x) -> DyadicInterval:
    if isinstance(x, DyadicInterval):
        return x
    return DyadicInterval.exact(x)


def sqrt_interval(r: RationalLike, n: int) -> DyadicInterval:
    """Interval of width <= 2**-n containing sqrt(r), by integer square root.

    With ``x = r * 4**n`` and ``k = isqrt(floor(x))`` we have
    ``k <= sqrt(x) < k + 1``; dividing by ``2**n`` gives the bracket.
    """
    r = Q(r)
    if r < 0:
        raise ContractError(f"sqrt of negative rational {r}")
    if n < 0:
        n = 0
    scaled_num = r.numerator << (2 * n)
    fl = scaled_num // r.denominator
    k = isqrt(fl)
    if k * k * r.denominator == scaled_num:
        v = Fraction(k, 1 << n)
        return DyadicInterval(v, v)
    return DyadicInterval(Fraction(k, 1 << n), Fraction(k + 1, 1 << n))


def sqrt_exact(r: Fraction) -> Optional[Fraction]:
    """sqrt(r) if it is rational, else None."""
    if r < 0:
        return None
    a, b = isqrt(r.numerator), isqrt(r.denominator)
    if a * a == r.numerator and b * b == r.denominator:
        return Fraction(a, b)
    return None


def sqrt_sum(squares: Iterable[Fraction], n: int) -> DyadicInterval:
    """Certified sum of square roots, total width <= 2**-n."""
    squares = list(squares)
    if not squares:
        return DyadicInterval.exact(0)
    extra = max(len(squares) - 1, 0).bit_length()
    m = n + extra
    lo = hi = Fraction(0)
    for sq in squares:
        iv = sqrt_interval(sq, m)
        lo += iv.lo
        hi += iv.hi
    return DyadicInterval(lo, hi)


def interval_arith(op: str, a: DyadicInterval, b: DyadicInterval, n: int) -> DyadicInterval:
    """Sum/product/quotient of two intervals, rounded outward to the 2**-(n+1) grid.

    The result contains the exact value; its width is bounded by the operand
    widths, so callers refine operands to reach width <= 2**-n.
    """
    if op in ("sum", "+"):
        res = a + b
    elif op in ("product", "*"):
        res = a * b
    elif op in ("quotient", "/"):
        res = a / b
    elif op in ("difference", "-"):
        res = a - b
    else:
        raise ContractError(f"unknown interval operation {op!r}")
    if res.is_exact() and is_dyadic(res.lo):
        return res
    return res.round_out(n + 1)


def compare(a: DyadicInterval, b: DyadicInterval) -> Optional[int]:
    """Three-valued comparison: -1 if a < b surely, 1 if a > b, None if unknown."""
    if a.hi < b.lo:
        return -1
    if a.lo > b.hi:
        return 1
    if a.is_exact() and b.is_exact() and a.lo == b.lo:
        return 0
    return None


def certainly_le(a: DyadicInterval, b) -> Optional[bool]:
    b = _as_interval(b)
    if a.hi <= b.lo:
        return True
    if a.lo > b.hi:
        return False
    return None


def refine(fn: Callable[[int], Optional[object]], start: int, cap: int):
    """Call ``fn(n)`` for n = start, start+1, ... until it returns non-None."""
    for n in range(start, cap + 1):
        out = fn(n)
        if out is not None:
            return out
    raise BudgetExceeded(f"unresolved at precision cap {cap}")


def pow2(k: int) -> Fraction:
    """2**k as an exact rational (k may be negative)."""
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)
