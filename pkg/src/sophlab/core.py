"""Bit strings, the length-lexicographic codec, and exact dyadic rationals.

Bit strings are plain ``str`` objects over the alphabet ``{"0", "1"}``.
The empty string is the empty bit string; on disk it is written as ``"e"``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

BitString = str

EMPTY_TOKEN = "e"


def is_bitstring(s: object) -> bool:
    return isinstance(s, str) and all(ch in "01" for ch in s)


def index_of(x: BitString) -> int:
    """Position of ``x`` in the order (length, lexicographic), with ``"" -> 0``."""
    if not x:
        return 0
    # strings of length n occupy [2^n - 1, 2^(n+1) - 2]
    return (1 << len(x)) - 1 + int(x, 2)


def string_of(n: int) -> BitString:
    if n < 0:
        raise ValueError(f"negative index {n}")
    # n + 1 written in binary, leading 1 dropped
    return bin(n + 1)[3:]


def format_bits(x: BitString) -> str:
    return x if x else EMPTY_TOKEN


def parse_bits(token: str) -> BitString:
    token = token.strip()
    if token == EMPTY_TOKEN:
        return ""
    if not token or not is_bitstring(token):
        raise ValueError(f"not a bit string: {token!r}")
    return token


def ceil_log2(value: Union[int, Fraction]) -> int:
    """Smallest integer j with 2**j >= value, for value > 0."""
    value = Fraction(value)
    if value <= 0:
        raise ValueError("ceil_log2 of a nonpositive number")
    p, q = value.numerator, value.denominator
    # first guess from bit lengths, then correct by at most one step each way
    j = p.bit_length() - q.bit_length()
    while _pow2_ge(j - 1, p, q):
        j -= 1
    while not _pow2_ge(j, p, q):
        j += 1
    return j


def _pow2_ge(j: int, p: int, q: int) -> bool:
    # 2**j >= p/q
    if j >= 0:
        return q << j >= p
    return q >= p << -j


def log_term(k: int) -> int:
    """Integer stand-in for ``log k``: ``ceil(log2(k + 1))``."""
    if k < 0:
        raise ValueError("log_term of a negative number")
    return ceil_log2(k + 1)


class Dyadic:
    """Nonnegative rational ``numerator / 2**exponent`` in lowest terms.

    Instances are immutable and hashable.  Subtraction that would go
    negative raises ``ValueError``.
    """

    __slots__ = ("numerator", "exponent")

    numerator: int
    exponent: int

    def __init__(self, numerator: int = 0, exponent: int = 0):
        if numerator < 0 or exponent < 0:
            raise ValueError("Dyadic values are nonnegative with exponent >= 0")
        if numerator == 0:
            exponent = 0
        else:
            shift = min((numerator & -numerator).bit_length() - 1, exponent)
            numerator >>= shift
            exponent -= shift
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def unit(cls, j: int) -> Dyadic:
        """The mass ``2**-j``."""
        return cls(1, j)

    @classmethod
    def parse(cls, text: str) -> Dyadic:
        num, sep, exp = text.strip().partition("/2^")
        if not sep:
            return cls(int(num), 0)
        return cls(int(num), int(exp))

    def _aligned(self, other: Dyadic) -> tuple[int, int, int]:
        e = max(self.exponent, other.exponent)
        return self.numerator << (e - self.exponent), other.numerator << (e - other.exponent), e

    def __add__(self, other: Dyadic) -> Dyadic:
        if not isinstance(other, Dyadic):
            return NotImplemented
        a, b, e = self._aligned(other)
        return Dyadic(a + b, e)

    def __radd__(self, other):
        # lets builtin sum() start from int 0
        if other == 0:
            return self
        return NotImplemented

    def __sub__(self, other: Dyadic) -> Dyadic:
        if not isinstance(other, Dyadic):
            return NotImplemented
        a, b, e = self._aligned(other)
        if b > a:
            raise ValueError(f"negative dyadic result: {self} - {other}")
        return Dyadic(a - b, e)

    def __mul__(self, other: Dyadic) -> Dyadic:
        if not isinstance(other, Dyadic):
            return NotImplemented
        return Dyadic(self.numerator * other.numerator, self.exponent + other.exponent)

    def scale2(self, k: int) -> Dyadic:
        """Multiply by ``2**k`` (``k`` may be negative)."""
        if k <= 0:
            return Dyadic(self.numerator, self.exponent - k)
        if k <= self.exponent:
            return Dyadic(self.numerator, self.exponent - k)
        return Dyadic(self.numerator << (k - self.exponent), 0)

    def _cmp(self, other: Dyadic) -> int:
        a, b, _ = self._aligned(other)
        return (a > b) - (a < b)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.numerator == other.numerator and self.exponent == other.exponent
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.as_fraction())

    def __lt__(self, other):
        if isinstance(other, Dyadic):
            return self._cmp(other) < 0
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() < other
        return NotImplemented

    def __le__(self, other):
        if isinstance(other, Dyadic):
            return self._cmp(other) <= 0
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() <= other
        return NotImplemented

    def __gt__(self, other):
        if isinstance(other, Dyadic):
            return self._cmp(other) > 0
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() > other
        return NotImplemented

    def __ge__(self, other):
        if isinstance(other, Dyadic):
            return self._cmp(other) >= 0
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() >= other
        return NotImplemented

    def __bool__(self):
        return self.numerator != 0

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def binary_prefix(self, n: int) -> BitString:
        """First ``n`` binary digits after the point (value must be < 1)."""
        if self.numerator >= 1 << self.exponent:
            raise ValueError(f"{self} is not below 1")
        if n == 0:
            return ""
        digits = (self.numerator << n) >> self.exponent
        return format(digits, f"0{n}b")

    def __str__(self):
        return f"{self.numerator}/2^{self.exponent}"

    def __repr__(self):
        return f"Dyadic({self.numerator}, {self.exponent})"


ZERO = Dyadic(0)
ONE = Dyadic(1)


def dyadic_sum(values: Iterable[Dyadic]) -> Dyadic:
    """Exact sum; accumulates on a common denominator so order never matters."""
    values = list(values)
    if not values:
        return ZERO
    e = max(v.exponent for v in values)
    return Dyadic(sum(v.numerator << (e - v.exponent) for v in values), e)


def binary_fraction(prefix: BitString) -> Dyadic:
    """Value of ``0.prefix`` in binary."""
    if not prefix:
        return ZERO
    return Dyadic(int(prefix, 2), len(prefix))


def format_rational(value: Fraction) -> str:
    """Dyadic text form when the denominator is a power of two, else ``p/q``."""
    q = value.denominator
    if q & (q - 1) == 0:
        return str(Dyadic(value.numerator, q.bit_length() - 1))
    return f"{value.numerator}/{q}"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if "/2^" in text:
        return Dyadic.parse(text).as_fraction()
    return Fraction(text)
