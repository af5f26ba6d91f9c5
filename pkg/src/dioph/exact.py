"""Exact arithmetic at every place of Q.

Finite places only ever see exact rationals, so every p-adic inequality is an
exact valuation comparison.  At the real place we work in the ring spanned
over Q by square roots of squarefree integers (:class:`AlgebraicReal`): it is
closed under the ring operations we need, zero-testing is exact (square roots
of distinct squarefree integers are linearly independent over Q), and signs of
nonzero elements are decided by interval refinement with precision doubling.
:class:`Radical` adds rational powers of positive elements on top, which is
what weighted quasi-norms ``|x|**(1/tau)`` produce.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence, Union

from .errors import PrecisionError, ValidationError

START_BITS = 64
PRECISION_CAP = 1 << 14

VALUATION_INF = math.inf

Rational = Fraction
Number = Union[int, Fraction, "AlgebraicReal"]


# ---------------------------------------------------------------------------
# primes and places
# ---------------------------------------------------------------------------

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for n < 3.3e24
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Place:
    """A place of Q: a prime ``p`` or the archimedean place (``prime=None``)."""

    prime: int | None = None

    def __post_init__(self):
        if self.prime is not None and not is_prime(self.prime):
            raise ValidationError(f"{self.prime} is not prime")

    @property
    def is_infinite(self) -> bool:
        return self.prime is None

    def sort_key(self):
        return (self.prime is None, self.prime or 0)

    def __lt__(self, other: "Place") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return "inf" if self.prime is None else str(self.prime)

    __repr__ = __str__


INF = Place(None)


def as_place(x) -> Place:
    if isinstance(x, Place):
        return x
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "oo", "∞"):
            return INF
        return Place(int(s))
    if isinstance(x, int):
        return Place(x)
    raise ValidationError(f"cannot interpret {x!r} as a place")


# ---------------------------------------------------------------------------
# p-adic plumbing
# ---------------------------------------------------------------------------

def _int_valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(x, p) -> int | float:
    """v_p(x) for rational x; ``VALUATION_INF`` (math.inf) for zero."""
    p = as_place(p)
    if p.is_infinite:
        raise ValidationError("valuation needs a finite place")
    x = Fraction(x)
    if x == 0:
        return VALUATION_INF
    return _int_valuation(x.numerator, p.prime) - _int_valuation(x.denominator, p.prime)


def place_norm(x, place):
    """|x|_nu.  Finite places give ``p**(-v_p(x))``; the real place the absolute value.

    ``x`` may be an :class:`SNumber`, in which case its component at ``place`` is used.
    """
    place = as_place(place)
    if isinstance(x, SNumber):
        x = x[place]
    if place.is_infinite:
        return abs(x)
    if isinstance(x, AlgebraicReal):
        if not x.is_rational():
            raise ValidationError("irrational value at a finite place")
        x = x.to_fraction()
    x = Fraction(x)
    if x == 0:
        return Fraction(0)
    return Fraction(place.prime) ** (-valuation(x, place))


def inverse_mod(x: Fraction | int, modulus: int) -> int:
    """Image of a rational with denominator coprime to ``modulus`` in Z/modulus."""
    x = Fraction(x)
    if modulus == 1:
        return 0
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


def crt_solve(congruences: Iterable[tuple[int, int]]) -> int:
    """Least nonnegative x with x = r (mod m) for every (m, r).

    Non-coprime moduli are accepted when the residues agree on the overlap.
    """
    x, modulus = 0, 1
    for m, r in congruences:
        if m < 1:
            raise ValidationError(f"modulus must be positive, got {m}")
        g = math.gcd(modulus, m)
        if (r - x) % g:
            raise ValidationError(f"inconsistent congruences modulo {modulus} and {m}")
        step = (r - x) // g * pow(modulus // g, -1, m // g) if m // g > 1 else 0
        x += modulus * step
        modulus = modulus // g * m
        x %= modulus
    return x


# ---------------------------------------------------------------------------
# squarefree bookkeeping
# ---------------------------------------------------------------------------

def squarefree_decompose(n: int) -> tuple[int, int]:
    """n = f*f*s with s squarefree; returns (f, s)."""
    if n < 0:
        raise ValidationError("negative discriminant")
    if n == 0:
        return 0, 1
    f, s = 1, 1
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        f *= d ** (e // 2)
        if e % 2:
            s *= d
        d += 1 if d == 2 else 2
    return f, s * n


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 0:
        raise ValueError("negative radicand")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _floor_dyadic(x: Fraction, bits: int) -> Fraction:
    return Fraction(math.floor(x * (1 << bits)), 1 << bits)


def _ceil_dyadic(x: Fraction, bits: int) -> Fraction:
    return Fraction(math.ceil(x * (1 << bits)), 1 << bits)


# ---------------------------------------------------------------------------
# intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealInterval:
    lo: Fraction
    hi: Fraction
    precision: int = 0

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "RealInterval":
        x = Fraction(x)
        return cls(x, x, PRECISION_CAP)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, RealInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def _coerce(self, other) -> "RealInterval":
        return other if isinstance(other, RealInterval) else RealInterval.point(other)

    def __add__(self, other):
        o = self._coerce(other)
        return RealInterval(self.lo + o.lo, self.hi + o.hi, min(self.precision, o.precision))

    __radd__ = __add__

    def __neg__(self):
        return RealInterval(-self.hi, -self.lo, self.precision)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RealInterval(min(ps), max(ps), min(self.precision, o.precision))

    __rmul__ = __mul__

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RealInterval(Fraction(0), max(-self.lo, self.hi), self.precision)

    def dyadic_strings(self) -> list[str]:
        return [str(self.lo), str(self.hi)]


# ---------------------------------------------------------------------------
# real quadratic surds
# ---------------------------------------------------------------------------

def _coerce_terms(x) -> dict[int, Fraction]:
    if isinstance(x, AlgebraicReal):
        return x._terms
    if isinstance(x, (int, Fraction)):
        return {1: Fraction(x)} if x else {}
    raise TypeError(f"unsupported operand {type(x).__name__}")


class AlgebraicReal:
    """Finite Q-linear combination of square roots of squarefree integers."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, value=0):
        if isinstance(value, AlgebraicReal):
            self._terms = value._terms
        elif isinstance(value, dict):
            self._terms = {s: Fraction(c) for s, c in value.items() if c}
        else:
            self._terms = _coerce_terms(Fraction(value))
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[int, Fraction]) -> "AlgebraicReal":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def sqrt(cls, x) -> "AlgebraicReal":
        x = Fraction(x)
        if x < 0:
            raise ValidationError("negative discriminant")
        # sqrt(p/q) = sqrt(p*q)/q
        f, s = squarefree_decompose(x.numerator * x.denominator)
        if f == 0:
            return cls(0)
        return cls._raw({s: Fraction(f, x.denominator)})

    @property
    def terms(self) -> Mapping[int, Fraction]:
        return dict(self._terms)

    def is_rational(self) -> bool:
        return all(s == 1 for s in self._terms)

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self._terms.get(1, Fraction(0))

    def coefficient(self, s: int) -> Fraction:
        return self._terms.get(s, Fraction(0))

    # ring operations -----------------------------------------------------
    def __add__(self, other):
        try:
            o = _coerce_terms(other)
        except TypeError:
            return NotImplemented
        t = dict(self._terms)
        for s, c in o.items():
            v = t.get(s, 0) + c
            if v:
                t[s] = v
            else:
                t.pop(s, None)
        return AlgebraicReal._raw(t)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicReal._raw({s: -c for s, c in self._terms.items()})

    def __sub__(self, other):
        try:
            return self + (-AlgebraicReal._raw(dict(_coerce_terms(other))))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return AlgebraicReal._raw({})
            return AlgebraicReal._raw({s: c * other for s, c in self._terms.items()})
        if not isinstance(other, AlgebraicReal):
            return NotImplemented
        t: dict[int, Fraction] = {}
        for s1, c1 in self._terms.items():
            for s2, c2 in other._terms.items():
                g = math.gcd(s1, s2)
                s = (s1 // g) * (s2 // g)
                v = t.get(s, 0) + c1 * c2 * g
                if v:
                    t[s] = v
                else:
                    t.pop(s, None)
        return AlgebraicReal._raw(t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, AlgebraicReal):
            if not other.is_rational():
                raise TypeError("division by an irrational surd is not supported")
            other = other.to_fraction()
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        if other == 0:
            raise ZeroDivisionError("division by zero")
        return AlgebraicReal._raw({s: c / other for s, c in self._terms.items()})

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result, base = AlgebraicReal(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # order ---------------------------------------------------------------
    def enclose(self, bits: int = START_BITS) -> RealInterval:
        """Dyadic interval of width <= 2**-bits containing the value."""
        lo = hi = Fraction(0)
        mass = sum(abs(c) for s, c in self._terms.items() if s != 1)
        k = bits + 3 + max(0, math.ceil(mass).bit_length())
        scale = 1 << k
        for s, c in self._terms.items():
            if s == 1:
                lo += c
                hi += c
                continue
            r = math.isqrt(s * scale * scale)
            a, b = Fraction(r, scale) * c, Fraction(r + 1, scale) * c
            lo += min(a, b)
            hi += max(a, b)
        if lo == hi:
            return RealInterval(lo, hi, PRECISION_CAP)
        return RealInterval(_floor_dyadic(lo, bits + 2), _ceil_dyadic(hi, bits + 2), bits)

    def sign(self) -> int:
        if not self._terms:
            return 0
        if self.is_rational():
            return 1 if self._terms[1] > 0 else -1
        bits = START_BITS
        while bits <= PRECISION_CAP:
            iv = self.enclose(bits)
            if iv.lo > 0:
                return 1
            if iv.hi < 0:
                return -1
            bits *= 2
        raise PrecisionError(f"sign of {self} undecided at {PRECISION_CAP} bits")

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __eq__(self, other):
        try:
            return self._terms == _coerce_terms(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(self.to_fraction())
            else:
                self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return bool(self._terms)

    def __float__(self):
        if self.is_rational():
            return float(self.to_fraction())
        bits = START_BITS
        while True:
            iv = self.enclose(bits)
            if iv.lo > 0 or iv.hi < 0 or bits >= PRECISION_CAP:
                m = max(abs(iv.lo), abs(iv.hi))
                if iv.width <= m * Fraction(1, 1 << 60) or bits >= PRECISION_CAP:
                    return float(iv.mid)
            bits *= 2

    def __floor__(self) -> int:
        if self.is_rational():
            return math.floor(self.to_fraction())
        n = math.floor(self.enclose(START_BITS).lo)
        while self >= n + 1:
            n += 1
        while self < n:
            n -= 1
        return n

    def __ceil__(self) -> int:
        return -math.floor(-self)

    def __repr__(self):
        return f"AlgebraicReal({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for s in sorted(self._terms):
            c = self._terms[s]
            parts.append(str(c) if s == 1 else f"{c}*sqrt({s})")
        return " + ".join(parts)


def as_real(x) -> AlgebraicReal:
    return x if isinstance(x, AlgebraicReal) else AlgebraicReal(x)


def simplify(x):
    """Collapse a rational AlgebraicReal to a Fraction; leave everything else alone."""
    if isinstance(x, AlgebraicReal) and x.is_rational():
        return x.to_fraction()
    if isinstance(x, int):
        return Fraction(x)
    return x


def sign(x) -> int:
    if isinstance(x, AlgebraicReal):
        return x.sign()
    return (x > 0) - (x < 0)


def round_half_away(x) -> int:
    """Nearest integer, ties away from zero; exact for rationals and surds."""
    if sign(x) >= 0:
        return math.floor(x + Fraction(1, 2))
    return -math.floor(-x + Fraction(1, 2))


# ---------------------------------------------------------------------------
# rational powers of positive surds
# ---------------------------------------------------------------------------

def _log_positive(x) -> float:
    if isinstance(x, AlgebraicReal):
        if x.is_rational():
            x = x.to_fraction()
        else:
            iv = x.enclose(START_BITS)
            bits = START_BITS
            while iv.lo <= 0 or iv.width > iv.lo * Fraction(1, 1 << 50):
                bits *= 2
                if bits > PRECISION_CAP:
                    raise PrecisionError("cannot bound a positive surd away from zero")
                iv = x.enclose(bits)
            x = iv.lo
    x = Fraction(x)
    return math.log(x.numerator) - math.log(x.denominator)


def _root_lo(x: Fraction, v: int, bits: int) -> Fraction:
    """Lower dyadic bound of x**(1/v) for x >= 0."""
    n = math.floor(x * (1 << (bits * v)))
    return Fraction(iroot(n, v), 1 << bits)


def _root_hi(x: Fraction, v: int, bits: int) -> Fraction:
    n = math.ceil(x * (1 << (bits * v)))
    r = iroot(n, v)
    if r ** v < n:
        r += 1
    return Fraction(r, 1 << bits)


def _perfect_root(x: Fraction, v: int) -> Fraction | None:
    rn, rd = iroot(x.numerator, v), iroot(x.denominator, v)
    if rn ** v == x.numerator and rd ** v == x.denominator:
        return Fraction(rn, rd)
    return None


class Radical:
    """Nonnegative real of the form prod base_k ** exp_k (bases positive surds, exps rational).

    Zero is represented separately.  Products, quotients and rational powers are
    closed; comparisons are exact (raise both sides to a common integer power).
    """

    __slots__ = ("factors", "zero")

    def __init__(self, factors=None, zero: bool = False):
        self.zero = zero
        self.factors: tuple = () if zero else self._normalize(factors or {})

    @staticmethod
    def _normalize(factors) -> tuple:
        items = factors.items() if isinstance(factors, dict) else factors
        merged: dict = {}
        rational = Fraction(1)
        for base, e in items:
            e = Fraction(e)
            base = simplify(base)
            if e == 0 or base == 1:
                continue
            if isinstance(base, Fraction):
                if base <= 0:
                    raise ValueError("radical bases must be positive")
                if e.denominator == 1:
                    rational *= base ** int(e)
                    continue
                root = _perfect_root(base, e.denominator)
                if root is not None:
                    rational *= root ** e.numerator
                    continue
            merged[base] = merged.get(base, Fraction(0)) + e
        if rational != 1:
            merged[rational] = merged.get(rational, Fraction(0)) + 1
        out = [(b, e) for b, e in merged.items() if e != 0]
        out.sort(key=lambda be: (isinstance(be[0], AlgebraicReal), str(be[0])))
        return tuple(out)

    @classmethod
    def of(cls, x, exponent=Fraction(1)) -> "Radical":
        """|x| ** exponent for rational or surd x (x = 0 gives zero; exponent > 0)."""
        x = simplify(x)
        if x == 0:
            if Fraction(exponent) <= 0:
                raise ZeroDivisionError("zero to a non-positive power")
            return cls(zero=True)
        x = abs(x)
        return cls({x: exponent})

    @classmethod
    def zero_value(cls) -> "Radical":
        return cls(zero=True)

    def __mul__(self, other):
        if not isinstance(other, Radical):
            other = Radical.of(other)
        if self.zero or other.zero:
            return Radical(zero=True)
        return Radical(list(self.factors) + list(other.factors))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Radical):
            other = Radical.of(other)
        if other.zero:
            raise ZeroDivisionError("division by zero radical")
        if self.zero:
            return Radical(zero=True)
        return Radical(list(self.factors) + [(b, -e) for b, e in other.factors])

    def __rtruediv__(self, other):
        return Radical.of(other) / self

    def __pow__(self, e):
        e = Fraction(e)
        if self.zero:
            if e <= 0:
                raise ZeroDivisionError("zero to a non-positive power")
            return self
        return Radical([(b, x * e) for b, x in self.factors])

    def is_rational(self) -> bool:
        return self.zero or all(isinstance(b, Fraction) and e.denominator == 1 for b, e in self.factors)

    def as_fraction(self) -> Fraction | None:
        if self.zero:
            return Fraction(0)
        if not self.is_rational():
            return None
        return reduce(lambda acc, be: acc * be[0] ** int(be[1]), self.factors, Fraction(1))

    def log(self) -> float:
        if self.zero:
            return -math.inf
        return sum(float(e) * _log_positive(b) for b, e in self.factors)

    def __float__(self):
        if self.zero:
            return 0.0
        return math.exp(self.log())

    def _log_mass(self) -> float:
        return sum(abs(float(e) * _log_positive(b)) for b, e in self.factors) + 1.0

    def compare(self, other) -> int:
        if not isinstance(other, Radical):
            other = Radical.of(other)
        if self.zero or other.zero:
            return (not self.zero) - (not other.zero)
        diff = self.log() - other.log()
        if abs(diff) > 1e-9 * (self._log_mass() + other._log_mass()):
            return 1 if diff > 0 else -1
        return self._exact_compare(other)

    def _exact_compare(self, other: "Radical") -> int:
        ratio: dict = {}
        for b, e in self.factors:
            ratio[b] = ratio.get(b, Fraction(0)) + e
        for b, e in other.factors:
            ratio[b] = ratio.get(b, Fraction(0)) - e
        q = reduce(lambda a, e: a * e.denominator // math.gcd(a, e.denominator), ratio.values(), 1)
        num, den = AlgebraicReal(1), AlgebraicReal(1)
        for b, e in ratio.items():
            k = int(e * q)
            b = as_real(b)
            if k > 0:
                num = num * b ** k
            elif k < 0:
                den = den * b ** (-k)
        return (num - den).sign()

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def __eq__(self, other):
        if not isinstance(other, (Radical, int, Fraction, AlgebraicReal)):
            return NotImplemented
        return self.compare(other) == 0

    def __hash__(self):
        f = self.as_fraction()
        return hash(f) if f is not None else hash(self.factors)

    def enclose(self, bits: int = START_BITS) -> RealInterval:
        """Rigorous dyadic enclosure (not width-controlled beyond ~2**-bits relative)."""
        if self.zero:
            return RealInterval.point(0)
        f = self.as_fraction()
        if f is not None:
            return RealInterval.point(f)
        lo, hi = Fraction(1), Fraction(1)
        work = bits + 16
        for b, e in self.factors:
            if isinstance(b, Fraction):
                iv = RealInterval.point(b)
            else:
                wb = work
                iv = b.enclose(wb)
                while iv.lo <= 0:
                    wb *= 2
                    if wb > PRECISION_CAP:
                        raise PrecisionError("cannot bound a positive surd away from zero")
                    iv = b.enclose(wb)
            blo, bhi = iv.lo, iv.hi
            if e < 0:
                blo, bhi = 1 / bhi, 1 / blo
            u, v = abs(e.numerator), e.denominator
            lo *= _root_lo(blo ** u, v, work)
            hi *= _root_hi(bhi ** u, v, work)
        return RealInterval(_floor_dyadic(lo, work), _ceil_dyadic(hi, work), bits)

    def upper_rational(self, bits: int = 32) -> Fraction:
        return self.enclose(bits).hi

    def __repr__(self):
        if self.zero:
            return "Radical(0)"
        return "Radical(" + " * ".join(f"({b})^({e})" for b, e in self.factors) + ")"

    def __str__(self):
        f = self.as_fraction()
        if f is not None:
            return str(f)
        return " * ".join(f"({b})^({e})" for b, e in self.factors)


def radical_max(values: Iterable[Radical]) -> Radical:
    best = None
    for v in values:
        if best is None or v > best:
            best = v
    if best is None:
        return Radical.zero_value()
    return best


# ---------------------------------------------------------------------------
# constants and textual values
# ---------------------------------------------------------------------------

_ALLOWED_FUNCS = {"sqrt"}


def _eval_node(node) -> AlgebraicReal:
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return AlgebraicReal(node.value)
    if isinstance(node, ast.Constant) and isinstance(node.value, float):
        return AlgebraicReal(Fraction(repr(node.value)))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        left, right = _eval_node(node.left), _eval_node(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if not right.is_rational():
                raise ValidationError("division by an irrational value")
            return left / right.to_fraction()
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _ALLOWED_FUNCS:
        if len(node.args) != 1:
            raise ValidationError("sqrt takes one argument")
        arg = _eval_node(node.args[0])
        if not arg.is_rational():
            raise ValidationError("sqrt of an irrational value")
        return AlgebraicReal.sqrt(arg.to_fraction())
    raise ValidationError(f"unsupported expression {ast.dump(node)}")


NAMED_CONSTANTS = {
    "phi": "(1+sqrt(5))/2",
    "golden": "(1+sqrt(5))/2",
    "sqrt2": "sqrt(2)",
}


def parse_value(text) -> Fraction | AlgebraicReal:
    """Parse ``p/q``, ``(p+q*sqrt(d))/r`` and friends.  Rationals come back as Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, AlgebraicReal):
        return simplify(text)
    s = str(text).strip()
    s = NAMED_CONSTANTS.get(s.lower(), s)
    try:
        tree = ast.parse(s, mode="eval")
    except SyntaxError as exc:
        raise ValidationError(f"cannot parse value {text!r}") from exc
    return simplify(_eval_node(tree))


def golden_ratio() -> AlgebraicReal:
    return (1 + AlgebraicReal.sqrt(5)) / 2


def refine_constant(spec, bits: int) -> RealInterval:
    """Interval of width <= 2**-bits around a rational or ``(p + q*sqrt(d))/r``."""
    if isinstance(spec, tuple):
        p, q, d, r = spec
        if d < 0:
            raise ValidationError("negative discriminant")
        value = simplify((AlgebraicReal(p) + AlgebraicReal.sqrt(d) * q) / Fraction(r))
    else:
        value = parse_value(spec)
    if isinstance(value, Fraction):
        return RealInterval.point(value)
    return value.enclose(bits)


def format_value(x) -> str:
    """Inverse of :func:`parse_value` for rationals and surds."""
    x = simplify(x)
    if isinstance(x, Fraction):
        return str(x)
    parts = []
    for s, c in sorted(x.terms.items()):
        parts.append(f"({c})" if s == 1 else f"({c})*sqrt({s})")
    return "+".join(parts)


# ---------------------------------------------------------------------------
# S-numbers
# ---------------------------------------------------------------------------

class SNumber(Mapping):
    """An element of Q_S: one exact value per place of S."""

    def __init__(self, values: Mapping):
        vals = {}
        for place, v in values.items():
            place = as_place(place)
            v = parse_value(v) if isinstance(v, str) else simplify(v)
            if not place.is_infinite and not isinstance(v, Fraction):
                raise ValidationError(f"value at {place} must be rational")
            vals[place] = v
        self._values = dict(sorted(vals.items(), key=lambda kv: kv[0].sort_key()))

    def __getitem__(self, place):
        place = as_place(place)
        try:
            return self._values[place]
        except KeyError:
            raise ValidationError(f"place {place} not in {list(self._values)}") from None

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    @property
    def places(self) -> tuple[Place, ...]:
        return tuple(self._values)

    def __eq__(self, other):
        if isinstance(other, SNumber):
            return self._values == other._values
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._values.items()))

    def __repr__(self):
        return f"SNumber({format_snumber(self)})"


def parse_snumber(text: str) -> SNumber:
    """``"2:7/4, inf:sqrt(5)/2"`` -> SNumber.  Commas inside parentheses are respected."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    values = {}
    for part in parts:
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ValidationError(f"expected place:value, got {part!r}")
        place, value = part.split(":", 1)
        p = as_place(place)
        if p in values:
            raise ValidationError(f"duplicate place {p}")
        values[p] = parse_value(value)
    return SNumber(values)


def format_snumber(x: SNumber) -> str:
    return ", ".join(f"{p}:{format_value(v)}" for p, v in x.items())


class SMatrix:
    """An m x n matrix over Q_S, stored as one m x n matrix per place.

    ``alpha.at(place)[j][i]`` is the entry multiplying ``a_j`` in the ``i``-th linear form.
    """

    def __init__(self, values: Mapping, m: int | None = None, n: int | None = None):
        vals = {}
        for place, rows in values.items():
            place = as_place(place)
            mat = tuple(tuple(_place_value(place, v) for v in row) for row in rows)
            vals[place] = mat
        if not vals:
            raise ValidationError("empty matrix")
        shapes = {(len(mat), len(mat[0]) if mat else 0) for mat in vals.values()}
        if len(shapes) != 1:
            raise ValidationError(f"inconsistent shapes across places: {shapes}")
        (mm, nn), = shapes
        if (m is not None and m != mm) or (n is not None and n != nn) or mm < 1 or nn < 1:
            raise ValidationError(f"bad matrix shape {mm}x{nn}")
        self.m, self.n = mm, nn
        self._values = dict(sorted(vals.items(), key=lambda kv: kv[0].sort_key()))

    @classmethod
    def real(cls, rows) -> "SMatrix":
        if not isinstance(rows[0], (list, tuple)):
            rows = [rows]
        return cls({INF: rows})

    @classmethod
    def scalar(cls, values: Mapping) -> "SMatrix":
        """1 x 1 matrix from a place -> value mapping (or SNumber)."""
        return cls({p: [[v]] for p, v in values.items()})

    @property
    def places(self) -> tuple[Place, ...]:
        return tuple(self._values)

    def at(self, place) -> tuple[tuple, ...]:
        place = as_place(place)
        try:
            return self._values[place]
        except KeyError:
            raise ValidationError(f"matrix has no value at place {place}") from None

    def column_form(self, place, i: int) -> tuple:
        """Coefficients (alpha_{0,i}, ..., alpha_{m-1,i}) at ``place``."""
        return tuple(row[i] for row in self.at(place))

    def apply(self, a: Sequence, place) -> tuple:
        """The vector a * alpha at ``place`` (length n)."""
        mat = self.at(place)
        return tuple(simplify(sum((a[j] * mat[j][i] for j in range(self.m)), Fraction(0))) for i in range(self.n))

    def to_config(self) -> dict:
        return {str(p): [[format_value(v) for v in row] for row in mat] for p, mat in self._values.items()}

    def __repr__(self):
        return f"SMatrix({self.to_config()})"


class SVector:
    """An n-vector over Q_S stored per place."""

    def __init__(self, values: Mapping):
        vals = {}
        for place, vec in values.items():
            place = as_place(place)
            vals[place] = tuple(_place_value(place, v) for v in vec)
        lengths = {len(v) for v in vals.values()}
        if len(lengths) != 1:
            raise ValidationError("inconsistent vector lengths across places")
        self.n = lengths.pop()
        self._values = dict(sorted(vals.items(), key=lambda kv: kv[0].sort_key()))

    @classmethod
    def from_snumbers(cls, items: Sequence[SNumber]) -> "SVector":
        places = items[0].places
        return cls({p: [s[p] for s in items] for p in places})

    @classmethod
    def zero(cls, n: int, places) -> "SVector":
        return cls({p: [0] * n for p in places})

    @property
    def places(self) -> tuple[Place, ...]:
        return tuple(self._values)

    def at(self, place) -> tuple:
        place = as_place(place)
        try:
            return self._values[place]
        except KeyError:
            raise ValidationError(f"vector has no value at place {place}") from None

    def __getitem__(self, i: int) -> SNumber:
        return SNumber({p: v[i] for p, v in self._values.items()})

    def __len__(self):
        return self.n

    def items(self):
        return self._values.items()

    def __eq__(self, other):
        return isinstance(other, SVector) and self._values == other._values

    def __hash__(self):
        return hash(tuple(self._values.items()))

    def to_config(self) -> dict:
        return {str(p): [format_value(v) for v in vec] for p, vec in self._values.items()}

    def __repr__(self):
        return f"SVector({self.to_config()})"


def _place_value(place: Place, v):
    v = parse_value(v) if isinstance(v, str) else simplify(v)
    if not place.is_infinite and not isinstance(v, Fraction):
        raise ValidationError(f"value at {place} must be rational, got {v}")
    return v
