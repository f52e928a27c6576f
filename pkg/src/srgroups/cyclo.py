"""Exact arithmetic in cyclotomic fields Q(zeta_n).

A :class:`CycNumber` is stored in the power basis of Q(zeta_n) modulo the
cyclotomic polynomial Phi_n, where n is the smallest conductor of a field
containing the number.  Conductors are normalised to be odd or divisible
by 4, because Q(zeta_{2q}) = Q(zeta_q) for odd q.  With the conductor fixed,
the power-basis coordinates are unique, so equality and hashing are exact.
"""
from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

import numpy as np

Rational = Fraction
Scalar = Union["CycNumber", int, Fraction]

_INT64_SAFE = 1 << 62


class CyclotomicError(ValueError):
    """Base class for cyclotomic arithmetic errors."""


class ConductorError(CyclotomicError):
    pass


class EmbeddingError(CyclotomicError):
    pass


@lru_cache(maxsize=None)
def prime_factors(n: int) -> tuple[int, ...]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return tuple(out)


@lru_cache(maxsize=None)
def totient(n: int) -> int:
    r = n
    for p in prime_factors(n):
        r = r // p * (p - 1)
    return r


def normalize_conductor(n: int) -> int:
    """Smallest m with Q(zeta_m) = Q(zeta_n)."""
    return n // 2 if n % 4 == 2 else n


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first."""
    if n < 1:
        raise ConductorError(f"invalid conductor {n}")
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = _exact_monic_div(num, cyclotomic_poly(d))
    return tuple(num)


def _exact_monic_div(a: list[int], b: tuple[int, ...]) -> list[int]:
    a = list(a)
    db = len(b) - 1
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c:
            q[i - db] = c
            for j in range(db + 1):
                a[i - db + j] -= c * b[j]
    assert not any(a[:db]), "non-exact polynomial division"
    return q


@lru_cache(maxsize=None)
def reduction_table(n: int) -> np.ndarray:
    """Row j holds the coordinates of x^j mod Phi_n, for 0 <= j < n."""
    phi = totient(n)
    poly = cyclotomic_poly(n)
    tab = np.zeros((n, phi), dtype=np.int64)
    row = [0] * phi
    for j in range(n):
        if j < phi:
            row = [0] * phi
            row[j] = 1
        else:
            top = row[-1]
            row = [0] + row[:-1]
            if top:
                for k in range(phi):
                    row[k] -= top * poly[k]
        tab[j] = row
    tab.setflags(write=False)
    return tab


def reduce_dense(vec: np.ndarray, n: int) -> np.ndarray:
    """Reduce coefficient vectors of length n (last axis) modulo Phi_n."""
    tab = reduction_table(n)
    top = int(np.abs(vec).max(initial=0)) if vec.size else 0
    if top * int(np.abs(tab).max(initial=0)) * n < _INT64_SAFE:
        return vec.astype(np.int64) @ tab
    return vec.astype(object) @ tab.astype(object)


def _bezout_split(n: int, p: int) -> tuple[int, int, int]:
    """For p exactly dividing n: m = n/p and u, v with u*m + v*p = 1."""
    m = n // p
    u = pow(m, -1, p)
    v = (1 - u * m) // p
    return m, u % p, v % m


class CycNumber:
    """An element of a cyclotomic field, kept in canonical form."""

    __slots__ = ("_n", "_num", "_den", "_stated", "_hash")

    def __init__(self, value: Union[int, Fraction] = 0):
        f = Fraction(value)
        self._n = 1
        self._num = (f.numerator,)
        self._den = f.denominator
        self._stated = 1
        self._hash = None

    @classmethod
    def _raw(cls, n: int, num: tuple, den: int, stated: int | None = None) -> "CycNumber":
        obj = cls.__new__(cls)
        obj._n = n
        obj._num = num
        obj._den = den
        obj._stated = n if stated is None else stated
        obj._hash = None
        return obj

    @classmethod
    def from_terms(cls, n: int, terms: Mapping[int, Union[int, Fraction]]) -> "CycNumber":
        """Build sum(c * zeta_n^e) from an exponent -> coefficient map."""
        if n < 1:
            raise ConductorError(f"invalid conductor {n}")
        fr = {e % n: Fraction(c) for e, c in terms.items() if c}
        den = 1
        for c in fr.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        vec = np.zeros(n, dtype=object)
        for e, c in fr.items():
            vec[e] += c.numerator * (den // c.denominator)
        return _canonical(n, vec, den)

    # -- accessors -------------------------------------------------------
    @property
    def conductor(self) -> int:
        return self._n

    @property
    def stated_conductor(self) -> int:
        return self._stated

    @property
    def denominator(self) -> int:
        return self._den

    @property
    def numerators(self) -> tuple:
        return self._num

    @property
    def coefficients(self) -> dict[int, Fraction]:
        """Nonzero power-basis coefficients at the canonical conductor."""
        return {e: Fraction(c, self._den) for e, c in enumerate(self._num) if c}

    def terms(self) -> dict[int, Fraction]:
        """Nonzero power-basis coefficients at the stated conductor."""
        num, den = self.coords_at(self._stated)
        return {e: Fraction(int(c), den) for e, c in enumerate(num) if c}

    def coords_at(self, n: int) -> tuple[np.ndarray, int]:
        """Integer coordinates (numerators, common denominator) in Q(zeta_n)."""
        if n % self._n:
            raise EmbeddingError(f"conductor {self._n} does not divide {n}")
        vec = np.zeros(n, dtype=object)
        step = n // self._n
        vec[: len(self._num) * step : step] = self._num
        return reduce_dense(vec, n), self._den

    def is_zero(self) -> bool:
        return self._n == 1 and self._num[0] == 0

    def is_rational(self) -> bool:
        return self._n == 1

    def to_fraction(self) -> Fraction:
        if self._n != 1:
            raise CyclotomicError("not a rational number")
        return Fraction(self._num[0], self._den)

    def to_complex(self) -> complex:
        n = self._n
        return sum(c * cmath.exp(2j * cmath.pi * e / n) for e, c in enumerate(self._num) if c) / self._den

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other: Scalar) -> "CycNumber":
        other = as_cyc(other)
        if other is NotImplemented:
            return NotImplemented
        if self._n == other._n:
            n = self._n
            den = self._den * other._den // math.gcd(self._den, other._den)
            a, b = den // self._den, den // other._den
            vec = np.array([x * a + y * b for x, y in zip(self._num, other._num)], dtype=object)
            return _shrink(n, vec, den)
        n = math.lcm(self._n, other._n)
        va, da = self.coords_at(n)
        vb, db = other.coords_at(n)
        den = da * db // math.gcd(da, db)
        return _shrink(n, va * (den // da) + vb * (den // db), den)

    __radd__ = __add__

    def __neg__(self) -> "CycNumber":
        return CycNumber._raw(self._n, tuple(-c for c in self._num), self._den)

    def __sub__(self, other: Scalar) -> "CycNumber":
        other = as_cyc(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "CycNumber":
        return as_cyc(other) + (-self)

    def __mul__(self, other: Scalar) -> "CycNumber":
        other = as_cyc(other)
        if other is NotImplemented:
            return NotImplemented
        if other._n == 1 or self._n == 1:
            if self._n == 1:
                self, other = other, self
            q = other._num[0]
            if q == 0:
                return CycNumber(0)
            return _normalize_den(self._n, [c * q for c in self._num], self._den * other._den)
        n = math.lcm(self._n, other._n)
        a = np.zeros(n, dtype=object)
        b = np.zeros(n, dtype=object)
        sa, sb = n // self._n, n // other._n
        a[: len(self._num) * sa : sa] = self._num
        b[: len(other._num) * sb : sb] = other._num
        prod = _cyclic_convolve(a, b, n)
        return _shrink(n, reduce_dense(prod, n), self._den * other._den)

    __rmul__ = __mul__

    def inv(self) -> "CycNumber":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        n = self._n
        if n == 1:
            return CycNumber(Fraction(self._den, self._num[0]))
        # Multiply by the relative conjugates over Q(zeta_{n/p}); the product
        # is the relative norm, which lives in the smaller field.
        p = prime_factors(n)[-1]
        step = n // p
        others = CycNumber(1)
        for a in range(1 + step, n, step):
            if math.gcd(a, n) == 1:
                others = others * self.galois(a)
        norm = self * others
        if norm.conductor == n:
            raise CyclotomicError("relative norm did not descend")
        return others * norm.inv()

    def __truediv__(self, other: Scalar) -> "CycNumber":
        other = as_cyc(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other: Scalar) -> "CycNumber":
        return as_cyc(other) * self.inv()

    def __pow__(self, k: int) -> "CycNumber":
        if k < 0:
            return self.inv() ** (-k)
        result = CycNumber(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def galois(self, a: int) -> "CycNumber":
        """Apply the automorphism zeta_n -> zeta_n^a (a coprime to n)."""
        n = self._n
        if math.gcd(a, n) != 1:
            raise CyclotomicError(f"{a} is not a unit modulo {n}")
        return CycNumber.from_terms(n, {e * a: Fraction(c, self._den) for e, c in enumerate(self._num) if c})

    def conj(self) -> "CycNumber":
        return self.galois(-1)

    # -- comparison ------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CycNumber(other)
        if not isinstance(other, CycNumber):
            return NotImplemented
        return self._n == other._n and self._den == other._den and self._num == other._num

    def __hash__(self) -> int:
        if self._hash is None:
            if self._n == 1:
                self._hash = hash(Fraction(self._num[0], self._den))
            else:
                self._hash = hash((self._n, self._num, self._den))
        return self._hash

    def sort_key(self) -> str:
        return serialize(self)

    def __repr__(self) -> str:
        return f"CycNumber({serialize(self)!r})"

    def __str__(self) -> str:
        return serialize(self)


def _normalize_den(n: int, num, den: int, stated: int | None = None) -> CycNumber:
    num = [int(c) for c in num]
    g = den
    for c in num:
        if g == 1:
            break
        g = math.gcd(g, c)
    if g > 1:
        num = [c // g for c in num]
        den //= g
    return CycNumber._raw(n, tuple(num), den, stated)


def _cyclic_convolve(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    ia = np.nonzero(a)[0]
    ib = np.nonzero(b)[0]
    out = np.zeros(n, dtype=object)
    if len(ia) == 0 or len(ib) == 0:
        return out
    ma = max(abs(int(x)) for x in a[ia])
    mb = max(abs(int(x)) for x in b[ib])
    if ma * mb * min(len(ia), len(ib)) < _INT64_SAFE:
        full = np.convolve(a.astype(np.int64), b.astype(np.int64))
        res = full[:n].copy()
        res[: len(full) - n] += full[n:]
        return res
    for i in ia:
        ai = a[i]
        for j in ib:
            out[(i + j) % n] += ai * b[j]
    return out


def _canonical(n: int, vec: np.ndarray, den: int) -> CycNumber:
    """Canonical form of sum(vec[e] zeta_n^e) / den, vec of length n."""
    if n % 4 == 2:
        q = n // 2
        half = (q + 1) // 2
        new = np.zeros(q, dtype=object)
        for e in np.nonzero(vec)[0]:
            e = int(e)
            c = vec[e]
            new[(e * half) % q] += -c if e % 2 else c
        n, vec = q, new
    return _shrink(n, reduce_dense(vec, n), den)


def _shrink(n: int, num: np.ndarray, den: int) -> CycNumber:
    """Lower the conductor of a reduced vector at conductor n as far as possible."""
    num = [int(c) for c in num]
    while n > 1:
        if not any(num):
            n, num = 1, [0]
            break
        for p in prime_factors(n):
            m = n // p
            if n % (p * p) == 0:
                if all(c == 0 for e, c in enumerate(num) if e % p):
                    sub = num[::p]
                    if m % 4 == 2:
                        res = _canonical(m, np.array(sub + [0] * (m - len(sub)), dtype=object), den)
                        return res
                    n, num = m, sub
                    break
            else:
                m, u, v = _bezout_split(n, p)
                # (p - 1) times the normalised relative trace, as monomials in zeta_m
                proj = [0] * m
                for e, c in enumerate(num):
                    if c:
                        beta = (e * v) % m
                        proj[beta] += c * (p - 1) if e % p == 0 else -c
                back = np.zeros(n, dtype=object)
                back[::p] = proj
                if [int(c) for c in reduce_dense(back, n)] == [c * (p - 1) for c in num]:
                    red = reduce_dense(np.array(proj, dtype=object), m)
                    return _shrink(m, red, den * (p - 1))
        else:
            break
    return _normalize_den(n, num, den)


def as_cyc(x) -> CycNumber:
    if isinstance(x, CycNumber):
        return x
    if isinstance(x, (int, Fraction)):
        return CycNumber(x)
    return NotImplemented


def root_of_unity(n: int, k: int = 1) -> CycNumber:
    """zeta_n^k with zeta_n = exp(2 pi i / n)."""
    if n < 1:
        raise ConductorError(f"invalid conductor {n}")
    return CycNumber.from_terms(n, {k % n: 1})


def add(x: Scalar, y: Scalar) -> CycNumber:
    return as_cyc(x) + as_cyc(y)


def mul(x: Scalar, y: Scalar) -> CycNumber:
    return as_cyc(x) * as_cyc(y)


def neg(x: Scalar) -> CycNumber:
    return -as_cyc(x)


def inv(x: Scalar) -> CycNumber:
    return as_cyc(x).inv()


def conj(x: Scalar) -> CycNumber:
    return as_cyc(x).conj()


def embed(x: Scalar, n: int) -> CycNumber:
    """The same number, viewed as an element of Q(zeta_n)."""
    x = as_cyc(x)
    if n < 1:
        raise ConductorError(f"invalid conductor {n}")
    if n % x.conductor:
        raise EmbeddingError(f"conductor {x.conductor} does not divide {n}")
    return CycNumber._raw(x._n, x._num, x._den, n)


def canonicalize(x: CycNumber) -> CycNumber:
    return CycNumber._raw(x._n, x._num, x._den)


# -- text format -----------------------------------------------------------

def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def serialize(x: Scalar) -> str:
    """Text form 'c0 + c1*z(n)^1 + ...' of the canonical representation."""
    x = as_cyc(x)
    coeffs = x.coefficients
    if not coeffs:
        return "0"
    parts = []
    for e in sorted(coeffs):
        c = coeffs[e]
        parts.append(_fmt(c) if e == 0 else f"{_fmt(c)}*z({x.conductor})^{e}")
    return " + ".join(parts)


_TERM = re.compile(r"^([+-]?\d+(?:/\d+)?)(?:\*z\((\d+)\)\^(\d+))?$")


def parse(text: str) -> CycNumber:
    """Inverse of :func:`serialize`; terms may use different conductors."""
    total = CycNumber(0)
    for raw in text.split(" + "):
        term = raw.replace(" ", "")
        mt = _TERM.match(term)
        if not mt:
            raise ValueError(f"cannot parse cyclotomic term {raw!r}")
        c = Fraction(mt.group(1))
        if mt.group(2) is None:
            total = total + c
        else:
            total = total + CycNumber.from_terms(int(mt.group(2)), {int(mt.group(3)): c})
    return total


def from_coords(n: int, num: Iterable[int], den: int = 1) -> CycNumber:
    """Number with power-basis coordinates num/den in Q(zeta_n)."""
    num = list(num)
    return CycNumber.from_terms(n, {e: Fraction(int(c), den) for e, c in enumerate(num) if c})


ZERO = CycNumber(0)
ONE = CycNumber(1)
