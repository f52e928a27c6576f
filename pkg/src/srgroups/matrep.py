"""Matrices over cyclotomic fields and finite matrix groups.

Small, user-facing linear algebra runs on :class:`CycMatrix` with exact
:class:`~srgroups.cyclo.CycNumber` entries.  Group-scale work (closure,
conjugation, membership) runs on integer coordinate arrays through
:mod:`srgroups.engine`.

Byte layout of :meth:`CycMatrix.to_bytes` (stable, used for hashing and
ordering): ASCII ``"<dim>\\n"`` followed by the UTF-8 text serialization of
each canonical entry in row-major order, each terminated by a NUL byte.
"""
from __future__ import annotations

import math
import os
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .cyclo import CycNumber, as_cyc, from_coords, serialize, parse, totient
from .engine import BoundError, FieldEngine, engine, hadamard_bound, l1_norms, rank_mod_p

DEFAULT_CAP = 200_000


class MatrepError(Exception):
    pass


class ShapeError(MatrepError):
    pass


class ClosureOverflowError(MatrepError):
    pass


class ContainmentError(MatrepError):
    pass


class PartitionError(MatrepError):
    pass


class InvarianceError(MatrepError):
    pass


# ---------------------------------------------------------------------------
# CycMatrix
# ---------------------------------------------------------------------------

class CycMatrix:
    """Immutable square matrix with CycNumber entries."""

    __slots__ = ("rows", "dim", "_hash", "_bytes")

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(tuple(as_cyc(x) if not isinstance(x, CycNumber) else x for x in r) for r in rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ShapeError("matrix must be square and nonempty")
        for r in rows:
            for x in r:
                if x is NotImplemented:
                    raise TypeError("entries must be int, Fraction or CycNumber")
        self.rows = rows
        self.dim = n
        self._hash = None
        self._bytes = None

    @classmethod
    def identity(cls, n: int) -> "CycMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, values: Sequence) -> "CycMatrix":
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_text(cls, rows: Sequence[Sequence[str]]) -> "CycMatrix":
        return cls([[parse(x) for x in r] for r in rows])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    @property
    def conductor(self) -> int:
        n = 1
        for r in self.rows:
            for x in r:
                n = math.lcm(n, x.conductor)
        return n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CycMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def __add__(self, other: "CycMatrix") -> "CycMatrix":
        _same_dim(self, other)
        return CycMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: "CycMatrix") -> "CycMatrix":
        _same_dim(self, other)
        return CycMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self) -> "CycMatrix":
        return CycMatrix([[-a for a in r] for r in self.rows])

    def __mul__(self, other):
        if isinstance(other, CycMatrix):
            _same_dim(self, other)
            cols = list(zip(*other.rows))
            return CycMatrix([[_dot(r, c) for c in cols] for r in self.rows])
        s = as_cyc(other)
        if s is NotImplemented:
            return NotImplemented
        return CycMatrix([[s * a for a in r] for r in self.rows])

    def __rmul__(self, other):
        s = as_cyc(other)
        if s is NotImplemented:
            return NotImplemented
        return CycMatrix([[s * a for a in r] for r in self.rows])

    def __pow__(self, k: int) -> "CycMatrix":
        if k < 0:
            return self.inverse() ** (-k)
        out = CycMatrix.identity(self.dim)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def apply(self, v: Sequence) -> tuple[CycNumber, ...]:
        v = [as_cyc(x) for x in v]
        if len(v) != self.dim:
            raise ShapeError("vector length mismatch")
        return tuple(_dot(r, v) for r in self.rows)

    def transpose(self) -> "CycMatrix":
        return CycMatrix(list(zip(*self.rows)))

    def conj(self) -> "CycMatrix":
        return CycMatrix([[a.conj() for a in r] for r in self.rows])

    def conj_transpose(self) -> "CycMatrix":
        return self.conj().transpose()

    def trace(self) -> CycNumber:
        t = CycNumber(0)
        for i in range(self.dim):
            t = t + self.rows[i][i]
        return t

    def is_identity(self) -> bool:
        return self == CycMatrix.identity(self.dim)

    def det(self) -> CycNumber:
        a = [list(r) for r in self.rows]
        n = self.dim
        sign = 1
        d = CycNumber(1)
        for c in range(n):
            piv = next((r for r in range(c, n) if not a[r][c].is_zero()), None)
            if piv is None:
                return CycNumber(0)
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                sign = -sign
            d = d * a[c][c]
            pinv = a[c][c].inv()
            for r in range(c + 1, n):
                if not a[r][c].is_zero():
                    f = a[r][c] * pinv
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return d if sign == 1 else -d

    def inverse(self) -> "CycMatrix":
        n = self.dim
        a = [list(r) + [CycNumber(1) if i == j else CycNumber(0) for j in range(n)] for i, r in enumerate(self.rows)]
        rref, piv = _rref(a, n)
        if len(piv) < n:
            raise ZeroDivisionError("matrix is singular")
        return CycMatrix([r[n:] for r in rref])

    def rank(self) -> int:
        return len(_rref([list(r) for r in self.rows], self.dim)[1])

    def nullspace(self) -> list[tuple[CycNumber, ...]]:
        return nullspace(self.rows, self.dim)

    def charpoly(self) -> list[CycNumber]:
        """Coefficients of det(x I - M), lowest degree first (Faddeev-LeVerrier)."""
        n = self.dim
        coeffs = [CycNumber(0)] * (n + 1)
        coeffs[n] = CycNumber(1)
        m = CycMatrix.identity(n)
        for k in range(1, n + 1):
            am = self * m
            c = -am.trace() * Fraction(1, k)
            coeffs[n - k] = c
            m = am + CycMatrix.diag([c] * n)
        return coeffs

    def serialize(self) -> list[list[str]]:
        return [[serialize(x) for x in r] for r in self.rows]

    def to_bytes(self) -> bytes:
        if self._bytes is None:
            parts = [f"{self.dim}\n".encode()]
            for r in self.rows:
                for x in r:
                    parts.append(serialize(x).encode() + b"\0")
            self._bytes = b"".join(parts)
        return self._bytes

    def to_complex(self) -> np.ndarray:
        return np.array([[x.to_complex() for x in r] for r in self.rows], dtype=complex)

    def __repr__(self) -> str:
        return f"CycMatrix({self.serialize()!r})"


def _same_dim(a: CycMatrix, b: CycMatrix) -> None:
    if a.dim != b.dim:
        raise ShapeError(f"dimension mismatch {a.dim} vs {b.dim}")


def _dot(r, c) -> CycNumber:
    acc = CycNumber(0)
    for x, y in zip(r, c):
        if not x.is_zero() and not y.is_zero():
            acc = acc + x * y
    return acc


def _rref(a: list[list[CycNumber]], ncols: int) -> tuple[list[list[CycNumber]], list[int]]:
    """Reduced row echelon form, pivoting only in the first ncols columns."""
    a = [list(r) for r in a]
    rows = len(a)
    piv = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, rows) if not a[i][c].is_zero()), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = a[r][c].inv()
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and not a[i][c].is_zero():
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv.append(c)
        r += 1
        if r == rows:
            break
    return a, piv


def rank_of(rows: Sequence[Sequence]) -> int:
    rows = [[as_cyc(x) for x in r] for r in rows]
    if not rows:
        return 0
    return len(_rref(rows, len(rows[0]))[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[tuple[CycNumber, ...]]:
    """Basis of {x : A x = 0} for a (possibly non-square) matrix A."""
    rows = [[as_cyc(x) for x in r] for r in rows]
    if not rows:
        return [tuple(CycNumber(1 if i == j else 0) for i in range(ncols)) for j in range(ncols)]
    rref, piv = _rref(rows, ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [CycNumber(0)] * ncols
        v[f] = CycNumber(1)
        for i, pc in enumerate(piv):
            v[pc] = -rref[i][f]
        basis.append(tuple(v))
    return basis


# functional aliases for the primitive operations
def product(a: CycMatrix, b: CycMatrix) -> CycMatrix:
    return a * b


def inverse(a: CycMatrix) -> CycMatrix:
    return a.inverse()


def transpose(a: CycMatrix) -> CycMatrix:
    return a.transpose()


def det(a: CycMatrix) -> CycNumber:
    return a.det()


def trace(a: CycMatrix) -> CycNumber:
    return a.trace()


def charpoly(a: CycMatrix) -> list[CycNumber]:
    return a.charpoly()


def rank(a: CycMatrix) -> int:
    return a.rank()


def block_diag(a: CycMatrix, b: CycMatrix) -> CycMatrix:
    n, m = a.dim, b.dim
    rows = [list(r) + [0] * m for r in a.rows] + [[0] * n + list(r) for r in b.rows]
    return CycMatrix(rows)


# ---------------------------------------------------------------------------
# Subspace
# ---------------------------------------------------------------------------

class Subspace:
    """A subspace of Q(zeta)^n given by an independent basis."""

    def __init__(self, ambient: int, basis: Sequence[Sequence]):
        basis = [tuple(as_cyc(x) for x in v) for v in basis]
        for v in basis:
            if len(v) != ambient:
                raise ShapeError("basis vector of wrong length")
        if basis and rank_of(basis) != len(basis):
            raise MatrepError("basis vectors are linearly dependent")
        self.ambient = ambient
        self.basis = tuple(basis)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence) -> bool:
        v = tuple(as_cyc(x) for x in v)
        return rank_of(list(self.basis) + [v]) == self.dim

    def coordinates(self, v: Sequence) -> tuple[CycNumber, ...]:
        """Coefficients of v in the basis; raises InvarianceError if v is outside."""
        v = [as_cyc(x) for x in v]
        k = self.dim
        rows = [[self.basis[j][i] for j in range(k)] + [v[i]] for i in range(self.ambient)]
        rref, piv = _rref(rows, k + 1)
        if k in piv:
            raise InvarianceError("vector not in subspace")
        coeffs = [CycNumber(0)] * k
        for i, pc in enumerate(piv):
            coeffs[pc] = rref[i][k]
        return tuple(coeffs)

    def __repr__(self) -> str:
        return f"Subspace(ambient={self.ambient}, dim={self.dim})"


# ---------------------------------------------------------------------------
# packing between CycMatrix and coordinate arrays
# ---------------------------------------------------------------------------

def pack(mats: Sequence[CycMatrix], n: int) -> tuple[np.ndarray, int]:
    """Integer coordinates (m, k, k, phi(n)) and common denominator."""
    k = mats[0].dim
    phi = totient(n)
    den = 1
    for m in mats:
        for r in m.rows:
            for x in r:
                den = math.lcm(den, x.denominator)
    out = np.zeros((len(mats), k, k, phi), dtype=np.int64)
    cache: dict[CycNumber, np.ndarray] = {}
    for t, m in enumerate(mats):
        for i, r in enumerate(m.rows):
            for j, x in enumerate(r):
                if x.is_zero():
                    continue
                c = cache.get(x)
                if c is None:
                    num, d = x.coords_at(n)
                    c = np.array([int(v) * (den // d) for v in num], dtype=np.int64)
                    cache[x] = c
                out[t, i, j] = c
    return out, den


def pack_vectors(vecs: Sequence[Sequence], n: int) -> tuple[np.ndarray, int]:
    k = len(vecs[0])
    phi = totient(n)
    vecs = [[as_cyc(x) for x in v] for v in vecs]
    den = 1
    for v in vecs:
        for x in v:
            den = math.lcm(den, x.denominator)
    out = np.zeros((len(vecs), k, phi), dtype=np.int64)
    for t, v in enumerate(vecs):
        for i, x in enumerate(v):
            if not x.is_zero():
                num, d = x.coords_at(n)
                out[t, i] = [int(c) * (den // d) for c in num]
    return out, den


def unpack(coords: np.ndarray, den: int, n: int) -> CycMatrix:
    k = coords.shape[0]
    return CycMatrix([[_entry(coords[i, j], den, n) for j in range(k)] for i in range(k)])


def unpack_vector(coords: np.ndarray, den: int, n: int) -> tuple[CycNumber, ...]:
    return tuple(_entry(c, den, n) for c in coords)


def _entry(c: np.ndarray, den: int, n: int) -> CycNumber:
    if not c.any():
        return CycNumber(0)
    return from_coords(n, c, den)


def _reduce_den(num: np.ndarray, den: int) -> tuple[np.ndarray, int]:
    g = den
    if num.size:
        g = math.gcd(den, int(np.gcd.reduce(np.abs(num).ravel())))
    if g == 0:
        return num, den
    if g > 1:
        num = num // g
        den //= g
    return num, den


# below this batch size the evaluation route beats building a block matrix
_FIXED_MIN = 32


class BatchOps:
    """Exact batched matrix products on coordinate arrays at conductor n."""

    def __init__(self, n: int):
        self.n = n
        self.eng: FieldEngine = engine(n)

    def evals(self, coords: np.ndarray) -> np.ndarray:
        """(..., r, c, phi) -> (..., phi, r, c) values mod p."""
        ev = self.eng.to_evals(coords)
        return np.moveaxis(ev, -1, -3)

    def product(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Numerators of a @ b (denominators multiply); a, b broadcastable (..., k, k, phi)."""
        if b.ndim == 4 and b.shape[0] == 1 and a.ndim == 4 and a.shape[0] > _FIXED_MIN:
            return self.mul_fixed_right(a, b[0])
        if a.ndim == 4 and a.shape[0] == 1 and b.ndim == 4 and b.shape[0] > _FIXED_MIN:
            return np.swapaxes(self.mul_fixed_right(np.swapaxes(b, 1, 2), np.swapaxes(a[0], 0, 1)), 1, 2)
        inf_a = float(np.abs(a).max(initial=0))
        l1_b = float(l1_norms(b).max(initial=0))
        bound = self.eng.product_coord_bound(inf_a, l1_b, terms=a.shape[-2])
        ev = self.eng.bmatmul(self.evals(a), self.evals(b))
        out = self.eng.to_coords(np.moveaxis(ev, -3, -1), bound)
        return out

    def mul_fixed_right(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """a (m, k, k, phi) times one matrix b (k, k, phi), via regular representations."""
        big = fixed_block_matrix(self.n, b)
        m, k = a.shape[0], a.shape[1]
        phi = a.shape[-1]
        inf_a = float(np.abs(a).max(initial=0))
        colsum = float(np.abs(big).sum(axis=0).max(initial=0))
        if inf_a * colsum >= 2.0 ** 52:
            raise BoundError("regular-representation product too large for exact floats")
        flat = a.reshape(m * k, k * phi).astype(np.float64)
        out = np.rint(flat @ big).astype(np.int64)
        return out.reshape(m, k, k, phi)

    def equal(self, a_num: np.ndarray, a_den: int, b_num: np.ndarray, b_den: int) -> np.ndarray:
        """Exact equality of coordinate batches with different denominators (last 3 axes per item)."""
        l = math.lcm(a_den, b_den)
        a = a_num * (l // a_den)
        b = b_num * (l // b_den)
        return np.all((a == b).reshape(a.shape[0], -1), axis=1)


def regular_matrix(n: int, b: np.ndarray) -> np.ndarray:
    """Integer matrix R with coords(x * b) = coords(x) @ R in Q(zeta_n)."""
    from .cyclo import reduction_table
    tab = reduction_table(n)
    phi = len(b)
    rows = np.arange(phi)
    out = np.zeros((phi, tab.shape[1]), dtype=np.int64)
    # row j: sum_t b_t * x^(j+t) reduced
    for t in np.nonzero(b)[0]:
        out += int(b[t]) * tab[(rows + t) % n]
    return out


def fixed_block_matrix(n: int, b: np.ndarray) -> np.ndarray:
    """Block matrix mapping a row of entries (k*phi) to the row of (x @ b)."""
    k, _, phi = b.shape
    big = np.zeros((k * phi, k * phi), dtype=np.float64)
    for l in range(k):
        for j in range(k):
            if b[l, j].any():
                big[l * phi:(l + 1) * phi, j * phi:(j + 1) * phi] = regular_matrix(n, b[l, j])
    return big


def linear_map_coords(coords: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """Apply an integer phi x phi map to the last axis exactly."""
    inf_a = float(np.abs(coords).max(initial=0))
    if inf_a * float(np.abs(mat).sum(axis=0).max(initial=0)) >= 2.0 ** 52:
        raise BoundError("linear map too large for exact floats")
    shape = coords.shape
    out = np.rint(coords.reshape(-1, shape[-1]).astype(np.float64) @ mat.astype(np.float64))
    return out.astype(np.int64).reshape(shape[:-1] + (mat.shape[1],))


def galois_matrix(n: int, a: int) -> np.ndarray:
    """Integer matrix of zeta_n -> zeta_n^a on power-basis coordinates."""
    from .cyclo import reduction_table
    phi = totient(n)
    return reduction_table(n)[(np.arange(phi) * a) % n].copy()


def monomial_matrix(n: int, j: int) -> np.ndarray:
    """Integer matrix of multiplication by zeta_n^j on coordinates."""
    from .cyclo import reduction_table
    phi = totient(n)
    return reduction_table(n)[(np.arange(phi) + j) % n].copy()


# ---------------------------------------------------------------------------
# finite matrix groups
# ---------------------------------------------------------------------------

_KEY_DTYPES = (np.int8, np.int16, np.int32, np.int64)


def _key_dtype(coords: np.ndarray):
    top = int(np.abs(coords).max(initial=0))
    for dt in _KEY_DTYPES:
        if top <= np.iinfo(dt).max:
            return dt
    raise OverflowError("coordinates too large")


class _Store:
    """Deduplicating element store with a common denominator."""

    def __init__(self, k: int, n: int, den: int = 1, cap: int = DEFAULT_CAP):
        self.k, self.n, self.den, self.cap = k, n, den, cap
        self.phi = totient(n)
        self.chunks: list[np.ndarray] = []
        self.index: dict[bytes, int] = {}
        self.dtype = np.int8
        self.count = 0

    def array(self) -> np.ndarray:
        if len(self.chunks) != 1:
            if self.chunks:
                self.chunks = [np.concatenate(self.chunks)]
            else:
                return np.zeros((0, self.k, self.k, self.phi), dtype=np.int64)
        return self.chunks[0]

    def _rekey(self, dtype) -> None:
        self.dtype = dtype
        arr = self.array().astype(dtype)
        self.index = {arr[i].tobytes(): i for i in range(len(arr))}

    def _rescale(self, factor: int) -> None:
        self.den *= factor
        self.chunks = [c * factor for c in self.chunks]
        arr = self.array()
        if len(arr):
            self._rekey(_key_dtype(arr))

    def keys_of(self, num: np.ndarray, den: int) -> list[bytes | None]:
        """Keys of foreign elements in this store's normalisation (None if not representable)."""
        if len(num) == 0:
            return []
        scaled = num * self.den
        if den != 1:
            ok = np.all((scaled % den == 0).reshape(len(num), -1), axis=1)
            scaled = scaled // den
        else:
            ok = np.ones(len(num), dtype=bool)
        info = np.iinfo(self.dtype)
        flat = scaled.reshape(len(num), -1)
        ok &= (flat.max(axis=1) <= info.max) & (flat.min(axis=1) >= info.min)
        cast = scaled.astype(self.dtype)
        return [cast[i].tobytes() if ok[i] else None for i in range(len(num))]

    def lookup(self, num: np.ndarray, den: int) -> np.ndarray:
        keys = self.keys_of(num, den)
        return np.array([self.index.get(k, -1) if k is not None else -1 for k in keys], dtype=np.int64)

    def add(self, num: np.ndarray, den: int) -> np.ndarray:
        """Insert a batch; returns indices of the newly added rows within the batch."""
        num, den = _reduce_den(num, den)
        if self.den % den:
            new = math.lcm(self.den, den)
            self._rescale(new // self.den)
        num = num * (self.den // den)
        dt = _key_dtype(num)
        if np.dtype(dt).itemsize > np.dtype(self.dtype).itemsize:
            if self.count:
                self._rekey(dt)
            else:
                self.dtype = dt
        cast = num.astype(self.dtype)
        fresh = []
        for i in range(len(num)):
            key = cast[i].tobytes()
            if key not in self.index:
                self.index[key] = self.count + len(fresh)
                fresh.append(i)
        if fresh:
            if self.count + len(fresh) > self.cap:
                raise ClosureOverflowError(f"closure exceeds cap {self.cap}")
            self.chunks.append(num[fresh])
            self.count += len(fresh)
        return np.array(fresh, dtype=np.int64)


class FiniteMatrixGroup:
    """A finite group of square matrices over a cyclotomic field."""

    def __init__(self, generators: Sequence[CycMatrix], elements: Sequence[CycMatrix] | None = None,
                 conductor: int | None = None, name: str | None = None):
        generators = list(generators)
        if not generators and not elements:
            raise MatrepError("need at least one generator or element")
        self.dim = (generators or elements)[0].dim
        for g in generators:
            if g.dim != self.dim:
                raise ShapeError("generators of different dimensions")
        self.generators = tuple(generators)
        n = conductor or 1
        for g in list(generators) + list(elements or []):
            n = math.lcm(n, g.conductor)
        self.conductor = n
        self.name = name
        self._store: _Store | None = None
        self._elements_cache: list[CycMatrix] | None = None
        if elements is not None:
            st = _Store(self.dim, n, cap=max(DEFAULT_CAP, len(elements)))
            coords, den = pack(list(elements), n)
            st.add(coords, den)
            self._store = st

    # -- construction from coordinates -------------------------------------
    @classmethod
    def from_coords(cls, generators: Sequence[CycMatrix], coords: np.ndarray, den: int, n: int,
                    name: str | None = None, cap: int = DEFAULT_CAP) -> "FiniteMatrixGroup":
        obj = cls.__new__(cls)
        obj.dim = coords.shape[1]
        obj.generators = tuple(generators)
        obj.conductor = n
        obj.name = name
        obj._elements_cache = None
        st = _Store(obj.dim, n, cap=max(cap, len(coords)))
        st.add(coords, den)
        obj._store = st
        return obj

    # -- basic accessors ---------------------------------------------------
    @property
    def is_enumerated(self) -> bool:
        return self._store is not None

    def _need(self) -> _Store:
        if self._store is None:
            raise MatrepError("group is not enumerated; call enumerate() first")
        return self._store

    @property
    def order(self) -> int:
        return self._need().count

    def __len__(self) -> int:
        return self.order

    @property
    def coords(self) -> np.ndarray:
        return self._need().array()

    @property
    def den(self) -> int:
        return self._need().den

    def element(self, i: int) -> CycMatrix:
        st = self._need()
        return unpack(st.array()[i], st.den, self.conductor)

    @property
    def elements(self) -> list[CycMatrix]:
        if self._elements_cache is None:
            st = self._need()
            arr = st.array()
            self._elements_cache = [unpack(arr[i], st.den, self.conductor) for i in range(len(arr))]
        return self._elements_cache

    def __iter__(self) -> Iterator[CycMatrix]:
        return iter(self.elements)

    def index_of(self, m: CycMatrix) -> int:
        st = self._need()
        if self.conductor % m.conductor:
            return -1
        num, den = pack([m], self.conductor)
        return int(st.lookup(num, den)[0])

    def __contains__(self, m: CycMatrix) -> bool:
        return self.index_of(m) >= 0

    def contains_coords(self, num: np.ndarray, den: int, n: int) -> np.ndarray:
        """Membership mask for a coordinate batch given at conductor n."""
        m = math.lcm(n, self.conductor)
        num, den = recoordinate(num, den, n, m)
        return self._store_at(m).lookup(num, den) >= 0

    def _store_at(self, m: int) -> _Store:
        st = self._need()
        if m == self.conductor:
            return st
        cache = self.__dict__.setdefault("_lifted", {})
        if m not in cache:
            num, den = recoordinate(st.array(), st.den, self.conductor, m)
            lifted = _Store(self.dim, m, cap=max(st.cap, st.count))
            lifted.add(num, den)
            cache[m] = lifted
        return cache[m]

    def identity(self) -> CycMatrix:
        return CycMatrix.identity(self.dim)

    def sorted_keys(self) -> list[bytes]:
        return sorted(m.to_bytes() for m in self.elements)

    def __repr__(self) -> str:
        o = self.order if self.is_enumerated else "?"
        return f"FiniteMatrixGroup(dim={self.dim}, order={o}, name={self.name!r})"


def recoordinate(num: np.ndarray, den: int, n_from: int, n_to: int):
    """Express coordinates at conductor n_from in Q(zeta_{n_to}); n_from must divide n_to."""
    if n_from == n_to:
        return num, den
    if n_to % n_from:
        raise ContainmentError(f"conductor {n_from} does not divide {n_to}")
    from .cyclo import reduction_table
    step = n_to // n_from
    phi_f = totient(n_from)
    tab = reduction_table(n_to)[np.arange(phi_f) * step]
    return num @ tab, den


# -- group operations -------------------------------------------------------

def _gens_coords(group: FiniteMatrixGroup, mats: Sequence[CycMatrix] | None = None):
    mats = list(group.generators if mats is None else mats)
    if not mats:
        mats = [group.identity()]
    return pack(mats, group.conductor)


def enumerate_group(group: FiniteMatrixGroup, cap: int = DEFAULT_CAP) -> FiniteMatrixGroup:
    """Populate the element set by Dimino's coset closure.

    Every multiplication is a batch (a subgroup or coset) times one fixed
    matrix.  The final element order is sorted by canonical key, so the
    result does not depend on the order of the generators.
    """
    n = group.conductor
    k = group.dim
    ops = BatchOps(n)
    st = _Store(k, n, cap=cap)
    ident, _ = pack([group.identity()], n)
    st.add(ident, 1)
    gens = [g for g in group.generators if not g.is_identity()]
    if gens:
        gcoords, gden = pack(gens, n)
    used: list[int] = []
    for gi in range(len(gens)):
        g = gcoords[gi:gi + 1]
        if st.lookup(g, gden)[0] >= 0:
            continue
        if not used:
            # cyclic group <g>
            cur, cden = g, gden
            while st.lookup(cur, cden)[0] < 0:
                st.add(cur, cden)
                cur = ops.product(cur, g)
                cur, cden = _reduce_den(cur, cden * gden)
            used.append(gi)
            continue
        prev = st.array().copy()
        pden = st.den
        reps = [(g, gden)]
        st.add(*_reduce_den(ops.product(prev, g), pden * gden))
        pos = 0
        used.append(gi)
        while pos < len(reps):
            r, rden = reps[pos]
            for ui in used:
                s = gcoords[ui:ui + 1]
                t, tden = _reduce_den(ops.product(r, s), rden * gden)
                if st.lookup(t, tden)[0] < 0:
                    reps.append((t, tden))
                    st.add(*_reduce_den(ops.product(prev, t), pden * tden))
            pos += 1
    arr = st.array()
    keys = [arr[i].astype(st.dtype).tobytes() for i in range(len(arr))]
    order = sorted(range(len(arr)), key=keys.__getitem__)
    final = _Store(k, n, cap=cap)
    final.add(arr[order], st.den)
    group._store = final
    group.__dict__.pop("_lifted", None)
    group._elements_cache = None
    return group


def __getattr__(name: str):
    # ``matrep.enumerate`` without shadowing the builtin inside this module
    if name == "enumerate":
        return enumerate_group
    raise AttributeError(name)


def subgroup_from_indices(group: FiniteMatrixGroup, idx: Sequence[int], generators=None,
                          name: str | None = None) -> FiniteMatrixGroup:
    st = group._need()
    arr = st.array()[np.asarray(idx, dtype=np.int64)]
    if generators is None:
        generators = _greedy_generators(arr, st.den, group.conductor, group.dim)
    return FiniteMatrixGroup.from_coords(generators, arr, st.den, group.conductor, name=name)


def _greedy_generators(arr: np.ndarray, den: int, n: int, k: int) -> list[CycMatrix]:
    """A small generating set for the finite group whose elements are arr."""
    keys = sorted(range(len(arr)), key=lambda i: arr[i].tobytes())
    gens: list[CycMatrix] = []
    cur: FiniteMatrixGroup | None = None
    for i in keys:
        if cur is not None and cur.order == len(arr):
            break
        m = unpack(arr[i], den, n)
        if m.is_identity():
            continue
        if cur is not None and m in cur:
            continue
        gens.append(m)
        cur = enumerate_group(FiniteMatrixGroup(gens, conductor=n), cap=len(arr) + 1)
    return gens or [CycMatrix.identity(k)]


def conjugate_batch(ops: BatchOps, num: np.ndarray, den: int, g: CycMatrix, ginv: CycMatrix):
    """Numerators/denominator of g x g^-1 for a batch x."""
    gn, gd = pack([g], ops.n)
    hn, hd = pack([ginv], ops.n)
    left = ops.product(gn, num)
    out = ops.product(left, hn)
    return _reduce_den(out, den * gd * hd)


def centre(group: FiniteMatrixGroup) -> FiniteMatrixGroup:
    """Elements commuting with every generator, returned enumerated."""
    st = group._need()
    n = group.conductor
    ops = BatchOps(n)
    arr = st.array()
    mask = np.ones(len(arr), dtype=bool)
    gnum, gden = _gens_coords(group)
    for gi in range(len(gnum)):
        g = gnum[gi:gi + 1]
        xg = ops.product(arr, g)
        gx = ops.product(g, arr)
        mask &= np.all((xg == gx).reshape(len(arr), -1), axis=1)
    idx = np.nonzero(mask)[0]
    return subgroup_from_indices(group, idx, name=f"Z({group.name})" if group.name else None)


def is_subgroup(sub: FiniteMatrixGroup, group: FiniteMatrixGroup) -> bool:
    """Containment test by membership of the generators of sub."""
    gens = list(sub.generators) or [sub.identity()]
    return all(g in group for g in gens)


def contains_all(sub: FiniteMatrixGroup, group: FiniteMatrixGroup) -> bool:
    """Elementwise containment of an enumerated sub in an enumerated group."""
    s = sub._need()
    return bool(group.contains_coords(s.array(), s.den, sub.conductor).all())


def is_normal(sub: FiniteMatrixGroup, group: FiniteMatrixGroup) -> bool:
    """True iff g h g^-1 lies in sub for every generator g of group and h in sub.

    After the elementwise containment check it suffices to conjugate the
    generators of sub (which must generate it): g sub g^-1 is then a
    subgroup of sub of the same order.
    """
    if sub.dim != group.dim:
        raise ShapeError("dimension mismatch")
    if not contains_all(sub, group):
        raise ContainmentError("sub is not contained in group")
    hs = list(sub.generators) or [sub.identity()]
    if not all(h in sub for h in hs):
        raise ContainmentError("generators of sub are not among its elements")
    n = math.lcm(group.conductor, sub.conductor)
    ops = BatchOps(n)
    num, den = pack(hs, n)
    for g in group.generators:
        c, cden = conjugate_batch(ops, num, den, g, g.inverse())
        if not sub.contains_coords(c, cden, n).all():
            return False
    return True


def conjugate_group(g: CycMatrix, group: FiniteMatrixGroup) -> FiniteMatrixGroup:
    """g G g^-1, enumerated when G is."""
    ginv = g.inverse()
    gens = [g * h * ginv for h in group.generators]
    n = math.lcm(group.conductor, g.conductor)
    out = FiniteMatrixGroup(gens, conductor=n)
    if group.is_enumerated:
        ops = BatchOps(n)
        s = group._need()
        num, den = recoordinate(s.array(), s.den, group.conductor, n)
        c, cden = conjugate_batch(ops, num, den, g, ginv)
        out._store = _Store(group.dim, n, cap=max(DEFAULT_CAP, len(c)))
        out._store.add(c, cden)
    return out


def conjugation_permutations(group: FiniteMatrixGroup, subset: Sequence[CycMatrix],
                             conjugators: Sequence[CycMatrix] | None = None) -> list[np.ndarray]:
    """For each conjugator g, the map i -> index of g s_i g^-1 in subset."""
    n = group.conductor
    for m in subset:
        n = math.lcm(n, m.conductor)
    ops = BatchOps(n)
    sub = _Store(group.dim, n, cap=max(DEFAULT_CAP, len(subset)))
    num, den = pack(list(subset), n)
    sub.add(num, den)
    if sub.count != len(subset):
        raise PartitionError("subset has repeated elements")
    num, den = sub.array(), sub.den
    perms = []
    for g in (group.generators if conjugators is None else conjugators):
        c, cden = conjugate_batch(ops, num, den, g, g.inverse())
        img = sub.lookup(c, cden)
        if (img < 0).any():
            bad = subset[int(np.nonzero(img < 0)[0][0])]
            raise PartitionError(f"subset is not closed under conjugation (witness {bad.serialize()})")
        perms.append(img)
    return perms


def orbits_from_permutations(size: int, perms: Sequence[np.ndarray]) -> list[list[int]]:
    parent = list(range(size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in perms:
        for i, j in enumerate(p):
            a, b = find(i), find(int(j))
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(size):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def conjugacy_classes(group: FiniteMatrixGroup, subset: Sequence[CycMatrix]) -> list[list[CycMatrix]]:
    """Partition subset into conjugation orbits; each class starts with its representative.

    Representatives are the members with the lexicographically least byte
    serialization; classes are listed in the order of their representatives.
    """
    subset = list(subset)
    perms = conjugation_permutations(group, subset)
    classes = []
    for orb in orbits_from_permutations(len(subset), perms):
        members = sorted((subset[i] for i in orb), key=CycMatrix.to_bytes)
        classes.append(members)
    classes.sort(key=lambda c: c[0].to_bytes())
    return classes


class _DenList:
    """Growable list of integer arrays over one adaptive common denominator."""

    def __init__(self, den: int = 1):
        self.items: list[np.ndarray] = []
        self.den = den

    def normalise(self, num: np.ndarray, den: int) -> np.ndarray:
        num, den = _reduce_den(num, den)
        if self.den % den:
            new = math.lcm(self.den, den)
            f = new // self.den
            self.items = [None if x is None else x * f for x in self.items]
            self.den = new
        return num * (self.den // den)

    def stack(self, idx) -> np.ndarray:
        return np.stack([self.items[i] for i in idx])


def orbit_stabilizer(group: FiniteMatrixGroup, v: Sequence, cap: int = DEFAULT_CAP):
    """Orbit of v under the generators and its stabilizer via Schreier generators.

    Returns (orbit, stabilizer): orbit is a list of vectors (tuples of
    CycNumber) in discovery order, stabilizer an enumerated group.
    """
    v = [as_cyc(x) for x in v]
    n = group.conductor
    for x in v:
        n = math.lcm(n, x.conductor)
    ops = BatchOps(n)
    k = group.dim
    gens = list(group.generators) or [group.identity()]
    gnum, gden = pack(gens, n)
    hnum, hden = pack([g.inverse() for g in gens], n)
    vnum, vden = pack_vectors([v], n)
    points = _DenList(vden)
    points.items.append(vnum[0])
    index: dict[bytes, int] = {vnum[0].tobytes(): 0}
    ident, _ = pack([group.identity()], n)
    trans = _DenList()
    trans.items.append(ident[0])
    tinv = _DenList()
    tinv.items.append(ident[0])
    frontier = [0]
    non_tree: list[tuple[int, int, int]] = []
    while frontier:
        new_frontier = []
        tree: list[tuple[int, int, int]] = []
        for gi in range(len(gens)):
            pts = points.stack(frontier)[:, :, None, :]
            img = points.normalise(_mat_vec(ops, gnum[gi], pts), gden * points.den)
            if points.items and points.items[0].tobytes() not in index:
                index = {p.tobytes(): i for i, p in enumerate(points.items)}
            for t, pi in enumerate(frontier):
                key = img[t].tobytes()
                j = index.get(key)
                if j is None:
                    j = len(points.items)
                    if j >= cap:
                        raise ClosureOverflowError("orbit exceeds cap")
                    index[key] = j
                    points.items.append(img[t])
                    new_frontier.append(j)
                    tree.append((pi, gi, j))
                else:
                    non_tree.append((pi, gi, j))
        trans.items.extend([None] * len(tree))
        tinv.items.extend([None] * len(tree))
        for gi in range(len(gens)):
            sel = [(pi, j) for (pi, g2, j) in tree if g2 == gi]
            if not sel:
                continue
            gu = ops.product(gnum[gi:gi + 1], trans.stack([pi for pi, _ in sel]))
            ui = ops.product(tinv.stack([pi for pi, _ in sel]), hnum[gi:gi + 1])
            gu = trans.normalise(gu, gden * trans.den)
            ui = tinv.normalise(ui, hden * tinv.den)
            for t, (_, j) in enumerate(sel):
                trans.items[j] = gu[t]
                tinv.items[j] = ui[t]
        frontier = new_frontier
    # Schreier generators u_{g x}^-1 g u_x for the non-tree edges
    schreier = []
    for gi in range(len(gens)):
        sel = [(pi, j) for (pi, g2, j) in non_tree if g2 == gi]
        if not sel:
            continue
        gu = ops.product(gnum[gi:gi + 1], trans.stack([pi for pi, _ in sel]))
        sg = ops.product(tinv.stack([j for _, j in sel]), gu)
        schreier.append(_reduce_den(sg, tinv.den * gden * trans.den))
    stab = _group_from_candidate_generators(schreier, k, n, cap)
    orbit = [unpack_vector(o, points.den, n) for o in points.items]
    return orbit, stab


def _fix_den(num: np.ndarray, den_from: int, den_to: int) -> np.ndarray:
    num, d = _reduce_den(num, den_from)
    if den_to % d:
        raise MatrepError("denominator growth in transversal")
    return num * (den_to // d)


def _mat_vec(ops: BatchOps, mat: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """mat (k,k,phi) times column vectors (m,k,1,phi) -> (m,k,phi)."""
    k = mat.shape[0]
    m = vecs.shape[0]
    eng = ops.eng
    me = np.moveaxis(eng.to_evals(mat), -1, 0)  # (phi,k,k)
    ve = np.moveaxis(eng.to_evals(vecs), -1, 1)  # (m,phi,k,1)
    prod = eng.bmatmul(me[None], ve)  # (m,phi,k,1)
    bound = eng.product_coord_bound(float(np.abs(mat).max(initial=0)), float(l1_norms(vecs).max(initial=0)), k)
    return eng.to_coords(np.moveaxis(prod[..., 0], 1, -1), bound)


def _group_from_candidate_generators(cands, k: int, n: int, cap: int) -> FiniteMatrixGroup:
    """Enumerate the group generated by many candidate generators, keeping only those needed."""
    ident = CycMatrix.identity(k)
    gens: list[CycMatrix] = []
    current = enumerate_group(FiniteMatrixGroup([ident], conductor=n), cap=cap)
    for num, den in cands:
        while True:
            mask = current.contains_coords(num, den, n)
            missing = np.nonzero(~mask)[0]
            if len(missing) == 0:
                break
            gens.append(unpack(num[missing[0]], den, n))
            current = enumerate_group(FiniteMatrixGroup(gens, conductor=n), cap=cap)
    if not gens:
        current.generators = (ident,)
    return current


_FILTER_CHUNK = 8192


def stabilizer_by_filter(group: FiniteMatrixGroup, v: Sequence) -> FiniteMatrixGroup:
    """Brute-force stabilizer: filter every element by g v == v."""
    st = group._need()
    v = [as_cyc(x) for x in v]
    n = group.conductor
    for x in v:
        n = math.lcm(n, x.conductor)
    ops = BatchOps(n)
    arr, den = recoordinate(st.array(), st.den, group.conductor, n)
    vnum, vden = pack_vectors([v], n)
    target = vnum[0] * den
    hits = []
    for lo in range(0, len(arr), _FILTER_CHUNK):
        img = _mat_vec_batch(ops, arr[lo:lo + _FILTER_CHUNK], vnum[0])
        mask = np.all((img == target[None]).reshape(len(img), -1), axis=1)
        hits.append(np.nonzero(mask)[0] + lo)
    idx = np.concatenate(hits)
    sub = FiniteMatrixGroup.from_coords([], arr[idx], den, n)
    sub.generators = tuple(_greedy_generators(arr[idx], den, n, group.dim))
    return sub


def _mat_vec_batch(ops: BatchOps, mats: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """mats (m,k,k,phi) times a single vector (k,phi) -> (m,k,phi)."""
    eng = ops.eng
    me = np.moveaxis(eng.to_evals(mats), -1, 1)  # (m,phi,k,k)
    ve = np.moveaxis(eng.to_evals(vec[:, None, :]), -1, 0)  # (phi,k,1)
    prod = eng.bmatmul(me, ve[None])
    bound = eng.product_coord_bound(float(np.abs(mats).max(initial=0)), float(l1_norms(vec).max(initial=0)), mats.shape[1])
    return eng.to_coords(np.moveaxis(prod[..., 0], 1, -1), bound)


def averaging_projector(group: FiniteMatrixGroup) -> CycMatrix:
    st = group._need()
    total = st.array().sum(axis=0)
    return unpack(total, st.den * st.count, group.conductor)


def fixed_space(group: FiniteMatrixGroup) -> Subspace:
    """Image of the averaging projector P = (1/|G|) sum g."""
    p = averaging_projector(group)
    cols = p.transpose().rows
    _, piv = _rref([list(r) for r in p.rows], p.dim)
    return Subspace(p.dim, [cols[c] for c in piv])


def invariant_complement(group: FiniteMatrixGroup, fixed: Subspace | None = None) -> Subspace:
    """Kernel of the averaging projector, the invariant complement of the fixed space."""
    p = averaging_projector(group)
    ker = p.nullspace()
    if fixed is not None and fixed.dim + len(ker) != p.dim:
        raise InvarianceError("fixed space and kernel dimensions do not add up")
    return Subspace(p.dim, ker)


def restrict(group: FiniteMatrixGroup, sub: Subspace, enumerate_result: bool = True,
             cap: int = DEFAULT_CAP) -> FiniteMatrixGroup:
    """Matrices of the action on an invariant subspace, in the subspace's basis."""
    gens = []
    for g in group.generators:
        cols = [sub.coordinates(g.apply(b)) for b in sub.basis]
        gens.append(CycMatrix([[cols[j][i] for j in range(sub.dim)] for i in range(sub.dim)]))
    out = FiniteMatrixGroup(gens)
    if enumerate_result:
        enumerate_group(out, cap=cap)
    return out


def restrict_matrix(m: CycMatrix, sub: Subspace) -> CycMatrix:
    cols = [sub.coordinates(m.apply(b)) for b in sub.basis]
    return CycMatrix([[cols[j][i] for j in range(sub.dim)] for i in range(sub.dim)])


def batch_ranks(num: np.ndarray, den: int, n: int, points: str = "all") -> np.ndarray:
    """Exact ranks of a batch of matrices (m, r, c, phi).

    The rank modulo each split prime is a lower bound; the maximum over all
    split primes equals the true rank once the Hadamard bound of the
    scaled minors is below p (checked).  With points="one" only the first
    prime is used and the result is a certified lower bound.
    """
    eng = engine(n)
    ev = eng.to_evals(num)  # (m, r, c, phi)
    if points == "one":
        return rank_mod_p(ev[..., 0], eng.p)
    hb = hadamard_bound(l1_norms(num))
    if len(hb) and float(hb.max()) >= eng.p:
        raise BoundError("Hadamard bound too large for exact rank")
    ranks = rank_mod_p(np.moveaxis(ev, -1, 1), eng.p)  # (m, phi)
    return ranks.max(axis=1)


# ---------------------------------------------------------------------------
# element-set cache
# ---------------------------------------------------------------------------

def cache_path(cache_dir: str, spec: str, conductor: int) -> str:
    safe = spec.replace(":", "_").replace("/", "_")
    return os.path.join(cache_dir, f"{safe}__N{conductor}.npz")


def save_cached(group: FiniteMatrixGroup, cache_dir: str, spec: str) -> str:
    os.makedirs(cache_dir, exist_ok=True)
    st = group._need()
    path = cache_path(cache_dir, spec, group.conductor)
    gens = np.array(["\x1f".join("\x1e".join(r) for r in g.serialize()) for g in group.generators])
    tmp = path + ".tmp.npz"
    np.savez_compressed(tmp, coords=st.array(), den=st.den, n=group.conductor, gens=gens)
    os.replace(tmp, path)
    return path


def load_cached(cache_dir: str, spec: str, conductor: int) -> FiniteMatrixGroup | None:
    path = cache_path(cache_dir, spec, conductor)
    if not os.path.exists(path):
        return None
    with np.load(path) as z:
        coords = z["coords"]
        den = int(z["den"])
        n = int(z["n"])
        gens = [CycMatrix.from_text([r.split("\x1e") for r in s.split("\x1f")]) for s in z["gens"]]
    return FiniteMatrixGroup.from_coords(gens, coords, den, n, cap=max(DEFAULT_CAP, len(coords)))
