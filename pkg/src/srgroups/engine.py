"""Batched exact arithmetic over Z[zeta_N] through split primes.

Matrices are held as integer power-basis coordinates (numerators over a
common denominator).  Products and ranks are computed after mapping into
F_p^phi(N), where p = 1 mod N splits completely and the map sends x to its
values at the phi(N) primitive N-th roots of unity mod p.  That map is a
ring isomorphism Z[zeta_N]/p -> F_p^phi(N).

Exactness comes from explicit bounds rather than luck:

* Coordinates are lifted back from F_p only when an a priori bound on
  their size is below p/2.
* A nonzero integral x that vanishes at every split prime has
  |Norm(x)| >= p^phi.  Since |sigma(x)| <= ||x||_1 for every embedding,
  an l1 bound below p proves x = 0.  The same argument applied to minors
  (Hadamard bound) shows that the exact rank equals the largest rank
  found over the split primes.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .cyclo import reduction_table, totient, prime_factors


class BoundError(ArithmeticError):
    """An a priori size bound is too large for exact modular recovery."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17):
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


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a @ b) mod p for int64 arrays with entries in [0, p), p < 2^31, exactly."""
    k = a.shape[-1]
    if k > 1 << 10:
        raise ValueError("inner dimension too large for exact float products")
    a0 = (a & 0xFFFF).astype(np.float64)
    a1 = (a >> 16).astype(np.float64)
    b0 = (b & 0xFFFF).astype(np.float64)
    b1 = (b >> 16).astype(np.float64)

    def mm(x, y):
        return (x @ y).astype(np.int64) % p

    lo = mm(a0, b0)
    mid = (mm(a0, b1) + mm(a1, b0)) % p
    hi = mm(a1, b1)
    s16 = (1 << 16) % p
    s32 = (1 << 32) % p
    return (lo + mid * s16 % p + hi * s32 % p) % p


def _inverse_mod(m: np.ndarray, p: int) -> np.ndarray:
    n = m.shape[0]
    aug = np.concatenate([m % p, np.eye(n, dtype=np.int64)], axis=1)
    for c in range(n):
        piv = c + int(np.nonzero(aug[c:, c])[0][0])
        if piv != c:
            aug[[c, piv]] = aug[[piv, c]]
        aug[c] = aug[c] * pow(int(aug[c, c]), p - 2, p) % p
        f = aug[:, c].copy()
        f[c] = 0
        aug = (aug - (f[:, None] * aug[c][None, :]) % p) % p
    return aug[:, n:]


class FieldEngine:
    """Evaluation/interpolation machinery for Q(zeta_N)."""

    def __init__(self, n: int):
        self.n = n
        self.phi = totient(n)
        self.units = np.array([e for e in range(n) if math.gcd(e, n) == 1], dtype=np.int64)
        k = ((1 << 30) // n) + 1
        while not _is_prime(1 + k * n):
            k += 1
        self.p = p = 1 + k * n
        self.w = self._primitive_root()
        pts = [pow(self.w, int(e), p) for e in self.units]
        self.points = np.array(pts, dtype=np.int64)
        vand = np.ones((self.phi, self.phi), dtype=np.int64)
        for j in range(1, self.phi):
            vand[j] = vand[j - 1] * self.points % p
        self.vand = vand
        self.vinv = _inverse_mod(vand.T.copy(), p).T.copy()
        self.table_max = int(np.abs(reduction_table(n)).max())
        index = {int(e): i for i, e in enumerate(self.units)}
        self._unit_index = index

    def _primitive_root(self) -> int:
        p, n = self.p, self.n
        for g in range(2, p):
            w = pow(g, (p - 1) // n, p)
            if all(pow(w, n // q, p) != 1 for q in prime_factors(n)) and (n == 1 or w != 1):
                return w
        raise RuntimeError("no primitive root found")

    # -- transforms ------------------------------------------------------
    def to_evals(self, coords: np.ndarray) -> np.ndarray:
        """Coordinates (..., phi) -> values at the split primes (..., phi)."""
        c = np.asarray(coords, dtype=np.int64) % self.p
        shape = c.shape
        out = matmul_mod(c.reshape(-1, self.phi), self.vand, self.p)
        return out.reshape(shape)

    def to_coords(self, evals: np.ndarray, bound: float) -> np.ndarray:
        """Interpolate and lift to symmetric residues; requires |coords| <= bound < p/2."""
        if not bound < self.p // 2:
            raise BoundError(f"coordinate bound {bound:.3g} exceeds p/2")
        shape = evals.shape
        c = matmul_mod(evals.reshape(-1, self.phi), self.vinv, self.p).reshape(shape)
        return np.where(c > self.p // 2, c - self.p, c)

    def galois_perm(self, a: int) -> np.ndarray:
        """Index map: evals of sigma_a(x) = evals(x)[..., perm]."""
        return np.array([self._unit_index[int(e * a % self.n)] for e in self.units], dtype=np.int64)

    def monomial_evals(self, k: int) -> np.ndarray:
        return np.array([pow(int(x), k % self.n, self.p) for x in self.points], dtype=np.int64)

    # -- bounds ----------------------------------------------------------
    def product_coord_bound(self, inf_a: float, l1_b: float, terms: int = 1) -> float:
        """Bound on coordinates of a sum of `terms` products x*y."""
        return terms * (2 * self.phi - 1) * self.table_max * inf_a * l1_b

    # -- batched linear algebra mod p --------------------------------------
    def bmatmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Pointwise matrix products of eval arrays (..., phi, r, k) @ (..., phi, k, c)."""
        p = self.p
        k = a.shape[-1]
        acc = None
        for l in range(k):
            term = a[..., :, l, None] * b[..., None, l, :] % p
            acc = term if acc is None else (acc + term) % p
        return acc


@lru_cache(maxsize=64)
def engine(n: int) -> FieldEngine:
    return FieldEngine(n)


def rank_mod_p(a: np.ndarray, p: int) -> np.ndarray:
    """Ranks of a batch of matrices (..., r, c) over F_p."""
    a = np.array(a, dtype=np.int64) % p
    shape = a.shape
    a = a.reshape(-1, shape[-2], shape[-1])
    nb, r, c = a.shape
    row = np.zeros(nb, dtype=np.int64)
    ar = np.arange(r)
    bidx = np.arange(nb)
    for col in range(c):
        cand = (a[:, :, col] != 0) & (ar[None, :] >= row[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        piv = np.argmax(cand, axis=1)
        sel = bidx[has]
        rs, ps = row[has], piv[has]
        tmp = a[sel, rs].copy()
        a[sel, rs] = a[sel, ps]
        a[sel, ps] = tmp
        prow = a[sel, rs]
        pval = prow[:, col][:, None]
        below = ar[None, :] > rs[:, None]
        f = a[sel, :, col]
        f = np.where(below, f, 0)
        sub = a[sel]
        sub = (sub * pval[:, :, None] % p - f[:, :, None] * prow[:, None, :] % p) % p
        sub = np.where(below[:, :, None], sub, a[sel])
        a[sel] = sub
        row[has] += 1
    return row.reshape(shape[:-2])


def hadamard_bound(l1: np.ndarray) -> np.ndarray:
    """Bound on |sigma(minor)| for every minor, from entrywise l1 norms (..., r, c)."""
    rows = np.sqrt((l1.astype(np.float64) ** 2).sum(axis=-1))
    return np.prod(np.maximum(rows, 1.0), axis=-1)


def l1_norms(coords: np.ndarray) -> np.ndarray:
    return np.abs(coords).sum(axis=-1)
