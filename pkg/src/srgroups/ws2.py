"""The group W(S_2) < Sp_8(C) of order 82944 and its vector stabilizer.

The pipeline enumerates W(S_2) from four symplectic reflections, takes the
stabilizer H of v = (0,0,1,0,0,0,0,-1), splits C^8 = W + V^H, restricts H to
W in a fixed basis w_1..w_6, and identifies the action on <w_1, w_2, w_3>
as a rank 3 reflection group of order 96 with invariant degrees 3, 4, 8.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .cyclo import CycNumber, root_of_unity
from .matrep import (
    CycMatrix,
    FiniteMatrixGroup,
    Subspace,
    _Store,
    averaging_projector,
    contains_all,
    enumerate_group,
    fixed_space,
    invariant_complement,
    load_cached,
    nullspace,
    orbit_stabilizer,
    restrict_matrix,
    save_cached,
    stabilizer_by_filter,
)


class WS2VerificationError(AssertionError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


_H = Fraction(1, 2)


def _unit(k: int, sgn: int = 1, n: int = 8) -> list[int]:
    return [sgn if j == k else 0 for j in range(n)]


def ws2_generators() -> list[CycMatrix]:
    """The reflections M_1, ..., M_4."""
    i = root_of_unity(4)
    h = CycNumber(_H)
    hi = h * i
    m1 = CycMatrix([
        [h, hi, 0, 0, 0, 0, -h, -hi],
        [-hi, h, 0, 0, 0, 0, -hi, h],
        [0, 0, h, hi, h, hi, 0, 0],
        [0, 0, -hi, h, hi, -h, 0, 0],
        [0, 0, h, -hi, h, -hi, 0, 0],
        [0, 0, -hi, -h, hi, h, 0, 0],
        [-h, hi, 0, 0, 0, 0, h, -hi],
        [hi, h, 0, 0, 0, 0, hi, h],
    ])
    m2 = CycMatrix([_unit(1, -1), _unit(0, -1), _unit(2), _unit(3), _unit(5, -1), _unit(4, -1), _unit(6), _unit(7)])
    m3 = CycMatrix([_unit(2, -1), _unit(1), _unit(0, -1), _unit(3), _unit(6, -1), _unit(5), _unit(4, -1), _unit(7)])
    m4 = CycMatrix.diag([-1, 1, 1, 1, -1, 1, 1, 1])
    return [m1, m2, m3, m4]


V_VECTOR = (0, 0, 1, 0, 0, 0, 0, -1)
U_VECTOR = (0, 0, 0, 1, 0, 0, 1, 0)
WS2_ORDER = 82944


def stabilizer_word_generators() -> list[CycMatrix]:
    m1, m2, m3, m4 = ws2_generators()
    return [m2, m4, m1 * m3 * m4 * m2 * m4 * m3 * m1]


def w_basis() -> "_Rect":
    """8x6 matrix whose columns are w_1..w_6 (zeta a primitive 8th root with zeta^2 = i)."""
    z = root_of_unity(8, 1)
    z3 = root_of_unity(8, 3)
    rows = [
        [-z3, -z3, 0, -z3, -z3, 0],
        [-z, z, 0, z, -z, 0],
        [0, 0, -z3, 0, 0, z3],
        [0, 0, -z, 0, 0, -z],
        [-z, -z, 0, z, z, 0],
        [z3, -z3, 0, z3, -z3, 0],
        [0, 0, z, 0, 0, z],
        [0, 0, -z3, 0, 0, z3],
    ]
    h = CycNumber(_H)
    return _Rect([[h * x for x in r] for r in rows])


class _Rect:
    """A plain rectangular array of CycNumbers (columns read as vectors)."""

    def __init__(self, rows):
        self.rows = [tuple(r) for r in rows]

    def column(self, j: int) -> tuple[CycNumber, ...]:
        return tuple(r[j] for r in self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])


def hw_displayed_generators() -> list[CycMatrix]:
    i = root_of_unity(4)
    a = CycMatrix([[0, -i, 0, 0, 0, 0], [i, 0, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0],
                   [0, 0, 0, 0, i, 0], [0, 0, 0, -i, 0, 0], [0, 0, 0, 0, 0, 1]])
    b = CycMatrix([[0, -1, 0, 0, 0, 0], [-1, 0, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0],
                   [0, 0, 0, 0, -1, 0], [0, 0, 0, -1, 0, 0], [0, 0, 0, 0, 0, 1]])
    c = CycMatrix([[0, 0, -i, 0, 0, 0], [0, 1, 0, 0, 0, 0], [i, 0, 0, 0, 0, 0],
                   [0, 0, 0, 0, 0, i], [0, 0, 0, 0, 1, 0], [0, 0, 0, -i, 0, 0]])
    return [a, b, c]


def block_form(k: int) -> CycMatrix:
    """[[0, I_k], [-I_k, 0]]."""
    rows = [[0] * (2 * k) for _ in range(2 * k)]
    for j in range(k):
        rows[j][k + j] = 1
        rows[k + j][j] = -1
    return CycMatrix(rows)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

CACHE_KEY = "ws2"


def build_ws2(cache_dir: str | None = None, cap: int = 200_000) -> FiniteMatrixGroup:
    """Enumerate W(S_2), reusing an on-disk element cache when given."""
    gens = ws2_generators()
    if cache_dir:
        cached = load_cached(cache_dir, CACHE_KEY, 8)
        if cached is not None and list(cached.generators) == gens and cached.order == WS2_ORDER:
            cached.name = "W(S2)"
            return cached
    W = enumerate_group(FiniteMatrixGroup(gens, conductor=8, name="W(S2)"), cap=cap)
    if cache_dir:
        save_cached(W, cache_dir, CACHE_KEY)
    return W


def infer_invariant_forms(gens) -> list[CycMatrix]:
    """Basis of {Omega : M^T Omega M = Omega for every generator M}."""
    k = gens[0].dim
    rows = []
    zero = CycNumber(0)
    for m in gens:
        nz = [[(c, m[c, a]) for c in range(k) if not m[c, a].is_zero()] for a in range(k)]
        for a in range(k):
            for b in range(k):
                row = [zero] * (k * k)
                for c, mca in nz[a]:
                    for d, mdb in nz[b]:
                        row[c * k + d] = row[c * k + d] + mca * mdb
                row[a * k + b] = row[a * k + b] - 1
                rows.append(row)
    sol = nullspace(rows, k * k)
    return [CycMatrix([[v[r * k + c] for c in range(k)] for r in range(k)]) for v in sol]


# ---------------------------------------------------------------------------
# polynomials and rational functions over Q
# ---------------------------------------------------------------------------

def _trim(p: list) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def poly_divmod(a: list, b: list) -> tuple[list, list]:
    a, b = _trim(a), _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [0] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    lead = b[-1]
    inv_lead = lead.inv() if isinstance(lead, CycNumber) else Fraction(1) / lead
    while len(r) >= len(b) and r:
        c = r[-1] * inv_lead
        s = len(r) - len(b)
        q[s] = c
        for j, y in enumerate(b):
            r[s + j] = r[s + j] - c * y
        r = _trim(r)
    return _trim(q), r


def poly_gcd(a: list, b: list) -> list:
    a, b = _trim(a), _trim(b)
    while b:
        _, r = poly_divmod(a, b)
        a, b = b, r
    if not a:
        return [Fraction(1)]
    lead = a[-1]
    return [x / lead for x in a]


@dataclass(frozen=True)
class RationalFunction:
    """num(t)/den(t) over Q, coefficients listed from t^0 upwards."""

    num: tuple
    den: tuple

    @classmethod
    def make(cls, num, den) -> "RationalFunction":
        num = [Fraction(x) for x in _trim(num)]
        den = [Fraction(x) for x in _trim(den)]
        if not den:
            raise ZeroDivisionError("zero denominator")
        g = poly_gcd(num, den) if num else list(den)
        if len(g) > 1:
            num, _ = poly_divmod(num, g)
            den, _ = poly_divmod(den, g)
        if not num:
            return cls((), (Fraction(1),))
        c = den[0] if den[0] != 0 else den[-1]
        return cls(tuple(Fraction(x) / c for x in num), tuple(Fraction(x) / c for x in den))

    @classmethod
    def from_degrees(cls, degrees) -> "RationalFunction":
        den = [Fraction(1)]
        for d in degrees:
            den = poly_mul(den, [Fraction(1)] + [Fraction(0)] * (d - 1) + [Fraction(-1)])
        return cls.make([1], den)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return _trim(poly_mul(list(self.num), list(other.den))) == _trim(poly_mul(list(other.num), list(self.den)))

    def __hash__(self):
        return hash((self.num, self.den))

    def series(self, terms: int) -> list[Fraction]:
        """Power series coefficients of t^0 .. t^(terms-1)."""
        den = list(self.den)
        if den[0] == 0:
            raise ValueError("denominator vanishes at 0")
        out = []
        for n in range(terms):
            acc = self.num[n] if n < len(self.num) else Fraction(0)
            for j in range(1, min(n, len(den) - 1) + 1):
                acc -= den[j] * out[n - j]
            out.append(acc / den[0])
        return out

    def degrees(self) -> list[int] | None:
        """Degrees d_i with self = 1/prod(1 - t^d_i), or None."""
        if list(self.num) != [1]:
            return None
        den = list(self.den)
        out = []
        while len(den) > 1:
            d = next(j for j in range(1, len(den)) if den[j] != 0)
            # the lowest term of prod(1 - t^d_i) is -(number of minimal d_i) t^d
            mult = -den[d]
            if mult.denominator != 1 or mult < 1:
                return None
            for _ in range(int(mult)):
                q, r = poly_divmod(den, [Fraction(1)] + [Fraction(0)] * (d - 1) + [Fraction(-1)])
                if r:
                    return None
                den = q
                out.append(d)
        return sorted(out) if den == [1] else None

    def __str__(self) -> str:
        def fmt(p):
            terms = [f"{c}*t^{i}" if i else f"{c}" for i, c in enumerate(p) if c]
            return " + ".join(terms) or "0"
        return f"({fmt(self.num)}) / ({fmt(self.den)})"


def _element_order(m: CycMatrix, limit: int) -> int:
    p = m
    for k in range(1, limit + 1):
        if p.is_identity():
            return k
        p = p * m
    raise WS2VerificationError("element order exceeds the group order")


def molien(group: FiniteMatrixGroup) -> RationalFunction:
    """(1/|G|) sum_g 1/det(I - t g), exactly.

    Elements are grouped by characteristic polynomial.  With e the exponent
    and k the dimension, each 1/det(I - t g) is P_g(t)/(1 - t^e)^k for a
    polynomial P_g; the sum of the P_g is Galois stable, hence rational.
    """
    k = group.dim
    classes: dict[tuple, list] = {}
    for g in group.elements:
        cp = tuple(g.charpoly())
        if cp in classes:
            classes[cp][1] += 1
        else:
            classes[cp] = [g, 1]
    e = 1
    for g, _ in classes.values():
        e = math.lcm(e, _element_order(g, group.order))
    one = CycNumber(1)
    base = [one] + [CycNumber(0)] * (e - 1) + [-one]
    big = [one]
    for _ in range(k):
        big = poly_mul(big, base)
    total = [CycNumber(0)] * (len(big))
    for cp, (g, mult) in classes.items():
        q = list(reversed(cp))  # det(I - tg) = t^k charpoly(1/t)
        p, r = poly_divmod(big, q)
        if r:
            raise WS2VerificationError("det(I - tg) does not divide (1 - t^e)^k")
        for j, c in enumerate(p):
            total[j] = total[j] + c * mult
    num = []
    for c in total:
        if not c.is_rational():
            raise WS2VerificationError("Molien numerator is not rational")
        num.append(c.to_fraction() / group.order)
    return RationalFunction.make(num, [x.to_fraction() for x in big])


# ---------------------------------------------------------------------------
# invariants of symmetric powers
# ---------------------------------------------------------------------------

def _monomials(k: int, deg: int):
    return list(itertools.combinations_with_replacement(range(k), deg))


def _is_monomial(m: CycMatrix) -> bool:
    return all(sum(1 for i in range(m.dim) if not m[i, j].is_zero()) == 1 for j in range(m.dim))


def sym_invariants_monomial(gens, deg: int) -> int:
    """dim Sym^deg(V)^G for a group generated by monomial matrices.

    Each monomial orbit spans a monomial representation; it contains an
    invariant (one, up to scale) iff the scalars along generator edges are
    consistent, which is tracked while walking the orbit.
    """
    if not all(_is_monomial(g) for g in gens):
        raise ValueError("generators are not monomial")
    k = gens[0].dim
    acts = []
    for g in gens:
        perm, coef = [], []
        for j in range(k):
            i = next(i for i in range(k) if not g[i, j].is_zero())
            perm.append(i)
            coef.append(g[i, j])
        acts.append((perm, coef))
    seen: set = set()
    count = 0
    for mono in _monomials(k, deg):
        if mono in seen:
            continue
        scal = {mono: CycNumber(1)}
        queue = [mono]
        ok = True
        while queue:
            cur = queue.pop()
            for perm, coef in acts:
                img = tuple(sorted(perm[j] for j in cur))
                c = scal[cur]
                for j in cur:
                    c = c * coef[j]
                if img in scal:
                    if scal[img] != c:
                        ok = False
                else:
                    scal[img] = c
                    queue.append(img)
        seen.update(scal)
        count += ok
    return count


def sym_power_matrix(g: CycMatrix, deg: int) -> list[list[CycNumber]]:
    """Matrix of g on Sym^deg(V) in the monomial basis (columns = images)."""
    k = g.dim
    basis = _monomials(k, deg)
    index = {m: i for i, m in enumerate(basis)}
    mat = [[CycNumber(0)] * len(basis) for _ in basis]
    for col, mono in enumerate(basis):
        # expand prod_j (sum_i g[i, j] e_i)
        terms = {(): CycNumber(1)}
        for j in mono:
            nxt: dict = {}
            for key, c in terms.items():
                for i in range(k):
                    if g[i, j].is_zero():
                        continue
                    nk = tuple(sorted(key + (i,)))
                    nxt[nk] = nxt.get(nk, CycNumber(0)) + c * g[i, j]
            terms = nxt
        for key, c in terms.items():
            mat[index[key]][col] = mat[index[key]][col] + c
    return mat


def sym_invariants_dense(gens, deg: int) -> int:
    """dim Sym^deg(V)^G by exact nullspace of the stacked (S(g) - I)."""
    rows = []
    for g in gens:
        s = sym_power_matrix(g, deg)
        for i, r in enumerate(s):
            rows.append([x - (1 if j == i else 0) for j, x in enumerate(r)])
    n = len(rows[0])
    return len(nullspace(rows, n))


# ---------------------------------------------------------------------------
# identification
# ---------------------------------------------------------------------------

G443_DEGREES = (3, 4, 8)


def reflection_subgroup_any(group: FiniteMatrixGroup) -> FiniteMatrixGroup:
    from .reflect import deviation_ranks
    r = deviation_ranks(group.coords, group.den, group.conductor, 1)
    gens = [group.element(int(i)) for i in np.nonzero(r == 1)[0]]
    if not gens:
        gens = [CycMatrix.identity(group.dim)]
    return enumerate_group(FiniteMatrixGroup(gens, conductor=group.conductor), cap=group.order + 1)


def identify_g443(group: FiniteMatrixGroup) -> bool:
    """Rank 3, order 96, generated by reflections, Molien series 1/((1-t^3)(1-t^4)(1-t^8))."""
    if group.dim != 3 or group.order != 96:
        return False
    if reflection_subgroup_any(group).order != group.order:
        return False
    return molien(group) == RationalFunction.from_degrees(G443_DEGREES)


# ---------------------------------------------------------------------------
# the pipeline
# ---------------------------------------------------------------------------

@dataclass
class WS2Report:
    group_order: int = 0
    orbit_size: int = 0
    stabilizer_order: int = 0
    stabilizer_matches_word: bool = False
    filter_agrees: bool | None = None
    fixed_dim: int = 0
    complement_dim: int = 0
    fixed_contains_vectors: bool = False
    projector_idempotent: bool = False
    complement_is_w_span: bool = False
    hw_order: int = 0
    displayed_generators_in_hw: bool = False
    form_preserved: bool = False
    lagrangian_preserved: bool = False
    lagrangian_isotropic: bool = False
    restricted_order: int = 0
    molien_num_degrees: list = field(default_factory=list)
    identified: bool = False
    omega_solution_dim: int = 0
    omega_nondegenerate: bool = False
    omega_alternating: bool = False
    w_gram_is_block_form: bool = False
    generators_are_reflections: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def passed(self) -> bool:
        return (self.group_order == WS2_ORDER and self.stabilizer_order == 96 and self.stabilizer_matches_word
                and self.filter_agrees is not False and self.fixed_dim == 2 and self.complement_dim == 6
                and self.fixed_contains_vectors and self.complement_is_w_span and self.hw_order == 96
                and self.displayed_generators_in_hw and self.form_preserved and self.lagrangian_preserved
                and self.identified and self.molien_num_degrees == list(G443_DEGREES))


def _restricted_group(H: FiniteMatrixGroup, sub: Subspace) -> FiniteMatrixGroup:
    gens = [restrict_matrix(g, sub) for g in H.generators]
    return enumerate_group(FiniteMatrixGroup(gens, name="H_W"), cap=H.order + 1)


def lagrangian_block(HW: FiniteMatrixGroup) -> FiniteMatrixGroup | None:
    """The action on <w_1, w_2, w_3>, or None if that span is not invariant."""
    arr, den = HW.coords, HW.den
    if arr[:, 3:, :3].any():
        return None
    top = arr[:, :3, :3]
    st = _Store(3, HW.conductor, cap=len(top) + 1)
    st.add(top, den)
    gens = [CycMatrix([[g[r, c] for c in range(3)] for r in range(3)]) for g in HW.generators]
    return FiniteMatrixGroup.from_coords(gens, st.array(), st.den, HW.conductor, name="H_L")


def stabilizer_pipeline(full: bool = False, cache_dir: str | None = None) -> WS2Report:
    rep = WS2Report()
    gens = ws2_generators()
    rep.generators_are_reflections = all((m - CycMatrix.identity(8)).rank() == 2 for m in gens)
    W = build_ws2(cache_dir)
    rep.group_order = W.order

    forms = infer_invariant_forms(gens)
    rep.omega_solution_dim = len(forms)
    omega = forms[0] if len(forms) == 1 else None
    if omega is not None:
        rep.omega_nondegenerate = not omega.det().is_zero()
        rep.omega_alternating = omega.transpose() == -omega

    orbit, H = orbit_stabilizer(W, V_VECTOR)
    rep.orbit_size = len(orbit)
    rep.stabilizer_order = H.order
    Hw = enumerate_group(FiniteMatrixGroup(stabilizer_word_generators(), conductor=W.conductor), cap=W.order)
    rep.stabilizer_matches_word = Hw.order == H.order and contains_all(Hw, H)
    if full:
        Hf = stabilizer_by_filter(W, V_VECTOR)
        rep.filter_agrees = Hf.order == H.order and contains_all(Hf, H)

    F = fixed_space(H)
    C = invariant_complement(H, F)
    rep.fixed_dim, rep.complement_dim = F.dim, C.dim
    rep.fixed_contains_vectors = F.contains(V_VECTOR) and F.contains(U_VECTOR)
    P = averaging_projector(H)
    rep.projector_idempotent = P * P == P

    wb = w_basis()
    cols = [wb.column(j) for j in range(wb.ncols)]
    Wsub = Subspace(8, cols)
    rep.complement_is_w_span = Wsub.dim == C.dim and all(C.contains(c) for c in cols)
    if not rep.complement_is_w_span:
        raise WS2VerificationError("w_1..w_6 do not span the invariant complement")

    HW = _restricted_group(H, Wsub)
    rep.hw_order = HW.order
    rep.displayed_generators_in_hw = all(g in HW for g in hw_displayed_generators())
    from .reflect import _preserves_form_batch
    rep.form_preserved = bool(_preserves_form_batch(HW.coords, HW.den, HW.conductor, block_form(3)).all())
    if omega is not None:
        gram = CycMatrix([[_bil(a, omega, b) for b in cols] for a in cols])
        c = gram[0, 3]
        rep.w_gram_is_block_form = not c.is_zero() and gram == c * block_form(3)
        rep.lagrangian_isotropic = all(gram[a, b].is_zero() for a in range(3) for b in range(3))

    HL = lagrangian_block(HW)
    rep.lagrangian_preserved = HL is not None
    if HL is not None:
        rep.restricted_order = HL.order
        m = molien(HL)
        rep.molien_num_degrees = m.degrees() or []
        rep.identified = identify_g443(HL)
    return rep


def _bil(a, omega: CycMatrix, b) -> CycNumber:
    acc = CycNumber(0)
    for i in range(len(a)):
        if a[i].is_zero():
            continue
        for j in range(len(b)):
            if not b[j].is_zero() and not omega[i, j].is_zero():
                acc = acc + a[i] * omega[i, j] * b[j]
    return acc


def pipeline_groups(cache_dir: str | None = None):
    """(W, H, H_W, H_L) for callers that want the objects, not just the report."""
    W = build_ws2(cache_dir)
    _, H = orbit_stabilizer(W, V_VECTOR)
    wb = w_basis()
    Wsub = Subspace(8, [wb.column(j) for j in range(wb.ncols)])
    HW = _restricted_group(H, Wsub)
    return W, H, HW, lagrangian_block(HW)
