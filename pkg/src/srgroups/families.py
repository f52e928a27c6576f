"""The rank-2 groups mu_d T, mu_d O, mu_d I, OT_d and their doublings E(G).

Fixed realizations inside SL_2:

* T is the group of Hurwitz units, quaternions a + bi + cj + dk mapped to
  [[a + b i, c + d i], [-c + d i, a - b i]].
* O = T u omega T with omega = (1 + i)/sqrt(2) = diag(zeta_8, zeta_8^-1).
* I is the group of icosians, generated by T and (tau + tau^-1 i + j)/2 with
  tau the golden ratio, so T sits literally inside I.

The OT family is indexed by the order d of its centre, so OT_d contains
mu_d and has order 24 d.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cyclo import CycNumber, root_of_unity, totient
from .matrep import (
    CycMatrix,
    FiniteMatrixGroup,
    _Store,
    enumerate_group,
    galois_matrix,
    linear_map_coords,
    monomial_matrix,
    pack,
    recoordinate,
    unpack,
)

KINDS = ("MuT", "MuO", "MuI", "OT")
MAX_D = 240
_BASE_CONDUCTOR = {"MuT": 4, "MuO": 8, "MuI": 20}


class FamilyConstraintError(ValueError):
    pass


class SpecSyntaxError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class FamilySpec:
    kind: str
    d: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FamilyConstraintError(f"unknown family kind {self.kind!r}")
        if not isinstance(self.d, int) or self.d < 1:
            raise FamilyConstraintError(f"invalid index d={self.d!r}")
        if self.d > MAX_D:
            raise FamilyConstraintError(f"d={self.d} exceeds the toolkit bound {MAX_D}")
        if not is_valid(self.kind, self.d):
            raise FamilyConstraintError(f"{self.kind} does not admit d={self.d}")

    @property
    def family_kind(self) -> str:
        """'ABC' for the mu_d families, 'D' for OT."""
        return "D" if self.kind == "OT" else "ABC"

    @property
    def order(self) -> int:
        return {"MuT": 12, "MuO": 24, "MuI": 60, "OT": 24}[self.kind] * self.d

    @property
    def conductor(self) -> int:
        if self.kind == "OT":
            return math.lcm(2 * self.d, 8)
        return math.lcm(self.d, _BASE_CONDUCTOR[self.kind])

    def label(self) -> str:
        return f"OT{self.d}" if self.kind == "OT" else f"mu{self.d}{self.kind[-1]}"

    def __str__(self) -> str:
        return format_spec(self)


def is_valid(kind: str, d: int) -> bool:
    if d < 1:
        return False
    if kind == "MuT":
        return d % 6 == 0
    if kind == "MuO":
        return d % 4 == 0
    if kind == "MuI":
        return d % 4 == 0 or d % 6 == 0 or d % 10 == 0
    if kind == "OT":
        return d % 2 == 0 and d % 8 != 0
    return False


def valid_indices(kind: str, limit: int = MAX_D) -> list[int]:
    return [d for d in range(1, limit + 1) if is_valid(kind, d)]


@dataclass(frozen=True)
class DerivedSpec:
    base: FamilySpec
    object: str = "G"

    def __post_init__(self):
        if self.object not in ("G", "G0", "EG", "Dd", "Z"):
            raise SpecSyntaxError(f"unknown derived object {self.object!r}")


_PREFIX = {"mut": "MuT", "muo": "MuO", "mui": "MuI", "ot": "OT"}
_SUFFIX = {"eg": "EG", "dd": "Dd", "g0": "G0", "z": "Z", "g": "G"}


def parse_spec(text: str) -> DerivedSpec:
    """Parse 'muT:6', 'OT:12', 'muI:144:EG' and similar."""
    parts = text.strip().split(":")
    if len(parts) not in (2, 3):
        raise SpecSyntaxError(f"bad spec string {text!r}")
    kind = _PREFIX.get(parts[0].lower())
    if kind is None:
        raise SpecSyntaxError(f"unknown family {parts[0]!r}")
    try:
        d = int(parts[1])
    except ValueError:
        raise SpecSyntaxError(f"bad index {parts[1]!r}") from None
    obj = "G"
    if len(parts) == 3:
        obj = _SUFFIX.get(parts[2].lower())
        if obj is None:
            raise SpecSyntaxError(f"unknown suffix {parts[2]!r}")
    return DerivedSpec(FamilySpec(kind, d), obj)


def format_spec(spec: FamilySpec, obj: str = "G") -> str:
    prefix = {"MuT": "muT", "MuO": "muO", "MuI": "muI", "OT": "OT"}[spec.kind]
    s = f"{prefix}:{spec.d}"
    return s if obj == "G" else f"{s}:{obj}"


# ---------------------------------------------------------------------------
# base groups
# ---------------------------------------------------------------------------

def quaternion_matrix(a, b, c, d) -> CycMatrix:
    i = root_of_unity(4)
    a, b, c, d = (x if isinstance(x, CycNumber) else CycNumber(Fraction(x)) for x in (a, b, c, d))
    return CycMatrix([[a + b * i, c + d * i], [-c + d * i, a - b * i]])


def sqrt5() -> CycNumber:
    z = root_of_unity
    return z(5, 1) - z(5, 2) - z(5, 3) + z(5, 4)


def golden_ratio() -> CycNumber:
    return (1 + sqrt5()) * Fraction(1, 2)


def omega() -> CycMatrix:
    return CycMatrix.diag([root_of_unity(8, 1), root_of_unity(8, 7)])


def _t_generators() -> list[CycMatrix]:
    h = Fraction(1, 2)
    return [quaternion_matrix(0, 1, 0, 0), quaternion_matrix(0, 0, 1, 0), quaternion_matrix(h, h, h, h)]


def icosian_generator() -> CycMatrix:
    tau = golden_ratio()
    h = Fraction(1, 2)
    return quaternion_matrix(tau * h, (tau - 1) * h, h, 0)


@lru_cache(maxsize=1)
def base_generators() -> tuple[FiniteMatrixGroup, FiniteMatrixGroup, FiniteMatrixGroup, CycMatrix]:
    """(T, O, I, omega), each group enumerated by closure."""
    tg = _t_generators()
    T = enumerate_group(FiniteMatrixGroup(tg, name="T"))
    w = omega()
    O = enumerate_group(FiniteMatrixGroup(tg + [w], name="O"))
    I = enumerate_group(FiniteMatrixGroup(tg + [icosian_generator()], name="I"))
    return T, O, I, w


def hurwitz_units() -> list[CycMatrix]:
    """The 24 Hurwitz units as explicit matrices (independent of any closure)."""
    out = []
    for pos in range(4):
        for sgn in (1, -1):
            q = [0, 0, 0, 0]
            q[pos] = sgn
            out.append(quaternion_matrix(*q))
    h = Fraction(1, 2)
    for s0 in (1, -1):
        for s1 in (1, -1):
            for s2 in (1, -1):
                for s3 in (1, -1):
                    out.append(quaternion_matrix(s0 * h, s1 * h, s2 * h, s3 * h))
    return out


# ---------------------------------------------------------------------------
# assembling the families
# ---------------------------------------------------------------------------

def _scaled_union(blocks: list[tuple[np.ndarray, int]], n: int, k: int = 2) -> _Store:
    st = _Store(k, n, cap=10 ** 7)
    for num, den in blocks:
        st.add(num, den)
    return _sorted_store(st)


def _sorted_store(st: _Store) -> _Store:
    arr = st.array()
    cast = arr.astype(st.dtype)
    order = sorted(range(len(arr)), key=lambda i: cast[i].tobytes())
    out = _Store(st.k, st.n, cap=st.cap)
    out.add(arr[order], st.den)
    return out


def _scalar_times(coords: np.ndarray, n: int, j: int) -> np.ndarray:
    return linear_map_coords(coords, monomial_matrix(n, j))


def _coset_blocks(base: FiniteMatrixGroup, n: int, exponents: list[int]) -> list[tuple[np.ndarray, int]]:
    st = base._need()
    num, den = recoordinate(st.array(), st.den, base.conductor, n)
    return [(_scalar_times(num, n, j), den) for j in exponents]


def generators_of(spec: FamilySpec) -> list[CycMatrix]:
    T, O, I, w = base_generators()
    if spec.kind == "OT":
        z2d = root_of_unity(2 * spec.d, 1)
        return [CycMatrix.diag([z2d * z2d] * 2)] + list(T.generators) + [z2d * w]
    base = {"MuT": T, "MuO": O, "MuI": I}[spec.kind]
    zd = root_of_unity(spec.d, 1)
    return [CycMatrix.diag([zd, zd])] + list(base.generators)


def build(spec: FamilySpec, verify: bool = False) -> FiniteMatrixGroup:
    """Assemble the elements of the group from its coset description."""
    if not isinstance(spec, FamilySpec):
        raise FamilyConstraintError("build expects a FamilySpec")
    return _build_cached(spec, verify)


@lru_cache(maxsize=8)
def _build_cached(spec: FamilySpec, verify: bool) -> FiniteMatrixGroup:
    T, O, I, w = base_generators()
    n = spec.conductor
    d = spec.d
    if spec.kind == "OT":
        # zeta_{2d}^k T for even k, zeta_{2d}^k omega T for odd k
        wT = FiniteMatrixGroup.from_coords([], *_times_fixed_left(w, T, n), n)
        step = n // (2 * d)
        blocks = _coset_blocks(T, n, [k * step for k in range(0, 2 * d, 2)])
        blocks += _coset_blocks(wT, n, [k * step for k in range(1, 2 * d, 2)])
    else:
        base = {"MuT": T, "MuO": O, "MuI": I}[spec.kind]
        step = n // d
        blocks = _coset_blocks(base, n, [a * step for a in range(d)])
    st = _scaled_union(blocks, n)
    g = FiniteMatrixGroup.from_coords(generators_of(spec), st.array(), st.den, n,
                                      name=spec.label(), cap=len(st.array()))
    if g.order != spec.order:
        raise FamilyConstraintError(f"{spec.label()} assembled with order {g.order}, expected {spec.order}")
    if verify:
        closed = enumerate_group(FiniteMatrixGroup(generators_of(spec), conductor=n), cap=spec.order + 1)
        if closed.order != g.order or closed.sorted_keys() != g.sorted_keys():
            raise FamilyConstraintError(f"closure of the generators of {spec.label()} differs from the coset assembly")
    return g


def _times_fixed_left(m: CycMatrix, group: FiniteMatrixGroup, n: int):
    from .matrep import BatchOps
    st = group._need()
    num, den = recoordinate(st.array(), st.den, group.conductor, n)
    mn, md = pack([m], n)
    return BatchOps(n).product(mn, num), den * md


def scalar_subgroup(spec: FamilySpec) -> FiniteMatrixGroup:
    """mu_d as scalar 2x2 matrices."""
    zd = root_of_unity(spec.d, 1)
    return enumerate_group(FiniteMatrixGroup([CycMatrix.diag([zd, zd])], conductor=spec.conductor, name=f"mu{spec.d}"))


@lru_cache(maxsize=16)
def det_set(spec: FamilySpec) -> frozenset[CycNumber]:
    """Determinants of all elements, computed elementwise."""
    g = build(spec)
    return frozenset(determinants(g))


def determinants(group: FiniteMatrixGroup) -> list[CycNumber]:
    """Exact determinants of all elements of an enumerated 2x2 group (distinct values)."""
    from .matrep import BatchOps
    if group.dim != 2:
        raise ValueError("determinants() expects 2x2 matrices")
    st = group._need()
    arr, den = st.array(), st.den
    ops = BatchOps(group.conductor)
    a = arr[:, 0:1, 0:1]
    b = arr[:, 0:1, 1:2]
    c = arr[:, 1:2, 0:1]
    dd = arr[:, 1:2, 1:2]
    # 1x1 "matrices": products through the evaluation map
    ad = ops.product(a, dd)
    bc = ops.product(b, c)
    num = (ad - bc)[:, 0, 0]
    uniq = np.unique(num, axis=0)
    from .cyclo import from_coords
    return [from_coords(group.conductor, row, den * den) for row in uniq]


def reflection_index(kind: str, d: int) -> int:
    """d_0 of the largest complex reflection subgroup, by pure arithmetic (any d)."""
    if not is_valid(kind, d):
        raise FamilyConstraintError(f"{kind} does not admit d={d}")
    if kind == "OT":
        m = d // 2
        return 2 * max(x for x in (1, 2, 3, 6) if m % x == 0 and (m // x) % 2 == 1)
    options = {"MuT": (6, 12), "MuO": (4, 8, 12, 24), "MuI": (4, 6, 10, 12, 20, 30, 60)}[kind]
    return max(x for x in options if d % x == 0)


def largest_reflection_subgroup(spec: FamilySpec, verify: bool = False) -> tuple[FamilySpec, int, int]:
    """(spec0, d0, d/d0) for the largest complex reflection subgroup G_0."""
    d = spec.d
    d0 = reflection_index(spec.kind, d)
    spec0 = FamilySpec(spec.kind, d0)
    if verify:
        from .matrep import contains_all, is_normal
        G = build(spec)
        G0 = build(spec0)
        if G.order % G0.order or G.order // G0.order != d // d0:
            raise FamilyConstraintError("index of G_0 differs from d/d0")
        if not contains_all(G0, G):
            raise FamilyConstraintError("G_0 is not contained in G")
        if not is_normal(G0, G):
            raise FamilyConstraintError("G_0 is not normal in G")
    return spec0, d0, d // d0


# ---------------------------------------------------------------------------
# doubling
# ---------------------------------------------------------------------------

def s_matrix() -> CycMatrix:
    return CycMatrix([[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]])


def omega_form() -> CycMatrix:
    """The symplectic form [[0, I_2], [-I_2, 0]] preserved by every g^vee and by s."""
    return CycMatrix([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])


def vee(g: CycMatrix) -> CycMatrix:
    """g^vee = diag(g, (g^T)^-1)."""
    if g.dim != 2:
        raise ValueError("vee expects a 2x2 matrix")
    gi = g.transpose().inverse()
    return CycMatrix([[g[0, 0], g[0, 1], 0, 0], [g[1, 0], g[1, 1], 0, 0],
                      [0, 0, gi[0, 0], gi[0, 1]], [0, 0, gi[1, 0], gi[1, 1]]])


def is_unitary(g: CycMatrix) -> bool:
    return (g * g.conj_transpose()).is_identity()


def vee_coords(group: FiniteMatrixGroup) -> tuple[np.ndarray, int]:
    """Coordinates of g^vee for every element, using (g^T)^-1 = conj(g) for unitary g.

    Unitarity is checked exactly on the generators; every element is a
    product of them, so it holds throughout.
    """
    for g in group.generators:
        if not is_unitary(g):
            raise FamilyConstraintError(f"generator is not unitary: {g.serialize()}")
    st = group._need()
    n = group.conductor
    arr, den = st.array(), st.den
    cj = linear_map_coords(arr, galois_matrix(n, -1))
    m = len(arr)
    out = np.zeros((m, 4, 4, arr.shape[-1]), dtype=np.int64)
    out[:, :2, :2] = arr
    out[:, 2:, 2:] = cj
    return out, den


def times_s(coords: np.ndarray) -> np.ndarray:
    """M s for a batch of 4x4 coordinate matrices (a signed column permutation)."""
    out = np.empty_like(coords)
    out[:, :, 0] = coords[:, :, 3]
    out[:, :, 1] = -coords[:, :, 2]
    out[:, :, 2] = -coords[:, :, 1]
    out[:, :, 3] = coords[:, :, 0]
    return out


@lru_cache(maxsize=8)
def vee_group(spec: FamilySpec) -> FiniteMatrixGroup:
    G = build(spec)
    num, den = vee_coords(G)
    return FiniteMatrixGroup.from_coords([vee(g) for g in G.generators], num, den, G.conductor,
                                         name=f"{spec.label()}^vee", cap=len(num))


@lru_cache(maxsize=4)
def build_EG(spec: FamilySpec) -> FiniteMatrixGroup:
    """E(G) = {g^vee, g^vee s}."""
    G = build(spec)
    num, den = vee_coords(G)
    both = np.concatenate([num, times_s(num)])
    gens = [vee(g) for g in G.generators] + [s_matrix()]
    st = _Store(4, G.conductor, cap=len(both))
    st.add(both, den)
    return FiniteMatrixGroup.from_coords(gens, st.array(), st.den, G.conductor,
                                         name=f"E({spec.label()})", cap=len(both))


def build_Dd(spec: FamilySpec) -> FiniteMatrixGroup:
    """D_d = <mu_d^vee, s>, enumerated by closure."""
    zd = root_of_unity(spec.d, 1)
    r = vee(CycMatrix.diag([zd, zd]))
    return enumerate_group(FiniteMatrixGroup([r, s_matrix()], conductor=spec.conductor, name=f"D{spec.d}"))


def preserves_form(m: CycMatrix, form: CycMatrix | None = None) -> bool:
    form = omega_form() if form is None else form
    return m.transpose() * form * m == form
