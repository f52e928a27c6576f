"""Case bookkeeping: which (G_0, d) are excluded, and by which bound.

The crude bound needs only N = |R(G_0)|.  The refined bound consumes the
precomputed (k, d_1, m) data per G_0 in `CHAMP_DATA`; k is never computed
here.  `verify_subgroup_relations` certifies containments between the
seventeen reflection groups G_0 literally and non-containments by invariants.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .families import (
    FamilySpec,
    build,
    det_set,
    is_valid,
    reflection_index,
)
from .matrep import BatchOps, contains_all
from .rigidity import KIND_ABC, KIND_D, forbidden_indices


class NoDataError(LookupError):
    pass


class RealizationError(AssertionError):
    pass


# the seventeen primitive reflection groups of rank 2 met by the families,
# with their Shephard-Todd numbers
REFLECTION_GROUPS: tuple[tuple[FamilySpec, int], ...] = (
    (FamilySpec("MuT", 6), 5),
    (FamilySpec("MuT", 12), 7),
    (FamilySpec("MuO", 4), 13),
    (FamilySpec("MuO", 8), 9),
    (FamilySpec("MuO", 12), 15),
    (FamilySpec("MuO", 24), 11),
    (FamilySpec("MuI", 4), 22),
    (FamilySpec("MuI", 6), 20),
    (FamilySpec("MuI", 10), 16),
    (FamilySpec("MuI", 12), 21),
    (FamilySpec("MuI", 20), 17),
    (FamilySpec("MuI", 30), 18),
    (FamilySpec("MuI", 60), 19),
    (FamilySpec("OT", 2), 12),
    (FamilySpec("OT", 4), 8),
    (FamilySpec("OT", 6), 14),
    (FamilySpec("OT", 12), 10),
)
G0_SPECS = tuple(s for s, _ in REFLECTION_GROUPS)
SHEPHARD_TODD = {s: n for s, n in REFLECTION_GROUPS}


def _T(d):
    return FamilySpec("MuT", d)


def _O(d):
    return FamilySpec("MuO", d)


def _I(d):
    return FamilySpec("MuI", d)


def _OT(d):
    return FamilySpec("OT", d)


# positive containments H <= G among the G_0 groups
SUBGROUP_RELATIONS: dict[FamilySpec, tuple[FamilySpec, ...]] = {
    _T(6): (_T(12), _O(12), _O(24), _I(6), _I(12), _I(30), _I(60), _OT(6), _OT(12)),
    _T(12): (_O(12), _O(24), _I(12), _I(60), _OT(12)),
    _O(4): (_O(8), _O(12), _O(24)),
    _O(8): (_O(24),),
    _O(12): (_O(24),),
    _O(24): (),
    _I(4): (_I(12), _I(20), _I(60)),
    _I(6): (_I(12), _I(30), _I(60)),
    _I(10): (_I(20), _I(30), _I(60)),
    _I(12): (_I(60),),
    _I(20): (_I(60),),
    _I(30): (_I(60),),
    _I(60): (),
    _OT(2): (_O(4), _O(8), _O(12), _O(24), _OT(6)),
    _OT(4): (_O(8), _O(24), _OT(12)),
    _OT(6): (_O(12), _O(24)),
    _OT(12): (_O(24),),
}


@dataclass(frozen=True)
class ChampRecord:
    g0: FamilySpec
    st_number: int
    character_label: str = ""
    champ_index: int = 0
    k: int = 0
    d1_multiplier: Fraction = Fraction(0)
    m: int = 0
    has_data: bool = False

    def __post_init__(self):
        if self.has_data:
            if self.k < 1 or self.m < 2:
                raise ValueError("records with data need k >= 1 and m >= 2")
            d1 = self.d1_multiplier * self.g0.d
            if d1.denominator != 1 or not is_valid(self.g0.kind, int(d1)):
                raise ValueError(f"d_1 = {d1} is not a valid index for {self.g0.kind}")

    @property
    def d1(self) -> int:
        if not self.has_data:
            raise NoDataError(f"no data for {self.g0}")
        return int(self.d1_multiplier * self.g0.d)


def _rec(g0, st, label, idx, k, mult, m):
    return ChampRecord(g0, st, label, idx, k, Fraction(mult), m, True)


CHAMP_DATA: tuple[ChampRecord, ...] = (
    _rec(_T(6), 5, "phi_{3,4}", 19, 5, 3, 2),
    _rec(_T(12), 7, "phi_{3,10}", 37, 7, 1, 2),
    _rec(_O(4), 13, "phi_{2,1}", 7, 3, 5, 3),
    _rec(_O(8), 9, "phi_{4,5}", 32, 7, 2, 3),
    _rec(_O(12), 15, "phi''_{3,10}", 36, 11, 1, 2),
    ChampRecord(_O(24), 11),
    _rec(_I(4), 22, "phi_{4,6}", 12, 1, 2, 2),
    _rec(_I(6), 20, "phi'_{3,10}", 13, 1, 3, 2),
    _rec(_I(10), 16, "phi_{5,8}", 39, 9, 1, 2),
    ChampRecord(_I(12), 21),
    ChampRecord(_I(20), 17),
    ChampRecord(_I(30), 18),
    ChampRecord(_I(60), 19),
    _rec(_OT(2), 12, "phi_{2,1}", 3, 3, 5, 3),
    _rec(_OT(4), 8, "phi_{4,5}", 15, 7, 5, 3),
    _rec(_OT(6), 14, "phi_{2,4}", 14, 5, 3, 2),
    _rec(_OT(12), 10, "phi'_{3,10}", 36, 11, 1, 2),
)


def champ_record(g0: FamilySpec) -> ChampRecord:
    for r in CHAMP_DATA:
        if r.g0 == g0:
            return r
    raise KeyError(g0)


def kind_of(spec: FamilySpec) -> str:
    return KIND_D if spec.kind == "OT" else KIND_ABC


# ---------------------------------------------------------------------------
# statuses
# ---------------------------------------------------------------------------

SELF = "SelfCase"
OPEN = "Open"
EXCLUDED_CRUDE = "ExcludedCrude"
EXCLUDED_REFINED = "ExcludedRefined"


@dataclass(frozen=True, order=True)
class CaseStatus:
    g0: FamilySpec
    d: int
    stage: str
    certificates: tuple[str, ...] = field(default=(), compare=False)

    @property
    def is_open(self) -> bool:
        return self.stage in (SELF, OPEN)

    def to_dict(self) -> dict:
        return {"g0": self.g0.label(), "kind": self.g0.kind, "d": self.d,
                "status": self.stage, "certificates": list(self.certificates)}


@lru_cache(maxsize=None)
def reflection_number(g0: FamilySpec) -> int:
    from .reflect import reflection_count
    return reflection_count(g0)


def crude_minimal_d(g0: FamilySpec, n_refl: int | None = None) -> int:
    """Smallest d with 2N + 6 < d (families with mu_d) or N + 3 < d (OT)."""
    n = reflection_number(g0) if n_refl is None else n_refl
    return n + 4 if g0.kind == "OT" else 2 * n + 7


def family_indices(g0: FamilySpec, upto: int) -> list[int]:
    """Valid d <= upto whose largest reflection subgroup is g0 (no size bound)."""
    return [d for d in range(1, upto + 1)
            if is_valid(g0.kind, d) and reflection_index(g0.kind, d) == g0.d]


def first_realizable_above(g0: FamilySpec, bound: int) -> int:
    d = bound
    while not (is_valid(g0.kind, d) and reflection_index(g0.kind, d) == g0.d):
        d += 1
    return d


def crude_status(g0: FamilySpec, d: int, n_refl: int | None = None) -> CaseStatus:
    if d == g0.d:
        return CaseStatus(g0, d, SELF, ("G = G_0",))
    bound = crude_minimal_d(g0, n_refl)
    if d >= bound:
        return CaseStatus(g0, d, EXCLUDED_CRUDE, (f"d >= {bound}",))
    return CaseStatus(g0, d, OPEN, (f"d < {bound}",))


def open_after_crude(g0: FamilySpec, n_refl: int | None = None) -> list[CaseStatus]:
    bound = crude_minimal_d(g0, n_refl)
    return [crude_status(g0, d, n_refl) for d in family_indices(g0, bound - 1)]


def refined_inequality(record: ChampRecord, d: int) -> bool:
    shift = d - (record.k - 1) - record.m
    if record.g0.kind == "OT":
        return shift > 1
    return 2 * shift > d + 2  # shift > d/2 + 1


def refined_exclude(record: ChampRecord, d: int) -> bool:
    if not record.has_data:
        raise NoDataError(f"no data for {record.g0}")
    return d >= record.d1 and refined_inequality(record, d)


def refined_lower_bound(record: ChampRecord) -> int:
    """Smallest positive d satisfying the refined inequality (ignoring d_1 and validity)."""
    if not record.has_data:
        raise NoDataError(f"no data for {record.g0}")
    d = 1
    while not refined_inequality(record, d):
        d += 1
    return d


def open_after_refined(records=CHAMP_DATA, n_refl: dict | None = None) -> list[CaseStatus]:
    out = []
    for rec in records:
        n = None if n_refl is None else n_refl[rec.g0]
        for c in open_after_crude(rec.g0, n):
            if c.stage == OPEN and rec.has_data and refined_exclude(rec, c.d):
                continue
            if c.stage == OPEN and not rec.has_data:
                c = CaseStatus(c.g0, c.d, OPEN, c.certificates + ("no data",))
            out.append(c)
    return out


def refined_status(record: ChampRecord, d: int, n_refl: int | None = None) -> CaseStatus:
    c = crude_status(record.g0, d, n_refl)
    if c.stage == OPEN and record.has_data and refined_exclude(record, d):
        return CaseStatus(c.g0, d, EXCLUDED_REFINED,
                          (f"d >= d_1 = {record.d1}", f"d >= {refined_lower_bound(record)}"))
    return c


def window(d: int, span: int, m: int) -> list[int]:
    start = d - (span - 1) - m
    return [(start + j) % d for j in range(span)]


def window_check(g0: FamilySpec, d: int, span: int, m: int) -> bool:
    """True iff the index window {d - (span-1) - m, ..., d - m} mod d avoids the forbidden set."""
    bad = forbidden_indices(kind_of(g0), d)
    return not any(i in bad for i in window(d, span, m))


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReflectionRow:
    g0: FamilySpec
    n_reflections: int
    minimal_d: int
    first_realizable_d: int

    def to_dict(self) -> dict:
        return {"g0": self.g0.label(), "kind": self.g0.kind, "N": self.n_reflections,
                "minimal_d": self.minimal_d, "first_realizable_d": self.first_realizable_d,
                "shephard_todd": SHEPHARD_TODD[self.g0]}


def reflection_table() -> list[ReflectionRow]:
    rows = []
    for g0 in G0_SPECS:
        n = reflection_number(g0)
        b = crude_minimal_d(g0, n)
        rows.append(ReflectionRow(g0, n, b, first_realizable_above(g0, b)))
    return rows


def open_table(stage: str) -> dict[FamilySpec, list[int]]:
    if stage == "crude":
        cases = [c for g0 in G0_SPECS for c in open_after_crude(g0)]
    elif stage == "refined":
        cases = open_after_refined()
    else:
        raise ValueError(f"unknown stage {stage!r}")
    out: dict[FamilySpec, list[int]] = {g0: [] for g0 in G0_SPECS}
    for c in cases:
        if c.is_open:
            out[c.g0].append(c.d)
    return out


# ---------------------------------------------------------------------------
# subgroup relations among the G_0
# ---------------------------------------------------------------------------

def _trace_det_multiset(spec: FamilySpec) -> Counter:
    """Multiset of (trace, det) over all elements: the characteristic polynomials."""
    from .cyclo import from_coords
    G = build(spec)
    arr, den, n = G.coords, G.den, G.conductor
    ops = BatchOps(n)
    tr = arr[:, 0, 0] + arr[:, 1, 1]
    ad = ops.product(arr[:, 0:1, 0:1], arr[:, 1:2, 1:2])[:, 0, 0]
    bc = ops.product(arr[:, 0:1, 1:2], arr[:, 1:2, 0:1])[:, 0, 0]
    both = np.concatenate([tr * den, ad - bc], axis=1)
    uniq, counts = np.unique(both, axis=0, return_counts=True)
    phi = arr.shape[-1]
    out = Counter()
    for row, c in zip(uniq, counts):
        key = (from_coords(n, row[:phi], den * den), from_coords(n, row[phi:], den * den))
        out[key] += int(c)
    return out


@lru_cache(maxsize=None)
def _invariants(spec: FamilySpec) -> dict:
    G = build(spec)
    dets = det_set(spec)
    from .cyclo import CycNumber
    # |G n SL_2|: det is a homomorphism onto the determinant set
    sl2 = G.order // len(dets)
    return {"order": G.order, "centre": spec.d, "dets": dets, "sl2": sl2,
            "charpolys": _trace_det_multiset(spec), "one": CycNumber(1)}


def non_containment_certificates(h: FamilySpec, g: FamilySpec) -> list[str]:
    """Invariants showing that no conjugate of h lies in g."""
    a, b = _invariants(h), _invariants(g)
    certs = []
    if b["order"] % a["order"]:
        certs.append(f"order: {a['order']} does not divide {b['order']}")
    qa, qb = a["order"] // a["centre"], b["order"] // b["centre"]
    if qb % qa:
        certs.append(f"centre quotient: {qa} does not divide {qb}")
    if not a["dets"] <= b["dets"]:
        certs.append("determinants: det set not contained")
    if b["sl2"] % a["sl2"]:
        certs.append(f"SL2 part: {a['sl2']} does not divide {b['sl2']}")
    if h.kind == "OT" and g.kind == "OT":
        if g.d % h.d or (g.d // h.d) % 2 == 0:
            certs.append(f"OT divisibility: {g.d}/{h.d} is not an odd integer")
    ca, cb = a["charpolys"], b["charpolys"]
    if any(cb[key] < cnt for key, cnt in ca.items()):
        certs.append("charpoly multiset not dominated")
    return certs


@dataclass(frozen=True)
class SubgroupPair:
    sub: FamilySpec
    group: FamilySpec
    expected: bool
    status: str
    certificates: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"g0": self.sub.label(), "kind": self.sub.kind, "d": self.sub.d,
                "group": self.group.label(), "expected": "contained" if self.expected else "absent",
                "status": self.status, "certificates": list(self.certificates)}


def verify_subgroup_relations() -> list[SubgroupPair]:
    """Literal containment for each listed pair; certified or undetermined absence otherwise."""
    out = []
    for h in G0_SPECS:
        H = build(h)
        for g in G0_SPECS:
            if g == h:
                continue
            expected = g in SUBGROUP_RELATIONS[h]
            literal = contains_all(H, build(g))
            if expected:
                if not literal:
                    raise RealizationError(f"{h.label()} is not literally inside {g.label()}")
                out.append(SubgroupPair(h, g, True, "contained", ("literal containment",)))
                continue
            if literal:
                out.append(SubgroupPair(h, g, False, "fail", ("literal containment contradicts absence",)))
                continue
            certs = non_containment_certificates(h, g)
            out.append(SubgroupPair(h, g, False, "absent" if certs else "undetermined", tuple(certs)))
    return out
