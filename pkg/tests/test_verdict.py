import pytest
from hypothesis import given, strategies as st

from reference_tables import (
    CRUDE_OPEN,
    I,
    LOWER_BOUNDS,
    NO_DATA,
    O,
    OT,
    REFINED_OPEN,
    REFLECTIONS,
    diff,
)
from srgroups.families import FamilySpec, is_valid, reflection_index
from srgroups.verdict import (
    CHAMP_DATA,
    EXCLUDED_CRUDE,
    G0_SPECS,
    OPEN,
    SELF,
    SUBGROUP_RELATIONS,
    ChampRecord,
    NoDataError,
    champ_record,
    crude_minimal_d,
    crude_status,
    open_table,
    reflection_table,
    refined_exclude,
    refined_inequality,
    refined_lower_bound,
    refined_status,
    verify_subgroup_relations,
    window_check,
)


def test_reflection_table():
    rows = reflection_table()
    assert {r.g0: (r.n_reflections, r.minimal_d) for r in rows} == REFLECTIONS
    assert [r.g0 for r in rows] == list(G0_SPECS)


def test_crude_table_differs_only_by_mu20I_160():
    # 160 = 2^5 * 5 is admissible for MuI, has reflection index 20 and lies below 163
    assert reflection_index("MuI", 160) == 20 and 160 < REFLECTIONS[I(20)][1]
    assert diff(open_table("crude"), CRUDE_OPEN) == {I(20): ([160], [])}
    assert sum(map(len, open_table("crude").values())) == 74


def test_refined_table_differs_only_by_mu20I_160():
    table = open_table("refined")
    assert diff(table, REFINED_OPEN) == {I(20): ([160], [])}
    for g0 in NO_DATA:
        assert table[g0] == open_table("crude")[g0]


def test_lower_bounds():
    got = {r.g0: refined_lower_bound(r) for r in CHAMP_DATA if r.has_data}
    assert set(got) == set(LOWER_BOUNDS)
    mismatched = {g0 for g0 in got if got[g0] != LOWER_BOUNDS[g0]}
    assert mismatched == {O(4), OT(6)}
    assert (got[O(4)], got[OT(6)]) == (13, 8)


def test_lower_bounds_with_exchanged_m():
    # swapping m between the two mismatched rows reproduces the tabulated values
    a, b = champ_record(O(4)), champ_record(OT(6))
    a2 = ChampRecord(a.g0, a.st_number, a.character_label, a.champ_index, a.k, a.d1_multiplier, b.m, True)
    b2 = ChampRecord(b.g0, b.st_number, b.character_label, b.champ_index, b.k, b.d1_multiplier, a.m, True)
    assert refined_lower_bound(a2) == LOWER_BOUNDS[O(4)]
    assert refined_lower_bound(b2) == LOWER_BOUNDS[OT(6)]


def test_no_data_records():
    rec = champ_record(I(12))
    with pytest.raises(NoDataError):
        refined_exclude(rec, 24)
    with pytest.raises(NoDataError):
        rec.d1


def test_statuses():
    assert crude_status(O(4), 4).stage == SELF
    assert crude_status(O(4), 20).stage == OPEN
    assert crude_status(O(4), 44).stage == EXCLUDED_CRUDE
    assert crude_minimal_d(OT(6)) == 32
    assert refined_status(champ_record(O(4)), 20).certificates


@pytest.mark.parametrize("rec", [r for r in CHAMP_DATA if r.has_data], ids=lambda r: r.g0.label())
def test_refined_monotone(rec):
    # once the inequality holds it holds for every larger d
    lb = refined_lower_bound(rec)
    assert not any(refined_inequality(rec, d) for d in range(1, lb))
    assert all(refined_inequality(rec, d) for d in range(lb, 600))


@given(st.sampled_from([r for r in CHAMP_DATA if r.has_data]), st.integers(1, 240), st.integers(0, 240))
def test_refined_exclusion_monotone(rec, d, step):
    if refined_exclude(rec, d):
        assert refined_exclude(rec, d + step)


@pytest.mark.parametrize("rec", [r for r in CHAMP_DATA if r.has_data], ids=lambda r: r.g0.label())
def test_exclusion_window_avoids_forbidden(rec):
    # every refined exclusion is backed by a clean window of central characters
    for d in range(rec.g0.d, 241):
        if is_valid(rec.g0.kind, d) and reflection_index(rec.g0.kind, d) == rec.g0.d and refined_exclude(rec, d):
            assert window_check(rec.g0, d, rec.k, rec.m)


def test_subgroup_relations():
    pairs = verify_subgroup_relations()
    assert len(pairs) == 17 * 16
    statuses = {p.status for p in pairs}
    assert statuses <= {"contained", "absent", "undetermined"}
    assert sum(p.status == "contained" for p in pairs) == sum(len(v) for v in SUBGROUP_RELATIONS.values())
    for p in pairs:
        if p.status == "absent":
            assert p.certificates


def _certs(h, g):
    return next(p.certificates for p in verify_subgroup_relations() if p.sub == h and p.group == g)


def test_lemma_level_certificates():
    T6 = FamilySpec("MuT", 6)
    assert any(c.startswith("centre quotient") for c in _certs(O(4), T6))
    assert any(c.startswith("centre quotient") for c in _certs(I(4), T6))
    assert any(c.startswith("SL2 part") for c in _certs(O(4), OT(6)))
    assert any(c.startswith("OT divisibility") for c in _certs(OT(2), OT(4)))
