import numpy as np
import pytest
from hypothesis import given, strategies as st

from srgroups.cyclo import root_of_unity
from srgroups.families import (
    KINDS,
    FamilyConstraintError,
    FamilySpec,
    SpecSyntaxError,
    base_generators,
    build,
    build_Dd,
    build_EG,
    det_set,
    format_spec,
    hurwitz_units,
    is_valid,
    largest_reflection_subgroup,
    omega_form,
    parse_spec,
    preserves_form,
    reflection_index,
    s_matrix,
    valid_indices,
    vee,
)
from srgroups.matrep import CycMatrix, centre, contains_all, enumerate_group
from srgroups.reflect import reflection_subgroup

SMALL = [FamilySpec("MuT", 6), FamilySpec("MuT", 12), FamilySpec("MuO", 4), FamilySpec("MuO", 8),
         FamilySpec("MuI", 4), FamilySpec("MuI", 6), FamilySpec("OT", 2), FamilySpec("OT", 6), FamilySpec("OT", 12)]


def test_binary_polyhedral_orders():
    T, O, I, w = base_generators()
    assert (T.order, O.order, I.order) == (24, 48, 120)
    assert contains_all(T, O) and contains_all(T, I)
    assert len(set(hurwitz_units())) == 24
    assert all(u in T for u in hurwitz_units())


@pytest.mark.parametrize("spec", SMALL, ids=str)
def test_coset_assembly_matches_closure(spec):
    G = build(spec, verify=True)
    assert G.order == spec.order


@pytest.mark.parametrize("spec", SMALL, ids=str)
def test_centre_is_mu_d(spec):
    Z = centre(build(spec))
    assert Z.order == spec.d
    assert all(z[0, 1].is_zero() and z[0, 0] == z[1, 1] for z in Z.elements)


@pytest.mark.parametrize("spec", SMALL, ids=str)
def test_determinants_against_floats(spec):
    G = build(spec)
    dets = {complex(round(x.real, 9), round(x.imag, 9)) for x in np.linalg.det(np.array([g.to_complex() for g in G.elements]))}
    assert len(dets) == len(det_set(spec))
    exact = {complex(round(x.to_complex().real, 9), round(x.to_complex().imag, 9)) for x in det_set(spec)}
    assert exact == dets


@pytest.mark.parametrize("spec", [FamilySpec("MuT", 18), FamilySpec("MuO", 12), FamilySpec("MuI", 20),
                                  FamilySpec("OT", 18), FamilySpec("OT", 4)], ids=str)
def test_reflection_index_against_enumeration(spec):
    spec0, d0, index = largest_reflection_subgroup(spec, verify=True)
    R = reflection_subgroup(build(spec))
    assert R.order == spec0.order
    assert index == spec.d // d0


def test_validity_rules():
    assert valid_indices("MuT", 30) == [6, 12, 18, 24, 30]
    assert valid_indices("OT", 20) == [2, 4, 6, 10, 12, 14, 18, 20]
    assert is_valid("MuI", 10) and not is_valid("MuI", 14)
    with pytest.raises(FamilyConstraintError):
        FamilySpec("OT", 8)
    with pytest.raises(FamilyConstraintError):
        FamilySpec("MuT", 246)


@given(st.sampled_from(KINDS), st.integers(1, 240))
def test_spec_round_trip(kind, d):
    if not is_valid(kind, d):
        with pytest.raises(FamilyConstraintError):
            FamilySpec(kind, d)
        return
    spec = FamilySpec(kind, d)
    assert parse_spec(format_spec(spec)).base == spec
    assert parse_spec(format_spec(spec, "EG")).object == "EG"
    assert parse_spec(format_spec(spec).upper()).base == spec


@pytest.mark.parametrize("text", ["muT", "muX:6", "muT:six", "muT:6:foo", "a:b:c:d"])
def test_bad_spec_strings(text):
    with pytest.raises(SpecSyntaxError):
        parse_spec(text)


@given(st.sampled_from(KINDS), st.integers(1, 240))
def test_reflection_index_divides(kind, d):
    if is_valid(kind, d):
        d0 = reflection_index(kind, d)
        assert d % d0 == 0 and is_valid(kind, d0)
        assert reflection_index(kind, d0) == d0


def test_vee_is_symplectic():
    g = CycMatrix([[root_of_unity(8), 0], [1, root_of_unity(8, 7)]])
    assert preserves_form(vee(g))
    assert preserves_form(s_matrix())
    assert omega_form().transpose() == -omega_form()


@pytest.mark.parametrize("spec", [FamilySpec("MuT", 6), FamilySpec("OT", 6)], ids=str)
def test_doubling(spec):
    E = build_EG(spec)
    assert E.order == 2 * spec.order
    closed = enumerate_group(type(E)(E.generators, conductor=E.conductor))
    assert closed.sorted_keys() == E.sorted_keys()
    D = build_Dd(spec)
    assert D.order == 2 * spec.d and contains_all(D, E)
