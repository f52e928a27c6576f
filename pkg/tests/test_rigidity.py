import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from srgroups.rigidity import (
    KIND_ABC,
    KIND_D,
    DihedralIrrep,
    all_constituents_rigid,
    always_rigid,
    boundary_anomalies,
    central_multiset,
    dimension_check,
    expected_non_rigid,
    forbidden_indices,
    irreps,
    not_always_rigid,
    phi,
    restrict_to_centre,
)

EVEN = range(2, 241, 2)


def rotation_character(rep, d, k):
    """Trace of rotation by 2 pi k/d in an explicit model of rep."""
    if rep.label in ("Triv", "Sgn"):
        return 1
    if rep.label in ("V1", "V2"):
        return (-1) ** k
    return 2 * np.cos(2 * np.pi * rep.i * k / d)


@pytest.mark.parametrize("d", [2, 4, 6, 12, 30, 48])
def test_restriction_matches_characters(d):
    # the multiset of central characters reproduces the rotation trace
    for rep in irreps(d):
        for k in range(d):
            from_restriction = sum(cmath.exp(2j * cmath.pi * l * k / d) for l in restrict_to_centre(rep))
            assert abs(from_restriction - rotation_character(rep, d, k)) < 1e-9


def test_label_and_restriction_rules_agree():
    # the only disagreement up to d = 240 is the degenerate dihedral group of order 4
    bad = boundary_anomalies(EVEN)
    assert {(v.rep.d, v.kind, str(v.rep)) for v in bad} == {(2, KIND_D, "V1"), (2, KIND_D, "V2")}


@given(st.sampled_from(list(range(4, 241, 2))), st.sampled_from([KIND_ABC, KIND_D]))
def test_exceptions_written_out(d, kind):
    assert not_always_rigid(d, kind) == expected_non_rigid(d, kind)


@given(st.sampled_from(list(EVEN)))
def test_dimension_count(d):
    assert dimension_check(d)
    assert len(irreps(d)) == d // 2 + 3


def test_forbidden_sets():
    assert forbidden_indices(KIND_ABC, 12) == {0, 1, 5, 6, 7, 11}
    assert forbidden_indices(KIND_D, 12) == {0, 1, 11}
    assert all_constituents_rigid((2, 10), KIND_ABC, 12)
    assert not all_constituents_rigid((5, 7), KIND_ABC, 12)


def test_validation():
    with pytest.raises(ValueError):
        DihedralIrrep("Phi", 6, 3)
    with pytest.raises(ValueError):
        DihedralIrrep("Triv", 5)
    with pytest.raises(ValueError):
        DihedralIrrep("W", 6)
    with pytest.raises(ValueError):
        always_rigid(phi(2, 12), "X")


def test_central_multiset():
    assert central_multiset(phi(3, 12)) == {3: 1, 9: 1}
    assert str(phi(3, 12)) == "Phi(3)"
