import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cosetforge.errors import (InputError, InvalidTable, MissingInverse, NoIdentity, NonAssociative,
                               NonBijectiveColumn, NonBijectiveRow, SizeLimitExceeded)
from cosetforge.groups import (coset_members, coset_of, enumerate_subgroups, generated_subgroup,
                               group_by_name, group_from_dict, group_to_dict, left_cosets,
                               load_group, make_boolean_cube, make_cyclic, make_dihedral,
                               make_product, make_symmetric, save_group, validate_group)

from conftest import SMALL_GROUPS
from oracles import brute_subgroups, element_order_census, symmetric_table


# -- validation --------------------------------------------------------------

def test_validate_z2():
    G = validate_group([[0, 1], [1, 0]])
    assert G.order == 2 and G.identity == 0


def test_validate_constant_rows():
    with pytest.raises(NonBijectiveRow):
        validate_group([[0, 0], [0, 0]])


def test_validate_s3_from_permutations():
    table, _ = symmetric_table(3)
    G = validate_group(table, name="S3")
    assert G.order == 6
    assert np.array_equal(G.table, make_symmetric(3).table)


def test_validate_error_kinds():
    with pytest.raises(NonBijectiveColumn):
        validate_group([[0, 1], [0, 1]])
    # x*y = -x-y mod 3 is a Latin square with no identity
    with pytest.raises(NoIdentity):
        validate_group([[0, 2, 1], [2, 1, 0], [1, 0, 2]])
    with pytest.raises(InvalidTable):
        validate_group([[0, 1, 2]])
    with pytest.raises(InvalidTable):
        validate_group([[0, 5], [5, 0]])


def test_validate_non_associative_latin_square():
    # Latin square with identity 0 that is not a group (order 5 loop)
    table = [[0, 1, 2, 3, 4],
             [1, 0, 3, 4, 2],
             [2, 4, 0, 1, 3],
             [3, 2, 4, 0, 1],
             [4, 3, 1, 2, 0]]
    with pytest.raises(NonAssociative) as info:
        validate_group(table)
    a, b, c = info.value.details["witness"]
    assert table[table[a][b]][c] != table[a][table[b][c]]


def test_missing_inverse_is_invalid_table():
    assert issubclass(MissingInverse, InvalidTable)


# -- constructors ------------------------------------------------------------

def test_cyclic_inverses():
    G = make_cyclic(4)
    assert G.order == 4
    assert G.inverses.tolist() == [0, 3, 2, 1]


def test_klein_four():
    V = make_product(make_cyclic(2), make_cyclic(2))
    assert V.order == 4
    assert all(V.power(a, 2) == V.identity for a in range(V.order))


def test_d3_and_s3_have_the_same_order_census():
    d3, s3 = make_dihedral(3), make_symmetric(3)
    census = element_order_census(d3.table.tolist())
    assert census == element_order_census(s3.table.tolist()) == [1, 2, 2, 2, 3, 3]


@pytest.mark.parametrize("name", SMALL_GROUPS + ("S4", "Z2^4", "Z3xZ5", "D4"))
def test_named_groups_are_groups(name):
    G = group_by_name(name)
    H = validate_group(G.table, check_associativity=True)
    assert H.identity == G.identity
    assert np.array_equal(H.inverses, G.inverses)


def test_dihedral_order():
    assert make_dihedral(6).order == 12
    assert not make_dihedral(6).is_abelian


def test_cube_is_elementary_abelian():
    G = make_boolean_cube(3)
    assert G.order == 8 and G.factors == (2, 2, 2)
    assert all(G.mul(a, a) == 0 for a in range(G.order))


def test_size_limits():
    with pytest.raises(SizeLimitExceeded):
        make_symmetric(7)
    with pytest.raises(InputError):
        group_by_name("Q8")


# -- subgroups and cosets ----------------------------------------------------

def test_generated_subgroup_examples():
    assert generated_subgroup(make_cyclic(6), [2]).elements == (0, 2, 4)
    assert generated_subgroup(make_cyclic(5), [3]).order == 5
    S3 = make_symmetric(3)
    transposition = next(a for a in range(S3.order) if S3.element_order(a) == 2)
    three_cycle = next(a for a in range(S3.order) if S3.element_order(a) == 3)
    assert generated_subgroup(S3, [transposition, three_cycle]).order == 6


@pytest.mark.parametrize("name,count", [("Z4", 3), ("Z2xZ2", 5), ("S3", 6)])
def test_subgroup_counts(name, count):
    assert len(enumerate_subgroups(group_by_name(name))) == count


@pytest.mark.parametrize("name", SMALL_GROUPS + ("D4",))
def test_enumeration_matches_brute_force(name):
    G = group_by_name(name)
    ours = {frozenset(H.elements) for H in enumerate_subgroups(G)}
    assert ours == set(brute_subgroups(G.table.tolist(), G.identity))


def test_cosets_examples():
    G = make_cyclic(6)
    H = generated_subgroup(G, [3])
    assert [coset_members(W) for W in left_cosets(G, H)] == [[0, 3], [1, 4], [2, 5]]
    whole = generated_subgroup(G, [1])
    assert [coset_members(W) for W in left_cosets(G, whole)] == [list(range(6))]


def test_s3_order_two_cosets():
    S3 = make_symmetric(3)
    H = next(H for H in enumerate_subgroups(S3) if H.order == 2)
    cosets = left_cosets(S3, H)
    assert len(cosets) == 3 and all(len(W) == 2 for W in cosets)
    members = [set(W.members) for W in cosets]
    assert set().union(*members) == set(range(6))
    # direct multiplication x*h
    for W in cosets:
        assert set(W.members) == {S3.mul(W.representative, h) for h in H.elements}


@pytest.mark.parametrize("name", SMALL_GROUPS)
def test_lagrange_and_partition(name):
    G = group_by_name(name)
    subs = enumerate_subgroups(G)
    assert subs[0].order == 1 and subs[-1].order == G.order
    for H in subs:
        assert G.order % H.order == 0
        seen = np.zeros(G.order, dtype=int)
        for W in left_cosets(G, H):
            assert len(W.members) == H.order
            seen[list(W.members)] += 1
        assert (seen == 1).all()


@pytest.mark.parametrize("name", SMALL_GROUPS)
def test_normality_matches_left_right_cosets(name):
    G = group_by_name(name)
    for H in enumerate_subgroups(G):
        same = all({G.mul(x, h) for h in H.elements} == {G.mul(h, x) for h in H.elements}
                   for x in range(G.order))
        assert H.is_normal == same


@given(name=st.sampled_from(SMALL_GROUPS), seed=st.integers(0, 2**32 - 1))
def test_generated_subgroup_in_list_and_idempotent(name, seed):
    G = group_by_name(name)
    rng = np.random.default_rng(seed)
    gens = rng.choice(G.order, size=int(rng.integers(0, 3)), replace=False).tolist()
    H = generated_subgroup(G, gens)
    assert H.elements in {K.elements for K in enumerate_subgroups(G)}
    assert generated_subgroup(G, H.elements).elements == H.elements


@given(name=st.sampled_from(("Z12", "Z2xZ4", "Z2^3")), x=st.integers(0, 7))
def test_abelian_left_and_right_cosets_agree(name, x):
    G = group_by_name(name)
    assert np.array_equal(G.table, G.table.T)
    for H in enumerate_subgroups(G):
        W = coset_of(G, H, x)
        assert set(W.members) == {G.mul(h, x) for h in H.elements}


# -- serialization -----------------------------------------------------------

def test_group_json_roundtrip(tmp_path):
    for name in ("Z3xZ5", "S3"):
        G = group_by_name(name)
        path = tmp_path / f"{name}.json"
        save_group(G, path)
        H = load_group(path)
        assert H == G and H.factors == G.factors
        assert group_from_dict(json.loads(path.read_text())) == G
    assert group_to_dict(make_cyclic(3))["factors"] == [3]


def test_group_record_with_wrong_order():
    data = group_to_dict(make_cyclic(3))
    data["order"] = 4
    with pytest.raises(InvalidTable):
        group_from_dict(data)
