import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cosetforge.errors import AdditivityViolation, NotExplicitlyAbelian
from cosetforge.functions import GroupFunction, convolve_mean, translate
from cosetforge.groups import (enumerate_subgroups, generated_subgroup, group_by_name, left_cosets,
                               make_cyclic)
from cosetforge.spectral import (algebra_norm, bg_factorize, character, fourier_l1_abelian,
                                 fourier_l1_array, linf_norm, singular_values, split)

from conftest import SMALL_GROUPS
from oracles import character_sum_l1, trace_norm

seeds = st.integers(0, 2**32 - 1)
ABELIAN = ("Z12", "Z2xZ4", "Z2^3", "Z16", "Z3xZ5")


def rand(G, seed, salt=0):
    return GroupFunction.random(G, np.random.default_rng([seed, salt]))


# -- examples ----------------------------------------------------------------

def test_zero_has_zero_norm():
    assert algebra_norm(GroupFunction.zeros(group_by_name("S3"))) == 0.0


@pytest.mark.parametrize("name", SMALL_GROUPS)
def test_coset_indicators_have_norm_one(name):
    G = group_by_name(name)
    for H in enumerate_subgroups(G):
        for W in left_cosets(G, H):
            assert abs(algebra_norm(GroupFunction.indicator(G, W.members)) - 1) <= 1e-9


def test_pair_on_z5_matches_dft():
    G = make_cyclic(5)
    f = GroupFunction.indicator(G, [0, 1])
    expected = character_sum_l1([1, 1, 0, 0, 0], (5,))
    assert algebra_norm(f) == pytest.approx(expected, abs=1e-12)
    assert fourier_l1_abelian(f) == pytest.approx(expected, abs=1e-12)


def test_character_and_singleton_have_norm_one():
    G = group_by_name("Z3xZ5")
    chi = character(G, (1, 2))
    assert fourier_l1_abelian(chi) == pytest.approx(1.0)
    assert algebra_norm(chi) == pytest.approx(1.0)
    for a in range(G.order):
        assert fourier_l1_abelian(GroupFunction.dirac(G, a)) == pytest.approx(1.0)


def test_dft_oracle_refuses_groups_without_factors():
    with pytest.raises(NotExplicitlyAbelian):
        fourier_l1_abelian(GroupFunction.dirac(group_by_name("D6"), 0))


def test_split_extremes():
    G = group_by_name("D6")
    f = rand(G, 7)
    whole = enumerate_subgroups(G)[-1]
    res = split(f, whole)
    mean = f.as_complex().mean()
    assert np.allclose(res.projection.as_complex(), mean)
    assert np.allclose(res.remainder.as_complex(), f.as_complex() - mean)
    res = split(f, enumerate_subgroups(G)[0])
    assert res.projection.allclose(f)
    assert np.allclose(res.remainder.as_complex(), 0)
    assert res.remainder_norm == pytest.approx(0, abs=1e-12)


def test_split_on_s3_depends_on_normality():
    # additivity holds for the normal subgroups and fails for the order-2 ones
    G = group_by_name("S3")
    rng = np.random.default_rng(3)
    for H in enumerate_subgroups(G):
        for _ in range(5):
            f = GroupFunction.random(G, rng)
            if H.is_normal:
                assert split(f, H).additivity_error <= 1e-8
            else:
                with pytest.raises(AdditivityViolation):
                    split(f, H)
                res = split(f, H, certify=False)
                assert res.norm <= res.projection_norm + res.remainder_norm + 1e-9


def test_bg_factorization_of_constant_one():
    G = group_by_name("S3")
    fac = bg_factorize(GroupFunction.constant(G, 1))
    assert fac.size == 1 and fac.constant == pytest.approx(1.0)
    assert np.allclose(fac.reconstruct(), 1.0)


def test_bg_factorization_of_unit():
    G = group_by_name("D6")
    fac = bg_factorize(GroupFunction.dirac(G, 0) * G.order)
    assert fac.size == G.order
    assert np.allclose(fac.weights, 1.0 / G.order)
    assert np.allclose(fac.singular_values, 1.0)


@pytest.mark.parametrize("bits", list(itertools.product((0, 1), repeat=4))[1:])
def test_bg_factorization_boolean_klein(bits):
    G = group_by_name("Z2xZ2")
    f = GroupFunction(G, list(bits))
    fac = bg_factorize(f)
    assert np.abs(fac.reconstruct() - f.as_complex()).max() < 1e-8
    assert fac.constant == pytest.approx(algebra_norm(f))
    n = G.order
    assert np.allclose(np.sum(np.abs(fac.h) ** 2, axis=1) / n, 1.0)
    assert np.allclose(np.sum(np.abs(fac.g) ** 2, axis=1) / n, 1.0)


@given(name=st.sampled_from(SMALL_GROUPS), seed=seeds)
def test_bg_matrix_coefficients(name, seed):
    G = group_by_name(name)
    f = rand(G, seed)
    fac = bg_factorize(f)
    assert np.allclose(fac.reconstruct(), f.as_complex(), atol=1e-9)
    assert np.linalg.norm(fac.v) * np.linalg.norm(fac.w) == pytest.approx(algebra_norm(f))
    for x in range(G.order):
        direct = np.vdot(fac.w, fac.representation(x) @ fac.v)
        assert fac.matrix_coefficient(x) == pytest.approx(direct, abs=1e-9)
        assert fac.matrix_coefficient(x) == pytest.approx(f.as_complex()[x], abs=1e-9)


# -- oracle equivalence and Banach algebra properties ------------------------

@given(name=st.sampled_from(SMALL_GROUPS), seed=seeds)
def test_trace_norm_matches_loop_oracle(name, seed):
    G = group_by_name(name)
    f = rand(G, seed)
    ref = trace_norm(G.table.tolist(), G.inverses.tolist(), f.as_complex())
    assert algebra_norm(f) == pytest.approx(ref, abs=1e-9)


@given(name=st.sampled_from(ABELIAN), seed=seeds)
def test_abelian_oracles_agree(name, seed):
    G = group_by_name(name)
    f = rand(G, seed)
    assert abs(algebra_norm(f) - fourier_l1_abelian(f)) <= 1e-8
    assert fourier_l1_array(f.as_complex(), G.factors) == pytest.approx(fourier_l1_abelian(f))


def test_fft_matches_explicit_characters():
    G = group_by_name("Z2xZ4")
    f = rand(G, 11)
    assert fourier_l1_abelian(f) == pytest.approx(character_sum_l1(f.as_complex(), G.factors))


@given(name=st.sampled_from(SMALL_GROUPS), seed=seeds)
def test_banach_algebra_properties(name, seed):
    G = group_by_name(name)
    rng = np.random.default_rng(seed)
    f, g = GroupFunction.random(G, rng), GroupFunction.random(G, rng)
    nf, ng = algebra_norm(f), algebra_norm(g)
    c = complex(rng.standard_normal(), rng.standard_normal())
    y = int(rng.integers(G.order))
    assert algebra_norm(convolve_mean(f, g)) <= nf * ng + 1e-8
    assert linf_norm(f) <= nf + 1e-9
    assert algebra_norm(f + g) <= nf + ng + 1e-8
    assert algebra_norm(f * c) == pytest.approx(abs(c) * nf, rel=1e-9)
    assert abs(algebra_norm(translate(f, y)) - nf) <= 1e-9


@given(name=st.sampled_from(SMALL_GROUPS), seed=seeds)
def test_split_additive_on_normal_subgroups(name, seed):
    G = group_by_name(name)
    f = rand(G, seed)
    for H in enumerate_subgroups(G):
        res = split(f, H, certify=False)
        if H.is_normal:
            assert res.additivity_error <= 1e-8
        assert res.norm <= res.projection_norm + res.remainder_norm + 1e-8


def test_subgroup_average_is_a_projection():
    # g -> g * m_H is an orthogonal projection of rank [G:H]
    G = group_by_name("D6")
    H = generated_subgroup(G, [1])
    m_H = GroupFunction.indicator(G, H.elements).to_float() * (G.order / H.order)
    s = singular_values(m_H)
    assert np.allclose(s[s > 1e-9], 1.0)
    assert algebra_norm(m_H) == pytest.approx(H.index)
