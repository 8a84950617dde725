from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cosetforge.errors import AmbiguousEpsilon, GroupMismatch, NotAlmostInteger
from cosetforge.functions import (EXACT, FLOAT, GroupFunction, convolve_count, convolve_mean,
                                  convolve_measure, function_from_dict, function_to_dict,
                                  inner, inner_fm, inner_mf, load_function, lp_norm,
                                  project_to_subgroup, round_almost_integer, save_function,
                                  support, tilde, tilde_measure, translate, uniform_measure,
                                  MeasureOnG)
from cosetforge.groups import enumerate_subgroups, group_by_name, make_cyclic

from conftest import SMALL_GROUPS
from oracles import brute_conv_count

groups = st.sampled_from(SMALL_GROUPS)
seeds = st.integers(0, 2**32 - 1)


def rand(G, seed, salt=0):
    return GroupFunction.random(G, np.random.default_rng([seed, salt]))


# -- examples ----------------------------------------------------------------

def test_mean_convolution_examples():
    G = make_cyclic(4)
    one = GroupFunction.constant(G, 1, EXACT)
    assert convolve_mean(one, one).equals(one)
    g = GroupFunction(G, [3, -1, 2, 5], EXACT)
    unit = GroupFunction.dirac(G, 0) * 4
    assert convolve_mean(unit, g).equals(g)
    out = convolve_mean(GroupFunction.indicator(G, [0, 1]), GroupFunction.indicator(G, [0]))
    assert list(out.values) == [Fraction(1, 4), Fraction(1, 4), 0, 0]


def test_count_convolution_examples():
    G = make_cyclic(5)
    out = convolve_count(GroupFunction.indicator(G, [0, 1]), GroupFunction.indicator(G, [0, 1]))
    assert out.integer_values() == [1, 2, 1, 0, 0]
    S3 = group_by_name("S3")
    for H in enumerate_subgroups(S3):
        ind = GroupFunction.indicator(S3, H.elements)
        assert convolve_count(ind, ind).equals(ind * H.order)
    for a in range(6):
        for b in range(6):
            got = convolve_count(GroupFunction.dirac(S3, a), GroupFunction.dirac(S3, b))
            assert got.equals(GroupFunction.dirac(S3, S3.mul(a, b)))


def test_translate_and_tilde_examples():
    G = make_cyclic(6)
    assert translate(GroupFunction.dirac(G, 2), 1).equals(GroupFunction.dirac(G, 1))
    f = rand(G, 1)
    assert translate(f, G.identity).allclose(f)
    assert tilde(tilde(f)).allclose(f)


def test_norm_and_inner_examples():
    G = group_by_name("D6")
    one = GroupFunction.constant(G, 1)
    for p in (1, 2, 3.5, np.inf):
        assert lp_norm(one, p, "mean") == pytest.approx(1.0)
    f = rand(G, 2)
    assert inner(f, f, "count") == pytest.approx(np.sum(np.abs(f.values) ** 2))
    assert lp_norm(GroupFunction.indicator(G, [0, 1]), 2, [0, 1, 2, 3]) == pytest.approx(np.sqrt(0.5))
    assert support(GroupFunction(G, [0] * 11 + [1], EXACT)) == {11}


def test_round_almost_integer_examples():
    G = make_cyclic(3)
    f = GroupFunction(G, [4, -2, 0], EXACT)
    assert round_almost_integer(f, 1e-9).equals(f)
    out = round_almost_integer(GroupFunction(G, [0.9, 2.05, -1.02]), 0.1)
    assert out.integer_values() == [1, 2, -1] and out.mode == EXACT
    with pytest.raises(NotAlmostInteger) as info:
        round_almost_integer(GroupFunction(make_cyclic(2), [0.4, 1.0]), 0.1)
    assert info.value.details["element"] == 0
    with pytest.raises(AmbiguousEpsilon):
        round_almost_integer(f, 0.5)


def test_group_mismatch():
    with pytest.raises(GroupMismatch):
        convolve_mean(rand(make_cyclic(6), 0), rand(group_by_name("S3"), 0))


def test_json_roundtrip(tmp_path):
    G = group_by_name("S3")
    for f in (rand(G, 3), GroupFunction(G, [Fraction(1, 3), 2, -1, 0, 5, Fraction(-7, 2)], EXACT)):
        path = tmp_path / "f.json"
        save_function(f, path)
        g = load_function(path)
        assert g.mode == f.mode and g.group == G
        assert g.equals(f) if f.mode == EXACT else np.array_equal(g.values, f.values)
    assert function_to_dict(rand(G, 0))["group"] == "S3"


def test_function_record_value_count():
    with pytest.raises(Exception) as info:
        function_from_dict({"group": "Z3", "mode": "float", "values": [1, 2]})
    assert getattr(info.value, "exit_code", None) == 72


# -- oracles and properties --------------------------------------------------

@given(name=groups, seed=seeds)
def test_count_convolution_matches_brute_force(name, seed):
    G = group_by_name(name)
    rng = np.random.default_rng(seed)
    f = rng.integers(-3, 4, G.order).tolist()
    g = rng.integers(-3, 4, G.order).tolist()
    got = convolve_count(GroupFunction(G, f, EXACT), GroupFunction(G, g, EXACT))
    assert got.integer_values() == brute_conv_count(G.table.tolist(), G.inverses.tolist(), f, g)


@given(name=groups, seed=seeds)
def test_convolution_associative_and_bilinear(name, seed):
    G = group_by_name(name)
    f, g, h = rand(G, seed, 0), rand(G, seed, 1), rand(G, seed, 2)
    c = complex(*np.random.default_rng(seed).standard_normal(2))
    lhs = convolve_mean(convolve_mean(f, g), h)
    assert lhs.allclose(convolve_mean(f, convolve_mean(g, h)))
    assert convolve_mean(f * c + g, h).allclose(convolve_mean(f, h) * c + convolve_mean(g, h))
    if G.is_abelian:
        assert convolve_mean(f, g).allclose(convolve_mean(g, f))


@given(name=groups, seed=seeds, a=st.integers(0, 11), b=st.integers(0, 11))
def test_translation_is_an_action(name, seed, a, b):
    # rho_a rho_b = rho_{ab}: translate by b first, then by a
    G = group_by_name(name)
    a, b = a % G.order, b % G.order
    f = rand(G, seed)
    assert translate(translate(f, b), a).allclose(translate(f, G.mul(a, b)))


@given(name=groups, seed=seeds)
def test_tilde_reverses_convolution(name, seed):
    G = group_by_name(name)
    f, g = rand(G, seed, 0), rand(G, seed, 1)
    assert tilde(convolve_mean(f, g)).allclose(convolve_mean(tilde(g), tilde(f)))


@given(name=groups, seed=seeds)
def test_adjointness(name, seed):
    # <f * mu, nu> = <f, nu * tilde(mu)> for complex measures
    G = group_by_name(name)
    rng = np.random.default_rng(seed)
    f = rand(G, seed)
    mu = MeasureOnG(G, rng.standard_normal(G.order) + 1j * rng.standard_normal(G.order))
    nu = MeasureOnG(G, rng.standard_normal(G.order) + 1j * rng.standard_normal(G.order))
    lhs = inner_fm(convolve_measure(f, mu), nu)
    nu_f = GroupFunction(G, nu.weights)
    rhs = inner_fm(f, MeasureOnG(G, convolve_measure(nu_f, tilde_measure(mu)).values))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
    assert inner_mf(nu, f) == pytest.approx(np.conj(inner_fm(f, nu)))


@given(name=groups, seed=seeds)
def test_projection_constant_on_left_cosets(name, seed):
    G = group_by_name(name)
    vals = np.random.default_rng(seed).integers(-5, 6, G.order).tolist()
    f = GroupFunction(G, vals, EXACT)
    for H in enumerate_subgroups(G):
        proj = project_to_subgroup(f, H)
        for x in range(G.order):
            assert proj.values[x] == proj.values[H.coset_labels[x]]
        # same as convolving with m_H
        assert proj.equals(convolve_measure(f, uniform_measure(G, H.elements, exact=True)))


@given(seed=seeds)
def test_exact_and_float_modes_agree(seed):
    G = group_by_name("D6")
    vals = np.random.default_rng(seed).integers(-4, 5, (2, G.order))
    fe, ge = GroupFunction(G, vals[0], EXACT), GroupFunction(G, vals[1], EXACT)
    out = convolve_mean(fe, ge)
    assert out.mode == EXACT
    assert out.to_float().allclose(convolve_mean(fe.to_float(), ge.to_float()))
    assert convolve_mean(fe, ge.to_float()).mode == FLOAT
