import math
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from rmatch.constructions import (Family, ParameterRangeWarning, ThresholdSpec, extremal_family,
                                  lift_family, main_threshold, make_Hk, make_Hk_star, project,
                                  random_almost_regular, random_family, random_hypergraph,
                                  random_partite, sample_threshold_family, script_H,
                                  verify_threshold)
from rmatch.core import Hypergraph, InputError, degree, min_degree
from rmatch.exact import nu

from oracles import binom_count_hk


def test_hk_counts():
    assert make_Hk(6, 2, 3).e == 16
    assert make_Hk(4, 1, 3).edges == {(1, 2, 3), (1, 2, 4), (1, 3, 4)}
    assert make_Hk_star(6, 2, 3).e == 16
    assert make_Hk_star(5, 4, 3).e == 10


def test_hk_inside_star():
    for n, m, k in [(8, 2, 4), (9, 3, 3), (10, 5, 2)]:
        assert make_Hk(n, m, k).edges <= make_Hk_star(n, m, k).edges


def test_range_checks():
    with pytest.raises(InputError):
        make_Hk(6, 6, 3)
    with pytest.raises(InputError):
        make_Hk_star(6, 0, 3)
    with warnings.catch_warnings():
        warnings.simplefilter("error", ParameterRangeWarning)
        with pytest.raises(ParameterRangeWarning):
            make_Hk(9, 4, 3)
        make_Hk(9, 3, 3)


@pytest.mark.parametrize("n,m,k", [(n, m, k) for k in (2, 3, 4) for n in range(k + 1, 11)
                                   for m in range(1, n // 2 + 1)])
def test_degree_formula(n, m, k):
    formula = math.comb(n - 1, k - 1) - math.comb(n - 1 - m, k - 1)
    assert min_degree(make_Hk(n, m, k), 1) == formula
    assert min_degree(make_Hk_star(n, m, k), 1) == formula
    assert make_Hk(n, m, k).e == binom_count_hk(n, m, k)


@pytest.mark.parametrize("n,m,k", [(6, 2, 3), (8, 2, 4), (9, 2, 3), (12, 3, 4), (12, 2, 3),
                                   (10, 3, 2), (12, 4, 3)])
def test_nu_of_hk(n, m, k):
    assert nu(make_Hk(n, m, k)) == min(m, n // k)


def test_lift_examples():
    F = Family(4, 4, (Hypergraph.from_edges(4, 4, [(1, 2, 3, 4)]),))
    assert lift_family(F).edges == {(1, 2, 3, 4, 5)}
    G = make_Hk(9, 2, 3)
    H = lift_family(Family(9, 3, (G,) * 3))
    assert H.e == 3 * G.e and H.balanced


@given(st.integers(0, 10 ** 6), st.sampled_from([(6, 2), (6, 3), (8, 4), (9, 3)]))
@settings(max_examples=25)
def test_lift_then_project(seed, shape):
    n, k = shape
    F = random_family(n, k, n // k, 0.4, seed)
    H = lift_family(F)
    assert H.e == sum(G.e for G in F.graphs)
    for i, G in enumerate(F.graphs, start=1):
        assert project(H, i).edges == G.edges


def test_script_H_examples():
    H = script_H(8, 2, 4)
    assert H.X == (9, 10)
    core = make_Hk(8, 2, 4).edges
    assert all(e[:-1] in core and e[-1] in (9, 10) for e in H.edges)
    assert script_H(12, 3, 4).balanced
    assert script_H(6, 2, 3).e == 32


def test_extremal_family():
    F = extremal_family(9, 3)
    assert F.t == 3 and all(G.edges == make_Hk(9, 2, 3).edges for G in F.graphs)
    assert nu(F.graphs[0]) == 2
    assert all(min_degree(G, 1) == 13 for G in F.graphs)
    with pytest.raises(InputError):
        extremal_family(10, 3)
    with pytest.raises(InputError):
        extremal_family(4, 4)


def test_threshold_spec():
    spec = ThresholdSpec.main(8, 4)
    assert spec.t == 2 and spec.value == 15 == main_threshold(8, 4)
    assert ThresholdSpec.main(12).value == math.comb(11, 3) - math.comb(9, 3)
    with pytest.raises(InputError):
        ThresholdSpec(8, 4, 2, kind="other")


def test_sample_threshold_family():
    spec = ThresholdSpec.main(8, 4)
    F = sample_threshold_family(spec, seed=1)
    assert min(min_degree(G, 1) for G in F.graphs) >= 16
    assert verify_threshold(F, spec)
    G = sample_threshold_family(spec, seed=1)
    assert [g.edges for g in F.graphs] == [g.edges for g in G.graphs]
    H = sample_threshold_family(spec, seed=2)
    assert [g.edges for g in F.graphs] != [g.edges for g in H.graphs]


@given(st.integers(0, 10 ** 6), st.sampled_from([(8, 4), (12, 4), (9, 3), (6, 2)]))
@settings(max_examples=20)
def test_sampled_families_verify(seed, shape):
    n, k = shape
    spec = ThresholdSpec.main(n, k)
    assert verify_threshold(sample_threshold_family(spec, seed=seed), spec)


def test_slack_and_unreachable():
    spec = ThresholdSpec.main(8, 4)
    F = sample_threshold_family(spec, slack="1/2", seed=0)
    assert all(min_degree(G, 1) > 15 + (35 - 15) // 2 for G in F.graphs)
    with pytest.raises(InputError):
        sample_threshold_family(ThresholdSpec(8, 4, 2, value=35), seed=0)
    with pytest.raises(InputError):
        sample_threshold_family(spec, slack=-1)


def test_verify_threshold_examples():
    spec = ThresholdSpec.main(8, 4)
    assert not verify_threshold(extremal_family(8, 4), spec)
    K = Hypergraph.complete(8, 4)
    assert verify_threshold(Family(8, 4, (K, K)), spec)


def test_random_generators_deterministic():
    assert random_hypergraph(7, 3, 0.5, 4).edges == random_hypergraph(7, 3, 0.5, 4).edges
    assert random_partite(6, 2, 3, "1/2", 9).edges == random_partite(6, 2, 3, "1/2", 9).edges
    assert random_partite(6, 2, 3, 0, 9).e == 0


def test_random_almost_regular():
    H = random_almost_regular(600, 3, 20, 2, seed=5, spread=6)
    d = H.degrees
    assert min(d.values()) >= 14 and max(d.values()) <= 20 and len(d) == 600
    pairs = {}
    for e in H.edges:
        for P in ((e[0], e[1]), (e[0], e[2]), (e[1], e[2])):
            pairs[P] = pairs.get(P, 0) + 1
    assert max(pairs.values()) <= 2
    assert degree(H, {1}) == d[1]
