import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rmatch.constructions import make_Hk, make_Hk_star, script_H, complete_partite
from rmatch.core import (ClosenessParams, Hypergraph, InputError, Matching, MatchStatus,
                         PartiteGraph, bad_vertices, check_matching, closeness_search,
                         degree, dominance_closure, dominance_leq, edit_deficiency, induced,
                         is_eps_close, is_independent, is_matching, is_stable, link, min_degree,
                         relabel, remove_vertices, single_step_predecessors)

from conftest import hypergraphs, partite_graphs
from oracles import degree_brute, stable_brute

H36 = make_Hk(6, 2, 3)


class TestHypergraph:
    def test_canonical_edges(self):
        H = Hypergraph.from_edges(5, 3, [(3, 1, 2), [5, 4, 1]])
        assert H.edges == {(1, 2, 3), (1, 4, 5)}

    def test_rejects_bad_edges(self):
        with pytest.raises(InputError):
            Hypergraph(4, 3, frozenset({(1, 2)}))
        with pytest.raises(InputError):
            Hypergraph(4, 3, frozenset({(1, 2, 5)}))
        with pytest.raises(InputError):
            Hypergraph(4, 3, frozenset({(2, 1, 3)}))

    def test_edge_count_bound(self):
        assert Hypergraph.complete(6, 3).e == math.comb(6, 3)

    def test_partite_shape(self):
        H = script_H(8, 2, 4)
        assert H.X == (9, 10) and H.V == tuple(range(1, 9))
        assert all(sum(1 for v in e if v > 8) == 1 for e in H.edges)
        assert H.balanced and not script_H(9, 2, 3).balanced

    def test_partite_rejects_two_colours(self):
        with pytest.raises(InputError):
            PartiteGraph.from_edges(4, 2, 2, [(1, 5, 6)])


class TestDegree:
    def test_examples(self):
        assert degree(H36, {1}) == 10
        assert degree(H36, {3}) == 7
        assert degree(H36, set()) == H36.e

    def test_out_of_range(self):
        with pytest.raises(InputError):
            degree(H36, {7})

    def test_min_degree(self):
        assert min_degree(H36, 1) == 7 == math.comb(5, 2) - math.comb(3, 2)
        assert min_degree(Hypergraph(5, 3, frozenset()), 1) == 0
        assert min_degree(make_Hk(12, 2, 4), 1) == 81
        assert min_degree(H36, 0) == H36.e
        with pytest.raises(InputError):
            min_degree(H36, 4)

    def test_min_pair_degree_counts_missing_pairs(self):
        H = Hypergraph.from_edges(4, 3, [(1, 2, 3)])
        assert min_degree(H, 2) == 0

    @given(hypergraphs())
    def test_matches_brute_force(self, H):
        for T in itertools.chain.from_iterable(
                itertools.combinations(range(1, H.n + 1), r) for r in range(H.k + 1)):
            assert degree(H, T) == degree_brute(H, T)

    @given(hypergraphs())
    def test_handshake(self, H):
        assert sum(degree(H, {v}) for v in H.vertices) == H.k * H.e

    @given(hypergraphs(), st.data())
    def test_monotone(self, H, data):
        T2 = data.draw(st.sets(st.sampled_from(H.vertices), max_size=H.k))
        T1 = data.draw(st.sets(st.sampled_from(sorted(T2)), max_size=len(T2))) if T2 else set()
        assert degree(H, T1) >= degree(H, T2)


class TestMatching:
    def test_examples(self):
        one = Hypergraph.from_edges(3, 3, [(1, 2, 3)])
        assert is_matching(one, Matching.of([(1, 2, 3)])) is MatchStatus.PERFECT
        assert is_matching(one, Matching()) is MatchStatus.MATCHING
        H = make_Hk(9, 2, 3)
        assert is_matching(H, [(1, 3, 4), (2, 5, 6)]) is MatchStatus.MATCHING

    def test_diagnostics(self):
        H = make_Hk(9, 2, 3)
        status, msg = check_matching(H, [(3, 4, 5)])
        assert status is MatchStatus.NOT_MATCHING and "not an edge" in msg
        status, msg = check_matching(H, [(1, 3, 4), (1, 5, 6)])
        assert status is MatchStatus.NOT_MATCHING and "overlaps" in msg


class TestRemoval:
    def test_examples(self):
        assert remove_vertices(H36, set()) is H36
        H = Hypergraph.from_edges(6, 3, [(1, 2, 3), (4, 5, 6)])
        assert remove_vertices(H, {1}).edges == {(4, 5, 6)}
        assert remove_vertices(H36, {1, 2}).e == 0

    def test_ids_are_stable(self):
        G = remove_vertices(H36, {1})
        assert G.n == 6 and 1 not in G.vertices and 6 in G.vertices

    def test_partite_wrapper_survives(self):
        H = script_H(8, 2, 4)
        G = remove_vertices(H, {9})
        assert isinstance(G, PartiteGraph) and G.X == (10,)

    @given(hypergraphs(), st.data())
    def test_edge_set(self, H, data):
        S = data.draw(st.sets(st.sampled_from(H.vertices)))
        G = remove_vertices(H, S)
        assert G.edges == {e for e in H.edges if not S & set(e)}
        assert all(degree(G, {v}) <= degree(H, {v}) for v in G.vertices)

    @given(hypergraphs(), st.data())
    def test_induced(self, H, data):
        S = data.draw(st.sets(st.sampled_from(H.vertices)))
        assert induced(H, S).edges == {e for e in H.edges if set(e) <= S}


class TestIndependence:
    def test_examples(self):
        assert is_independent(H36, {1, 2})
        assert not is_independent(Hypergraph.from_edges(3, 3, [(1, 2, 3)]), {1, 2, 3})
        assert is_independent(H36, {3, 4, 5, 6})


class TestLink:
    def test_link_of_colour(self):
        H = script_H(8, 2, 4)
        L = link(H, [9])
        assert L.k == 4 and L.n == 8 and L.edges == make_Hk(8, 2, 4).edges

    def test_link_of_pair(self):
        L = link(H36, [1, 3])
        assert L.edges == {(v,) for v in (2, 4, 5, 6)}


class TestCloseness:
    def test_deficiency(self):
        H = make_Hk(12, 3, 4)
        assert edit_deficiency(H, H) == 0
        minus = Hypergraph(12, 4, H.edges - {min(H.edges)})
        assert edit_deficiency(H, minus) == 1
        assert edit_deficiency(H36, Hypergraph(6, 3, frozenset())) == 16

    def test_shape_mismatch(self):
        with pytest.raises(InputError):
            edit_deficiency(H36, make_Hk(7, 2, 3))

    def test_reflexive_and_empty(self):
        H = make_Hk(12, 3, 4)
        assert is_eps_close(H, H, Fraction(1, 10 ** 9))
        assert not is_eps_close(H, Hypergraph(12, 4, frozenset()), Fraction(1, 10 ** 6))

    def test_relabel_search_recovers(self):
        moved = relabel(H36, {1: 5, 2: 6, 5: 1, 6: 2})
        p = ClosenessParams(Fraction(1, 100), "fixed-labeling")
        assert not is_eps_close(H36, moved, p)
        res = closeness_search(H36, moved, Fraction(1, 100), "class-preserving-search")
        assert res.close and res.exact
        assert edit_deficiency(H36, relabel(moved, res.mapping)) == 0

    def test_hill_climb_above_limit(self):
        H = make_Hk(11, 2, 3)
        moved = relabel(H, {1: 10, 10: 1})
        res = closeness_search(H, moved, Fraction(1, 10 ** 4), "class-preserving-search", seed=3)
        assert not res.exact
        assert res.close

    def test_params(self):
        with pytest.raises(InputError):
            ClosenessParams(0)
        with pytest.raises(InputError):
            ClosenessParams(Fraction(1, 2), "isomorphism")

    @given(hypergraphs(), st.fractions(min_value=Fraction(1, 10 ** 6), max_value=1))
    def test_reflexive_property(self, H, eps):
        assert is_eps_close(H, H, eps)

    @given(hypergraphs(), st.data())
    def test_zero_deficiency_iff_subset(self, H, data):
        G = Hypergraph(H.n, H.k, frozenset(data.draw(st.sets(st.sampled_from(
            sorted(H.edges)))) if H.edges else set()))
        assert (edit_deficiency(G, H) == 0) == (G.edges <= H.edges)


class TestBadVertices:
    def test_identical(self):
        H = script_H(9, 3, 3)
        assert bad_vertices(H, H, 0) == frozenset()

    def test_empty_vs_complete(self):
        C = complete_partite(9, 3, 3)
        E = PartiteGraph.from_edges(9, 3, 3, [])
        assert bad_vertices(E, C, 0) == frozenset(range(1, 13))

    def test_single_colour_removed(self):
        H2 = script_H(9, 3, 3)
        x1 = 10
        H1 = PartiteGraph.from_edges(9, 3, 3, [e for e in H2.edges if x1 not in e])
        dx = degree(H2, {x1})
        assert dx == make_Hk(9, 3, 3).e
        # just below d(x1)/|V|^3, yet above every V vertex's loss
        alpha = Fraction(dx, 12 ** 3) - Fraction(1, 10 ** 6)
        assert bad_vertices(H1, H2, alpha) == {x1}

    @given(partite_graphs(), partite_graphs())
    def test_alpha_one_is_empty(self, H1, H2):
        if (H1.n, H1.m, H1.k) == (H2.n, H2.m, H2.k):
            assert bad_vertices(H1, H2, 1) == frozenset()

    def test_square_root_test_is_exact(self):
        H2 = script_H(9, 3, 3)
        H1 = PartiteGraph.from_edges(9, 3, 3, [e for e in H2.edges if 10 not in e])
        d = degree(H2, {10})
        # bad iff d > sqrt(alpha) * 12^3  <=>  d^2 > alpha * 12^6
        at = Fraction(d * d, 12 ** 6)
        assert 10 not in bad_vertices(H1, H2, at, root=2)
        assert 10 in bad_vertices(H1, H2, at - Fraction(1, 10 ** 12), root=2)


class TestDominance:
    def test_examples(self):
        assert dominance_leq((1, 2, 3), (1, 2, 3))
        assert dominance_leq((1, 2, 4), (2, 3, 4))
        assert not dominance_leq((1, 5, 6), (2, 3, 9))
        with pytest.raises(InputError):
            dominance_leq((1, 2), (1, 2, 3))

    def test_predecessors(self):
        assert single_step_predecessors((2, 3, 5)) == [(1, 3, 5), (2, 3, 4)]

    def test_stability_examples(self):
        assert is_stable(make_Hk(6, 2, 3))
        assert stable_brute(make_Hk(6, 2, 3))
        assert not is_stable(Hypergraph.from_edges(4, 3, [(2, 3, 4)]))
        assert is_stable(Hypergraph(4, 3, frozenset()))

    @pytest.mark.parametrize("n,m,k", [(6, 2, 3), (8, 2, 4), (9, 3, 3), (7, 1, 2), (8, 4, 2)])
    def test_constructions_stability(self, n, m, k):
        assert is_stable(make_Hk_star(n, m, k))
        # H_k(n,m) omits the k-sets inside [m], which are dominated by edges once m >= k
        assert is_stable(make_Hk(n, m, k)) == (m < k) == stable_brute(make_Hk(n, m, k))

    def test_exhaustive_small(self):
        # every 3-graph on 5 vertices with at most 3 edges, plus all closures
        sets = list(itertools.combinations(range(1, 6), 3))
        for r in range(4):
            for E in itertools.combinations(sets, r):
                H = Hypergraph.from_edges(5, 3, E)
                assert is_stable(H) == stable_brute(H)
                assert is_stable(dominance_closure(H))

    @given(hypergraphs(max_n=6))
    def test_single_step_equals_closure(self, H):
        assert is_stable(H) == (dominance_closure(H).edges == H.edges) == stable_brute(H)
