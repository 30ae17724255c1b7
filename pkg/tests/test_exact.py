from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rmatch.constructions import (Family, extremal_family, lift_family, make_Hk, make_Hk_star,
                                  random_family, random_hypergraph, script_H)
from rmatch.core import Hypergraph, InputError, MatchStatus, check_matching, dominance_closure
from rmatch.exact import (Inconclusive, StabilityVerdict, Status, check_stability_lemma,
                          enumerate_max_matching, has_perfect_matching, max_matching, nu,
                          rainbow_equiv_check, rainbow_matching, rainbow_subroutine_LYY)

from conftest import hypergraphs
from oracles import has_pm_brute, nu_brute, rainbow_brute


class TestMaxMatching:
    def test_examples(self):
        r = max_matching(make_Hk(9, 2, 3))
        assert r.found and r.size == 2
        assert check_matching(make_Hk(9, 2, 3), r.witness)[0] is MatchStatus.MATCHING
        assert nu(Hypergraph(6, 3, frozenset())) == 0
        disjoint = Hypergraph.from_edges(9, 3, [(1, 2, 3), (4, 5, 6), (7, 8, 9)])
        assert nu(disjoint) == 3

    def test_budget(self):
        H = Hypergraph.complete(12, 3)
        r = max_matching(H, budget=1)
        assert r.status is Status.BUDGET
        assert r.witness is not None
        assert check_matching(H, r.witness)[0] is not MatchStatus.NOT_MATCHING
        with pytest.raises(InputError):
            max_matching(H, budget=0)

    @given(hypergraphs(max_n=8, ks=(2, 3, 4)))
    def test_against_enumeration(self, H):
        assert nu(H) == enumerate_max_matching(H) == nu_brute(H)

    @given(hypergraphs(max_n=7), st.data())
    def test_monotone_under_insertion(self, H, data):
        import itertools
        missing = [e for e in itertools.combinations(range(1, H.n + 1), H.k)
                   if e not in H.edges]
        if not missing:
            return
        e = data.draw(st.sampled_from(missing))
        assert nu(Hypergraph(H.n, H.k, H.edges | {e})) >= nu(H)

    def test_stable_closure_identity(self):
        H = make_Hk_star(9, 2, 3)
        assert nu(dominance_closure(H)) == nu(H) == 2


class TestPerfectMatching:
    def test_examples(self):
        assert has_perfect_matching(Hypergraph.complete(6, 3)).found
        assert has_perfect_matching(make_Hk(9, 2, 3)).status is Status.NONE
        r = has_perfect_matching(script_H(8, 2, 4))
        assert r.found
        assert Status.FOUND == has_perfect_matching(
            script_H(8, 2, 4).__class__.from_edges(8, 2, 4, [(1, 3, 4, 5, 9), (2, 6, 7, 8, 10)])
        ).status

    def test_divisibility_and_balance(self):
        assert has_perfect_matching(Hypergraph.complete(7, 3)).status is Status.NONE
        r = has_perfect_matching(script_H(10, 2, 3))
        assert r.status is Status.NONE and r.info["reason"] == "unbalanced"

    @given(hypergraphs(max_n=8, ks=(2, 3, 4)))
    def test_against_brute(self, H):
        assert has_perfect_matching(H).found == has_pm_brute(H)

    def test_witness_is_perfect(self):
        H = random_hypergraph(9, 3, Fraction(1, 2), 11)
        r = has_perfect_matching(H)
        if r.found:
            assert check_matching(H, r.witness)[0] is MatchStatus.PERFECT


class TestRainbow:
    def test_examples(self):
        F = Family(4, 4, (Hypergraph.from_edges(4, 4, [(1, 2, 3, 4)]),))
        r = rainbow_matching(F)
        assert r.found and r.witness == {0: (1, 2, 3, 4)}
        assert rainbow_matching(extremal_family(9, 3)).status is Status.NONE
        K = Hypergraph.complete(8, 4)
        assert rainbow_matching(Family(8, 4, (K, K))).found

    def test_too_many_colours(self):
        K = Hypergraph.complete(5, 3)
        with pytest.raises(InputError):
            rainbow_matching(Family(5, 3, (K, K)))

    def test_equivalence_examples(self):
        assert rainbow_equiv_check(extremal_family(9, 3))
        F = Family(4, 4, (Hypergraph.complete(4, 4),))
        assert rainbow_equiv_check(F)
        with pytest.raises(InputError):
            rainbow_equiv_check(Family(8, 4, (Hypergraph.complete(8, 4),)))

    def test_inconclusive(self):
        F = Family(12, 3, (Hypergraph.complete(12, 3),) * 4)
        with pytest.raises(Inconclusive):
            rainbow_equiv_check(F, budget=2)

    @given(st.integers(0, 10 ** 6), st.sampled_from([(4, 2), (6, 2), (6, 3), (8, 2), (9, 3)]),
           st.sampled_from([0.2, 0.35, 0.5]))
    @settings(max_examples=40)
    def test_rainbow_against_brute_and_lift(self, seed, shape, p):
        n, k = shape
        F = random_family(n, k, n // k, p, seed)
        r = rainbow_matching(F)
        assert r.found == rainbow_brute(F)
        assert r.found == has_perfect_matching(lift_family(F)).found
        if r.found:
            used = [v for e in r.witness.values() for v in e]
            assert len(used) == len(set(used))
            assert all(e in F.graphs[i].edges for i, e in r.witness.items())


class TestLYY:
    def test_single_colour(self):
        G = Family(6, 3, (make_Hk(6, 2, 3),))
        r = rainbow_subroutine_LYY(G, 1)
        assert r.found and r.info["hypothesis"]

    def test_hypothesis_instance(self):
        import math
        n, k, t = 12, 3, 2
        bound = math.comb(n - 1, k - 1) - math.comb(n - t, k - 1)
        G = Family(n, k, (make_Hk_star(n, 3, k),) * 2)
        assert min(len(G.graphs[0].incident(v)) for v in range(1, 13)) > bound
        r = rainbow_subroutine_LYY(G, t)
        assert r.found and r.info["hypothesis"] and not r.info["size_condition"]

    def test_violating_instance_warns(self):
        with pytest.warns(RuntimeWarning):
            r = rainbow_subroutine_LYY(extremal_family(9, 3), 3)
        assert r.status is Status.NONE and not r.info["hypothesis"]


class TestStabilityLemma:
    def test_star_graph_implied(self):
        verdict, rep = check_stability_lemma(make_Hk_star(12, 2, 3), Fraction(1, 2))
        assert rep["nu"] == 2
        assert verdict is StabilityVerdict.IMPLIED

    def test_vacuous_by_edges(self):
        verdict, _ = check_stability_lemma(make_Hk_star(12, 2, 3), Fraction(1, 100))
        assert verdict is StabilityVerdict.VACUOUS

    def test_vacuous_by_nu(self):
        verdict, _ = check_stability_lemma(Hypergraph.complete(8, 3), Fraction(1, 2))
        assert verdict is StabilityVerdict.VACUOUS

    def test_non_stable_rejected(self):
        with pytest.raises(InputError):
            check_stability_lemma(make_Hk(12, 3, 3), Fraction(1, 2))
