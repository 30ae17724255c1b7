"""Exact matching oracles.

All searches run on vertex bitmasks, branch on the lowest uncovered vertex
and iterate that vertex's edges in lexicographic order, so node counts are
reproducible.  ``budget`` caps node expansions (not wall time).  Failed
states are memoised, which keeps exhaustive refutations of small instances
(e.g. the sharpness families) cheap.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Any

from .constructions import Family, lift_family, make_Hk_star, ParameterRangeWarning
from .core import (Graph, Hypergraph, InputError, Matching, PartiteGraph, Rational,
                   _base, as_fraction, edge_mask, edit_deficiency, is_stable, min_degree)


class Status(str, enum.Enum):
    FOUND = "found"
    NONE = "exhausted-none"
    BUDGET = "budget-exceeded"


@dataclass
class SolveResult:
    status: Status
    witness: Matching | dict[int, tuple[int, ...]] | None = None
    nodes_explored: int = 0
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status is Status.FOUND

    @property
    def size(self) -> int:
        return len(self.witness) if self.witness is not None else 0


class BudgetExceeded(RuntimeError):
    pass


class Inconclusive(RuntimeError):
    """A cross-check could not finish within its budget."""


DEFAULT_BUDGET = 1_000_000


def _masks(base: Hypergraph) -> tuple[dict[int, list[int]], dict[int, tuple[int, ...]]]:
    inc: dict[int, list[int]] = {}
    back: dict[int, tuple[int, ...]] = {}
    for e in base.sorted_edges:
        m = edge_mask(e)
        back[m] = e
        inc.setdefault(e[0], [])
        for v in e:
            inc.setdefault(v, []).append(m)
    return inc, back


def _lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def greedy_matching(H: Graph) -> Matching:
    """Maximal matching taking edges in lexicographic order."""
    used: set[int] = set()
    out = []
    for e in _base(H).sorted_edges:
        if used.isdisjoint(e):
            out.append(e)
            used.update(e)
    return Matching(frozenset(out))


def max_matching(H: Graph, budget: int = DEFAULT_BUDGET) -> SolveResult:
    """Maximum matching by memoised branch and bound.

    At each state the lowest undecided vertex is either covered by one of
    its available edges or skipped; the skip branch is pruned when the
    counting bound ``free // k`` cannot beat the incumbent, and a state stops
    early once it attains that bound.
    """
    if budget <= 0:
        raise InputError("budget must be positive")
    base = _base(H)
    inc, back = _masks(base)
    k = base.k
    full = edge_mask(v for v in base.vertices if inc.get(v))
    memo: dict[int, tuple[int, int]] = {}
    nodes = 0

    def rec(D: int) -> int:
        nonlocal nodes
        hit = memo.get(D)
        if hit is not None:
            return hit[0]
        free = full & ~D
        if not free:
            return 0
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded
        ub = bin(free).count("1") // k
        v = _lowest(free)
        best, choice = -1, 0
        for em in inc[v]:
            if em & D == 0:
                val = 1 + rec(D | em)
                if val > best:
                    best, choice = val, em
                    if best == ub:
                        break
        if best < ub and (bin(free).count("1") - 1) // k > best:
            val = rec(D | (1 << v))
            if val > best:
                best, choice = val, 0
        best = max(best, 0)
        memo[D] = (best, choice)
        return best

    try:
        rec(0)
    except BudgetExceeded:
        return SolveResult(Status.BUDGET, greedy_matching(H), nodes)
    edges, D = [], 0
    while (full & ~D) and D in memo:
        _, choice = memo[D]
        if choice:
            edges.append(back[choice])
            D |= choice
        else:
            D |= 1 << _lowest(full & ~D)
    return SolveResult(Status.FOUND, Matching(frozenset(edges)), nodes)


def nu(H: Graph, budget: int = DEFAULT_BUDGET) -> int:
    r = max_matching(H, budget)
    if r.status is not Status.FOUND:
        raise BudgetExceeded(f"matching number needs more than {budget} nodes")
    return r.size


def enumerate_max_matching(H: Graph) -> int:
    """Reference oracle: largest matching over all edge subsets (tiny inputs)."""
    edges = [edge_mask(e) for e in _base(H).sorted_edges]
    best = 0

    def rec(i: int, used: int, size: int) -> None:
        nonlocal best
        best = max(best, size)
        for j in range(i, len(edges)):
            if edges[j] & used == 0:
                rec(j + 1, used | edges[j], size + 1)

    rec(0, 0, 0)
    return best


def _pm_search(inc, full: int, budget: int) -> tuple[list[int] | None, int]:
    failed: set[int] = set()
    path: list[int] = []
    nodes = 0

    def rec(covered: int) -> bool:
        nonlocal nodes
        if covered == full:
            return True
        if covered in failed:
            return False
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded
        v = _lowest(full & ~covered)
        for em in inc.get(v, ()):
            if em & covered == 0:
                path.append(em)
                if rec(covered | em):
                    return True
                path.pop()
        failed.add(covered)
        return False

    ok = rec(0)
    return (path if ok else None), nodes


def has_perfect_matching(H: Graph, budget: int = DEFAULT_BUDGET) -> SolveResult:
    """Decide whether ``H`` has a perfect matching of its (active) vertices."""
    if budget <= 0:
        raise InputError("budget must be positive")
    base = _base(H)
    verts = base.vertices
    if len(verts) % base.k:
        return SolveResult(Status.NONE, None, 0, {"reason": "k does not divide |V|"})
    if isinstance(H, PartiteGraph) and not H.balanced:
        return SolveResult(Status.NONE, None, 0, {"reason": "unbalanced"})
    if not verts:
        return SolveResult(Status.FOUND, Matching(), 0)
    inc, back = _masks(base)
    if any(v not in inc for v in verts):
        return SolveResult(Status.NONE, None, 0, {"reason": "isolated vertex"})
    try:
        path, nodes = _pm_search(inc, edge_mask(verts), budget)
    except BudgetExceeded:
        return SolveResult(Status.BUDGET, None, budget)
    if path is None:
        return SolveResult(Status.NONE, None, nodes)
    return SolveResult(Status.FOUND, Matching(frozenset(back[m] for m in path)), nodes)


def rainbow_matching(F: Family, budget: int = DEFAULT_BUDGET) -> SolveResult:
    """One edge per colour, pairwise disjoint.

    Colours are tried in order of increasing edge count; the witness maps
    the 0-based colour index to its edge.
    """
    if budget <= 0:
        raise InputError("budget must be positive")
    if F.t * F.k > F.n:
        raise InputError(f"t*k = {F.t * F.k} exceeds n = {F.n}")
    order = sorted(range(F.t), key=lambda i: (F.graphs[i].e, i))
    lists = [[edge_mask(e) for e in F.graphs[i].sorted_edges] for i in order]
    if any(not lst for lst in lists):
        return SolveResult(Status.NONE, None, 0, {"reason": "empty colour"})
    failed: set[tuple[int, int]] = set()
    chosen: list[int] = []
    nodes = 0

    def rec(depth: int, covered: int) -> bool:
        nonlocal nodes
        if depth == len(lists):
            return True
        if (depth, covered) in failed:
            return False
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded
        for em in lists[depth]:
            if em & covered == 0:
                chosen.append(em)
                if rec(depth + 1, covered | em):
                    return True
                chosen.pop()
        failed.add((depth, covered))
        return False

    try:
        ok = rec(0, 0)
    except BudgetExceeded:
        return SolveResult(Status.BUDGET, None, budget)
    if not ok:
        return SolveResult(Status.NONE, None, nodes)
    witness = {}
    for colour, em in zip(order, chosen):
        witness[colour] = tuple(v for v in range(1, F.n + 1) if em >> v & 1)
    return SolveResult(Status.FOUND, dict(sorted(witness.items())), nodes)


def rainbow_equiv_check(F: Family, budget: int = DEFAULT_BUDGET) -> bool:
    """Does the rainbow solver agree with the perfect-matching solver on the lift?"""
    if F.t * F.k != F.n:
        raise InputError("the equivalence needs a balanced lift (t = n/k)")
    half = max(1, budget // 2)
    a = rainbow_matching(F, half)
    b = has_perfect_matching(lift_family(F), half)
    if Status.BUDGET in (a.status, b.status):
        raise Inconclusive(f"budget {budget} too small: {a.status.value}/{b.status.value}")
    return a.status == b.status


def lyy_hypothesis(G: Family, t: int) -> bool:
    """``delta_1(G_i) > C(n-1,k-1) - C(n-t,k-1)`` with n the active vertex count."""
    ok = True
    for Gi in G.graphs:
        n = len(Gi.vertices)
        bound = math.comb(n - 1, G.k - 1) - math.comb(max(n - t, 0), G.k - 1)
        ok &= min_degree(Gi, 1) > bound
    return ok


def rainbow_subroutine_LYY(G: Family, t: int | None = None,
                           budget: int = DEFAULT_BUDGET) -> SolveResult:
    """Rainbow matching for the link graphs of the close-case repair step.

    Same engine as :func:`rainbow_matching`; the degree hypothesis and the
    size condition ``n > 2 k^4 t`` are checked and reported, not enforced.
    """
    t = G.t if t is None else t
    if t != G.t:
        raise InputError(f"t={t} but the family has {G.t} colours")
    hyp = lyy_hypothesis(G, t)
    if not hyp:
        warnings.warn("rainbow subroutine called outside its degree hypothesis",
                      RuntimeWarning, stacklevel=2)
    n_active = len(G.graphs[0].vertices)
    res = rainbow_matching(G, budget)
    res.info.update(hypothesis=hyp, size_condition=n_active > 2 * G.k ** 4 * t)
    return res


class StabilityVerdict(str, enum.Enum):
    VACUOUS = "vacuous"
    IMPLIED = "implied"
    COUNTEREXAMPLE = "counterexample"


def check_stability_lemma(H: Hypergraph, eta: Rational,
                          budget: int = DEFAULT_BUDGET) -> tuple[StabilityVerdict, dict]:
    """Probe the stable-3-graph stability statement on one instance.

    Returns the verdict with the quantities it was computed from.  A
    counterexample at small ``n`` is a small-n artifact, not a refutation of
    an asymptotic statement.
    """
    eta = as_fraction(eta)
    if H.k != 3:
        raise InputError("the stability probe is for 3-graphs")
    if not is_stable(H):
        raise InputError("input hypergraph is not stable")
    n = H.n
    if n % 4 or n < 8:
        raise InputError("need 4 | n and n >= 8")
    bound = math.comb(n, 3) - math.comb(3 * n // 4, 3) - eta ** 4 * n ** 3
    report: dict[str, Any] = {"e": H.e, "edge_bound": bound}
    if H.e <= bound:
        return StabilityVerdict.VACUOUS, report
    size = nu(H, budget)
    report["nu"] = size
    if size >= n // 4:
        return StabilityVerdict.VACUOUS, report
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        ref = make_Hk_star(n, n // 4 - 1, 3)
    d = edit_deficiency(ref, H)
    report.update(deficiency=d, closeness_bound=eta * n ** 3)
    if d < eta * n ** 3:
        return StabilityVerdict.IMPLIED, report
    report["note"] = "small-n artifact"
    return StabilityVerdict.COUNTEREXAMPLE, report
