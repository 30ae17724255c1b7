"""Absorbing sets and the randomized absorbing matching.

A balanced ``k(k+1)``-set ``Q`` (k vertices of X, k² of V) absorbs a
balanced ``(k+1)``-set ``R`` when both ``H[Q]`` and ``H[Q ∪ R]`` have
perfect matchings.  The guarantees of the construction are asymptotic, so
the run records which of its three high-probability events actually held.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import networkx as nx

from ._rng import np_substream, substream
from .core import (InputError, Matching, MatchStatus, PartiteGraph, as_fraction,
                   check_matching, induced, min_degree, link)
from .exact import DEFAULT_BUDGET, Status, has_perfect_matching


class AbsorptionError(RuntimeError):
    def __init__(self, msg: str, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class AbsorbConfig:
    b: Fraction = Fraction(1, 10)
    c: Fraction = Fraction(1, 20)
    seed: int = 0
    probes: int = 20
    retries: int = 5
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "b", as_fraction(self.b))
        object.__setattr__(self, "c", as_fraction(self.c))
        if self.c <= 0:
            raise InputError("c must be positive")
        if self.b <= 0:
            raise InputError("b must be positive")
        if self.probes < 1 or self.retries < 1:
            raise InputError("probes and retries must be at least 1")

    def c_window(self, k: int) -> float:
        """Upper end of the advisory window for ``c``.

        The second term of the stated minimum contains ``c`` itself; it is
        evaluated at the configured ``c``.
        """
        b, c = float(self.b), float(self.c)
        first = (b ** k * k ** k / (6 * math.factorial(k) ** k)) ** 2
        second = (2 * k ** 3 * (k + 1) * c ** 2) ** -10
        return min(first, second)

    def check(self, k: int) -> list[str]:
        notes = []
        if not self.b < Fraction(1, k):
            notes.append(f"b={self.b} outside (0, 1/{k})")
        if not float(self.c) < self.c_window(k):
            notes.append(f"c={self.c} outside the advisory window (< {self.c_window(k):.3g})")
        return notes


@dataclass
class AbsorbDiagnostics:
    sampled: int = 0
    after_intersect_prune: int = 0
    after_nonabsorbing_prune: int = 0
    min_pool_per_R_probed: int = 0
    matching_size: int = 0
    intersecting_pairs: int = 0
    attempts: int = 0
    eq1: bool = False
    eq2: bool = False
    eq3: bool = False
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class AbsorbingMatching(Matching):
    """A matching together with the disjoint absorbing sets it was built from."""

    family: tuple[frozenset[int], ...] = ()
    pms: tuple[Matching, ...] = ()
    config: AbsorbConfig | None = None


def _as_set(S: Iterable[int]) -> frozenset[int]:
    return frozenset(S)


def _check_balanced(H: PartiteGraph, S: frozenset[int], size: int, what: str) -> None:
    if len(S) != size:
        raise InputError(f"{what} must have {size} vertices, got {len(S)}")
    if not S <= frozenset(range(1, H.n + H.m + 1)):
        raise InputError(f"{what} contains unknown vertices")
    if not H.is_balanced_set(S):
        raise InputError(f"{what} is not balanced")


def _pm_on(H: PartiteGraph, S: frozenset[int], budget: int):
    return has_perfect_matching(induced(H, S), budget)


def is_absorbing(H: PartiteGraph, Q: Iterable[int], R: Iterable[int],
                 budget: int = DEFAULT_BUDGET) -> bool:
    Q, R = _as_set(Q), _as_set(R)
    k = H.k
    _check_balanced(H, Q, k * (k + 1), "Q")
    _check_balanced(H, R, k + 1, "R")
    if Q & R:
        raise InputError("Q and R overlap")
    return _pm_on(H, Q, budget).found and _pm_on(H, Q | R, budget).found


def _balanced_sets(H: PartiteGraph, size_x: int, avoid: frozenset[int]):
    X = [x for x in H.X if x not in avoid]
    V = [v for v in H.V if v not in avoid]
    for xs in itertools.combinations(X, size_x):
        for vs in itertools.combinations(V, size_x * H.k):
            yield frozenset(xs + vs)


def count_absorbing(H: PartiteGraph, R: Iterable[int], cap: int = 10 ** 6,
                    budget: int = DEFAULT_BUDGET) -> int:
    """``|L(R)|`` by enumeration, saturating at ``cap``."""
    R = _as_set(R)
    _check_balanced(H, R, H.k + 1, "R")
    if H.e == 0:
        return 0
    count = 0
    for Q in _balanced_sets(H, H.k, R):
        if is_absorbing(H, Q, R, budget):
            count += 1
            if count >= cap:
                return cap
    return count


def complete_absorbing_count(n: int, m: int, k: int) -> int:
    """Closed form of ``|L(R)|`` on the complete partite host."""
    return math.comb(m - 1, k) * math.comb(n - k, k * k)


def _random_balanced(rng, H: PartiteGraph, size_x: int, avoid=frozenset()) -> frozenset[int]:
    X = [x for x in H.X if x not in avoid]
    V = [v for v in H.V if v not in avoid]
    return frozenset(rng.sample(X, size_x) + rng.sample(V, size_x * H.k))


def _prune_intersecting(sets: list[frozenset[int]]) -> tuple[list[frozenset[int]], int]:
    """Walk pairs in sorted order, deleting the larger set of each live intersecting pair."""
    order = sorted(sets, key=sorted)
    pairs = sum(1 for A, B in itertools.combinations(order, 2) if A & B)
    alive = [True] * len(order)
    for i in range(len(order)):
        if not alive[i]:
            continue
        for j in range(i + 1, len(order)):
            if alive[j] and order[i] & order[j]:
                alive[j] = False
    return [Q for Q, a in zip(order, alive) if a], pairs


def _probe_Rs(H: PartiteGraph, Q: frozenset[int], probes: int, rng) -> list[frozenset[int]]:
    nx_, nv = H.m - H.k, H.n - H.k * H.k
    if nx_ < 1 or nv < H.k:
        return []
    total = nx_ * math.comb(nv, H.k)
    if total <= probes:
        return list(_balanced_sets(H, 1, Q))
    return [_random_balanced(rng, H, 1, Q) for _ in range(probes)]


def _degree_hypothesis(H: PartiteGraph, b: Fraction) -> bool:
    need = (Fraction(1, 2) + b) * math.comb(H.n - 1, H.k - 1)
    return all(min_degree(link(H, [x]), 1) > need for x in H.X)


def build_absorbing_matching(H: PartiteGraph, cfg: AbsorbConfig
                             ) -> tuple[AbsorbingMatching, AbsorbDiagnostics]:
    """Sample, prune and filter an absorbing family; return its perfect matching."""
    if not H.balanced:
        raise InputError("absorbing matchings need a balanced host")
    k, n, m = H.k, H.n, H.m
    diag = AbsorbDiagnostics(notes=cfg.check(k))
    if m < k:
        raise AbsorptionError(f"|X|={m} is too small for a balanced {k * (k + 1)}-set", diag)
    if not _degree_hypothesis(H, cfg.b):
        warnings.warn("link degree hypothesis fails on this host", RuntimeWarning, stacklevel=2)
        diag.notes.append("link degree hypothesis fails")
    total = math.comb(m, k) * math.comb(n, k * k)
    p = cfg.c * n / total
    p_float = min(1.0, float(p))
    for attempt in range(cfg.retries):
        diag.attempts = attempt + 1
        nrng = np_substream(cfg.seed, "absorb-count", attempt)
        rng = substream(cfg.seed, "absorb-sets", attempt)
        count = int(nrng.binomial(total, p_float)) if total < 2 ** 62 else int(nrng.poisson(float(cfg.c * n)))
        count = min(count, total)
        sampled: set[frozenset[int]] = set()
        while len(sampled) < count:
            sampled.add(_random_balanced(rng, H, k))
        diag.sampled = len(sampled)
        diag.eq1 = diag.sampled <= 2 * cfg.c * n
        pruned, pairs = _prune_intersecting(list(sampled))
        diag.intersecting_pairs = pairs
        diag.eq3 = pairs <= 2 * float(cfg.c) ** 1.9 * n
        diag.after_intersect_prune = len(pruned)
        family, pms = [], []
        for idx, Q in enumerate(pruned):
            res = _pm_on(H, Q, cfg.budget)
            if not res.found:
                continue
            prng = substream(cfg.seed, "probe", attempt, idx)
            Rs = _probe_Rs(H, Q, cfg.probes, prng)
            if any(_pm_on(H, Q | R, cfg.budget).found for R in Rs):
                family.append(Q)
                pms.append(res.witness)
        diag.after_nonabsorbing_prune = len(family)
        if not family:
            diag.notes.append(f"attempt {attempt}: empty absorbing family")
            continue
        prng = substream(cfg.seed, "pool", attempt)
        pool_Rs = [_random_balanced(prng, H, 1) for _ in range(cfg.probes)]
        pools = []
        for R in pool_Rs:
            pools.append(sum(1 for Q in family if not Q & R
                             and _pm_on(H, Q | R, cfg.budget).found))
        diag.min_pool_per_R_probed = min(pools)
        diag.eq2 = diag.min_pool_per_R_probed >= float(cfg.c) ** 1.5 * n
        edges = frozenset(e for pm in pms for e in pm.edges)
        M = AbsorbingMatching(edges, tuple(family), tuple(pms), cfg)
        diag.matching_size = len(M)
        return M, diag
    raise AbsorptionError(f"no absorbing family after {cfg.retries} attempts", diag)


def _partition_balanced(H: PartiteGraph, S: frozenset[int]) -> list[frozenset[int]]:
    xs = sorted(v for v in S if H.in_X(v))
    vs = sorted(v for v in S if not H.in_X(v))
    k = H.k
    return [frozenset([x] + vs[i * k:(i + 1) * k]) for i, x in enumerate(xs)]


def absorb(H: PartiteGraph, M: Matching, S: Iterable[int],
           budget: int = DEFAULT_BUDGET) -> Matching:
    """Perfect matching of ``H[V(M) ∪ S]``.

    Each balanced piece of ``S`` is assigned to a distinct absorbing set of
    ``M`` (bipartite matching); pieces that cannot be placed, or a plain
    ``M`` without a family, fall back to the exact solver.
    """
    S = _as_set(S)
    U = M.vertices
    if S & U:
        raise InputError("S overlaps V(M)")
    if not S:
        return Matching(M.edges)
    if not H.is_balanced_set(S):
        raise InputError("S is not balanced")
    family = getattr(M, "family", None)
    cfg = getattr(M, "config", None)
    if cfg is not None and len(S) > (H.k + 1) * float(cfg.c) ** 1.5 * H.n / 2:
        warnings.warn(f"|S|={len(S)} exceeds the absorbing window", RuntimeWarning, stacklevel=2)
    out: list[tuple[int, ...]] | None = None
    if family:
        out = _absorb_by_family(H, M, _partition_balanced(H, S), budget)
    if out is None:
        target = U | S
        res = has_perfect_matching(induced(H, target), budget)
        if res.status is not Status.FOUND:
            raise AbsorptionError(f"no perfect matching on V(M) + S ({res.status.value})")
        out = list(res.witness.edges)
    result = Matching(frozenset(out))
    status, msg = check_matching(induced(H, U | S), result)
    if status is not MatchStatus.PERFECT or result.vertices != U | S:
        raise AbsorptionError(f"absorbed matching failed validation: {msg}")
    return result


def _absorb_by_family(H, M, pieces, budget):
    family, pms = M.family, M.pms
    G = nx.Graph()
    cache = {}
    for i, R in enumerate(pieces):
        G.add_node(("R", i))
        for j, Q in enumerate(family):
            res = has_perfect_matching(induced(H, Q | R), budget)
            if res.found:
                cache[i, j] = res.witness
                G.add_edge(("R", i), ("Q", j))
    top = [("R", i) for i in range(len(pieces))]
    assignment = nx.bipartite.hopcroft_karp_matching(G, top_nodes=top) if G.edges else {}
    used: dict[int, int] = {}
    left = []
    for i in range(len(pieces)):
        node = assignment.get(("R", i))
        if node is None:
            left.append(i)
        else:
            used[node[1]] = i
    out = []
    rest = set()
    for j, Q in enumerate(family):
        if j in used:
            out.extend(cache[used[j], j].edges)
        else:
            rest |= Q
    if left:
        # unplaced pieces: re-solve them together with the unused absorbers
        target = frozenset(rest).union(*(pieces[i] for i in left))
        res = has_perfect_matching(induced(H, target), budget)
        if not res.found:
            return None
        out.extend(res.witness.edges)
    else:
        for j, pm in enumerate(pms):
            if j not in used:
                out.extend(pm.edges)
    return out
