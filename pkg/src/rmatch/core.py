"""Hypergraphs, partite hypergraphs, matchings, closeness and stability.

Vertices are positive integers.  A :class:`Hypergraph` on ``n`` vertices uses
ids ``1..n``; deleting vertices masks them (``removed``) instead of
reindexing, so matchings found in subgraphs compose without translation.

A :class:`PartiteGraph` wraps a ``(k+1)``-uniform base hypergraph on
``n + m`` vertices whose class ``V`` is ``1..n`` and whose class ``X`` is
``n+1..n+m``.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

Edge = tuple[int, ...]
Rational = Union[int, Fraction, str]


class InputError(ValueError):
    """Raised when an operation receives arguments outside its contract."""


def as_fraction(value: Rational | float) -> Fraction:
    """Parse ``value`` as an exact rational (``"p/q"`` strings allowed)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


def binom(y: int | Fraction, j: int) -> Fraction:
    """Generalised binomial coefficient ``y(y-1)...(y-j+1)/j!``.

    Exact for rational ``y``; for integers ``0 <= y < j`` it is 0.
    """
    if j < 0:
        return Fraction(0)
    if isinstance(y, int) and y >= 0:
        return Fraction(math.comb(y, j))
    out = Fraction(1)
    for i in range(j):
        out *= Fraction(y) - i
    return out / math.factorial(j)


def exceeds_scaled(value: int | Fraction, alpha: Fraction, base: int | Fraction,
                   power: int, root: int = 1) -> bool:
    """Exact test of ``value > alpha**(1/root) * base**power`` (all >= 0)."""
    value = Fraction(value)
    if value < 0:
        return False
    return value ** root > Fraction(alpha) * Fraction(base) ** (power * root)


def _canon(edge: Iterable[int]) -> Edge:
    return tuple(sorted(edge))


def edge_mask(edge: Iterable[int]) -> int:
    m = 0
    for v in edge:
        m |= 1 << v
    return m


def mask_vertices(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class Hypergraph:
    """A k-uniform hypergraph on vertex ids ``1..n`` minus ``removed``."""

    n: int
    k: int
    edges: frozenset[Edge]
    removed: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.k < 1:
            raise InputError(f"uniformity must be positive, got {self.k}")
        if self.n < 0:
            raise InputError(f"vertex count must be non-negative, got {self.n}")
        for e in self.edges:
            if len(e) != self.k or len(set(e)) != self.k:
                raise InputError(f"edge {e} is not a {self.k}-set")
            if list(e) != sorted(e):
                raise InputError(f"edge {e} is not in canonical sorted form")
            if e[0] < 1 or e[-1] > self.n:
                raise InputError(f"edge {e} leaves the vertex range 1..{self.n}")
            if self.removed and not self.removed.isdisjoint(e):
                raise InputError(f"edge {e} uses a removed vertex")

    @classmethod
    def from_edges(cls, n: int, k: int, edges: Iterable[Iterable[int]],
                   removed: Iterable[int] = ()) -> "Hypergraph":
        return cls(n, k, frozenset(_canon(e) for e in edges), frozenset(removed))

    @classmethod
    def complete(cls, n: int, k: int) -> "Hypergraph":
        return cls(n, k, frozenset(itertools.combinations(range(1, n + 1), k)))

    @property
    def e(self) -> int:
        return len(self.edges)

    @cached_property
    def vertices(self) -> tuple[int, ...]:
        return tuple(v for v in range(1, self.n + 1) if v not in self.removed)

    @cached_property
    def sorted_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def incidence(self) -> Mapping[int, tuple[Edge, ...]]:
        inc: dict[int, list[Edge]] = defaultdict(list)
        for e in self.sorted_edges:
            for v in e:
                inc[v].append(e)
        return {v: tuple(es) for v, es in inc.items()}

    @cached_property
    def degrees(self) -> Mapping[int, int]:
        c = Counter(v for e in self.edges for v in e)
        return {v: c.get(v, 0) for v in self.vertices}

    def has_edge(self, edge: Iterable[int]) -> bool:
        return _canon(edge) in self.edges

    def incident(self, v: int) -> tuple[Edge, ...]:
        return self.incidence.get(v, ())


@dataclass(frozen=True)
class PartiteGraph:
    """A (1,k)-partite (k+1)-graph with classes ``V = 1..n``, ``X = n+1..n+m``."""

    base: Hypergraph
    m: int

    def __post_init__(self):
        if not 0 <= self.m <= self.base.n:
            raise InputError(f"class size m={self.m} out of range")
        n = self.base.n - self.m
        for e in self.base.edges:
            if sum(1 for v in e if v > n) != 1:
                raise InputError(f"edge {e} does not meet X in exactly one vertex")

    @classmethod
    def from_edges(cls, n: int, m: int, k: int, edges: Iterable[Iterable[int]],
                   removed: Iterable[int] = ()) -> "PartiteGraph":
        return cls(Hypergraph.from_edges(n + m, k + 1, edges, removed), m)

    @property
    def n(self) -> int:
        return self.base.n - self.m

    @property
    def k(self) -> int:
        return self.base.k - 1

    @property
    def edges(self) -> frozenset[Edge]:
        return self.base.edges

    @property
    def e(self) -> int:
        return self.base.e

    @cached_property
    def X(self) -> tuple[int, ...]:
        return tuple(v for v in self.base.vertices if v > self.n)

    @cached_property
    def V(self) -> tuple[int, ...]:
        return tuple(v for v in self.base.vertices if v <= self.n)

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.base.vertices

    @property
    def balanced(self) -> bool:
        return self.k * len(self.X) == len(self.V)

    def in_X(self, v: int) -> bool:
        return v > self.n

    def is_balanced_set(self, S: Iterable[int]) -> bool:
        return is_balanced_set(self, S)

    def color_of(self, edge: Edge) -> int:
        return edge[-1]


Graph = Union[Hypergraph, PartiteGraph]


def _base(H: Graph) -> Hypergraph:
    return H.base if isinstance(H, PartiteGraph) else H


def _rewrap(H: Graph, base: Hypergraph) -> Graph:
    return PartiteGraph(base, H.m) if isinstance(H, PartiteGraph) else base


def is_balanced_set(H: PartiteGraph, S: Iterable[int]) -> bool:
    S = set(S)
    nx = sum(1 for v in S if v > H.n)
    return H.k * nx == len(S) - nx


def split_classes(H: PartiteGraph, S: Iterable[int]) -> tuple[list[int], list[int]]:
    """Return ``(S & X, S & V)`` as sorted lists."""
    xs, vs = [], []
    for v in sorted(S):
        (xs if v > H.n else vs).append(v)
    return xs, vs


@dataclass(frozen=True)
class Matching:
    """A set of edges, expected to be pairwise disjoint."""

    edges: frozenset[Edge] = frozenset()

    @classmethod
    def of(cls, edges: Iterable[Iterable[int]]) -> "Matching":
        return cls(frozenset(_canon(e) for e in edges))

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for e in self.edges for v in e)

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(sorted(self.edges))

    def union(self, other: "Matching") -> "Matching":
        return Matching(self.edges | other.edges)


class MatchStatus(str, enum.Enum):
    NOT_MATCHING = "not-matching"
    MATCHING = "matching"
    PERFECT = "perfect"


def check_matching(H: Graph, M: Matching | Iterable[Iterable[int]]
                   ) -> tuple[MatchStatus, str]:
    """Classify ``M`` against ``H`` and explain the verdict."""
    base = _base(H)
    edges = M.edges if isinstance(M, Matching) else [_canon(e) for e in M]
    seen: set[int] = set()
    for e in sorted(edges):
        if e not in base.edges:
            return MatchStatus.NOT_MATCHING, f"edge {e} is not an edge of the host"
        if not seen.isdisjoint(e):
            return MatchStatus.NOT_MATCHING, f"edge {e} overlaps an earlier edge"
        seen.update(e)
    if base.vertices and len(seen) == len(base.vertices):
        return MatchStatus.PERFECT, "covers every vertex"
    return MatchStatus.MATCHING, f"covers {len(seen)} of {len(base.vertices)} vertices"


def is_matching(H: Graph, M: Matching | Iterable[Iterable[int]]) -> MatchStatus:
    return check_matching(H, M)[0]


def degree(H: Graph, T: Iterable[int]) -> int:
    """Number of edges of ``H`` that contain every vertex of ``T``."""
    base = _base(H)
    T = set(T)
    bad = [v for v in T if not 1 <= v <= base.n or v in base.removed]
    if bad:
        raise InputError(f"vertices {sorted(bad)} are not vertices of the host")
    if len(T) > base.k:
        raise InputError(f"|T|={len(T)} exceeds uniformity {base.k}")
    if not T:
        return base.e
    pivot = min(T, key=lambda v: len(base.incident(v)))
    return sum(1 for e in base.incident(pivot) if T.issubset(e))


def min_degree(H: Graph, l: int) -> int:
    """Minimum ``l``-degree over all ``l``-subsets of the (active) vertex set."""
    base = _base(H)
    if l < 0 or l > base.k:
        raise InputError(f"l={l} outside 0..{base.k}")
    if l == 0:
        return base.e
    verts = base.vertices
    if len(verts) < l:
        raise InputError("fewer than l vertices")
    if l == 1:
        return min(base.degrees.values())
    counts = Counter(T for e in base.edges for T in itertools.combinations(e, l))
    if len(counts) < math.comb(len(verts), l):
        return 0
    return min(counts.values())


def remove_vertices(H: Graph, S: Iterable[int]) -> Graph:
    """``H - S``: drop every edge meeting ``S`` and mask ``S``'s vertices."""
    base = _base(H)
    S = frozenset(S)
    if any(not 1 <= v <= base.n for v in S):
        raise InputError("cannot remove vertices outside the vertex range")
    if not S:
        return H
    edges = frozenset(e for e in base.edges if S.isdisjoint(e))
    return _rewrap(H, Hypergraph(base.n, base.k, edges, base.removed | S))


def induced(H: Graph, S: Iterable[int]) -> Graph:
    """``H[S]``: the subgraph induced on ``S`` (other vertices masked)."""
    base = _base(H)
    keep = set(S)
    drop = [v for v in base.vertices if v not in keep]
    active = sorted(v for v in keep if 1 <= v <= base.n and v not in base.removed)
    if drop and math.comb(len(active), base.k) < base.e:
        # small S: probe its k-subsets instead of scanning every edge
        edges = frozenset(e for e in itertools.combinations(active, base.k) if e in base.edges)
        return _rewrap(H, Hypergraph(base.n, base.k, edges, base.removed | frozenset(drop)))
    return remove_vertices(H, drop)


def is_independent(H: Graph, S: Iterable[int]) -> bool:
    base = _base(H)
    S = set(S)
    if len(S) < base.k:
        return True
    return not any(S.issuperset(e) for v in S for e in base.incident(v))


def link(H: Graph, T: Iterable[int]) -> Hypergraph:
    """Link ``N_H(T)``: edges containing ``T`` with ``T`` deleted.

    For a partite host and a single colour vertex ``x`` this is the k-graph
    on ``1..n`` whose edges are the V-parts of the edges at ``x``.
    """
    base = _base(H)
    T = frozenset(T)
    edges = [tuple(v for v in e if v not in T) for e in base.edges if T.issubset(e)]
    if isinstance(H, PartiteGraph) and any(v > H.n for v in T):
        n = H.n
        removed = frozenset(v for v in base.removed if v <= n) | frozenset(
            v for v in T if v <= n)
    else:
        n = base.n
        removed = base.removed | T
    return Hypergraph.from_edges(n, base.k - len(T), edges, removed)


def relabel(H: Graph, mapping: Mapping[int, int]) -> Graph:
    """Apply a vertex bijection (identity where ``mapping`` is silent)."""
    base = _base(H)
    f = lambda v: mapping.get(v, v)  # noqa: E731
    edges = frozenset(_canon(f(v) for v in e) for e in base.edges)
    removed = frozenset(f(v) for v in base.removed)
    return _rewrap(H, Hypergraph(base.n, base.k, edges, removed))


# -- closeness ---------------------------------------------------------------


def edit_deficiency(H1: Graph, H2: Graph) -> int:
    """``|E(H1) - E(H2)|`` under the identity labelling."""
    b1, b2 = _base(H1), _base(H2)
    if b1.n != b2.n or b1.k != b2.k:
        raise InputError(f"shape mismatch: (n,k)=({b1.n},{b1.k}) vs ({b2.n},{b2.k})")
    return len(b1.edges - b2.edges)


@dataclass(frozen=True)
class ClosenessParams:
    epsilon: Fraction
    mode: str = "fixed-labeling"

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        if not 0 < self.epsilon <= 1:
            raise InputError("epsilon must lie in (0, 1]")
        if self.mode not in ("fixed-labeling", "class-preserving-search"):
            raise InputError(f"unknown closeness mode {self.mode!r}")


@dataclass
class ClosenessResult:
    close: bool
    deficiency: int
    bound: Fraction
    mapping: dict[int, int] = field(default_factory=dict)
    exact: bool = True
    nodes: int = 0


EXACT_SEARCH_LIMIT = 10


def _classes(H: Graph) -> list[list[int]]:
    if isinstance(H, PartiteGraph):
        return [list(H.V), list(H.X)]
    return [list(_base(H).vertices)]


def closeness_search(H1: Graph, H2: Graph, epsilon: Rational,
                     mode: str = "fixed-labeling", seed: int = 0,
                     node_limit: int = 2_000_000) -> ClosenessResult:
    """Decide whether ``H2`` is epsilon-close to ``H1``.

    Returns the best relabelling found as ``mapping`` (H2 id -> new id).
    Exhaustive over within-class bijections when the host has at most
    ``EXACT_SEARCH_LIMIT`` vertices, hill climbing otherwise (``exact=False``).
    """
    params = ClosenessParams(epsilon, mode)
    b1, b2 = _base(H1), _base(H2)
    d0 = edit_deficiency(H1, H2)
    bound = params.epsilon * Fraction(len(b1.vertices)) ** b1.k
    if d0 < bound or params.mode == "fixed-labeling":
        return ClosenessResult(d0 < bound, d0, bound)
    if isinstance(H1, PartiteGraph) != isinstance(H2, PartiteGraph) or (
            isinstance(H1, PartiteGraph) and H1.m != H2.m):
        raise InputError("class-preserving search needs matching vertex classes")
    if b1.vertices != b2.vertices:
        raise InputError("closeness requires a common vertex set")
    limit = math.ceil(bound) - 1  # deficiency <= limit  <=>  deficiency < bound
    classes = _classes(H1)
    if len(b1.vertices) <= EXACT_SEARCH_LIMIT:
        return _exact_closeness(b1, b2, classes, limit, bound, node_limit)
    return _hill_climb_closeness(b1, b2, classes, limit, bound, seed)


def is_eps_close(H1: Graph, H2: Graph, p: ClosenessParams | Rational) -> bool:
    if not isinstance(p, ClosenessParams):
        p = ClosenessParams(p)
    return closeness_search(H1, H2, p.epsilon, p.mode).close


def _exact_closeness(b1, b2, classes, limit, bound, node_limit):
    # sigma maps a target vertex (H1 label) to a source vertex (H2 label);
    # targets are fixed in increasing order so every H1 edge is decided once
    # its largest vertex is assigned.
    order = sorted(b1.vertices)
    cls_of = {v: i for i, c in enumerate(classes) for v in c}
    by_max: dict[int, list[Edge]] = defaultdict(list)
    for e in b1.edges:
        by_max[e[-1]].append(e)
    deg1, deg2 = b1.degrees, b2.degrees
    sigma: dict[int, int] = {}
    used: set[int] = set()
    nodes = 0
    found: list[tuple[int, dict[int, int]]] = []

    def rec(idx: int, deficit: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise _SearchAbort
        if idx == len(order):
            found.append((deficit, dict(sigma)))
            return True
        t = order[idx]
        cands = [s for s in classes[cls_of[t]] if s not in used]
        cands.sort(key=lambda s: (abs(deg2[s] - deg1[t]), s))
        for s in cands:
            sigma[t] = s
            used.add(s)
            d = deficit
            for e in by_max.get(t, ()):
                if _canon(sigma[v] for v in e) not in b2.edges:
                    d += 1
            if d <= limit and rec(idx + 1, d):
                return True
            used.discard(s)
            del sigma[t]
        return False

    try:
        ok = rec(0, 0)
        exact = True
    except _SearchAbort:
        ok, exact = False, False
    if ok:
        deficit, sig = found[0]
        return ClosenessResult(True, deficit, bound, {s: t for t, s in sig.items()},
                               exact=True, nodes=nodes)
    return ClosenessResult(False, edit_deficiency(b1, b2), bound, exact=exact,
                           nodes=nodes)


class _SearchAbort(Exception):
    pass


def _hill_climb_closeness(b1, b2, classes, limit, bound, seed, restarts=4,
                          max_passes=50):
    rng = random.Random(seed)
    deg1, deg2 = b1.degrees, b2.degrees

    def deficit_of(sig):
        return sum(1 for e in b1.edges if _canon(sig[v] for v in e) not in b2.edges)

    def local(e, sig):
        return _canon(sig[v] for v in e) not in b2.edges

    starts = []
    ident = {v: v for v in b1.vertices}
    starts.append(ident)
    aligned = {}
    for c in classes:
        a = sorted(c, key=lambda v: (-deg1[v], v))
        b = sorted(c, key=lambda v: (-deg2[v], v))
        aligned.update(zip(a, b))
    starts.append(aligned)
    for _ in range(restarts):
        s = {}
        for c in classes:
            perm = list(c)
            rng.shuffle(perm)
            s.update(zip(c, perm))
        starts.append(s)

    best_sig, best = None, None
    for sig in starts:
        sig = dict(sig)
        cur = deficit_of(sig)
        for _ in range(max_passes):
            improved = False
            for c in classes:
                for a, b in itertools.combinations(c, 2):
                    touched = set(b1.incident(a)) | set(b1.incident(b))
                    before = sum(local(e, sig) for e in touched)
                    sig[a], sig[b] = sig[b], sig[a]
                    after = sum(local(e, sig) for e in touched)
                    if after < before:
                        cur += after - before
                        improved = True
                    else:
                        sig[a], sig[b] = sig[b], sig[a]
            if not improved or cur <= limit:
                break
        if best is None or cur < best:
            best, best_sig = cur, dict(sig)
        if best <= limit:
            break
    return ClosenessResult(best <= limit, best, bound,
                           {s: t for t, s in best_sig.items()}, exact=False)


# -- goodness ----------------------------------------------------------------


def link_deficits(H1: Graph, H2: Graph) -> dict[int, int]:
    """Per vertex ``v``: ``|N_H2(v) - N_H1(v)|`` (edges at v in H2 missing in H1)."""
    b1, b2 = _base(H1), _base(H2)
    out = {v: 0 for v in b1.vertices}
    for e in b2.edges - b1.edges:
        for v in e:
            if v in out:
                out[v] += 1
    return out


def bad_vertices(H1: Graph, H2: Graph, alpha: Rational, root: int = 1) -> frozenset[int]:
    """Vertices of ``H1`` that are alpha-bad with respect to ``H2``.

    ``v`` is bad if its link in ``H2`` has more than
    ``alpha**(1/root) * |V(H1)|**(k-1)`` sets missing from its link in
    ``H1`` (``k`` the uniformity); ``root=2`` gives the sqrt(alpha) test
    without leaving exact arithmetic.
    """
    b1 = _base(H1)
    alpha = as_fraction(alpha)
    N = len(b1.vertices)
    return frozenset(v for v, d in link_deficits(H1, H2).items()
                     if exceeds_scaled(d, alpha, N, b1.k - 1, root))


# -- dominance order and stability -------------------------------------------


def dominance_leq(e: Sequence[int], f: Sequence[int]) -> bool:
    """Coordinatewise comparison of the sorted representatives of e and f."""
    if len(e) != len(f):
        raise InputError("dominance compares sets of equal size")
    return all(a <= b for a, b in zip(sorted(e), sorted(f)))


def single_step_predecessors(f: Sequence[int], low: int = 1) -> list[Edge]:
    """Sets obtained from ``f`` by lowering one coordinate by exactly one."""
    f = sorted(f)
    out = []
    for i, u in enumerate(f):
        floor = f[i - 1] if i else low - 1
        if u - 1 > floor:
            out.append(tuple(f[:i] + [u - 1] + f[i + 1:]))
    return out


def is_stable(H: Graph) -> bool:
    """True iff ``E(H)`` is closed downward under the dominance order."""
    base = _base(H)
    return all(p in base.edges for f in base.edges for p in single_step_predecessors(f))


def dominance_closure(H: Graph) -> Hypergraph:
    """All k-subsets of ``1..n`` dominated by some edge (brute force)."""
    base = _base(H)
    edges = list(base.edges)
    closure = [e for e in itertools.combinations(range(1, base.n + 1), base.k)
               if any(dominance_leq(e, f) for f in edges)]
    return Hypergraph.from_edges(base.n, base.k, closure)
