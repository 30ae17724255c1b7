"""Extremal constructions, the colour lift, and threshold families."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._rng import derive as derive_seed, substream
from .core import Hypergraph, InputError, PartiteGraph, Rational, as_fraction, min_degree


class ParameterRangeWarning(UserWarning):
    """Parameters are valid but outside the range the constructions are stated for."""


@dataclass(frozen=True)
class Family:
    """Colours ``F_1..F_t``: k-graphs on the common vertex set ``1..n``."""

    n: int
    k: int
    graphs: tuple[Hypergraph, ...]

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if not self.graphs:
            raise InputError("a family needs at least one colour")
        for G in self.graphs:
            if G.n != self.n or G.k != self.k:
                raise InputError("all colours must share n and k")

    @classmethod
    def of(cls, graphs: Sequence[Hypergraph]) -> "Family":
        return cls(graphs[0].n, graphs[0].k, tuple(graphs))

    @property
    def t(self) -> int:
        return len(self.graphs)

    def __len__(self) -> int:
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)


def main_threshold(n: int, k: int) -> int:
    """``C(n-1,k-1) - C(n-n/k,k-1)``; its strict excess is the degree hypothesis."""
    if n % k:
        raise InputError(f"k={k} must divide n={n}")
    return math.comb(n - 1, k - 1) - math.comb(n - n // k, k - 1)


@dataclass(frozen=True)
class ThresholdSpec:
    n: int
    k: int
    t: int
    kind: str = "vertex-degree-main"
    value: int | None = None

    def __post_init__(self):
        if self.kind not in ("vertex-degree-main", "rainbow-EMC"):
            raise InputError(f"unknown threshold kind {self.kind!r}")
        if self.value is None:
            if self.kind == "vertex-degree-main":
                v = main_threshold(self.n, self.k)
            else:
                v = max(math.comb(self.k * self.t - 1, self.k),
                        math.comb(self.n, self.k) - math.comb(self.n - self.t + 1, self.k))
            object.__setattr__(self, "value", v)

    @classmethod
    def main(cls, n: int, k: int = 4) -> "ThresholdSpec":
        return cls(n, k, n // k)


def _check_range(n: int, m: int, k: int) -> None:
    if m < 1 or m >= n:
        raise InputError(f"need 1 <= m < n, got m={m}, n={n}")
    if k < 2 or k > n:
        raise InputError(f"need 2 <= k <= n, got k={k}")
    if not 2 <= m <= n / k:
        warnings.warn(f"m={m} is outside 2 <= m <= n/k for n={n}, k={k}",
                      ParameterRangeWarning, stacklevel=3)


def make_Hk(n: int, m: int, k: int) -> Hypergraph:
    """k-sets of ``[n]`` meeting both ``[m]`` and its complement."""
    _check_range(n, m, k)
    edges = [e for e in itertools.combinations(range(1, n + 1), k) if e[0] <= m < e[-1]]
    return Hypergraph.from_edges(n, k, edges)


def make_Hk_star(n: int, m: int, k: int) -> Hypergraph:
    """k-sets of ``[n]`` meeting ``[m]``."""
    _check_range(n, m, k)
    edges = [e for e in itertools.combinations(range(1, n + 1), k) if e[0] <= m]
    return Hypergraph.from_edges(n, k, edges)


def lift_family(F: Family) -> PartiteGraph:
    """The (1,k)-partite (k+1)-graph with edges ``e + {x_i}``, ``x_i = n+i``."""
    edges = [e + (F.n + i,) for i, G in enumerate(F.graphs, start=1) for e in G.edges]
    return PartiteGraph.from_edges(F.n, F.t, F.k, edges)


def project(H: PartiteGraph, i: int) -> Hypergraph:
    """Colour class ``i`` (1-based) of a lift, as a k-graph on ``1..n``."""
    x = H.n + i
    return Hypergraph.from_edges(H.n, H.k, [e[:-1] for e in H.edges if e[-1] == x])


def script_H(n: int, m: int, k: int) -> PartiteGraph:
    """Lift of ``m`` copies of ``H_k(n, m)``."""
    G = make_Hk(n, m, k)
    return lift_family(Family(n, k, (G,) * m))


def script_H_star(n: int, m: int, k: int) -> PartiteGraph:
    G = make_Hk_star(n, m, k)
    return lift_family(Family(n, k, (G,) * m))


def complete_partite(n: int, m: int, k: int) -> PartiteGraph:
    """Every (k+1)-set with one vertex in X and k in V."""
    edges = [e + (n + i,) for i in range(1, m + 1)
             for e in itertools.combinations(range(1, n + 1), k)]
    return PartiteGraph.from_edges(n, m, k, edges)


def extremal_family(n: int, k: int) -> Family:
    """``n/k`` copies of ``H_k(n, n/k - 1)``; admits no rainbow matching."""
    if n % k:
        raise InputError(f"k={k} must divide n={n}")
    if n // k < 2:
        raise InputError("need n/k >= 2")
    G = make_Hk(n, n // k - 1, k)
    return Family(n, k, (G,) * (n // k))


def verify_threshold(F: Family, spec: ThresholdSpec) -> bool:
    if spec.kind == "rainbow-EMC":
        return all(G.e > spec.value for G in F.graphs)
    return all(min_degree(G, 1) > spec.value for G in F.graphs)


def _target(spec: ThresholdSpec, slack: Fraction) -> Fraction:
    top = math.comb(spec.n - 1, spec.k - 1)
    if spec.value >= top:
        raise InputError(f"threshold {spec.value} unreachable: max vertex degree is {top}")
    target = spec.value + slack * (top - spec.value)
    if target >= top:
        raise InputError(f"slack {slack} pushes the target to {target} >= {top}")
    return target


def sample_threshold_family(spec: ThresholdSpec, slack: Rational = 0,
                            seed: int = 0) -> Family:
    """Random family with every ``delta_1(F_i)`` strictly above the target.

    The target is ``value + slack * (C(n-1,k-1) - value)``.  Each colour is
    seeded with ``H_k(n, n/k - 1)``, padded with random edges at minimum
    degree vertices until the bound is exceeded, then churned (random
    removals that keep the bound, paired with random insertions).  This is
    not uniform over the threshold class.
    """
    if spec.kind != "vertex-degree-main":
        raise InputError("sampling is implemented for the vertex-degree threshold")
    slack = as_fraction(slack)
    if slack < 0:
        raise InputError("slack must be non-negative")
    target = _target(spec, slack)
    n, k = spec.n, spec.k
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        seed_graph = make_Hk(n, n // k - 1, k) if n // k >= 2 else Hypergraph(n, k, frozenset())
    graphs = [_sample_colour(n, k, seed_graph, target, substream(seed, "colour", i))
              for i in range(spec.t)]
    return Family(n, k, tuple(graphs))


def _random_kset(rng, n: int, k: int, containing: int | None = None) -> tuple[int, ...]:
    if containing is None:
        return tuple(sorted(rng.sample(range(1, n + 1), k)))
    others = rng.sample([v for v in range(1, n + 1) if v != containing], k - 1)
    return tuple(sorted(others + [containing]))


def _sample_colour(n, k, seed_graph, target, rng) -> Hypergraph:
    edges = list(seed_graph.sorted_edges)
    index = {e: i for i, e in enumerate(edges)}
    deg = dict(seed_graph.degrees)

    def add(e):
        index[e] = len(edges)
        edges.append(e)
        for v in e:
            deg[v] += 1

    def remove(e):
        i = index.pop(e)
        last = edges.pop()
        if last != e:
            edges[i] = last
            index[last] = i
        for v in e:
            deg[v] -= 1

    def random_nonedge(containing=None):
        for _ in range(200):
            e = _random_kset(rng, n, k, containing)
            if e not in index:
                return e
        pool = [e for e in itertools.combinations(range(1, n + 1), k)
                if e not in index and (containing is None or containing in e)]
        return rng.choice(pool) if pool else None

    while True:
        low = min(deg.values())
        if low > target:
            break
        v = rng.choice(sorted(u for u, d in deg.items() if d == low))
        e = random_nonedge(v)
        if e is None:
            raise InputError("threshold unreachable for this instance")
        add(e)

    for _ in range(max(10, len(edges) // 4)):
        e = edges[rng.randrange(len(edges))]
        if all(deg[v] - 1 > target for v in e):
            remove(e)
            f = random_nonedge()
            add(f if f is not None else e)
    return Hypergraph.from_edges(n, k, edges)


def random_almost_regular(n: int, k: int, degree: int, max_pair: int, seed: int = 0,
                          spread: int = 5) -> Hypergraph:
    """Random k-graph with degrees in ``[degree-spread, degree]`` and bounded pair degrees.

    Configuration-model pairing of ``degree`` stubs per vertex; edges that
    repeat a vertex, duplicate an edge or push a pair over ``max_pair`` are
    rejected, and short vertices are topped up with random edges among the
    currently short vertices.
    """
    import numpy as np
    from ._rng import np_substream
    rng = np_substream(seed, "almost-regular", n, k, degree)
    stubs = np.repeat(np.arange(1, n + 1), degree)
    rng.shuffle(stubs)
    deg = [0] * (n + 1)
    pair: dict[tuple[int, int], int] = {}
    edges: set[tuple[int, ...]] = set()

    def try_add(e) -> bool:
        e = tuple(sorted(int(v) for v in e))
        if len(set(e)) < k or e in edges or any(deg[v] >= degree for v in e):
            return False
        ps = list(itertools.combinations(e, 2))
        if any(pair.get(P, 0) >= max_pair for P in ps):
            return False
        edges.add(e)
        for v in e:
            deg[v] += 1
        for P in ps:
            pair[P] = pair.get(P, 0) + 1
        return True

    for e in stubs[: len(stubs) // k * k].reshape(-1, k):
        try_add(e)
    for _ in range(50):
        short = [v for v in range(1, n + 1) if deg[v] < degree - spread]
        if not short:
            break
        pool = [v for v in range(1, n + 1) if deg[v] < degree]
        for v in short:
            for _ in range(20 * (degree - deg[v])):
                if deg[v] >= degree - spread // 2:
                    break
                others = rng.choice(pool, size=k - 1, replace=False)
                try_add([v, *others.tolist()])
    if min(deg[1:]) < degree - spread:
        raise InputError("could not reach the degree window; try another seed")
    return Hypergraph.from_edges(n, k, edges)


def random_hypergraph(n: int, k: int, p: Rational, seed: int = 0) -> Hypergraph:
    """Each k-subset of ``[n]`` independently with probability ``p``."""
    rng = substream(seed, "random-hypergraph", n, k)
    p = float(as_fraction(p))
    return Hypergraph.from_edges(n, k, [e for e in itertools.combinations(range(1, n + 1), k)
                                        if rng.random() < p])


def random_family(n: int, k: int, t: int, p: Rational, seed: int = 0) -> Family:
    return Family(n, k, tuple(random_hypergraph(n, k, p, derive_seed(seed, "colour", i))
                              for i in range(t)))


def random_partite(n: int, m: int, k: int, p: Rational, seed: int = 0) -> PartiteGraph:
    """Each balanced (k+1)-set independently with probability ``p``."""
    rng = substream(seed, "random-partite", n, m, k)
    p = float(as_fraction(p))
    if p == 0:
        return PartiteGraph.from_edges(n, m, k, [])
    edges = [e + (n + i,) for i in range(1, m + 1)
             for e in itertools.combinations(range(1, n + 1), k) if rng.random() < p]
    return PartiteGraph.from_edges(n, m, k, edges)
