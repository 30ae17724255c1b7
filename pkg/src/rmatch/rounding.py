"""Vertex-sampled subgraphs, their concentration checks, and the nibble.

The asymptotic exponents of the rounding argument are parameters here:
``paper_preset`` translates them literally, ``desk_preset`` picks values that
are meaningful at a few thousand vertices.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ._rng import np_substream
from .core import (Graph, Hypergraph, InputError, Matching, PartiteGraph, Rational, _base,
                   as_fraction, binom, edge_mask, induced, split_classes)
from .lp import WeightVector


# -- presets ---------------------------------------------------------------

@dataclass(frozen=True)
class RoundingPreset:
    name: str
    n: int
    p: Fraction
    N: int
    tolerance: Fraction = Fraction(1, 5)
    exception_fraction: Fraction = Fraction(1, 10)

    @property
    def vertex_band(self) -> tuple[float, float]:
        mid = self.N * float(self.p)
        return mid * (1 - float(self.tolerance)), mid * (1 + float(self.tolerance))


def paper_preset(n: int) -> RoundingPreset:
    """Literal exponents: ``p = n^-0.9`` and ``N = n^1.1``."""
    p = Fraction(n ** -0.9).limit_denominator(10 ** 12)
    return RoundingPreset("paper", n, p, round(n ** 1.1), Fraction(1, 5))


def desk_preset() -> RoundingPreset:
    return RoundingPreset("desk", 2000, Fraction(1, 20), 500)


# -- sampling --------------------------------------------------------------

@dataclass
class SampleBatch:
    subsets: list[frozenset[int]]
    p: Fraction
    trim_log: list[list[int]] = field(default_factory=list)
    raw_sizes: list[int] = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.subsets)


def _bernoulli(rng: np.random.Generator, p: Fraction, size: int) -> np.ndarray:
    """Exact rational coin flips when the denominator fits in 62 bits."""
    if p.denominator < 2 ** 62:
        return rng.integers(0, p.denominator, size=size) < p.numerator
    return rng.random(size) < float(p)


def _trim_order(cls: list[int], pool: frozenset[int]) -> list[int]:
    return sorted(cls, key=lambda v: (v not in pool, -v))


def sample_batch(H: PartiteGraph, N: int, p: Rational, seed: int = 0,
                 exceptions: Iterable[int] = ()) -> SampleBatch:
    """``N`` independent vertex samples, each trimmed to a balanced set.

    The over-full class loses vertices in descending id, drawing from the
    ``exceptions`` pool first.
    """
    p = as_fraction(p)
    if not 0 < p < 1:
        raise InputError(f"need 0 < p < 1, got {p}")
    verts = np.array(H.vertices, dtype=np.int64)
    pool = frozenset(exceptions)
    batch = SampleBatch([], p)
    for i in range(N):
        rng = np_substream(seed, "sample", i)
        R = verts[_bernoulli(rng, p, len(verts))].tolist()
        batch.raw_sizes.append(len(R))
        xs, vs = split_classes(H, R)
        keep_x = min(len(xs), len(vs) // H.k)
        drop = (_trim_order(xs, pool)[:len(xs) - keep_x]
                + _trim_order(vs, pool)[:len(vs) - H.k * keep_x])
        batch.trim_log.append(sorted(drop))
        batch.subsets.append(frozenset(R) - frozenset(drop))
    return batch


@dataclass
class MultiplicityStats:
    y_vertex: dict[int, int]
    max_pair: int
    max_edge: int
    bands: dict[str, bool]
    outside_fraction: float = 0.0


def multiplicity_stats(batch: SampleBatch, H: PartiteGraph,
                       tolerance: Rational = Fraction(1, 5)) -> MultiplicityStats:
    tol = float(as_fraction(tolerance))
    y = Counter()
    for R in batch.subsets:
        y.update(R)
    y_vertex = {v: y.get(v, 0) for v in H.vertices}
    size = H.base.n + 1
    codes = []
    for R in batch.subsets:
        a = np.array(sorted(R), dtype=np.int64)
        if len(a) >= 2:
            i, j = np.triu_indices(len(a), 1)
            codes.append(a[i] * size + a[j])
    max_pair = 0
    if codes:
        _, counts = np.unique(np.concatenate(codes), return_counts=True)
        max_pair = int(counts.max())
    edge_counts = Counter()
    for R in batch.subsets:
        edge_counts.update(_base(induced(H, R)).edges)
    max_edge = max(edge_counts.values(), default=0)
    mid = batch.N * float(batch.p)
    lo, hi = mid * (1 - tol), mid * (1 + tol)
    outside = sum(1 for c in y_vertex.values() if not lo <= c <= hi)
    frac = outside / len(y_vertex) if y_vertex else 0.0
    bands = {"vertex": outside == 0, "pair": max_pair <= 2, "edge": max_edge <= 1}
    return MultiplicityStats(y_vertex, max_pair, max_edge, bands, frac)


def degree_inheritance_check(H: PartiteGraph, R: Iterable[int], rho: Rational) -> bool:
    """Every pair ``{x, v}`` inside ``H[R]`` keeps the sampled pair-degree bound."""
    rho = as_fraction(rho)
    xs, vs = split_classes(H, R)
    k, b = H.k, len(vs)
    if b < k:
        return True
    bound = (binom(b - 1, k - 1) - binom(b - Fraction(b, k), k - 1)
             - 3 * rho * b ** (k - 1))
    sub = induced(H, R)
    pair = Counter()
    for e in sub.edges:
        x = e[-1]
        for v in e[:-1]:
            pair[x, v] += 1
    return all(pair.get((x, v), 0) > bound for x in xs for v in vs)


# -- density and independence ---------------------------------------------

def dense_check(H: Graph, A: Iterable[int], lam: Rational) -> bool:
    lam = as_fraction(lam)
    return induced(H, A).e >= lam * H.e


def dense_family(H: PartiteGraph, a1: Rational, a2: Rational) -> Callable[[Iterable[int]], bool]:
    """Membership test for sets with ``|A∩X| >= (1/k-a1)n`` and ``|A∩V| >= (1-1/k-a2)n``."""
    a1, a2 = as_fraction(a1), as_fraction(a2)
    k, n = H.k, H.n

    def member(A) -> bool:
        xs, vs = split_classes(H, A)
        return (len(xs) >= (Fraction(1, k) - a1) * n
                and len(vs) >= (1 - Fraction(1, k) - a2) * n)
    return member


def dense_sweep(H: PartiteGraph, lam: Rational, a1: Rational, a2: Rational
                ) -> dict[frozenset[int], bool]:
    """``dense_check`` for every member of the family (tiny hosts only)."""
    member = dense_family(H, a1, a2)
    verts = H.vertices
    if len(verts) > 20:
        raise InputError("exhaustive density sweep is limited to 20 vertices")
    out = {}
    for r in range(len(verts) + 1):
        for A in itertools.combinations(verts, r):
            if member(A):
                out[frozenset(A)] = dense_check(H, A, lam)
    return out


class Profile(NamedTuple):
    x: int
    v: int
    exact: bool


def _max_weight_independent(order: list[int], weight: dict[int, int],
                            inc: dict[int, list[int]], budget: int) -> tuple[int, bool]:
    suffix = [0] * (len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + weight[order[i]]
    best, nodes, exact = 0, 0, True

    def rec(i: int, J: int, val: int) -> None:
        nonlocal best, nodes, exact
        if val > best:
            best = val
        if i == len(order) or val + suffix[i] <= best:
            return
        nodes += 1
        if nodes > budget:
            exact = False
            return
        v = order[i]
        Jv = J | (1 << v)
        if all(em & Jv != em for em in inc.get(v, ())):
            rec(i + 1, Jv, val + weight[v])
        if not exact:
            return
        rec(i + 1, J, val)

    rec(0, 0, 0)
    return best, exact


def independence_profile(H: PartiteGraph, R: Iterable[int], budget: int = 10 ** 6) -> Profile:
    """Lexicographic extremes of ``(|J∩X|, |J∩V|)`` over independent ``J`` in ``H[R]``.

    ``x`` is the largest ``|J∩X|`` among independent sets with the largest
    possible ``|J∩V|``; ``v`` is symmetric.  ``exact`` is false when the
    node budget ran out (the values are then lower bounds).
    """
    xs, vs = split_classes(H, R)
    sub = _base(induced(H, R))
    inc: dict[int, list[int]] = {}
    for e in sub.edges:
        em = edge_mask(e)
        for v in e:
            inc.setdefault(v, []).append(em)
    big = len(xs) + len(vs) + 1
    result, exact = {}, True
    for name, first, second in (("v", xs, vs), ("x", vs, xs)):
        # "v" maximises |J∩X| first, then |J∩V|
        weight = {u: big for u in first} | {u: 1 for u in second}
        order = sorted(first) + sorted(second)
        val, ok = _max_weight_independent(order, weight, inc, budget)
        exact &= ok
        result[name] = val % big
    return Profile(result["x"], result["v"], exact)


def independence_profile_bruteforce(H: PartiteGraph, R: Iterable[int]) -> tuple[int, int]:
    """Reference oracle: enumerate every subset of ``R``."""
    R = sorted(R)
    if len(R) > 16:
        raise InputError("brute-force profile is limited to 16 vertices")
    sub = _base(induced(H, R))
    masks = [edge_mask(e) for e in sub.edges]
    best_xv, best_vx = (-1, -1), (-1, -1)
    for r in range(len(R) + 1):
        for J in itertools.combinations(R, r):
            jm = edge_mask(J)
            if any(em & jm == em for em in masks):
                continue
            nxj = sum(1 for u in J if H.in_X(u))
            best_xv = max(best_xv, (nxj, r - nxj))
            best_vx = max(best_vx, (r - nxj, nxj))
    return best_vx[1], best_xv[1]


# -- binomial subgraph and regularity ---------------------------------------

def binomial_subgraph(H: PartiteGraph, batch: SampleBatch, fms: Sequence[WeightVector],
                      seed: int = 0) -> PartiteGraph:
    """Keep each edge ``e`` of ``∪ H[R_i]`` with probability ``fms[i_e](e)``.

    ``i_e`` is the lowest index whose sample contains ``e``.
    """
    if len(fms) != batch.N:
        raise InputError(f"{len(fms)} weightings for {batch.N} samples")
    owner: dict[tuple[int, ...], int] = {}
    per: list[list[tuple[int, ...]]] = [[] for _ in range(batch.N)]
    for i, R in enumerate(batch.subsets):
        sub = induced(H, R)
        if not fms[i].is_fractional_matching(sub):
            raise InputError(f"weighting {i} is not a fractional matching of H[R_{i}]")
        for e in _base(sub).sorted_edges:
            if e not in owner:
                owner[e] = i
                per[i].append(e)
    kept = []
    for i, edges in enumerate(per):
        if not edges:
            continue
        rng = np_substream(seed, "binomial", i)
        for e in edges:
            w = fms[i][e]
            if w == 0:
                continue
            if w >= 1 or _bernoulli(rng, w, 1)[0]:
                kept.append(e)
    return PartiteGraph(Hypergraph(H.base.n, H.base.k, frozenset(kept), H.base.removed), H.m)


def almost_regular_check(Hp: Graph, D: Rational, gamma: Rational, r: Rational,
                         exceptions: int = 0) -> bool:
    D, gamma, r = as_fraction(D), as_fraction(gamma), as_fraction(r)
    base = _base(Hp)
    deg = base.degrees
    outside = sum(1 for d in deg.values() if not (1 - gamma) * D <= d <= (1 + gamma) * D)
    if outside > exceptions or any(d >= r * D for d in deg.values()):
        return False
    pairs = Counter(P for e in base.edges for P in itertools.combinations(e, 2))
    return all(c < gamma * D for c in pairs.values())


# -- nibble ----------------------------------------------------------------

@dataclass(frozen=True)
class NibbleParams:
    bite_fraction: Fraction = Fraction(1, 2)
    a: Fraction = Fraction(1, 20)
    max_rounds: int = 200
    seed: int = 0
    clash: str = "keep-one"

    def __post_init__(self):
        object.__setattr__(self, "bite_fraction", as_fraction(self.bite_fraction))
        object.__setattr__(self, "a", as_fraction(self.a))
        if not 0 < self.bite_fraction < 1:
            raise InputError("bite_fraction must lie in (0, 1)")
        if self.a <= 0:
            raise InputError("a must be positive")
        if self.clash not in ("keep-one", "drop-all"):
            raise InputError(f"unknown clash rule {self.clash!r}")
        if self.max_rounds < 0:
            raise InputError("max_rounds must be non-negative")


@dataclass
class NibbleTrace:
    matching: Matching
    rounds: list[dict] = field(default_factory=list)
    best_round: int = 0
    greedy_added: int = 0

    @property
    def coverage(self) -> int:
        return len(self.matching.vertices)


def _greedy_extend(E: np.ndarray, covered: np.ndarray) -> list[int]:
    cov = covered.copy()
    picked = []
    for idx in range(len(E)):
        row = E[idx]
        if not cov[row].any():
            cov[row] = True
            picked.append(idx)
    return picked


def _keep_one(A: np.ndarray, nverts: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform survivor per connected clash component of the activated edges."""
    a, k = A.shape
    rows = np.repeat(np.arange(a), k)
    cols = a + A.ravel()
    g = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(a + nverts,) * 2)
    _, labels = connected_components(g, directed=False)
    comp = labels[:a]
    keys = rng.random(a)
    order = np.lexsort((keys, comp))
    first = np.ones(a, dtype=bool)
    first[1:] = comp[order][1:] != comp[order][:-1]
    return np.sort(order[first])


def nibble_trace(H: Hypergraph, params: NibbleParams) -> NibbleTrace:
    """Semi-random nibble with per-round records.

    Round ``j`` draws from substream ``(seed, j)``, so a longer run extends a
    shorter one.  After each round the greedy completion of the current
    partial matching is scored and the best completion seen is returned,
    which makes the size monotone in ``max_rounds``.
    """
    base = _base(H)
    deg = base.degrees
    isolated = [v for v, d in deg.items() if d == 0]
    if isolated:
        warnings.warn(f"{len(isolated)} isolated vertices ignored", RuntimeWarning, stacklevel=2)
    nverts = base.n + 1
    if not base.edges:
        return NibbleTrace(Matching())
    E = np.array(base.sorted_edges, dtype=np.int64)
    covered = np.zeros(nverts, dtype=bool)
    alive = np.arange(len(E))
    chosen: list[int] = []
    trace = NibbleTrace(Matching(), best_round=-1)
    best = -1

    def score(j: int) -> int:
        nonlocal best
        extra = _greedy_extend(E[alive], covered)
        size = len(chosen) + len(extra)
        if size > best:
            best = size
            trace.best_round, trace.greedy_added = j, len(extra)
            picked = E[chosen + alive[extra].tolist()].tolist()
            trace.matching = Matching(frozenset(map(tuple, picked)))
        return size

    score(-1)
    for j in range(params.max_rounds):
        if len(alive) == 0:
            break
        live = np.bincount(E[alive].ravel(), minlength=nverts)
        dbar = E.shape[1] * len(alive) / np.count_nonzero(live)
        rng = np_substream(params.seed, "round", j)
        act = alive[rng.random(len(alive)) < min(1.0, float(params.bite_fraction) / dbar)]
        pick = act
        if len(act):
            A = E[act]
            if params.clash == "drop-all":
                use = np.bincount(A.ravel(), minlength=nverts)
                pick = act[(use[A] == 1).all(axis=1)]
            else:
                pick = act[_keep_one(A, nverts, rng)]
            if np.bincount(E[pick].ravel(), minlength=nverts).max(initial=0) > 1:
                raise AssertionError("nibble round produced overlapping edges")
            chosen.extend(pick.tolist())
            covered[E[pick].ravel()] = True
            alive = alive[~covered[E[alive]].any(axis=1)]
        trace.rounds.append({"round": j, "activated": int(len(act)), "picked": int(len(pick)),
                             "alive_edges": int(len(alive)), "matched": len(chosen),
                             "completed": score(j)})
    return trace


def nibble(H: Hypergraph, params: NibbleParams) -> Matching:
    return nibble_trace(H, params).matching


def nibble_guarantee(n: int, k: int, a: Rational) -> Fraction:
    """Matching size promised asymptotically: ``(1-(k-1)a) n/k``."""
    return (1 - (k - 1) * as_fraction(a)) * Fraction(n, k)


# -- concentration ---------------------------------------------------------

def chernoff_bound(alpha: Rational, E: Rational) -> float:
    """``2 exp(-alpha^2 E / 3)``."""
    return 2 * math.exp(-float(as_fraction(alpha) ** 2 * as_fraction(E) / 3))


def janson_bound(t: Rational, lam: Rational, Delta: Rational) -> float:
    """``exp(-t^2 / (2 lambda + 4 Delta))``."""
    t, lam, Delta = map(as_fraction, (t, lam, Delta))
    denom = 2 * lam + 4 * Delta
    if denom <= 0:
        raise InputError("2*lambda + 4*Delta must be positive")
    return math.exp(-float(t * t / denom))


def concentration_entry(observed: Rational, expectation: Rational, alpha: Rational) -> dict:
    """Chernoff band report for one observation."""
    observed, E, alpha = map(as_fraction, (observed, expectation, alpha))
    expo = alpha * alpha * E / 3
    return {
        "observed": str(observed),
        "expectation": str(E),
        "alpha": str(alpha),
        "bound_expr": f"2*exp(-{expo})",
        "bound": chernoff_bound(alpha, E),
        "within": abs(observed - E) <= alpha * E,
    }
