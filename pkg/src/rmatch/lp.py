"""Fractional matchings and covers by exact-rational simplex.

The solver keeps a sparse tableau over ``gmpy2.mpq`` (``fractions.Fraction``
if gmpy2 is unavailable), uses Bland's rule throughout and a single
artificial column for phase one.  Lexicographic refinement optimises a
sequence of objectives, each restricted to the optimal face of the previous
ones, by freezing nonbasic columns with nonzero reduced cost.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from .core import (Graph, Hypergraph, InputError, PartiteGraph, _base,
                   single_step_predecessors)

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class Infeasible(RuntimeError):
    pass


class Unbounded(RuntimeError):
    pass


class _Tableau:
    """``max c.x`` subject to ``A x <= b``, ``x >= 0``; rows are sparse dicts."""

    def __init__(self, rows: Sequence[Mapping[int, object]], b: Sequence[object], ncols: int):
        self.ncols = ncols
        self.rows: list[dict[int, object]] = []
        self.rhs: list[object] = []
        self.basis: list[int] = []
        for i, (row, bi) in enumerate(zip(rows, b)):
            r = {j: _Q(v) for j, v in row.items() if v != 0}
            r[ncols + i] = _Q(1)
            self.rows.append(r)
            self.rhs.append(_Q(bi))
            self.basis.append(ncols + i)
        self.width = ncols + len(self.rows)
        self.obj: dict[int, object] = {}
        self.value = _Q(0)
        self.pivots = 0
        self.eligible: set[int] | None = None
        if any(v < 0 for v in self.rhs):
            self._phase_one()

    def _pivot(self, r: int, q: int) -> None:
        self.pivots += 1
        prow = self.rows[r]
        p = prow[q]
        if p != 1:
            inv = 1 / p
            prow = {j: v * inv for j, v in prow.items()}
            self.rows[r] = prow
            self.rhs[r] = self.rhs[r] * inv
        prhs = self.rhs[r]
        items = list(prow.items())
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(q)
            if f is None:
                continue
            for j, v in items:
                nv = row.get(j, 0) - f * v
                if nv == 0:
                    row.pop(j, None)
                else:
                    row[j] = nv
            self.rhs[i] = self.rhs[i] - f * prhs
        f = self.obj.get(q)
        if f is not None:
            for j, v in items:
                nv = self.obj.get(j, 0) - f * v
                if nv == 0:
                    self.obj.pop(j, None)
                else:
                    self.obj[j] = nv
            self.value = self.value + f * prhs
        self.basis[r] = q

    def _set_objective(self, c: Mapping[int, object]) -> None:
        self.obj = {j: _Q(v) for j, v in c.items() if v != 0}
        self.value = _Q(0)
        for i, j in enumerate(self.basis):
            cj = self.obj.get(j)
            if cj is None:
                continue
            for jj, v in self.rows[i].items():
                nv = self.obj.get(jj, 0) - cj * v
                if nv == 0:
                    self.obj.pop(jj, None)
                else:
                    self.obj[jj] = nv
            self.value = self.value + cj * self.rhs[i]

    def _run(self) -> None:
        while True:
            cands = [j for j, v in self.obj.items() if v > 0
                     and (self.eligible is None or j in self.eligible)]
            if not cands:
                return
            q = min(cands)
            best_r, best = None, None
            for i, row in enumerate(self.rows):
                a = row.get(q)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best or (
                            ratio == best and self.basis[i] < self.basis[best_r]):
                        best, best_r = ratio, i
            if best_r is None:
                raise Unbounded
            self._pivot(best_r, q)

    def _phase_one(self) -> None:
        a = self.width
        self.width += 1
        for row in self.rows:
            row[a] = _Q(-1)
        self.obj = {a: _Q(-1)}
        self.value = _Q(0)
        r = min(range(len(self.rows)), key=lambda i: (self.rhs[i], i))
        self._pivot(r, a)
        self._run()
        if self.value < 0:
            raise Infeasible
        if a in self.basis:
            r = self.basis.index(a)
            q = min(j for j in self.rows[r] if j != a)
            self._pivot(r, q)
        for row in self.rows:
            row.pop(a, None)
        self.width -= 1
        self.obj = {}

    def maximise(self, c: Mapping[int, object]) -> object:
        self._set_objective(c)
        self._run()
        return self.value

    def freeze_face(self) -> None:
        """Restrict later pivots to the optimal face of the current objective."""
        basic = set(self.basis)
        allowed = {j for j in range(self.width) if j in basic or self.obj.get(j, 0) == 0}
        self.eligible = allowed if self.eligible is None else self.eligible & allowed

    def solution(self) -> list[object]:
        x = [_Q(0)] * self.ncols
        for i, j in enumerate(self.basis):
            if j < self.ncols:
                x[j] = self.rhs[i]
        return x


def solve_lp(c: Sequence[object], rows: Sequence[Mapping[int, object]], b: Sequence[object],
             lexicographic: Sequence[Mapping[int, object]] = ()
             ) -> tuple[Fraction, list[Fraction], int]:
    """Maximise ``c.x`` over ``{x >= 0 : A x <= b}``; returns value, x, pivots.

    Each objective in ``lexicographic`` is then maximised over the optimal
    face of all earlier ones, which selects a canonical optimum.
    """
    T = _Tableau(rows, b, len(c))
    value = T.maximise({j: v for j, v in enumerate(c)})
    for extra in lexicographic:
        T.freeze_face()
        T.maximise(extra)
    return _frac(value), [_frac(v) for v in T.solution()], T.pivots


@dataclass(frozen=True)
class WeightVector:
    """Non-negative exact weights on edges or vertices (zeros omitted)."""

    domain: str
    weights: Mapping[Hashable, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.domain not in ("edges", "vertices"):
            raise InputError(f"unknown weight domain {self.domain!r}")
        w = {key: Fraction(v) for key, v in self.weights.items() if v != 0}
        if any(v < 0 for v in w.values()):
            raise InputError("weights must be non-negative")
        object.__setattr__(self, "weights", w)

    def __getitem__(self, key) -> Fraction:
        return self.weights.get(key, Fraction(0))

    @property
    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def load(self, v: int) -> Fraction:
        """Edge domain: total weight of edges at ``v``."""
        return sum((w for e, w in self.weights.items() if v in e), Fraction(0))

    def is_fractional_matching(self, H: Graph) -> bool:
        base = _base(H)
        if self.domain != "edges" or any(e not in base.edges for e in self.weights):
            return False
        loads: dict[int, Fraction] = {}
        for e, w in self.weights.items():
            for v in e:
                loads[v] = loads.get(v, Fraction(0)) + w
        return all(x <= 1 for x in loads.values())

    def is_fractional_cover(self, H: Graph) -> bool:
        if self.domain != "vertices":
            return False
        return all(sum((self[v] for v in e), Fraction(0)) >= 1 for e in _base(H).edges)


@dataclass(frozen=True)
class LPOutcome:
    value: Fraction
    certificate: WeightVector
    basis_note: str = ""


def fractional_matching(H: Graph) -> LPOutcome:
    """Maximum fractional matching ``nu_f(H)`` with an optimal edge weighting."""
    base = _base(H)
    edges = base.sorted_edges
    if not edges:
        return LPOutcome(Fraction(0), WeightVector("edges"), "empty")
    col = {e: j for j, e in enumerate(edges)}
    rows, b = [], []
    for v in base.vertices:
        inc = base.incident(v)
        if inc:
            rows.append({col[e]: 1 for e in inc})
            b.append(1)
    value, x, pivots = solve_lp([1] * len(edges), rows, b)
    cert = WeightVector("edges", {e: x[j] for e, j in col.items()})
    return LPOutcome(value, cert, f"packing LP: {len(rows)} rows, {pivots} pivots")


def fractional_cover(H: Graph, lexicographic: bool = False) -> LPOutcome:
    """Minimum fractional vertex cover ``omega(H)``.

    With ``lexicographic=True`` the returned optimum is the lexicographically
    smallest weight vector in increasing vertex order.
    """
    base = _base(H)
    verts = [v for v in base.vertices if base.incident(v)]
    if not base.edges:
        return LPOutcome(Fraction(0), WeightVector("vertices"), "empty")
    col = {v: j for j, v in enumerate(verts)}
    rows = [{col[v]: -1 for v in e} for e in base.sorted_edges]
    lex = [{col[v]: -1} for v in verts] if lexicographic else ()
    value, x, pivots = solve_lp([-1] * len(verts), rows, [-1] * len(rows), lex)
    cert = WeightVector("vertices", {v: x[j] for v, j in col.items()})
    note = f"covering LP: {len(rows)} rows, {pivots} pivots"
    return LPOutcome(-value, cert, note + (", lexicographic" if lexicographic else ""))


def duality_check(H: Graph) -> bool:
    return fractional_matching(H).value == fractional_cover(H).value


def augment_by_cover(H: PartiteGraph, omega: WeightVector) -> PartiteGraph:
    """Add every balanced (k+1)-set whose cover weight is at least 1."""
    if not omega.is_fractional_cover(H):
        raise InputError("omega is not a fractional cover of H")
    edges = set(H.edges)
    for x in H.X:
        wx = omega[x]
        for S in itertools.combinations(H.V, H.k):
            if wx + sum((omega[v] for v in S), Fraction(0)) >= 1:
                edges.add(S + (x,))
    return PartiteGraph(Hypergraph(H.base.n, H.base.k, frozenset(edges), H.base.removed), H.m)


def sort_by_weight(H: PartiteGraph, omega: WeightVector
                   ) -> tuple[PartiteGraph, WeightVector, dict[int, int]]:
    """Relabel each class so weights are non-increasing in the vertex id."""
    if H.base.removed:
        raise InputError("weight sorting needs an unmasked host")
    mapping: dict[int, int] = {}
    for cls, start in ((H.V, 1), (H.X, H.n + 1)):
        order = sorted(cls, key=lambda v: (-omega[v], v))
        mapping.update({old: start + i for i, old in enumerate(order)})
    edges = [tuple(mapping[v] for v in e) for e in H.edges]
    Hs = PartiteGraph.from_edges(H.n, H.m, H.k, edges)
    ws = WeightVector("vertices", {mapping[v]: w for v, w in omega.weights.items()})
    return Hs, ws, mapping


def _weight_sorted(H: PartiteGraph, omega: WeightVector) -> bool:
    for cls in (H.V, H.X):
        w = [omega[v] for v in cls]
        if any(a < b for a, b in zip(w, w[1:])):
            return False
    return True


def check_augmented_stable(Hprime: PartiteGraph, omega: WeightVector) -> bool:
    """Per-class dominance closure of ``Hprime`` under a weight-sorted labelling.

    Every edge's single-step predecessors (one coordinate moved to the next
    smaller id inside its class) must be edges.
    """
    if not _weight_sorted(Hprime, omega):
        raise InputError("labels are not sorted by non-increasing weight")
    n, edges = Hprime.n, Hprime.edges
    for e in edges:
        x, vs = e[-1], e[:-1]
        if x - 1 > n and vs + (x - 1,) not in edges:
            return False
        for p in single_step_predecessors(vs):
            if p + (x,) not in edges:
                return False
    return True


def fractional_pm_exists(H: PartiteGraph) -> bool:
    if not H.balanced:
        raise InputError("fractional perfect matchings need a balanced host")
    return fractional_matching(H).value == Fraction(len(H.vertices), H.k + 1)


def is_fractional_perfect(H: Graph, f: WeightVector) -> bool:
    base = _base(H)
    return f.is_fractional_matching(H) and all(f.load(v) == 1 for v in base.vertices)
