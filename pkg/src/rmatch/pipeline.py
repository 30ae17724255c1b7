"""End-to-end perfect matching solvers for balanced partite hosts.

``solve`` dispatches on closeness to the extremal lift: hosts near it go
through ``solve_close`` (bad-vertex repair followed by the good-case local
search), the rest through ``solve_far`` (absorbing matching, randomized
rounding, nibble, absorption of the leftover).  No stage is trusted: every
witness is re-validated against the input, and a failed branch drops to
the exact solver when ``fallback='exact'``.
"""

from __future__ import annotations

import itertools
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any

from ._rng import substream
from .absorption import AbsorbConfig, AbsorptionError, absorb, build_absorbing_matching
from .constructions import Family, ParameterRangeWarning, lift_family, script_H
from .core import (ClosenessParams, Hypergraph, InputError, Matching, MatchStatus, PartiteGraph,
                   _base, as_fraction, bad_vertices, binom, check_matching,
                   closeness_search, induced, link, min_degree, relabel, remove_vertices)
from .exact import (DEFAULT_BUDGET, SolveResult, Status, has_perfect_matching, max_matching,
                    rainbow_subroutine_LYY)
from .lp import fractional_matching
from .rounding import (NibbleParams, almost_regular_check, binomial_subgraph, nibble,
                       sample_batch)


@dataclass(frozen=True)
class PipelineConfig:
    epsilon: Fraction = Fraction(1, 10)
    eta: Fraction = Fraction(1, 100)
    rho: Fraction = Fraction(1, 1000)
    rho_prime: Fraction = Fraction(1, 10000)
    ratio: int = 10
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    fallback: str = "exact"
    labeling: str = "fixed-labeling"
    restarts: int = 8
    absorb_b: Fraction = Fraction(1, 10)
    absorb_c: Fraction = Fraction(1, 5)
    absorb_probes: int = 20
    batch_N: int = 20
    batch_p: Fraction = Fraction(1, 2)
    bite: Fraction = Fraction(1, 2)
    nibble_rounds: int = 200
    far_retries: int = 3

    def __post_init__(self):
        for name in ("epsilon", "eta", "rho", "rho_prime", "absorb_b", "absorb_c",
                     "batch_p", "bite"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        chain = [self.rho_prime, self.rho, self.eta, self.epsilon]
        if not all(0 < v < 1 for v in chain):
            raise InputError("epsilon, eta, rho, rho_prime must lie in (0, 1)")
        for small, big in zip(chain, chain[1:]):
            if big < self.ratio * small:
                raise InputError(f"need ratio >= {self.ratio} along rho' << rho << eta << epsilon")
        if self.fallback not in ("exact", "fail"):
            raise InputError(f"unknown fallback {self.fallback!r}")
        ClosenessParams(self.epsilon, self.labeling)

    def a1(self, k: int) -> Fraction:
        return self.epsilon / (8 * k)

    def a2(self, k: int) -> Fraction:
        return self.epsilon / (8 * k ** 3)

    def as_dict(self) -> dict:
        return {key: (str(v) if isinstance(v, Fraction) else v) for key, v in asdict(self).items()}


@dataclass
class StageRecord:
    name: str
    inputs: dict[str, Any] = field(default_factory=dict)
    outputs: dict[str, Any] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    seed: int | None = None
    seconds: float = 0.0


@dataclass
class StageTrace:
    stages: list[StageRecord] = field(default_factory=list)

    def start(self, name: str, seed: int | None = None, **inputs) -> StageRecord:
        rec = StageRecord(name, dict(inputs), seed=seed)
        rec.seconds = time.perf_counter()
        self.stages.append(rec)
        return rec

    @staticmethod
    def finish(rec: StageRecord, **outputs) -> None:
        rec.outputs.update(outputs)
        rec.seconds = time.perf_counter() - rec.seconds

    def names(self) -> list[str]:
        return [s.name for s in self.stages]

    def get(self, name: str) -> StageRecord | None:
        return next((s for s in self.stages if s.name == name), None)

    def to_list(self, timings: bool = True) -> list[dict]:
        out = []
        for s in self.stages:
            d = asdict(s)
            if not timings:
                d.pop("seconds")
            out.append(_jsonable(d))
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in obj]
        return sorted(items) if isinstance(obj, (set, frozenset)) else items
    if isinstance(obj, Fraction):
        return str(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


class StageFailure(RuntimeError):
    pass


def _reference(H: PartiteGraph) -> PartiteGraph:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        return script_H(H.n, H.n // H.k, H.k)


def _require_balanced(H: PartiteGraph) -> None:
    if not isinstance(H, PartiteGraph):
        raise InputError("expected a partite host")
    if not H.balanced:
        raise InputError(f"host is unbalanced: k*|X| = {H.k * len(H.X)}, |V| = {len(H.V)}")


# -- good case -------------------------------------------------------------

def _shape_edges(H: PartiteGraph, W: frozenset[int]) -> list[tuple[int, ...]]:
    return [e for e in H.base.sorted_edges if sum(1 for v in e if v in W) == 1]


def _greedy(edges, used=frozenset()) -> list[tuple[int, ...]]:
    used = set(used)
    out = []
    for e in edges:
        if used.isdisjoint(e):
            out.append(e)
            used.update(e)
    return out


def _improve(H, shape: list, M: list, k: int, budget: int) -> list | None:
    """Trade up to ``k`` edges of ``M`` for a larger shape matching on their union
    with the uncovered vertices."""
    covered = {v for e in M for v in e}
    free = [v for v in H.vertices if v not in covered]
    for j in range(0, min(k, len(M)) + 1):
        for out in itertools.combinations(M, j):
            Y = set(free).union(*out)
            sub = [e for e in shape if Y.issuperset(e)]
            if len(sub) <= j:
                continue
            G = Hypergraph(_base(H).n, _base(H).k, frozenset(sub))
            res = max_matching(G, budget)
            if res.size > j:
                keep = [e for e in M if e not in out]
                return keep + sorted(res.witness.edges)
    return None


def good_case_matcher(H: PartiteGraph, W, budget: int = DEFAULT_BUDGET, seed: int = 0,
                      restarts: int = 8) -> SolveResult:
    """Perfect matching whose edges each use exactly one vertex of ``W``.

    Greedy start, then local improvement by exchanging at most ``k`` matching
    edges; stalls restart from a seeded random maximal matching, and the exact
    solver (with no shape constraint) is the last resort.
    """
    _require_balanced(H)
    W = frozenset(W)
    k = H.k
    target = len(H.X)
    info: dict[str, Any] = {"swaps": 0, "restarts": 0, "fallback": False}
    shape = _shape_edges(H, W)
    possible = bool(shape) and len(W & frozenset(H.V)) == target
    if target == 0:
        return SolveResult(Status.FOUND, Matching(), 0, info)
    for attempt in range(restarts if possible else 0):
        if attempt == 0:
            order = shape
        else:
            order = list(shape)
            substream(seed, "good-restart", attempt).shuffle(order)
            info["restarts"] = attempt
        M = _greedy(order)
        while len(M) < target:
            nxt = _improve(H, shape, M, k, budget)
            if nxt is None:
                break
            M = nxt
            info["swaps"] += 1
        if len(M) == target:
            return SolveResult(Status.FOUND, Matching(frozenset(M)), info["swaps"], info)
    info["fallback"] = True
    info["fallback_reason"] = "no shape edges" if not possible else "local search stalled"
    res = has_perfect_matching(H, budget)
    res.info.update(info)
    return res


# -- close case ------------------------------------------------------------

def _bound_B(size: int, k: int, n: int, eps: Fraction) -> bool:
    # |B| <= 2(k+1) sqrt(eps) n, compared after squaring
    return size * size <= 4 * (k + 1) ** 2 * eps * n * n


def _greedy_cover(H: PartiteGraph, targets, used: set, accept) -> tuple[list, list]:
    """For each target (in order) take the first edge at it that passes ``accept``."""
    chosen, starved = [], []
    for v in sorted(targets):
        if v in used:
            continue
        pick = next((e for e in H.base.incident(v) if used.isdisjoint(e) and accept(e)), None)
        if pick is None:
            starved.append(v)
            continue
        chosen.append(pick)
        used.update(pick)
    return chosen, starved


def solve_close(H: PartiteGraph, cfg: PipelineConfig = PipelineConfig(),
                trace: StageTrace | None = None) -> SolveResult:
    _require_balanced(H)
    trace = trace if trace is not None else StageTrace()
    n, k, eps = H.n, H.k, cfg.epsilon
    if n % k or len(H.X) != n // k or H.base.removed:
        raise InputError("the close case expects the full vertex set of the extremal lift")
    ref = _reference(H)
    X = list(H.X)
    W = frozenset(range(1, n // k + 1))

    rec = trace.start("bad-vertices", epsilon=eps)
    B = bad_vertices(H, ref, eps, root=2)
    Xb = sorted(v for v in B if v in X)
    Wb = sorted(v for v in B if v in W)
    Wg = W - frozenset(Wb)
    rec.checks["B_size_bound"] = _bound_B(len(B), k, n, eps)
    link_bound = math.comb(n - 1, k - 1) - math.comb(n - n // k, k - 1)
    rec.checks["degree_condition"] = all(min_degree(link(H, [x]), 1) > link_bound for x in X)
    trace.finish(rec, B=sorted(B), X_bad=Xb, W_bad=Wb)

    used: set[int] = set()
    parts: list[tuple[int, ...]] = []
    r = len(Xb) + len(Wb)
    try:
        rec = trace.start("lyy-repair", r=r)
        if r:
            xs = Xb + [x for x in X if x not in Xb][:len(Wb)]
            if len(xs) < r:
                trace.finish(rec, status="too-few-colours")
                raise StageFailure(f"{r} bad vertices but only {len(X)} colours")
            Wp = sorted(Wg)[:n // k - r]
            graphs = [_base(remove_vertices(link(H, [x]), Wp)) for x in xs]
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                res = rainbow_subroutine_LYY(Family(n, k, tuple(graphs)), r, cfg.budget)
            rec.checks["lyy_hypothesis"] = bool(res.info.get("hypothesis"))
            rec.checks["lyy_size_condition"] = bool(res.info.get("size_condition"))
            if not res.found:
                trace.finish(rec, status=res.status.value)
                raise StageFailure("rainbow repair found no matching")
            for i, x in enumerate(xs):
                parts.append(res.witness[i] + (x,))
            used.update(v for e in parts for v in e)
        trace.finish(rec, M0=len(parts))

        rec = trace.start("greedy-M1", eta=cfg.eta)
        thresh = cfg.eta * n ** k
        Bp = [v for v in B if v not in used
              and sum(1 for e in H.base.incident(v) if len(Wg.intersection(e)) == 1) >= thresh]
        M1, starved = _greedy_cover(H, Bp, used, lambda e: len(Wg.intersection(e)) == 1)
        rec.checks["M1_feasible"] = not starved
        trace.finish(rec, B_prime=sorted(Bp), M1=len(M1), starved=starved)
        if starved:
            raise StageFailure("greedy M1 starved")
        parts += M1

        rec = trace.start("greedy-M2")
        rest = [v for v in B if v not in used]
        M2, starved = _greedy_cover(H, rest, used, lambda e: Wg.isdisjoint(e))
        rec.checks["M2_feasible"] = not starved
        if starved:
            trace.finish(rec, M2=len(M2), starved=starved)
            raise StageFailure("greedy M2 starved")
        parts += M2
        M2p = []
        for e in H.base.sorted_edges:
            if len(M2p) == len(M2):
                break
            if used.isdisjoint(e) and len(Wg.intersection(e)) == 2:
                M2p.append(e)
                used.update(e)
        rec.checks["M2_prime_feasible"] = len(M2p) == len(M2)
        trace.finish(rec, M2=len(M2), M2_prime=len(M2p))
        if len(M2p) < len(M2):
            raise StageFailure("greedy M2' starved")
        parts += M2p

        rec = trace.start("good-case")
        H3 = remove_vertices(H, used) if used else H
        X3 = [x for x in X if x not in used]
        Vfree = [v for v in range(1, n + 1) if v not in used]
        W3 = [v for v in Vfree if v in W][:len(X3)]
        if len(W3) < len(X3):
            W3 += [v for v in Vfree if v not in W][:len(X3) - len(W3)]
        rec.inputs["W_rebalanced"] = len([v for v in Vfree if v in W]) != len(X3)
        res = good_case_matcher(H3, W3, cfg.budget, cfg.seed, cfg.restarts)
        trace.finish(rec, status=res.status.value, swaps=res.info.get("swaps", 0),
                     fallback=res.info.get("fallback", False))
        if not res.found:
            raise StageFailure(f"good case: {res.status.value}")
        parts += list(res.witness.edges)
    except StageFailure as exc:
        return SolveResult(Status.NONE, None, 0, {"failed_stage": str(exc), "trace": trace})
    M = Matching(frozenset(parts))
    return SolveResult(Status.FOUND, M, 0, {"trace": trace})


# -- far case --------------------------------------------------------------

def _pair_degrees(H: PartiteGraph) -> dict[tuple[int, int], int]:
    out: dict[tuple[int, int], int] = {}
    for e in H.edges:
        x = e[-1]
        for v in e[:-1]:
            out[x, v] = out.get((x, v), 0) + 1
    return out


def pair_degree_hypothesis(H: PartiteGraph, slack: Fraction) -> bool:
    """``d({x,v}) > C(n-1,k-1) - C(n-n/k,k-1) - slack * n^(k-1)`` for all pairs."""
    n, k = len(H.V), H.k
    if n == 0:
        return True
    bound = binom(n - 1, k - 1) - binom(n - Fraction(n, k), k - 1) - slack * n ** (k - 1)
    pd = _pair_degrees(H)
    return all(pd.get((x, v), 0) > bound for x in H.X for v in H.V)


def solve_far(H: PartiteGraph, cfg: PipelineConfig = PipelineConfig(),
              trace: StageTrace | None = None) -> SolveResult:
    _require_balanced(H)
    trace = trace if trace is not None else StageTrace()
    rec = trace.start("far-hypothesis", rho=cfg.rho)
    ok = pair_degree_hypothesis(H, cfg.rho)
    rec.checks["pair_degree"] = ok
    trace.finish(rec)
    if not ok:
        warnings.warn("pair-degree hypothesis fails on this host", RuntimeWarning, stacklevel=2)
    last = "no attempt"
    for attempt in range(cfg.far_retries):
        seed = cfg.seed + 1000003 * attempt
        try:
            return _far_attempt(H, cfg, trace, seed)
        except (StageFailure, AbsorptionError) as exc:
            last = str(exc)
            trace.stages[-1].checks["ok"] = False
    return SolveResult(Status.NONE, None, 0, {"failed_stage": last, "trace": trace})


def _far_attempt(H: PartiteGraph, cfg: PipelineConfig, trace: StageTrace, seed: int) -> SolveResult:
    k = H.k
    rec = trace.start("absorbing", seed=seed, c=cfg.absorb_c)
    acfg = AbsorbConfig(cfg.absorb_b, cfg.absorb_c, seed, cfg.absorb_probes, 5, cfg.budget)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        M1, diag = build_absorbing_matching(H, acfg)
    rec.checks.update(eq1=diag.eq1, eq2=diag.eq2, eq3=diag.eq3)
    trace.finish(rec, M1=len(M1), sampled=diag.sampled, family=diag.after_nonabsorbing_prune)

    rec = trace.start("remove-absorber")
    H1 = remove_vertices(H, M1.vertices)
    rec.checks["inherited_pair_degree"] = pair_degree_hypothesis(H1, 10 * cfg.rho)
    trace.finish(rec, n1=len(H1.V), m1=len(H1.X))

    rec = trace.start("rounding", seed=seed, N=cfg.batch_N, p=cfg.batch_p)
    batch = sample_batch(H1, cfg.batch_N, cfg.batch_p, seed)
    fms, perfect = [], 0
    for R in batch.subsets:
        sub = induced(H1, R)
        out = fractional_matching(sub)
        fms.append(out.certificate)
        perfect += out.value == Fraction(len(R), k + 1)
    H1p = binomial_subgraph(H1, batch, fms, seed)
    D = cfg.batch_N * cfg.batch_p
    rec.checks["almost_regular"] = almost_regular_check(
        H1p, D, Fraction(1, 5), 2, max(1, len(H1.vertices) // 10))
    trace.finish(rec, fractional_perfect=perfect, edges=H1p.e)

    rec = trace.start("nibble", seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        M2 = nibble(H1p.base, NibbleParams(cfg.bite, cfg.rho, cfg.nibble_rounds, seed))
    S = frozenset(H1.vertices) - M2.vertices
    rec.checks["leftover_small"] = len(S) <= cfg.rho_prime * len(H.V)
    trace.finish(rec, M2=len(M2), leftover=len(S))

    rec = trace.start("absorb-leftover")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        M1p = absorb(H, M1, S, cfg.budget)
    trace.finish(rec, M1_prime=len(M1p))
    return SolveResult(Status.FOUND, M1p.union(M2), 0, {"trace": trace})


# -- dispatcher ------------------------------------------------------------

def _rainbow_witness(F: Family, M: Matching) -> dict[int, tuple[int, ...]]:
    return dict(sorted((e[-1] - F.n - 1, e[:-1]) for e in M.edges))


def valid_rainbow(F: Family, witness: dict[int, tuple[int, ...]]) -> bool:
    if sorted(witness) != list(range(F.t)):
        return False
    seen: set[int] = set()
    for i, e in witness.items():
        if e not in F.graphs[i].edges or not seen.isdisjoint(e):
            return False
        seen.update(e)
    return True


def choose_branch(H: PartiteGraph, cfg: PipelineConfig) -> tuple[str, dict[int, int]]:
    """``'close'`` or ``'far'`` plus the relabelling that realised closeness."""
    if H.n % H.k or H.base.removed or len(H.X) != H.n // H.k:
        return "far", {}
    res = closeness_search(_reference(H), H, cfg.epsilon, cfg.labeling, cfg.seed)
    return ("close" if res.close else "far"), dict(res.mapping)


def solve(inp: Family | PartiteGraph, cfg: PipelineConfig = PipelineConfig()) -> SolveResult:
    """Perfect matching of a balanced host, or a rainbow matching of a family."""
    family = inp if isinstance(inp, Family) else None
    H = lift_family(inp) if family is not None else inp
    if not isinstance(H, PartiteGraph):
        raise InputError("solve expects a Family or a PartiteGraph")
    trace = StageTrace()
    info: dict[str, Any] = {"trace": trace, "fallback_used": False}
    result = None
    if H.balanced and H.vertices:
        branch, mapping = choose_branch(H, cfg)
        info["branch"] = branch
        target = relabel(H, mapping) if mapping else H
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ParameterRangeWarning)
            if branch == "close":
                res = solve_close(target, cfg, trace)
            else:
                res = solve_far(target, cfg, trace)
        if res.found:
            M = res.witness
            if mapping:
                inv = {new: old for old, new in mapping.items()}
                M = Matching.of([inv.get(v, v) for v in e] for e in M.edges)
            status, msg = check_matching(H, M)
            info["revalidated"] = status is MatchStatus.PERFECT
            if status is MatchStatus.PERFECT:
                result = M
            else:
                info["branch_error"] = msg
        else:
            info["branch_error"] = res.info.get("failed_stage")
    else:
        info["branch"] = "exact"
    nodes = 0
    if result is None:
        if cfg.fallback == "fail" and info["branch"] != "exact":
            return SolveResult(Status.NONE, None, 0, info)
        info["fallback_used"] = info["branch"] != "exact"
        rec = trace.start("exact-fallback", budget=cfg.budget)
        if family is not None and not H.balanced:
            from .exact import rainbow_matching
            res = rainbow_matching(family, cfg.budget)
            trace.finish(rec, status=res.status.value)
            res.info.update(info)
            return res
        res = has_perfect_matching(H, cfg.budget)
        trace.finish(rec, status=res.status.value)
        nodes = res.nodes_explored
        if not res.found:
            if res.status is Status.NONE:
                info["note"] = "exhaustive search: no perfect matching exists"
            return SolveResult(res.status, None, nodes, info)
        result = res.witness
        status, msg = check_matching(H, result)
        if status is not MatchStatus.PERFECT:
            raise AssertionError(f"exact solver returned an invalid witness: {msg}")
    if family is not None:
        witness = _rainbow_witness(family, result)
        if not valid_rainbow(family, witness):
            raise AssertionError("lifted matching does not translate to a rainbow matching")
        return SolveResult(Status.FOUND, witness, nodes, info)
    return SolveResult(Status.FOUND, result, nodes, info)
