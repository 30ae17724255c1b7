"""Seeded experiment sweeps and their JSON/CSV reports.

A report is a pure function of its config: wall-clock timings live in a
separate field that ``to_json(exclude_timings=True)`` drops, so two runs
with the same seeds serialize byte-identically.
"""

from __future__ import annotations

import csv
import json
import math
import random
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from ._rng import derive
from .absorption import AbsorbConfig, absorb, build_absorbing_matching
from .constructions import (ParameterRangeWarning, ThresholdSpec, complete_partite,
                            extremal_family, lift_family, make_Hk, make_Hk_star,
                            random_almost_regular,
                            random_family, random_hypergraph, random_partite,
                            sample_threshold_family)
from .core import (Hypergraph, InputError, MatchStatus, PartiteGraph, check_matching,
                   dominance_closure, induced, is_stable, min_degree)
from .exact import enumerate_max_matching, has_perfect_matching, nu, rainbow_matching
from .lp import (augment_by_cover, check_augmented_stable, fractional_cover,
                 fractional_matching, sort_by_weight)
from .pipeline import PipelineConfig, solve, valid_rainbow
from .rounding import (NibbleParams, chernoff_bound, concentration_entry,
                       independence_profile, independence_profile_bruteforce,
                       multiplicity_stats, nibble_trace, sample_batch)

SCHEMA = 1
SUITES: dict[str, Callable] = {}


def suite(name):
    def deco(fn):
        SUITES[name] = fn
        return fn
    return deco


@dataclass
class ExperimentConfig:
    suite: str
    n_list: list[int] = field(default_factory=list)
    k: int | list[int] = 3
    trials: int = 10
    seeds: int | list[int] = 0
    thresholds: dict[str, Any] = field(default_factory=dict)
    hard_assertions: bool = True

    def __post_init__(self):
        if self.suite not in SUITES:
            raise InputError(f"unknown suite {self.suite!r}; choose from {sorted(SUITES)}")
        if self.trials < 0:
            raise InputError("trials must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"suite", "n_list", "k", "trials", "seeds", "thresholds", "hard_assertions"}
        extra = set(d) - known
        if extra:
            raise InputError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def seed_list(self) -> list[int]:
        if isinstance(self.seeds, list):
            return self.seeds
        return [derive(self.seeds, self.suite, i) % 2 ** 32 for i in range(self.trials)]

    def ks(self) -> list[int]:
        return self.k if isinstance(self.k, list) else [self.k]

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class RunReport:
    suite: str
    config: dict
    trials: list[dict] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    assertions: dict[str, bool] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    schema: int = SCHEMA

    @property
    def passed(self) -> bool:
        return all(self.assertions.values())

    def to_dict(self, exclude_timings: bool = False) -> dict:
        d = {"schema": self.schema, "suite": self.suite, "config": self.config,
             "summary": self.summary, "assertions": self.assertions, "trials": self.trials}
        if not exclude_timings:
            d["timings"] = self.timings
        return d

    def to_json(self, exclude_timings: bool = False) -> str:
        return json.dumps(self.to_dict(exclude_timings), sort_keys=True, indent=2, default=str)

    def write(self, json_path: str | Path, csv_path: str | Path | None = None) -> None:
        Path(json_path).write_text(self.to_json() + "\n")
        if csv_path is not None and self.trials:
            keys = sorted({k for t in self.trials for k, v in t.items()
                           if not isinstance(v, (dict, list))})
            with open(csv_path, "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=keys, extrasaction="ignore")
                w.writeheader()
                w.writerows(self.trials)


def experiment(config: ExperimentConfig | dict | str | Path) -> RunReport:
    if isinstance(config, (str, Path)):
        config = ExperimentConfig.load(config)
    elif isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)
    report = RunReport(config.suite, config.as_dict())
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        SUITES[config.suite](config, report)
    report.timings["total_seconds"] = time.perf_counter() - t0
    if not config.hard_assertions:
        report.summary["soft_assertions"] = dict(report.assertions)
        report.assertions = {}
    return report


# -- suites -----------------------------------------------------------------

@suite("sharpness")
def _sharpness(cfg: ExperimentConfig, rep: RunReport) -> None:
    """Extremal families are negative; sampled above-threshold families are positive."""
    neg, pos, nu_ok = True, True, True
    for k in cfg.ks():
        for n in cfg.n_list:
            F = extremal_family(n, k)
            r = rainbow_matching(F)
            size = nu(make_Hk(n, n // k - 1, k))
            neg &= r.status.value == "exhausted-none"
            nu_ok &= size == n // k - 1
            rep.trials.append({"n": n, "k": k, "family": "extremal", "status": r.status.value,
                               "nu": size, "nodes": r.nodes_explored})
            for s in cfg.seed_list():
                G = sample_threshold_family(ThresholdSpec.main(n, k), seed=s)
                r = rainbow_matching(G)
                pos &= r.found
                rep.trials.append({"n": n, "k": k, "family": "threshold+1", "seed": s,
                                   "status": r.status.value, "nodes": r.nodes_explored})
    rep.assertions.update(extremal_negative=neg, extremal_nu=nu_ok, threshold_positive=pos)


@suite("equivalence")
def _equivalence(cfg: ExperimentConfig, rep: RunReport) -> None:
    """Rainbow solver versus perfect matchings of the lift on random families."""
    agree = 0
    seeds = cfg.seed_list()
    shapes = [(n, k) for k in cfg.ks() for n in cfg.n_list if n % k == 0]
    if not shapes:
        raise InputError("no (n, k) with k | n in the config")
    density = Fraction(cfg.thresholds.get("density", "1/3"))
    for i, s in enumerate(seeds):
        n, k = shapes[i % len(shapes)]
        F = random_family(n, k, n // k, density, s)
        a = rainbow_matching(F)
        b = has_perfect_matching(lift_family(F))
        ok = a.status == b.status
        agree += ok
        rep.trials.append({"seed": s, "n": n, "k": k, "rainbow": a.status.value,
                           "lift": b.status.value, "agree": ok})
    rep.summary.update(agree=agree, total=len(seeds),
                       found=sum(t["rainbow"] == "found" for t in rep.trials))
    rep.assertions["all_agree"] = agree == len(seeds)


@suite("duality")
def _duality(cfg: ExperimentConfig, rep: RunReport) -> None:
    """``nu <= nu_f = omega`` on random hypergraphs."""
    dual, weak = True, True
    for s in cfg.seed_list():
        rng = random.Random(s)
        n = rng.choice(cfg.n_list or [8])
        k = rng.choice([k for k in cfg.ks() if k <= n])
        H = random_hypergraph(n, k, Fraction(rng.randint(1, 6), 10), s)
        f, w = fractional_matching(H), fractional_cover(H)
        size = nu(H)
        dual &= f.value == w.value
        weak &= size <= f.value
        rep.trials.append({"seed": s, "n": n, "k": k, "e": H.e, "nu": size,
                           "nu_f": str(f.value), "omega": str(w.value)})
    rep.assertions.update(strong_duality=dual, integral_below_fractional=weak)


@suite("augmentation")
def _augmentation(cfg: ExperimentConfig, rep: RunReport) -> None:
    """Cover augmentation keeps ``nu_f`` and yields a stable graph under sorted labels."""
    same, sup, stable = True, True, True
    for s in cfg.seed_list():
        rng = random.Random(s)
        k = rng.choice(cfg.ks())
        choices = [n for n in (cfg.n_list or [6, 8, 9]) if n % k == 0 and n // k >= 1]
        n = rng.choice(choices)
        H = random_partite(n, n // k, k, Fraction(rng.randint(2, 8), 10), s)
        lex = fractional_cover(H, lexicographic=True)
        Hs, ws, _ = sort_by_weight(H, lex.certificate)
        Hp = augment_by_cover(Hs, ws)
        a, b = fractional_matching(Hs).value, fractional_matching(Hp).value
        st = check_augmented_stable(Hp, ws)
        same &= a == b
        sup &= Hs.edges <= Hp.edges
        stable &= st
        rep.trials.append({"seed": s, "n": n, "k": k, "e": H.e, "e_aug": Hp.e,
                           "nu_f": str(a), "nu_f_aug": str(b), "stable": st})
    rep.assertions.update(nu_f_preserved=same, superset=sup, stable=stable)


def _random_S(rng: random.Random, H, avoid, size_x: int):
    X = [x for x in H.X if x not in avoid]
    V = [v for v in H.V if v not in avoid]
    return frozenset(rng.sample(X, size_x) + rng.sample(V, size_x * H.k))


@suite("absorbing")
def _absorbing(cfg: ExperimentConfig, rep: RunReport) -> None:
    """Absorbing matching size and absorption of random balanced leftovers."""
    n = cfg.n_list[0] if cfg.n_list else 30
    k = cfg.ks()[0]
    H = complete_partite(n, n // k, k)
    c = Fraction(cfg.thresholds.get("c", "1/20"))
    c_absorb = Fraction(cfg.thresholds.get("c_absorb", "1/5"))
    absorb_trials = int(cfg.thresholds.get("absorb_trials", 50))
    min_ok = int(cfg.thresholds.get("size_ok_min", 95 * cfg.trials // 100))
    small = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for s in cfg.seed_list():
            M, d = build_absorbing_matching(H, AbsorbConfig(c=c, seed=s))
            ok = len(M) <= 2 * k * c * n
            small += ok
            rep.trials.append({"kind": "build", "seed": s, "size": len(M), "size_ok": ok,
                               "sampled": d.sampled, "pruned": d.after_intersect_prune,
                               "family": d.after_nonabsorbing_prune, "eq1": d.eq1})
        M, d = build_absorbing_matching(H, AbsorbConfig(c=c_absorb, seed=cfg.seed_list()[0]
                                                        if cfg.seed_list() else 0))
        rng = random.Random(derive(0, "absorb-S", n, k))
        window = (k + 1) * float(c_absorb) ** 1.5 * n / 2
        absorbed = 0
        for j in range(absorb_trials):
            S = _random_S(rng, H, M.vertices, 1)
            P = absorb(H, M, S)
            status, _ = check_matching(induced(H, M.vertices | S), P)
            ok = status is MatchStatus.PERFECT and P.vertices == M.vertices | S
            absorbed += ok
            rep.trials.append({"kind": "absorb", "trial": j, "S": sorted(S), "ok": ok,
                               "within_window": len(S) <= window})
    rep.summary.update(size_ok=small, builds=cfg.trials, absorbed=absorbed,
                       absorb_trials=absorb_trials, window=window)
    rep.assertions.update(size_bound=small >= min_ok, absorb_all=absorbed == absorb_trials)


@suite("nibble-curve")
def _nibble_curve(cfg: ExperimentConfig, rep: RunReport) -> None:
    """Coverage of the nibble on random almost-regular 3-graphs."""
    n = cfg.n_list[0] if cfg.n_list else 3000
    k = cfg.ks()[0]
    th = cfg.thresholds
    deg, spread, pair = int(th.get("degree", 55)), int(th.get("spread", 10)), int(th.get("pair", 3))
    a_values = [Fraction(a) for a in th.get("a", ["1/20"])]
    bite = Fraction(th.get("bite", "1/2"))
    need = float(th.get("coverage", 0.9))
    min_ok = int(th.get("min_ok", 95 * cfg.trials // 100))
    clash = th.get("clash", "keep-one")
    hits = {str(a): 0 for a in a_values}
    for s in cfg.seed_list():
        H = random_almost_regular(n, k, deg, pair, seed=s, spread=spread)
        d = H.degrees.values()
        for a in a_values:
            tr = nibble_trace(H, NibbleParams(bite, a, int(th.get("rounds", 200)), s, clash))
            cov = tr.coverage / n
            hits[str(a)] += cov >= need
            rep.trials.append({"seed": s, "a": str(a), "coverage": cov, "edges": H.e,
                               "min_degree": min(d), "max_degree": max(d),
                               "rounds": len(tr.rounds), "best_round": tr.best_round})
    rep.summary.update(hits=hits, trials=len(cfg.seed_list()), coverage_threshold=need)
    rep.assertions["coverage"] = all(h >= min_ok for h in hits.values())


@suite("concentration")
def _concentration(cfg: ExperimentConfig, rep: RunReport) -> None:
    """Vertex multiplicities of sampled batches against the Chernoff band."""
    n = cfg.n_list[0] if cfg.n_list else 2000
    k = cfg.ks()[0]
    th = cfg.thresholds
    p = Fraction(th.get("p", "1/20"))
    N = int(th.get("N", 500))
    tol = Fraction(th.get("tolerance", "1/5"))
    H = random_partite(n, n // k, k, 0, 0)
    pn = p * n
    sigma = float(pn * (1 - p)) ** 0.5
    inside = 0
    for s in cfg.seed_list():
        batch = sample_batch(H, N, p, s)
        V = set(H.V)
        sizes = [sum(1 for v in R if v in V) for R in batch.subsets]
        # |R_i ∩ V| before trimming is the Binomial(n, p) variable
        raw = [sz + sum(1 for v in drop if v in V) for sz, drop in zip(sizes, batch.trim_log)]
        mean = sum(sizes) / len(sizes)
        ok3 = sum(abs(sz - float(pn)) <= 3 * sigma for sz in raw) / len(raw)
        st = multiplicity_stats(batch, H, tol)
        inside += ok3 >= 0.99
        rep.trials.append({"seed": s, "mean_V_size": mean, "raw_within_3sigma": ok3,
                           "vertex_outside_band": st.outside_fraction, "max_pair": st.max_pair,
                           "max_edge": st.max_edge, "bands": st.bands,
                           "chernoff_max_y": concentration_entry(
                               max(st.y_vertex.values()), N * p, tol)})
    rep.summary.update(chernoff_vertex=chernoff_bound(tol, N * p), batches=len(cfg.seed_list()))
    rep.assertions["three_sigma"] = inside == len(cfg.seed_list())


@suite("threshold")
def _threshold(cfg: ExperimentConfig, rep: RunReport) -> None:
    """The pipeline on sampled above-threshold families."""
    ok_all, fallback = True, 0
    shapes = [(n, k) for k in cfg.ks() for n in cfg.n_list if n % k == 0]
    for i, s in enumerate(cfg.seed_list()):
        n, k = shapes[i % len(shapes)]
        F = sample_threshold_family(ThresholdSpec.main(n, k), seed=s)
        r = solve(F, PipelineConfig(seed=s))
        ok = r.found and valid_rainbow(F, r.witness)
        ok_all &= ok
        fallback += bool(r.info.get("fallback_used"))
        rep.trials.append({"seed": s, "n": n, "k": k, "status": r.status.value, "valid": ok,
                           "branch": r.info.get("branch"),
                           "fallback": bool(r.info.get("fallback_used")),
                           "witness": {str(c): list(e) for c, e in r.witness.items()}
                           if r.found else None})
    rep.summary.update(fallback_used=fallback, total=len(cfg.seed_list()))
    rep.assertions["all_found"] = ok_all


@suite("degree-formula")
def _degree_formula(cfg: ExperimentConfig, rep: RunReport) -> None:
    """Minimum vertex degree of ``H_k(n,m)`` and ``H_k*(n,m)`` by enumeration."""
    ok = True
    for k in cfg.ks():
        for n in cfg.n_list:
            for m in range(1, n // 2 + 1):
                if m >= n or k > n:
                    continue
                formula = math.comb(n - 1, k - 1) - math.comb(n - 1 - m, k - 1)
                a, b = min_degree(make_Hk(n, m, k), 1), min_degree(make_Hk_star(n, m, k), 1)
                ok &= a == b == formula
                rep.trials.append({"n": n, "m": m, "k": k, "Hk": a, "Hk_star": b,
                                   "formula": formula})
    rep.summary["cases"] = len(rep.trials)
    rep.assertions["formula_exact"] = ok


def _random_partite_small(rng: random.Random, size: int) -> tuple[PartiteGraph, list[int]]:
    k = rng.choice([2, 3])
    m = rng.randint(1, max(1, size // (k + 1)))
    n = size - m
    H = random_partite(n, m, k, Fraction(rng.randint(1, 6), 10), rng.randrange(2 ** 32))
    return H, list(H.vertices)


@suite("oracles")
def _oracles(cfg: ExperimentConfig, rep: RunReport) -> None:
    """Branch and bound matching number, independence profiles and stability
    against brute-force references."""
    th = cfg.thresholds
    ok = True
    for s in cfg.seed_list():
        rng = random.Random(s)
        n = rng.choice(cfg.n_list or [5, 6, 7])
        k = cfg.ks()[0]
        H = random_hypergraph(n, k, Fraction(rng.randint(1, 9), 10), s)
        a, b = nu(H), enumerate_max_matching(H)
        ok &= a == b
        rep.trials.append({"kind": "nu", "seed": s, "n": n, "e": H.e, "nu": a,
                           "enumerated": b})
    base = cfg.seeds if isinstance(cfg.seeds, int) else 0
    prof_ok = True
    for j in range(int(th.get("profile_trials", 0))):
        rng = random.Random(derive(base, "profile", j))
        size = rng.randint(3, int(th.get("profile_max", 14)))
        H, R = _random_partite_small(rng, size)
        got = independence_profile(H, R)
        ref = independence_profile_bruteforce(H, R)
        same = (got.x, got.v) == ref and got.exact
        prof_ok &= same
        rep.trials.append({"kind": "profile", "trial": j, "size": size, "e": H.e,
                           "profile": [got.x, got.v], "bruteforce": list(ref)})
    stab_ok = True
    for j in range(int(th.get("stability_trials", 0))):
        rng = random.Random(derive(base, "stability", j))
        n = rng.randint(3, int(th.get("stability_max_n", 6)))
        k = rng.randint(2, min(3, n))
        if j % 2:
            # closures of random generators hit the stable case often
            gens = [tuple(sorted(rng.sample(range(1, n + 1), k))) for _ in range(rng.randint(1, 3))]
            H = dominance_closure(Hypergraph.from_edges(n, k, gens))
            if rng.random() < 0.5 and H.e > 1:
                drop = sorted(H.edges)[rng.randrange(H.e)]
                H = Hypergraph(n, k, H.edges - {drop})
        else:
            H = random_hypergraph(n, k, Fraction(rng.randint(1, 9), 10), j)
        a = is_stable(H)
        b = dominance_closure(H).edges == H.edges
        stab_ok &= a == b
        rep.trials.append({"kind": "stability", "trial": j, "n": n, "k": k, "e": H.e,
                           "single_step": a, "closure": b})
    rep.summary.update(stable_found=sum(1 for t in rep.trials
                                        if t["kind"] == "stability" and t["closure"]))
    rep.assertions["max_matching_exact"] = ok
    if th.get("profile_trials"):
        rep.assertions["profile_exact"] = prof_ok
    if th.get("stability_trials"):
        rep.assertions["stability_exact"] = stab_ok
