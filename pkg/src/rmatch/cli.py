"""Command line: ``rmatch gen|solve|lp|absorb|nibble|round|verify|experiment``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import constructions as C
from . import exact
from .absorption import AbsorbConfig, AbsorptionError, build_absorbing_matching
from .core import InputError, Matching, MatchStatus, PartiteGraph, check_matching
from .experiments import ExperimentConfig, experiment
from .formats import (dumps_graph, family_to_json, fraction_str, read_input, witness_to_json,
                      write_graph)
from .lp import (augment_by_cover, fractional_cover, fractional_matching, fractional_pm_exists,
                 sort_by_weight)
from .pipeline import PipelineConfig, solve, valid_rainbow
from .rounding import (NibbleParams, desk_preset, multiplicity_stats, nibble_trace,
                       paper_preset, sample_batch)


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print(text)


def _trace_out(args, trace) -> None:
    if args.trace_out and trace is not None:
        Path(args.trace_out).write_text(json.dumps(trace.to_list(), indent=2) + "\n")


_CONSTRUCTIONS = ["hk", "hkstar", "scripth", "extremal-family", "random-family",
                  "complete", "almost-regular"]


def cmd_gen(args) -> int:
    kind = args.construction
    n, m, k = args.n, args.m, args.k
    if kind == "hk":
        obj = C.make_Hk(n, m, k)
    elif kind == "hkstar":
        obj = C.make_Hk_star(n, m, k)
    elif kind == "scripth":
        obj = C.script_H(n, m, k)
    elif kind == "complete":
        obj = C.complete_partite(n, m, k)
    elif kind == "extremal-family":
        obj = C.extremal_family(n, k)
    elif kind == "random-family":
        spec = C.ThresholdSpec(n, k, args.t or n // k)
        obj = C.sample_threshold_family(spec, args.slack, args.seed)
    elif kind == "almost-regular":
        obj = C.random_almost_regular(n, k, args.degree, args.max_pair, args.seed)
    else:  # argparse restricts choices
        raise AssertionError(kind)
    text = (json.dumps(family_to_json(obj)) + "\n" if isinstance(obj, C.Family)
            else dumps_graph(obj))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _pipeline_config(args) -> PipelineConfig:
    kw = {"seed": args.seed, "budget": args.budget, "fallback": args.fallback,
          "labeling": args.labeling}
    if args.epsilon is not None:
        e = args.epsilon
        kw.update(epsilon=e, eta=e / 10, rho=e / 100, rho_prime=e / 1000)
    return PipelineConfig(**kw)


def _exact_solve(obj, mode: str, budget: int):
    if mode == "rainbow":
        if not isinstance(obj, C.Family):
            raise InputError("--mode rainbow needs a family input")
        return exact.rainbow_matching(obj, budget)
    if isinstance(obj, C.Family):
        obj = C.lift_family(obj)
    if mode == "max":
        return exact.max_matching(obj, budget)
    return exact.has_perfect_matching(obj, budget)


def cmd_solve(args) -> int:
    obj = read_input(args.input)
    if args.mode == "pipeline":
        res = solve(obj, _pipeline_config(args))
        _trace_out(args, res.info.get("trace"))
        info = {"branch": res.info.get("branch"),
                "fallback_used": res.info.get("fallback_used", False)}
        head = (f"(branch {info['branch']}, "
                f"fallback {'yes' if info['fallback_used'] else 'no'})")
    else:
        res = _exact_solve(obj, args.mode, args.budget)
        info = {"nodes": res.nodes_explored}
        head = f"({res.nodes_explored} nodes)"
    witness = witness_to_json(res.witness)
    payload = {"status": res.status.value, "mode": args.mode, "witness": witness} | info
    lines = [f"status: {res.status.value} {head}"]
    if res.witness is not None:
        items = res.witness.items() if isinstance(res.witness, dict) else enumerate(res.witness)
        lines += [f"  {c}: {' '.join(map(str, e))}" for c, e in items]
    if args.witness_out and res.witness is not None:
        Path(args.witness_out).write_text(json.dumps(witness, indent=2) + "\n")
    _emit(args, payload, "\n".join(lines))
    return 0 if res.found else 1


def cmd_lp(args) -> int:
    H = read_input(args.input)
    if isinstance(H, C.Family):
        H = C.lift_family(H)
    if args.problem == "matching":
        out = fractional_matching(H)
    elif args.problem == "cover":
        out = fractional_cover(H, lexicographic=args.lexicographic)
    else:
        ok = fractional_pm_exists(H)
        _emit(args, {"pm_exists": ok}, f"fractional perfect matching: {'yes' if ok else 'no'}")
        return 0
    weights = {str(key) if not isinstance(key, tuple) else " ".join(map(str, key)): fraction_str(w)
               for key, w in sorted(out.certificate.weights.items())}
    _emit(args, {"value": fraction_str(out.value), "weights": weights, "note": out.basis_note},
          f"value: {fraction_str(out.value)}\n" + "\n".join(f"  {k}: {w}" for k, w in weights.items()))
    if args.augment_out:
        if not isinstance(H, PartiteGraph):
            raise InputError("--augment-out needs a partite input")
        cover = out if args.problem == "cover" else fractional_cover(H, lexicographic=True)
        Hs, ws, mapping = sort_by_weight(H, cover.certificate)
        write_graph(augment_by_cover(Hs, ws), args.augment_out)
        side = {"omega": {str(v): fraction_str(w) for v, w in sorted(ws.weights.items())},
                "relabel": {str(a): b for a, b in sorted(mapping.items())}}
        Path(str(args.augment_out) + ".json").write_text(json.dumps(side, indent=2) + "\n")
    return 0


def cmd_absorb(args) -> int:
    H = read_input(args.input)
    if isinstance(H, C.Family):
        H = C.lift_family(H)
    cfg = AbsorbConfig(args.b, args.c, args.seed, retries=args.retries)
    try:
        M, diag = build_absorbing_matching(H, cfg)
    except AbsorptionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.report_out and exc.diagnostics is not None:
            Path(args.report_out).write_text(json.dumps(exc.diagnostics.as_dict(), indent=2))
        return 1
    report = diag.as_dict() | {"matching": witness_to_json(M),
                               "family": [sorted(Q) for Q in M.family]}
    if args.report_out:
        Path(args.report_out).write_text(json.dumps(report, indent=2) + "\n")
    _emit(args, report, f"absorbing matching: {len(M)} edges from {len(M.family)} sets "
                        f"(sampled {diag.sampled}, eq1={diag.eq1}, eq2={diag.eq2}, eq3={diag.eq3})")
    return 0


def cmd_nibble(args) -> int:
    H = read_input(args.input)
    base = H.base if isinstance(H, PartiteGraph) else H
    tr = nibble_trace(base, NibbleParams(args.bite, args.a, args.rounds, args.seed, args.clash))
    if args.trace_out:
        Path(args.trace_out).write_text(json.dumps(tr.rounds, indent=2) + "\n")
    n = len(base.vertices)
    payload = {"size": len(tr.matching), "covered": tr.coverage, "n": n,
               "rounds": len(tr.rounds), "best_round": tr.best_round,
               "matching": witness_to_json(tr.matching)}
    _emit(args, payload, f"matching of size {len(tr.matching)} covers {tr.coverage}/{n} "
                         f"vertices after {len(tr.rounds)} rounds")
    return 0


def cmd_round(args) -> int:
    preset = paper_preset(args.n) if args.preset == "paper" else desk_preset()
    N = args.batch if args.batch is not None else preset.N
    p = args.p if args.p is not None else preset.p
    if args.input:
        H = read_input(args.input)
    else:
        n = preset.n if args.preset == "desk" else args.n
        H = C.random_partite(n, n // 3, 3, 0)  # edgeless host: only vertex statistics
    batch = sample_batch(H, N, p, args.seed)
    st = multiplicity_stats(batch, H, preset.tolerance)
    payload = {"N": N, "p": fraction_str(p), "max_pair": st.max_pair, "max_edge": st.max_edge,
               "bands": st.bands, "vertex_outside_band": st.outside_fraction}
    if args.stats_out:
        Path(args.stats_out).write_text(json.dumps(payload, indent=2) + "\n")
        hist: dict[int, int] = {}
        for y in st.y_vertex.values():
            hist[y] = hist.get(y, 0) + 1
        with open(str(args.stats_out) + ".csv", "w") as fh:
            fh.write("y,count\n")
            fh.writelines(f"{y},{c}\n" for y, c in sorted(hist.items()))
    _emit(args, payload, "\n".join(f"{k}: {v}" for k, v in payload.items()))
    return 0


def cmd_verify(args) -> int:
    obj = read_input(args.input)
    data = json.loads(Path(args.witness).read_text())
    if isinstance(obj, C.Family):
        witness = {int(c): tuple(e) for c, e in data.items()}
        ok = valid_rainbow(obj, witness)
        _emit(args, {"valid": ok}, f"rainbow matching: {'valid' if ok else 'INVALID'}")
        return 0 if ok else 1
    status, msg = check_matching(obj, Matching.of(data))
    _emit(args, {"status": status.value, "message": msg}, f"{status.value}: {msg}")
    return 0 if status is not MatchStatus.NOT_MATCHING else 1


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    report = experiment(cfg)
    out = args.out or Path(args.config).with_suffix(".report.json")
    csv_path = args.csv or Path(out).with_suffix(".csv")
    report.write(out, csv_path)
    _emit(args, {"passed": report.passed, "assertions": report.assertions, "report": str(out)},
          "\n".join(f"{'PASS' if v else 'FAIL'}  {k}" for k, v in report.assertions.items())
          + f"\nreport: {out}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rmatch", description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--format", choices=["text", "json"], default="text")
    ap.add_argument("--trace-out", type=Path, default=None)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a construction")
    g.add_argument("--construction", choices=_CONSTRUCTIONS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--k", type=int, default=4)
    g.add_argument("--t", type=int, default=None)
    g.add_argument("--slack", type=_frac, default=Fraction(0))
    g.add_argument("--degree", type=int, default=50)
    g.add_argument("--max-pair", type=int, default=3)
    g.add_argument("--out", type=Path, default=None)
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="exact search or the staged pipeline")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--mode", choices=["pipeline", "max", "perfect", "rainbow"],
                   default="pipeline")
    s.add_argument("--witness-out", type=Path, default=None)
    s.add_argument("--epsilon", type=_frac, default=None)
    s.add_argument("--budget", type=int, default=10 ** 6)
    s.add_argument("--fallback", choices=["exact", "fail"], default="exact")
    s.add_argument("--labeling", choices=["fixed-labeling", "class-preserving-search"],
                   default="fixed-labeling")
    s.set_defaults(func=cmd_solve)

    lp = sub.add_parser("lp", help="fractional matching / cover")
    lp.add_argument("--in", dest="input", required=True)
    lp.add_argument("--problem", choices=["matching", "cover", "pm-exists"], default="matching")
    lp.add_argument("--lexicographic", action="store_true")
    lp.add_argument("--augment-out", type=Path, default=None)
    lp.set_defaults(func=cmd_lp)

    a = sub.add_parser("absorb", help="build an absorbing matching")
    a.add_argument("--in", dest="input", required=True)
    a.add_argument("--b", type=_frac, default=Fraction(1, 10))
    a.add_argument("--c", type=_frac, default=Fraction(1, 20))
    a.add_argument("--retries", type=int, default=5)
    a.add_argument("--report-out", type=Path, default=None)
    a.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    a.set_defaults(func=cmd_absorb)

    nb = sub.add_parser("nibble", help="semi-random matching")
    nb.add_argument("--in", dest="input", required=True)
    nb.add_argument("--a", type=_frac, default=Fraction(1, 20))
    nb.add_argument("--bite", type=_frac, default=Fraction(1, 2))
    nb.add_argument("--rounds", type=int, default=200)
    nb.add_argument("--clash", choices=["drop-all", "keep-one"], default="keep-one")
    nb.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    nb.set_defaults(func=cmd_nibble)

    r = sub.add_parser("round", help="vertex-sampled batch statistics")
    r.add_argument("--in", dest="input", default=None)
    r.add_argument("--batch", type=int, default=None)
    r.add_argument("--p", type=_frac, default=None)
    r.add_argument("--preset", choices=["paper", "desk"], default="desk")
    r.add_argument("--n", type=int, default=2000)
    r.add_argument("--stats-out", type=Path, default=None)
    r.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    r.set_defaults(func=cmd_round)

    v = sub.add_parser("verify", help="validate a witness file")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--witness", required=True)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", help="run a JSON-configured sweep")
    e.add_argument("config")
    e.add_argument("--out", type=Path, default=None)
    e.add_argument("--csv", type=Path, default=None)
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    warnings.simplefilter("ignore", C.ParameterRangeWarning)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
