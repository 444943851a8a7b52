"""Command-line entry point: ``digavoid <command> ...``.

Exit status: 0 when the run verified, 1 on an honest failure (budget,
infeasible parameters, failed verification), 2 on a usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from . import constructions as cons
from . import oracle, reductions, regular
from .arclist import format_arc_list, format_dot, parse_arc_list
from .digraph import Digraph, degree_stats, min_out_degree
from .errors import (
    DigavoidError,
    GraphSyntaxError,
    InvalidArc,
    InvalidVertex,
    NotAForest,
    NotATree,
    UnknownPattern,
)
from .patterns import (
    STANDARD_SIX,
    Pattern,
    enumerate_orientations,
    find_pattern,
    pattern_from_name,
    shortest_underlying_cycle,
)
from .resample import ResampleConfig

USAGE_ERRORS = (GraphSyntaxError, InvalidArc, InvalidVertex, UnknownPattern, NotAForest, NotATree, OSError)


@dataclass
class RunConfig:
    command: str
    action: str | None
    input: str | None = None
    out: str | None = None
    report: str | None = None
    dot: str | None = None
    profile: str = "desk"
    seed: int = 0
    params: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.profile not in ("desk", "paper_faithful"):
            raise ValueError(f"unknown profile {self.profile!r}")
        for key in ("k", "d", "t", "length", "s", "a", "b", "n"):
            value = self.params.get(key)
            if value is not None and value < 0:
                raise ValueError(f"--{key} must be non-negative")


def parse_graph_file(text: str) -> Digraph:
    return parse_arc_list(text)


def _read_graph(path: str | None) -> Digraph:
    if path is None or path == "-":
        return parse_graph_file(sys.stdin.read())
    with open(path, encoding="utf-8") as fh:
        return parse_graph_file(fh.read())


def _pattern(params: dict) -> Pattern:
    if params.get("pattern_file"):
        with open(params["pattern_file"], encoding="utf-8") as fh:
            return Pattern(parse_graph_file(fh.read()), params["pattern_file"])
    if not params.get("pattern"):
        raise UnknownPattern("give --pattern NAME or --pattern-file PATH")
    return pattern_from_name(params["pattern"])


def _resample_cfg(cfg: RunConfig, **overrides) -> ResampleConfig:
    p = cfg.params
    base = dict(
        max_rounds=p.get("max_rounds") or 20000,
        restarts=p.get("restarts") or 5,
        seed=cfg.seed,
        profile=cfg.profile,
        override=bool(p.get("override")),
    )
    if p.get("p") is not None:
        base["p"] = p["p"]
    if p.get("d_trim") is not None:
        base["d_trim"] = p["d_trim"]
    base.update(overrides)
    return ResampleConfig(**base)


class Outcome:
    """What a command produced: an optional graph, the report body and whether it verified."""

    def __init__(self, graph: Digraph | None, verified: bool, checks=(), rounds: int = 0, **extra):
        self.graph = graph
        self.verified = verified
        self.checks = list(checks)
        self.rounds = rounds
        self.extra = extra


def _six_checks(D: Digraph, k: int) -> tuple[bool, list]:
    rep = oracle.verify(D, oracle.VerificationSpec(k, tuple(pattern_from_name(n) for n in STANDARD_SIX)))
    return rep.passed, [c.to_json() for c in rep.checks]


# ---------------------------------------------------------------------------
# gen


def _gen(cfg: RunConfig) -> Outcome:
    p = cfg.params
    cap = p.get("cap") or cons.DEFAULT_VERTEX_CAP
    act = cfg.action
    if act == "arborescence":
        lr = cons.out_arborescence(p["d"], p["height"], cap)
        return Outcome(lr.graph, True, layer_sizes=lr.layer_sizes())
    if act == "bipartite-gadget":
        g = cons.build_bipartite_gadget(p["a"], p["b"], p["k"], p["d"], cap, p.get("height"))
        return Outcome(g.graph, True, sidecar=g.sidecar())
    if act == "layered-gadget":
        lr = cons.layered_gadget(p["k"], p["d"], p["t"], cap, p.get("height"))
        return Outcome(lr.graph, True, layer_sizes=lr.layer_sizes(), faithful=lr.faithful, root=lr.root)
    if act == "forest-gadget":
        g = cons.build_forest_gadget(_pattern(p), p["d"], cap, p.get("height"))
        return Outcome(g.graph, True, sidecar=g.sidecar())
    if act == "random-regular":
        return Outcome(cons.random_regular_digraph(p["n"], p["d"], cfg.seed), True)
    if act == "cayley-lift":
        gens = [int(x) for x in p["generators"].split(",")]
        g = cons.random_cayley_lift(p["base"], gens, p["blob"], p["copies"], cfg.seed)
        return Outcome(g, True)
    if act == "random-tripartite":
        g, classes = cons.random_tripartite_digraph(p["n"], p["d"], cfg.seed)
        return Outcome(g, True, classes={str(v): c for v, c in classes.items()})
    raise ValueError(f"unknown generator {act}")


# ---------------------------------------------------------------------------
# reduce


def _stage(stage: str, before: Digraph, after: Digraph, info: dict, rcfg: ResampleConfig) -> dict:
    return reductions.ReductionReport(
        stage=stage, n=after.n, m=after.m,
        min_out_before=min_out_degree(before), min_out_after=min_out_degree(after),
        rounds=int(info.get("rounds", 0)), restarts=int(info.get("restarts", 0)), seed=rcfg.seed,
        verified=True, violations=[], profile=rcfg.profile, faithful=not rcfg.override,
    ).to_json()


def _reduce(cfg: RunConfig) -> Outcome:
    p = cfg.params
    D = _read_graph(cfg.input)
    act = cfg.action
    k = p.get("k")
    info: dict = {}
    if act == "majority-color":
        rcfg = _resample_cfg(cfg)
        two = bool(p.get("two_colors"))
        coloring = reductions.majority_3_coloring(D, rcfg, two_colors=two, stats=info)
        if two:
            return Outcome(D, True, rounds=info.get("rounds", 0), coloring={str(v): c for v, c in coloring.items()},
                           experimental="two-colour variant; no correctness claim")
        out, _ = reductions.tripartite_restrict(D, coloring)
        return Outcome(out, True, rounds=info.get("rounds", 0), coloring={str(v): c for v, c in coloring.items()},
                       stages=[_stage("majority_tripartite", D, out, info, rcfg)])
    if act == "typed":
        rcfg = _resample_cfg(cfg)
        if p.get("classes"):
            with open(p["classes"], encoding="utf-8") as fh:
                classes = {int(v): c for v, c in json.load(fh).items()}
            tp = reductions.TypedPartition(classes)
            base = D
        else:
            coloring = reductions.majority_3_coloring(D, rcfg, stats=info)
            base, tp = reductions.tripartite_restrict(D, coloring)
        out, tps = reductions.extract_typed(base, tp, p["s"])
        return Outcome(out, True, rounds=info.get("rounds", 0),
                       classes={str(v): c for v, c in tps.classes.items()},
                       types={str(v): "".join(t) for v, t in tps.types.items()},
                       stages=[_stage(f"typed_s{p['s']}", D, out, info, rcfg)])
    if act == "avoid-dicycles":
        lengths = [int(x) for x in p["lengths"].split(",")]
        rcfg = _resample_cfg(cfg)
        out = reductions.avoid_directed_cycles(D, lengths, k, rcfg, info)
        return Outcome(out, True, rounds=info["rounds"], stages=[_stage("avoid_directed_cycles", D, out, info, rcfg)])
    if act == "avoid-c35":
        if cfg.profile == "paper_faithful":
            plan = reductions.PipelinePlan.paper_faithful(k, cfg.seed)
        else:
            plan = reductions.PipelinePlan.desk(
                k, cfg.seed, max_rounds=p.get("max_rounds") or 20000, restarts=p.get("restarts") or 5
            )
        try:
            out, reps = reductions.pipeline_avoid_c3_c5(D, k, plan, cfg.seed)
        except reductions.PipelineFailed as exc:
            return Outcome(None, False, checks=[{"name": "pipeline", "passed": False, "detail": str(exc)}],
                           stages=[r.to_json() for r in exc.reports])
        ok, checks = _six_checks(out, k)
        return Outcome(out, ok, checks, rounds=sum(r.rounds for r in reps), stages=[r.to_json() for r in reps])
    if act == "regular-cycle":
        length = p["length"]
        rcfg = _resample_cfg(cfg, p=p["p"] if p.get("p") is not None else float(k) ** -length)
        out = regular.avoid_short_cycle_regular(D, length, k, rcfg, info)
        return Outcome(out, True, rounds=info["rounds"], stages=[_stage(f"regular_cycle_{length}", D, out, info, rcfg)])
    if act == "layered-partition":
        rcfg = _resample_cfg(cfg)
        out, lp = regular.layered_partition(D, p["t"], k, rcfg, info)
        probs = regular.PartitionProbabilities(k, p["t"])
        return Outcome(out, True, rounds=info["rounds"], partition=lp.to_json(),
                       probabilities=[str(x) for x in probs.fractions],
                       stages=[_stage("layered_partition", D, out, info, rcfg)])
    if act == "regular-avoid":
        F = _pattern(p)
        girth = shortest_underlying_cycle(F.graph)
        over = {}
        if girth is not None and p.get("p") is None:
            over["p"] = float(k) ** -girth
        rcfg = _resample_cfg(cfg, **over)
        try:
            out = regular.regular_avoid(D, F, k, rcfg, t=p.get("t"), stats=info)
        except DigavoidError as exc:
            cert = getattr(exc, "certificate", None)
            if cert is None:
                raise
            return Outcome(None, False, checks=[{"name": "regular_avoidable", "passed": False, "detail": str(exc)}],
                           certificate={"verdict": cert.verdict, "heights": {str(a): b for a, b in (cert.heights or {}).items()},
                                        "certificate_verifies": cert.verify(F.graph)})
        extra = {key: info[key] for key in ("branch", "length", "t", "partition") if key in info}
        return Outcome(out, True, rounds=info.get("rounds", 0), **extra,
                       stages=[_stage(f"regular_avoid_{info.get('branch')}", D, out, info, rcfg)])
    raise ValueError(f"unknown reduction {act}")


# ---------------------------------------------------------------------------
# verify / oracle / orient-enum


def _verify(cfg: RunConfig) -> Outcome:
    p = cfg.params
    D = _read_graph(cfg.input)
    names = list(STANDARD_SIX) if p.get("six") else []
    if p.get("patterns"):
        names += [x for x in p["patterns"].split(",") if x]
    layered = None
    if p.get("partition"):
        with open(p["partition"], encoding="utf-8") as fh:
            data = json.load(fh)
        parts = data["partition"] if isinstance(data, dict) else data
        layered = regular.LayeredPartition(tuple(frozenset(x) for x in parts))
    spec = oracle.VerificationSpec(p.get("k") or 0, tuple(pattern_from_name(n) for n in names), layered)
    rep = oracle.verify(D, spec)
    return Outcome(None, rep.passed, [c.to_json() for c in rep.checks])


def _caps(p: dict) -> oracle.OracleCaps:
    return oracle.OracleCaps(p.get("max_vertices") or 12, p.get("max_arcs") or 30, p.get("max_nodes") or 10**7)


def _oracle(cfg: RunConfig) -> Outcome:
    p = cfg.params
    D = _read_graph(cfg.input)
    F = _pattern(p)
    caps = _caps(p)
    if cfg.action == "max-ffree":
        value, witness = oracle.max_f_free_min_outdegree(D, F, caps)
        return Outcome(witness, True, value=value)
    verdict = oracle.check_unavoidable(D, F, p["k"], caps)
    body = verdict.to_json()
    ok = verdict.verdict != "unknown"
    return Outcome(verdict.witness, ok, checks=[{"name": "verdict", "passed": ok, "detail": verdict.verdict}], **body)


def _orient_enum(cfg: RunConfig) -> Outcome:
    p = cfg.params
    pats = enumerate_orientations(p["length"])
    host = _read_graph(cfg.input) if cfg.input else None
    listing = []
    for pat in pats:
        entry = {"name": pat.name, "arcs": [list(a) for a in pat.graph.arc_list()]}
        if host is not None:
            entry["contained"] = find_pattern(host, pat) is not None
        listing.append(entry)
    return Outcome(None, True, count=len(pats), orientations=listing)


DISPATCH = {"gen": _gen, "reduce": _reduce, "verify": _verify, "oracle": _oracle, "orient-enum": _orient_enum}


def run_command(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    t0 = time.perf_counter()
    try:
        cfg.validate()
        outcome = DISPATCH[cfg.command](cfg)
        status = 0 if outcome.verified else 1
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except DigavoidError as exc:
        outcome = Outcome(None, False, checks=[{"name": type(exc).__name__, "passed": False, "detail": str(exc)}])
        for attr in ("stage", "rounds", "restarts", "violations"):
            if getattr(exc, attr, None) not in (None, []):
                outcome.extra[attr] = getattr(exc, attr)
        if getattr(exc, "surviving", None):
            outcome.extra["surviving"] = [f"{ev.kind}:{ev.scope}" for ev in exc.surviving[:20]]
        status = 1
    except (KeyError, TypeError, ValueError) as exc:
        print(f"usage error: {exc}", file=stderr)
        return 2
    g = outcome.graph
    report = {
        "command": cfg.command if cfg.action is None else f"{cfg.command} {cfg.action}",
        "profile": cfg.profile,
        "seed": cfg.seed,
        "params": {k: v for k, v in cfg.params.items() if v is not None},
        "n": g.n if g is not None else None,
        "m": g.m if g is not None else None,
        "min_out": degree_stats(g).min_out if g is not None and g.order else None,
        "verified": outcome.verified,
        "checks": outcome.checks,
        "rounds": outcome.rounds,
        "runtime_ms": int((time.perf_counter() - t0) * 1000),
        **outcome.extra,
    }
    text = json.dumps(report, indent=2, sort_keys=False, default=str) + "\n"
    if g is not None:
        comments = [f"{report['command']} seed={cfg.seed} profile={cfg.profile}"]
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(format_arc_list(g, comments))
        else:
            stdout.write(format_arc_list(g, comments))
        if cfg.dot:
            with open(cfg.dot, "w", encoding="utf-8") as fh:
                fh.write(format_dot(g))
    report_path = cfg.report or (cfg.out + ".json" if cfg.out else None)
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif g is not None:
        stderr.write(text)
    else:
        stdout.write(text)
    return status


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser, graph_input: bool = True) -> None:
    if graph_input:
        p.add_argument("input", nargs="?", help="arc-list file ('-' or omitted: stdin)")
    p.add_argument("-o", "--out", help="write the output graph here (default: stdout)")
    p.add_argument("--report", help="JSON report path (default: <out>.json, or stderr/stdout)")
    p.add_argument("--dot", help="also write the output graph in DOT format")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", choices=("desk", "paper_faithful"), default="desk")


def _resample_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", type=float, help="arc keep probability")
    p.add_argument("--d-trim", type=int, help="out-degree every vertex is trimmed to first")
    p.add_argument("--max-rounds", type=int, help="resampling steps per restart")
    p.add_argument("--restarts", type=int)
    p.add_argument("--override", action="store_true", help="skip arithmetic gates (output still verified)")


def _pattern_flags(p: argparse.ArgumentParser, required: bool = False) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--pattern", help="catalog name, e.g. C5_2, K_onedir_1_2, arc, dipath_3")
    g.add_argument("--pattern-file", help="pattern given as an arc-list file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="digavoid", description="Avoidable-digraph reductions, gadgets and oracles.")
    cmds = parser.add_subparsers(dest="command", required=True)

    gen = cmds.add_parser("gen", help="generate host digraphs and gadgets")
    gsub = gen.add_subparsers(dest="action", required=True)
    g = gsub.add_parser("arborescence")
    _common(g, False)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--height", type=int, required=True)
    g.add_argument("--cap", type=int)
    g = gsub.add_parser("bipartite-gadget")
    _common(g, False)
    for name in ("a", "b", "k", "d"):
        g.add_argument(f"--{name}", type=int, required=True)
    g.add_argument("--height", type=int, help="override the arborescence height (marks output non-faithful)")
    g.add_argument("--cap", type=int)
    g = gsub.add_parser("layered-gadget")
    _common(g, False)
    for name in ("k", "d", "t"):
        g.add_argument(f"--{name}", type=int, required=True)
    g.add_argument("--height", type=int)
    g.add_argument("--cap", type=int)
    g = gsub.add_parser("forest-gadget")
    _common(g, False)
    _pattern_flags(g, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--height", type=int)
    g.add_argument("--cap", type=int)
    g = gsub.add_parser("random-regular")
    _common(g, False)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g = gsub.add_parser("cayley-lift", help="random lift of a Cayley digraph of Z_base")
    _common(g, False)
    g.add_argument("--base", type=int, default=21)
    g.add_argument("--generators", default="1,2,4")
    g.add_argument("--blob", type=int, required=True)
    g.add_argument("--copies", type=int, required=True)
    g = gsub.add_parser("random-tripartite")
    _common(g, False)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)

    red = cmds.add_parser("reduce", help="run a reduction on an input digraph")
    rsub = red.add_subparsers(dest="action", required=True)
    r = rsub.add_parser("majority-color")
    _common(r)
    _resample_flags(r)
    r.add_argument("--two-colors", action="store_true", help="experimental half-fraction variant")
    r = rsub.add_parser("typed")
    _common(r)
    _resample_flags(r)
    r.add_argument("--s", type=int, required=True)
    r.add_argument("--classes", help="JSON mapping vertex -> A/B/C (skips the colouring step)")
    r = rsub.add_parser("avoid-dicycles")
    _common(r)
    _resample_flags(r)
    r.add_argument("--lengths", default="3,5")
    r.add_argument("--k", type=int, required=True)
    r = rsub.add_parser("avoid-c35")
    _common(r)
    _resample_flags(r)
    r.add_argument("--k", type=int, required=True)
    r = rsub.add_parser("regular-cycle")
    _common(r)
    _resample_flags(r)
    r.add_argument("--length", type=int, required=True)
    r.add_argument("--k", type=int, required=True)
    r = rsub.add_parser("layered-partition")
    _common(r)
    _resample_flags(r)
    r.add_argument("--t", type=int, required=True)
    r.add_argument("--k", type=int, required=True)
    r = rsub.add_parser("regular-avoid")
    _common(r)
    _resample_flags(r)
    _pattern_flags(r, required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--t", type=int, help="number of parts for the forest branch (default: automatic)")

    v = cmds.add_parser("verify", help="check degree and pattern postconditions")
    _common(v)
    v.add_argument("--k", type=int, default=0)
    v.add_argument("--patterns", help="comma-separated catalog names")
    v.add_argument("--six", action="store_true", help="forbid all orientations of C3 and C5")
    v.add_argument("--partition", help="JSON layered partition (list of vertex lists or a report)")

    o = cmds.add_parser("oracle", help="exact small-instance oracles")
    osub = o.add_subparsers(dest="action", required=True)
    for name in ("max-ffree", "unavoidable"):
        q = osub.add_parser(name)
        _common(q)
        _pattern_flags(q, required=True)
        if name == "unavoidable":
            q.add_argument("--k", type=int, required=True)
        q.add_argument("--max-vertices", type=int)
        q.add_argument("--max-arcs", type=int)
        q.add_argument("--max-nodes", type=int)

    e = cmds.add_parser("orient-enum", help="list orientations of a cycle up to isomorphism")
    _common(e)
    e.add_argument("--length", type=int, required=True)
    return parser


_NOT_PARAMS = {"command", "action", "input", "out", "report", "dot", "profile", "seed"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items() if k not in _NOT_PARAMS}
    return RunConfig(
        command=ns.command, action=getattr(ns, "action", None), input=getattr(ns, "input", None),
        out=ns.out, report=ns.report, dot=ns.dot, profile=ns.profile, seed=ns.seed, params=params,
    )


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    return run_command(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
