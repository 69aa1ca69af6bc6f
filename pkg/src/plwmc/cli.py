"""Command-line front end.

Every inference command reads a program file, applies ``--query`` and
``--evidence`` on top of the in-file directives, runs the pipeline and
prints a report (JSON by default).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .compiler import DEFAULT_NODE_BUDGET, compile_cnf, smooth, to_nnf
from .cnf import to_dimacs
from .errors import PlwmcError
from .grounder import DEFAULT_RULE_BUDGET
from .inference import circuit_wmc, literal_counts, marginals_two_wmc, mpe_exact
from .logic import Atom
from .maxsat import MwsConfig, solve_mpe, to_maxsat
from .oracle import MAX_ORACLE_FACTS, conditional_marginals, oracle_distribution
from .parser import parse_atom, parse_evidence_flag, parse_program
from .pipeline import prepare, stage
from .sampler import INNER_MODES, McSatConfig, mc_sat
from .weighted import to_mln, to_weighted_dimacs

COMMANDS = ("marginals", "mpe", "sample", "ground", "cnf", "compile", "oracle")


class _Parser(argparse.ArgumentParser):
    # usage errors share the exit code of malformed input
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("input", help="program file")
    p.add_argument("--query", "-q", action="append", default=[], metavar="ATOM",
                   help="add a query atom (repeatable)")
    p.add_argument("--evidence", "-e", action="append", default=[], metavar="ATOM=BOOL",
                   help="set evidence, overriding in-file evidence for that atom (repeatable)")
    p.add_argument("--format", choices=("json", "tsv", "text"), default="json")
    p.add_argument("--full-grounding", action="store_true",
                   help="ground everything instead of the relevant ground program")
    p.add_argument("--rule-budget", type=int, default=DEFAULT_RULE_BUDGET)
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plwmc", description="Inference for probabilistic logic programs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("marginals", help="exact conditional marginals of the queries")
    _common(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--traversal", dest="mode", action="store_const", const="traversal",
                      help="compile once, read all marginals off the circuit (default)")
    mode.add_argument("--two-wmc", dest="mode", action="store_const", const="two-wmc",
                      help="one weighted model count per query plus one for the evidence")
    p.set_defaults(mode="traversal")

    p = sub.add_parser("mpe", help="most probable world given the evidence")
    _common(p)
    p.add_argument("--exact", action="store_true", help="max-product on the compiled circuit")
    p.add_argument("--max-flips", type=int, default=None)
    p.add_argument("--max-restarts", type=int, default=10)
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sample", help="approximate marginals by MC-SAT")
    _common(p)
    p.add_argument("--num-samples", type=int, default=10_000)
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--inner-flips", type=int, default=None)
    p.add_argument("--inner-noise", type=float, default=0.5)
    p.add_argument("--temperature", type=float, default=None,
                   help="inner walk temperature (default: scaled to the instance)")
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--inner", choices=INNER_MODES, default="auto",
                   help="inner sampler of each MC-SAT step")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("ground", help="print the relevant ground program")
    _common(p)

    p = sub.add_parser("cnf", help="print the rule CNF (or weighted CNF) in DIMACS")
    _common(p)
    p.add_argument("--weighted", action="store_true",
                   help="include evidence clauses and literal weights")

    p = sub.add_parser("compile", help="print the smoothed circuit in NNF text")
    _common(p)

    p = sub.add_parser("oracle", help="enumerate total choices (small programs only)")
    _common(p)
    p.add_argument("--max-facts", type=int, default=MAX_ORACLE_FACTS)
    return parser


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise PlwmcError(f"cannot read {path}: {exc.strerror}") from exc


def _prepare(args):
    timings = {}
    with stage(timings, "parse"):
        program = parse_program(_read(args.input))
        queries = [parse_atom(q) for q in args.query]
        evidence = [parse_evidence_flag(e) for e in args.evidence]
    pp = prepare(program, queries=queries, evidence=evidence,
                 full_grounding=args.full_grounding, budget=args.rule_budget)
    pp.timings = {**timings, **pp.timings}
    return pp


def _compile(pp, args):
    with stage(pp.timings, "compile"):
        circuit = smooth(compile_cnf(pp.wcnf.cnf, budget=args.node_budget,
                                     priority=pp.wcnf.prob_vars))
    return circuit


def _cmd_marginals(args):
    pp = _prepare(args)
    sizes = pp.sizes()
    if args.mode == "two-wmc":
        with stage(pp.timings, "inference"):
            rep = marginals_two_wmc(pp.wcnf, pp.queries, budget=args.node_budget)
    else:
        circuit = _compile(pp, args)
        sizes["circuit_nodes"] = len(circuit.nodes)
        sizes["circuit_edges"] = circuit.num_edges
        with stage(pp.timings, "inference"):
            from .inference import marginals_traversal

            rep = marginals_traversal(circuit, pp.wcnf, pp.queries)
    out = {"command": "marginals", "mode": args.mode, **rep.as_dict()}
    return out, pp, sizes


def _cmd_sample(args):
    pp = _prepare(args)
    cfg = McSatConfig(num_samples=args.num_samples, burn_in=args.burn_in,
                      inner_flips=args.inner_flips, inner_noise=args.inner_noise, seed=args.seed,
                      temperature=args.temperature, chains=args.chains, inner=args.inner)
    with stage(pp.timings, "inference"):
        est = mc_sat(to_mln(pp.wcnf), list(pp.queries), cfg)
    out = {
        "command": "sample",
        "mode": "mc-sat",
        "evidence_prob": None,
        "marginals": {str(a): p for a, p in est.marginals.items()},
        "samples_used": est.samples_used,
        "acceptance": est.acceptance,
        "inner": est.inner,
        "seed": args.seed,
    }
    return out, pp, pp.sizes()


def _original_state(pp, world):
    names = set(pp.ground.atom_universe)
    return {str(a): bool(v) for a, v in world.items() if isinstance(a, Atom) and a in names}


def _cmd_mpe(args):
    pp = _prepare(args)
    sizes = pp.sizes()
    if args.exact:
        circuit = _compile(pp, args)
        sizes["circuit_nodes"] = len(circuit.nodes)
        with stage(pp.timings, "inference"):
            world, weight = mpe_exact(circuit, pp.wcnf)
            evidence_prob = circuit_wmc(circuit, pp.wcnf)
        return {
            "command": "mpe", "mode": "exact", "feasible": True,
            "state": _original_state(pp, world), "weight": weight,
            "evidence_prob": evidence_prob, "probability": weight / evidence_prob,
        }, pp, sizes
    cfg = MwsConfig(max_flips=args.max_flips, max_restarts=args.max_restarts, noise=args.noise,
                    seed=args.seed)
    with stage(pp.timings, "inference"):
        res = solve_mpe(to_maxsat(pp.wcnf), cfg, pp.wcnf)
    return {
        "command": "mpe", "mode": "maxwalksat", "feasible": res.feasible,
        "state": _original_state(pp, res.world) if res.world is not None else None,
        "weight": res.weight, "evidence_prob": None, "probability": None,
        "log_cost": res.log_cost if res.feasible else None,
    }, pp, sizes


def _cmd_oracle(args):
    timings = {}
    pp = _prepare(args)
    with stage(timings, "oracle"):
        dist = oracle_distribution(pp.ground, max_facts=args.max_facts)
        rep = conditional_marginals(dist, pp.queries, pp.ground.evidence)
    pp.timings.update(timings)
    facts = [f.atom for f in pp.ground.prob_facts]
    worlds = sorted(dist.items(), key=lambda kv: (-kv[1], sorted(str(a) for a in kv[0].true_atoms())))
    table = [{
        "choice": sorted(str(a) for a in facts if w[a]),
        "true": sorted(str(a) for a in w.true_atoms()),
        "probability": p,
        "consistent": w.consistent_with(pp.ground.evidence),
    } for w, p in worlds]
    out = {"command": "oracle", "worlds": table, **rep.as_dict()}
    return out, pp, pp.sizes()


def _emit_text(out, fmt):
    lines = []
    if out.get("worlds") is not None:
        for row in out["worlds"]:
            mark = "" if row["consistent"] else "  (inconsistent with evidence)"
            if fmt == "tsv":
                lines.append(f"{','.join(row['true'])}\t{row['probability']!r}")
            else:
                lines.append(f"{row['probability']:.6g}\t{{{', '.join(row['true'])}}}{mark}")
    if "state" in out:
        if out["state"] is None:
            lines.append("no feasible state found")
        else:
            for a, v in out["state"].items():
                lines.append(f"{a}\t{'true' if v else 'false'}" if fmt == "tsv"
                             else f"{a} = {'true' if v else 'false'}")
        if fmt == "text":
            lines.append(f"weight = {out['weight']!r}")
            if out.get("probability") is not None:
                lines.append(f"P(state | e) = {out['probability']!r}")
    if "marginals" in out:
        for a, p in out["marginals"].items():
            lines.append(f"{a}\t{p!r}" if fmt == "tsv" else f"P({a} | e) = {p!r}")
        if fmt == "text" and out.get("evidence_prob") is not None:
            lines.append(f"P(e) = {out['evidence_prob']!r}")
    return "\n".join(lines) + "\n"


def run(args, stdout=None) -> int:
    """Execute parsed arguments; returns the exit status."""
    stdout = stdout or sys.stdout
    t0 = time.perf_counter()
    cmd = args.command
    if cmd in ("ground", "cnf", "compile"):
        pp = _prepare(args)
        if cmd == "ground":
            stdout.write(pp.ground.format())
        elif cmd == "cnf":
            stdout.write(to_weighted_dimacs(pp.wcnf) if args.weighted else to_dimacs(pp.phi_r))
        else:
            stdout.write(to_nnf(_compile(pp, args)))
        return 0
    handler = {"marginals": _cmd_marginals, "sample": _cmd_sample, "mpe": _cmd_mpe,
               "oracle": _cmd_oracle}[cmd]
    out, pp, sizes = handler(args)
    pp.timings["total"] = time.perf_counter() - t0
    out["timings"] = {k: round(v, 6) for k, v in pp.timings.items()}
    out["sizes"] = sizes
    if args.format == "json":
        stdout.write(json.dumps(out) + "\n")
    else:
        stdout.write(_emit_text(out, args.format))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except PlwmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except RecursionError:
        print("error: resource budget exceeded (recursion depth)", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
