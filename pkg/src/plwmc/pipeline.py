"""Program + queries + evidence -> weighted CNF, with per-stage timing."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .cnf import Cnf, rules_to_cnf
from .errors import ValidationError
from .grounder import DEFAULT_RULE_BUDGET, GroundProgram, ground, ground_full
from .logic import Program
from .parser import parse_program, validate
from .weighted import WeightedCnf, build_weighted_cnf


@dataclass
class Prepared:
    program: Program
    ground: GroundProgram
    phi_r: Cnf
    wcnf: WeightedCnf
    timings: dict = field(default_factory=dict)

    @property
    def queries(self):
        return self.ground.queries

    def sizes(self):
        return {
            "ground_rules": len(self.ground.rules),
            "prob_facts": len(self.ground.prob_facts),
            "cnf_vars": self.wcnf.cnf.num_vars,
            "cnf_clauses": len(self.wcnf.cnf.clauses),
        }


class _Stopwatch:
    def __init__(self, timings, name):
        self.timings, self.name = timings, name

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.timings[self.name] = self.timings.get(self.name, 0.0) + time.perf_counter() - self.t0


def stage(timings, name):
    return _Stopwatch(timings, name)


def prepare(program, *, queries=None, evidence=None, full_grounding=False,
            budget=DEFAULT_RULE_BUDGET, check=True) -> Prepared:
    """Run parse (if given text), validate, ground, convert and weight."""
    timings = {}
    if isinstance(program, str):
        with stage(timings, "parse"):
            program = parse_program(program)
    if queries or evidence:
        program = program.with_task(queries, evidence)
    if check:
        diags = validate(program)
        if diags:
            raise ValidationError(diags)
    with stage(timings, "ground"):
        lg = (ground_full if full_grounding else ground)(program, budget)
    with stage(timings, "cnf"):
        phi_r = rules_to_cnf(lg)
    with stage(timings, "weights"):
        wc = build_weighted_cnf(lg, phi_r)
    return Prepared(program, lg, phi_r, wc, timings)
