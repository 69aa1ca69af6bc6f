"""Weighted CNF (rules, evidence and literal weights) and its MLN reading."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field

from .cnf import Cnf, parse_dimacs, to_dimacs
from .errors import PartialAssignmentError, PlwmcError
from .grounder import GroundProgram


@dataclass(frozen=True)
class WeightedCnf:
    cnf: Cnf
    weight_pos: dict
    weight_neg: dict
    prob_vars: frozenset
    num_rule_clauses: int = field(default=0, compare=False)  # leading clauses that are phi_r

    def weight(self, lit: int) -> float:
        if lit > 0:
            return self.weight_pos.get(lit, 1.0)
        return self.weight_neg.get(-lit, 1.0)

    def conjoin(self, *clauses) -> "WeightedCnf":
        return WeightedCnf(self.cnf.conjoin(*clauses), self.weight_pos, self.weight_neg, self.prob_vars,
                           self.num_rule_clauses)

    def var(self, name) -> int:
        return self.cnf.var_of[name]

    def probability(self, v: int) -> float:
        return self.weight_pos[v]


@dataclass(frozen=True)
class GroundMln:
    hard_clauses: tuple
    soft_units: tuple  # (literal, weight > 0)
    num_vars: int
    var_names: dict = field(default_factory=dict, compare=False)
    # Optional structure from the program: the probabilistic variables, and
    # how many leading hard clauses define every other variable from them.
    support: tuple = ()
    num_definitions: int = 0


def build_weighted_cnf(lg: GroundProgram, phi_r: Cnf) -> WeightedCnf:
    """phi = phi_r plus evidence units; p/1-p on probabilistic literals.

    Probabilistic facts with p in {0, 1} additionally get a hard unit clause.
    """
    var_of = phi_r.var_of
    extra = []
    for a, value in lg.evidence:
        if a not in var_of:
            raise PlwmcError(f"evidence atom {a} has no CNF variable")
        v = var_of[a]
        extra.append((v,) if value else (-v,))
    weight_pos, weight_neg = {}, {}
    for f in lg.prob_facts:
        v = var_of[f.atom]
        weight_pos[v] = f.prob
        weight_neg[v] = 1.0 - f.prob
        if f.prob == 1.0:
            extra.append((v,))
        elif f.prob == 0.0:
            extra.append((-v,))
    return WeightedCnf(phi_r.conjoin(*extra), weight_pos, weight_neg, frozenset(weight_pos),
                       len(phi_r.clauses))


def _as_var_assignment(wc: WeightedCnf, assignment) -> dict:
    if isinstance(assignment, Mapping):
        items = assignment.items()
    else:
        items = ((abs(l), l > 0) for l in assignment)
    var_of = wc.cnf.var_of
    out = {}
    for k, value in items:
        out[k if isinstance(k, int) else var_of[k]] = bool(value)
    return out


def world_weight(wc: WeightedCnf, assignment) -> float:
    """Product of literal weights of a total assignment.

    ``assignment`` may be a mapping from variable index or variable name
    (atom) to bool, or an iterable of signed literals.
    """
    values = _as_var_assignment(wc, assignment)
    missing = [v for v in range(1, wc.cnf.num_vars + 1) if v not in values]
    if missing:
        names = ", ".join(str(wc.cnf.var_names[v]) for v in missing[:5])
        raise PartialAssignmentError(f"assignment misses {len(missing)} variable(s): {names}")
    w = 1.0
    for v in range(1, wc.cnf.num_vars + 1):
        w *= wc.weight(v if values[v] else -v)
    return w


def satisfies(clauses, values) -> bool:
    return all(any(values[abs(l)] == (l > 0) for l in c) for c in clauses)


def to_mln(wc: WeightedCnf) -> GroundMln:
    """Hard clauses plus one positive-weight soft unit per biased fact."""
    units = {c[0] for c in wc.cnf.clauses if len(c) == 1}
    soft = []
    for v in sorted(wc.prob_vars):
        p = wc.weight_pos[v]
        if p in (0.0, 1.0):
            forced = v if p == 1.0 else -v
            if forced not in units:
                raise PlwmcError(f"deterministic fact {wc.cnf.var_names[v]} is not folded into a hard clause")
            continue
        if p > 0.5:
            soft.append((v, math.log(p / (1.0 - p))))
        elif p < 0.5:
            soft.append((-v, math.log((1.0 - p) / p)))
    return GroundMln(tuple(wc.cnf.clauses), tuple(soft), wc.cnf.num_vars, wc.cnf.var_names,
                     tuple(sorted(wc.prob_vars)), wc.num_rule_clauses)


def to_weighted_dimacs(wc: WeightedCnf) -> str:
    """DIMACS with ``c p weight <lit> <value>`` lines.

    Both polarities are written for every probabilistic variable; other
    literals are written only when their weight differs from 1.
    """
    lines = []
    for v in range(1, wc.cnf.num_vars + 1):
        for lit in (v, -v):
            w = wc.weight(lit)
            if v in wc.prob_vars or w != 1.0:
                lines.append(f"p weight {lit} {w!r}")
    return to_dimacs(wc.cnf, comments=lines)


def parse_weighted_dimacs(text: str):
    """Inverse of :func:`to_weighted_dimacs` up to variable names.

    Returns ``(num_vars, clauses, names, weights)`` with ``weights`` a map
    from signed literal to float.
    """
    num_vars, clauses, names, comments = parse_dimacs(text)
    weights = {}
    for c in comments:
        parts = c.split()
        if len(parts) >= 4 and parts[0] == "p" and parts[1] == "weight":
            weights[int(parts[2])] = float(parts[3])
    return num_vars, clauses, names, weights
