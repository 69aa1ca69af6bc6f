"""Relevant and complete grounding of function-free programs.

Both groundings share one instance generator: a rule instance is produced
when its positive body atoms can be matched, left to right, against the
atoms that are derivable in the relaxed program (every probabilistic fact
assumed true, every negative literal assumed satisfiable). Instances whose
positive body can never hold are therefore never materialised by either.

``ground`` backchains from the queries and evidence, memoising on ground
atoms, and drops rule instances that are inactive under the evidence.
``ground_full`` keeps every instance over the reachable constants.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import cached_property

from .errors import GroundingBudgetError
from .logic import Atom, Constant, Compound, ProbFact, Program, Rule, match_atom

DEFAULT_RULE_BUDGET = 1_000_000


@dataclass(frozen=True)
class GroundProgram:
    prob_facts: tuple
    rules: tuple
    atom_universe: tuple
    queries: tuple = ()
    evidence: tuple = ()

    @cached_property
    def prob(self):
        """Map from probabilistic atom to its probability."""
        return {f.atom: f.prob for f in self.prob_facts}

    @cached_property
    def rules_by_head(self):
        out = {}
        for r in self.rules:
            out.setdefault(r.head, []).append(r)
        return out

    @cached_property
    def derived_atoms(self):
        return tuple(a for a in self.atom_universe if a not in self.prob)

    def evidence_map(self):
        return dict(self.evidence)

    def to_program(self) -> Program:
        return Program(self.prob_facts, self.rules, self.queries, self.evidence)

    def format(self) -> str:
        """Deterministic listing: facts then rules, each sorted lexicographically."""
        facts = sorted(str(f) for f in self.prob_facts)
        rules = sorted(str(r) for r in self.rules)
        lines = facts + rules
        lines += [f"query({q})." for q in self.queries]
        lines += [f"evidence({a}, {'true' if v else 'false'})." for a, v in self.evidence]
        return "\n".join(lines) + ("\n" if lines else "")


class _Index:
    """Ground atoms indexed by predicate signature."""

    def __init__(self):
        self.by_sig = {}

    def add(self, atom):
        bucket = self.by_sig.setdefault(atom.signature, {})
        if atom in bucket:
            return False
        bucket[atom] = None
        return True

    def __contains__(self, atom):
        return atom in self.by_sig.get(atom.signature, ())

    def __len__(self):
        return sum(len(b) for b in self.by_sig.values())

    def candidates(self, pattern):
        return self.by_sig.get(pattern.signature, ())


def _constants(program):
    seen = {}

    def visit(term):
        if isinstance(term, Constant):
            seen.setdefault(term, None)
        elif isinstance(term, Compound):
            for a in term.args:
                visit(a)

    atoms = [f.atom for f in program.prob_facts]
    for r in program.rules:
        atoms.append(r.head)
        atoms.extend(l.atom for l in r.body)
    atoms.extend(program.queries)
    atoms.extend(a for a, _ in program.evidence)
    for a in atoms:
        for t in a.args:
            visit(t)
    return list(seen)


def _instances(atom, constants):
    vs = list(dict.fromkeys(atom.variables()))
    if not vs:
        yield atom
        return
    for combo in itertools.product(constants, repeat=len(vs)):
        yield atom.substitute(dict(zip(vs, combo)))


def _join(literals, index, subst):
    """Enumerate substitutions making every positive literal an indexed atom."""
    if not literals:
        yield subst
        return
    first, rest = literals[0], literals[1:]
    pattern = first.atom.substitute(subst)
    if pattern.is_ground():
        if pattern in index:
            yield from _join(rest, index, subst)
        return
    for cand in list(index.candidates(pattern)):
        ext = match_atom(pattern, cand, subst)
        if ext is not None:
            yield from _join(rest, index, ext)


class _Grounder:
    def __init__(self, program: Program, budget: int):
        self.program = program
        self.budget = budget
        self.constants = _constants(program)
        self.rule_count = 0
        self.possible = self._relaxed_model()

    def _charge(self, n=1):
        self.rule_count += n
        if self.rule_count > self.budget:
            raise GroundingBudgetError(
                f"grounding exceeded the budget of {self.budget} ground rules/atoms"
            )

    def ground_prob_facts(self):
        out = []
        for f in self.program.prob_facts:
            for inst in _instances(f.atom, self.constants):
                self._charge()
                out.append(ProbFact(f.prob, inst))
        return out

    def _relaxed_model(self):
        index = _Index()
        for f in self.program.prob_facts:
            for inst in _instances(f.atom, self.constants):
                self._charge()
                index.add(inst)
        positive_bodies = [
            (r, tuple(l for l in r.body if l.positive)) for r in self.program.rules
        ]
        changed = True
        while changed:
            changed = False
            for rule, pos in positive_bodies:
                for subst in list(_join(pos, index, {})):
                    head = rule.head.substitute(subst)
                    if index.add(head):
                        self._charge()
                        changed = True
        return index

    def instances_for(self, rule, subst):
        pos = tuple(l for l in rule.body if l.positive)
        for theta in _join(pos, self.possible, subst):
            yield rule.substitute(theta)


def _strip(rule):
    return Rule(rule.head, rule.body)


def ground(program: Program, budget: int = DEFAULT_RULE_BUDGET) -> GroundProgram:
    """Relevant ground program with respect to the queries and evidence."""
    g = _Grounder(program, budget)
    evidence = program.evidence_map()
    prob_patterns = program.prob_facts
    rules, rule_set, facts = [], set(), []
    universe = {}
    queue = deque(list(program.queries) + [a for a, _ in program.evidence])
    while queue:
        a = queue.popleft()
        if a in universe:
            continue
        universe[a] = None
        for f in prob_patterns:
            if match_atom(f.atom, a) is not None:
                facts.append(ProbFact(f.prob, a))
                break
        for rule in program.rules:
            theta = match_atom(rule.head, a)
            if theta is None:
                continue
            for inst in g.instances_for(rule, theta):
                if any(evidence.get(l.atom) is (not l.positive) for l in inst.body):
                    continue
                inst = _strip(inst)
                if inst in rule_set:
                    continue
                g._charge()
                rule_set.add(inst)
                rules.append(inst)
                for l in inst.body:
                    if l.atom not in universe:
                        queue.append(l.atom)
    return GroundProgram(
        tuple(facts), tuple(rules), tuple(universe), tuple(program.queries), tuple(program.evidence)
    )


def ground_full(program: Program, budget: int = DEFAULT_RULE_BUDGET) -> GroundProgram:
    """Complete grounding over the constants occurring in the program."""
    g = _Grounder(program, budget)
    facts = g.ground_prob_facts()
    rules, rule_set = [], set()
    for rule in program.rules:
        for inst in g.instances_for(rule, {}):
            inst = _strip(inst)
            if inst in rule_set:
                continue
            g._charge()
            rule_set.add(inst)
            rules.append(inst)
    universe = dict.fromkeys(program.queries)
    universe.update(dict.fromkeys(a for a, _ in program.evidence))
    universe.update(dict.fromkeys(f.atom for f in facts))
    for r in rules:
        universe[r.head] = None
        universe.update(dict.fromkeys(l.atom for l in r.body))
    return GroundProgram(
        tuple(facts), tuple(rules), tuple(universe), tuple(program.queries), tuple(program.evidence)
    )
