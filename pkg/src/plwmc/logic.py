"""Terms, atoms, literals, rules and programs.

All values are immutable and hashable. Source positions are carried on
rules, facts and directives for diagnostics but are ignored by equality.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Optional, Union

_PLAIN_NAME = re.compile(r"^[a-z][A-Za-z0-9_]*$")
_NUMBER = re.compile(r"^\d+(\.\d+)?([eE][-+]?\d+)?$")


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Constant:
    name: str

    def __str__(self):
        if _PLAIN_NAME.match(self.name) or _NUMBER.match(self.name):
            return self.name
        return "'" + self.name.replace("\\", "\\\\").replace("'", "\\'") + "'"


@dataclass(frozen=True)
class Compound:
    functor: str
    args: tuple

    def __str__(self):
        return f"{Constant(self.functor)}({','.join(map(str, self.args))})"


Term = Union[Variable, Constant, Compound]


def term_variables(term) -> Iterator[Variable]:
    if isinstance(term, Variable):
        yield term
    elif isinstance(term, Compound):
        for arg in term.args:
            yield from term_variables(arg)


def term_is_ground(term) -> bool:
    return next(term_variables(term), None) is None


def substitute_term(term, subst):
    if isinstance(term, Variable):
        return subst.get(term, term)
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(substitute_term(a, subst) for a in term.args))
    return term


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple = ()

    @property
    def signature(self):
        return (self.predicate, len(self.args))

    def is_ground(self):
        return all(term_is_ground(a) for a in self.args)

    def variables(self):
        for arg in self.args:
            yield from term_variables(arg)

    def substitute(self, subst):
        if not subst:
            return self
        return Atom(self.predicate, tuple(substitute_term(a, subst) for a in self.args))

    def __str__(self):
        name = str(Constant(self.predicate))
        if not self.args:
            return name
        return f"{name}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def negate(self):
        return Literal(self.atom, not self.positive)

    def substitute(self, subst):
        return Literal(self.atom.substitute(subst), self.positive)

    def __str__(self):
        return str(self.atom) if self.positive else f"\\+ {self.atom}"


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple = ()
    pos: Optional[tuple] = field(default=None, compare=False, repr=False)

    @property
    def is_fact(self):
        return not self.body

    def variables(self):
        seen = []
        for v in self.head.variables():
            if v not in seen:
                seen.append(v)
        for lit in self.body:
            for v in lit.atom.variables():
                if v not in seen:
                    seen.append(v)
        return seen

    def is_ground(self):
        return not self.variables()

    def substitute(self, subst):
        return Rule(self.head.substitute(subst), tuple(l.substitute(subst) for l in self.body))

    def __str__(self):
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class ProbFact:
    prob: float
    atom: Atom
    pos: Optional[tuple] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"probability {self.prob} outside [0, 1]")

    def __str__(self):
        return f"{self.prob!r}::{self.atom}."


@dataclass(frozen=True)
class Program:
    prob_facts: tuple = ()
    rules: tuple = ()
    queries: tuple = ()
    evidence: tuple = ()

    def evidence_map(self):
        return dict(self.evidence)

    def with_task(self, queries=None, evidence=None):
        """Return a copy whose queries/evidence are replaced or extended.

        ``evidence`` entries override in-file entries for the same atom.
        """
        qs = list(self.queries)
        for q in queries or ():
            if q not in qs:
                qs.append(q)
        ev = dict(self.evidence)
        for atom, value in evidence or ():
            ev[atom] = value
        return Program(self.prob_facts, self.rules, tuple(qs), tuple(ev.items()))

    def __str__(self):
        return format_program(self)


def format_program(program: Program) -> str:
    lines = [str(f) for f in program.prob_facts]
    lines += [str(r) for r in program.rules]
    lines += [f"query({q})." for q in program.queries]
    lines += [f"evidence({a}, {'true' if v else 'false'})." for a, v in program.evidence]
    return "\n".join(lines) + ("\n" if lines else "")


class World(Mapping):
    """Total truth assignment over a fixed atom universe."""

    __slots__ = ("_truth", "_hash")

    def __init__(self, truth: Union[Mapping, Iterable]):
        self._truth = dict(truth)
        self._hash = None

    @classmethod
    def from_true(cls, universe, true_atoms):
        true_atoms = set(true_atoms)
        return cls((a, a in true_atoms) for a in universe)

    def __getitem__(self, atom):
        return self._truth[atom]

    def __iter__(self):
        return iter(self._truth)

    def __len__(self):
        return len(self._truth)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._truth.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, World):
            return self._truth == other._truth
        return NotImplemented

    def true_atoms(self):
        return frozenset(a for a, v in self._truth.items() if v)

    def restrict(self, atoms):
        return World((a, self._truth[a]) for a in atoms)

    def consistent_with(self, evidence):
        return all(self._truth.get(a) == v for a, v in evidence)

    def __repr__(self):
        parts = [str(a) if v else f"~{a}" for a, v in self._truth.items()]
        return "World({" + ", ".join(parts) + "})"


def match_atom(pattern: Atom, ground: Atom, subst=None):
    """One-sided matching of ``pattern`` against a ground atom.

    Returns the extended substitution, or None when they do not match.
    """
    if pattern.predicate != ground.predicate or len(pattern.args) != len(ground.args):
        return None
    subst = dict(subst) if subst else {}
    for p, g in zip(pattern.args, ground.args):
        if not _match_term(p, g, subst):
            return None
    return subst


def _match_term(p, g, subst):
    if isinstance(p, Variable):
        bound = subst.get(p)
        if bound is None:
            subst[p] = g
            return True
        return bound == g
    if isinstance(p, Compound):
        if not isinstance(g, Compound) or p.functor != g.functor or len(p.args) != len(g.args):
            return False
        return all(_match_term(a, b, subst) for a, b in zip(p.args, g.args))
    return p == g


def unifiable(a: Atom, b: Atom) -> bool:
    """Whether two atoms unify after renaming their variables apart."""
    if a.signature != b.signature:
        return False
    a = a.substitute({v: Variable("L#" + v.name) for v in a.variables()})
    b = b.substitute({v: Variable("R#" + v.name) for v in b.variables()})
    subst = {}
    stack = list(zip(a.args, b.args))
    while stack:
        s, t = stack.pop()
        s, t = _walk(s, subst), _walk(t, subst)
        if s == t:
            continue
        if isinstance(s, Variable):
            if _occurs(s, t, subst):
                return False
            subst[s] = t
        elif isinstance(t, Variable):
            if _occurs(t, s, subst):
                return False
            subst[t] = s
        elif isinstance(s, Compound) and isinstance(t, Compound):
            if s.functor != t.functor or len(s.args) != len(t.args):
                return False
            stack.extend(zip(s.args, t.args))
        else:
            return False
    return True


def _walk(t, subst):
    while isinstance(t, Variable) and t in subst:
        t = subst[t]
    return t


def _occurs(v, t, subst):
    t = _walk(t, subst)
    if t == v:
        return True
    if isinstance(t, Compound):
        return any(_occurs(v, a, subst) for a in t.args)
    return False


def atom(text: str) -> Atom:
    """Parse a single atom, e.g. ``atom("smokes(alice)")``."""
    from .parser import parse_atom

    return parse_atom(text)
