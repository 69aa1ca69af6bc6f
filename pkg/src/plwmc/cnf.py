"""Ground rules to CNF.

Loop-free programs are translated by Clark's completion. Programs with
positive loops are first rewritten with a unary level ranking: every atom
``a`` of a loopy component of size k gets copies ``a@1 .. a@k`` where
``a@l`` may use the component's own atoms only at level ``l-1``. The
rewritten program has no positive loops and its completion, projected on
the original atoms, has the same models as the original program for every
total choice whose well-founded model is two-valued.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

from .errors import LoopError, ParseError
from .grounder import GroundProgram
from .logic import Atom, Literal, Rule


@dataclass(frozen=True)
class AuxAtom:
    """Level copy of an atom that sits in a positive loop."""

    base: Atom
    level: int

    def __str__(self):
        return f"{self.base}@{self.level}"


@dataclass(frozen=True)
class BodyAtom:
    """Tseitin variable standing for one multi-literal rule body."""

    head: Union[Atom, AuxAtom]
    index: int

    def __str__(self):
        return f"{self.head}#body{self.index}"


@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple
    var_names: dict

    @cached_property
    def var_of(self):
        return {name: v for v, name in self.var_names.items()}

    def original_vars(self):
        return [v for v in range(1, self.num_vars + 1) if isinstance(self.var_names[v], Atom)]

    def conjoin(self, *extra):
        """Return a copy with extra clauses appended (duplicates skipped)."""
        clauses = list(self.clauses)
        present = set(clauses)
        for c in extra:
            c = normalize_clause(c)
            if c is not None and c not in present:
                present.add(c)
                clauses.append(c)
        return Cnf(self.num_vars, tuple(clauses), self.var_names)


def normalize_clause(lits):
    """Deduplicate literals; None for tautologies."""
    out = []
    seen = set()
    for l in lits:
        if -l in seen:
            return None
        if l not in seen:
            seen.add(l)
            out.append(l)
    return tuple(out)


def _dependency_graph(lg: GroundProgram):
    nodes = list(dict.fromkeys(list(lg.atom_universe) + [r.head for r in lg.rules]))
    edges = {a: [] for a in nodes}
    for r in lg.rules:
        for l in r.body:
            if l.positive:
                if l.atom not in edges:
                    edges[l.atom] = []
                    nodes.append(l.atom)
                edges[r.head].append(l.atom)
    return nodes, edges


def _tarjan(nodes, edges):
    """Iterative Tarjan; components come out in reverse topological order."""
    index, low, on_stack = {}, {}, set()
    stack, out = [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(edges[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(edges[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def positive_dependency_sccs(lg: GroundProgram) -> list:
    """SCCs of the head -> positive-body-atom graph, reverse topological order.

    Each component is a list of atoms in discovery order.
    """
    nodes, edges = _dependency_graph(lg)
    return _tarjan(nodes, edges)


def is_loopy(component, lg: GroundProgram) -> bool:
    if len(component) > 1:
        return True
    a = component[0]
    return any(
        l.positive and l.atom == a for r in lg.rules_by_head.get(a, ()) for l in r.body
    )


def loopy_components(lg: GroundProgram) -> list:
    return [c for c in positive_dependency_sccs(lg) if is_loopy(c, lg)]


def break_loops(lg: GroundProgram) -> GroundProgram:
    """Rewrite positive loops away using level-indexed copies of loop atoms."""
    loops = loopy_components(lg)
    if not loops:
        return lg
    member_of = {}
    for comp in loops:
        for a in comp:
            member_of[a] = comp
    order = {a: i for i, a in enumerate(lg.atom_universe)}

    rules = [r for r in lg.rules if r.head not in member_of]
    aux_atoms = []
    for comp in loops:
        k = len(comp)
        members = set(comp)
        for a in sorted(comp, key=lambda x: order.get(x, len(order))):
            own = lg.rules_by_head.get(a, ())
            for level in range(1, k + 1):
                copy = AuxAtom(a, level)
                aux_atoms.append(copy)
                for r in own:
                    internal = any(l.positive and l.atom in members for l in r.body)
                    if internal and level == 1:
                        continue
                    body = tuple(
                        Literal(AuxAtom(l.atom, level - 1)) if l.positive and l.atom in members else l
                        for l in r.body
                    )
                    rules.append(Rule(copy, body))
            for level in range(1, k + 1):
                rules.append(Rule(a, (Literal(AuxAtom(a, level)),)))
    universe = tuple(lg.atom_universe) + tuple(aux_atoms)
    return GroundProgram(lg.prob_facts, tuple(rules), universe, lg.queries, lg.evidence)


def _normal_bodies(rules):
    bodies = []
    seen = set()
    for r in rules:
        lits = []
        ok = True
        present = {}
        for l in r.body:
            prev = present.get(l.atom)
            if prev is None:
                present[l.atom] = l.positive
                lits.append(l)
            elif prev != l.positive:
                ok = False
                break
        if not ok:
            continue
        key = frozenset(lits)
        if key in seen:
            continue
        seen.add(key)
        bodies.append(tuple(lits))
    return bodies


def clark_completion(lg: GroundProgram) -> Cnf:
    """Completion of a positive-loop-free ground program.

    Multi-literal bodies get a Tseitin variable defined by equivalence so
    that every model of the original atoms extends uniquely.
    """
    loops = loopy_components(lg)
    derived_loops = [c for c in loops if any(a not in lg.prob for a in c)]
    if derived_loops:
        names = ", ".join(str(a) for a in derived_loops[0])
        raise LoopError(f"positive loop among derived atoms: {names}")

    names = list(dict.fromkeys(lg.atom_universe))
    for r in lg.rules:
        names.append(r.head)
        names.extend(l.atom for l in r.body)
    names = list(dict.fromkeys(names))
    var = {a: i + 1 for i, a in enumerate(names)}
    var_names = {i: a for a, i in var.items()}

    clauses = []
    present = set()

    def emit(lits):
        c = normalize_clause(lits)
        if c is not None and c not in present:
            present.add(c)
            clauses.append(c)

    def lit_var(l):
        return var[l.atom] if l.positive else -var[l.atom]

    by_head = lg.rules_by_head
    for a in names:
        if a in lg.prob:
            continue
        av = var[a]
        bodies = _normal_bodies(by_head.get(a, ()))
        if not bodies:
            emit((-av,))
            continue
        if any(len(b) == 0 for b in bodies):
            emit((av,))
            continue
        disjuncts = []
        for i, body in enumerate(bodies):
            if len(body) == 1:
                disjuncts.append(lit_var(body[0]))
                continue
            x = len(var_names) + 1
            aux = BodyAtom(a, i)
            var[aux] = x
            var_names[x] = aux
            body_lits = [lit_var(l) for l in body]
            for bl in body_lits:
                emit((-x, bl))
            emit((x,) + tuple(-bl for bl in body_lits))
            disjuncts.append(x)
        for d in disjuncts:
            emit((-d, av))
        emit((-av,) + tuple(disjuncts))
    return Cnf(len(var_names), tuple(clauses), var_names)


def rules_to_cnf(lg: GroundProgram) -> Cnf:
    return clark_completion(break_loops(lg))


def to_dimacs(cnf: Cnf, comments=()) -> str:
    lines = [f"c {c}" for c in comments]
    lines += [f"c atom {v} {cnf.var_names[v]}" for v in range(1, cnf.num_vars + 1)]
    lines.append(f"p cnf {cnf.num_vars} {len(cnf.clauses)}")
    lines += [" ".join(map(str, c)) + " 0" for c in cnf.clauses]
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str):
    """Read DIMACS CNF text.

    Returns ``(num_vars, clauses, names, comment_lines)`` where ``names``
    maps variable indices to the strings given by ``c atom`` comments.
    """
    num_vars = None
    clauses, names, comments = [], {}, []
    pending = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            body = line[1:].strip()
            comments.append(body)
            parts = body.split(None, 2)
            if len(parts) == 3 and parts[0] == "atom":
                names[int(parts[1])] = parts[2]
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"bad problem line {line!r}", lineno, 1)
            num_vars = int(parts[2])
            continue
        for tok in line.split():
            v = int(tok)
            if v == 0:
                clauses.append(tuple(pending))
                pending = []
            else:
                pending.append(v)
    if pending:
        clauses.append(tuple(pending))
    if num_vars is None:
        raise ParseError("missing problem line")
    return num_vars, clauses, names, comments
