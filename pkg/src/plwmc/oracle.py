"""Brute-force reference semantics.

Everything here enumerates: total choices for the distribution semantics,
assignments for model counting. It is deliberately independent of the
grounding-to-circuit path so it can be used to check it.
"""

from __future__ import annotations

import itertools
from collections import defaultdict

import numpy as np

from .errors import BudgetExceeded, InconsistentEvidenceError, UnsupportedProgramError
from .grounder import GroundProgram
from .logic import World

MAX_ORACLE_FACTS = 24
MAX_EXHAUSTIVE_VARS = 24


class _IndexedRules:
    def __init__(self, lg: GroundProgram):
        atoms = list(dict.fromkeys(
            list(lg.atom_universe)
            + [r.head for r in lg.rules]
            + [l.atom for r in lg.rules for l in r.body]
        ))
        self.atoms = atoms
        self.idx = {a: i for i, a in enumerate(atoms)}
        self.heads = []
        self.pos = []
        self.neg = []
        self.watch = [[] for _ in atoms]
        for k, r in enumerate(lg.rules):
            self.heads.append(self.idx[r.head])
            pos = sorted({self.idx[l.atom] for l in r.body if l.positive})
            self.pos.append(pos)
            self.neg.append([self.idx[l.atom] for l in r.body if not l.positive])
            for i in pos:
                self.watch[i].append(k)

    def least_model(self, facts, interp):
        """Least model of the reduct w.r.t. ``interp`` (negation read against it)."""
        n = len(self.atoms)
        true = [False] * n
        missing = [len(p) for p in self.pos]
        queue = []
        for i in facts:
            if not true[i]:
                true[i] = True
                queue.append(i)
        for k, head in enumerate(self.heads):
            if missing[k] == 0 and not any(interp[j] for j in self.neg[k]) and not true[head]:
                true[head] = True
                queue.append(head)
        while queue:
            i = queue.pop()
            for k in self.watch[i]:
                missing[k] -= 1
                if missing[k] == 0:
                    head = self.heads[k]
                    if not true[head] and not any(interp[j] for j in self.neg[k]):
                        true[head] = True
                        queue.append(head)
        return true

    def well_founded(self, facts):
        """Alternating fixpoint; returns (true, possibly_true) bool lists."""
        t = [False] * len(self.atoms)
        while True:
            u = self.least_model(facts, t)
            t_next = self.least_model(facts, u)
            if t_next == t:
                return t, u
            t = t_next


def well_founded_model(lg: GroundProgram, chosen) -> dict:
    """WFM of ``chosen ∪ rules`` as a map atom -> True/False/None (unknown)."""
    ir = _IndexedRules(lg)
    t, u = ir.well_founded([ir.idx[a] for a in chosen])
    return {a: (True if t[i] else (None if u[i] else False)) for i, a in enumerate(ir.atoms)}


def oracle_distribution(lg: GroundProgram, max_facts: int = MAX_ORACLE_FACTS) -> dict:
    """Distribution over worlds (on ``lg.atom_universe``) by enumerating total choices.

    Raises UnsupportedProgramError if some total choice has a three-valued
    well-founded model.
    """
    facts = list(lg.prob_facts)
    if len(facts) > max_facts:
        raise BudgetExceeded(f"oracle limited to {max_facts} probabilistic facts, got {len(facts)}")
    ir = _IndexedRules(lg)
    fact_idx = [ir.idx[f.atom] for f in facts]
    universe = list(lg.atom_universe)
    uidx = [ir.idx[a] for a in universe]
    dist = defaultdict(float)
    for bits in itertools.product((False, True), repeat=len(facts)):
        p = 1.0
        chosen = []
        for f, i, b in zip(facts, fact_idx, bits):
            if b:
                p *= f.prob
                chosen.append(i)
            else:
                p *= 1.0 - f.prob
        t, u = ir.well_founded(chosen)
        if t != u:
            undefined = [str(ir.atoms[i]) for i in range(len(t)) if t[i] != u[i]]
            raise UnsupportedProgramError(
                "three-valued well-founded model; undefined atoms: " + ", ".join(undefined[:5])
            )
        dist[World(zip(universe, (t[i] for i in uidx)))] += p
    return dict(dist)


def conditional_marginals(dist: dict, queries, evidence):
    """P(q | evidence) for each query from an explicit world distribution."""
    from .inference import MarginalReport

    evidence = list(evidence)
    z = sum(p for w, p in dist.items() if w.consistent_with(evidence))
    if z <= 0.0:
        raise InconsistentEvidenceError("evidence has probability zero")
    marg = {}
    for q in queries:
        marg[q] = sum(p for w, p in dist.items() if w[q] and w.consistent_with(evidence)) / z
    return MarginalReport(z, marg)


def oracle_marginals(lg: GroundProgram):
    return conditional_marginals(oracle_distribution(lg), lg.queries, lg.evidence)


def oracle_mpe(dist: dict, evidence):
    """Most probable world consistent with the evidence (ties: first found)."""
    best, best_p = None, -1.0
    for w, p in dist.items():
        if w.consistent_with(evidence) and p > best_p:
            best, best_p = w, p
    return best, best_p


def enumerate_models(clauses, num_vars: int) -> list:
    """All satisfying assignments as tuples indexed 1..num_vars (slot 0 unused)."""
    clauses = [tuple(c) for c in clauses]
    out = []

    def rec(assign, clauses):
        assign = dict(assign)
        while True:
            reduced = []
            unit = None
            for c in clauses:
                if any(assign.get(abs(l)) == (l > 0) for l in c):
                    continue
                rest = tuple(l for l in c if abs(l) not in assign)
                if not rest:
                    return
                if len(rest) == 1 and unit is None:
                    unit = rest[0]
                reduced.append(rest)
            clauses = reduced
            if unit is None:
                break
            assign[abs(unit)] = unit > 0
        if not clauses:
            free = [v for v in range(1, num_vars + 1) if v not in assign]
            for bits in itertools.product((False, True), repeat=len(free)):
                full = dict(assign)
                full.update(zip(free, bits))
                out.append(tuple([False] + [full[v] for v in range(1, num_vars + 1)]))
            return
        v = abs(clauses[0][0])
        for value in (False, True):
            assign[v] = value
            rec(assign, clauses)
            del assign[v]

    rec({}, clauses)
    return out


def wmc_exhaustive(wc, max_vars: int = MAX_EXHAUSTIVE_VARS, chunk: int = 1 << 18) -> float:
    """Sum of world weights over all satisfying assignments, by enumeration."""
    n = wc.cnf.num_vars
    if n > max_vars:
        raise BudgetExceeded(f"exhaustive WMC limited to {max_vars} variables, got {n}")
    wpos = np.array([wc.weight(v) for v in range(1, n + 1)], dtype=float)
    wneg = np.array([wc.weight(-v) for v in range(1, n + 1)], dtype=float)
    shifts = np.arange(n, dtype=np.int64)
    total = 0.0
    for start in range(0, 1 << n, chunk):
        ids = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = ((ids[:, None] >> shifts) & 1).astype(bool)
        sat = np.ones(len(ids), dtype=bool)
        for c in wc.cnf.clauses:
            cs = np.zeros(len(ids), dtype=bool)
            for l in c:
                col = bits[:, abs(l) - 1]
                cs |= col if l > 0 else ~col
            sat &= cs
        if n:
            w = np.prod(np.where(bits, wpos, wneg), axis=1)
        else:
            w = np.ones(len(ids))
        total += float(w[sat].sum())
    return total


def mpe_brute_force(wc):
    """Max world weight over models of ``wc`` by enumeration: (values, weight)."""
    from .weighted import world_weight

    best, best_w = None, -1.0
    for m in enumerate_models(wc.cnf.clauses, wc.cnf.num_vars):
        w = world_weight(wc, {v: m[v] for v in range(1, wc.cnf.num_vars + 1)})
        if w > best_w:
            best, best_w = m, w
    return best, best_w
