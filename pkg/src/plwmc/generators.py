"""Random program generators for tests, benchmarks and the acceptance suite."""

from __future__ import annotations

import random

import networkx as nx

from .errors import UnsupportedProgramError
from .grounder import ground, ground_full
from .logic import Atom, Constant, Literal, ProbFact, Program, Rule, Variable
from .oracle import _IndexedRules


def _prob(rng: random.Random, deterministic_rate=0.0):
    if rng.random() < deterministic_rate:
        return rng.choice((0.0, 1.0))
    if rng.random() < 0.1:
        return 0.5
    return round(rng.uniform(0.05, 0.95), 2)


def forward_sample(program: Program, rng: random.Random, full=True):
    """Sample one world of ``program`` (queries/evidence ignored).

    Returns a dict atom -> bool over the ground program's atoms, or raises
    UnsupportedProgramError when the sampled total choice has a
    three-valued well-founded model.
    """
    lg = (ground_full if full else ground)(program)
    ir = _IndexedRules(lg)
    chosen = [ir.idx[f.atom] for f in lg.prob_facts if rng.random() < f.prob]
    t, u = ir.well_founded(chosen)
    if t != u:
        raise UnsupportedProgramError("three-valued well-founded model")
    return {a: t[i] for i, a in enumerate(ir.atoms)}


def _two_valued(program: Program) -> bool:
    """Whether every total choice of the full grounding has a two-valued WFM."""
    import itertools

    lg = ground_full(program)
    ir = _IndexedRules(lg)
    idx = [ir.idx[f.atom] for f in lg.prob_facts]
    for bits in itertools.product((False, True), repeat=len(idx)):
        t, u = ir.well_founded([i for i, b in zip(idx, bits) if b])
        if t != u:
            return False
    return True


def random_ground_program(rng: random.Random, *, max_facts=12, max_derived=20, neg_rate=0.25,
                          deterministic_rate=0.03, max_evidence=2, max_queries=4) -> Program:
    """A ground program with cycles and negation whose WFMs are all two-valued.

    Evidence values come from a forward sample, so P(e) > 0 unless a
    deterministic fact interferes (it never does: the sample respects it).
    """
    while True:
        nf = rng.randint(1, max_facts)
        nd = rng.randint(1, max_derived)
        facts = [Atom(f"f{i}") for i in range(nf)]
        derived = [Atom(f"d{i}") for i in range(nd)]
        pool = facts + derived
        pfs = tuple(ProbFact(_prob(rng, deterministic_rate), a) for a in facts)
        rules = []
        for h in derived:
            for _ in range(rng.choice((0, 1, 1, 2, 2, 3))):
                k = rng.randint(1, 3)
                atoms = rng.sample(pool, min(k, len(pool)))
                body = tuple(Literal(a, rng.random() >= neg_rate) for a in atoms)
                rules.append(Rule(h, body))
        rules = tuple(dict.fromkeys(rules))
        prog = Program(pfs, rules)
        if not _two_valued(prog):
            continue
        sample = forward_sample(prog, rng)
        queries = tuple(rng.sample(pool, rng.randint(1, min(max_queries, len(pool)))))
        rest = [a for a in pool if a not in queries]
        ne = rng.randint(0, min(max_evidence, len(rest)))
        evidence = tuple((a, sample.get(a, False)) for a in rng.sample(rest, ne))
        return Program(pfs, rules, queries, evidence)


def _var_pool(n):
    return [Variable(v) for v in "XYZW"[:n]]


def random_nonground_program(rng: random.Random, *, num_constants=3, max_facts=10) -> Program:
    """A function-free, range-restricted program with parts irrelevant to its query.

    Two independent predicate families are generated; queries and evidence
    touch only the first, so the second only shows up in full grounding.
    """
    consts = [Constant(c) for c in "abcdefg"[:num_constants]]
    while True:
        pfs, rules = [], []
        budget = max_facts
        families = []
        for fam in ("p", "q"):
            base = [(f"{fam}b{i}", rng.randint(1, 2)) for i in range(2)]
            derived = [(f"{fam}d{i}", rng.randint(1, 2)) for i in range(rng.randint(1, 3))]
            families.append((base, derived))
            for name, ar in base:
                instances = [(c,) for c in consts] if ar == 1 else [(c, d) for c in consts for d in consts]
                k = min(budget, rng.randint(1, 3))
                budget -= k
                for args in rng.sample(instances, min(k, len(instances))):
                    pfs.append(ProbFact(_prob(rng), Atom(name, args)))
            preds = base + derived
            for name, ar in derived:
                for _ in range(rng.randint(1, 3)):
                    rules.append(_random_rule(rng, name, ar, preds))
        prog = Program(tuple(dict.fromkeys(pfs)), tuple(dict.fromkeys(rules)))
        if not prog.prob_facts:
            continue
        try:
            if not _two_valued(prog):
                continue
            sample = forward_sample(prog, rng)
        except Exception:
            continue
        p_atoms = [a for a in sample if a.predicate.startswith("pd")]
        if not p_atoms:
            continue
        p_atoms.sort(key=str)
        queries = tuple(rng.sample(p_atoms, min(len(p_atoms), rng.randint(1, 2))))
        rest = [a for a in sorted(sample, key=str) if a.predicate.startswith("p") and a not in queries]
        ne = rng.randint(0, min(1, len(rest)))
        evidence = tuple((a, sample.get(a, False)) for a in rng.sample(rest, ne))
        return Program(prog.prob_facts, prog.rules, queries, evidence)


def _random_rule(rng, name, arity, preds):
    head_vars = _var_pool(arity)
    body = []
    bound = set()
    for _ in range(rng.randint(1, 2)):
        pname, par = rng.choice(preds)
        args = tuple(rng.choice(_var_pool(3)) for _ in range(par))
        body.append(Literal(Atom(pname, args), True))
        bound.update(args)
    for v in head_vars:
        if v not in bound:
            pname, par = rng.choice([p for p in preds if p[1] == 1] or preds)
            args = (v,) if par == 1 else (v, rng.choice(_var_pool(3)))
            body.append(Literal(Atom(pname, args), True))
            bound.update(args)
    if rng.random() < 0.3:
        pname, par = rng.choice(preds)
        usable = sorted(bound, key=lambda v: v.name)
        args = tuple(rng.choice(usable) for _ in range(par))
        body.append(Literal(Atom(pname, args), False))
    return Rule(Atom(name, tuple(head_vars)), tuple(body))


def smokers_program(graph: nx.Graph, *, p_stress=0.3, p_friend=0.8, p_influence=0.2,
                    p_cancer=0.4) -> Program:
    """Smokers program over a friendship graph (edges used in both directions)."""
    people = [Constant(f"p{i}") for i in sorted(graph.nodes)]
    X, Y = Variable("X"), Variable("Y")
    pfs = [ProbFact(p_stress, Atom("stress", (c,))) for c in people]
    pfs += [ProbFact(p_cancer, Atom("cancer_risk", (c,))) for c in people]
    for u, v in sorted(graph.edges):
        for a, b in ((u, v), (v, u)):
            pa, pb = Constant(f"p{a}"), Constant(f"p{b}")
            pfs.append(ProbFact(p_friend, Atom("friend", (pa, pb))))
            pfs.append(ProbFact(p_influence, Atom("inf", (pa, pb))))
    rules = (
        Rule(Atom("smokes", (X,)), (Literal(Atom("stress", (X,))),)),
        Rule(Atom("smokes", (X,)), (Literal(Atom("friend", (X, Y))), Literal(Atom("smokes", (Y,))),
                                    Literal(Atom("inf", (Y, X))))),
        Rule(Atom("cancer", (X,)), (Literal(Atom("smokes", (X,))), Literal(Atom("cancer_risk", (X,))))),
    )
    return Program(tuple(pfs), rules)


def power_law_smokers(num_people: int, seed: int = 0, m: int = 1, **probs) -> Program:
    """Smokers on a Barabasi-Albert graph with a sampled MARG task.

    Half of the friend and cancer atoms (random split) are queries, the
    other half evidence with values taken from a forward sample.
    """
    rng = random.Random(seed)
    graph = nx.barabasi_albert_graph(num_people, m, seed=seed)
    prog = smokers_program(graph, **probs)
    sample = forward_sample(prog, rng)
    pool = [f.atom for f in prog.prob_facts if f.atom.predicate == "friend"]
    pool += [Atom("cancer", (Constant(f"p{i}"),)) for i in sorted(graph.nodes)]
    rng.shuffle(pool)
    half = len(pool) // 2
    queries = tuple(pool[:half])
    evidence = tuple((a, sample.get(a, False)) for a in pool[half:])
    return Program(prog.prob_facts, prog.rules, queries, evidence)


def cyclic_smokers(p_stress=0.3, p_influence=0.2) -> Program:
    """Two people who are friends with each other; queries on smokes."""
    g = nx.Graph([(0, 1)])
    prog = smokers_program(g, p_stress=p_stress, p_friend=1.0, p_influence=p_influence)
    qs = (Atom("smokes", (Constant("p0"),)), Atom("smokes", (Constant("p1"),)),
          Atom("cancer", (Constant("p0"),)))
    return Program(prog.prob_facts, prog.rules, qs, ())
