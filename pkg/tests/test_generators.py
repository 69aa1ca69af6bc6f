import random

import networkx as nx

from plwmc.generators import (
    cyclic_smokers,
    forward_sample,
    power_law_smokers,
    random_ground_program,
    random_nonground_program,
    smokers_program,
)
from plwmc.grounder import ground_full
from plwmc.logic import atom
from plwmc.oracle import oracle_distribution
from plwmc.parser import parse_program, validate


def test_random_ground_programs_are_valid_and_two_valued():
    rng = random.Random(0)
    for _ in range(20):
        prog = random_ground_program(rng)
        assert validate(prog) == []
        assert 1 <= len(prog.prob_facts) <= 12
        assert prog.queries
        # evidence comes from a sample, so it has positive probability
        dist = oracle_distribution(ground_full(prog))
        assert sum(p for w, p in dist.items() if w.consistent_with(prog.evidence)) > 0


def test_generated_program_survives_printing():
    prog = random_ground_program(random.Random(5))
    assert parse_program(str(prog)) == prog


def test_random_nonground_programs_are_valid():
    rng = random.Random(1)
    for _ in range(10):
        prog = random_nonground_program(rng)
        assert validate(prog) == []
        assert all(q.predicate.startswith("pd") for q in prog.queries)
        assert any(not r.is_ground() for r in prog.rules)


def test_generators_are_deterministic():
    assert random_ground_program(random.Random(9)) == random_ground_program(random.Random(9))
    assert power_law_smokers(6, seed=2) == power_law_smokers(6, seed=2)


def test_smokers_program_shape():
    prog = smokers_program(nx.path_graph(3))
    assert validate(prog) == []
    # stress and cancer_risk per person, friend and inf per directed edge
    assert len(prog.prob_facts) == 3 + 3 + 2 * 4
    assert len(prog.rules) == 3


def test_power_law_smokers_task():
    prog = power_law_smokers(8, seed=0)
    assert validate(prog) == []
    pool = {f.atom for f in prog.prob_facts if f.atom.predicate == "friend"}
    pool |= {atom(f"cancer(p{i})") for i in range(8)}
    evidence = {a for a, _ in prog.evidence}
    assert set(prog.queries) | evidence == pool
    assert not set(prog.queries) & evidence
    assert abs(len(prog.queries) - len(evidence)) <= 1


def test_cyclic_smokers_is_mutual():
    prog = cyclic_smokers()
    assert {f.atom for f in prog.prob_facts if f.prob == 1.0} == {atom("friend(p0,p1)"), atom("friend(p1,p0)")}
    assert [str(q) for q in prog.queries] == ["smokes(p0)", "smokes(p1)", "cancer(p0)"]


def test_forward_sample_respects_rules():
    prog = parse_program("0.5::a. b :- a. c :- \\+ a.")
    rng = random.Random(3)
    for _ in range(20):
        s = forward_sample(prog, rng)
        assert s[atom("b")] == s[atom("a")]
        assert s[atom("c")] != s[atom("a")]
