import math

import pytest

from conftest import ground_suite, mln_marginals, projected_models
from plwmc.errors import PartialAssignmentError
from plwmc.grounder import ground_full
from plwmc.logic import atom
from plwmc.oracle import enumerate_models, oracle_distribution, oracle_marginals
from plwmc.pipeline import prepare
from plwmc.weighted import (
    parse_weighted_dimacs,
    to_mln,
    to_weighted_dimacs,
    world_weight,
)

R, S, W = atom("rain"), atom("sprinkler"), atom("wet")


def _sprinkler(text, evidence=()):
    return prepare(text, evidence=[(atom(a), v) for a, v in evidence], full_grounding=True).wcnf


def test_sprinkler_weights(sprinkler_text):
    wc = _sprinkler(sprinkler_text, [("wet", False)])
    r, s, w = wc.var(R), wc.var(S), wc.var(W)
    assert (wc.weight(r), wc.weight(-r)) == (0.3, 0.7)
    assert (wc.weight(s), wc.weight(-s)) == (0.2, 0.8)
    assert (wc.weight(w), wc.weight(-w)) == (1.0, 1.0)
    assert wc.prob_vars == {r, s}
    assert wc.cnf.clauses[-1] == (-w,)
    assert wc.num_rule_clauses == 3


def test_no_evidence_is_rule_cnf(sprinkler_text):
    pp = prepare(sprinkler_text, full_grounding=True)
    assert pp.wcnf.cnf.clauses == pp.phi_r.clauses


def test_two_evidence_atoms_add_two_units(sprinkler_text):
    wc = _sprinkler(sprinkler_text, [("wet", True), ("rain", False)])
    assert len(wc.cnf.clauses) == 5
    assert set(wc.cnf.clauses[3:]) == {(wc.var(W),), (-wc.var(R),)}


def test_world_weights(sprinkler_text):
    wc = _sprinkler(sprinkler_text)
    assert world_weight(wc, {R: True, S: False, W: True}) == pytest.approx(0.24, abs=1e-12)
    assert world_weight(wc, {R: False, S: False, W: False}) == pytest.approx(0.56, abs=1e-12)
    assert world_weight(wc, [wc.var(R), -wc.var(S), wc.var(W)]) == pytest.approx(0.24, abs=1e-12)


def test_world_weight_of_derived_only_program():
    wc = prepare("a. b :- a.", full_grounding=True).wcnf
    assert world_weight(wc, {atom("a"): True, atom("b"): True}) == 1.0


def test_world_weight_rejects_partial_assignment(sprinkler_text):
    wc = _sprinkler(sprinkler_text)
    with pytest.raises(PartialAssignmentError):
        world_weight(wc, {R: True})


def test_deterministic_facts_become_hard_units():
    wc = prepare("1.0::a. 0.0::b. 0.5::c. d :- a, b.", full_grounding=True).wcnf
    assert (wc.var(atom("a")),) in wc.cnf.clauses
    assert (-wc.var(atom("b")),) in wc.cnf.clauses
    mln = to_mln(wc)
    assert mln.soft_units == ()


def test_mln_soft_units_for_sprinkler(sprinkler_text):
    wc = _sprinkler(sprinkler_text, [("wet", False)])
    mln = to_mln(wc)
    assert len(mln.hard_clauses) == 4
    r, s = wc.var(R), wc.var(S)
    soft = dict(mln.soft_units)
    assert set(soft) == {-r, -s}
    assert soft[-r] == pytest.approx(math.log(7 / 3), abs=1e-12)
    assert soft[-s] == pytest.approx(math.log(4), abs=1e-12)
    assert mln.support == (r, s)
    assert mln.num_definitions == 3


def test_mln_drops_unbiased_facts():
    mln = to_mln(prepare("0.5::a. 0.7::b.", full_grounding=True).wcnf)
    assert len(mln.soft_units) == 1
    lit, w = mln.soft_units[0]
    assert lit > 0 and w == pytest.approx(math.log(0.7 / 0.3), abs=1e-12)


def test_mln_distribution_equals_sprinkler(sprinkler_text):
    wc = _sprinkler(sprinkler_text)
    z, (pw,) = mln_marginals(to_mln(wc), [wc.var(W)])
    assert pw == pytest.approx(0.44, abs=1e-12)


def test_weighted_dimacs_golden(data_dir):
    wc = prepare((data_dir / "sprinkler.pl").read_text()).wcnf
    assert to_weighted_dimacs(wc) == (data_dir / "sprinkler_weighted.cnf").read_text()


def test_weighted_dimacs_round_trip(sprinkler_text):
    wc = _sprinkler(sprinkler_text, [("wet", True)])
    n, clauses, names, weights = parse_weighted_dimacs(to_weighted_dimacs(wc))
    assert n == wc.cnf.num_vars
    assert tuple(map(tuple, clauses)) == wc.cnf.clauses
    assert weights == {l: wc.weight(l) for v in wc.prob_vars for l in (v, -v)}
    assert names[wc.var(W)] == "wet"


def test_models_and_weights_match_oracle_on_suite():
    for prog in ground_suite(60):
        lg = ground_full(prog)
        pp = prepare(prog, full_grounding=True)
        dist = oracle_distribution(lg)
        wc = pp.wcnf
        models = projected_models(wc.cnf, lg.atom_universe)
        consistent = {frozenset(w.true_atoms()): p for w, p in dist.items()
                      if w.consistent_with(lg.evidence)}
        # models of phi are the worlds consistent with the evidence whose
        # total choice respects deterministic facts
        assert set(models) <= set(consistent)
        assert all(p == 0.0 for m, p in consistent.items() if m not in set(models))
        for m in enumerate_models(wc.cnf.clauses, wc.cnf.num_vars):
            key = frozenset(a for a in lg.atom_universe if m[wc.var(a)])
            w = world_weight(wc, {v: m[v] for v in range(1, wc.cnf.num_vars + 1)})
            assert abs(w - consistent[key]) <= 1e-12


def test_rule_cnf_is_normalized_on_suite():
    for prog in ground_suite(60):
        pp = prepare(prog, full_grounding=True)
        wc = pp.wcnf
        total = 0.0
        for m in enumerate_models(pp.phi_r.clauses, pp.phi_r.num_vars):
            total += world_weight(wc, {v: m[v] for v in range(1, wc.cnf.num_vars + 1)})
        assert abs(total - 1.0) <= 1e-9


def test_mln_conditionals_match_oracle_on_suite():
    checked = 0
    for prog in ground_suite(80):
        pp = prepare(prog)
        wc = pp.wcnf
        if wc.cnf.num_vars > 16:
            continue
        mln = to_mln(wc)
        exact = oracle_marginals(pp.ground)
        _, est = mln_marginals(mln, [wc.var(q) for q in pp.queries])
        for q, p in zip(pp.queries, est):
            assert abs(p - exact.marginals[q]) <= 1e-9
        checked += 1
    assert checked >= 20
