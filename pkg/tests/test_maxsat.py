import math
import random

import pytest

from conftest import ground_suite
from plwmc.generators import random_ground_program
from plwmc.inference import compile_smooth, mpe_exact
from plwmc.logic import atom
from plwmc.maxsat import MaxSatInstance, MwsConfig, max_walk_sat, solve_mpe, to_maxsat
from plwmc.pipeline import prepare
from plwmc.weighted import satisfies, world_weight

R, S, W = atom("rain"), atom("sprinkler"), atom("wet")


def test_sprinkler_instance(sprinkler_text):
    wc = prepare(sprinkler_text, queries=[R], evidence=[(W, False)]).wcnf
    inst = to_maxsat(wc)
    assert len(inst.hard) == 4
    soft = dict((c[0], w) for c, w in inst.soft)
    assert soft[-wc.var(R)] == pytest.approx(math.log(7 / 3), abs=1e-12)
    assert soft[-wc.var(S)] == pytest.approx(math.log(4), abs=1e-12)
    assert inst.hard_weight == pytest.approx(math.log(7 / 3) + math.log(4) + 1, abs=1e-12)


def test_mpe_given_wet(sprinkler_text):
    wc = prepare(sprinkler_text, queries=[R], evidence=[(W, True)]).wcnf
    world, weight = max_walk_sat(to_maxsat(wc), MwsConfig(seed=1), wc)
    assert (world[R], world[S], world[W]) == (True, False, True)
    assert weight == pytest.approx(0.24, abs=1e-12)


def test_unbiased_facts_have_no_soft_clauses():
    wc = prepare("0.5::a. 0.5::b. c :- a, \\+ b. query(c).").wcnf
    inst = to_maxsat(wc)
    assert inst.soft == ()
    res = solve_mpe(inst, MwsConfig(), wc)
    assert res.feasible and res.log_cost == 0.0
    assert res.weight == pytest.approx(0.25, abs=1e-12)


def test_unique_model_found_for_every_seed():
    wc = prepare("0.3::a. 0.6::b. c :- a, b. evidence(c, true). query(a).").wcnf
    for seed in range(5):
        world, weight = max_walk_sat(to_maxsat(wc), MwsConfig(seed=seed), wc)
        assert all(world.values())
        assert weight == pytest.approx(0.18, abs=1e-12)


def test_infeasible_instance():
    inst = MaxSatInstance(((1,), (-1,)), (), 1)
    assert solve_mpe(inst).feasible is False
    assert max_walk_sat(inst) == (None, 0.0)


def test_search_handles_unforced_hard_clauses():
    # exactly one of three, with soft preference for variable 3
    hard = ((1, 2, 3), (-1, -2), (-1, -3), (-2, -3))
    inst = MaxSatInstance(hard, (((3,), 2.0), ((1,), 1.0)), 3)
    res = solve_mpe(inst, MwsConfig(seed=0))
    assert dict(res.world) == {1: False, 2: False, 3: True}
    assert res.log_cost == pytest.approx(1.0)
    assert res.weight == pytest.approx(math.exp(-1.0))


def test_soft_weights_must_be_positive():
    with pytest.raises(ValueError):
        MaxSatInstance((), (((1,), 0.0),), 1)
    with pytest.raises(ValueError):
        MwsConfig(noise=1.5)


def test_reported_weight_is_world_weight_on_suite():
    for prog in ground_suite(40):
        wc = prepare(prog).wcnf
        res = solve_mpe(to_maxsat(wc), MwsConfig(), wc)
        assert res.feasible
        values = {wc.var(a): v for a, v in res.world.items()}
        assert satisfies(wc.cnf.clauses, values)
        assert abs(res.weight - world_weight(wc, values)) <= 1e-12


def test_ten_seeds_on_ten_variable_instances():
    rng = random.Random(2024)
    checked = 0
    while checked < 10:
        prog = random_ground_program(rng, max_facts=6, max_derived=6)
        wc = prepare(prog).wcnf
        if wc.cnf.num_vars != 10:
            continue
        _, best = mpe_exact(compile_smooth(wc.cnf, priority=wc.prob_vars), wc)
        hits = sum(abs(max_walk_sat(to_maxsat(wc), MwsConfig(seed=s), wc)[1] - best) <= 1e-12
                   for s in range(10))
        assert hits >= 9
        checked += 1
