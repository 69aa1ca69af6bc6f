import functools
import pathlib
import random

import pytest

from plwmc.generators import random_ground_program

DATA = pathlib.Path(__file__).parent / "data"

SPRINKLER = """\
0.3::rain.
0.2::sprinkler.
wet :- rain.
wet :- sprinkler.
"""


@functools.lru_cache(maxsize=None)
def ground_suite(count, seed=0):
    """Deterministic list of random ground programs shared by several tests."""
    return tuple(random_ground_program(random.Random(seed * 100_003 + i)) for i in range(count))


@pytest.fixture
def sprinkler_text():
    return SPRINKLER


@pytest.fixture
def data_dir():
    return DATA


def projected_models(cnf, atoms):
    """Models of ``cnf`` projected on ``atoms``, as a list of frozensets of true atoms."""
    from plwmc.oracle import enumerate_models

    var = cnf.var_of
    return [frozenset(a for a in atoms if m[var[a]]) for m in enumerate_models(cnf.clauses, cnf.num_vars)]


def oracle_worlds(dist):
    return {frozenset(w.true_atoms()) for w in dist}


def as_ground(text):
    """Take an already ground program verbatim, without relevance or derivability pruning."""
    from plwmc.grounder import GroundProgram
    from plwmc.parser import parse_program

    prog = parse_program(text)
    atoms = [f.atom for f in prog.prob_facts]
    for r in prog.rules:
        atoms.append(r.head)
        atoms.extend(l.atom for l in r.body)
    return GroundProgram(prog.prob_facts, prog.rules, tuple(dict.fromkeys(atoms)), prog.queries,
                         prog.evidence)


def mln_marginals(mln, query_vars):
    """P(v) under a ground MLN by enumerating all worlds (small instances only)."""
    import numpy as np

    n = mln.num_vars
    ids = np.arange(1 << n, dtype=np.int64)
    bits = ((ids[:, None] >> np.arange(n)) & 1).astype(bool)
    ok = np.ones(len(ids), dtype=bool)
    for c in mln.hard_clauses:
        sat = np.zeros(len(ids), dtype=bool)
        for l in c:
            sat |= bits[:, abs(l) - 1] if l > 0 else ~bits[:, abs(l) - 1]
        ok &= sat
    logw = np.zeros(len(ids))
    for l, wt in mln.soft_units:
        logw += wt * (bits[:, abs(l) - 1] if l > 0 else ~bits[:, abs(l) - 1])
    w = np.where(ok, np.exp(logw), 0.0)
    z = float(w.sum())
    return z, [float(w[bits[:, v - 1]].sum()) / z for v in query_vars]


def raw_wmc(circuit, wc):
    """Weighted count of an unsmoothed circuit, summing out variables it skips."""
    from plwmc.compiler import var_masks

    masks = var_masks(circuit)

    def free(mask):
        f = 1.0
        v = 1
        while mask >> v:
            if (mask >> v) & 1:
                f *= wc.weight(v) + wc.weight(-v)
            v += 1
        return f

    vals = []
    for i, n in enumerate(circuit.nodes):
        tag = n[0]
        if tag == "L":
            vals.append(wc.weight(n[1]))
        elif tag == "A":
            p = 1.0
            for ch in n[1]:
                p *= vals[ch]
            vals.append(p)
        elif tag == "O":
            vals.append(sum(vals[ch] * free(masks[i] & ~masks[ch] & ~(1 << n[1]))
                            for ch in (n[2], n[3])))
        else:
            vals.append(1.0 if tag == "T" else 0.0)
    full = (1 << (circuit.num_vars + 1)) - 2
    return vals[circuit.root] * free(full & ~masks[circuit.root])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
