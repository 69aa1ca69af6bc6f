"""Approximate marginals by MC-SAT over the ground MLN."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _sls
from .errors import InconsistentEvidenceError, PlwmcError, SampleSatError
from .logic import World
from .weighted import GroundMln


INNER_MODES = ("auto", "support", "walk", "samplesat")


@dataclass(frozen=True)
class McSatConfig:
    num_samples: int = 10_000
    burn_in: int = 100
    inner_flips: Optional[int] = None  # None: 10 x the number of variables the walk moves
    inner_noise: float = 0.5
    seed: int = 0
    temperature: Optional[float] = None  # None: scaled to the free variable count
    chains: int = 1
    inner: str = "auto"  # "support", "walk" or "samplesat"; auto prefers support

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError("num_samples must be at least 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if not 0.0 <= self.inner_noise <= 1.0:
            raise ValueError("inner_noise must lie in [0, 1]")
        if self.temperature is not None and self.temperature <= 0.0:
            raise ValueError("temperature must be positive")
        if self.chains < 1:
            raise ValueError("chains must be at least 1")
        if self.inner not in INNER_MODES:
            raise ValueError(f"inner must be one of {', '.join(INNER_MODES)}")


@dataclass(frozen=True)
class MarginalEstimate:
    marginals: dict
    samples_used: int
    acceptance: float = 1.0
    inner: str = "walk"


def _rng(seed_stream):
    if isinstance(seed_stream, np.random.Generator):
        return seed_stream
    return np.random.default_rng(seed_stream)


def _kernel_seed(rng) -> int:
    return int(rng.integers(0, 2**31 - 1))


def propagate_units(clauses, num_vars):
    """Unit propagation to a fixpoint.

    Returns ``(fixed, rest)``: an int8 array with 1/0 for forced variables
    and -1 for free ones, and the clauses still undecided, with false
    literals removed. Raises InconsistentEvidenceError on a conflict.
    """
    fixed = np.full(num_vars + 1, -1, dtype=np.int64)
    clauses = [tuple(c) for c in clauses]
    while True:
        rest = []
        units = []
        for c in clauses:
            lits = []
            sat = False
            for l in c:
                f = fixed[abs(l)]
                if f < 0:
                    lits.append(l)
                elif (f == 1) == (l > 0):
                    sat = True
                    break
            if sat:
                continue
            if not lits:
                raise InconsistentEvidenceError("hard clauses are unsatisfiable")
            if len(lits) == 1:
                units.append(lits[0])
            else:
                rest.append(tuple(lits))
        if not units:
            return fixed, rest
        for l in units:
            v, val = abs(l), int(l > 0)
            if fixed[v] >= 0 and fixed[v] != val:
                raise InconsistentEvidenceError("hard clauses are unsatisfiable")
            fixed[v] = val
        clauses = rest


def _samplesat_raw(arrays, n, fixed, rng, max_flips, max_tries, noise, temperature, sa_prob):
    out = np.zeros(n + 1, dtype=np.uint8)
    ok = _sls.samplesat(*arrays, n, fixed, max_flips, max_tries, noise, temperature, sa_prob,
                        _kernel_seed(rng), out)
    if not ok:
        raise SampleSatError(f"no satisfying assignment after {max_tries} tries of {max_flips} flips")
    return out


def sample_sat(hard, num_vars: int, seed_stream=None, *, max_flips: Optional[int] = None,
               max_tries: int = 10, noise: float = 0.5, temperature: float = 0.5,
               sa_prob: float = 0.5) -> World:
    """One near-uniform satisfying assignment of ``hard`` by restarting local search.

    Each flip is a WalkSAT move (noisy or greedy on a violated clause) or,
    with probability ``sa_prob``, a Metropolis move on a random variable.
    Returns a World keyed by variable index.
    """
    rng = _rng(seed_stream)
    fixed, rest = propagate_units(hard, num_vars)
    arrays = _sls.flatten(rest, num_vars)
    if max_flips is None:
        max_flips = max(100, 100 * num_vars)
    out = _samplesat_raw(arrays, num_vars, fixed, rng, max_flips, max_tries, noise, temperature, sa_prob)
    return World((v, bool(out[v])) for v in range(1, num_vars + 1))


def _resolve_queries(mln: GroundMln, queries):
    var_of = {name: v for v, name in mln.var_names.items()}
    out = []
    for q in queries:
        if isinstance(q, int):
            out.append(q)
        elif q in var_of:
            out.append(var_of[q])
        else:
            raise PlwmcError(f"query {q} has no variable in the MLN")
    return np.array(out, dtype=np.int64)


def _run_samplesat_chain(arrays, n, hard_fixed, soft_var, soft_sign, soft_keep, qv, state,
                         cfg, rng, flips):
    """MC-SAT with a fresh restart SampleSAT draw per step (no symmetry guarantee)."""
    counts = np.zeros(len(qv))
    accepted = 0
    for step in range(cfg.burn_in + cfg.num_samples):
        fixed = hard_fixed.copy()
        keep = rng.random(len(soft_var)) < soft_keep
        for v, s, k in zip(soft_var, soft_sign, keep):
            if k and state[v] == s:
                fixed[v] = s
        try:
            state = _samplesat_raw(arrays, n, fixed, rng, flips, 10, cfg.inner_noise,
                                   cfg.temperature or 0.5, 0.5)
            accepted += 1
        except SampleSatError:
            pass
        if step >= cfg.burn_in:
            counts += state[qv]
    return counts, 0, accepted


def _support_arrays(mln: GroundMln):
    n = mln.num_vars
    defs = [tuple(c) for c in mln.hard_clauses[:mln.num_definitions]]
    rest = [tuple(c) for c in mln.hard_clauses[mln.num_definitions:]]
    dl, ds, docc, docc_lit, docc_start = _sls.flatten(defs, n)
    el, es, _, _, _ = _sls.flatten(rest, n)
    is_support = np.zeros(n + 1, dtype=np.bool_)
    for v in mln.support:
        is_support[v] = True
    return (dl, ds, docc, docc_lit, docc_start, el, es, n, is_support,
            np.array(mln.support, dtype=np.int64))


def mc_sat(mln: GroundMln, queries, cfg: McSatConfig = McSatConfig()) -> MarginalEstimate:
    """Estimate P(q) for each query under the MLN by MC-SAT.

    Queries may be atoms (looked up in ``mln.var_names``) or variable
    indices. Independent chains use independent seed streams and are
    merged by sample count.

    The inner sampler is chosen by ``cfg.inner``. "support" walks over
    ``mln.support`` and recomputes the remaining variables from the
    definitional clauses; "walk" moves every variable; "samplesat" draws
    each state by restarting local search and is only near-uniform. "auto"
    uses "support" when the MLN carries that structure and falls back to
    "walk" if the clauses turn out not to define the other variables.
    """
    n = mln.num_vars
    qv = _resolve_queries(mln, queries)
    hard_fixed, rest = propagate_units(mln.hard_clauses, n)
    arrays = _sls.flatten(rest, n)
    soft = [(l, w) for l, w in mln.soft_units if hard_fixed[abs(l)] < 0]
    soft_var = np.array([abs(l) for l, _ in soft], dtype=np.int64)
    soft_sign = np.array([1 if l > 0 else 0 for l, _ in soft], dtype=np.uint8)
    soft_keep = np.array([-math.expm1(-w) for _, w in soft], dtype=np.float64)
    inner = cfg.inner
    if inner == "auto":
        inner = "support" if mln.support else "walk"
    if inner == "support" and not mln.support:
        raise PlwmcError("support walk needs an MLN with support variables")
    rng = np.random.default_rng(cfg.seed)
    total = np.zeros(len(qv))
    accepted = 0
    steps = 0
    for _ in range(cfg.chains):
        chain_rng = np.random.default_rng(rng.integers(0, 2**63 - 1))
        state = _samplesat_raw(arrays, n, hard_fixed, chain_rng, max(100, 100 * n), 10,
                               cfg.inner_noise, 0.5, 0.5)
        kernel_seed = _kernel_seed(chain_rng)
        temperature = cfg.temperature or 0.0
        violations = 0
        if inner == "support":
            flips = cfg.inner_flips if cfg.inner_flips is not None else 10 * len(mln.support)
            counts, violations, acc, failed = _sls.support_chain(
                *_support_arrays(mln), hard_fixed, soft_var, soft_sign, soft_keep, qv, state,
                cfg.num_samples, cfg.burn_in, flips, temperature, kernel_seed)
            if failed:
                if cfg.inner == "support":
                    raise PlwmcError("hard clauses do not define the non-support variables")
                inner = "walk"
        if inner == "walk":
            flips = cfg.inner_flips if cfg.inner_flips is not None else 10 * n
            counts, violations, acc = _sls.mcsat_chain(
                *arrays, n, hard_fixed, soft_var, soft_sign, soft_keep, qv, state,
                cfg.num_samples, cfg.burn_in, flips, temperature, kernel_seed)
        elif inner == "samplesat":
            flips = cfg.inner_flips if cfg.inner_flips is not None else 10 * n
            counts, violations, acc = _run_samplesat_chain(
                arrays, n, hard_fixed, soft_var, soft_sign, soft_keep, qv, state, cfg,
                chain_rng, max(flips, 1))
        if violations:
            raise AssertionError(f"{violations} hard-clause violations in retained samples")
        total += counts
        accepted += acc
        steps += cfg.burn_in + cfg.num_samples
    used = cfg.num_samples * cfg.chains
    est = total / used
    marg = {}
    for q, p in zip(queries, est):
        marg[q] = float(min(1.0, max(0.0, p)))
    return MarginalEstimate(marg, used, accepted / steps, inner)
