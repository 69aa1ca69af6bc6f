"""Approximate MPE by MaxWalkSAT on the weighted MAX-SAT reading of a weighted CNF."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _sls
from .errors import InconsistentEvidenceError
from .logic import World
from .sampler import propagate_units
from .weighted import WeightedCnf, to_mln, world_weight


@dataclass(frozen=True)
class MaxSatInstance:
    hard: tuple
    soft: tuple  # (clause, weight > 0)
    num_vars: int

    def __post_init__(self):
        for _, w in self.soft:
            if not (w > 0.0 and math.isfinite(w)):
                raise ValueError(f"soft weight must be finite and positive, got {w}")

    @property
    def hard_weight(self) -> float:
        return sum(w for _, w in self.soft) + 1.0


@dataclass(frozen=True)
class MwsConfig:
    max_flips: Optional[int] = None  # None: 100 x num_vars
    max_restarts: int = 10
    noise: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must lie in [0, 1]")
        if self.max_restarts < 1:
            raise ValueError("max_restarts must be at least 1")


@dataclass(frozen=True)
class MpeResult:
    world: Optional[World]
    weight: float
    feasible: bool
    log_cost: float  # total weight of violated soft units


def to_maxsat(wc: WeightedCnf) -> MaxSatInstance:
    mln = to_mln(wc)
    return MaxSatInstance(tuple(mln.hard_clauses), tuple(((l,), w) for l, w in mln.soft_units),
                          mln.num_vars)


def _run(inst: MaxSatInstance, cfg: MwsConfig):
    """Best (cost, assignment) over all restarts, or (inf, None)."""
    n = inst.num_vars
    fixed, rest = propagate_units(inst.hard, n)
    clauses = list(rest)
    weights = [inst.hard_weight] * len(rest)
    hard = [True] * len(rest)
    base_cost = 0.0
    for c, w in inst.soft:
        live = [l for l in c if fixed[abs(l)] < 0]
        if any(fixed[abs(l)] >= 0 and (fixed[abs(l)] == 1) == (l > 0) for l in c):
            continue
        if not live:
            base_cost += w
            continue
        clauses.append(tuple(live))
        weights.append(w)
        hard.append(False)
    # forced variables are pinned with unit clauses the search never breaks
    for v in range(1, n + 1):
        if fixed[v] >= 0:
            clauses.append((v if fixed[v] else -v,))
            weights.append(inst.hard_weight)
            hard.append(True)
    arrays = _sls.flatten(clauses, n)
    w_arr = np.array(weights, dtype=np.float64)
    h_arr = np.array(hard, dtype=np.bool_)
    flips = cfg.max_flips if cfg.max_flips is not None else 100 * n
    rng = np.random.default_rng(cfg.seed)
    best_cost, best_state = math.inf, None
    for _ in range(cfg.max_restarts):
        out = np.zeros(n + 1, dtype=np.uint8)
        cost, found = _sls.maxwalksat(*arrays, n, w_arr, h_arr, flips, cfg.noise,
                                      int(rng.integers(0, 2**31 - 1)), out)
        if not found:
            continue
        # recompute exactly; the running sum can drift
        values = out.astype(bool)
        cost = base_cost + sum(w for c, w in inst.soft
                               if not any(values[abs(l)] == (l > 0) for l in c))
        key = tuple(int(x) for x in out[1:])
        if best_state is None or cost < best_cost - 1e-12 or (
                abs(cost - best_cost) <= 1e-12 and key < tuple(int(x) for x in best_state[1:])):
            best_cost, best_state = cost, out
    return best_cost, best_state


def max_walk_sat(inst: MaxSatInstance, cfg: MwsConfig = MwsConfig(), wc: Optional[WeightedCnf] = None):
    """Best hard-feasible assignment found and its world weight.

    Returns ``(World, weight)``; the world is keyed by variable name when
    ``wc`` is given, by index otherwise, and the weight is the world weight
    under ``wc`` (or exp(-violated soft weight) without it). When no
    feasible state is found the result is ``(None, 0.0)``.
    """
    res = solve_mpe(inst, cfg, wc)
    return res.world, res.weight


def solve_mpe(inst: MaxSatInstance, cfg: MwsConfig = MwsConfig(), wc: Optional[WeightedCnf] = None) -> MpeResult:
    try:
        cost, state = _run(inst, cfg)
    except InconsistentEvidenceError:
        return MpeResult(None, 0.0, False, math.inf)
    if state is None:
        return MpeResult(None, 0.0, False, math.inf)
    n = inst.num_vars
    if wc is not None:
        names = wc.cnf.var_names
        world = World((names[v], bool(state[v])) for v in range(1, n + 1))
        weight = world_weight(wc, {v: bool(state[v]) for v in range(1, n + 1)})
    else:
        world = World((v, bool(state[v])) for v in range(1, n + 1))
        weight = math.exp(-cost)
    return MpeResult(world, weight, True, cost)
