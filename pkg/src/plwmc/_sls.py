"""Numba kernels for the local-search samplers and MaxWalkSAT.

Clauses are flattened: literals of clause k live in
``lits[starts[k]:starts[k+1]]``; occurrences of variable v are
``occ[occ_start[v]:occ_start[v+1]]`` (clause index) with the matching
signed literal in ``occ_lit``. Assignments are uint8 arrays indexed 1..n.
"""

import numpy as np
from numba import njit


def flatten(clauses, num_vars):
    starts = np.zeros(len(clauses) + 1, dtype=np.int64)
    flat = []
    for k, c in enumerate(clauses):
        flat.extend(c)
        starts[k + 1] = len(flat)
    lits = np.array(flat, dtype=np.int64)
    per_var = [[] for _ in range(num_vars + 1)]
    for k, c in enumerate(clauses):
        for l in c:
            per_var[abs(l)].append((k, l))
    occ_start = np.zeros(num_vars + 2, dtype=np.int64)
    occ, occ_lit = [], []
    for v in range(num_vars + 1):
        occ_start[v] = len(occ)
        for k, l in per_var[v]:
            occ.append(k)
            occ_lit.append(l)
    occ_start[num_vars + 1] = len(occ)
    return (lits, starts, np.array(occ, dtype=np.int64), np.array(occ_lit, dtype=np.int64), occ_start)


@njit(cache=True)
def _lit_true(l, assign):
    if l > 0:
        return assign[l] == 1
    return assign[-l] == 0


@njit(cache=True)
def _count_true(lits, starts, assign, ntrue):
    m = len(starts) - 1
    nunsat = 0
    for k in range(m):
        c = 0
        for j in range(starts[k], starts[k + 1]):
            if _lit_true(lits[j], assign):
                c += 1
        ntrue[k] = c
        if c == 0:
            nunsat += 1
    return nunsat


@njit(cache=True)
def _delta_unsat(v, assign, ntrue, occ, occ_lit, occ_start):
    d = 0
    for j in range(occ_start[v], occ_start[v + 1]):
        k = occ[j]
        if _lit_true(occ_lit[j], assign):
            if ntrue[k] == 1:
                d += 1
        elif ntrue[k] == 0:
            d -= 1
    return d


@njit(cache=True)
def _flip_counts(v, assign, ntrue, occ, occ_lit, occ_start):
    for j in range(occ_start[v], occ_start[v + 1]):
        k = occ[j]
        if _lit_true(occ_lit[j], assign):
            ntrue[k] -= 1
        else:
            ntrue[k] += 1
    assign[v] = 1 - assign[v]


@njit(cache=True)
def _flip_tracked(v, assign, ntrue, occ, occ_lit, occ_start, unsat, unsat_pos, nunsat):
    for j in range(occ_start[v], occ_start[v + 1]):
        k = occ[j]
        if _lit_true(occ_lit[j], assign):
            ntrue[k] -= 1
            if ntrue[k] == 0:
                unsat_pos[k] = nunsat
                unsat[nunsat] = k
                nunsat += 1
        else:
            ntrue[k] += 1
            if ntrue[k] == 1:
                p = unsat_pos[k]
                last = unsat[nunsat - 1]
                unsat[p] = last
                unsat_pos[last] = p
                unsat_pos[k] = -1
                nunsat -= 1
    assign[v] = 1 - assign[v]
    return nunsat


@njit(cache=True)
def _init_tracking(lits, starts, assign, ntrue, unsat, unsat_pos):
    m = len(starts) - 1
    nunsat = 0
    for k in range(m):
        c = 0
        for j in range(starts[k], starts[k + 1]):
            if _lit_true(lits[j], assign):
                c += 1
        ntrue[k] = c
        if c == 0:
            unsat_pos[k] = nunsat
            unsat[nunsat] = k
            nunsat += 1
        else:
            unsat_pos[k] = -1
    return nunsat


@njit(cache=True)
def samplesat(lits, starts, occ, occ_lit, occ_start, n, fixed, max_flips, max_tries,
              noise, temperature, sa_prob, seed, out):
    """WalkSAT moves mixed with Metropolis moves, restarting from random states.

    ``fixed[v]`` is 1/0 for forced values, -1 for free. Returns True and
    writes ``out`` on success.
    """
    np.random.seed(seed)
    m = len(starts) - 1
    assign = np.zeros(n + 1, dtype=np.uint8)
    ntrue = np.zeros(m, dtype=np.int64)
    unsat = np.zeros(m, dtype=np.int64)
    unsat_pos = np.zeros(m, dtype=np.int64)
    free = np.zeros(n, dtype=np.int64)
    nfree = 0
    for v in range(1, n + 1):
        if fixed[v] < 0:
            free[nfree] = v
            nfree += 1
    cand = np.zeros(n, dtype=np.int64)
    for _ in range(max_tries):
        for v in range(1, n + 1):
            if fixed[v] >= 0:
                assign[v] = fixed[v]
            else:
                assign[v] = 1 if np.random.random() < 0.5 else 0
        nunsat = _init_tracking(lits, starts, assign, ntrue, unsat, unsat_pos)
        for _flip in range(max_flips):
            if nunsat == 0:
                for v in range(n + 1):
                    out[v] = assign[v]
                return True
            if nfree > 0 and np.random.random() < sa_prob:
                v = free[np.random.randint(nfree)]
                d = _delta_unsat(v, assign, ntrue, occ, occ_lit, occ_start)
                if d <= 0 or np.random.random() < np.exp(-d / temperature):
                    nunsat = _flip_tracked(v, assign, ntrue, occ, occ_lit, occ_start,
                                           unsat, unsat_pos, nunsat)
                continue
            k = unsat[np.random.randint(nunsat)]
            nc = 0
            for j in range(starts[k], starts[k + 1]):
                v = abs(lits[j])
                if fixed[v] < 0:
                    cand[nc] = v
                    nc += 1
            if nc == 0:
                continue
            if np.random.random() < noise:
                v = cand[np.random.randint(nc)]
            else:
                best = -1
                best_break = 1 << 62
                for i in range(nc):
                    u = cand[i]
                    b = 0
                    for j in range(occ_start[u], occ_start[u + 1]):
                        if ntrue[occ[j]] == 1 and _lit_true(occ_lit[j], assign):
                            b += 1
                    if b < best_break:
                        best_break = b
                        best = u
                v = best
            nunsat = _flip_tracked(v, assign, ntrue, occ, occ_lit, occ_start, unsat, unsat_pos, nunsat)
        if nunsat == 0:
            for v in range(n + 1):
                out[v] = assign[v]
            return True
    return False


@njit(cache=True)
def mcsat_chain(lits, starts, occ, occ_lit, occ_start, n, hard_fixed, soft_var, soft_sign,
                soft_keep, query_vars, state, num_samples, burn_in, inner_flips, temperature,
                seed):
    """Run an MC-SAT chain from ``state`` (which must satisfy the hard clauses).

    Each step keeps every hard clause and each satisfied soft unit with
    probability ``soft_keep``; kept units pin their variable. The slice is
    then resampled by a Metropolis walk at fixed temperature on the number
    of violated hard clauses, over the unpinned variables only. The walk's
    endpoint is accepted when it satisfies every kept clause, otherwise the
    chain stays put. The walk is reversible with equal weight on all
    satisfying states, so this leaves the uniform distribution on the slice
    invariant. A non-positive ``temperature`` selects
    1 / (ln(free variables) + 2) for each step, which keeps a steady share
    of the walk's time on satisfying states as instances grow.

    Returns (true counts per query, hard violations seen in samples,
    accepted moves).
    """
    np.random.seed(seed)
    m = len(starts) - 1
    ntrue = np.zeros(m, dtype=np.int64)
    _count_true(lits, starts, state, ntrue)
    counts = np.zeros(len(query_vars), dtype=np.float64)
    fixed = np.empty(n + 1, dtype=np.int64)
    free = np.zeros(n, dtype=np.int64)
    y = state.copy()
    nt = ntrue.copy()
    violations = 0
    accepted = 0
    for step in range(burn_in + num_samples):
        for v in range(n + 1):
            fixed[v] = hard_fixed[v]
        for j in range(len(soft_var)):
            v = soft_var[j]
            if state[v] == soft_sign[j] and np.random.random() < soft_keep[j]:
                fixed[v] = soft_sign[j]
        nfree = 0
        for v in range(1, n + 1):
            if fixed[v] < 0:
                free[nfree] = v
                nfree += 1
        temp = temperature
        if temp <= 0.0:
            temp = 1.0 / (np.log(max(nfree, 1)) + 2.0)
        for v in range(n + 1):
            y[v] = state[v]
        for k in range(m):
            nt[k] = ntrue[k]
        nunsat = 0
        if nfree > 0:
            # N or N+1 flips at random: both kernels are symmetric, the
            # mixture is aperiodic
            steps = inner_flips + (1 if np.random.random() < 0.5 else 0)
            for _ in range(steps):
                v = free[np.random.randint(nfree)]
                d = _delta_unsat(v, y, nt, occ, occ_lit, occ_start)
                if d <= 0 or np.random.random() < np.exp(-d / temp):
                    _flip_counts(v, y, nt, occ, occ_lit, occ_start)
                    nunsat += d
        if nunsat == 0:
            accepted += 1
            for v in range(n + 1):
                state[v] = y[v]
            for k in range(m):
                ntrue[k] = nt[k]
        if step >= burn_in:
            for k in range(m):
                if ntrue[k] == 0:
                    violations += 1
            for q in range(len(query_vars)):
                counts[q] += state[query_vars[q]]
    return counts, violations, accepted


@njit(cache=True)
def maxwalksat(lits, starts, occ, occ_lit, occ_start, n, weights, is_hard, max_flips, noise,
               seed, best_out):
    """One MaxWalkSAT try from a random state.

    Returns (best soft cost among hard-feasible states, found_feasible);
    the best state is written to ``best_out``.
    """
    np.random.seed(seed)
    m = len(starts) - 1
    assign = np.zeros(n + 1, dtype=np.uint8)
    for v in range(1, n + 1):
        assign[v] = 1 if np.random.random() < 0.5 else 0
    ntrue = np.zeros(m, dtype=np.int64)
    unsat = np.zeros(m, dtype=np.int64)
    unsat_pos = np.zeros(m, dtype=np.int64)
    nunsat = _init_tracking(lits, starts, assign, ntrue, unsat, unsat_pos)
    hard_unsat = 0
    soft_cost = 0.0
    for k in range(m):
        if ntrue[k] == 0:
            if is_hard[k]:
                hard_unsat += 1
            else:
                soft_cost += weights[k]
    best = np.inf
    found = False
    cand = np.zeros(n, dtype=np.int64)
    for _flip in range(max_flips + 1):
        if hard_unsat == 0 and soft_cost < best - 1e-12:
            best = soft_cost
            found = True
            for v in range(n + 1):
                best_out[v] = assign[v]
        if nunsat == 0 or _flip == max_flips:
            break
        k = unsat[np.random.randint(nunsat)]
        nc = 0
        for j in range(starts[k], starts[k + 1]):
            cand[nc] = abs(lits[j])
            nc += 1
        if np.random.random() < noise:
            v = cand[np.random.randint(nc)]
        else:
            v = -1
            best_delta = np.inf
            for i in range(nc):
                u = cand[i]
                d = 0.0
                for j in range(occ_start[u], occ_start[u + 1]):
                    kk = occ[j]
                    if _lit_true(occ_lit[j], assign):
                        if ntrue[kk] == 1:
                            d += weights[kk]
                    elif ntrue[kk] == 0:
                        d -= weights[kk]
                if d < best_delta:
                    best_delta = d
                    v = u
        for j in range(occ_start[v], occ_start[v + 1]):
            kk = occ[j]
            if _lit_true(occ_lit[j], assign):
                if ntrue[kk] == 1:
                    if is_hard[kk]:
                        hard_unsat += 1
                    else:
                        soft_cost += weights[kk]
            elif ntrue[kk] == 0:
                if is_hard[kk]:
                    hard_unsat -= 1
                else:
                    soft_cost -= weights[kk]
        nunsat = _flip_tracked(v, assign, ntrue, occ, occ_lit, occ_start, unsat, unsat_pos, nunsat)
    return best, found


@njit(cache=True)
def _derive(dl, ds, docc, docc_lit, docc_start, n, is_support, val, nfalse, sat, queue):
    """Fill every non-support variable of ``val`` by unit propagation on the
    definitional clauses. Returns 1 on success, 0 on conflict, -1 when some
    variable stays undetermined."""
    for v in range(1, n + 1):
        if not is_support[v]:
            val[v] = -1
    m = len(ds) - 1
    qn = 0
    for k in range(m):
        nf = 0
        s = False
        for j in range(ds[k], ds[k + 1]):
            l = dl[j]
            x = val[abs(l)]
            if x < 0:
                continue
            if (x == 1) == (l > 0):
                s = True
                break
            nf += 1
        sat[k] = s
        nfalse[k] = nf
        if not s:
            size = ds[k + 1] - ds[k]
            if nf == size:
                return 0
            if nf == size - 1:
                queue[qn] = k
                qn += 1
    head = 0
    while head < qn:
        k = queue[head]
        head += 1
        if sat[k]:
            continue
        lit = 0
        for j in range(ds[k], ds[k + 1]):
            if val[abs(dl[j])] < 0:
                lit = dl[j]
                break
        if lit == 0:
            return 0
        v = abs(lit)
        val[v] = 1 if lit > 0 else 0
        for j in range(docc_start[v], docc_start[v + 1]):
            kk = docc[j]
            if sat[kk]:
                continue
            if docc_lit[j] == lit:
                sat[kk] = True
            else:
                nfalse[kk] += 1
                size = ds[kk + 1] - ds[kk]
                if nfalse[kk] == size:
                    return 0
                if nfalse[kk] == size - 1:
                    queue[qn] = kk
                    qn += 1
    for v in range(1, n + 1):
        if val[v] < 0:
            return -1
    return 1


@njit(cache=True)
def _violated(lits, starts, val):
    c = 0
    for k in range(len(starts) - 1):
        s = False
        for j in range(starts[k], starts[k + 1]):
            l = lits[j]
            if (val[abs(l)] == 1) == (l > 0):
                s = True
                break
        if not s:
            c += 1
    return c


@njit(cache=True)
def support_chain(dl, ds, docc, docc_lit, docc_start, el, es, n, is_support, support, hard_fixed,
                  soft_var, soft_sign, soft_keep, query_vars, state, num_samples, burn_in,
                  inner_flips, temperature, seed):
    """MC-SAT chain whose inner walk moves only the support variables.

    Every other variable is a function of the support through the
    definitional clauses (``dl``/``ds``), recomputed by propagation after
    each proposal, so states are in one-to-one correspondence with support
    assignments. The walk is Metropolis at fixed temperature on the number
    of violated remaining clauses (``el``/``es``) and its endpoint is
    accepted only when none is violated, which keeps the slice uniform.

    Returns (true counts per query, violations seen in samples, accepted
    moves, failed derivations). A failed derivation means the clauses are
    not definitional and the caller should use :func:`mcsat_chain`.
    """
    np.random.seed(seed)
    md = len(ds) - 1
    nfalse = np.zeros(md, dtype=np.int64)
    sat = np.zeros(md, dtype=np.bool_)
    queue = np.zeros(md + 1, dtype=np.int64)
    val = np.empty(n + 1, dtype=np.int64)
    for v in range(n + 1):
        val[v] = state[v]
    counts = np.zeros(len(query_vars), dtype=np.float64)
    if _derive(dl, ds, docc, docc_lit, docc_start, n, is_support, val, nfalse, sat, queue) != 1:
        return counts, 0, 0, 1
    if _violated(el, es, val) != 0:
        return counts, 1, 0, 0
    ns = len(support)
    free = np.zeros(ns + 1, dtype=np.int64)
    y = val.copy()
    backup = val.copy()
    violations = 0
    accepted = 0
    failed = 0
    for step in range(burn_in + num_samples):
        nfree = 0
        for i in range(ns):
            v = support[i]
            if hard_fixed[v] >= 0:
                continue
            free[nfree] = v
            nfree += 1
        # drop support variables pinned by a kept soft unit
        for j in range(len(soft_var)):
            v = soft_var[j]
            if val[v] == soft_sign[j] and np.random.random() < soft_keep[j]:
                for i in range(nfree):
                    if free[i] == v:
                        free[i] = free[nfree - 1]
                        nfree -= 1
                        break
        temp = temperature
        if temp <= 0.0:
            temp = 1.0 / (np.log(max(nfree, 1)) + 2.0)
        for v in range(n + 1):
            y[v] = val[v]
            backup[v] = val[v]
        energy = 0
        if nfree > 0:
            steps = inner_flips + (1 if np.random.random() < 0.5 else 0)
            for _ in range(steps):
                v = free[np.random.randint(nfree)]
                y[v] = 1 - y[v]
                st = _derive(dl, ds, docc, docc_lit, docc_start, n, is_support, y, nfalse, sat, queue)
                if st != 1:
                    failed += 1
                    for u in range(n + 1):
                        y[u] = backup[u]
                    continue
                e = _violated(el, es, y)
                if e <= energy or np.random.random() < np.exp(-(e - energy) / temp):
                    energy = e
                    for u in range(n + 1):
                        backup[u] = y[u]
                else:
                    for u in range(n + 1):
                        y[u] = backup[u]
        if energy == 0:
            accepted += 1
            for v in range(n + 1):
                val[v] = y[v]
        if step >= burn_in:
            violations += _violated(dl, ds, val) + _violated(el, es, val)
            for q in range(len(query_vars)):
                counts[q] += val[query_vars[q]]
    return counts, violations, accepted, failed
