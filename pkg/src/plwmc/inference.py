"""Exact inference on smoothed decision-DNNF circuits."""

from __future__ import annotations

from dataclasses import dataclass, field

from .compiler import Circuit, compile_cnf, smooth
from .errors import InconsistentEvidenceError
from .logic import World


@dataclass(frozen=True)
class MarginalReport:
    evidence_prob: float
    marginals: dict
    samples_used: int = field(default=None, compare=False)

    def as_dict(self):
        out = {
            "evidence_prob": self.evidence_prob,
            "marginals": {str(a): p for a, p in self.marginals.items()},
        }
        if self.samples_used is not None:
            out["samples_used"] = self.samples_used
        return out


def _upward(circuit: Circuit, wc):
    vals = []
    for n in circuit.nodes:
        tag = n[0]
        if tag == "L":
            vals.append(wc.weight(n[1]))
        elif tag == "A":
            p = 1.0
            for ch in n[1]:
                p *= vals[ch]
            vals.append(p)
        elif tag == "O":
            vals.append(vals[n[2]] + vals[n[3]])
        else:
            vals.append(1.0 if tag == "T" else 0.0)
    return vals


def circuit_wmc(circuit: Circuit, wc) -> float:
    """Sum-product evaluation; the circuit must be smoothed over wc's variables."""
    return _upward(circuit, wc)[circuit.root]


def literal_counts(circuit: Circuit, wc):
    """Weighted count of models containing each literal, plus the total.

    One upward pass computes node values, one downward pass accumulates
    partial derivatives of the root with respect to every node.
    """
    vals = _upward(circuit, wc)
    nodes = circuit.nodes
    deriv = [0.0] * len(nodes)
    deriv[circuit.root] = 1.0
    counts = {}
    for i in range(circuit.root, -1, -1):
        d = deriv[i]
        if d == 0.0:
            continue
        n = nodes[i]
        tag = n[0]
        if tag == "A":
            kids = n[1]
            k = len(kids)
            prefix = [1.0] * (k + 1)
            for j, ch in enumerate(kids):
                prefix[j + 1] = prefix[j] * vals[ch]
            suffix = 1.0
            for j in range(k - 1, -1, -1):
                ch = kids[j]
                deriv[ch] += d * prefix[j] * suffix
                suffix *= vals[ch]
        elif tag == "O":
            deriv[n[2]] += d
            deriv[n[3]] += d
        elif tag == "L":
            counts[n[1]] = counts.get(n[1], 0.0) + d * vals[i]
    return counts, vals[circuit.root]


def marginals_traversal(circuit: Circuit, wc, queries) -> MarginalReport:
    counts, total = literal_counts(circuit, wc)
    if total <= 0.0:
        raise InconsistentEvidenceError("evidence has probability zero")
    marg = {}
    for q in queries:
        v = wc.var(q)
        marg[q] = min(1.0, max(0.0, counts.get(v, 0.0) / total))
    return MarginalReport(total, marg)


def compile_smooth(cnf, **kw) -> Circuit:
    return smooth(compile_cnf(cnf, **kw))


def marginals_two_wmc(wc, queries, **compile_kw) -> MarginalReport:
    """P(q | e) = WMC(phi and q) / WMC(phi), one compilation per count."""
    compile_kw.setdefault("priority", wc.prob_vars)
    total = circuit_wmc(compile_smooth(wc.cnf, **compile_kw), wc)
    if total <= 0.0:
        raise InconsistentEvidenceError("evidence has probability zero")
    marg = {}
    for q in queries:
        v = wc.var(q)
        joint = circuit_wmc(compile_smooth(wc.cnf.conjoin((v,)), **compile_kw), wc)
        marg[q] = min(1.0, max(0.0, joint / total))
    return MarginalReport(total, marg)


def mpe_exact(circuit: Circuit, wc):
    """Max-product traversal: (World over all CNF variables, weight).

    Ties at an Or node go to the negative branch.
    """
    nodes = circuit.nodes
    best = []
    for n in nodes:
        tag = n[0]
        if tag == "L":
            best.append(wc.weight(n[1]))
        elif tag == "A":
            p = 1.0
            for ch in n[1]:
                p *= best[ch]
            best.append(p)
        elif tag == "O":
            best.append(max(best[n[2]], best[n[3]]))
        else:
            best.append(1.0 if tag == "T" else 0.0)
    weight = best[circuit.root]
    if weight <= 0.0:
        raise InconsistentEvidenceError("no model with nonzero weight")
    values = {}
    stack = [circuit.root]
    while stack:
        n = nodes[stack.pop()]
        tag = n[0]
        if tag == "L":
            values[abs(n[1])] = n[1] > 0
        elif tag == "A":
            stack.extend(n[1])
        elif tag == "O":
            stack.append(n[3] if best[n[3]] >= best[n[2]] else n[2])
    names = wc.cnf.var_names
    world = World((names[v], values.get(v, False)) for v in range(1, wc.cnf.num_vars + 1))
    return world, weight
