"""CNF to decision-DNNF compilation.

The compiler records the trace of an exhaustive DPLL search: unit
propagation yields literal leaves, independent sub-formulas become And
nodes, branching on a variable becomes an Or node whose two children are
guaranteed to disagree on that variable, and identical sub-formulas are
compiled once (component cache).

Nodes are tagged tuples, children always stored before parents::

    ("T",)                 true
    ("F",)                 false
    ("L", lit)             literal
    ("A", (c1, c2, ...))   conjunction of child indices
    ("O", var, hi, lo)     decision on var; hi entails var, lo entails -var
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from .errors import CompileBudgetError, ParseError

TRUE = ("T",)
FALSE = ("F",)
DEFAULT_NODE_BUDGET = 5_000_000


@dataclass(frozen=True)
class Circuit:
    nodes: tuple
    root: int
    num_vars: int

    def __len__(self):
        return len(self.nodes)

    @property
    def num_edges(self):
        return sum(_arity(n) for n in self.nodes)

    def is_false(self):
        return self.nodes[self.root] == FALSE


def _arity(n):
    if n[0] == "A":
        return len(n[1])
    if n[0] == "O":
        return 2
    return 0


def _condition(clauses, lits):
    """Assert ``lits`` and unit-propagate.

    Returns ``(implied_literals, remaining_clauses)`` or None on conflict.
    Remaining clauses have no assigned variables and length >= 2.
    """
    occ = {}
    free = []
    for i, c in enumerate(clauses):
        free.append(len(c))
        if len(c) == 1:
            lits = (*lits, c[0])
        for l in c:
            occ.setdefault(l, []).append(i)
    value = {}
    sat = [False] * len(clauses)
    implied = []
    queue = list(lits)
    while queue:
        l = queue.pop()
        v = abs(l)
        if v in value:
            if value[v] != (l > 0):
                return None
            continue
        value[v] = l > 0
        implied.append(l)
        for i in occ.get(l, ()):
            sat[i] = True
        for i in occ.get(-l, ()):
            if sat[i]:
                continue
            free[i] -= 1
            if free[i] == 0:
                return None
            if free[i] == 1:
                for u in clauses[i]:
                    if abs(u) not in value:
                        queue.append(u)
                        break
    if not implied:
        return implied, clauses
    rest = []
    for i, c in enumerate(clauses):
        if sat[i]:
            continue
        if free[i] == len(c):
            rest.append(c)
        else:
            rest.append(tuple(l for l in c if abs(l) not in value))
    return implied, rest


def _components(clauses):
    parent = {}

    def find(x):
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while x != root:
            nxt = parent.get(x, x)
            parent[x] = root
            x = nxt
        return root

    for c in clauses:
        r = find(abs(c[0]))
        for l in c[1:]:
            s = find(abs(l))
            if s != r:
                parent[s] = r
    groups = {}
    for c in clauses:
        groups.setdefault(find(abs(c[0])), []).append(c)
    return list(groups.values())


def _choose_var(clauses, priority=frozenset()):
    """Most occurrences in the component; ties go to the lower index.

    Variables in ``priority`` are preferred whenever one occurs. For a
    weighted CNF built from a program these are the probabilistic
    variables, which determine every other variable.
    """
    counts = {}
    for c in clauses:
        for l in c:
            v = abs(l)
            counts[v] = counts.get(v, 0) + 1
    if priority:
        preferred = [v for v in counts if v in priority]
        if preferred:
            return min(preferred, key=lambda v: (-counts[v], v))
    return min(counts, key=lambda v: (-counts[v], v))


class _Builder:
    def __init__(self, budget):
        self.nodes = []
        self.unique = {}
        self.budget = budget

    def add(self, node):
        i = self.unique.get(node)
        if i is None:
            i = len(self.nodes)
            if i >= self.budget:
                raise CompileBudgetError(f"circuit exceeded {self.budget} nodes")
            self.nodes.append(node)
            self.unique[node] = i
        return i

    def conj(self, children):
        kids = []
        for ch in children:
            n = self.nodes[ch]
            if n == FALSE:
                return self.add(FALSE)
            if n != TRUE:
                kids.append(ch)
        kids = sorted(set(kids))
        if not kids:
            return self.add(TRUE)
        if len(kids) == 1:
            return kids[0]
        return self.add(("A", tuple(kids)))


class _Compiler(_Builder):
    def __init__(self, budget, caching, priority):
        super().__init__(budget)
        self.caching = caching
        self.priority = priority
        self.cache = {}
        self.false = self.add(FALSE)

    def branch(self, clauses, lits):
        res = _condition(clauses, lits)
        if res is None:
            return self.false
        implied, rest = res
        parts = [self.add(("L", l)) for l in implied]
        for comp in _components(rest):
            child = self.component(comp)
            if child == self.false:
                return self.false
            parts.append(child)
        return self.conj(parts)

    def component(self, clauses):
        key = None
        if self.caching:
            key = tuple(sorted(clauses))
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        v = _choose_var(clauses, self.priority)
        hi = self.branch(clauses, (v,))
        lo = self.branch(clauses, (-v,))
        if hi == self.false:
            result = lo
        elif lo == self.false:
            result = hi
        else:
            result = self.add(("O", v, hi, lo))
        if key is not None:
            self.cache[key] = result
        return result


def _reachable(nodes, root):
    keep = [False] * len(nodes)
    keep[root] = True
    for i in range(root, -1, -1):
        if keep[i]:
            n = nodes[i]
            if n[0] == "A":
                for ch in n[1]:
                    keep[ch] = True
            elif n[0] == "O":
                keep[n[2]] = keep[n[3]] = True
    return keep


def _prune(nodes, root, num_vars):
    keep = _reachable(nodes, root)
    remap = {}
    out = []
    for i, n in enumerate(nodes):
        if not keep[i]:
            continue
        if n[0] == "A":
            n = ("A", tuple(remap[ch] for ch in n[1]))
        elif n[0] == "O":
            n = ("O", n[1], remap[n[2]], remap[n[3]])
        remap[i] = len(out)
        out.append(n)
    return Circuit(tuple(out), remap[root], num_vars)


def compile_cnf(cnf, *, caching: bool = True, budget: int = DEFAULT_NODE_BUDGET,
                priority=frozenset()) -> Circuit:
    """Compile a CNF into a decision-DNNF circuit (not yet smoothed).

    ``priority`` lists variables to branch on first (see _choose_var).
    """
    clauses = [tuple(sorted(set(c), key=abs)) for c in cnf.clauses]
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * cnf.num_vars + 1000))
    try:
        comp = _Compiler(budget, caching, frozenset(priority))
        root = comp.branch(clauses, ())
    finally:
        sys.setrecursionlimit(limit)
    return _prune(comp.nodes, root, cnf.num_vars)


def var_masks(circuit: Circuit) -> list:
    """Bitmask (bit v set for variable v) of the variables under each node."""
    masks = []
    for n in circuit.nodes:
        tag = n[0]
        if tag == "L":
            masks.append(1 << abs(n[1]))
        elif tag == "A":
            m = 0
            for ch in n[1]:
                m |= masks[ch]
            masks.append(m)
        elif tag == "O":
            masks.append(masks[n[2]] | masks[n[3]] | (1 << n[1]))
        else:
            masks.append(0)
    return masks


def smooth(circuit: Circuit) -> Circuit:
    """Make both children of every Or mention the same variables.

    Gaps are filled by conjoining ``(v or not v)`` gadgets. The root is also
    extended to mention every variable 1..num_vars, so that weighted counts
    range over complete assignments. Weighted counts are unchanged.
    """
    b = _Builder(DEFAULT_NODE_BUDGET * 4)
    masks = []

    def add(node):
        i = b.add(node)
        if i == len(masks):
            tag = node[0]
            if tag == "L":
                masks.append(1 << abs(node[1]))
            elif tag == "A":
                m = 0
                for ch in node[1]:
                    m |= masks[ch]
                masks.append(m)
            elif tag == "O":
                masks.append(masks[node[2]] | masks[node[3]] | (1 << node[1]))
            else:
                masks.append(0)
        return i

    def gadget(v):
        return add(("O", v, add(("L", v)), add(("L", -v))))

    def fill(i, missing):
        if not missing:
            return i
        extra = []
        v = 0
        while missing:
            if missing & 1:
                extra.append(gadget(v))
            missing >>= 1
            v += 1
        node = b.nodes[i]
        if node[0] == "A":
            return add(("A", node[1] + tuple(extra)))
        if node == TRUE:
            return extra[0] if len(extra) == 1 else add(("A", tuple(extra)))
        return add(("A", (i,) + tuple(extra)))

    remap = []
    for n in circuit.nodes:
        tag = n[0]
        if tag == "A":
            remap.append(add(("A", tuple(remap[ch] for ch in n[1]))))
        elif tag == "O":
            hi, lo = remap[n[2]], remap[n[3]]
            union = masks[hi] | masks[lo]
            hi = fill(hi, union & ~masks[hi])
            lo = fill(lo, union & ~masks[lo])
            remap.append(add(("O", n[1], hi, lo)))
        else:
            remap.append(add(n))
    root = remap[circuit.root]
    if b.nodes[root] != FALSE:
        full = ((1 << (circuit.num_vars + 1)) - 1) & ~1
        root = fill(root, full & ~masks[root])
    return _prune(b.nodes, root, circuit.num_vars)


def is_decomposable(circuit: Circuit) -> bool:
    masks = var_masks(circuit)
    for n in circuit.nodes:
        if n[0] == "A":
            seen = 0
            for ch in n[1]:
                if seen & masks[ch]:
                    return False
                seen |= masks[ch]
    return True


def _entails(circuit, i, lit, memo):
    key = (i, lit)
    if key in memo:
        return memo[key]
    n = circuit.nodes[i]
    tag = n[0]
    if tag == "L":
        r = n[1] == lit
    elif tag == "F":
        r = True
    elif tag == "T":
        r = False
    elif tag == "A":
        kids = sorted(n[1], key=lambda ch: circuit.nodes[ch][0] != "L")
        r = any(_entails(circuit, ch, lit, memo) for ch in kids)
    else:
        r = _entails(circuit, n[2], lit, memo) and _entails(circuit, n[3], lit, memo)
    memo[key] = r
    return r


def is_deterministic(circuit: Circuit) -> bool:
    """Every Or's hi child entails its variable and its lo child the negation."""
    memo = {}
    for n in circuit.nodes:
        if n[0] == "O":
            v = n[1]
            if not (_entails(circuit, n[2], v, memo) and _entails(circuit, n[3], -v, memo)):
                return False
    return True


def is_smooth(circuit: Circuit) -> bool:
    masks = var_masks(circuit)
    return all(masks[n[2]] == masks[n[3]] for n in circuit.nodes if n[0] == "O")


def evaluate(circuit: Circuit, values) -> bool:
    """Truth value of the circuit under ``values`` (indexable by variable)."""
    out = []
    for n in circuit.nodes:
        tag = n[0]
        if tag == "L":
            l = n[1]
            out.append(bool(values[abs(l)]) == (l > 0))
        elif tag == "A":
            out.append(all(out[ch] for ch in n[1]))
        elif tag == "O":
            out.append(out[n[2]] or out[n[3]])
        else:
            out.append(tag == "T")
    return out[circuit.root]


def to_nnf(circuit: Circuit) -> str:
    """Compiled-NNF text: ``nnf <nodes> <edges> <vars>`` then one node per line."""
    lines = [f"nnf {len(circuit.nodes)} {circuit.num_edges} {circuit.num_vars}"]
    for n in circuit.nodes:
        tag = n[0]
        if tag == "L":
            lines.append(f"L {n[1]}")
        elif tag == "A":
            lines.append(f"A {len(n[1])} " + " ".join(map(str, n[1])) if n[1] else "A 0")
        elif tag == "O":
            lines.append(f"O {n[1]} 2 {n[2]} {n[3]}")
        elif tag == "T":
            lines.append("A 0")
        else:
            lines.append("O 0 0")
    return "\n".join(lines) + "\n"


def from_nnf(text: str) -> Circuit:
    """Read compiled-NNF text; the last node is the root."""
    lines = [l.split() for l in text.splitlines() if l.strip() and not l.startswith("c")]
    if not lines or lines[0][0] != "nnf":
        raise ParseError("missing nnf header")
    _, n_nodes, _, n_vars = lines[0]
    nodes = []
    for lineno, parts in enumerate(lines[1:], 2):
        tag = parts[0]
        if tag == "L":
            nodes.append(("L", int(parts[1])))
        elif tag == "A":
            k = int(parts[1])
            nodes.append(("A", tuple(int(x) for x in parts[2:2 + k])) if k else TRUE)
        elif tag == "O":
            if parts[1:] == ["0", "0"]:
                nodes.append(FALSE)
            else:
                nodes.append(("O", int(parts[1]), int(parts[3]), int(parts[4])))
        else:
            raise ParseError(f"unknown node type {tag!r}", lineno, 1)
    if len(nodes) != int(n_nodes):
        raise ParseError(f"header announces {n_nodes} nodes, found {len(nodes)}")
    return Circuit(tuple(nodes), len(nodes) - 1, int(n_vars))
