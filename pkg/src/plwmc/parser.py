"""Reader and well-formedness checks for the ProbLog-style program syntax.

Statements are ``.``-terminated; ``%`` starts a line comment::

    0.3::rain.
    wet :- rain.
    wet :- sprinkler, \\+ covered.
    query(wet).
    evidence(rain, false).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import ParseError
from .logic import (
    Atom,
    Compound,
    Constant,
    Literal,
    ProbFact,
    Program,
    Rule,
    Variable,
    unifiable,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<number>\d+\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<string>'(?:[^'\\]|\\.)*')
  | (?P<punct>::|:-|\\\+|[(),.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text):
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(_Tok(kind, m.group(), line, i - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = i + chunk.rfind("\n") + 1
        i = m.end()
    tokens.append(_Tok("eof", "", line, i - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def accept(self, text):
        if self.tok.kind == "punct" and self.tok.text == text:
            return self.advance()
        return None

    def expect(self, text):
        tok = self.accept(text)
        if tok is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return tok

    def term(self):
        tok = self.tok
        if tok.kind == "var":
            self.advance()
            return Variable(tok.text)
        if tok.kind == "number":
            self.advance()
            return Constant(tok.text)
        if tok.kind == "string":
            self.advance()
            return Constant(_unquote(tok.text))
        if tok.kind == "name":
            self.advance()
            if self.accept("("):
                return Compound(tok.text, self.term_list())
            return Constant(tok.text)
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    def term_list(self):
        args = [self.term()]
        while self.accept(","):
            args.append(self.term())
        self.expect(")")
        return tuple(args)

    def atom(self):
        tok = self.tok
        if tok.kind == "name":
            name = tok.text
        elif tok.kind == "string":
            name = _unquote(tok.text)
        else:
            raise self.error(f"expected an atom, found {tok.text or 'end of input'!r}")
        self.advance()
        args = self.term_list() if self.accept("(") else ()
        return Atom(name, args)

    def literal(self):
        if self.accept("\\+"):
            return Literal(self.atom(), False)
        return Literal(self.atom(), True)

    def body(self):
        lits = [self.literal()]
        while self.accept(","):
            lits.append(self.literal())
        return tuple(lits)


def _unquote(text):
    return re.sub(r"\\(.)", r"\1", text[1:-1])


def _term_to_atom(term, parser, tok):
    if isinstance(term, Constant):
        return Atom(term.name)
    if isinstance(term, Compound):
        return Atom(term.functor, term.args)
    raise parser.error("directive argument must be an atom", tok)


def parse_program(text: str) -> Program:
    """Parse program text into a :class:`Program`.

    Raises :class:`ParseError` (with line and column) on malformed input,
    probabilities outside [0, 1] and duplicate evidence for one atom.
    """
    p = _Parser(text)
    facts, rules, queries, evidence = [], [], [], {}
    while p.tok.kind != "eof":
        start = p.tok
        pos = (start.line, start.col)
        if start.kind == "number" and p.toks[p.i + 1].text == "::":
            p.advance()
            p.advance()
            prob = float(start.text)
            if not 0.0 <= prob <= 1.0:
                raise p.error(f"probability {start.text} outside [0, 1]", start)
            head = p.atom()
            if p.tok.text == ":-":
                raise p.error("probabilistic rules are not supported; use a probabilistic fact")
            p.expect(".")
            facts.append(ProbFact(prob, head, pos=pos))
            continue

        head = p.atom()
        if p.accept(":-"):
            body = p.body()
            p.expect(".")
            rules.append(Rule(head, body, pos=pos))
            continue
        p.expect(".")

        if head.predicate == "query" and len(head.args) == 1:
            q = _term_to_atom(head.args[0], p, start)
            if q not in queries:
                queries.append(q)
        elif head.predicate == "evidence" and len(head.args) in (1, 2):
            target = _term_to_atom(head.args[0], p, start)
            value = True
            if len(head.args) == 2:
                flag = head.args[1]
                if not isinstance(flag, Constant) or flag.name not in ("true", "false"):
                    raise p.error("evidence value must be true or false", start)
                value = flag.name == "true"
            if target in evidence:
                raise p.error(f"duplicate evidence for {target}", start)
            evidence[target] = value
        else:
            rules.append(Rule(head, (), pos=pos))
    return Program(tuple(facts), tuple(rules), tuple(queries), tuple(evidence.items()))


def parse_atom(text: str) -> Atom:
    p = _Parser(text)
    a = p.atom()
    if p.tok.kind != "eof":
        raise p.error(f"trailing input {p.tok.text!r}")
    return a


def parse_evidence_flag(text: str):
    """Parse ``atom=true|false`` as used by the command line."""
    name, sep, value = text.rpartition("=")
    if not sep or value not in ("true", "false"):
        raise ParseError(f"evidence must look like atom=true|false, got {text!r}")
    return parse_atom(name), value == "true"


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    pos: Optional[tuple] = None

    def __str__(self):
        where = f"{self.pos[0]}:{self.pos[1]}: " if self.pos else ""
        return f"{where}{self.kind}: {self.message}"


def _has_compound(atom):
    return any(isinstance(a, Compound) for a in atom.args)


def validate(program: Program) -> list:
    """Return diagnostics; an empty list means the program is supported.

    Checks: probabilistic and derived atoms are disjoint, probabilistic
    facts do not overlap, non-ground programs are function-free, rules are
    range-restricted (head and negated variables occur positively in the
    body), and queries/evidence are ground.
    """
    diags = []
    heads_by_sig = {}
    for r in program.rules:
        heads_by_sig.setdefault(r.head.signature, []).append(r)
    facts_by_sig = {}
    for f in program.prob_facts:
        facts_by_sig.setdefault(f.atom.signature, []).append(f)

    reported = set()
    for f in program.prob_facts:
        for r in heads_by_sig.get(f.atom.signature, ()):
            if unifiable(f.atom, r.head) and (f.atom, r.head) not in reported:
                reported.add((f.atom, r.head))
                diags.append(Diagnostic(
                    "disjointness",
                    f"{f.atom} is both probabilistic and derived (rule head {r.head})",
                    r.pos or f.pos,
                ))

    for facts in facts_by_sig.values():
        for i, f in enumerate(facts):
            for g in facts[i + 1:]:
                if unifiable(f.atom, g.atom):
                    diags.append(Diagnostic(
                        "duplicate-fact",
                        f"probabilistic facts {f.atom} and {g.atom} overlap",
                        g.pos,
                    ))

    non_ground = any(not r.is_ground() for r in program.rules) or any(
        not f.atom.is_ground() for f in program.prob_facts
    )
    if non_ground:
        for r in program.rules:
            if _has_compound(r.head) or any(_has_compound(l.atom) for l in r.body):
                diags.append(Diagnostic(
                    "function-symbol", f"non-ground program uses compound terms in {r}", r.pos
                ))
        for f in program.prob_facts:
            if _has_compound(f.atom):
                diags.append(Diagnostic(
                    "function-symbol", f"non-ground program uses compound terms in {f}", f.pos
                ))

    for r in program.rules:
        bound = {v for l in r.body if l.positive for v in l.atom.variables()}
        for v in dict.fromkeys(r.head.variables()):
            if v not in bound:
                diags.append(Diagnostic(
                    "range-restriction",
                    f"head variable {v} of {r.head} does not occur in a positive body literal",
                    r.pos,
                ))
        for l in r.body:
            if not l.positive:
                for v in dict.fromkeys(l.atom.variables()):
                    if v not in bound:
                        diags.append(Diagnostic(
                            "unsafe-negation",
                            f"variable {v} of {l} does not occur in a positive body literal",
                            r.pos,
                        ))

    for q in program.queries:
        if not q.is_ground():
            diags.append(Diagnostic("non-ground-query", f"query {q} is not ground"))
    for a, _ in program.evidence:
        if not a.is_ground():
            diags.append(Diagnostic("non-ground-evidence", f"evidence {a} is not ground"))
    return diags
