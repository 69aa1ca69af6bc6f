"""Inference for probabilistic logic programs via weighted model counting."""

from .errors import (
    BudgetExceeded,
    InconsistentEvidenceError,
    ParseError,
    PlwmcError,
    UnsupportedProgramError,
    ValidationError,
)
from .grounder import GroundProgram, ground, ground_full
from .inference import MarginalReport, circuit_wmc, marginals_traversal, marginals_two_wmc, mpe_exact
from .logic import Atom, Literal, ProbFact, Program, Rule, World, atom
from .parser import parse_program, validate
from .pipeline import prepare

__all__ = [
    "Atom", "BudgetExceeded", "GroundProgram", "InconsistentEvidenceError", "Literal",
    "MarginalReport", "ParseError", "PlwmcError", "ProbFact", "Program", "Rule",
    "UnsupportedProgramError", "ValidationError", "World", "atom", "circuit_wmc", "ground",
    "ground_full", "marginals_traversal", "marginals_two_wmc", "mpe_exact", "parse_program",
    "prepare", "validate",
]
