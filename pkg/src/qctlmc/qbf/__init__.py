"""Quantified Boolean formulas: construction, semantics, solving, emission."""

from .ast import (
    BOT, TOP, QNode, QbfError, const, eval_qbf, q_and, q_conj, q_disj, q_exists, q_forall,
    q_iff, q_implies, q_not, q_or, q_quant, simplify, substitute, var,
)
from .emit import PrenexCnf, emit_qdimacs, emit_smtlib, to_prenex_cnf
from .solver import DEFAULT_CEILING, InternalScaleError, SolverStats, check_validity

__all__ = [
    "BOT", "TOP", "QNode", "QbfError", "const", "eval_qbf", "q_and", "q_conj", "q_disj",
    "q_exists", "q_forall", "q_iff", "q_implies", "q_not", "q_or", "q_quant", "simplify",
    "substitute", "var", "PrenexCnf", "emit_qdimacs", "emit_smtlib", "to_prenex_cnf",
    "DEFAULT_CEILING", "InternalScaleError", "SolverStats", "check_validity",
]
