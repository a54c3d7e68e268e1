"""QCTL model checking by reduction to QBF."""

import sys

from .formula import Formula
from .kripke import KripkeError, KripkeStructure, parse_kripke, serialize_kripke
from .parser import FormulaSyntaxError, parse_formula

# translations of long until chains recurse deeply
if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)

__all__ = [
    "Formula",
    "FormulaSyntaxError",
    "KripkeError",
    "KripkeStructure",
    "parse_formula",
    "parse_kripke",
    "serialize_kripke",
]
