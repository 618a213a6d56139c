# QMLL核心库
from .formula import parse_formula, print_formula
from .matrix import UnitaryMatrix, StateVector
from .proof_text import parse_proof, print_proof
from .proof import check, conclusion
from .cut_elim import normalize
from .qiam import semantics_relative
from .circuit import encode, extract, parse_circuit, simulate

__all__ = [
    "parse_formula",
    "print_formula",
    "UnitaryMatrix",
    "StateVector",
    "parse_proof",
    "print_proof",
    "check",
    "conclusion",
    "normalize",
    "semantics_relative",
    "encode",
    "extract",
    "parse_circuit",
    "simulate"
]
