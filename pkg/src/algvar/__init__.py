"""Finite algebras, syntactic algebras and varieties of regular languages.

The package works on finite recognizers: multi-sorted algebras given by
operation tables, letter maps and accepting sets.  Instantiations cover
finite words (monoids), omega-words (Wilke algebras) and binary trees.
"""

from .finalg import (
    AlgebraError,
    Congruence,
    FiniteAlgebra,
    Morphism,
    OpSymbol,
    Signature,
    StablePreorder,
    check_law,
    factor_through,
    quotient_by,
    validate_laws,
)
from .presentation import (
    Presentation,
    Recognizer,
    RecognizerError,
    is_reduced,
    joint_recognizer,
    reduce_quotient,
    syntactic_algebra,
)
from .words import Dfa, SubstitutionSpec, WordLanguage, compile_dfa, syntactic_monoid

__version__ = "0.1.0"

__all__ = [
    "AlgebraError",
    "Congruence",
    "Dfa",
    "FiniteAlgebra",
    "Morphism",
    "OpSymbol",
    "Presentation",
    "Recognizer",
    "RecognizerError",
    "Signature",
    "StablePreorder",
    "SubstitutionSpec",
    "WordLanguage",
    "check_law",
    "compile_dfa",
    "factor_through",
    "is_reduced",
    "joint_recognizer",
    "quotient_by",
    "reduce_quotient",
    "syntactic_algebra",
    "syntactic_monoid",
    "validate_laws",
]
