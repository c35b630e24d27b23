"""mrl: an interpreter for a small Rascal-like meta-programming language."""

from .errors import (AmbiguityError, FixpointBudgetExceeded, MrlError,
                     MrlSyntaxError, NoApplicableAlternative, ParseError, Thrown)
from .grammar import compile_grammar, count_derivations, implode, parse, unparse
from .interpreter import Interpreter
from .patterns import match_all, subterms
from .types import Declarations, instance_of, lub, subtype_of, type_of
from .valueparse import parse_value
from .values import render, transitive_closure

__all__ = [
    "AmbiguityError", "Declarations", "FixpointBudgetExceeded", "Interpreter",
    "MrlError", "MrlSyntaxError", "NoApplicableAlternative", "ParseError", "Thrown",
    "compile_grammar", "count_derivations", "implode", "instance_of", "lub",
    "match_all", "parse", "parse_value", "render", "subterms", "subtype_of",
    "transitive_closure", "type_of", "unparse",
]
