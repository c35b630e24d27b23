"""Exception hierarchy for the mrl toolchain.

Everything the interpreter raises on purpose derives from MrlError.  Values
thrown by programs travel as ``Thrown``; the remaining classes are host-level
diagnostics that programs cannot catch.
"""


class MrlError(Exception):
    """Base class.  ``loc`` is a ``(file, offset, length)`` triple when known."""

    def __init__(self, message="", loc=None):
        super().__init__(message)
        self.message = message
        self.loc = loc

    def where(self):
        if self.loc is None:
            return ""
        file, offset, length = self.loc
        return "|%s|(%d,%d)" % (file, offset, length)

    def __str__(self):
        w = self.where()
        return "%s: %s" % (w, self.message) if w else self.message


# value-core

class ValueSyntaxError(MrlError):
    def __init__(self, message, offset):
        super().__init__("%s at offset %d" % (message, offset))
        self.offset = offset


class UnknownTypeName(MrlError):
    pass


class ArityError(MrlError):
    pass


# pattern-engine

class UndeclaredConstructor(MrlError):
    pass


class TypeAnnotationError(MrlError):
    pass


# grammar-parser

class GrammarError(MrlError):
    pass


class UnknownSymbol(GrammarError):
    pass


class DuplicateLabel(GrammarError):
    pass


class MultipleLayoutDecls(GrammarError):
    pass


class NoProductions(GrammarError):
    pass


class ParseError(MrlError):
    def __init__(self, offset, expected, source="unknown"):
        shown = ", ".join(sorted(expected)) or "end of input"
        super().__init__("parse error, expected one of: %s" % shown,
                         (source, offset, 0))
        self.offset = offset
        self.expected = frozenset(expected)


class AmbiguityError(MrlError):
    def __init__(self, count, samples, source="unknown"):
        super().__init__("ambiguous input: %d derivations" % count,
                         (source, 0, 0))
        self.count = count
        self.samples = samples


class ImplodeError(MrlError):
    pass


# interpreter

class MrlSyntaxError(MrlError):
    pass


class LoadError(MrlError):
    """Module could not be located or read."""


class DuplicateDeclaration(MrlError):
    pass


class CyclicImport(MrlError):
    pass


class NoApplicableAlternative(MrlError):
    pass


class MrlTypeError(MrlError):
    pass


class ReturnTypeError(MrlTypeError):
    pass


class ReplacementTypeError(MrlTypeError):
    pass


class ConditionTypeError(MrlTypeError):
    pass


class KeyTypeError(MrlTypeError):
    pass


class FixpointBudgetExceeded(MrlError):
    def __init__(self, message, iterations, loc=None):
        super().__init__(message, loc)
        self.iterations = iterations


class UnbalancedTemplate(MrlSyntaxError):
    pass


class FailOutsideBacktrackingScope(MrlError):
    pass


class InsertOutsideVisit(MrlError):
    pass


class UndefinedName(MrlError):
    pass


class Thrown(MrlError):
    """A program-level exception carrying an mrl value."""

    def __init__(self, value, loc=None):
        from .values import render
        super().__init__("uncaught: %s" % render(value), loc)
        self.value = value


class IoError(Thrown):
    pass
