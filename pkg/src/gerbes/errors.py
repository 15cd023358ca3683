"""Exception hierarchy shared by all modules."""


class GerbeError(Exception):
    """Base class for every error raised by this package."""


class SizeBound(GerbeError):
    """An enumeration or matrix would exceed the configured limit."""


class OrderBound(SizeBound):
    """Group too large for the automorphism search."""


class ParseError(GerbeError):
    """Malformed input file."""


# group axioms


class GroupAxiomError(GerbeError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class BadIdentity(GroupAxiomError):
    pass


class NonAssociative(GroupAxiomError):
    pass


class NoInverse(GroupAxiomError):
    pass


class NotAModule(GerbeError):
    """Action matrices are not a representation."""


# groupoid axioms


class GroupoidAxiomError(GerbeError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BadStructureMap(GroupoidAxiomError):
    pass


class BadComposition(GroupoidAxiomError):
    pass


class NonAssociativeArrows(GroupoidAxiomError):
    pass


class BadUnit(GroupoidAxiomError):
    pass


class BadInverse(GroupoidAxiomError):
    pass


class NotAMorphism(GroupoidAxiomError):
    pass


class EmptyCover(GerbeError):
    pass


class NotSurjective(GerbeError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# extensions


class InvalidCocycle(GerbeError):
    def __init__(self, message, report=None, witness=None):
        super().__init__(message)
        self.report = report
        self.witness = witness


class NoCompletion(GerbeError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BadSection(GerbeError):
    pass


class BadTrivialization(GerbeError):
    pass


class NotConstant(GerbeError):
    """Pointwise data cannot be stored in nerve-constant mode."""


class NotTrivializable(GerbeError):
    pass


class LiftFailure(GerbeError):
    pass


class NotCentralSubgroup(GerbeError):
    pass


# morita


class NotMorita(GerbeError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotARefinement(GerbeError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class MiddleMismatch(GerbeError):
    pass


class BitorsorError(GerbeError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
