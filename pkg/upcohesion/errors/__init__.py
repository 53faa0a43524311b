"""
Exception hierarchy for upcohesion.

Every error carries an `exit_code`; the CLI uses it to pick the process exit
status (1 for domain errors, 2 for file and parse errors).
"""


class UpCohesionError(Exception):
    """Base class of every error raised by this package."""

    exit_code = 1


class ParseError(UpCohesionError):
    """A rule or fact text could not be turned into structured values."""

    exit_code = 2


class LogicSyntaxError(ParseError):
    """
    Malformed clause text.

    The location is 1-based; either may be None when unknown.
    """

    def __init__(self, message: str, line: int = None, column: int = None) -> None:
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f" (line {line}" + (f", column {column})" if column else ")")
        super().__init__(f"{message}{location}")


class ComplexHeadTerm(ParseError):
    """A clause head contains a function term or a list."""


class NonGroundFact(ParseError):
    """A fact clause contains a variable."""


class UnknownFactPredicate(ParseError):
    """An ingested fact file uses a predicate outside its schema."""

    def __init__(self, message: str, line: int = None) -> None:
        self.line = line
        super().__init__(message if line is None else f"{message} (line {line})")


class InvalidRuleSet(UpCohesionError):
    """A rule set failed validation; `report` lists every violation."""

    def __init__(self, report) -> None:
        self.report = report
        super().__init__(str(report))


class NotStratifiable(UpCohesionError):
    """The predicate dependency graph has a cycle through negation."""

    def __init__(self, predicates) -> None:
        self.predicates = tuple(predicates)
        names = ", ".join(str(p) for p in self.predicates)
        super().__init__(f"negative cycle through {names}")


class ReservedPredicateName(UpCohesionError):
    """A generated delta or state predicate would shadow a user predicate."""


class ConflictingSeed(UpCohesionError):
    """The same tuple is both inserted and deleted by one seed set."""


class SeedPredicateUnknown(UpCohesionError):
    """A seed names a predicate that is not extensional for the rule set."""


class UnknownClass(UpCohesionError):
    """A class id is not part of the model."""


class DanglingReference(UpCohesionError):
    """A program element fact references an element that does not exist."""


class DuplicateElementId(UpCohesionError):
    """Two program elements share one id."""


class ElementNotInClass(UpCohesionError):
    """A refactoring names a method or field its source class does not own."""


class TargetEqualsSource(UpCohesionError):
    """A refactoring would move an element onto its own class."""


class ClassIdInUse(UpCohesionError):
    """A requested new class id already names a model element."""


class MetricInvariantError(UpCohesionError):
    """A metric mapping produced a value outside its documented range."""


class BenchParameterError(UpCohesionError):
    """Benchmark parameters out of range."""


class MismatchDetected(UpCohesionError):
    """Incremental and full recomputation disagreed during a benchmark."""

    def __init__(self, message: str, reproduction: dict) -> None:
        self.reproduction = reproduction
        super().__init__(message)


class NoPendingWhatIf(UpCohesionError):
    """`commit` was requested but no what-if analysis is pending."""


class EmptyWorkspace(UpCohesionError):
    """A command needs a model but none was ingested or given."""
