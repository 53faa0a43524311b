from typing import Iterable, List, Tuple

from dataclasses import dataclass

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput

from ..errors import ComplexHeadTerm, LogicSyntaxError, NonGroundFact
from ..logic import (
    Atom,
    BuiltinEq,
    BuiltinMember,
    Constant,
    ListConstant,
    Negated,
    Positive,
    Rule,
    RuleSet,
    Variable,
)

SYNTAX = r"""
start       : clause*

clause      : atom "."                      -> fact_clause
            | atom ":-" body "."            -> rule_clause

body        : literal ("," literal)*

?literal    : atom                          -> positive
            | NOT "(" atom ")"              -> negated
            | NOT "(" term "=" term ")"     -> not_equal
            | term "=" term                 -> equal

atom        : NAME "(" args ")"
            | NAME

args        : term ("," term)*

?term       : VARIABLE                      -> variable
            | NAME                          -> name_constant
            | SIGNED_INT                    -> int_constant
            | STRING                        -> string_constant
            | "[" "]"                       -> empty_list
            | "[" term ("," term)* "]"      -> list_term
            | NAME "(" args ")"             -> compound

NOT         : "not"
NAME        : /(?!not\b)[a-z][a-zA-Z0-9_]*/
VARIABLE    : /[A-Z_][a-zA-Z0-9_]*/
STRING      : /'(?:[^'\\]|\\.)*'/ | /"(?:[^"\\]|\\.)*"/
COMMENT     : /%[^\n]*/

%import common.SIGNED_INT
%import common.WS
%ignore COMMENT
%ignore WS
"""

logic_parser = Lark(SYNTAX, parser="lalr")


@dataclass(frozen=True)
class Compound:
    """A function term. Only ever produced to be rejected."""

    name: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.name}(" + ", ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple
    line: int


def _unquote(text: str) -> str:
    body = text[1:-1]
    out = []
    escaped = False
    for ch in body:
        if escaped:
            out.append({"n": "\n", "t": "\t"}.get(ch, ch))
            escaped = False
        elif ch == "\\":
            escaped = True
        else:
            out.append(ch)
    return "".join(out)


class LogicTransformer(Transformer):
    """
    Lark Transformer for the rule and fact file syntax.

    Produces Clause values; restrictions on where lists and function terms
    may appear are checked afterwards by LogicParser.
    """

    def __init__(self, *args, **kwargs) -> None:
        self._anonymous = 0
        super().__init__(*args, **kwargs)

    def start(self, clauses):
        return list(clauses)

    def fact_clause(self, children):
        head, = children
        return Clause(head, (), self._line_of(head))

    def rule_clause(self, children):
        head, body = children
        return Clause(head, tuple(body), self._line_of(head))

    def body(self, literals):
        return list(literals)

    def positive(self, children):
        atom, = children
        if atom.name == "member" and len(atom.args) == 2:
            return BuiltinMember(atom.args[0], atom.args[1])
        return Positive(atom)

    def negated(self, children):
        _, atom = children
        return Negated(atom)

    def not_equal(self, children):
        _, left, right = children
        return BuiltinEq(left, right, negated=True)

    def equal(self, children):
        left, right = children
        return BuiltinEq(left, right)

    def atom(self, children):
        name = children[0]
        args = tuple(children[1]) if len(children) > 1 else ()
        atom = Atom(str(name), args)
        self._lines[id(atom)] = name.line
        return atom

    def args(self, terms):
        return list(terms)

    def variable(self, children):
        name = str(children[0])
        if name == "_":
            self._anonymous += 1
            name = f"_G{self._anonymous}"
        return Variable(name)

    def name_constant(self, children):
        return Constant(str(children[0]))

    def int_constant(self, children):
        return Constant(int(children[0]))

    def string_constant(self, children):
        return Constant(_unquote(str(children[0])))

    def empty_list(self, children):
        return ListConstant(())

    def list_term(self, children):
        return ListConstant(tuple(children))

    def compound(self, children):
        name, args = children
        return Compound(str(name), tuple(args))

    def transform(self, tree):
        self._lines = {}
        return super().transform(tree)

    def _line_of(self, atom: Atom) -> int:
        return self._lines.get(id(atom))


def _check_head(clause: Clause) -> None:
    if not clause.head.is_flat():
        raise ComplexHeadTerm(
            f"complex term in head {clause.head} (line {clause.line})"
        )


def _check_term(term, clause: Clause, where: str) -> None:
    if isinstance(term, Compound):
        raise LogicSyntaxError(f"function term {term} in {where}", clause.line)
    if isinstance(term, ListConstant):
        raise LogicSyntaxError(f"list {term} outside member/2 in {where}", clause.line)


def _check_body(clause: Clause) -> None:
    for literal in clause.body:
        if isinstance(literal, (Positive, Negated)):
            for arg in literal.atom.args:
                _check_term(arg, clause, str(literal))
        elif isinstance(literal, BuiltinEq):
            _check_term(literal.left, clause, str(literal))
            _check_term(literal.right, clause, str(literal))
        else:
            _check_term(literal.element, clause, str(literal))
            if isinstance(literal.collection, Compound):
                _check_term(literal.collection, clause, str(literal))
            if isinstance(literal.collection, ListConstant):
                for element in literal.collection.elements:
                    if not isinstance(element, Constant):
                        raise LogicSyntaxError(
                            f"list elements must be ground constants in {literal}",
                            clause.line,
                        )


class LogicParser:
    """
    A parser for rule files and fact files.

    Contains minimal logic; see LogicTransformer for the tree mapping.
    """

    def parse(self, text: str) -> List[Clause]:
        """
        Parse program text into clauses.

        Arguments:
            text (str): The contents to parse

        Returns:
            List[Clause]: Clauses in file order, with their line numbers

        """
        try:
            tree = logic_parser.parse(text)
        except UnexpectedInput as exc:
            raise LogicSyntaxError(
                f"malformed clause near {_context(text, exc)!r}",
                getattr(exc, "line", None),
                getattr(exc, "column", None),
            ) from None
        clauses = LogicTransformer().transform(tree)
        for clause in clauses:
            _check_head(clause)
            _check_body(clause)
        return clauses


def _context(text: str, exc: UnexpectedInput) -> str:
    try:
        return exc.get_context(text, span=20).splitlines()[0].strip()
    except Exception:  # get_context needs a position lark may not have
        return text.strip()[:40]


def parse_rule(text: str) -> Rule:
    """
    Parse exactly one clause.

    Arguments:
        text (str): One clause terminated by a period

    Returns:
        Rule: The structured rule; body order preserved

    """
    clauses = LogicParser().parse(text)
    if len(clauses) != 1:
        raise LogicSyntaxError(f"expected exactly one clause, found {len(clauses)}")
    clause = clauses[0]
    return Rule(clause.head, clause.body)


def parse_rules(text: str, extensional: Iterable = ()) -> RuleSet:
    """
    Parse a rule file into a RuleSet.

    Arguments:
        text (str): Rule file contents
        extensional (Iterable[Predicate]): The base predicates of the rules

    Returns:
        RuleSet: The rules, numbered per head predicate

    """
    clauses = LogicParser().parse(text)
    return RuleSet([Rule(c.head, c.body) for c in clauses], extensional)


def parse_located_facts(text: str) -> List[Tuple[Atom, int]]:
    """Parse a fact file, keeping the line number of every fact."""
    located = []
    for clause in LogicParser().parse(text):
        if clause.body:
            raise LogicSyntaxError("rules are not allowed in fact files", clause.line)
        if not clause.head.is_ground():
            raise NonGroundFact(f"{clause.head} is not ground (line {clause.line})")
        located.append((clause.head, clause.line))
    return located


def parse_fact_file(text: str) -> List[Atom]:
    """
    Parse a fact file.

    Arguments:
        text (str): Ground fact clauses and % comments

    Returns:
        List[Atom]: Facts in file order, duplicates preserved

    """
    return [atom for atom, _ in parse_located_facts(text)]


def parse_constant(text: str):
    """Read a constant given on the command line: integers stay integers."""
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return _unquote(text)
    return text
