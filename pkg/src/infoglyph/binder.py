"""Binding indicator values from an account into a model.

Direct indicators are stored values. Indirect indicators are formulas over
other indicators using ``+ - * /`` and parentheses (``×`` and ``÷`` are
accepted too). Text values and chart data refer to indicators through
``{{name}}`` or ``{{name|decimals}}`` placeholders.

All arithmetic is :class:`~decimal.Decimal` in a fixed 34-digit context, so
results do not depend on the platform.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Context, Decimal, DivisionByZero, InvalidOperation
from typing import Union

from .model import (Account, BarChart, InfographicModel, ModelError, PieChart, Picturegraph, Section,
                    TextElement)
from .parser import PLACEHOLDER_RE, Diagnostic, Severity, TokenError, _build_tree, parse_decimal

CONTEXT = Context(prec=34, rounding=ROUND_HALF_EVEN, traps=[InvalidOperation, DivisionByZero])


class IndicatorError(ValueError):
    """Base class for evaluation failures. ``name`` is the indicator involved."""

    def __init__(self, name: str, message: str):
        super().__init__(message)
        self.name = name


class UnknownIndicator(IndicatorError):
    def __init__(self, name: str, referrer: str | None = None):
        where = f" (referenced by {referrer!r})" if referrer else ""
        super().__init__(name, f"unknown indicator {name!r}{where}")


class CyclicFormula(IndicatorError):
    def __init__(self, cycle: list[str]):
        super().__init__(cycle[0], "formula cycle: " + " -> ".join(cycle))
        self.cycle = cycle


class DivisionByZeroError(IndicatorError):
    def __init__(self, name: str):
        super().__init__(name, f"division by zero while evaluating {name!r}")


class FormulaSyntaxError(IndicatorError):
    pass


# --------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Num:
    value: Decimal


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Ref, Neg, BinOp]

_TOKEN_RE = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|([A-Za-z_][A-Za-z0-9_.]*)|([-+*/()×÷−]))")
_OP_ALIASES = {"×": "*", "÷": "/", "−": "-"}


def _tokenize(text: str, name: str) -> list[str]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormulaSyntaxError(name, f"{name}: unexpected character {text[pos:].lstrip()[:1]!r} in {text!r}")
        tok = m.group(1) or m.group(2) or m.group(3)
        tokens.append(_OP_ALIASES.get(tok, tok))
        pos = m.end()
    return tokens


class _ExprParser:
    # expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)*
    # unary := '-' unary | atom ; atom := number | name | '(' expr ')'

    def __init__(self, text: str, name: str):
        self.text = text
        self.name = name
        self.tokens = _tokenize(text, name)
        self.i = 0

    def fail(self, what: str):
        raise FormulaSyntaxError(self.name, f"{self.name}: {what} in formula {self.text!r}")

    def peek(self) -> str | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end")
        self.i += 1
        return tok

    def parse(self) -> Expr:
        if not self.tokens:
            self.fail("empty expression")
        e = self.expr()
        if self.peek() is not None:
            self.fail(f"unexpected {self.peek()!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek() in ("+", "-"):
            e = BinOp(self.take(), e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek() in ("*", "/"):
            e = BinOp(self.take(), e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek() == "-":
            self.take()
            return Neg(self.unary())
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.atom()

    def atom(self) -> Expr:
        tok = self.take()
        if tok == "(":
            e = self.expr()
            if self.take() != ")":
                self.fail("expected ')'")
            return e
        if tok[0].isdigit() or tok[0] == ".":
            return Num(Decimal(tok))
        if tok[0].isalpha() or tok[0] == "_":
            return Ref(tok)
        self.fail(f"unexpected {tok!r}")


def parse_expression(text: str, name: str = "<formula>") -> Expr:
    return _ExprParser(text, name).parse()


def references(expr: Expr) -> list[str]:
    """Indicator names in ``expr``, first occurrence order."""
    out: dict[str, None] = {}

    def walk(e: Expr) -> None:
        if isinstance(e, Ref):
            out.setdefault(e.name)
        elif isinstance(e, Neg):
            walk(e.operand)
        elif isinstance(e, BinOp):
            walk(e.left)
            walk(e.right)

    walk(expr)
    return list(out)


# --------------------------------------------------------------------------
# Evaluation


class Evaluator:
    """Memoizing evaluator for one account. Not shared between threads."""

    def __init__(self, account: Account):
        self.account = account
        self._memo: dict[str, Decimal] = {}
        self._parsed: dict[str, Expr] = {}
        self._active: list[str] = []

    def expression(self, name: str) -> Expr:
        if name not in self._parsed:
            self._parsed[name] = parse_expression(self.account.formulas[name], name)
        return self._parsed[name]

    def __call__(self, name: str, referrer: str | None = None) -> Decimal:
        if name in self._memo:
            return self._memo[name]
        if name in self.account.values:
            return self.account.values[name]
        if name not in self.account.formulas:
            raise UnknownIndicator(name, referrer)
        if name in self._active:
            raise CyclicFormula(self._active[self._active.index(name):] + [name])
        self._active.append(name)
        try:
            result = self._eval(self.expression(name), name)
        finally:
            self._active.pop()
        self._memo[name] = result
        return result

    def _eval(self, e: Expr, owner: str) -> Decimal:
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Ref):
            return self(e.name, owner)
        if isinstance(e, Neg):
            return CONTEXT.minus(self._eval(e.operand, owner))
        a = self._eval(e.left, owner)
        b = self._eval(e.right, owner)
        if e.op == "+":
            return CONTEXT.add(a, b)
        if e.op == "-":
            return CONTEXT.subtract(a, b)
        if e.op == "*":
            return CONTEXT.multiply(a, b)
        if b == 0:
            raise DivisionByZeroError(owner)
        return CONTEXT.divide(a, b)


def evaluate_indicator(name: str, account: Account) -> Decimal:
    """Value of a direct or indirect indicator."""
    return Evaluator(account)(name)


def check_account(account: Account) -> list[IndicatorError]:
    """Every problem in the account's formulas: syntax, unknown names, cycles."""
    ev = Evaluator(account)
    problems: list[IndicatorError] = []
    for name in sorted(account.formulas):
        try:
            ev(name)
        except DivisionByZeroError:
            pass  # a data problem, reported only if the indicator is used
        except IndicatorError as e:
            problems.append(e)
    return problems


# --------------------------------------------------------------------------
# Formatting and substitution


@dataclass(frozen=True)
class FormatSpec:
    """Default number of decimals for placeholders without ``|N``; None = minimal."""

    decimals: int | None = None


def format_decimal(value: Decimal, decimals: int | None = None) -> str:
    """Plain notation, ``.`` as separator, no grouping. Rounds half to even."""
    if decimals is not None:
        value = value.quantize(Decimal(1).scaleb(-decimals), rounding=ROUND_HALF_EVEN, context=CONTEXT)
    else:
        value = value.normalize(CONTEXT)
    text = format(value, "f")
    if text.startswith("-") and not text.strip("-0."):
        text = text[1:]  # no negative zero
    return text


@dataclass(frozen=True)
class BindIssue:
    element_id: str
    name: str
    message: str

    def __str__(self) -> str:
        return f"{self.element_id}: {self.message}"


class BindError(ValueError):
    """Binding failed; ``issues`` lists every unresolved placeholder."""

    def __init__(self, issues: list[BindIssue]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))


def _substitute(text: str, ev: Evaluator, fmt: FormatSpec, element_id: str, issues: list[BindIssue]) -> str:
    def repl(m: re.Match) -> str:
        name, places = m.group(1), m.group(2)
        try:
            value = ev(name)
        except IndicatorError as e:
            issues.append(BindIssue(element_id, e.name, str(e)))
            return m.group(0)
        return format_decimal(value, int(places) if places is not None else fmt.decimals)

    return PLACEHOLDER_RE.sub(repl, text)


def substitute_placeholders(text: str, account: Account, format: FormatSpec = FormatSpec(),
                            element_id: str = "<text>") -> str:
    """Replace each ``{{name}}`` / ``{{name|N}}`` in ``text`` by the formatted indicator value."""
    issues: list[BindIssue] = []
    out = _substitute(text, Evaluator(account), format, element_id, issues)
    if issues:
        raise BindError(issues)
    return out


def _datum(value, ev: Evaluator, element_id: str, label: str, issues: list[BindIssue]):
    if not isinstance(value, str):
        return value
    m = PLACEHOLDER_RE.fullmatch(value.strip())
    if m is None:
        issues.append(BindIssue(element_id, label, f"datum {label!r} is not a number or placeholder: {value!r}"))
        return value
    try:
        number = ev(m.group(1))
    except IndicatorError as e:
        issues.append(BindIssue(element_id, e.name, str(e)))
        return value
    if m.group(2) is not None:
        number = number.quantize(Decimal(1).scaleb(-int(m.group(2))), rounding=ROUND_HALF_EVEN, context=CONTEXT)
    return float(number)


class _Binder:
    def __init__(self, account: Account, fmt: FormatSpec):
        self.ev = Evaluator(account)
        self.fmt = fmt
        self.issues: list[BindIssue] = []

    def text(self, s: str, element_id: str) -> str:
        return _substitute(s, self.ev, self.fmt, element_id, self.issues)

    def rebuild(self, obj, **changes):
        changes = {k: v for k, v in changes.items() if getattr(obj, k) != v}
        if not changes:
            return obj
        try:
            return dataclasses.replace(obj, **changes)
        except ModelError as e:
            self.issues.append(BindIssue(obj.id, e.field, f"bound value rejected: {e.message}"))
            return obj

    def element(self, el):
        if isinstance(el, TextElement):
            return self.rebuild(el, value=self.text(el.value, el.id))
        if isinstance(el, (PieChart, BarChart)):
            data = tuple((self.text(label, el.id), _datum(v, self.ev, el.id, label, self.issues))
                         for label, v in el.data)
            if isinstance(el, PieChart):
                return self.rebuild(el, data=data, title=self.text(el.title, el.id))
            return self.rebuild(el, data=data)
        if isinstance(el, Picturegraph):
            return self.rebuild(el, value=_datum(el.value, self.ev, el.id, "value", self.issues))
        return el

    def section(self, s: Section | None) -> Section | None:
        if s is None:
            return None
        return dataclasses.replace(
            s,
            title=self.element(s.title) if s.title else None,
            subtitle=self.element(s.subtitle) if s.subtitle else None,
            text=self.element(s.text) if s.text else None,
            children=tuple(self.element(c) for c in s.children),
        )


def bind(model: InfographicModel, account: Account, format: FormatSpec = FormatSpec()) -> InfographicModel:
    """A copy of ``model`` with every placeholder resolved against ``account``.

    Geometry, fonts, colours and element order are untouched. Raises
    :class:`BindError` listing every failure with its element id.
    """
    b = _Binder(account, format)
    head = b.section(model.head)
    foot = b.section(model.foot)
    body = tuple(b.element(el) for el in model.body)
    if b.issues:
        raise BindError(b.issues)
    return dataclasses.replace(model, head=head, foot=foot, body=body)


# --------------------------------------------------------------------------
# Account files


class AccountFileError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


def parse_account(source: str) -> Account:
    """Read an account file: top-level ``values:`` and ``formulas:`` blocks."""
    diags: list[Diagnostic] = []
    root = _build_tree(source.lstrip("\ufeff").replace("\r\n", "\n"), diags)
    values: dict[str, Decimal] = {}
    formulas: dict[str, str] = {}

    def err(line: int, path: str, msg: str) -> None:
        diags.append(Diagnostic(Severity.ERROR, line, path, msg))

    for node in root.children:
        if node.key not in ("values", "formulas"):
            err(node.line, node.key, f"unknown key {node.key!r}; expected values or formulas")
            continue
        if node.value is not None and not node.children:
            if node.value.strip().lower() not in ("off", "{}"):
                err(node.line, node.key, f"{node.key} must be a block of 'name: value' lines")
            continue
        for child in node.children:
            path = f"{node.key}.{child.key}"
            if child.children or child.value is None:
                err(child.line, path, "expected 'name: value'")
            elif node.key == "values":
                try:
                    values[child.key] = _signed_decimal(child.value)
                except TokenError as e:
                    err(child.line, path, str(e))
            else:
                try:
                    parse_expression(child.value, child.key)
                    formulas[child.key] = child.value
                except FormulaSyntaxError as e:
                    err(child.line, path, str(e))
    if any(d.is_error for d in diags):
        raise AccountFileError(diags)
    try:
        account = Account(values=values, formulas=formulas)
    except ModelError as e:
        raise AccountFileError([Diagnostic(Severity.ERROR, 1, e.field, e.message)]) from None
    problems = check_account(account)
    if problems:
        raise AccountFileError([Diagnostic(Severity.ERROR, 1, f"formulas.{p.name}", str(p)) for p in problems])
    return account


def _signed_decimal(token: str) -> Decimal:
    t = token.strip()
    if t.startswith("-"):
        return -parse_decimal(t[1:])
    return parse_decimal(t)
