import random
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import naive_eval, random_account

from infoglyph.analyzer import census
from infoglyph.binder import (AccountFileError, BindError, CyclicFormula, DivisionByZeroError, Evaluator,
                              FormatSpec, FormulaSyntaxError, UnknownIndicator, bind, evaluate_indicator,
                              format_decimal, parse_account, parse_expression, substitute_placeholders)
from infoglyph.fixtures import SPECIMENS, load_account_text
from infoglyph.model import Account
from infoglyph.parser import canonicalize, parse_decimal, parse_model

TRINSEO = Account(values={"waste2011": 100, "waste2017": 59},
                  formulas={"reduction": "(waste2011 - waste2017) / waste2011 * 100"})


def test_direct_and_indirect():
    acc = Account(values={"a": 2, "b": 3}, formulas={"c": "a + b"})
    assert evaluate_indicator("c", acc) == 5
    assert evaluate_indicator("a", acc) == 2


def test_trinseo_reduction_is_41():
    assert evaluate_indicator("reduction", TRINSEO) == 41


def test_cycle_and_unknown_names():
    with pytest.raises(CyclicFormula) as exc:
        evaluate_indicator("x", Account(formulas={"x": "y", "y": "x"}))
    assert exc.value.cycle == ["x", "y", "x"]
    with pytest.raises(CyclicFormula):
        evaluate_indicator("s", Account(formulas={"s": "s + 1"}))
    with pytest.raises(UnknownIndicator, match="nope"):
        evaluate_indicator("c", Account(formulas={"c": "nope * 2"}))
    with pytest.raises(UnknownIndicator):
        evaluate_indicator("missing", Account())


def test_division_by_zero_is_an_error():
    with pytest.raises(DivisionByZeroError):
        evaluate_indicator("r", Account(values={"z": 0}, formulas={"r": "1 / z"}))


def test_precedence_unary_and_symbols():
    acc = Account(values={"a": 6, "b": 3}, formulas={"p": "a - b * 2", "q": "(a - b) * 2", "n": "-a + 1",
                                                     "u": "a × b ÷ 9 − 1"})
    assert [evaluate_indicator(k, acc) for k in "pqnu"] == [0, 6, -5, 1]


@pytest.mark.parametrize("text", ["", "a +", "(a", "a b", "2 ** 3", "a % 2", "max(a)"])
def test_expression_syntax_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse_expression(text)


def test_memoized_matches_naive_oracle_on_random_sets():
    rng = random.Random(20240611)
    for _ in range(100):
        values, formulas = random_account(rng)
        names = list(formulas)
        rng.shuffle(names)
        account = Account(values=values, formulas=dict(rng.sample(list(formulas.items()), len(formulas))))
        ev = Evaluator(account)
        for name in names:
            try:
                expected = naive_eval(name, values, formulas)
            except ZeroDivisionError:
                with pytest.raises(DivisionByZeroError):
                    evaluate_indicator(name, account)
                continue
            got = ev(name)
            assert got == evaluate_indicator(name, account)
            assert abs(Fraction(got) - expected) <= abs(expected) * Fraction(1, 10**30) + Fraction(1, 10**30)


def test_substitution_examples():
    assert substitute_placeholders("Reduced waste by {{reduction}}%", TRINSEO) == "Reduced waste by 41%"
    assert substitute_placeholders("no placeholders", Account()) == "no placeholders"
    third = Account(values={"one": 1}, formulas={"x": "one / 3"})
    assert substitute_placeholders("{{x|2}}", third) == "0.33"
    assert substitute_placeholders("{{ x | 0 }}", third) == "0"


def test_substitution_default_format():
    acc = Account(values={"a": Decimal("12.500"), "big": Decimal("1E+3")}, formulas={"h": "a / 10"})
    assert substitute_placeholders("{{a}} {{big}} {{h}}", acc) == "12.5 1000 1.25"
    assert substitute_placeholders("{{a}}", acc, FormatSpec(decimals=2)) == "12.50"


@pytest.mark.parametrize("value,places,text", [("0.125", 2, "0.12"), ("0.135", 2, "0.14"), ("2.5", 0, "2"),
                                               ("3.5", 0, "4"), ("-0.0001", 2, "0.00"), ("41.00", None, "41")])
def test_format_rounds_half_to_even(value, places, text):
    assert format_decimal(Decimal(value), places) == text


def test_unresolved_placeholder_names_element():
    model = parse_model("bgsize: 10x10\nhead: off\nfoot: off\ntext7:\n  font: 10px A\n"
                        "  value: 'cut {{ghost}}'\n  position: 0x5\n")
    with pytest.raises(BindError) as exc:
        bind(model, Account())
    assert exc.value.issues[0].element_id == "text7" and exc.value.issues[0].name == "ghost"
    assert "text7" in str(exc.value)


PIE = ("bgsize: 400x400\nhead: off\nfoot: off\npiechart1:\n  position: 200x200\n  size: 80\n  colors: 2ca58d\n"
       "  data:\n    Scope1: {value}\n    Scope2: 10\n")


def test_chart_datum_binding_matches_literal():
    bound = bind(parse_model(PIE.format(value='"{{scope1}}"')), Account(values={"scope1": "76.25"}))
    literal = parse_model(PIE.format(value='"76,25"'))
    assert bound == literal
    assert bound.body[0].data[0][1] == float(parse_decimal("76,25"))


def test_bind_identity_and_idempotence(specimen_models):
    account = parse_account(load_account_text())
    for name in SPECIMENS:
        m = specimen_models[name]
        assert bind(m, Account()) == m
        assert bind(bind(m, account), account) == bind(m, account)


def _templated_model():
    src = ("bgsize: 300x300\nhead:\n  title:\n    font: 20px A\n    value: 'Emissions {{emissions|1}}'\n"
           "    position: 5x25\nfoot: off\ntext1:\n  font: 12px A\n  value: 'Waste down {{reduction}}%'\n"
           "  position: 5x60\npiechart1:\n  position: 150x150\n  size: 40\n  colors: ff0000,00ff00\n"
           "  title: 'Share {{scope1share|0}}%'\n  data:\n    S1: '{{scope1}}'\n    S2: '{{scope2}}'\n")
    return parse_model(src)


def test_bind_touches_only_values():
    m = _templated_model()
    b = bind(m, parse_account(load_account_text()))
    assert b.head.title.value == "Emissions 183.9"
    assert b.body[0].value == "Waste down 41%"
    assert b.body[1].title == "Share 41%" and b.body[1].data == (("S1", 76.25), ("S2", 46.33))
    for before, after in zip(m.body, b.body):
        assert before.position == after.position and type(before) is type(after)
    assert census(b) == census(m)
    assert parse_model(canonicalize(b)) == b


def test_bind_aggregates_errors():
    src = ("bgsize: 10x10\nhead: off\nfoot: off\ntext1:\n  font: 10px A\n  value: '{{a}} {{b}}'\n"
           "  position: 0x5\npiechart1:\n  position: 5x5\n  size: 2\n  colors: 0\n  data:\n    X: '{{c}}'\n")
    with pytest.raises(BindError) as exc:
        bind(parse_model(src), Account())
    assert [(i.element_id, i.name) for i in exc.value.issues] == [("text1", "a"), ("text1", "b"),
                                                                  ("piechart1", "c")]


def test_bind_rejects_negative_chart_value():
    with pytest.raises(BindError, match="piechart1"):
        bind(parse_model(PIE.format(value='"{{d}}"')), Account(values={"d": -1}))


def test_account_file():
    acc = parse_account(load_account_text())
    assert acc.values["scope1"] == Decimal("76.25")
    assert evaluate_indicator("reduction", acc) == 41
    assert evaluate_indicator("emissions", acc) == Decimal("183.89")


@pytest.mark.parametrize("text,fragment", [
    ("values:\n  a: x\n", "values.a"),
    ("formulas:\n  a: 'b +'\n", "formulas.a"),
    ("formulas:\n  a: b\n  b: a\n", "cycle"),
    ("values:\n  a: 1\nformulas:\n  a: '2'\n", "both"),
    ("other: 1\n", "unknown"),
])
def test_account_file_errors(text, fragment):
    with pytest.raises(AccountFileError, match=fragment):
        parse_account(text)


@settings(max_examples=200, deadline=None)
@given(st.decimals(min_value=-10**6, max_value=10**6, allow_nan=False, places=4), st.integers(0, 6))
def test_format_decimal_round_trips(value, places):
    text = format_decimal(value, places)
    assert "e" not in text.lower() and "," not in text
    assert abs(Decimal(text) - value) <= Decimal(1).scaleb(-places) / 2
