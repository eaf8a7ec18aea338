import pytest

from algvar.terms import App, Power, TermSyntaxError, Var, depth, format_law, parse_law, parse_term


def test_parse_product_and_power():
    law = parse_law("x^w * x = x^w")
    assert law.relation == "="
    assert isinstance(law.lhs, App) and law.lhs.op == "*"
    assert isinstance(law.rhs, Power)
    assert law.variables() == ["x"]


def test_sorted_variables_and_inequation():
    law = parse_law("x:plus * pow(y:plus) <= pow(x)")
    assert law.relation == "<="
    assert set(law.variables()) == {"x", "y"}


def test_constant_recognized():
    t = parse_term("1 * x")
    assert isinstance(t, App) and t.args[0].op == "1" and t.args[0].args == ()
    assert isinstance(t.args[1], Var)


@pytest.mark.parametrize("text", [
    "x^w * x = x^w",
    "(x * y) * z = x * (y * z)",
    "x:plus * pow(y:plus * x) = pow(x * y)",
    "e * e = e => e^# <= e",
    "sigma(sigma(p:c, q:c), r:c) = sigma(p, sigma(q, r))",
])
def test_format_is_canonical(text):
    law = parse_law(text)
    again = parse_law(format_law(law))
    assert again == law
    assert format_law(again) == format_law(law)


@pytest.mark.parametrize("bad,column", [("x * = y", 5), ("x = y = z", 7), ("x ^q = x", 4), ("x $ y = x", 3)])
def test_syntax_errors_carry_columns(bad, column):
    with pytest.raises(TermSyntaxError) as info:
        parse_law(bad)
    assert info.value.column is not None
    assert abs(info.value.column - column) <= 1


def test_law_needs_relation():
    with pytest.raises(TermSyntaxError):
        parse_law("x * y")


def test_depth():
    assert depth(parse_term("x")) == 0
    assert depth(parse_term("(x * y)^w")) == 2
