import numpy as np
import pytest

import curveflow.expressions as ex
from curveflow import ExpressionError, parse_expression


def val(src, **env):
    return ex.evaluate(parse_expression(src), **env)


def test_basic_values():
    assert val("1 + 0.2*cos(2*theta)", theta=0.0) == pytest.approx(1.2)
    assert val("s^(-2)", s=2.0) == pytest.approx(0.25)
    assert val("2*3 + 4/8", ) == pytest.approx(6.5)
    assert val("-theta^2", theta=3.0) == -9.0  # unary minus binds after power
    assert val("exp(log(absx))", absx=2.5) == pytest.approx(2.5)
    assert val("cosh(theta)^2 - sinh(theta)^2", theta=0.7) == pytest.approx(1.0)
    assert val("1e2 + 1.5e-2", ) == pytest.approx(100.015)


def test_vectorised_evaluation():
    th = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    out = val("sin(theta) + 2", theta=th)
    assert np.allclose(out, np.sin(th) + 2)


def test_power_right_associative():
    assert val("2^3^2") == 512.0


def test_syntax_error_position_and_expectation():
    with pytest.raises(ExpressionError) as err:
        parse_expression("cos(")
    assert err.value.position == 4
    assert "expression" in err.value.expected
    with pytest.raises(ExpressionError) as err:
        parse_expression("1 + (2*3")
    assert err.value.expected == "')'"
    with pytest.raises(ExpressionError) as err:
        parse_expression("2 + bogus")
    assert "bogus" in str(err.value)
    with pytest.raises(ExpressionError):
        parse_expression("")
    with pytest.raises(ExpressionError):
        parse_expression("sin 3")  # function call needs parentheses


def test_unbound_variable_rejected():
    node = parse_expression("s + theta")
    with pytest.raises(ExpressionError):
        ex.evaluate(node, s=1.0)


def test_division_by_zero_at_evaluation():
    node = parse_expression("1/(s - 1)")
    assert ex.evaluate(node, s=3.0) == 0.5
    with pytest.raises(ExpressionError):
        ex.evaluate(node, s=1.0)


def test_pretty_print_round_trips_values():
    rng = np.random.default_rng(12)
    sources = [
        "1 + 0.2*cos(2*theta)",
        "s^(-2)",
        "absx^2/(1 + sin(theta))",
        "-3*exp(-absx)*cosh(theta/2)",
        "2 - theta - s - 1",
        "tan(theta/4) + log(s) * absx",
    ]
    for src in sources:
        first = parse_expression(src)
        second = parse_expression(first.pretty())
        for _ in range(100):
            th, s, ax = rng.uniform(0.05, 1.2, size=3)
            a = ex.evaluate(first, theta=th, s=s, absx=ax)
            b = ex.evaluate(second, theta=th, s=s, absx=ax)
            assert a == b
