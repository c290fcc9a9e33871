import math

import pytest

from satbackstep.errors import ConfigError
from satbackstep.expr import parse_expr
from satbackstep.jet import Jet


class TestParse:
    def test_polynomial_and_caret(self):
        e = parse_expr("0.1*x1^2 + 3*x2 - 1", ["x1", "x2"])
        assert e({"x1": 2.0, "x2": 1.0}) == pytest.approx(0.4 + 3 - 1)
        assert e.names == ("x1", "x2")
        assert e.max_state_index() == 2

    def test_trig_and_pi(self):
        e = parse_expr("0.2 + 0.3*sin(t) + cos(2*pi*t)", ["t"])
        assert e({"t": 0.5}) == pytest.approx(0.2 + 0.3 * math.sin(0.5) + math.cos(math.pi))

    def test_constant_folding(self):
        e = parse_expr("-0.5 + 2^3", ["t"])
        assert e.is_constant
        assert e.const == 7.5
        assert not parse_expr("t", ["t"]).is_constant

    def test_number_input(self):
        assert parse_expr(0.6, ["t"]).const == 0.6

    def test_evaluates_on_jets(self):
        e = parse_expr("x1^2", ["x1"])
        assert e({"x1": Jet([3.0, 1.0])}).derivs == (9.0, 6.0)

    def test_unary_plus(self):
        assert parse_expr("+x1", ["x1"])({"x1": 2.0}) == 2.0


class TestRejects:
    @pytest.mark.parametrize("text,fragment", [
        ("x3 + 1", "unknown name 'x3'"),
        ("exp(t)", "only sin() and cos()"),
        ("x1 ** 0.5", "exponent"),
        ("x1 ** -1", "exponent"),
        ("x1 ** x1", "exponent"),
        ("1 / 0", "division by the constant zero"),
        ("x1 < 2", "unsupported syntax"),
        ("'a'", "unsupported literal"),
        ("sin(x1, x1)", "exactly one argument"),
        ("__import__('os')", "only sin() and cos()"),
        ("x1.real", "unsupported syntax"),
    ])
    def test_errors(self, text, fragment):
        with pytest.raises(ConfigError, match="plant.f"):
            parse_expr(text, ["x1"], "plant.f[0]")
        with pytest.raises(ConfigError) as info:
            parse_expr(text, ["x1"], "plant.f[0]")
        assert fragment in str(info.value)

    def test_syntax_error_reports_column(self):
        with pytest.raises(ConfigError, match="column"):
            parse_expr("x1 +* 2", ["x1"], "reference.expr")

    def test_non_string(self):
        with pytest.raises(ConfigError):
            parse_expr(["x1"], ["x1"])
