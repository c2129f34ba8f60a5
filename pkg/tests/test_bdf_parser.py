import numpy as np
import pytest

from app.bdf_core import (
    Leaf,
    Max,
    Min,
    bound_subset,
    depth,
    evaluate,
    is_scom,
    leading_term,
    leaf_count,
    random_expr,
    sample_in_ball,
    volume,
)
from app.bdf_parser import format as format_bdf
from app.bdf_parser import parse, tokenize
from app.errors import BdfSyntaxError, BdfValidationError, ConfigError
from tests.conftest import L1, L2, L3, L4, MCD2, MIN_OF_MINS


def test_parse_leaf():
    assert parse("x1") == Leaf(1)


def test_parse_outer_min_form():
    assert parse("min(max(x1,x3),max(x2,x4))") == Min(Max(L1, L3), Max(L2, L4))


def test_parse_ignores_whitespace():
    assert parse("  max ( min(x1, x2) ,\n min(x3,x4) ) ") == MIN_OF_MINS


def test_nary_nests_left():
    assert parse("min(x1,x2,x3)") == Min(Min(L1, L2), L3)
    assert parse("max(x3,x1,x2)") == Max(Max(L3, L1), L2)


def test_unary_is_arity_error_at_head():
    with pytest.raises(BdfSyntaxError) as err:
        parse("max(x1)")
    assert err.value.offset == 0


def test_missing_coordinate():
    with pytest.raises(BdfValidationError, match="x2 missing"):
        parse("min(x1,x3)")


def test_duplicate_coordinate_reports_second_occurrence():
    with pytest.raises(BdfValidationError) as err:
        parse("min(x1,x1)")
    assert err.value.offset == 7


@pytest.mark.parametrize("text,offset", [
    ("", 0),
    ("foo", 0),
    ("x0", 1),
    ("x", 1),
    ("min(x1,x2", 9),
    ("min(x1,,x2)", 7),
    ("min(x1,x2))", 10),
    ("min x1,x2)", 4),
])
def test_syntax_errors_are_positioned(text, offset):
    with pytest.raises(BdfSyntaxError) as err:
        parse(text)
    assert err.value.offset == offset


def test_errors_are_config_errors():
    with pytest.raises(ConfigError):
        parse("max(")


def test_offsets_are_bytes():
    # "é" is two bytes in UTF-8
    with pytest.raises(BdfSyntaxError) as err:
        parse("é")
    assert err.value.offset == 0
    toks = tokenize("min(x1,x2)")
    assert [t.offset for t in toks] == [0, 3, 4, 6, 7, 9, 10]


def test_deep_nesting_is_a_syntax_error():
    text = "min(" * 5000 + "x1" + ",x1)" * 5000
    with pytest.raises(BdfSyntaxError):
        parse(text)


def _wide(head, d):
    return f"{head}(" + ",".join(f"x{i}" for i in range(1, d + 1)) + ")"


def test_wide_min_has_depth_one():
    expr = parse(_wide("min", 1200))
    assert leaf_count(expr) == 1200
    assert depth(expr) == 1
    assert is_scom(expr) == (False, None)
    assert len(bound_subset(expr)) == 1
    assert leading_term(expr) == (2400.0, 1)
    assert volume(expr, 1e-4) == pytest.approx(1.0 - (1.0 - 2e-4) ** 1200, rel=1e-9)


def test_wide_min_formats_and_evaluates():
    text = format_bdf(parse(_wide("min", 1200)))
    assert text.startswith("min(min(")
    assert format_bdf(parse(text)) == text

    gen = np.random.default_rng(5)
    expr = parse(text)
    x = gen.uniform(-0.5, 0.5, (40, 1200))
    assert np.allclose(evaluate(expr, x), np.abs(x).min(axis=1))
    pts = sample_in_ball(expr, 1e-4, 200, gen)
    assert np.all(evaluate(expr, pts) <= 1e-4 + 1e-12)


def test_wide_max_is_scom():
    expr = parse(_wide("max", 1200))
    assert is_scom(expr) == (True, 1)
    assert depth(expr) == 1200
    assert len(bound_subset(expr)) == 1200
    x = np.random.default_rng(6).uniform(-0.5, 0.5, (40, 1200))
    assert np.allclose(evaluate(expr, x), np.abs(x).max(axis=1))


def test_format_examples():
    assert format_bdf(L1) == "x1"
    assert format_bdf(MCD2) == "min(x1,x2)"
    assert format_bdf(MIN_OF_MINS) == "max(min(x1,x2),min(x3,x4))"


def test_round_trip_random_trees():
    gen = np.random.default_rng(7)
    for _ in range(1000):
        expr = random_expr(int(gen.integers(1, 11)), gen)
        assert parse(format_bdf(expr)) == expr


def test_fuzz_never_crashes():
    gen = np.random.default_rng(11)
    alphabet = list("minax(),0123 ")
    for _ in range(500):
        text = "".join(gen.choice(alphabet, size=int(gen.integers(0, 20))))
        try:
            parse(text)
        except ConfigError as e:
            assert getattr(e, "offset", None) is not None
