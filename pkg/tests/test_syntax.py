from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from zeroml.errors import ParseError
from zeroml.lexer import KEYWORDS, tokenize
from zeroml.syntax import (
    BinaryOp, Block, Call, ExprStmt, ForLoop, Identifier, IfThenElse, LetDecl, Literal,
    MethodCall, Program, dump_tree, parse, parse_expression, pretty_print,
)

CORPUS = Path(__file__).parent / "corpus"

NEAR_MISSES = {
    "p01_let_missing_name.zml": (1, 5),
    "p02_missing_semicolon.zml": (2, 1),
    "p03_dangling_operator.zml": (1, 13),
    "p04_unclosed_paren.zml": (1, 15),
    "p05_if_without_parens.zml": (1, 4),
    "p06_else_without_block.zml": (1, 30),
    "p07_for_missing_in.zml": (1, 8),
    "p08_unclosed_block.zml": (2, 1),
    "p09_assignment.zml": (2, 1),
    "p10_trailing_comma.zml": (1, 10),
    "p11_positional_after_named.zml": (1, 25),
    "p12_duplicate_named.zml": (1, 25),
    "p13_expression_missing_semicolon.zml": (2, 1),
    "p14_stray_rbrace.zml": (2, 1),
    "p15_method_without_call.zml": (1, 9),
}


def expr(src):
    return parse_expression(tokenize(src))


def I(n):  # noqa: E743
    return Identifier(n)


def N(v):
    return Literal(v, "int")


def test_let_example():
    assert parse("let x = 5;") == Program((LetDecl("x", N(5)),))


def test_multiplication_binds_tighter():
    assert expr("1 + 2 * 3") == BinaryOp("+", N(1), BinaryOp("*", N(2), N(3)))
    assert expr("1 * 2 + 3") == BinaryOp("+", BinaryOp("*", N(1), N(2)), N(3))


def test_left_associativity():
    assert expr("a - b - c") == BinaryOp("-", BinaryOp("-", I("a"), I("b")), I("c"))
    assert expr("a / b * c") == BinaryOp("*", BinaryOp("/", I("a"), I("b")), I("c"))
    assert expr("a < b == c") == BinaryOp("==", BinaryOp("<", I("a"), I("b")), I("c"))


def test_comparison_is_loosest():
    assert expr("a + 1 < b * 2") == BinaryOp(
        "<", BinaryOp("+", I("a"), N(1)), BinaryOp("*", I("b"), N(2)))


def test_parentheses_override():
    assert expr("(1 + 2) * 3") == BinaryOp("*", BinaryOp("+", N(1), N(2)), N(3))


def test_method_call_binds_tightest():
    assert expr("a + m.report()") == BinaryOp("+", I("a"), MethodCall(I("m"), "report"))
    assert expr("f(x).g(1, 2)") == MethodCall(Call("f", (I("x"),)), "g", (N(1), N(2)))


def test_named_arguments():
    e = expr('automl(d, target="y", folds=3)')
    assert e == Call("automl", (I("d"),),
                     (("target", Literal("y", "text")), ("folds", N(3))))


def test_literal_kinds_are_distinct():
    assert expr("true") != expr("1")
    assert expr("1") != expr("1.0")


def test_if_else_and_for():
    prog = parse("if (x < 3) { print(x); } else { } for (i in range(0, 2)) { f(i) }")
    if_stmt, loop = prog.statements
    assert isinstance(if_stmt, IfThenElse) and if_stmt.else_block == Block(())
    assert isinstance(loop, ForLoop) and loop.var == "i"
    assert loop.block.statements == (ExprStmt(Call("f", (I("i"),))),)


def test_spans_are_ignored_by_equality_but_recorded():
    a, b = parse("let x = 1;"), parse("\n\n   let   x=1 ;")
    assert a == b
    assert a.statements[0].span != b.statements[0].span
    assert (b.statements[0].span.start_line, b.statements[0].span.start_col) == (3, 4)


def test_parse_expression_with_min_precedence():
    assert parse_expression(tokenize("a * b"), 3) == BinaryOp("*", I("a"), I("b"))
    with pytest.raises(ParseError):
        parse_expression(tokenize("a + b;"))


def test_pretty_print_canonical_form():
    src = "if(x<3){let y=x*(2+1);}else{for(i in range(0,2)){print(i)}}"
    assert pretty_print(parse(src)) == (
        "if (x < 3) {\n"
        "    let y = x * (2 + 1);\n"
        "} else {\n"
        "    for (i in range(0, 2)) {\n"
        "        print(i);\n"
        "    }\n"
        "}\n"
    )


def test_pretty_print_keeps_needed_parentheses_only():
    assert pretty_print(expr("(a - b) - c")) == "a - b - c"
    assert pretty_print(expr("a - (b - c)")) == "a - (b - c)"
    assert pretty_print(expr("(a * b) + (c / d)")) == "a * b + c / d"
    assert pretty_print(expr("(a + b).m()")) == "(a + b).m()"


def test_dump_tree_labels_and_spans():
    text = dump_tree(parse("let x = 1 + 2;"))
    lines = text.splitlines()
    assert lines[0].startswith("Program")
    assert any("LetDecl" in ln and "@1:1" in ln for ln in lines)
    assert any("BinaryOp" in ln for ln in lines)


def corpus_files():
    return sorted((CORPUS / "accept").glob("*.zml"))


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_accept_corpus_round_trips(path):
    prog = parse(path.read_text(encoding="utf-8"))
    printed = pretty_print(prog)
    assert parse(printed) == prog
    assert pretty_print(parse(printed)) == printed


def test_near_miss_table_matches_files():
    assert sorted(NEAR_MISSES) == sorted(p.name for p in (CORPUS / "reject_parse").glob("*.zml"))


@pytest.mark.parametrize("name", sorted(NEAR_MISSES))
def test_near_miss_positions(name):
    src = (CORPUS / "reject_parse" / name).read_text(encoding="utf-8")
    with pytest.raises(ParseError) as info:
        parse(src)
    assert (info.value.line, info.value.col) == NEAR_MISSES[name]
    assert info.value.expected and info.value.found


def test_assignment_message_mentions_immutability():
    with pytest.raises(ParseError) as info:
        parse("let x = 1;\nx = 2;")
    assert "immutable" in info.value.message


# -- generated programs -------------------------------------------------------

_RESERVED = set(KEYWORDS) | {"true", "false"}
names = st.from_regex(r"[a-z_][a-z0-9_]{0,5}", fullmatch=True).filter(lambda s: s not in _RESERVED)
text = st.text(alphabet='abc XYZ09"\\_-.', max_size=8)

leaves = st.one_of(
    st.integers(0, 10**6).map(lambda v: Literal(v, "int")),
    st.floats(0, 1e9, allow_nan=False, allow_infinity=False).map(lambda v: Literal(v, "float")),
    text.map(lambda v: Literal(v, "text")),
    st.booleans().map(lambda v: Literal(v, "bool")),
    names.map(Identifier),
)


def _compound(children):
    def call(args):
        callee, pos, named = args
        seen, uniq = set(), []
        for k, v in named:
            if k not in seen:
                seen.add(k)
                uniq.append((k, v))
        return Call(callee, tuple(pos), tuple(uniq))

    return st.one_of(
        st.builds(BinaryOp, st.sampled_from(["+", "-", "*", "/", "==", "!=", "<", ">", "<=", ">="]),
                  children, children),
        st.tuples(names, st.lists(children, max_size=3),
                  st.lists(st.tuples(names, children), max_size=2)).map(call),
        st.builds(MethodCall, children, names, st.lists(children, max_size=2).map(tuple)),
    )


exprs = st.recursive(leaves, _compound, max_leaves=6)


def _statements(depth):
    simple = st.one_of(st.builds(LetDecl, names, exprs), st.builds(ExprStmt, exprs))
    if depth == 0:
        return simple
    block = st.lists(_statements(depth - 1), max_size=3).map(lambda s: Block(tuple(s)))
    return st.one_of(
        simple,
        st.builds(IfThenElse, exprs, block, st.one_of(st.none(), block)),
        st.builds(ForLoop, names, exprs, block),
    )


programs = st.lists(_statements(2), max_size=5).map(lambda s: Program(tuple(s)))


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(programs)
def test_generated_programs_round_trip(prog):
    assert parse(pretty_print(prog)) == prog


@settings(max_examples=300, deadline=None)
@given(exprs)
def test_generated_expressions_round_trip(e):
    assert parse_expression(tokenize(pretty_print(e))) == e
