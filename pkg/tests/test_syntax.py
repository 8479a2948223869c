import pytest
from hypothesis import assume, given, strategies as st

from idiomizer.syntax import (
    OverlappingEdits, SourceFile, Span, expand_parens, indent_block, dedent_block,
    indent_unit, line_starts, parse_source, splice,
)
from idiomizer.tokens import contains_code, normalize, same_code


def test_spans_are_utf8_byte_offsets():
    f = SourceFile.from_text("s = 'é'\nx = 1\n")
    start = f.data.index(b"x")
    assert start == 9
    assert f.position(start) == (2, 0)
    assert f.slice(Span(start, start + 5)) == "x = 1"


def test_span_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        Span(4, 2)


def test_expand_parens_stops_at_call_parentheses():
    assert expand_parens(Span(2, 3), b"g(x)") == Span(2, 3)
    assert expand_parens(Span(4, 5), b"if (x):") == Span(3, 6)


def test_splice_adjacent_and_overlapping():
    assert splice("abcdef", [(Span(0, 2), "X"), (Span(2, 3), "Y")]) == "XYdef"
    with pytest.raises(OverlappingEdits):
        splice("abcdef", [(Span(0, 3), "X"), (Span(2, 4), "Y")])


@given(st.text(alphabet="ab\n", max_size=30), st.data())
def test_splice_matches_manual_rebuild(text, data):
    n = len(text.encode())
    cuts = sorted(data.draw(st.lists(st.integers(0, n), max_size=6)))
    pairs = list(zip(cuts[::2], cuts[1::2]))
    # two empty inserts at one offset have no defined order
    assume(len({p for p in pairs if p[0] == p[1]}) == sum(p[0] == p[1] for p in pairs))
    edits = [(Span(a, b), f"<{i}>") for i, (a, b) in enumerate(pairs)]
    expected, pos = "", 0
    for i, (a, b) in enumerate(pairs):
        expected += text[pos:a] + f"<{i}>"
        pos = b
    expected += text[pos:]
    assert splice(text, edits[::-1]) == expected


def test_expand_parens_grows_only_over_balanced_wrappers():
    data = b"f((a + b))"
    inner = Span(data.index(b"a"), data.index(b"b") + 1)
    assert expand_parens(inner, data) == Span(2, 9)


def test_line_starts_and_indent_helpers():
    assert line_starts(b"a\nbc\n") == (0, 2, 5)
    assert indent_block("x\n\ny", "  ") == "x\n\n  y"
    assert dedent_block("a\n    b\n  c", "  ") == "a\n  b\nc"
    assert indent_unit("if x:\n\tpass\n") == "\t"
    assert indent_unit("x = 1\n") == "    "


def test_parse_source_projects_tree():
    root = parse_source("x = 1\n")
    assert any(n.kind.name for n in root.walk())


def test_token_normalization():
    assert normalize("a+b  # note") == normalize("a + b")
    assert same_code("f( x ,y )", "f(x, y)")
    assert not same_code("a < b", "a <= b")
    assert contains_code("if a and b:\n    go()", "a and b")
