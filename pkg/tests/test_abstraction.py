import pytest
from hypothesis import given, strategies as st

from idiomizer.abstraction import (
    ObjectNotFound, UnboundSymbol, abstract_operands, abstract_specified, no_abstraction, restore, symbol_prefix,
)
from idiomizer.syntax import Span
from idiomizer.tokens import same_code


def _spans(text, *operands):
    spans, pos = [], 0
    for op in operands:
        start = text.index(op, pos)
        spans.append(Span(start, start + len(op)))
        pos = start + len(op)
    return spans


def test_operands_share_one_symbol():
    text = "a[i] > b and a[i] < 1"
    result = abstract_operands(text, _spans(text, "a[i]", "b", "a[i]", "1"))
    assert result.abstract_code == "v1 > v2 and v1 < v3"
    assert result.symbols == {"v1": "a[i]", "v2": "b", "v3": "1"}


def test_parenthesized_operand_shares_symbol():
    text = "(a + 1) < b and b < a + 1"
    result = abstract_operands(text, _spans(text, "(a + 1)", "b", "b", "a + 1"))
    assert result.abstract_code == "v1 < v2 and v2 < v1"


def test_prefix_avoids_collisions():
    assert symbol_prefix("x < y") == "v"
    assert symbol_prefix("v1 = 2") == "vv"


def test_restore_is_token_exact():
    assert restore("v1 < v12", {"v1": "a", "v12": "b"}) == "a < b"
    assert restore("v1.v1", {"v1": "obj"}) == "obj.v1"


def test_restore_rejects_unbound_symbols():
    with pytest.raises(UnboundSymbol):
        restore("v3 + 1", {"v1": "a"})


def test_specified_object_skips_attributes():
    result = abstract_specified("x = foo.bar(bar)", "bar")
    assert result.abstract_code == "x = foo.bar(v)"
    assert restore(result.abstract_code, result.bindings) == "x = foo.bar(bar)"
    with pytest.raises(ObjectNotFound):
        abstract_specified("x = 1", "bar")


def test_no_abstraction_is_identity():
    assert no_abstraction("a = 1").abstract_code == "a = 1"


names = st.sampled_from(["a", "b", "c", "xs[0]", "f(y)", "obj.attr", "v1", "v12"])
ops = st.sampled_from(["<", "<=", "==", "is", "in", "!="])


@given(st.lists(st.tuples(names, ops, names), min_size=1, max_size=3))
def test_round_trip_and_sharing(compares):
    parts, spans, pos = [], [], 0
    for left, op, right in compares:
        piece = f"{left} {op} {right}"
        spans += [Span(pos, pos + len(left)), Span(pos + len(piece) - len(right), pos + len(piece))]
        parts.append(piece)
        pos += len(piece) + len(" and ")
    text = " and ".join(parts)
    result = abstract_operands(text, spans)
    assert same_code(restore(result.abstract_code, result.bindings), text)
    values = [v for _, v in result.bindings]
    assert len(values) == len(set(values))
    operands = {x for left, _, right in compares for x in (left, right)}
    assert set(values) == operands
