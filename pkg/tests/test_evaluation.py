import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from idiomizer.cli import data_path
from idiomizer.engines import DeterministicEngine
from idiomizer.evaluation import (
    CodePair, ConfusionCounts, FormatError, compute_metrics, evaluate, load_benchmark, match_pairs,
)


def test_match_pairs_counts():
    gold = [CodePair("a = 1\nb = 2", "a, b = 1, 2")]
    assert match_pairs([CodePair("a = 1\nb = 2", "a,b = 1,2")], gold) == ConfusionCounts(1, 0, 0)
    assert match_pairs([CodePair("a = 1\nb = 2", "a, b = 2, 1")], gold) == ConfusionCounts(0, 1, 1)
    assert match_pairs([], gold) == ConfusionCounts(0, 0, 1)


@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40))
def test_metric_bounds(tp, fp, fn):
    m = compute_metrics(ConfusionCounts(tp, fp, fn))
    for value in (m.accuracy, m.precision, m.recall, m.f1):
        assert 0 <= value <= 1
    assert m.accuracy <= min(m.precision, m.recall) or tp == 0
    assert m.f1 <= max(m.precision, m.recall)


@given(st.permutations(list(range(5))))
def test_match_is_order_invariant(order):
    pairs = [CodePair(f"x{i} = 1\ny{i} = 2", f"x{i}, y{i} = 1, 2") for i in range(5)]
    produced = [pairs[i] for i in order[:3]] + [CodePair("q = 1\nr = 2", "q, r = 2, 1")]
    assert match_pairs(produced, pairs) == ConfusionCounts(3, 1, 2)


def test_zero_denominators():
    m = compute_metrics(ConfusionCounts(0, 0, 0))
    assert (m.accuracy, m.precision, m.recall, m.f1) == (0, 0, 0, 0)
    assert compute_metrics(ConfusionCounts(1, 1, 0)).precision == Fraction(1, 2)


def test_loader_reports_bad_lines(tmp_path):
    bad = tmp_path / "b.jsonl"
    bad.write_text('{"idiom": "nope"}\n', encoding="utf-8")
    with pytest.raises(FormatError) as info:
        load_benchmark(bad)
    assert info.value.line == 1


def test_golden_set_scores_perfectly():
    entries = load_benchmark(data_path("golden.jsonl"))
    report = evaluate(entries, DeterministicEngine(), jobs=2).to_json()
    assert report["total"]["f1"] == 1.0
    assert len(report) == 14
    assert json.dumps(report)
