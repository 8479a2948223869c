import json

import pytest

from idiomizer.extraction import find_sites
from idiomizer.knowledge import IdiomKind, catalog, catalog_json, spec_for
from idiomizer.syntax import SourceFile

I = IdiomKind


def test_catalog_covers_thirteen_idioms():
    kinds = [s.kind for s in catalog()]
    assert len(kinds) == 13 == len(set(kinds)) == len(IdiomKind)
    assert all(s.conditions for s in catalog())
    assert len(json.loads(catalog_json())) == 13


def test_parse_accepts_kebab_case():
    assert I.parse("chain-comparison") is I.CHAIN_COMPARISON
    with pytest.raises(ValueError):
        I.parse("walrus")


def test_loop_else_needs_a_break():
    with_break = "for x in xs:\n    if x:\n        break\nif not x:\n    pass\n"
    without = "for x in xs:\n    go(x)\nif not x:\n    pass\n"
    assert len(find_sites(SourceFile.from_text(with_break), {I.LOOP_ELSE})) == 1
    assert find_sites(SourceFile.from_text(without), {I.LOOP_ELSE}) == []
    assert spec_for(I.LOOP_ELSE).core_conditions


@pytest.mark.parametrize(
    "source, idiom, count",
    [
        ("new = []\nfor c in cols:\n    new.append(c)\n", I.LIST_COMPREHENSION, 1),
        ("new = []\nx = 1\nfor c in cols:\n    new.append(c)\n", I.LIST_COMPREHENSION, 0),
        ("if a < b and b < c:\n    pass\n", I.CHAIN_COMPARISON, 1),
        ("if a < b or b < c:\n    pass\n", I.CHAIN_COMPARISON, 0),
        ("if len(xs) == 0:\n    pass\n", I.TRUTH_TEST, 1),
        ("if start is not None:\n    pass\n", I.TRUTH_TEST, 0),
        ("a = 1\nb = 2\n", I.ASSIGN_MULTI_TARGETS, 1),
        ("a = 1\nb = a\n", I.ASSIGN_MULTI_TARGETS, 0),
        ("a = None\nb = None\n", I.CHAIN_ASSIGN_SAME_VALUE, 1),
        ("f(a[0], a[1], a[2])\n", I.STAR_IN_FUNC_CALL, 1),
        ("f(a[-1], a[0])\n", I.STAR_IN_FUNC_CALL, 0),
        ("data = open(p).read()\n", I.WITH, 1),
        ("with open(p) as f:\n    data = f.read()\n", I.WITH, 0),
        ("for i in range(len(xs)):\n    print(xs[i])\n", I.ENUMERATE, 1),
        ("for i in range(1, len(xs)):\n    print(xs[i])\n", I.ENUMERATE, 0),
        ("s = '%s-%d' % (a, b)\n", I.FSTRING, 1),
        ("for p in pairs:\n    use(p[0], p[1])\n", I.FOR_MULTI_TARGETS, 1),
        ("for p in pairs:\n    use(p)\n", I.FOR_MULTI_TARGETS, 0),
    ],
)
def test_find_sites(source, idiom, count):
    assert len(find_sites(SourceFile.from_text(source), {idiom})) == count


def test_site_json_reports_lines():
    site = find_sites(SourceFile.from_text("x = 0\na = None\nb = None\n"), {I.CHAIN_ASSIGN_SAME_VALUE})[0]
    payload = site.to_json()
    assert payload["idiom"] == "chain-assign-same-value"
    assert json.dumps(payload)
