"""Engine verdicts and the syntactic marker each accepted rewrite must carry."""
from __future__ import annotations

import ast
from dataclasses import dataclass
from typing import Optional, Union

from .knowledge import IdiomKind

I = IdiomKind


@dataclass(frozen=True)
class Accepted:
    abstract_idiomatic_code: str


@dataclass(frozen=True)
class Declined:
    reason: str


Outcome = Union[Accepted, Declined]


def parse_fragment(code: str, idiom: IdiomKind) -> Optional[ast.AST]:
    """Parse abstract code as a module, an expression, or an argument list."""
    attempts = [code, f"(\n{code}\n)"]
    if idiom is I.STAR_IN_FUNC_CALL:
        attempts.insert(0, f"_(\n{code}\n)")
    for text in attempts:
        try:
            return ast.parse(text)
        except SyntaxError:
            continue
    return None


def _marker(tree: ast.AST, idiom: IdiomKind) -> bool:
    nodes = list(ast.walk(tree))
    if idiom is I.CHAIN_COMPARISON:
        return any(isinstance(n, ast.Compare) and len(n.ops) >= 2 for n in nodes)
    if idiom is I.LIST_COMPREHENSION:
        return any(isinstance(n, ast.ListComp) for n in nodes)
    if idiom is I.SET_COMPREHENSION:
        return any(isinstance(n, ast.SetComp) for n in nodes)
    if idiom is I.DICT_COMPREHENSION:
        return any(isinstance(n, ast.DictComp) for n in nodes)
    if idiom is I.TRUTH_TEST:
        from .extraction import is_empty_literal

        return not any(
            isinstance(n, ast.Compare)
            and any(isinstance(op, (ast.Eq, ast.NotEq)) for op in n.ops)
            and any(is_empty_literal(e) for e in [n.left, *n.comparators])
            for n in nodes
        )
    if idiom is I.LOOP_ELSE:
        return any(isinstance(n, (ast.For, ast.While)) and n.orelse for n in nodes)
    if idiom is I.ASSIGN_MULTI_TARGETS:
        return any(
            isinstance(n, ast.Assign) and isinstance(n.targets[0], ast.Tuple) and len(n.targets[0].elts) >= 2
            for n in nodes
        )
    if idiom is I.FOR_MULTI_TARGETS:
        return any(isinstance(n, ast.For) and isinstance(n.target, ast.Tuple) for n in nodes)
    if idiom is I.STAR_IN_FUNC_CALL:
        return any(isinstance(n, ast.Starred) for n in nodes)
    if idiom is I.WITH:
        return any(isinstance(n, ast.With) for n in nodes)
    if idiom is I.ENUMERATE:
        return any(isinstance(n, ast.Call) and isinstance(n.func, ast.Name) and n.func.id == "enumerate" for n in nodes)
    if idiom is I.CHAIN_ASSIGN_SAME_VALUE:
        return any(isinstance(n, ast.Assign) and len(n.targets) >= 2 for n in nodes)
    if idiom is I.FSTRING:
        return any(isinstance(n, ast.JoinedStr) for n in nodes)
    raise KeyError(idiom)


def has_marker(code: str, idiom: IdiomKind) -> bool:
    tree = parse_fragment(code, idiom)
    return tree is not None and _marker(tree, idiom)


def check_accepted(outcome: Outcome, idiom: IdiomKind) -> Outcome:
    """Demote an Accepted outcome lacking the idiom's marker to Declined."""
    if isinstance(outcome, Accepted) and not has_marker(outcome.abstract_idiomatic_code, idiom):
        return Declined(f"result lacks the {idiom.value} marker or does not parse")
    return outcome
