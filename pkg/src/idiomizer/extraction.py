"""Locate refactorable fragments: scenarios, then components, then conditions."""
from __future__ import annotations

import ast
import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterable, Iterator, Optional

from .knowledge import ConditionId, IdiomKind, IdiomSpec, catalog, catalog_index, spec_for
from .syntax import Node, NodeKind, SourceFile, Span, TreeIndex, parse_source, source_of
from .tokens import normalize

C = ConditionId
I = IdiomKind


@dataclass(frozen=True)
class ComponentTuple:
    nodes: tuple[Node, ...]
    scope: Node
    idiom: IdiomKind = field(compare=False)
    root: Node = field(compare=False, repr=False)

    @property
    def file(self) -> SourceFile:
        return source_of(self.root)

    @property
    def span(self) -> Span:
        span = self.nodes[0].span
        for node in self.nodes[1:]:
            span = span.hull(node.span)
        return span

    def text(self, node: Node) -> str:
        return self.file.slice(node.span)


@dataclass(frozen=True)
class MatchSite:
    idiom: IdiomKind
    file: SourceFile = field(repr=False)
    scenario: Optional[Node]
    components: ComponentTuple
    site_id: str

    @property
    def span(self) -> Span:
        return self.components.span

    @property
    def root(self) -> Node:
        return self.components.root

    def to_json(self) -> dict:
        line, col = self.file.position(self.span.start)
        end_line, end_col = self.file.position(self.span.end)
        excerpt = self.file.slice(self.span).splitlines()
        return {
            "path": str(self.file.path),
            "idiom": self.idiom.value,
            "line": line,
            "col": col,
            "end_line": end_line,
            "end_col": end_col,
            "site_id": self.site_id,
            "excerpt": excerpt[0] if excerpt else "",
        }


@lru_cache(maxsize=32)
def tree_index(root: Node) -> TreeIndex:
    return TreeIndex(root)


# -- small AST helpers ------------------------------------------------------

EMPTY_CONSTANTS = {(int, 0), (float, 0.0), (str, ""), (bytes, b""), (bool, False)}
LAZY_CONSUMERS = {"map", "filter", "zip", "iter", "reversed", "enumerate"}
RESIZING_METHODS = {"append", "extend", "insert", "pop", "remove", "clear", "popitem", "update", "add", "discard"}
_SCOPE_NODES = (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef, ast.Lambda)
_LOOP_NODES = (ast.For, ast.AsyncFor, ast.While)


def is_empty_literal(node: ast.AST) -> bool:
    if isinstance(node, ast.Constant):
        return (type(node.value), node.value) in EMPTY_CONSTANTS
    if isinstance(node, (ast.List, ast.Tuple)):
        return not node.elts
    if isinstance(node, ast.Dict):
        return not node.keys
    return False


def is_dotted(node: ast.AST) -> bool:
    while isinstance(node, ast.Attribute):
        node = node.value
    return isinstance(node, ast.Name)


def root_name(node: ast.AST) -> Optional[str]:
    while isinstance(node, (ast.Attribute, ast.Subscript, ast.Starred)):
        node = node.value
    return node.id if isinstance(node, ast.Name) else None


def unparse(node: ast.AST) -> str:
    return normalize(ast.unparse(node))


def names_in(node: ast.AST) -> set[str]:
    return {n.id for n in ast.walk(node) if isinstance(n, ast.Name)}


def is_call_to(node: ast.AST, name: str) -> bool:
    return isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == name


def is_int_literal(node: ast.AST) -> bool:
    return isinstance(node, ast.Constant) and type(node.value) is int


def walk_skipping(node: ast.AST, skip: tuple[type, ...]) -> Iterator[ast.AST]:
    """Pre-order walk that does not descend into nodes of the ``skip`` types."""
    stack = list(reversed(list(ast.iter_child_nodes(node))))
    while stack:
        current = stack.pop()
        yield current
        if not isinstance(current, skip):
            stack.extend(reversed(list(ast.iter_child_nodes(current))))


def loop_breaks(loop: ast.AST) -> list[ast.Break]:
    """Break statements that exit ``loop`` itself."""
    found: list[ast.Break] = []

    def visit(stmts: list) -> None:
        for stmt in stmts:
            if isinstance(stmt, ast.Break):
                found.append(stmt)
            elif isinstance(stmt, _LOOP_NODES):
                visit(stmt.orelse)
            elif isinstance(stmt, _SCOPE_NODES):
                continue
            else:
                for name in ("body", "orelse", "finalbody", "handlers", "cases"):
                    inner = getattr(stmt, name, None)
                    if isinstance(inner, list):
                        visit(inner)

    for handler_or_stmt in loop.body:
        visit([handler_or_stmt])
    return found


CMP_NEGATION = {
    ast.Is: ast.IsNot,
    ast.IsNot: ast.Is,
    ast.In: ast.NotIn,
    ast.NotIn: ast.In,
    ast.Eq: ast.NotEq,
    ast.NotEq: ast.Eq,
    ast.Lt: ast.GtE,
    ast.GtE: ast.Lt,
    ast.Gt: ast.LtE,
    ast.LtE: ast.Gt,
}


def syntactic_negations(expr: ast.expr) -> set[str]:
    """Normalized texts of the table negations of ``expr``."""
    out = {unparse(ast.UnaryOp(op=ast.Not(), operand=expr))}
    if isinstance(expr, ast.UnaryOp) and isinstance(expr.op, ast.Not):
        out.add(unparse(expr.operand))
    if isinstance(expr, ast.Compare) and len(expr.ops) == 1:
        flipped = ast.Compare(left=expr.left, ops=[CMP_NEGATION[type(expr.ops[0])]()], comparators=expr.comparators)
        out.add(unparse(flipped))
    return out


def is_negation(a: ast.expr, b: ast.expr) -> bool:
    return unparse(b) in syntactic_negations(a) or unparse(a) in syntactic_negations(b)


def simple_target(node: ast.Assign) -> Optional[ast.expr]:
    if len(node.targets) == 1 and isinstance(node.targets[0], (ast.Name, ast.Attribute, ast.Subscript)):
        return node.targets[0]
    return None


def split_index(index: ast.expr) -> Optional[tuple[Optional[str], int]]:
    """Read a subscript index as (symbolic base, integer offset)."""
    if is_int_literal(index):
        return None, index.value
    if isinstance(index, ast.UnaryOp) and isinstance(index.op, ast.USub) and is_int_literal(index.operand):
        return None, -index.operand.value
    if isinstance(index, (ast.Name, ast.Attribute)) and is_dotted(index):
        return unparse(index), 0
    if isinstance(index, ast.BinOp) and isinstance(index.op, (ast.Add, ast.Sub)):
        left, right = index.left, index.right
        if is_dotted(left) and is_int_literal(right):
            k = right.value
            return unparse(left), k if isinstance(index.op, ast.Add) else -k
        if isinstance(index.op, ast.Add) and is_int_literal(left) and is_dotted(right):
            return unparse(right), left.value
    return None


def accumulator_flavor(kind: IdiomKind) -> str:
    return {I.LIST_COMPREHENSION: "list", I.SET_COMPREHENSION: "set", I.DICT_COMPREHENSION: "dict"}[kind]


def is_empty_collection(node: ast.expr, flavor: str) -> bool:
    if flavor == "list":
        return (isinstance(node, ast.List) and not node.elts) or (is_call_to(node, "list") and not node.args and not node.keywords)
    if flavor == "set":
        return is_call_to(node, "set") and not node.args and not node.keywords
    return (isinstance(node, ast.Dict) and not node.keys) or (is_call_to(node, "dict") and not node.args and not node.keywords)


def accumulator_effects(loop: ast.For, acc: str, flavor: str) -> tuple[list[ast.AST], list[ast.AST]]:
    """(matching effect nodes, all references to the accumulator) inside ``loop``."""
    effects: list[ast.AST] = []
    refs: list[ast.AST] = []
    method = {"list": "append", "set": "add"}.get(flavor)
    for node in ast.walk(loop):
        if isinstance(node, (ast.Name, ast.Attribute)) and unparse(node) == acc:
            refs.append(node)
        if method and isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute):
            if node.func.attr == method and unparse(node.func.value) == acc:
                effects.append(node)
        if flavor == "dict" and isinstance(node, ast.Assign):
            for target in node.targets:
                if isinstance(target, ast.Subscript) and unparse(target.value) == acc:
                    effects.append(target)
    return effects, refs


# -- scenarios --------------------------------------------------------------


def test_positions(tree: ast.AST) -> list[ast.expr]:
    tests: list[ast.expr] = []
    for node in ast.walk(tree):
        if isinstance(node, (ast.If, ast.While, ast.IfExp)):
            tests.append(node.test)
        elif isinstance(node, ast.comprehension):
            tests.extend(node.ifs)
    return tests


def extract_scenarios(root: Node, spec: IdiomSpec) -> list[Node]:
    if spec.scenario is None:
        return [root]
    index = tree_index(root)
    if spec.kind is I.CHAIN_COMPARISON:
        found = [n for n in root.walk() if n.kind is NodeKind.BOOLOP and n.attrs.get("op") == "and"]
    elif spec.kind is I.TRUTH_TEST:
        found = [index.node(t) for t in test_positions(root.ast)]
    elif spec.kind is I.STAR_IN_FUNC_CALL:
        found = [n for n in root.walk() if n.kind is NodeKind.CALL]
    else:  # pragma: no cover - every scenario-bearing idiom is listed above
        raise NotImplementedError(spec.kind)
    return sorted(found, key=lambda n: (n.span.start, -n.span.end))


# -- components -------------------------------------------------------------


def _truth_compares(expr: ast.expr) -> Iterator[ast.Compare]:
    if isinstance(expr, ast.Compare):
        yield expr
    elif isinstance(expr, ast.BoolOp):
        for value in expr.values:
            yield from _truth_compares(value)
    elif isinstance(expr, ast.UnaryOp) and isinstance(expr.op, ast.Not):
        yield from _truth_compares(expr.operand)


def _segments(items: list, joins: Callable[[list, object], bool]) -> Iterator[list]:
    """Split ``items`` greedily into maximal groups where each next item ``joins`` the group."""
    group: list = []
    for item in items:
        if group and joins(group, item):
            group.append(item)
        else:
            if len(group) >= 2:
                yield group
            group = [item]
    if len(group) >= 2:
        yield group


def _assign_runs(tree: ast.AST, index: TreeIndex) -> Iterator[list[ast.Assign]]:
    for suite in index.suites():
        run: list[ast.Assign] = []
        for stmt in suite + [None]:
            if isinstance(stmt, ast.Assign) and simple_target(stmt) is not None:
                run.append(stmt)
                continue
            if len(run) >= 2:
                yield run
            run = []


def _independent(group: list[ast.Assign], stmt: ast.Assign) -> bool:
    targets = [simple_target(s) for s in group]
    roots = {root_name(t) for t in targets}
    texts = {unparse(t) for t in targets}
    new_target = simple_target(stmt)
    if unparse(new_target) in texts:
        return False
    return not (names_in(stmt.value) & roots)


def _same_value(group: list[ast.Assign], stmt: ast.Assign) -> bool:
    return unparse(stmt.value) == unparse(group[0].value)


def _star_runs(call: ast.Call) -> Iterator[list[ast.Subscript]]:
    def joins(group: list[ast.Subscript], arg: ast.Subscript) -> bool:
        if unparse(arg.value) != unparse(group[0].value):
            return False
        prev, cur = split_index(group[-1].slice), split_index(arg.slice)
        return prev is not None and cur is not None and prev[0] == cur[0] and cur[1] == prev[1] + 1

    run: list[ast.Subscript] = []
    for arg in call.args + [None]:
        if isinstance(arg, ast.Subscript) and not isinstance(arg.slice, (ast.Slice, ast.Tuple)):
            run.append(arg)
            continue
        if len(run) >= 2:
            yield from _segments(run, joins)
        run = []


def extract_components(scope: Node, spec: IdiomSpec, root: Optional[Node] = None) -> list[ComponentTuple]:
    root = root if root is not None else scope
    index = tree_index(root)
    kind = spec.kind
    groups: list[list[ast.AST]] = []

    if kind is I.CHAIN_COMPARISON:
        compares = [v for v in scope.ast.values if isinstance(v, ast.Compare)]
        groups = [list(pair) for pair in combinations(compares, 2)]
    elif kind is I.TRUTH_TEST:
        groups = [[c] for c in _truth_compares(scope.ast)]
    elif kind is I.STAR_IN_FUNC_CALL:
        groups = list(_star_runs(scope.ast))
    elif kind in (I.LIST_COMPREHENSION, I.SET_COMPREHENSION, I.DICT_COMPREHENSION):
        for node in ast.walk(scope.ast):
            if isinstance(node, ast.For):
                prev = index.previous_statement(node)
                if isinstance(prev, ast.Assign):
                    groups.append([node, prev])
    elif kind is I.LOOP_ELSE:
        for node in ast.walk(scope.ast):
            if isinstance(node, (ast.For, ast.While)):
                nxt = index.next_statement(node)
                if isinstance(nxt, ast.If):
                    groups.append([node, nxt])
    elif kind is I.ASSIGN_MULTI_TARGETS:
        for run in _assign_runs(scope.ast, index):
            groups.extend(_segments(run, _independent))
    elif kind is I.CHAIN_ASSIGN_SAME_VALUE:
        for run in _assign_runs(scope.ast, index):
            groups.extend(_segments(run, _same_value))
    elif kind in (I.FOR_MULTI_TARGETS, I.ENUMERATE):
        groups = [[n] for n in ast.walk(scope.ast) if isinstance(n, ast.For)]
    elif kind is I.WITH:
        groups = [[n] for n in ast.walk(scope.ast) if isinstance(n, ast.Call)]
    elif kind is I.FSTRING:
        groups = [[n] for n in ast.walk(scope.ast) if isinstance(n, ast.BinOp)]

    tuples = []
    for group in groups:
        nodes = tuple(index.node(n) for n in group)
        tuples.append(ComponentTuple(nodes, scope, kind, root))
    tuples.sort(key=lambda t: (t.span.start, t.span.end))
    return tuples


# -- conditions -------------------------------------------------------------


def _cond_comprehension(cond: ConditionId, tup: ComponentTuple, index: TreeIndex) -> bool:
    loop, init = tup.nodes[0].ast, tup.nodes[1].ast
    flavor = accumulator_flavor(tup.idiom)
    target = simple_target(init)
    acc = unparse(target) if target is not None and is_dotted(target) else None

    if cond is C.HAS_APPEND_CALL or cond is C.HAS_ADD_CALL:
        method = "append" if cond is C.HAS_APPEND_CALL else "add"
        return any(
            isinstance(n, ast.Call) and isinstance(n.func, ast.Attribute) and n.func.attr == method
            for n in ast.walk(loop)
        )
    if cond is C.HAS_SUBSCRIPT_ASSIGN:
        return any(
            isinstance(n, ast.Assign) and any(isinstance(t, ast.Subscript) for t in n.targets)
            for n in ast.walk(loop)
        )
    if acc is None:
        return False
    effects, refs = accumulator_effects(loop, acc, flavor)
    if cond in (C.CALL_RECEIVER_IS_ASSIGNED, C.SUBSCRIPT_VALUE_IS_ASSIGNED):
        return bool(effects)
    if cond is C.INIT_IS_EMPTY_AND_ADJACENT:
        return index.previous_statement(loop) is init and is_empty_collection(init.value, flavor)
    if cond is C.TARGET_WRITTEN_ONLY_BY_LOOP_EFFECT:
        if len(effects) != 1 or len(refs) != 1 or loop.orelse:
            return False
        effect = effects[0]
        ref = refs[0]
        owner = effect.func.value if isinstance(effect, ast.Call) else effect.value
        if owner is not ref:
            return False
        if isinstance(effect, ast.Subscript):
            stmt = index.statement_of(effect)
            return isinstance(stmt, ast.Assign) and len(stmt.targets) == 1
        return len(effect.args) == 1 and not effect.keywords and not isinstance(effect.args[0], ast.Starred)
    raise KeyError(cond)


def _cond_chain(cond: ConditionId, tup: ComponentTuple) -> bool:
    if cond is C.OPERANDS_INTERSECT:
        a, b = (n.ast for n in tup.nodes)
        left = {unparse(e) for e in [a.left, *a.comparators]}
        right = {unparse(e) for e in [b.left, *b.comparators]}
        return bool(left & right)
    raise KeyError(cond)


def _cond_truth(cond: ConditionId, tup: ComponentTuple) -> bool:
    cmp = tup.nodes[0].ast
    if cond is C.OP_IS_EQ_OR_NE:
        return len(cmp.ops) == 1 and isinstance(cmp.ops[0], (ast.Eq, ast.NotEq))
    if cond is C.OPERAND_IN_EMPTY_SET:
        return len(cmp.ops) == 1 and (is_empty_literal(cmp.left) or is_empty_literal(cmp.comparators[0]))
    raise KeyError(cond)


def break_guard(loop: ast.AST, index: TreeIndex) -> Optional[ast.expr]:
    """Test of the If that directly holds the loop's only break, if unique."""
    breaks = loop_breaks(loop)
    if len(breaks) != 1:
        return None
    holder = index.parent(breaks[0])
    if isinstance(holder, ast.If) and breaks[0] in holder.body:
        return holder.test
    return None


def _cond_loop_else(cond: ConditionId, tup: ComponentTuple, index: TreeIndex) -> bool:
    loop, post = tup.nodes[0].ast, tup.nodes[1].ast
    if cond is C.LOOP_HAS_BREAK:
        return bool(loop_breaks(loop))
    if cond is C.IF_IS_NEXT_STATEMENT:
        return index.next_statement(loop) is post
    if cond is C.IF_NEGATES_BREAK_GUARD:
        if loop.orelse or post.orelse:
            return False
        guard = break_guard(loop, index)
        return guard is not None and is_negation(guard, post.test)
    raise KeyError(cond)


def _cond_assign_run(cond: ConditionId, tup: ComponentTuple, index: TreeIndex) -> bool:
    stmts = [n.ast for n in tup.nodes]
    if any(not isinstance(s, ast.Assign) or simple_target(s) is None for s in stmts):
        return False
    for a, b in zip(stmts, stmts[1:]):
        if index.next_statement(a) is not b:
            return False
    if cond is C.NO_CROSS_DEPENDENCY:
        for i in range(1, len(stmts)):
            if not _independent(stmts[:i], stmts[i]):
                return False
            if any(isinstance(n, (ast.Yield, ast.YieldFrom, ast.Starred)) for n in ast.walk(stmts[i].value)):
                return False
        return not any(isinstance(n, (ast.Yield, ast.YieldFrom)) for n in ast.walk(stmts[0].value))
    if cond is C.SAME_VALUES:
        return len({unparse(s.value) for s in stmts}) == 1
    if cond is C.IMMUTABLE_LITERAL_VALUE:
        value = stmts[0].value
        if isinstance(value, ast.UnaryOp) and isinstance(value.op, (ast.USub, ast.UAdd)):
            value = value.operand
            return isinstance(value, ast.Constant) and type(value.value) in (int, float, complex)
        return isinstance(value, ast.Constant) and type(value.value) in (type(None), bool, int, float, complex, str, bytes)
    raise KeyError(cond)


def loop_var_uses(loop: ast.For) -> Optional[list[ast.AST]]:
    """Every occurrence of the loop variable in body/else, or None if shadowed."""
    if not isinstance(loop.target, ast.Name):
        return None
    var = loop.target.id
    uses = []
    for stmt in loop.body + loop.orelse:
        for node in ast.walk(stmt):
            if isinstance(node, ast.arg) and node.arg == var:
                return None
            if isinstance(node, ast.Name) and node.id == var:
                uses.append(node)
    return uses


def _cond_for_multi(cond: ConditionId, tup: ComponentTuple, index: TreeIndex) -> bool:
    loop = tup.nodes[0].ast
    if cond is C.BODY_HAS_SUBSCRIPT:
        return any(isinstance(n, ast.Subscript) for s in loop.body for n in ast.walk(s))
    uses = loop_var_uses(loop)
    if uses is None:
        return False
    if cond is C.SUBSCRIPT_VALUE_IS_LOOP_VAR:
        return any(isinstance(index.parent(u), ast.Subscript) and index.parent(u).value is u for u in uses)
    if cond is C.INDICES_NON_NEGATIVE_LITERALS:
        if not uses:
            return False
        for use in uses:
            sub = index.parent(use)
            if not (isinstance(use.ctx, ast.Load) and isinstance(sub, ast.Subscript) and sub.value is use):
                return False
            if not isinstance(sub.ctx, ast.Load) or not is_int_literal(sub.slice) or sub.slice.value < 0:
                return False
        return True
    raise KeyError(cond)


def _cond_star(cond: ConditionId, tup: ComponentTuple) -> bool:
    subs = [n.ast for n in tup.nodes]
    if cond is C.SAME_SUBSCRIPT_VALUE:
        return is_dotted(subs[0].value) and len({unparse(s.value) for s in subs}) == 1
    if cond is C.STAR_INDICES_VALID:
        parts = [split_index(s.slice) for s in subs]
        if any(p is None for p in parts) or len({p[0] for p in parts}) != 1:
            return False
        offsets = [p[1] for p in parts]
        if any(b != a + 1 for a, b in zip(offsets, offsets[1:])):
            return False
        if parts[0][0] is None and offsets[0] < 0 <= offsets[-1]:
            return False
        return True
    raise KeyError(cond)


_WITH_HOSTS = (ast.Assign, ast.AugAssign, ast.AnnAssign, ast.Expr)


def open_host(call: ast.Call, index: TreeIndex, file: SourceFile) -> Optional[ast.stmt]:
    """The simple statement an open() call can be hoisted out of, or None."""
    host = index.statement_of(call)
    if not isinstance(host, _WITH_HOSTS) or getattr(host, "value", None) is call:
        return None
    for anc in index.ancestors(call):
        if anc is host:
            break
        if isinstance(anc, (ast.Lambda, ast.GeneratorExp, ast.Yield, ast.YieldFrom, ast.Await)):
            return None
        if isinstance(anc, ast.Call) and isinstance(anc.func, ast.Name) and anc.func.id in LAZY_CONSUMERS:
            return None
    first_open = min(
        (n for n in ast.walk(host) if is_call_to(n, "open")),
        key=lambda n: (n.lineno, n.col_offset),
    )
    if first_open is not call:
        return None
    # the host must own its lines so it can be re-indented under a with block
    start = file.offset(host.lineno, host.col_offset)
    if file.data[file.newline_index[host.lineno - 1] : start].strip():
        return None
    prev, nxt = index.previous_statement(host), index.next_statement(host)
    if prev is not None and prev.end_lineno == host.lineno:
        return None
    if nxt is not None and nxt.lineno == host.end_lineno:
        return None
    end = file.offset(host.end_lineno, host.end_col_offset)
    rest = file.data[end:].split(b"\n", 1)[0].split(b"#", 1)[0]
    if rest.strip():
        return None
    return host


def _cond_with(cond: ConditionId, tup: ComponentTuple, index: TreeIndex) -> bool:
    call = tup.nodes[0].ast
    if cond is C.CALLEE_NAME_IS_OPEN:
        return is_call_to(call, "open")
    if cond is C.OPEN_RESULT_CONSUMED_IN_STATEMENT:
        return is_call_to(call, "open") and open_host(call, index, tup.file) is not None
    raise KeyError(cond)


def range_len_object(loop: ast.For) -> Optional[ast.expr]:
    it = loop.iter
    if is_call_to(it, "range") and len(it.args) == 1 and not it.keywords:
        inner = it.args[0]
        if is_call_to(inner, "len") and len(inner.args) == 1 and not inner.keywords:
            if is_dotted(inner.args[0]) and isinstance(loop.target, ast.Name):
                return inner.args[0]
    return None


def indexed_reads(loop: ast.For, obj: ast.expr) -> tuple[list[ast.Subscript], bool]:
    """(loads of obj[i], whether obj[i] is ever written) inside the loop body."""
    var, text = loop.target.id, unparse(obj)
    loads, written = [], False
    for stmt in loop.body:
        for node in ast.walk(stmt):
            if (
                isinstance(node, ast.Subscript)
                and isinstance(node.slice, ast.Name)
                and node.slice.id == var
                and unparse(node.value) == text
            ):
                if isinstance(node.ctx, ast.Load):
                    loads.append(node)
                else:
                    written = True
    return loads, written


def _cond_enumerate(cond: ConditionId, tup: ComponentTuple, index: TreeIndex) -> bool:
    loop = tup.nodes[0].ast
    if cond is C.ITER_NOT_ALREADY_ENUMERATE:
        return not is_call_to(loop.iter, "enumerate")
    obj = range_len_object(loop)
    if obj is None:
        return False
    if cond is C.RANGE_LEN_ITERATION:
        var, text = loop.target.id, unparse(obj)
        for stmt in loop.body:
            for node in ast.walk(stmt):
                if isinstance(node, (ast.Name, ast.Attribute)) and not isinstance(node.ctx, ast.Load):
                    if unparse(node) == text or (isinstance(node, ast.Name) and node.id == var):
                        return False
                if isinstance(node, ast.arg) and node.arg == var:
                    return False
                if (
                    isinstance(node, ast.Call)
                    and isinstance(node.func, ast.Attribute)
                    and node.func.attr in RESIZING_METHODS
                    and unparse(node.func.value) == text
                ):
                    return False
        return True
    if cond is C.INDEXED_ACCESS_IN_BODY:
        loads, written = indexed_reads(loop, obj)
        return bool(loads) and not written
    raise KeyError(cond)


def _cond_fstring(cond: ConditionId, tup: ComponentTuple) -> bool:
    binop = tup.nodes[0].ast
    if cond is C.OP_IS_MOD:
        return isinstance(binop.op, ast.Mod)
    if cond is C.LEFT_IS_STR_LITERAL:
        left = binop.left
        if not (isinstance(left, ast.Constant) and type(left.value) is str):
            return False
        index = tree_index(tup.root)
        text = tup.text(index.node(left))
        return len(_string_tokens(text)) == 1
    raise KeyError(cond)


def _string_tokens(text: str) -> list[str]:
    import io
    import tokenize

    try:
        toks = tokenize.generate_tokens(io.StringIO(text).readline)
        return [t.string for t in toks if t.type == tokenize.STRING]
    except (tokenize.TokenError, SyntaxError):
        return []


def evaluate_condition(cond: ConditionId, tup: ComponentTuple, root: Optional[Node] = None) -> bool:
    root = root if root is not None else tup.root
    index = tree_index(root)
    kind = tup.idiom
    if kind in (I.LIST_COMPREHENSION, I.SET_COMPREHENSION, I.DICT_COMPREHENSION):
        return _cond_comprehension(cond, tup, index)
    if kind is I.CHAIN_COMPARISON:
        return _cond_chain(cond, tup)
    if kind is I.TRUTH_TEST:
        return _cond_truth(cond, tup)
    if kind is I.LOOP_ELSE:
        return _cond_loop_else(cond, tup, index)
    if kind in (I.ASSIGN_MULTI_TARGETS, I.CHAIN_ASSIGN_SAME_VALUE):
        return _cond_assign_run(cond, tup, index)
    if kind is I.FOR_MULTI_TARGETS:
        return _cond_for_multi(cond, tup, index)
    if kind is I.STAR_IN_FUNC_CALL:
        return _cond_star(cond, tup)
    if kind is I.WITH:
        return _cond_with(cond, tup, index)
    if kind is I.ENUMERATE:
        return _cond_enumerate(cond, tup, index)
    if kind is I.FSTRING:
        return _cond_fstring(cond, tup)
    raise KeyError(kind)


# -- driver -----------------------------------------------------------------

def site_id(file: SourceFile, idiom: IdiomKind, spans: Iterable[Span]) -> str:
    key = "|".join([str(file.path), idiom.value, *(f"{s.start}-{s.end}" for s in spans)])
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


def find_sites(
    file: SourceFile,
    kinds: Optional[Iterable[IdiomKind]] = None,
    root: Optional[Node] = None,
) -> list[MatchSite]:
    """All sites of the requested idioms, in source order."""
    wanted = set(kinds) if kinds is not None else set(IdiomKind)
    if root is None:
        root = parse_source(file)
    sites: dict[str, MatchSite] = {}
    for spec in catalog():
        if spec.kind not in wanted:
            continue
        for scenario in extract_scenarios(root, spec):
            for tup in extract_components(scenario, spec, root):
                if all(evaluate_condition(c, tup, root) for c in spec.conditions):
                    sid = site_id(file, spec.kind, (n.span for n in tup.nodes))
                    if sid not in sites:
                        scen = scenario if spec.scenario is not None else None
                        sites[sid] = MatchSite(spec.kind, file, scen, tup, sid)
    return sorted(
        sites.values(),
        key=lambda s: (s.span.start, s.span.end, catalog_index(s.idiom)),
    )
