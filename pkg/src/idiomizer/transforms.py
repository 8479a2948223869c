"""Rule-based idiomatization of abstract code, one transform per idiom.

Every transform takes abstract source text and returns an outcome. None of
them pretty-print a tree: output is assembled from source segments of the
input so spelling and spacing of untouched subexpressions survive.
"""
from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from .extraction import CMP_NEGATION, is_empty_literal, is_int_literal, split_index
from .knowledge import IdiomKind
from .outcomes import Accepted, Declined, Outcome
from .syntax import CMPOP_TOKENS, Span, expand_parens, line_starts
from .tokens import normalize

I = IdiomKind


@dataclass(frozen=True)
class TransformContext:
    """Facts about the surrounding file a transform may need."""

    reserved: frozenset[str] = field(default_factory=frozenset)
    indent_unit: str = "    "


class Fragment:
    """A parsed piece of code with byte-accurate slicing."""

    def __init__(self, code: str, mode: str = "exec") -> None:
        self.code = code
        self.data = code.encode("utf-8")
        self.starts = line_starts(self.data)
        self.tree = ast.parse(code, mode=mode)

    def span(self, node: ast.AST, expand: bool = False) -> Span:
        start = self.starts[node.lineno - 1] + node.col_offset
        end = self.starts[node.end_lineno - 1] + node.end_col_offset
        span = Span(start, end)
        return expand_parens(span, self.data) if expand else span

    def text(self, node: ast.AST, expand: bool = False) -> str:
        span = self.span(node, expand)
        return self.data[span.start : span.end].decode("utf-8")

    def slice(self, start: int, end: int) -> str:
        return self.data[start:end].decode("utf-8")


def _parenthesized(frag: Fragment, node: ast.AST) -> bool:
    return frag.span(node, expand=True) != frag.span(node)


def _names(code: str) -> set[str]:
    return set(re.findall(r"[A-Za-z_]\w*", code))


def fresh_name(base: str, taken: set[str] | frozenset[str]) -> str:
    """``base``, then ``base2``, ``base3``... whichever is free first."""
    if base not in taken:
        return base
    n = 2
    while f"{base}{n}" in taken:
        n += 1
    return f"{base}{n}"


# -- chain comparison --------------------------------------------------------

_MIRROR = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "==": "==", "!=": "!=", "is": "is", "is not": "is not"}


@dataclass(frozen=True)
class _Chain:
    operands: tuple[str, ...]
    ops: tuple[str, ...]

    def key(self, i: int) -> str:
        return _operand_key(self.operands[i])

    def reversed(self) -> Optional["_Chain"]:
        if any(op not in _MIRROR for op in self.ops):
            return None
        return _Chain(self.operands[::-1], tuple(_MIRROR[op] for op in reversed(self.ops)))

    def render(self) -> str:
        parts = [self.operands[0]]
        for op, operand in zip(self.ops, self.operands[1:]):
            parts += [op, operand]
        return " ".join(parts)


def _operand_key(text: str) -> str:
    key = normalize(text)
    while key.startswith("( ") and key.endswith(" )"):
        inner = key[2:-2]
        depth = 0
        for tok in inner.split(" "):
            depth += tok in ("(", "[", "{")
            depth -= tok in (")", "]", "}")
            if depth < 0:
                return key
        key = inner
    return key


def _as_chain(text: str) -> Optional[_Chain]:
    try:
        frag = Fragment(text.strip(), mode="eval")
    except SyntaxError:
        return None
    node = frag.tree.body
    if not isinstance(node, ast.Compare):
        return None
    operands = tuple(frag.text(e, expand=True) for e in [node.left, *node.comparators])
    return _Chain(operands, tuple(CMPOP_TOKENS[type(op)] for op in node.ops))


# configuration order: no reversal first, then fewest reversals; forward pair before swapped
CHAIN_CONFIGURATIONS = (
    ((False, False), False),
    ((False, False), True),
    ((True, False), False),
    ((False, True), False),
    ((True, False), True),
    ((False, True), True),
    ((True, True), False),
    ((True, True), True),
)


def chain_two_compares(c1: str, c2: str) -> Outcome:
    """Merge two comparisons that share an operand into one chained comparison."""
    first, second = _as_chain(c1), _as_chain(c2)
    if first is None or second is None:
        return Declined("both conjuncts must be comparisons")
    blocked: Optional[str] = None
    for (rev1, rev2), swap in CHAIN_CONFIGURATIONS:
        a = first.reversed() if rev1 else first
        b = second.reversed() if rev2 else second
        if a is None or b is None:
            if blocked is None:
                ghost_a = _Chain(first.operands[::-1], first.ops) if rev1 else first
                ghost_b = _Chain(second.operands[::-1], second.ops) if rev2 else second
                x, y = (ghost_b, ghost_a) if swap else (ghost_a, ghost_b)
                if x.key(-1) == y.key(0):
                    bad = [op for op in (first.ops if rev1 else ()) + (second.ops if rev2 else ()) if op not in _MIRROR]
                    blocked = bad[0]
            continue
        x, y = (b, a) if swap else (a, b)
        if x.key(-1) == y.key(0):
            merged = _Chain(x.operands + y.operands[1:], x.ops + y.ops)
            return Accepted(merged.render())
    if blocked is not None:
        return Declined(f"reversing compare operands is invalid for the {blocked!r} operator")
    return Declined("no reversal makes the shared operand adjacent")


def _chain(code: str, ctx: TransformContext) -> Outcome:
    try:
        frag = Fragment(code.strip(), mode="eval")
    except SyntaxError:
        return Declined("abstract code does not parse")
    node = frag.tree.body
    if not (isinstance(node, ast.BoolOp) and isinstance(node.op, ast.And) and len(node.values) == 2):
        return Declined("expected exactly two conjuncts")
    return chain_two_compares(frag.text(node.values[0], expand=True), frag.text(node.values[1], expand=True))


# -- truth test --------------------------------------------------------------


def _truth(code: str, ctx: TransformContext) -> Outcome:
    try:
        frag = Fragment(code.strip(), mode="eval")
    except SyntaxError:
        return Declined("abstract code does not parse")
    node = frag.tree.body
    if not (isinstance(node, ast.Compare) and len(node.ops) == 1 and isinstance(node.ops[0], (ast.Eq, ast.NotEq))):
        return Declined("expected a single == or != comparison")
    left, right = node.left, node.comparators[0]
    if is_empty_literal(right):
        subject = left
    elif is_empty_literal(left):
        subject = right
    else:
        return Declined("neither operand is an empty literal")
    text = frag.text(subject, expand=True)
    if isinstance(node.ops[0], ast.Eq):
        if isinstance(subject, (ast.BoolOp, ast.IfExp, ast.Lambda, ast.NamedExpr)) and not _parenthesized(frag, subject):
            text = f"({text})"
        return Accepted(f"not {text}")
    return Accepted(text)


# -- comprehensions -----------------------------------------------------------

_LOOSE = (ast.IfExp, ast.Lambda, ast.NamedExpr, ast.Yield, ast.YieldFrom)


def _tight(frag: Fragment, node: ast.AST, extra: tuple[type, ...] = ()) -> str:
    """Source of ``node``, parenthesized when it would not bind as an or-test."""
    text = frag.text(node, expand=True)
    if _parenthesized(frag, node):
        return text
    if isinstance(node, _LOOSE + extra) or (isinstance(node, ast.Tuple) and node.elts):
        return f"({text})"
    return text


def negate(frag: Fragment, test: ast.expr) -> str:
    """Syntactic negation by the table: flip a single comparison, strip a not, else prefix not."""
    if isinstance(test, ast.UnaryOp) and isinstance(test.op, ast.Not):
        return _tight(frag, test.operand, (ast.BoolOp,))
    if isinstance(test, ast.Compare) and len(test.ops) == 1 and not _parenthesized(frag, test):
        flipped = CMPOP_TOKENS[CMP_NEGATION[type(test.ops[0])]]
        return f"{frag.text(test.left, expand=True)} {flipped} {frag.text(test.comparators[0], expand=True)}"
    text = frag.text(test, expand=True)
    if not _parenthesized(frag, test) and isinstance(test, (ast.BoolOp,) + _LOOSE):
        text = f"({text})"
    return f"not {text}"


class _Reject(Exception):
    pass


def _is_continue_guard(stmt: ast.stmt) -> bool:
    return (
        isinstance(stmt, ast.If)
        and not stmt.orelse
        and len(stmt.body) == 1
        and isinstance(stmt.body[0], ast.Continue)
    )


def _effect(stmt: ast.stmt, acc: str, flavor: str, frag: Fragment) -> Optional[str]:
    if flavor in ("list", "set") and isinstance(stmt, ast.Expr) and isinstance(stmt.value, ast.Call):
        call = stmt.value
        method = "append" if flavor == "list" else "add"
        if (
            isinstance(call.func, ast.Attribute)
            and call.func.attr == method
            and normalize(frag.text(call.func.value)) == acc
            and len(call.args) == 1
            and not call.keywords
            and not isinstance(call.args[0], (ast.Starred, ast.Yield, ast.YieldFrom))
        ):
            arg = call.args[0]
            text = frag.text(arg)
            if isinstance(arg, ast.NamedExpr) and not _parenthesized(frag, arg):
                text = f"({text})"
            return text
    if flavor == "dict" and isinstance(stmt, ast.Assign) and len(stmt.targets) == 1:
        target = stmt.targets[0]
        if isinstance(target, ast.Subscript) and normalize(frag.text(target.value)) == acc:
            if isinstance(target.slice, ast.Slice) or isinstance(stmt.value, (ast.Yield, ast.YieldFrom)):
                return None
            key = _tight(frag, target.slice, (ast.BoolOp,)) if isinstance(target.slice, (ast.Tuple,) + _LOOSE) else frag.text(target.slice)
            value = frag.text(stmt.value, expand=True)
            if isinstance(stmt.value, (ast.Lambda, ast.NamedExpr)) and not _parenthesized(frag, stmt.value):
                value = f"({value})"
            return f"{key}: {value}"
    return None


def _clauses(stmts: list[ast.stmt], acc: str, flavor: str, frag: Fragment, out: list[str]) -> str:
    guards: list[str] = []
    i = 0
    while i < len(stmts) and _is_continue_guard(stmts[i]):
        guards.append(negate(frag, stmts[i].test))
        i += 1
    rest = stmts[i:]
    if len(rest) != 1:
        raise _Reject("residual statements in loop body")
    stmt = rest[0]
    if isinstance(stmt, ast.If):
        if stmt.orelse:
            raise _Reject("if statement has an else branch")
        guards.append(_guard(frag, stmt.test))
        _flush(guards, out)
        return _clauses(stmt.body, acc, flavor, frag, out)
    _flush(guards, out)
    if isinstance(stmt, ast.For):
        if stmt.orelse:
            raise _Reject("nested loop has an else clause")
        out.append(f"for {frag.text(stmt.target)} in {_tight(frag, stmt.iter)}")
        return _clauses(stmt.body, acc, flavor, frag, out)
    element = _effect(stmt, acc, flavor, frag)
    if element is None:
        raise _Reject(f"unsupported statement: {type(stmt).__name__}")
    return element


def _guard(frag: Fragment, test: ast.expr) -> str:
    return _tight(frag, test)


def _flush(guards: list[str], out: list[str]) -> None:
    if not guards:
        return
    if len(guards) == 1:
        out.append(f"if {guards[0]}")
        guards.clear()
        return
    parts = []
    for g in guards:
        try:
            node = ast.parse(g, mode="eval").body
        except SyntaxError:
            node = None
        bare_or = isinstance(node, ast.BoolOp) and isinstance(node.op, ast.Or) and not g.startswith("(")
        parts.append(f"({g})" if bare_or else g)
    out.append("if " + " and ".join(parts))
    guards.clear()


def build_comprehension(loop: str, init: str, flavor: str) -> Outcome:
    """Fold an empty-collection init and its accumulating for-loop into a comprehension."""
    return _comprehension(f"{init.rstrip()}\n{loop}", flavor)


def _comprehension(code: str, flavor: str) -> Outcome:
    try:
        frag = Fragment(code)
    except SyntaxError:
        return Declined("abstract code does not parse")
    body = frag.tree.body
    if len(body) != 2 or not isinstance(body[0], ast.Assign) or not isinstance(body[1], ast.For):
        return Declined("expected an initializer followed by a for loop")
    init, loop = body
    if loop.orelse:
        return Declined("loop has an else clause")
    for node in ast.walk(loop):
        if isinstance(node, (ast.Break, ast.Return, ast.Yield, ast.YieldFrom, ast.Await, ast.Global, ast.Nonlocal)):
            return Declined(f"loop body contains {type(node).__name__.lower()}")
    if isinstance(loop, ast.AsyncFor):
        return Declined("async loop")
    target_text = frag.text(init.targets[0])
    acc = normalize(target_text)
    clauses = [f"for {frag.text(loop.target)} in {_tight(frag, loop.iter)}"]
    try:
        element = _clauses(loop.body, acc, flavor, frag, clauses)
    except _Reject as exc:
        return Declined(str(exc))
    inner = f"{element} {' '.join(clauses)}"
    opener, closer = ("[", "]") if flavor == "list" else ("{", "}")
    return Accepted(f"{target_text} = {opener}{inner}{closer}")


def _list_comp(code: str, ctx: TransformContext) -> Outcome:
    return _comprehension(code, "list")


def _set_comp(code: str, ctx: TransformContext) -> Outcome:
    return _comprehension(code, "set")


def _dict_comp(code: str, ctx: TransformContext) -> Outcome:
    return _comprehension(code, "dict")


# -- loop else ----------------------------------------------------------------


def _header_colon(data: bytes, after: int) -> Optional[int]:
    i = after
    while i < len(data) and data[i : i + 1] in (b" ", b"\t", b")", b"\\", b"\n", b"\r"):
        i += 1
    return i if data[i : i + 1] == b":" else None


def _loop_else(code: str, ctx: TransformContext) -> Outcome:
    try:
        frag = Fragment(code)
    except SyntaxError:
        return Declined("abstract code does not parse")
    body = frag.tree.body
    if len(body) != 2 or not isinstance(body[0], (ast.For, ast.While)) or not isinstance(body[1], ast.If):
        return Declined("expected a loop followed by an if statement")
    loop, post = body
    if loop.orelse or post.orelse:
        return Declined("loop or if already has an else branch")
    if not any(isinstance(n, ast.Break) for n in ast.walk(loop)):
        return Declined("loop never breaks")
    start = frag.span(post).start
    colon = _header_colon(frag.data, frag.span(post.test, expand=True).end)
    if colon is None:
        return Declined("cannot locate if header")
    indent = frag.slice(frag.starts[post.lineno - 1], start)
    if indent.strip() or frag.slice(frag.starts[loop.lineno - 1], frag.span(loop).start) != indent:
        return Declined("loop and if are not aligned")
    out = frag.slice(0, start) + "else:" + frag.slice(colon + 1, len(frag.data))
    return Accepted(out)


# -- assignment runs -----------------------------------------------------------


def _assignments(code: str) -> tuple[Optional[Fragment], list[ast.Assign]]:
    try:
        frag = Fragment(code)
    except SyntaxError:
        return None, []
    stmts = frag.tree.body
    if len(stmts) < 2 or not all(isinstance(s, ast.Assign) and len(s.targets) == 1 for s in stmts):
        return frag, []
    return frag, stmts


def _assign_multi(code: str, ctx: TransformContext) -> Outcome:
    frag, stmts = _assignments(code)
    if frag is None:
        return Declined("abstract code does not parse")
    if not stmts:
        return Declined("expected two or more single-target assignments")
    targets, values = [], []
    for stmt in stmts:
        target = stmt.targets[0]
        if isinstance(target, (ast.Tuple, ast.List, ast.Starred)):
            return Declined("targets must be simple")
        targets.append(frag.text(target))
        value = stmt.value
        if isinstance(value, (ast.Starred, ast.Yield, ast.YieldFrom)):
            return Declined("value cannot join a tuple")
        text = frag.text(value, expand=True)
        if not _parenthesized(frag, value) and (
            (isinstance(value, ast.Tuple) and value.elts) or isinstance(value, (ast.NamedExpr, ast.Lambda))
        ):
            text = f"({text})"
        values.append(text)
    return Accepted(f"{', '.join(targets)} = {', '.join(values)}")


def _chain_assign(code: str, ctx: TransformContext) -> Outcome:
    frag, stmts = _assignments(code)
    if frag is None:
        return Declined("abstract code does not parse")
    if not stmts:
        return Declined("expected two or more single-target assignments")
    values = {normalize(frag.text(s.value)) for s in stmts}
    if len(values) != 1:
        return Declined("assigned values differ")
    targets = [frag.text(s.targets[0]) for s in stmts]
    return Accepted(" = ".join(targets + [frag.text(stmts[0].value)]))


# -- for multi targets ------------------------------------------------------------


def _replace_all(frag: Fragment, edits: list[tuple[Span, str]]) -> str:
    from .syntax import splice

    return splice(frag.code, edits)


def _for_multi(code: str, ctx: TransformContext) -> Outcome:
    try:
        frag = Fragment(code)
    except SyntaxError:
        return Declined("abstract code does not parse")
    body = frag.tree.body
    if len(body) != 1 or not isinstance(body[0], ast.For) or not isinstance(body[0].target, ast.Name):
        return Declined("expected a for loop over a plain name")
    loop = body[0]
    var = loop.target.id
    parents = {id(c): p for p in ast.walk(loop) for c in ast.iter_child_nodes(p)}
    uses: list[tuple[ast.Subscript, int]] = []
    for stmt in loop.body + loop.orelse:
        for node in ast.walk(stmt):
            if isinstance(node, ast.Name) and node.id == var:
                sub = parents.get(id(node))
                if not (
                    isinstance(sub, ast.Subscript)
                    and sub.value is node
                    and isinstance(sub.ctx, ast.Load)
                    and is_int_literal(sub.slice)
                    and sub.slice.value >= 0
                ):
                    return Declined("loop variable is used other than by a literal index")
                uses.append((sub, sub.slice.value))
    if not uses:
        return Declined("loop variable is never subscripted")
    taken = _names(code) | set(ctx.reserved)
    base = next(
        b for b in ("e", "elem", "item", "part", "_e")
        if not any(re.fullmatch(rf"{re.escape(b)}\d*", n) for n in taken)
    )
    top = max(k for _, k in uses)
    names = [f"{base}{k}" for k in range(top + 1)]
    header = ", ".join(names + [f"*{base}"])
    edits = [(frag.span(loop.target), header)]
    edits += [(frag.span(sub), f"{base}{k}") for sub, k in uses]
    return Accepted(_replace_all(frag, edits))


# -- enumerate --------------------------------------------------------------------


def _enumerate(code: str, ctx: TransformContext) -> Outcome:
    try:
        frag = Fragment(code)
    except SyntaxError:
        return Declined("abstract code does not parse")
    body = frag.tree.body
    if len(body) != 1 or not isinstance(body[0], ast.For) or not isinstance(body[0].target, ast.Name):
        return Declined("expected a for loop over a plain name")
    loop = body[0]
    it = loop.iter
    if not (
        isinstance(it, ast.Call) and isinstance(it.func, ast.Name) and it.func.id == "range"
        and len(it.args) == 1 and not it.keywords
        and isinstance(it.args[0], ast.Call) and isinstance(it.args[0].func, ast.Name)
        and it.args[0].func.id == "len" and len(it.args[0].args) == 1
    ):
        return Declined("loop does not iterate range(len(...))")
    obj = it.args[0].args[0]
    obj_text, obj_key, var = frag.text(obj), normalize(frag.text(obj)), loop.target.id
    reads = []
    for stmt in loop.body:
        for node in ast.walk(stmt):
            if (
                isinstance(node, ast.Subscript)
                and isinstance(node.slice, ast.Name)
                and node.slice.id == var
                and normalize(frag.text(node.value)) == obj_key
            ):
                if not isinstance(node.ctx, ast.Load):
                    return Declined("indexed element is written")
                reads.append(node)
    if not reads:
        return Declined("body never reads the indexed element")
    header_span = Span(frag.span(loop.target).start, frag.span(it, expand=True).end)
    first = loop.body[0]
    if (
        isinstance(first, ast.Assign)
        and len(first.targets) == 1
        and isinstance(first.targets[0], ast.Name)
        and first.targets[0].id != var
        and first.value in reads
        and _owns_lines(frag, loop, first)
    ):
        element = first.targets[0].id
        start = frag.starts[first.lineno - 1]
        end = frag.starts[first.end_lineno] if first.end_lineno < len(frag.starts) else len(frag.data)
        edits = [(header_span, f"({var}, {element}) in enumerate({obj_text})")]
        if len(loop.body) == 1:
            indent = frag.slice(start, frag.span(first).start)
            edits.append((Span(start, end), f"{indent}pass\n"))
        else:
            edits.append((Span(start, end), ""))
        return Accepted(_replace_all(frag, edits))
    taken = _names(code) | set(ctx.reserved)
    element = fresh_name("elem", taken)
    edits = [(header_span, f"({var}, {element}) in enumerate({obj_text})")]
    edits += [(frag.span(node), element) for node in reads]
    return Accepted(_replace_all(frag, edits))


def _owns_lines(frag: Fragment, loop: ast.For, stmt: ast.stmt) -> bool:
    if stmt.lineno == loop.lineno:
        return False
    line_start = frag.starts[stmt.lineno - 1]
    if frag.slice(line_start, frag.span(stmt).start).strip():
        return False
    following = loop.body[1:2]
    if following and following[0].lineno == stmt.end_lineno:
        return False
    end_line_end = frag.starts[stmt.end_lineno] if stmt.end_lineno < len(frag.starts) else len(frag.data)
    tail = frag.slice(frag.span(stmt).end, end_line_end)
    return not tail.split("#", 1)[0].strip()


# -- star in call --------------------------------------------------------------------


def _render_offset(base: Optional[str], k: int) -> Optional[str]:
    if base is None:
        return None if k == 0 else str(k)
    if k == 0:
        return base
    return f"{base} + {k}" if k > 0 else f"{base} - {-k}"


def _star(code: str, ctx: TransformContext) -> Outcome:
    try:
        frag = Fragment(f"_({code})", mode="eval")
    except SyntaxError:
        return Declined("abstract code does not parse")
    args = frag.tree.body.args
    if len(args) < 2 or frag.tree.body.keywords or not all(isinstance(a, ast.Subscript) for a in args):
        return Declined("expected two or more subscripts")
    values = {normalize(frag.text(a.value)) for a in args}
    if len(values) != 1:
        return Declined("subscripts index different values")
    parts = [split_index(a.slice) for a in args]
    if any(p is None for p in parts) or len({p[0] for p in parts}) != 1:
        return Declined("indices are not a run over one base")
    offsets = [p[1] for p in parts]
    if any(b != a + 1 for a, b in zip(offsets, offsets[1:])):
        return Declined("indices are not consecutive")
    base = parts[0][0]
    if base is None and offsets[0] < 0 <= offsets[-1]:
        return Declined("slicing does not wrap around from negative to non-negative indices")
    start = frag.text(args[0].slice)
    if base is None:
        end = _render_offset(None, offsets[-1] + 1) or ""
    else:
        end = _render_offset(frag.text(_base_node(args[0].slice)), offsets[-1] + 1)
    value = frag.text(args[0].value, expand=True)
    if isinstance(args[0].value, (ast.BinOp, ast.BoolOp, ast.UnaryOp, ast.IfExp, ast.Lambda, ast.Compare)) and not value.startswith("("):
        value = f"({value})"
    return Accepted(f"*{value}[{start}:{end}]")


def _base_node(index: ast.expr) -> ast.expr:
    if isinstance(index, ast.BinOp):
        return index.right if is_int_literal(index.left) else index.left
    return index


# -- with -------------------------------------------------------------------------


def _with(code: str, ctx: TransformContext) -> Outcome:
    try:
        frag = Fragment(code)
    except SyntaxError:
        return Declined("abstract code does not parse")
    if len(frag.tree.body) != 1:
        return Declined("expected one host statement")
    host = frag.tree.body[0]
    opens = [
        n for n in ast.walk(host)
        if isinstance(n, ast.Call) and isinstance(n.func, ast.Name) and n.func.id == "open"
    ]
    if not opens:
        return Declined("no open() call")
    call = min(opens, key=lambda n: (n.lineno, n.col_offset))
    if getattr(host, "value", None) is call:
        return Declined("open() result is stored directly")
    name = fresh_name("f", _names(code) | set(ctx.reserved))
    call_span = frag.span(call)
    inner = _replace_all(frag, [(call_span, name)])
    unit = ctx.indent_unit
    from .syntax import indent_block

    return Accepted(f"with {frag.slice(call_span.start, call_span.end)} as {name}:\n{unit}{indent_block(inner, unit)}")


# -- f-strings ---------------------------------------------------------------------

_SPEC = re.compile(r"%(?:\((?P<key>[^)]*)\))?(?P<flags>[-#0 +]*)(?P<width>\*|\d+)?(?:\.(?P<prec>\*|\d*))?(?P<length>[hlL])?(?P<conv>.?)")
_CONVERSIONS = {"s": "", "r": "!r", "d": ":d", "f": ":f"}
_PREFIX = re.compile(r"^([A-Za-z]*)('''|\"\"\"|'|\")", re.S)


def _fstring(code: str, ctx: TransformContext) -> Outcome:
    try:
        frag = Fragment(code.strip(), mode="eval")
    except SyntaxError:
        return Declined("abstract code does not parse")
    node = frag.tree.body
    if not (isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mod)):
        return Declined("expected a % expression")
    left = node.left
    if not (isinstance(left, ast.Constant) and type(left.value) is str):
        return Declined("left operand is not a str literal")
    literal = frag.text(left)
    m = _PREFIX.match(literal)
    if m is None or not literal.endswith(m.group(2)) or len(literal) < len(m.group(0)) + len(m.group(2)):
        return Declined("left operand is not a single string literal")
    prefix, quote = m.group(1), m.group(2)
    if any(c in "bBfF" for c in prefix):
        return Declined("unsupported string prefix")
    body = literal[len(m.group(0)) : len(literal) - len(quote)]
    args = node.right.elts if isinstance(node.right, ast.Tuple) else [node.right]
    if isinstance(node.right, ast.Tuple) and not node.right.elts:
        return Declined("empty argument tuple")
    pieces: list[str] = []
    pos = 0
    used = 0
    for spec in _SPEC.finditer(body):
        if spec.group("key") is not None or spec.group("flags") or spec.group("width") or spec.group("prec") is not None or spec.group("length"):
            return Declined("format specifier has flags, width, precision or mapping key")
        conv = spec.group("conv")
        if conv not in _CONVERSIONS:
            return Declined(f"unsupported conversion %{conv}")
        if used >= len(args):
            return Declined("more specifiers than arguments")
        arg = args[used]
        used += 1
        if isinstance(arg, ast.Starred):
            return Declined("starred argument")
        expr = frag.text(arg, expand=True)
        if any(ch in expr for ch in ("\\", "\n", "#")) or quote[0] in expr:
            return Declined("argument cannot be embedded in an f-string")
        if isinstance(arg, (ast.Lambda, ast.NamedExpr)) and not expr.startswith("("):
            expr = f"({expr})"
        if expr.startswith("{"):
            expr = f" {expr}"
        if expr.endswith("}") or expr.endswith("="):
            expr = f"{expr} "
        pieces.append(body[pos : spec.start()].replace("{", "{{").replace("}", "}}"))
        pieces.append("{" + expr + _CONVERSIONS[conv] + "}")
        pos = spec.end()
    if used != len(args):
        return Declined("argument count does not match specifiers")
    pieces.append(body[pos:].replace("{", "{{").replace("}", "}}"))
    new_prefix = "f" + "".join(c for c in prefix if c not in "uU")
    return Accepted(f"{new_prefix}{quote}{''.join(pieces)}{quote}")


TRANSFORMS: dict[IdiomKind, Callable[[str, TransformContext], Outcome]] = {
    I.LIST_COMPREHENSION: _list_comp,
    I.SET_COMPREHENSION: _set_comp,
    I.DICT_COMPREHENSION: _dict_comp,
    I.CHAIN_COMPARISON: _chain,
    I.TRUTH_TEST: _truth,
    I.LOOP_ELSE: _loop_else,
    I.ASSIGN_MULTI_TARGETS: _assign_multi,
    I.FOR_MULTI_TARGETS: _for_multi,
    I.STAR_IN_FUNC_CALL: _star,
    I.WITH: _with,
    I.ENUMERATE: _enumerate,
    I.CHAIN_ASSIGN_SAME_VALUE: _chain_assign,
    I.FSTRING: _fstring,
}


def transform(idiom: IdiomKind, code: str, ctx: Optional[TransformContext] = None) -> Outcome:
    return TRANSFORMS[idiom](code, ctx or TransformContext())
