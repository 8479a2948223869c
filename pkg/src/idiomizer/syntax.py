"""Minimal node model over the stdlib ``ast`` parser with byte-accurate spans.

Spans are byte offsets into the UTF-8 encoding of the source, so that
rewriting can splice raw text without disturbing anything it did not touch.
"""
from __future__ import annotations

import ast
import enum
import io
import keyword
import tokenize
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Optional, Sequence, Union


class OverlappingEdits(ValueError):
    pass


class SourceDecodeError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Span:
    start: int
    end: int

    def __post_init__(self) -> None:
        if not 0 <= self.start <= self.end:
            raise ValueError(f"invalid span {self.start}..{self.end}")

    def __len__(self) -> int:
        return self.end - self.start

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "Span") -> bool:
        if len(self) == 0 or len(other) == 0:
            return self.start < other.end and other.start < self.end
        return self.start < other.end and other.start < self.end

    def hull(self, other: "Span") -> "Span":
        return Span(min(self.start, other.start), max(self.end, other.end))


class NodeKind(enum.Enum):
    MODULE = "Module"
    FOR = "For"
    WHILE = "While"
    IF = "If"
    ASSIGN = "Assign"
    COMPARE = "Compare"
    BOOLOP = "BoolOp"
    BINOP = "BinOp"
    CALL = "Call"
    SUBSCRIPT = "Subscript"
    EXPR = "Expr"
    BREAK = "Break"
    CONTINUE = "Continue"
    RETURN = "Return"
    WITH = "With"
    NAME = "Name"
    CONSTANT = "Constant"
    ATTRIBUTE = "Attribute"
    OTHER = "Other"


_KIND_OF = {
    ast.Module: NodeKind.MODULE,
    ast.For: NodeKind.FOR,
    ast.While: NodeKind.WHILE,
    ast.If: NodeKind.IF,
    ast.Assign: NodeKind.ASSIGN,
    ast.Compare: NodeKind.COMPARE,
    ast.BoolOp: NodeKind.BOOLOP,
    ast.BinOp: NodeKind.BINOP,
    ast.Call: NodeKind.CALL,
    ast.Subscript: NodeKind.SUBSCRIPT,
    ast.Expr: NodeKind.EXPR,
    ast.Break: NodeKind.BREAK,
    ast.Continue: NodeKind.CONTINUE,
    ast.Return: NodeKind.RETURN,
    ast.With: NodeKind.WITH,
    ast.Name: NodeKind.NAME,
    ast.Constant: NodeKind.CONSTANT,
    ast.Attribute: NodeKind.ATTRIBUTE,
}

CMPOP_TOKENS = {
    ast.Eq: "==",
    ast.NotEq: "!=",
    ast.Lt: "<",
    ast.LtE: "<=",
    ast.Gt: ">",
    ast.GtE: ">=",
    ast.Is: "is",
    ast.IsNot: "is not",
    ast.In: "in",
    ast.NotIn: "not in",
}

BINOP_TOKENS = {
    ast.Add: "+",
    ast.Sub: "-",
    ast.Mult: "*",
    ast.MatMult: "@",
    ast.Div: "/",
    ast.Mod: "%",
    ast.Pow: "**",
    ast.LShift: "<<",
    ast.RShift: ">>",
    ast.BitOr: "|",
    ast.BitXor: "^",
    ast.BitAnd: "&",
    ast.FloorDiv: "//",
}


@dataclass(frozen=True, eq=False)
class Node:
    """One syntax node: a kind, its span and the projected children.

    ``ast`` is the underlying stdlib node; analyses that need the full
    grammar reach through it, everything positional goes through ``span``.
    """

    kind: NodeKind
    span: Span
    children: tuple["Node", ...] = ()
    attrs: Mapping[str, object] = field(default_factory=dict)
    ast: ast.AST | None = field(default=None, repr=False)

    def walk(self) -> Iterator["Node"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass(frozen=True)
class SourceFile:
    path: Path
    text: str
    data: bytes = field(repr=False, default=b"")
    newline_index: tuple[int, ...] = field(repr=False, default=())

    @classmethod
    def from_text(cls, text: str, path: Union[str, Path] = "<string>") -> "SourceFile":
        data = text.encode("utf-8")
        return cls(Path(path), text, data, line_starts(data))

    @classmethod
    def read(cls, path: Union[str, Path]) -> "SourceFile":
        raw = Path(path).read_bytes()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SourceDecodeError(f"{path}: not valid UTF-8 ({exc.reason} at byte {exc.start})") from exc
        return cls(Path(path), text, raw, line_starts(raw))

    def slice(self, span: Span) -> str:
        return self.data[span.start : span.end].decode("utf-8")

    def offset(self, lineno: int, col: int) -> int:
        return self.newline_index[lineno - 1] + col

    def position(self, offset: int) -> tuple[int, int]:
        """1-based line and 0-based character column of a byte offset."""
        line = bisect_right(self.newline_index, offset) - 1
        col = len(self.data[self.newline_index[line] : offset].decode("utf-8", "replace"))
        return line + 1, col

    def line_indent(self, offset: int) -> str:
        line = bisect_right(self.newline_index, offset) - 1
        start = self.newline_index[line]
        raw = self.data[start:offset].decode("utf-8")
        return raw[: len(raw) - len(raw.lstrip(" \t"))]


def line_starts(data: bytes) -> tuple[int, ...]:
    starts = [0]
    i, n = 0, len(data)
    while i < n:
        c = data[i]
        if c == 0x0A:
            starts.append(i + 1)
        elif c == 0x0D:
            if i + 1 < n and data[i + 1] == 0x0A:
                i += 1
            starts.append(i + 1)
        i += 1
    return tuple(starts)


def parse_source(text: Union[str, SourceFile]) -> Node:
    """Parse Python 3 source into the node facade.

    Raises ``SyntaxError`` for anything the stdlib parser rejects.
    """
    source = text if isinstance(text, SourceFile) else SourceFile.from_text(text)
    tree = ast.parse(source.text, filename=str(source.path), type_comments=False)
    return _project(tree, source)


def _span_of(node: ast.AST, source: SourceFile) -> Span:
    start = source.offset(node.lineno, node.col_offset)
    end = source.offset(node.end_lineno, node.end_col_offset)
    return Span(start, end)


def _positioned_children(node: ast.AST) -> Iterator[ast.AST]:
    for child in ast.iter_child_nodes(node):
        if getattr(child, "end_lineno", None) is not None:
            yield child
        else:
            # comprehension, arguments, withitem, match_case: lift their children
            yield from _positioned_children(child)


def _project(node: ast.AST, source: SourceFile, span: Span | None = None) -> Node:
    if span is None:
        span = Span(0, len(source.data)) if isinstance(node, ast.Module) else _span_of(node, source)
    children = tuple(_project(c, source) for c in _positioned_children(node))
    return Node(
        kind=_KIND_OF.get(type(node), NodeKind.OTHER),
        span=span,
        children=children,
        attrs=_attrs(node, source),
        ast=node,
    )


def _attrs(node: ast.AST, source: SourceFile) -> dict[str, object]:
    if isinstance(node, ast.Module):
        return {"source": source}
    if isinstance(node, ast.Compare):
        return {
            "operands": tuple(_span_of(e, source) for e in [node.left, *node.comparators]),
            "ops": tuple(CMPOP_TOKENS[type(op)] for op in node.ops),
        }
    if isinstance(node, ast.BoolOp):
        return {"op": "and" if isinstance(node.op, ast.And) else "or"}
    if isinstance(node, ast.BinOp):
        return {"op": BINOP_TOKENS[type(node.op)]}
    if isinstance(node, ast.Call):
        return {
            "callee": _span_of(node.func, source),
            "args": tuple(_span_of(a, source) for a in node.args),
        }
    if isinstance(node, ast.Name):
        return {"id": node.id}
    if isinstance(node, ast.Attribute):
        return {"attr": node.attr}
    return {}


def node_text(node: Node, file: SourceFile) -> str:
    return file.slice(node.span)


def source_of(root: Node) -> SourceFile:
    return root.attrs["source"]


Edit = tuple[Span, str]


def splice(text: Union[str, bytes], edits: Sequence[Edit]) -> Union[str, bytes]:
    """Apply span replacements; spans are UTF-8 byte offsets into ``text``."""
    data = text.encode("utf-8") if isinstance(text, str) else text
    ordered = sorted(edits, key=lambda e: (e[0].start, e[0].end))
    for (a, _), (b, _) in zip(ordered, ordered[1:]):
        if a.overlaps(b) or (a.start == b.start and a.end == b.end and len(a) == 0):
            raise OverlappingEdits(f"edits {a.start}..{a.end} and {b.start}..{b.end} intersect")
    for span, _ in ordered:
        if span.end > len(data):
            raise ValueError(f"span {span.start}..{span.end} beyond end of text ({len(data)})")
    out = data
    for span, repl in reversed(ordered):
        out = out[: span.start] + repl.encode("utf-8") + out[span.end :]
    return out.decode("utf-8") if isinstance(text, str) else out


def string_line_numbers(text: str) -> set[int]:
    """Line numbers (1-based) that begin inside a multi-line string token."""
    inside: set[int] = set()
    try:
        for tok in tokenize.generate_tokens(io.StringIO(text).readline):
            if tok.type == tokenize.STRING and tok.end[0] > tok.start[0]:
                inside.update(range(tok.start[0] + 1, tok.end[0] + 1))
    except (tokenize.TokenError, IndentationError, SyntaxError):
        pass
    return inside


def dedent_block(text: str, indent: str) -> str:
    """Strip ``indent`` from every line after the first, leaving string bodies alone."""
    if not indent:
        return text
    skip = string_line_numbers(text)
    lines = text.splitlines(keepends=True)
    out = [lines[0]] if lines else []
    for number, line in enumerate(lines[1:], start=2):
        if number not in skip and line.startswith(indent):
            line = line[len(indent) :]
        out.append(line)
    return "".join(out)


def indent_block(text: str, indent: str) -> str:
    """Prefix ``indent`` to every non-blank line after the first."""
    if not indent:
        return text
    skip = string_line_numbers(text)
    lines = text.splitlines(keepends=True)
    out = [lines[0]] if lines else []
    for number, line in enumerate(lines[1:], start=2):
        if number not in skip and line.strip():
            line = indent + line
        out.append(line)
    return "".join(out)


def indent_unit(text: str) -> str:
    """The indentation step a file uses: its first indented line, or four spaces."""
    for line in text.splitlines():
        stripped = line.lstrip(" \t")
        if stripped and stripped[0] != "#" and len(stripped) < len(line):
            prefix = line[: len(line) - len(stripped)]
            return "\t" if "\t" in prefix else prefix
    return "    "


class TreeIndex:
    """Parent links and statement-suite positions for one parsed tree."""

    def __init__(self, root: Node) -> None:
        self.root = root
        self._node_of: dict[int, Node] = {}
        self._parent: dict[int, ast.AST] = {}
        self._suite: dict[int, tuple[list, int]] = {}
        for node in root.walk():
            if node.ast is not None:
                self._node_of[id(node.ast)] = node
        tree = root.ast
        for parent in ast.walk(tree):
            for name, value in ast.iter_fields(parent):
                if isinstance(value, list):
                    for i, child in enumerate(value):
                        if isinstance(child, ast.AST):
                            self._parent[id(child)] = parent
                            if isinstance(child, ast.stmt):
                                self._suite[id(child)] = (value, i)
                elif isinstance(value, ast.AST):
                    self._parent[id(value)] = parent

    def node(self, tree_node: ast.AST) -> Node:
        return self._node_of[id(tree_node)]

    def parent(self, tree_node: ast.AST) -> Optional[ast.AST]:
        return self._parent.get(id(tree_node))

    def ancestors(self, tree_node: ast.AST) -> Iterator[ast.AST]:
        current = self.parent(tree_node)
        while current is not None:
            yield current
            current = self.parent(current)

    def statement_of(self, tree_node: ast.AST) -> Optional[ast.stmt]:
        if isinstance(tree_node, ast.stmt):
            return tree_node
        for anc in self.ancestors(tree_node):
            if isinstance(anc, ast.stmt):
                return anc
        return None

    def siblings(self, stmt: ast.stmt) -> tuple[list, int]:
        return self._suite[id(stmt)]

    def previous_statement(self, stmt: ast.stmt) -> Optional[ast.stmt]:
        suite, i = self._suite[id(stmt)]
        return suite[i - 1] if i > 0 else None

    def next_statement(self, stmt: ast.stmt) -> Optional[ast.stmt]:
        suite, i = self._suite[id(stmt)]
        return suite[i + 1] if i + 1 < len(suite) else None

    def suites(self) -> Iterator[list]:
        seen: set[int] = set()
        for suite, _ in self._suite.values():
            if id(suite) not in seen:
                seen.add(id(suite))
                yield suite


def _opens_call(data: bytes, paren: int) -> bool:
    """True when the ``(`` at ``paren`` belongs to a call rather than grouping."""
    k = paren - 1
    while k >= 0 and data[k] in b" \t":
        k -= 1
    if k < 0:
        return False
    if data[k] in b")]":
        return True
    end = k + 1
    while k >= 0 and (chr(data[k]).isalnum() or data[k] == 0x5F or data[k] >= 0x80):
        k -= 1
    word = data[k + 1 : end].decode("utf-8", "replace")
    return bool(word) and not keyword.iskeyword(word)


def expand_parens(span: Span, data: bytes) -> Span:
    """Grow ``span`` over parentheses that wrap exactly it."""
    start, end = span.start, span.end
    while True:
        i = start - 1
        while i >= 0 and data[i] in b" \t\r\n\\":
            i -= 1
        j = end
        while j < len(data) and data[j] in b" \t\r\n\\":
            j += 1
        if i >= 0 and j < len(data) and data[i] == 0x28 and data[j] == 0x29 and not _opens_call(data, i):
            start, end = i, j + 1
        else:
            return Span(start, end)
