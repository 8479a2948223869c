"""Replace idiom-irrelevant expressions with symbols, and put them back."""
from __future__ import annotations

import io
import re
import tokenize
from dataclasses import dataclass
from typing import Iterable, Sequence

from .knowledge import AbstractionMode
from .syntax import Span, splice
from .tokens import normalize


class ObjectNotFound(ValueError):
    pass


class UnboundSymbol(KeyError):
    pass


@dataclass(frozen=True)
class AbstractionResult:
    abstract_code: str
    bindings: tuple[tuple[str, str], ...]
    mode: AbstractionMode

    @property
    def symbols(self) -> dict[str, str]:
        return dict(self.bindings)


_PREFIXES = ("v", "vv", "v_", "sym")


def _name_tokens(text: str) -> set[str]:
    try:
        return {t.string for t in tokenize.generate_tokens(io.StringIO(text).readline) if t.type == tokenize.NAME}
    except (tokenize.TokenError, IndentationError, SyntaxError):
        return set(re.findall(r"[A-Za-z_]\w*", text))


def symbol_prefix(text: str) -> str:
    """First symbol stem whose numbered forms never occur as names in ``text``."""
    names = _name_tokens(text)
    for prefix in _PREFIXES:
        pattern = re.compile(rf"{re.escape(prefix)}\d*")
        if not any(pattern.fullmatch(n) for n in names):
            return prefix
    raise RuntimeError("no free symbol prefix")  # pragma: no cover


def _operand_key(text: str) -> str:
    key = normalize(text)
    while key.startswith("( ") and key.endswith(" )") and _balanced(key[2:-2]):
        key = key[2:-2]
    return key


def _balanced(key: str) -> bool:
    depth = 0
    for tok in key.split(" "):
        if tok in "([{":
            depth += 1
        elif tok in ")]}":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def abstract_operands(component_text: str, operand_spans: Sequence[Span]) -> AbstractionResult:
    """Give every operand a symbol ``v1, v2, ...``; equal operands share one."""
    data = component_text.encode("utf-8")
    prefix = symbol_prefix(component_text)
    symbol_of: dict[str, str] = {}
    bindings: list[tuple[str, str]] = []
    edits = []
    for span in sorted(operand_spans, key=lambda s: s.start):
        text = data[span.start : span.end].decode("utf-8")
        key = _operand_key(text)
        if key not in symbol_of:
            symbol_of[key] = f"{prefix}{len(symbol_of) + 1}"
            bindings.append((symbol_of[key], text))
        edits.append((span, symbol_of[key]))
    return AbstractionResult(splice(component_text, edits), tuple(bindings), AbstractionMode.OPERAND_MAPPING)


def _token_offsets(text: str) -> list[tuple[int, int, str, int]]:
    """(start, end, string, type) in character offsets for each token of ``text``."""
    starts = [0]
    for line in text.splitlines(keepends=True):
        starts.append(starts[-1] + len(line))
    out = []
    for tok in tokenize.generate_tokens(io.StringIO(text).readline):
        if tok.type in (tokenize.ENDMARKER, tokenize.DEDENT, tokenize.INDENT, tokenize.NEWLINE, tokenize.NL):
            continue
        (sr, sc), (er, ec) = tok.start, tok.end
        out.append((starts[sr - 1] + sc, starts[er - 1] + ec, tok.string, tok.type))
    return out


def abstract_specified(component_text: str, object_text: str) -> AbstractionResult:
    """Replace every whole-token occurrence of ``object_text`` with one symbol."""
    symbol = symbol_prefix(component_text)
    toks = _token_offsets(component_text)
    target = [t for t in _token_offsets(object_text)]
    want = [t[2] for t in target]
    n = len(want)
    hits = []
    i = 0
    while n and i <= len(toks) - n:
        window = [t[2] for t in toks[i : i + n]]
        after_dot = i > 0 and toks[i - 1][2] == "." and toks[i - 1][1] == toks[i][0]
        if window == want and not after_dot:
            hits.append((toks[i][0], toks[i + n - 1][1]))
            i += n
        else:
            i += 1
    if not hits:
        raise ObjectNotFound(object_text)
    out = component_text
    for start, end in reversed(hits):
        out = out[:start] + symbol + out[end:]
    return AbstractionResult(out, ((symbol, object_text),), AbstractionMode.SPECIFIED_OBJECT)


def no_abstraction(component_text: str) -> AbstractionResult:
    return AbstractionResult(component_text, (), AbstractionMode.NO_ABSTRACTION)


def restore(abstract_code: str, bindings: Iterable[tuple[str, str]] | dict[str, str]) -> str:
    """Substitute symbols back by whole name tokens; strings and attributes are untouched."""
    table = dict(bindings.items() if isinstance(bindings, dict) else bindings)
    if not table:
        return abstract_code
    stems = {re.sub(r"\d+$", "", s) for s in table}
    numbered = re.compile("|".join(rf"{re.escape(s)}\d+" for s in stems))
    try:
        toks = _token_offsets(abstract_code)
    except (tokenize.TokenError, IndentationError, SyntaxError):
        toks = [
            (m.start(), m.end(), m.group(), tokenize.NAME)
            for m in re.finditer(r"(?<![\w.])[A-Za-z_]\w*", abstract_code)
        ]
    out = abstract_code
    for start, end, string, kind in reversed(toks):
        if kind != tokenize.NAME:
            continue
        if start > 0 and abstract_code[start - 1] == "." and string not in table:
            continue
        if string in table:
            if start > 0 and abstract_code[start - 1] == ".":
                continue
            out = out[:start] + table[string] + out[end:]
        elif numbered.fullmatch(string) and string not in table:
            raise UnboundSymbol(string)
    return out
