"""Token-level normalization shared by abstraction, extraction and scoring."""
from __future__ import annotations

import io
import re
import tokenize
from functools import lru_cache

_LAYOUT = {
    tokenize.NEWLINE,
    tokenize.NL,
    tokenize.COMMENT,
    tokenize.INDENT,
    tokenize.DEDENT,
    tokenize.ENDMARKER,
}
_FALLBACK = re.compile(r"\w+|\S")


@lru_cache(maxsize=4096)
def token_strings(text: str) -> tuple[str, ...]:
    """Significant token strings of a fragment, layout and comments dropped."""
    try:
        toks = tokenize.generate_tokens(io.StringIO(text.strip() + "\n").readline)
        return tuple(t.string for t in toks if t.type not in _LAYOUT)
    except (tokenize.TokenError, IndentationError, SyntaxError):
        return tuple(_FALLBACK.findall(text))


def normalize(text: str) -> str:
    """Whitespace-insensitive canonical form: tokens joined by single spaces."""
    return " ".join(token_strings(text))


def same_code(a: str, b: str) -> bool:
    return token_strings(a) == token_strings(b)


def contains_code(haystack: str, needle: str) -> bool:
    """Whether ``needle``'s token sequence occurs contiguously in ``haystack``'s."""
    h, n = token_strings(haystack), token_strings(needle)
    if not n:
        return True
    first = n[0]
    for i in range(len(h) - len(n) + 1):
        if h[i] == first and h[i : i + len(n)] == n:
            return True
    return False
