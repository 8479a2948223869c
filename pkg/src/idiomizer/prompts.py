"""Prompt templates sent to a remote model, one per idiom."""
from __future__ import annotations

from dataclasses import dataclass

from .knowledge import IdiomKind

I = IdiomKind


@dataclass(frozen=True)
class PromptTemplate:
    idiom: IdiomKind
    instruction: str
    examples: tuple[tuple[str, str], ...] = ()
    verbatim: bool = False

    def render(self) -> str:
        parts = [self.instruction]
        for before, after in self.examples:
            parts.append(f"Example input:\n```python\n{before}\n```\nExample output:\n```python\n{after}\n```")
        return "\n\n".join(parts)


REPLY_FORMAT = (
    "Answer on the first line with Yes if the code can be refactored or No if it cannot. "
    "After Yes, give the refactored code in one ```python fenced block."
)

ABSTRACTION_PROMPT = (
    "Use a symbol v to simplify each comparison operand within the following Python code. "
    "The same comparison operand is represented by the same symbol."
)

_LIBRARY = {
    I.CHAIN_COMPARISON: PromptTemplate(
        I.CHAIN_COMPARISON,
        "Reverse compare operands of the first comparison operation, the second comparison, "
        'or the first and the second comparison operations so that "v2 and v2" is in the new '
        "Python code, and then simplify it",
        (("v1 > v2 and v3 == v2", "v1 > v2 == v3"),),
        verbatim=True,
    ),
    I.LIST_COMPREHENSION: PromptTemplate(
        I.LIST_COMPREHENSION,
        "Rewrite the empty-list initialization and the loop that appends to it as one list comprehension. "
        "Turn each 'if C: continue' into a condition on the comprehension.",
        (("xs = []\nfor a in b:\n    xs.append(a + 1)", "xs = [a + 1 for a in b]"),),
    ),
    I.SET_COMPREHENSION: PromptTemplate(
        I.SET_COMPREHENSION,
        "Rewrite the empty-set initialization and the loop that adds to it as one set comprehension. "
        "Turn each 'if C: continue' into a condition on the comprehension.",
        (("s = set()\nfor a in b:\n    s.add(a)", "s = {a for a in b}"),),
    ),
    I.DICT_COMPREHENSION: PromptTemplate(
        I.DICT_COMPREHENSION,
        "Rewrite the empty-dict initialization and the loop that stores into it as one dict comprehension.",
        (("d = {}\nfor k in ks:\n    d[k] = f(k)", "d = {k: f(k) for k in ks}"),),
    ),
    I.TRUTH_TEST: PromptTemplate(
        I.TRUTH_TEST,
        "Replace the comparison against an empty or zero value with a direct truth test of the other operand.",
        (("n % 2 == 0", "not n % 2"),),
    ),
    I.LOOP_ELSE: PromptTemplate(
        I.LOOP_ELSE,
        "The if statement after the loop checks whether the loop ended without break. "
        "Move its body into an else clause of the loop.",
    ),
    I.ASSIGN_MULTI_TARGETS: PromptTemplate(
        I.ASSIGN_MULTI_TARGETS,
        "Merge the consecutive assignments into one assignment with multiple targets.",
        (("a = 1\nb = 2", "a, b = 1, 2"),),
    ),
    I.FOR_MULTI_TARGETS: PromptTemplate(
        I.FOR_MULTI_TARGETS,
        "Unpack the loop variable v in the for header so the body uses names instead of v[0], v[1] and so on.",
        (("for v in rows:\n    print(v[0])", "for e0, *e in rows:\n    print(e0)"),),
    ),
    I.STAR_IN_FUNC_CALL: PromptTemplate(
        I.STAR_IN_FUNC_CALL,
        "Replace the consecutive subscripts of v with one starred slice of v.",
        (("v[0], v[1]", "*v[0:2]"),),
    ),
    I.WITH: PromptTemplate(
        I.WITH,
        "Open the file in a with statement so it is closed automatically.",
        (("data = read(open(p))", "with open(p) as f:\n    data = read(f)"),),
    ),
    I.ENUMERATE: PromptTemplate(
        I.ENUMERATE,
        "Iterate with enumerate(v) instead of range(len(v)).",
        (("for i in range(len(v)):\n    print(i, v[i])", "for (i, elem) in enumerate(v):\n    print(i, elem)"),),
    ),
    I.CHAIN_ASSIGN_SAME_VALUE: PromptTemplate(
        I.CHAIN_ASSIGN_SAME_VALUE,
        "Merge the consecutive assignments of the same value into one chained assignment.",
        (("a = None\nb = None", "a = b = None"),),
    ),
    I.FSTRING: PromptTemplate(
        I.FSTRING,
        "Convert the %-formatting expression into an f-string.",
        (("'n is %s' % n", "f'n is {n}'"),),
    ),
}


def prompt_for(idiom: IdiomKind) -> PromptTemplate:
    return _LIBRARY[idiom]


def library() -> dict[IdiomKind, PromptTemplate]:
    return dict(_LIBRARY)


def user_message(prompt: str, abstract_code: str) -> str:
    return f"{prompt}\n\n{REPLY_FORMAT}\n\nCode:\n```python\n{abstract_code}\n```"
