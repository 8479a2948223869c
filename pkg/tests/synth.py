"""Synthetic source files with idiom templates planted among idiom-free filler."""
from __future__ import annotations

import random
from dataclasses import dataclass

from idiomizer.knowledge import IdiomKind

I = IdiomKind

TEMPLATES = {
    I.LIST_COMPREHENSION: "new_cols{s} = []\nfor col in old_cols{s}:\n    new_cols{s}.append(col + postfix{s})",
    I.SET_COMPREHENSION: "new_cols{s} = set()\nfor col in old_cols{s}:\n    new_cols{s}.add(col + postfix{s})",
    I.DICT_COMPREHENSION: "new_cols{s} = {{}}\nfor col in old_cols{s}:\n    new_cols{s}[col] = col + postfix{s}",
    I.CHAIN_COMPARISON: "if a{s} > b{s} and a{s} < 1:\n    pass",
    I.TRUTH_TEST: "if embedding_dim{s} % 2 == 0:\n    pass",
    I.LOOP_ELSE: "while attempt{s} < 3:\n    ...\n    if body{s} is not None:\n        break\nif body{s} is None:\n    ...",
    I.ASSIGN_MULTI_TARGETS: "self{s}._ad = device{s}\nself{s}._sl4a_client = None",
    I.FOR_MULTI_TARGETS: "for sample in family{s}.samples:\n    if sample[0] > 2:\n        ...",
    I.STAR_IN_FUNC_CALL: "nn.Linear(gate_channels{s}[i], gate_channels{s}[i+1])",
    I.WITH: "bamfiles{s} = [x.strip() for x in open(bamfile{s})]",
    I.ENUMERATE: "for i in range(len(text{s})):\n    w = text{s}[i]\n    if w in token2id{s}:\n        R{s}[i] = token2id{s}[w]",
    I.CHAIN_ASSIGN_SAME_VALUE: "global_draw_name{s} = None\n_test_name{s} = None",
    I.FSTRING: "log.info('sample_num_list is %s' % repr(self.sample_num_list{s}))",
}

_FILLERS = (
    "log_{n}(item_{n})",
    "if flag_{n}:\n    run_{n}(item_{n})",
    "def helper_{n}(x):\n    return x + {n}",
    "for row_{n} in table_{n}:\n    emit_{n}(row_{n})",
    "total_{n} += weight_{n}",
    "print('step', {n})",
)


@dataclass(frozen=True)
class Plant:
    idiom: IdiomKind
    first_line: int
    last_line: int


def _indent(block: str, prefix: str) -> str:
    return "\n".join(prefix + line if line else line for line in block.split("\n"))


def generate(rng: random.Random, idioms: list[IdiomKind], lines: int = 200) -> tuple[str, list[Plant]]:
    """A file of at least ``lines`` lines containing one plant per entry of ``idioms``."""
    chunks: list[tuple[str, IdiomKind | None]] = []
    counter = 0

    def filler() -> str:
        nonlocal counter
        counter += 1
        return rng.choice(_FILLERS).format(n=counter)

    planned = list(idioms)
    rng.shuffle(planned)
    budget = max(lines - sum(TEMPLATES[k].count("\n") + 3 for k in planned), len(planned) + 1)
    gaps = [1] * (len(planned) + 1)
    for _ in range(budget - len(gaps)):
        gaps[rng.randrange(len(gaps))] += 1
    for k, idiom in enumerate(planned):
        for _ in range(gaps[k]):
            chunks.append((filler(), None))
        body = TEMPLATES[idiom].format(s=f"_p{k}")
        if rng.random() < 0.5:
            body = f"def holder_{k}():\n{_indent(body, '    ')}\n    log_end_{k}()"
        chunks.append((body, idiom))
    for _ in range(gaps[-1]):
        chunks.append((filler(), None))

    text_lines: list[str] = []
    plants: list[Plant] = []
    for body, idiom in chunks:
        start = len(text_lines) + 1
        text_lines.extend(body.split("\n"))
        if idiom is not None:
            plants.append(Plant(idiom, start, len(text_lines)))
    while len(text_lines) < lines:
        text_lines.append(filler())
        text_lines[:] = "\n".join(text_lines).split("\n")
    return "\n".join(text_lines) + "\n", plants
