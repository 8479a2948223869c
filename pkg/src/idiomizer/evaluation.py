"""Benchmark scoring: align produced code pairs with gold pairs and compute metrics."""
from __future__ import annotations

import ast
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .knowledge import IdiomKind, catalog
from .rewriting import run_pass
from .syntax import SourceFile
from .tokens import contains_code, same_code


class FormatError(ValueError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class CodePair:
    non_idiomatic: str
    idiomatic: str


@dataclass(frozen=True)
class BenchmarkEntry:
    method_source: str
    idiom: IdiomKind
    gold_pairs: tuple[CodePair, ...]

    def to_json(self) -> dict:
        return {
            "method_source": self.method_source,
            "idiom": self.idiom.value,
            "gold_pairs": [{"non_idiomatic": p.non_idiomatic, "idiomatic": p.idiomatic} for p in self.gold_pairs],
        }


def _entry(record: object, line: int) -> BenchmarkEntry:
    if not isinstance(record, dict):
        raise FormatError(line, "entry must be a JSON object")
    try:
        source, idiom_name, pairs = record["method_source"], record["idiom"], record["gold_pairs"]
    except KeyError as exc:
        raise FormatError(line, f"missing field {exc.args[0]!r}") from None
    if not isinstance(source, str) or not isinstance(pairs, list):
        raise FormatError(line, "method_source must be a string and gold_pairs a list")
    try:
        idiom = IdiomKind.parse(idiom_name)
    except (ValueError, AttributeError, TypeError):
        raise FormatError(line, f"unknown idiom {idiom_name!r}") from None
    try:
        ast.parse(source)
    except SyntaxError as exc:
        raise FormatError(line, f"method_source does not parse ({exc.msg})") from None
    gold = []
    for pair in pairs:
        if not isinstance(pair, dict) or not {"non_idiomatic", "idiomatic"} <= pair.keys():
            raise FormatError(line, "each gold pair needs non_idiomatic and idiomatic")
        if not contains_code(source, pair["non_idiomatic"]):
            raise FormatError(line, "gold non_idiomatic code does not occur in method_source")
        gold.append(CodePair(pair["non_idiomatic"], pair["idiomatic"]))
    return BenchmarkEntry(source, idiom, tuple(gold))


def load_benchmark(path: Union[str, Path]) -> list[BenchmarkEntry]:
    entries = []
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(number, f"invalid JSON ({exc.msg})") from None
        entries.append(_entry(record, number))
    return entries


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    near_misses: int = field(default=0, compare=False)

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.near_misses + other.near_misses
        )


def match_pairs(produced: Sequence[CodePair], gold: Sequence[CodePair]) -> ConfusionCounts:
    """Greedy one-to-one matching on token-normalized equality of both sides."""
    free = list(gold)
    unmatched = []
    tp = 0
    for pair in produced:
        for i, g in enumerate(free):
            if same_code(pair.non_idiomatic, g.non_idiomatic) and same_code(pair.idiomatic, g.idiomatic):
                del free[i]
                tp += 1
                break
        else:
            unmatched.append(pair)
    # right location, different rewrite: still FP + FN, but counted apart for the report
    near = 0
    spare = list(free)
    for pair in unmatched:
        for i, g in enumerate(spare):
            if same_code(pair.non_idiomatic, g.non_idiomatic):
                del spare[i]
                near += 1
                break
    return ConfusionCounts(tp, len(produced) - tp, len(gold) - tp, near)


@dataclass(frozen=True)
class Metrics:
    accuracy: Fraction
    precision: Fraction
    recall: Fraction
    f1: Fraction

    def rounded(self, digits: int = 4) -> dict[str, float]:
        return {k: round(float(getattr(self, k)), digits) for k in ("accuracy", "precision", "recall", "f1")}


def _ratio(num: int | Fraction, den: int | Fraction) -> Fraction:
    return Fraction(0) if den == 0 else Fraction(num) / Fraction(den)


def compute_metrics(counts: ConfusionCounts) -> Metrics:
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    return Metrics(
        accuracy=_ratio(tp, tp + fp + fn),
        precision=precision,
        recall=recall,
        f1=_ratio(2 * precision * recall, precision + recall),
    )


@dataclass
class MetricsReport:
    rows: dict[IdiomKind, ConfusionCounts]

    @property
    def total(self) -> ConfusionCounts:
        out = ConfusionCounts()
        for counts in self.rows.values():
            out = out + counts
        return out

    @staticmethod
    def _row(counts: ConfusionCounts) -> dict:
        row = {"tp": counts.tp, "fp": counts.fp, "fn": counts.fn}
        row.update(compute_metrics(counts).rounded())
        row["near_misses"] = counts.near_misses
        return row

    def to_json(self) -> dict:
        out = {kind.value: self._row(self.rows[kind]) for kind in (s.kind for s in catalog()) if kind in self.rows}
        out["total"] = self._row(self.total)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def produced_pairs(entry: BenchmarkEntry, engine, index: int = 0) -> list[CodePair]:
    file = SourceFile.from_text(entry.method_source, f"<entry {index}>")
    result = run_pass(file, engine, [entry.idiom])
    return [CodePair(c.non_idiomatic, c.idiomatic) for c in result.candidates]


def evaluate(entries: Iterable[BenchmarkEntry], engine, jobs: Optional[int] = None) -> MetricsReport:
    entries = list(entries)

    def score(item: tuple[int, BenchmarkEntry]) -> tuple[IdiomKind, ConfusionCounts]:
        i, entry = item
        return entry.idiom, match_pairs(produced_pairs(entry, engine, i), entry.gold_pairs)

    with ThreadPoolExecutor(max_workers=jobs or 1) as pool:
        scored = list(pool.map(score, enumerate(entries)))
    rows: dict[IdiomKind, ConfusionCounts] = {}
    for kind, counts in scored:
        rows[kind] = rows.get(kind, ConfusionCounts()) + counts
    return MetricsReport(rows)
