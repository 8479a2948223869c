"""Turn accepted outcomes into source edits, candidates and diffs."""
from __future__ import annotations

import ast
import difflib
import logging
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .abstraction import AbstractionResult, abstract_operands, abstract_specified, no_abstraction, restore
from .extraction import MatchSite, find_sites, open_host, tree_index
from .knowledge import AbstractionMode, IdiomKind, catalog_index, spec_for
from .outcomes import Accepted, Declined
from .syntax import (
    Node,
    OverlappingEdits,
    SourceFile,
    Span,
    dedent_block,
    expand_parens,
    indent_block,
    indent_unit,
    parse_source,
    splice,
)
from .transforms import TransformContext

log = logging.getLogger(__name__)
I = IdiomKind

LOOP_ELSE_CAVEAT = "semantic caveat: the else clause also runs when the loop body executes zero times"
COMPREHENSIONS = (I.LIST_COMPREHENSION, I.SET_COMPREHENSION, I.DICT_COMPREHENSION)
_STATEMENT_RUNS = COMPREHENSIONS + (I.LOOP_ELSE, I.ASSIGN_MULTI_TARGETS, I.CHAIN_ASSIGN_SAME_VALUE)


class ResultUnparseable(ValueError):
    pass


@dataclass(frozen=True)
class SitePlan:
    """Everything needed to send one site to an engine and splice the answer back."""

    site: MatchSite
    region: Span
    component_text: str
    indent: str
    abstraction: AbstractionResult
    context: TransformContext
    leading_comments: tuple[str, ...] = ()
    delete: Optional[Span] = None
    statement_level: bool = False


@dataclass(frozen=True)
class RefactoringCandidate:
    site: MatchSite
    non_idiomatic: str
    idiomatic: str
    edits: tuple[tuple[Span, str], ...]
    diff: str
    new_source: str
    abstraction: AbstractionResult = field(repr=False, default=None)
    note: Optional[str] = None

    @property
    def idiom(self) -> IdiomKind:
        return self.site.idiom

    @property
    def span(self) -> Span:
        spans = [s for s, _ in self.edits]
        out = spans[0]
        for s in spans[1:]:
            out = out.hull(s)
        return out

    def to_json(self) -> dict:
        record = {
            "site_id": self.site.site_id,
            "idiom": self.idiom.value,
            "path": str(self.site.file.path),
            "line": self.site.file.position(self.span.start)[0],
            "non_idiomatic": self.non_idiomatic,
            "idiomatic": self.idiomatic,
            "abstraction": {
                "abstract_code": self.abstraction.abstract_code,
                "bindings": dict(self.abstraction.bindings),
                "mode": self.abstraction.mode.value,
            }
            if self.abstraction is not None
            else None,
            "diff": self.diff,
        }
        if self.note:
            record["note"] = self.note
        return record


def unified_diff(before: str, after: str, path: str | Path) -> str:
    if before == after:
        return ""
    a = before.replace("\r\n", "\n").replace("\r", "\n").splitlines(keepends=True)
    b = after.replace("\r\n", "\n").replace("\r", "\n").splitlines(keepends=True)
    lines = []
    for line in difflib.unified_diff(a, b, f"a/{path}", f"b/{path}", n=3):
        lines.append(line if line.endswith("\n") else line + "\n\\ No newline at end of file\n")
    return "".join(lines)


# -- planning -----------------------------------------------------------------


def _lf(text: str) -> str:
    return text.replace("\r\n", "\n")


_IDENT = re.compile(r"[A-Za-z_]\w*")


def _context(file: SourceFile) -> TransformContext:
    return TransformContext(frozenset(_IDENT.findall(file.text)), indent_unit(file.text))


def _statement_region(file: SourceFile, first: Node, last: Node) -> tuple[Span, str]:
    region = Span(first.span.start, last.span.end)
    return region, file.line_indent(region.start)


def plan_site(site: MatchSite) -> SitePlan:
    file, idiom = site.file, site.idiom
    nodes = site.components.nodes
    ctx = _context(file)
    data = file.data

    if idiom is I.CHAIN_COMPARISON:
        c1, c2 = nodes
        c1x, c2x = expand_parens(c1.span, data), expand_parens(c2.span, data)
        values = list(site.scenario.ast.values)
        after = values[values.index(c1.ast) + 1]
        nxt = expand_parens(tree_index(site.root).node(after).span, data)
        t1, t2 = file.slice(c1x), file.slice(c2x)
        text = f"{t1} and {t2}"
        shift2 = len(t1.encode("utf-8")) + len(" and ")
        spans = [Span(s.start - c1x.start, s.end - c1x.start) for s in (expand_parens(o, data) for o in c1.attrs["operands"])]
        spans += [Span(s.start - c2x.start + shift2, s.end - c2x.start + shift2) for s in (expand_parens(o, data) for o in c2.attrs["operands"])]
        spans = _outermost(spans)
        return SitePlan(site, c2x, text, "", abstract_operands(text, spans), ctx, delete=Span(c1x.start, nxt.start))

    if idiom in (I.TRUTH_TEST, I.FSTRING):
        node = nodes[0]
        text = _lf(file.slice(node.span))
        return SitePlan(site, node.span, text, "", no_abstraction(text), ctx)

    if idiom is I.STAR_IN_FUNC_CALL:
        region = Span(nodes[0].span.start, nodes[-1].span.end)
        text = _lf(file.slice(region))
        obj = file.slice(tree_index(site.root).node(nodes[0].ast.value).span)
        return SitePlan(site, region, text, "", abstract_specified(text, obj), ctx)

    if idiom is I.WITH:
        index = tree_index(site.root)
        host = index.node(open_host(nodes[0].ast, index, file))
        region, indent = _statement_region(file, host, host)
        text = dedent_block(_lf(file.slice(region)), indent)
        return SitePlan(site, region, text, indent, no_abstraction(text), ctx, statement_level=True)

    if idiom in (I.FOR_MULTI_TARGETS, I.ENUMERATE):
        loop = nodes[0]
        region, indent = _statement_region(file, loop, loop)
        text = dedent_block(_lf(file.slice(region)), indent)
        if idiom is I.FOR_MULTI_TARGETS:
            obj = loop.ast.target.id
        else:
            obj = file.slice(tree_index(site.root).node(loop.ast.iter.args[0].args[0]).span)
        return SitePlan(site, region, text, indent, abstract_specified(text, obj), ctx, statement_level=True)

    if idiom in COMPREHENSIONS or idiom is I.LOOP_ELSE:
        ordered = sorted(nodes, key=lambda n: n.span.start)
        region, indent = _statement_region(file, ordered[0], ordered[-1])
        text = dedent_block(_lf(file.slice(region)), indent)
        return SitePlan(site, region, text, indent, no_abstraction(text), ctx, statement_level=True)

    if idiom in (I.ASSIGN_MULTI_TARGETS, I.CHAIN_ASSIGN_SAME_VALUE):
        region, indent = _statement_region(file, nodes[0], nodes[-1])
        parts, comments = [], []
        for i, node in enumerate(nodes):
            parts.append(dedent_block(_lf(file.slice(node.span)), indent))
            if i + 1 < len(nodes):
                gap = file.slice(Span(node.span.end, nodes[i + 1].span.start))
                comments += re.findall(r"#[^\r\n]*", gap)
        text = "\n".join(parts)
        return SitePlan(site, region, text, indent, no_abstraction(text), ctx, tuple(comments), statement_level=True)

    raise KeyError(idiom)


def _outermost(spans: Sequence[Span]) -> list[Span]:
    """Drop spans nested in another (a parenthesized operand can contain a compare)."""
    return [s for s in spans if not any(o != s and o.contains(s) for o in spans)]


# -- rewriting ------------------------------------------------------------------


def rewrite_site(plan: SitePlan, outcome: Accepted) -> RefactoringCandidate:
    """Restore symbols, splice the result into the file and check that it parses."""
    file, site = plan.site.file, plan.site
    idiomatic = restore(outcome.abstract_idiomatic_code, plan.abstraction.bindings)
    replacement = idiomatic
    if plan.statement_level:
        replacement = "\n".join(list(plan.leading_comments) + [idiomatic])
        replacement = indent_block(replacement, plan.indent)
    if "\r\n" in file.text:
        replacement = replacement.replace("\r\n", "\n").replace("\n", "\r\n")
    edits = [(plan.region, replacement)]
    if plan.delete is not None:
        edits.append((plan.delete, ""))
    new_source = splice(file.text, edits)
    try:
        ast.parse(new_source)
    except SyntaxError as exc:
        raise ResultUnparseable(f"{file.path}: {site.idiom.value} rewrite does not parse ({exc.msg})") from exc
    return RefactoringCandidate(
        site=site,
        non_idiomatic=plan.component_text,
        idiomatic=idiomatic,
        edits=tuple(sorted(edits, key=lambda e: e[0].start)),
        diff=unified_diff(file.text, new_source, file.path),
        new_source=new_source,
        abstraction=plan.abstraction,
        note=LOOP_ELSE_CAVEAT if site.idiom is I.LOOP_ELSE else None,
    )


# -- per-file pipeline ----------------------------------------------------------------


# on identical spans the chained form wins over the tuple form
_PRIORITY = {I.CHAIN_ASSIGN_SAME_VALUE: -1}


def _rank(c: RefactoringCandidate) -> tuple:
    return (c.span.start, -len(c.span), _PRIORITY.get(c.idiom, 0), catalog_index(c.idiom))


def select(candidates: Iterable[RefactoringCandidate]) -> tuple[list[RefactoringCandidate], list[RefactoringCandidate]]:
    """Greedy non-overlapping choice: earlier start, then longer, then more specific."""
    kept: list[RefactoringCandidate] = []
    skipped: list[RefactoringCandidate] = []
    for cand in sorted(candidates, key=_rank):
        if any(cand.span.overlaps(k.span) or cand.span == k.span for k in kept):
            skipped.append(cand)
        else:
            kept.append(cand)
    kept.sort(key=lambda c: c.span.start)
    return kept, skipped


@dataclass
class Diagnostic:
    site_id: str
    idiom: IdiomKind
    line: int
    message: str

    def to_json(self) -> dict:
        return {"site_id": self.site_id, "idiom": self.idiom.value, "line": self.line, "message": self.message}


@dataclass
class PassResult:
    source: SourceFile
    candidates: list[RefactoringCandidate]
    skipped: list[RefactoringCandidate]
    diagnostics: list[Diagnostic]


def run_pass(file: SourceFile, engine, kinds: Optional[Iterable[IdiomKind]] = None) -> PassResult:
    root = parse_source(file)
    accepted: list[RefactoringCandidate] = []
    diagnostics: list[Diagnostic] = []
    for site in find_sites(file, kinds, root):
        line = file.position(site.span.start)[0]
        try:
            plan = plan_site(site)
            outcome = engine.run(site.idiom, plan.abstraction.abstract_code, plan.context)
            if isinstance(outcome, Declined):
                diagnostics.append(Diagnostic(site.site_id, site.idiom, line, f"declined: {outcome.reason}"))
                continue
            accepted.append(rewrite_site(plan, outcome))
        except (ResultUnparseable, OverlappingEdits, KeyError, ValueError) as exc:
            log.info("discarding %s at %s:%d: %s", site.idiom.value, file.path, line, exc)
            diagnostics.append(Diagnostic(site.site_id, site.idiom, line, f"discarded: {exc}"))
    kept, skipped = select(accepted)
    for cand in skipped:
        line = file.position(cand.span.start)[0]
        diagnostics.append(Diagnostic(cand.site.site_id, cand.idiom, line, "skipped: overlap"))
    return PassResult(file, kept, skipped, diagnostics)


def apply_candidates(file: SourceFile, candidates: Sequence[RefactoringCandidate]) -> str:
    """Apply non-overlapping candidates together, falling back to the first alone."""
    edits = [e for c in candidates for e in c.edits]
    merged = splice(file.text, edits)
    try:
        ast.parse(merged)
        return merged
    except SyntaxError:
        return candidates[0].new_source


@dataclass
class FileResult:
    path: Path
    original: str
    final: str
    passes: list[PassResult]

    @property
    def candidates(self) -> list[RefactoringCandidate]:
        return [c for p in self.passes for c in p.candidates]

    @property
    def diagnostics(self) -> list[Diagnostic]:
        return [d for p in self.passes for d in p.diagnostics]

    @property
    def changed(self) -> bool:
        return self.final != self.original

    def diff(self) -> str:
        return unified_diff(self.original, self.final, self.path)


def refactor_source(
    file: SourceFile,
    engine,
    kinds: Optional[Iterable[IdiomKind]] = None,
    max_passes: int = 5,
) -> FileResult:
    """Apply rewrite passes until nothing changes or ``max_passes`` is reached."""
    kinds = list(kinds) if kinds is not None else None
    current = file
    passes: list[PassResult] = []
    for _ in range(max(1, max_passes)):
        result = run_pass(current, engine, kinds)
        passes.append(result)
        if not result.candidates:
            break
        current = SourceFile.from_text(apply_candidates(current, result.candidates), current.path)
    return FileResult(file.path, file.text, current.text, passes)


def write_atomic(path: Path, text: str) -> None:
    """Replace ``path`` by writing a sibling temp file and renaming it over."""
    path = Path(path)
    mode = path.stat().st_mode if path.exists() else None
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(text.encode("utf-8"))
        if mode is not None:
            os.chmod(tmp, mode)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
