"""Command line entry point: detect, refactor, eval and idioms subcommands."""
from __future__ import annotations

import argparse
import fnmatch
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence, TextIO

from .engines import DeterministicEngine, EngineUnavailable, Endpoint, FixtureStore, LLMEngine, replay_engine
from .extraction import find_sites
from .knowledge import IdiomKind, catalog, catalog_json
from .rewriting import FileResult, refactor_source, write_atomic
from .syntax import SourceDecodeError, SourceFile, parse_source

log = logging.getLogger("idiomizer")

SUBCOMMANDS = ("detect", "refactor", "eval", "idioms")
CONFIG_NAME = "idiomizer.json"
ENGINES = ("deterministic", "llm", "replay")


class UsageError(Exception):
    pass


def data_path(name: str) -> Path:
    return Path(str(resources.files("idiomizer") / "data" / name))


@dataclass
class RunConfig:
    paths: list[str] = field(default_factory=list)
    idioms: list[str] = field(default_factory=list)
    engine: str = "deterministic"
    fix: bool = False
    output: str = "diff"
    check: bool = False
    max_passes: int = 5
    fixture_path: Optional[str] = None
    record: bool = False
    include: list[str] = field(default_factory=lambda: ["*.py"])
    exclude: list[str] = field(default_factory=list)
    jobs: Optional[int] = None

    def kinds(self) -> list[IdiomKind]:
        if not self.idioms:
            return [spec.kind for spec in catalog()]
        try:
            return [IdiomKind.parse(name) for name in self.idioms]
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def validate(self) -> None:
        if self.engine not in ENGINES:
            raise UsageError(f"unknown engine {self.engine!r}")
        if self.engine == "replay" and not self.fixture_path:
            raise UsageError("--engine replay needs --fixtures")
        if self.max_passes < 1:
            raise UsageError("max_passes must be at least 1")
        self.kinds()


def find_config(start: Path) -> Optional[Path]:
    """``idiomizer.json`` in ``start`` or the nearest parent, stopping at a repository root."""
    for directory in [start, *start.parents]:
        candidate = directory / CONFIG_NAME
        if candidate.is_file():
            return candidate
        if (directory / ".git").exists():
            return None
    return None


def load_config(path: Optional[Path]) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: unreadable config ({exc})") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    known = {f.name for f in fields(RunConfig)} | {"fixtures"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"{path}: unknown config keys {unknown}")
    if "fixtures" in data:
        data["fixture_path"] = data.pop("fixtures")
    return data


def make_engine(name: str, fixture_path: Optional[str], record: bool = False):
    if name == "deterministic":
        return DeterministicEngine()
    if name == "replay":
        if not fixture_path:
            raise UsageError("--engine replay needs --fixtures")
        return replay_engine(FixtureStore(fixture_path))
    endpoint = Endpoint.from_env()
    if endpoint is None and not fixture_path:
        raise UsageError("--engine llm needs IDIOMIZER_LLM_ENDPOINT or --fixtures")
    return LLMEngine(FixtureStore(fixture_path), endpoint, record)


def collect_files(paths: Sequence[str], include: Sequence[str], exclude: Sequence[str]) -> tuple[list[Path], list[str]]:
    """Python files under ``paths`` in lexicographic order, plus paths that do not exist."""
    found: set[Path] = set()
    missing: list[str] = []

    def wanted(rel: str) -> bool:
        name = rel.rsplit("/", 1)[-1]
        if not any(fnmatch.fnmatch(name, g) or fnmatch.fnmatch(rel, g) for g in include):
            return False
        return not any(fnmatch.fnmatch(rel, g) or fnmatch.fnmatch(name, g) for g in exclude)

    for raw in paths:
        path = Path(raw)
        if path.is_file():
            found.add(path)
        elif path.is_dir():
            for sub in path.rglob("*"):
                rel = sub.relative_to(path).as_posix()
                if any(part.startswith(".") or part == "__pycache__" for part in sub.relative_to(path).parts):
                    continue
                if sub.is_file() and wanted(rel):
                    found.add(sub)
        else:
            missing.append(raw)
    return sorted(found, key=lambda p: p.as_posix()), missing


@dataclass
class FileOutcome:
    path: Path
    result: Optional[FileResult] = None
    error: Optional[str] = None
    operational: bool = False


def process_file(path: Path, config: RunConfig, engine) -> FileOutcome:
    try:
        source = SourceFile.read(path)
        parse_source(source)
    except (OSError, SourceDecodeError) as exc:
        return FileOutcome(path, error=f"unreadable: {exc}")
    except SyntaxError as exc:
        return FileOutcome(path, error=f"syntax error at line {exc.lineno}: {exc.msg}")
    try:
        result = refactor_source(source, engine, config.kinds(), config.max_passes)
    except EngineUnavailable as exc:
        return FileOutcome(path, error=f"engine unavailable: {exc}", operational=True)
    return FileOutcome(path, result)


def _map(func, items: Sequence, jobs: Optional[int]) -> list:
    workers = jobs or os.cpu_count() or 1
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def run_refactor(config: RunConfig, out: TextIO, err: TextIO) -> int:
    config.validate()
    engine = make_engine(config.engine, config.fixture_path, config.record)
    files, missing = collect_files(config.paths, config.include, config.exclude)
    if missing:
        raise UsageError(f"no such path: {', '.join(missing)}")
    outcomes = _map(lambda p: process_file(p, config, engine), files, config.jobs)
    total = 0
    operational = False
    for item in outcomes:
        if item.error:
            print(f"{item.path}: error: {item.error}", file=err)
            operational |= item.operational
            continue
        result = item.result
        total += len(result.candidates)
        for diag in result.diagnostics:
            print(f"{item.path}:{diag.line}: {diag.idiom.value}: {diag.message}", file=err)
        if config.output == "json":
            for cand in result.candidates:
                out.write(json.dumps(cand.to_json(), sort_keys=True) + "\n")
        elif not config.check and not config.fix:
            out.write(result.diff())
        if config.fix and result.changed:
            write_atomic(item.path, result.final)
    verb = "fixed" if config.fix else "found"
    print(f"{total} candidate(s) {verb} in {len(files)} file(s)", file=err)
    if operational:
        return 2
    if config.fix:
        return 0
    return 1 if total else 0


def run_detect(config: RunConfig, out: TextIO, err: TextIO) -> int:
    config.validate()
    files, missing = collect_files(config.paths, config.include, config.exclude)
    if missing:
        raise UsageError(f"no such path: {', '.join(missing)}")
    kinds = config.kinds()

    def detect(path: Path) -> tuple[Path, list[dict], Optional[str]]:
        try:
            source = SourceFile.read(path)
            return path, [s.to_json() for s in find_sites(source, kinds)], None
        except (OSError, SourceDecodeError) as exc:
            return path, [], f"unreadable: {exc}"
        except SyntaxError as exc:
            return path, [], f"syntax error at line {exc.lineno}: {exc.msg}"

    found = 0
    for path, sites, error in _map(detect, files, config.jobs):
        if error:
            print(f"{path}: error: {error}", file=err)
        for site in sites:
            out.write(json.dumps(site, sort_keys=True) + "\n")
        found += len(sites)
    return 1 if found else 0


def run_eval(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    from .evaluation import FormatError, evaluate, load_benchmark

    benchmark = args.benchmark or str(data_path("golden.jsonl"))
    fixtures = args.fixtures
    if args.engine in ("replay", "llm") and fixtures is None:
        fixtures = str(data_path("fixtures.jsonl"))
    engine = make_engine(args.engine, fixtures, args.record)
    try:
        entries = load_benchmark(benchmark)
    except FormatError as exc:
        print(f"{benchmark}: {exc}", file=err)
        return 2
    except OSError as exc:
        raise UsageError(str(exc)) from None
    try:
        report = evaluate(entries, engine, args.jobs)
    except EngineUnavailable as exc:
        print(f"error: engine unavailable: {exc}", file=err)
        return 2
    text = report.dumps()
    out.write(text)
    if args.report:
        from .plotting import plot_metrics

        path = Path(args.report)
        path.write_text(text, encoding="utf-8")
        figure = plot_metrics(report.to_json(), path.with_suffix(".png"))
        print(f"wrote {path} and {figure}", file=err)
    return 0


def run_idioms(args: argparse.Namespace, out: TextIO) -> int:
    if args.json:
        out.write(catalog_json() + "\n")
        return 0
    for spec in catalog():
        out.write(f"{spec.kind.value:<24} {spec.abstraction_mode.value:<17} {len(spec.conditions)} condition(s)\n")
    return 0


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("paths", nargs="*", help="files or directories")
    p.add_argument("--idiom", action="append", dest="idioms", metavar="NAME", help="restrict to an idiom (repeatable)")
    p.add_argument("--include", action="append", metavar="GLOB", help="file glob to include (default *.py)")
    p.add_argument("--exclude", action="append", metavar="GLOB", help="file glob to exclude")
    p.add_argument("--jobs", type=int, metavar="N", help="worker threads (default: CPU count)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idiomizer", description="Refactor non-idiomatic Python into Pythonic idioms.")
    sub = parser.add_subparsers(dest="command")

    detect = sub.add_parser("detect", help="list refactorable sites as JSON lines")
    _add_run_flags(detect)

    refactor = sub.add_parser("refactor", help="show or apply rewrites (default)")
    _add_run_flags(refactor)
    refactor.add_argument("--engine", choices=ENGINES)
    refactor.add_argument("--fix", action="store_true", default=None, help="rewrite files in place")
    refactor.add_argument("--json", action="store_true", help="emit candidates as JSON lines")
    refactor.add_argument("--check", action="store_true", help="only report whether candidates exist")
    refactor.add_argument("--fixtures", metavar="PATH", help="recorded model replies (JSON lines)")
    refactor.add_argument("--record", action="store_true", default=None, help="append live model replies to --fixtures")
    refactor.add_argument("--max-passes", type=int, dest="max_passes")

    ev = sub.add_parser("eval", help="score a benchmark of gold code pairs")
    ev.add_argument("--benchmark", metavar="PATH", help="benchmark JSON lines (default: bundled golden set)")
    ev.add_argument("--engine", choices=ENGINES, default="deterministic")
    ev.add_argument("--fixtures", metavar="PATH")
    ev.add_argument("--record", action="store_true")
    ev.add_argument("--report", metavar="PATH", help="write the JSON report here and a PNG chart beside it")
    ev.add_argument("--jobs", type=int, metavar="N")
    ev.add_argument("-v", "--verbose", action="store_true")

    idioms = sub.add_parser("idioms", help="list the idiom catalog")
    idioms.add_argument("--json", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace, cwd: Optional[Path] = None) -> RunConfig:
    settings = load_config(find_config((cwd or Path.cwd()).resolve()))
    overrides = {
        "paths": args.paths or None,
        "idioms": args.idioms,
        "include": args.include,
        "exclude": args.exclude,
        "jobs": args.jobs,
        "engine": getattr(args, "engine", None),
        "fix": getattr(args, "fix", None),
        "check": getattr(args, "check", None) or None,
        "fixture_path": getattr(args, "fixtures", None),
        "record": getattr(args, "record", None),
        "max_passes": getattr(args, "max_passes", None),
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    if getattr(args, "json", False):
        settings["output"] = "json"
    config = RunConfig(**settings)
    if not config.paths:
        config.paths = ["."]
    return config


def main(argv: Optional[Sequence[str]] = None, out: TextIO = None, err: TextIO = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or (argv[0] not in SUBCOMMANDS and argv[0] not in ("-h", "--help")):
        argv.insert(0, "refactor")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, stream=err)
    try:
        if args.command == "idioms":
            return run_idioms(args, out)
        if args.command == "eval":
            return run_eval(args, out, err)
        config = config_from_args(args)
        if args.command == "detect":
            return run_detect(config, out, err)
        return run_refactor(config, out, err)
    except UsageError as exc:
        print(f"idiomizer: error: {exc}", file=err)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
