"""Detect non-idiomatic Python and rewrite it into Pythonic idioms."""
from .knowledge import IdiomKind, catalog, spec_for
from .syntax import SourceFile, parse_source
from .extraction import find_sites
from .engines import DeterministicEngine, FixtureStore, LLMEngine, replay_engine
from .rewriting import RefactoringCandidate, refactor_source, run_pass
from .evaluation import evaluate, load_benchmark

__all__ = [
    "DeterministicEngine",
    "FixtureStore",
    "IdiomKind",
    "LLMEngine",
    "RefactoringCandidate",
    "SourceFile",
    "catalog",
    "evaluate",
    "find_sites",
    "load_benchmark",
    "parse_source",
    "refactor_source",
    "replay_engine",
    "run_pass",
    "spec_for",
]

__version__ = "0.1.0"
