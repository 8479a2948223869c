import json

import pytest

from idiomizer.cli import data_path
from idiomizer.evaluation import load_benchmark

_ACCEPTANCE: list[str] = []


def record_acceptance(name: str, passed: bool, detail: str = "") -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {name}"
    if detail:
        line += f" :: {detail}"
    _ACCEPTANCE.append(line)
    print(line)


@pytest.fixture
def acceptance():
    return record_acceptance


@pytest.fixture(scope="session")
def golden_entries():
    return load_benchmark(data_path("golden.jsonl"))


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
